#pragma once

#include "hintguide/harness/experiment.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hintguide::harness {

struct SweepPoint {
    double threshold = 0.0;
    double epsilon = 0.0;
    bool valid = false;  // admissible parameters and all pricing conditions hold
    std::string reason;  // why the point is invalid
    std::optional<MetricsBundle> metrics;  // absent when the point cannot be simulated
};

// One experiment per (T, epsilon) pair. An empty T list means the base T; an
// empty epsilon list means epsilon_min at each T. Invalid points are
// reported, and still simulated when T and epsilon lie in their open ranges.
std::vector<SweepPoint> sweep_parameters(const ExperimentConfig& base, std::span<const double> thresholds,
                                         std::span<const double> epsilons);

}  // namespace hintguide::harness
