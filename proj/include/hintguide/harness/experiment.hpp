#pragma once

#include "hintguide/harness/config.hpp"
#include "hintguide/sim/session.hpp"

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace hintguide::harness {

struct CurvePoint {
    int n_workers = 0;
    double mean_error = 0.0;
    double std_error = 0.0;
};

struct PaymentSummary {
    double mean = 0.0;
    double std_error = 0.0;
};

struct WorkerInfo {
    std::string id;
    std::string label;
    double planted_quality = 0.0;
};

struct MechanismMetrics {
    Mechanism mechanism = Mechanism::Hybrid;
    double completion_pct = 0.0;  // answered share of all question slots
    double correct_pct = 0.0;
    double incorrect_pct = 0.0;
    double unlabeled_pct = 0.0;
    double hint_rate = 0.0;  // hint-stage share of answered questions
    std::vector<CurvePoint> error_curve;
    std::vector<CurvePoint> rescaled_curve;  // empty with fewer than 5 ranked workers
    PaymentSummary payment;
    std::map<std::string, PaymentSummary> payment_by_label;
    double rank_correlation = 0.0;  // hint-usage ranking vs planted quality
    std::vector<sim::SessionTranscript> transcripts;
};

struct MetricsBundle {
    std::string task;
    mechanism::MechanismParams params;
    std::uint64_t seed = 0;
    std::vector<sim::Question> questions;
    std::vector<WorkerInfo> workers;  // the order of each transcripts vector
    std::vector<std::vector<std::size_t>> gold_sets;
    std::vector<MechanismMetrics> mechanisms;
    std::vector<std::string> invariant_failures;

    const MechanismMetrics* find(Mechanism m) const;
};

// Every worker answers the same batch under every mechanism with the same
// session seed, and all mechanisms share the worker subsets and gold sets,
// so differences between mechanisms come from behaviour alone.
// AllowAnyEpsilon admits bands narrower than the minimum, for sweeps.
MetricsBundle run_experiment(const ExperimentConfig& config,
                             mechanism::Strictness strictness = mechanism::Strictness::Full);

}  // namespace hintguide::harness
