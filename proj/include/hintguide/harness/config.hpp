#pragma once

// Experiment configuration files.
//
//   task = binary30
//   questions = 30
//   options = 2
//   T = 0.75
//   mechanisms = single_add, single_mul, hybrid, skip
//   n_workers = 5, 6, 7, 8, 9, 10
//   seed = 1
//   worker = high_quality count=6 accuracy=0.92 spread=0.05
//   worker = spammer count=2
//
// Omitted keys: gold = max(1, questions / 10), epsilon = epsilon_min(T),
// skip_s = hint multiplier, mu_min = 0.1, mu_max = 1, repetitions = 200,
// payment_repetitions = 200, seed = 1.

#include "hintguide/common/kv_config.hpp"
#include "hintguide/mechanism/params.hpp"
#include "hintguide/sim/scoring.hpp"
#include "hintguide/sim/session.hpp"
#include "hintguide/sim/worker.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace hintguide::harness {

enum class Mechanism : std::uint8_t {
    SingleAdditive,        // Single(+)
    SingleMultiplicative,  // Single(x)
    Hybrid,                // Hybrid(x)
    Skip,                  // skip-based comparator
    VisibleHints,          // control arm: hints always on screen
};

inline constexpr Mechanism kAllMechanisms[] = {Mechanism::SingleAdditive, Mechanism::SingleMultiplicative,
                                               Mechanism::Hybrid, Mechanism::Skip, Mechanism::VisibleHints};

std::string_view to_string(Mechanism m);     // config key, e.g. single_add
std::string_view display_name(Mechanism m);  // e.g. Single(+)
std::optional<Mechanism> parse_mechanism(std::string_view name);
sim::StageSetting stage_setting(Mechanism m);
sim::PaymentRule payment_rule(Mechanism m);

struct PopulationEntry {
    sim::WorkerArchetype archetype;
    int count = 1;
    std::string label;  // defaults to the archetype kind
};

struct ExperimentConfig {
    std::string task = "task";
    int questions = 30;
    int options = 2;
    bool subjective = false;
    mechanism::MechanismParams params;
    std::vector<Mechanism> mechanisms;
    std::vector<int> n_workers{5, 6, 7, 8, 9, 10};
    int repetitions = 200;
    int payment_repetitions = 200;
    std::uint64_t seed = 1;
    std::vector<PopulationEntry> population;
    std::vector<double> sweep_threshold;
    std::vector<double> sweep_epsilon;

    int worker_count() const;
};

// Throws ConfigError (with source and line) or ParamError.
ExperimentConfig experiment_from_config(const KvConfig& cfg);
ExperimentConfig load_experiment(const std::filesystem::path& path);

// Checks the cross-field constraints; throws ConfigError or ParamError.
void validate(const ExperimentConfig& config,
              mechanism::Strictness strictness = mechanism::Strictness::Full);

}  // namespace hintguide::harness
