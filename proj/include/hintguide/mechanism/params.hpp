#pragma once

#include "hintguide/common/kv_config.hpp"

#include <optional>
#include <stdexcept>
#include <string>

namespace hintguide::mechanism {

class ParamError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline constexpr double kDefaultThreshold = 0.75;
inline constexpr double kDefaultMuMin = 0.1;
inline constexpr double kDefaultMuMax = 1.0;

// Absolute tolerance for equalities; strict inequalities need more slack than kStrictSlack.
inline constexpr double kEqualityTolerance = 1e-9;
inline constexpr double kStrictSlack = 1e-12;

// Everything the payment rule depends on.
struct MechanismParams {
    double threshold = kDefaultThreshold;  // T: minimum hint-stage confidence
    double epsilon = 0.0;                  // half-width of the unsure band around 1/2
    double mu_min = kDefaultMuMin;
    double mu_max = kDefaultMuMax;
    int gold_count = 1;      // G
    int question_count = 1;  // N
    // Multiplier for a skipped gold answer in the skip comparator (s).
    double skip_multiplier = 0.0;

    double budget() const { return mu_max - mu_min; }

    // T, epsilon = epsilon_min(T), skip multiplier = hint multiplier.
    static MechanismParams with_defaults(double threshold, int gold_count, int question_count,
                                         double mu_min = kDefaultMuMin, double mu_max = kDefaultMuMax);
};

enum class Strictness {
    // Every invariant: T in (5/8, 1), epsilon in [epsilon_min(T), 1/2).
    Full,
    // epsilon only in (0, 1/2); lets the verifiers examine inadmissible bands.
    AllowAnyEpsilon,
};

// Throws ParamError describing the first violated invariant.
void validate(const MechanismParams& p, Strictness strictness = Strictness::Full);
bool is_valid(const MechanismParams& p, Strictness strictness = Strictness::Full);

// Keys: T, epsilon, mu_min, mu_max, G, N, skip_s. Missing epsilon and skip_s
// take their derived defaults; missing N equals G.
MechanismParams params_from_config(const KvConfig& cfg, Strictness strictness = Strictness::Full);
MechanismParams load_params(const std::string& path, Strictness strictness = Strictness::Full);

std::string to_config_text(const MechanismParams& p);

}  // namespace hintguide::mechanism
