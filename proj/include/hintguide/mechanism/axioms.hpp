#pragma once
// Executable checks of the mechanism's design axioms: the single-question
// pricing conditions, incentive compatibility over a belief grid, and the
// mild / harsh no-free-lunch axioms by enumeration.

#include "hintguide/mechanism/params.hpp"
#include "hintguide/mechanism/payment.hpp"
#include "hintguide/mechanism/types.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hintguide::mechanism {

struct ConditionCheck {
    bool pass = false;
    double slack = 0.0;  // >= 0 (or > 0 for strict conditions) when satisfied
    std::string witness;  // non-empty whenever pass is false
};

// Conditions:
//   A: d+ > d-, h+ > h-, d+ > h+          slack = smallest of the three gaps
//   B: (d+ - d-)/(1 - 2e) >= (h+ - h-)/(2e) slack = lhs - rhs
//   C: d+ - d- <= (2T - 1)/(1/2 - e) (h+ - h-) slack = rhs - lhs
struct PricingReport {
    ConditionCheck a;
    ConditionCheck b;
    ConditionCheck c;

    bool all_pass() const { return a.pass && b.pass && c.pass; }
};

// Throws std::domain_error unless 0 < epsilon < 1/2 and 1/2 < T < 1.
PricingReport check_pricing_conditions(const PaymentTable& table, double threshold, double epsilon);

enum class Strategy : std::uint8_t { DirectFavored, DirectDisfavored, Hint };

std::string_view to_string(Strategy s);

// Expected single-question payment of each strategy under belief p. A hint
// stage answer is modelled as correct with probability exactly T.
struct StrategyPayoffs {
    double direct_favored = 0.0;
    double direct_disfavored = 0.0;
    double hint = 0.0;
};

StrategyPayoffs strategy_payoffs(const PaymentTable& table, double threshold, double belief);
// Direct when |p - 1/2| >= epsilon, hint otherwise.
Strategy prescribed_strategy(double belief, double epsilon);

// Inside the unsure band the hint payoff can fall short of direct answering.
struct BandGap {
    double belief = 0.0;
    double gap = 0.0;  // best direct payoff minus hint payoff, > 0
};

struct IcReport {
    bool pass = false;
    std::size_t points = 0;
    std::size_t direct_points = 0;
    std::size_t boundary_points = 0;
    std::size_t band_points = 0;
    // Smallest margin of the prescribed strategy over all direct-prescribed points.
    double worst_direct_slack = 0.0;
    double worst_direct_belief = 0.0;
    std::optional<double> violating_belief;
    std::vector<BandGap> band_gaps;
    // Once in the hint stage, answering the hinted option beats the other by this much.
    double hint_stage_margin = 0.0;
};

inline constexpr double kBoundaryWindow = 1e-6;

// Beliefs within kBoundaryWindow of 1/2 +- epsilon only need non-strict maximality.
IcReport ic_check(const MechanismParams& params, std::span<const double> belief_grid);

// i / (points + 1), i = 1..points
std::vector<double> uniform_belief_grid(int points);

struct NflOptions {
    int enumeration_cap = 10;
    bool allow_sampling = true;
    std::size_t samples = 100000;
    std::uint64_t seed = 0x5eedULL;
};

struct NflReport {
    bool pass = false;
    bool sampled = false;
    std::size_t vectors_checked = 0;
    std::vector<AnswerState> witness;
    double witness_payment = 0.0;
    // Payment of the all-H+ vector.
    double exempt_payment = 0.0;
};

// Every vector over {D-, H+, H-}^G pays mu_min except all-H+, which pays
// mu_min + beta * h^G > mu_min. Exhaustive up to the cap, sampled above it
// when allowed, otherwise ParamError.
NflReport check_mild_nfl(const MechanismParams& params, const NflOptions& options = {});

// The harsh axiom drops the all-H+ exemption. The hint-guided rule violates it;
// the report's witness is the all-H+ vector.
NflReport check_harsh_nfl(const MechanismParams& params, const NflOptions& options = {});

struct AxiomReport {
    std::optional<ConditionCheck> epsilon_range;
    std::optional<PricingReport> pricing;
    std::optional<IcReport> ic;
    std::optional<NflReport> mild_nfl;
    std::optional<NflReport> harsh_nfl;
    double mu_min = 0.0;

    // Everything except the harsh axiom, which is informational.
    bool intended_checks_pass() const;
};

AxiomReport verify_mechanism(const MechanismParams& params, int belief_points = 99,
                             const NflOptions& options = {});

// One tab-separated line per check:
//   condition=<name>\tverdict=<pass|fail|report>\tslack=<value>\twitness=<text>
std::string serialize(const AxiomReport& report);

}  // namespace hintguide::mechanism
