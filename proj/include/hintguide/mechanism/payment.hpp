#pragma once
// The multiplicative hint-guided payment rule and its comparators.

#include "hintguide/mechanism/params.hpp"
#include "hintguide/mechanism/types.hpp"

#include <span>
#include <string>

namespace hintguide::mechanism {

// Lower end of the admissible unsure band: T - sqrt(T^2 - 1/4).
// Defined for T in (1/2, 1); throws std::domain_error otherwise.
double epsilon_min(double threshold);

// Pay multiplier for a correct hint-stage answer, (1/2 - eps_min) / (2T - 1).
// Requires T in (5/8, 1); the result lies in (0, 1).
double hint_multiplier(double threshold);

// Per-question scores d+, d-, h+, h-.
struct PaymentTable {
    double d_plus = 0.0;
    double d_minus = 0.0;
    double h_plus = 0.0;
    double h_minus = 0.0;

    double score(AnswerState s) const;
};

// {1, 0, hint_multiplier(T), 0}
PaymentTable hint_guided_table(double threshold);

double g_value(AnswerState state, const MechanismParams& params);

// mu_min + (mu_max - mu_min) * prod g(a_i). Throws ParamError unless
// states.size() == params.gold_count.
double payment(std::span<const AnswerState> gold_states, const MechanismParams& params);

// BaselineAdditive: mu_min + beta * (#correct / G), Skipped not allowed.
// SkipMultiplicative: mu_min + beta * prod g_skip(a_i) with g_skip = {1, 0, s}.
double comparator_payment(ComparatorKind kind, std::span<const ComparatorState> gold_states,
                          const MechanismParams& params);

// Money is carried as a fixed six-decimal string once it leaves the process.
std::string format_money(double amount);

}  // namespace hintguide::mechanism
