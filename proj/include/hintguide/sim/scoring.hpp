#pragma once

// Turning the gold answers of a transcript into money.

#include "hintguide/mechanism/params.hpp"
#include "hintguide/mechanism/types.hpp"
#include "hintguide/sim/session.hpp"

#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace hintguide::sim {

enum class PaymentRule : std::uint8_t {
    Hybrid,    // multiplicative over D+/D-/H+/H-
    Baseline,  // additive share of correct gold answers
    Skip,      // multiplicative with a skip multiplier
};

std::string_view to_string(PaymentRule r);
std::optional<PaymentRule> parse_payment_rule(std::string_view name);

// Gold evaluation of one record. An unanswered or skipped gold question
// evaluates as D-. Throws ParamError when the correctness is unknown.
mechanism::AnswerState answer_state(const AnswerRecord& record);
mechanism::ComparatorState comparator_state(const AnswerRecord& record);

// States of the records flagged gold, in transcript order.
std::vector<mechanism::AnswerState> gold_states(const SessionTranscript& t);

// Payment over the records flagged gold; their number must equal G.
double transcript_payment(const SessionTranscript& t, const mechanism::MechanismParams& params, PaymentRule rule);

// Payment treating the records at `gold_positions` as the gold set.
double payment_for_gold(const SessionTranscript& t, std::span<const std::size_t> gold_positions,
                        const mechanism::MechanismParams& params, PaymentRule rule);

}  // namespace hintguide::sim
