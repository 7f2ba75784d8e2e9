#include "hintguide/sim/scoring.hpp"

#include "hintguide/mechanism/payment.hpp"

#include <fmt/format.h>

namespace hintguide::sim {

using mechanism::AnswerState;
using mechanism::ComparatorState;
using mechanism::ParamError;

std::string_view to_string(PaymentRule r)
{
    switch (r) {
    case PaymentRule::Hybrid:
        return "hybrid";
    case PaymentRule::Baseline:
        return "baseline";
    case PaymentRule::Skip:
        return "skip";
    }
    return "?";
}

std::optional<PaymentRule> parse_payment_rule(std::string_view name)
{
    for (auto r : {PaymentRule::Hybrid, PaymentRule::Baseline, PaymentRule::Skip}) {
        if (to_string(r) == name) {
            return r;
        }
    }
    return std::nullopt;
}

namespace {

bool known_correct(const AnswerRecord& r)
{
    if (!r.correct) {
        throw ParamError(fmt::format("gold question '{}' has no known correctness", r.question_id));
    }
    return *r.correct;
}

}  // namespace

AnswerState answer_state(const AnswerRecord& r)
{
    switch (r.stage) {
    case Stage::Main:
        return known_correct(r) ? AnswerState::DirectCorrect : AnswerState::DirectWrong;
    case Stage::Hint:
        return known_correct(r) ? AnswerState::HintCorrect : AnswerState::HintWrong;
    case Stage::Skipped:
    case Stage::Unanswered:
        break;
    }
    return AnswerState::DirectWrong;
}

ComparatorState comparator_state(const AnswerRecord& r)
{
    if (r.stage == Stage::Skipped) {
        return ComparatorState::Skipped;
    }
    if (!r.answered()) {
        return ComparatorState::Wrong;
    }
    return known_correct(r) ? ComparatorState::Correct : ComparatorState::Wrong;
}

std::vector<AnswerState> gold_states(const SessionTranscript& t)
{
    std::vector<AnswerState> out;
    for (const auto& r : t.answers) {
        if (r.gold) {
            out.push_back(answer_state(r));
        }
    }
    return out;
}

namespace {

template <typename Records>
double pay(const Records& records, const mechanism::MechanismParams& params, PaymentRule rule)
{
    if (records.size() != static_cast<std::size_t>(params.gold_count)) {
        throw ParamError(fmt::format("transcript has {} gold answers but G = {}", records.size(), params.gold_count));
    }
    if (rule == PaymentRule::Hybrid) {
        std::vector<AnswerState> states;
        states.reserve(records.size());
        for (const AnswerRecord* r : records) {
            states.push_back(answer_state(*r));
        }
        return mechanism::payment(states, params);
    }
    std::vector<ComparatorState> states;
    states.reserve(records.size());
    for (const AnswerRecord* r : records) {
        auto s = comparator_state(*r);
        // The additive baseline offers no skip; a skip there earns nothing.
        if (rule == PaymentRule::Baseline && s == ComparatorState::Skipped) {
            s = ComparatorState::Wrong;
        }
        states.push_back(s);
    }
    return mechanism::comparator_payment(rule == PaymentRule::Baseline ? mechanism::ComparatorKind::BaselineAdditive
                                                                       : mechanism::ComparatorKind::SkipMultiplicative,
                                         states, params);
}

}  // namespace

double transcript_payment(const SessionTranscript& t, const mechanism::MechanismParams& params, PaymentRule rule)
{
    std::vector<const AnswerRecord*> gold;
    for (const auto& r : t.answers) {
        if (r.gold) {
            gold.push_back(&r);
        }
    }
    return pay(gold, params, rule);
}

double payment_for_gold(const SessionTranscript& t, std::span<const std::size_t> gold_positions,
                        const mechanism::MechanismParams& params, PaymentRule rule)
{
    std::vector<const AnswerRecord*> gold;
    gold.reserve(gold_positions.size());
    for (std::size_t i : gold_positions) {
        gold.push_back(&t.answers.at(i));
    }
    return pay(gold, params, rule);
}

}  // namespace hintguide::sim
