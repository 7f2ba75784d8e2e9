#include "hintguide/mechanism/payment.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace hintguide::mechanism {

std::string_view to_symbol(AnswerState s)
{
    switch (s) {
    case AnswerState::DirectCorrect:
        return "D+";
    case AnswerState::DirectWrong:
        return "D-";
    case AnswerState::HintCorrect:
        return "H+";
    case AnswerState::HintWrong:
        return "H-";
    }
    return "?";
}

std::optional<AnswerState> parse_answer_state(std::string_view symbol)
{
    for (auto s : kAllAnswerStates) {
        if (to_symbol(s) == symbol) {
            return s;
        }
    }
    return std::nullopt;
}

std::string join_states(const std::vector<AnswerState>& states)
{
    std::string out;
    for (std::size_t i = 0; i < states.size(); ++i) {
        if (i != 0) {
            out += ' ';
        }
        out += to_symbol(states[i]);
    }
    return out;
}

std::string_view to_symbol(ComparatorState s)
{
    switch (s) {
    case ComparatorState::Correct:
        return "correct";
    case ComparatorState::Wrong:
        return "wrong";
    case ComparatorState::Skipped:
        return "skipped";
    }
    return "?";
}

double epsilon_min(double threshold)
{
    if (!(threshold > 0.5 && threshold < 1.0)) {
        throw std::domain_error(fmt::format("epsilon_min: T = {} outside (1/2, 1)", threshold));
    }
    return threshold - std::sqrt(threshold * threshold - 0.25);
}

double hint_multiplier(double threshold)
{
    if (!(threshold > 0.625 && threshold < 1.0)) {
        throw std::domain_error(fmt::format("hint_multiplier: T = {} outside (5/8, 1)", threshold));
    }
    return (0.5 - epsilon_min(threshold)) / (2.0 * threshold - 1.0);
}

double PaymentTable::score(AnswerState s) const
{
    switch (s) {
    case AnswerState::DirectCorrect:
        return d_plus;
    case AnswerState::DirectWrong:
        return d_minus;
    case AnswerState::HintCorrect:
        return h_plus;
    case AnswerState::HintWrong:
        return h_minus;
    }
    return 0.0;
}

PaymentTable hint_guided_table(double threshold)
{
    return PaymentTable{1.0, 0.0, hint_multiplier(threshold), 0.0};
}

double g_value(AnswerState state, const MechanismParams& params)
{
    switch (state) {
    case AnswerState::DirectCorrect:
        return 1.0;
    case AnswerState::HintCorrect:
        return hint_multiplier(params.threshold);
    case AnswerState::DirectWrong:
    case AnswerState::HintWrong:
        return 0.0;
    }
    return 0.0;
}

double payment(std::span<const AnswerState> gold_states, const MechanismParams& params)
{
    if (gold_states.size() != static_cast<std::size_t>(params.gold_count)) {
        throw ParamError(fmt::format("expected {} gold states, got {}", params.gold_count, gold_states.size()));
    }
    const double h = hint_multiplier(params.threshold);
    double product = 1.0;
    for (auto s : gold_states) {
        switch (s) {
        case AnswerState::DirectCorrect:
            break;
        case AnswerState::HintCorrect:
            product *= h;
            break;
        case AnswerState::DirectWrong:
        case AnswerState::HintWrong:
            return params.mu_min;
        }
    }
    return params.budget() * product + params.mu_min;
}

double comparator_payment(ComparatorKind kind, std::span<const ComparatorState> gold_states,
                          const MechanismParams& params)
{
    if (gold_states.size() != static_cast<std::size_t>(params.gold_count)) {
        throw ParamError(fmt::format("expected {} gold states, got {}", params.gold_count, gold_states.size()));
    }
    switch (kind) {
    case ComparatorKind::BaselineAdditive: {
        std::size_t correct = 0;
        for (auto s : gold_states) {
            if (s == ComparatorState::Skipped) {
                throw ParamError("additive baseline has no skip option");
            }
            correct += s == ComparatorState::Correct ? 1 : 0;
        }
        return params.mu_min + params.budget() * static_cast<double>(correct) / static_cast<double>(params.gold_count);
    }
    case ComparatorKind::SkipMultiplicative: {
        double product = 1.0;
        for (auto s : gold_states) {
            if (s == ComparatorState::Wrong) {
                product = 0.0;
            } else if (s == ComparatorState::Skipped) {
                product *= params.skip_multiplier;
            }
        }
        return params.mu_min + params.budget() * product;
    }
    }
    throw ParamError("unknown comparator");
}

std::string format_money(double amount)
{
    auto s = fmt::format("{:.6f}", amount);
    if (s == "-0.000000") {
        s = "0.000000";
    }
    return s;
}

}  // namespace hintguide::mechanism
