#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hintguide::mechanism {

// Evaluation of one gold-standard answer: which stage it was given in and
// whether it matched the requester's known answer.
enum class AnswerState : std::uint8_t {
    DirectCorrect,  // D+
    DirectWrong,    // D-
    HintCorrect,    // H+
    HintWrong,      // H-
};

inline constexpr AnswerState kAllAnswerStates[] = {
    AnswerState::DirectCorrect, AnswerState::DirectWrong, AnswerState::HintCorrect, AnswerState::HintWrong};

std::string_view to_symbol(AnswerState s);
std::optional<AnswerState> parse_answer_state(std::string_view symbol);
std::string join_states(const std::vector<AnswerState>& states);

// Gold evaluations under the single-stage and skip-stage comparators.
enum class ComparatorState : std::uint8_t { Correct, Wrong, Skipped };

std::string_view to_symbol(ComparatorState s);

enum class ComparatorKind : std::uint8_t { BaselineAdditive, SkipMultiplicative };

}  // namespace hintguide::mechanism
