#pragma once
// Worker decision models for the two-stage (main / hint) answering flow.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hintguide::sim {

// p_main = P(A correct) before hints, p_hint = P(A correct | hint).
// P(B correct | hint) is 1 - p_hint.
struct BeliefState {
    double p_main = 0.5;
    double p_hint = 0.5;
};

enum class MainStageAction : std::uint8_t { AnswerA, AnswerB, EnterHint };
enum class BinaryOption : std::uint8_t { A, B };

// A hint-stage belief that clears T for neither option. Simulated hint
// posteriors always clear the threshold, so this signals a generator bug.
class IndecisionError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// A if p_main in [1/2 + eps, 1), B if p_main in (0, 1/2 - eps], hint otherwise.
MainStageAction decide_main(const BeliefState& belief, double epsilon);

// A if p_hint >= T, B if 1 - p_hint >= T.
BinaryOption decide_hint(const BeliefState& belief, double threshold);

// Multi-option form: answer the top option directly when its belief is at
// least 1/2 + eps, otherwise go to the hint stage. Returns the option index
// or nullopt for the hint stage.
std::optional<int> decide_main_top(const double* beliefs, int option_count, double epsilon);

enum class ArchetypeKind : std::uint8_t { HighQuality, LowQuality, Spammer, HintAbuser };

std::string_view to_string(ArchetypeKind kind);
std::optional<ArchetypeKind> parse_archetype_kind(std::string_view name);

struct WorkerArchetype {
    ArchetypeKind kind = ArchetypeKind::HighQuality;
    // Mean belief the worker places on the true option; above 1/k.
    double accuracy = 0.9;
    // Log-scale jitter of the belief concentration between questions; >= 0.
    double confidence_spread = 0.3;
    // Probability the hint points the worker at the truth; defaults to T.
    std::optional<double> hint_reliability;
    // Probability an objective question is left unanswered.
    double omit_rate = 0.0;
    // Probability a subjective answer is invalid ("I do not know").
    double invalid_rate = 0.0;

    // Ground-truth quality used to score quality rankings.
    double planted_quality(int option_count) const;
    double reliability(double threshold) const { return hint_reliability.value_or(threshold); }

    static WorkerArchetype high_quality(double accuracy = 0.9, double spread = 0.3);
    static WorkerArchetype low_quality(double accuracy = 0.65, double spread = 0.3);
    static WorkerArchetype spammer();
    static WorkerArchetype hint_abuser(double accuracy = 0.6, double spread = 0.3);
};

// Throws std::invalid_argument on out-of-range fields.
void validate(const WorkerArchetype& archetype);

}  // namespace hintguide::sim
