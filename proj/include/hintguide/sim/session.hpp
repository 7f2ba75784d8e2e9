#pragma once

#include "hintguide/mechanism/params.hpp"
#include "hintguide/sim/worker.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hintguide::sim {

struct Question {
    std::string id;
    int option_count = 2;
    int truth = 0;
    bool subjective = false;
};

// n questions with uniformly drawn true options. Subjective questions are
// modelled as binary valid/invalid transcriptions.
std::vector<Question> make_batch(int n, int option_count, bool subjective, std::uint64_t seed);

// How the answering flow is offered to workers; behaviour adapts to it.
enum class StageSetting : std::uint8_t {
    Hybrid,        // main stage plus an opt-in hint stage
    SingleStage,   // no hints, no skipping: unsure workers guess
    SkipStage,     // unsure workers may skip
    VisibleHints,  // hints shown with every question
};

std::string_view to_string(StageSetting s);

enum class Stage : std::uint8_t { Main, Hint, Skipped, Unanswered };

std::string_view to_string(Stage s);
std::optional<Stage> parse_stage(std::string_view s);

struct AnswerRecord {
    std::string question_id;
    Stage stage = Stage::Unanswered;
    std::string option;            // empty when no option was chosen
    std::optional<bool> correct;   // unknown when the truth is unknown
    bool gold = false;

    bool answered() const { return stage == Stage::Main || stage == Stage::Hint; }
};

struct SessionTranscript {
    std::string worker_id;
    std::vector<AnswerRecord> answers;

    std::size_t answered_count() const;
    std::size_t hint_count() const;
    std::size_t correct_count() const;
};

// The per-question random quantities a session draws. Every question draws
// the same quantities regardless of archetype or stage setting, so sessions
// that differ only in setting see identical beliefs.
struct QuestionDraw {
    double omit_u = 0.0;
    std::vector<double> beliefs;  // per option, sums to 1
    int random_option = 0;        // what a spammer picks
    bool hint_points_to_truth = true;
    int hint_wrong_option = 0;    // where an unreliable hint points
};

QuestionDraw draw_question(const WorkerArchetype& archetype, const Question& question, double threshold,
                           std::uint64_t session_seed, std::size_t index);

std::string option_label(int index);

// Deterministic in (archetype, questions, params, seed, setting).
SessionTranscript simulate_session(const WorkerArchetype& archetype, std::span<const Question> questions,
                                   const mechanism::MechanismParams& params, std::uint64_t seed,
                                   StageSetting setting = StageSetting::Hybrid, std::string worker_id = "w1");

}  // namespace hintguide::sim
