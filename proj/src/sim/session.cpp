#include "hintguide/sim/session.hpp"

#include "hintguide/common/random.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace hintguide::sim {

std::vector<Question> make_batch(int n, int option_count, bool subjective, std::uint64_t seed)
{
    if (n < 1) {
        throw std::invalid_argument("a batch needs at least one question");
    }
    if (subjective) {
        option_count = 2;
    }
    if (option_count < 2) {
        throw std::invalid_argument("questions need at least two options");
    }
    std::vector<Question> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        auto rng = make_rng(seed, {0x7175ULL, static_cast<std::uint64_t>(i)});
        Question q;
        q.id = fmt::format("q{}", i + 1);
        q.option_count = option_count;
        q.truth = static_cast<int>(rng() % static_cast<std::uint64_t>(option_count));
        q.subjective = subjective;
        out.push_back(std::move(q));
    }
    return out;
}

std::string_view to_string(StageSetting s)
{
    switch (s) {
    case StageSetting::Hybrid:
        return "hybrid";
    case StageSetting::SingleStage:
        return "single";
    case StageSetting::SkipStage:
        return "skip";
    case StageSetting::VisibleHints:
        return "visible_hints";
    }
    return "?";
}

std::string_view to_string(Stage s)
{
    switch (s) {
    case Stage::Main:
        return "main";
    case Stage::Hint:
        return "hint";
    case Stage::Skipped:
        return "skip";
    case Stage::Unanswered:
        return "none";
    }
    return "?";
}

std::optional<Stage> parse_stage(std::string_view s)
{
    for (auto st : {Stage::Main, Stage::Hint, Stage::Skipped, Stage::Unanswered}) {
        if (to_string(st) == s) {
            return st;
        }
    }
    return std::nullopt;
}

std::size_t SessionTranscript::answered_count() const
{
    return static_cast<std::size_t>(
        std::count_if(answers.begin(), answers.end(), [](const AnswerRecord& a) { return a.answered(); }));
}

std::size_t SessionTranscript::hint_count() const
{
    return static_cast<std::size_t>(
        std::count_if(answers.begin(), answers.end(), [](const AnswerRecord& a) { return a.stage == Stage::Hint; }));
}

std::size_t SessionTranscript::correct_count() const
{
    return static_cast<std::size_t>(std::count_if(answers.begin(), answers.end(), [](const AnswerRecord& a) {
        return a.answered() && a.correct.value_or(false);
    }));
}

std::string option_label(int index)
{
    if (index < 26) {
        return std::string(1, static_cast<char>('A' + index));
    }
    return fmt::format("O{}", index + 1);
}

QuestionDraw draw_question(const WorkerArchetype& archetype, const Question& question, double threshold,
                           std::uint64_t session_seed, std::size_t index)
{
    auto rng = make_rng(session_seed, {static_cast<std::uint64_t>(index)});
    const int k = question.option_count;
    QuestionDraw d;
    d.omit_u = uniform01(rng);

    // Beliefs are calibrated: a symmetric Dirichlet prior conditioned on the
    // truth, so the truth is favoured exactly as often as the beliefs claim.
    // The prior concentration is set so the mean belief on the truth equals
    // the accuracy, then jittered per question. Spammers hold no beliefs; they
    // draw from a flat prior only to keep the stream layout fixed.
    const bool spammer = archetype.kind == ArchetypeKind::Spammer;
    if (!spammer && !(archetype.accuracy * k > 1.0)) {
        throw std::invalid_argument(fmt::format("accuracy {} does not exceed chance 1/{}", archetype.accuracy, k));
    }
    std::normal_distribution<double> jitter(0.0, 1.0);
    const double z = jitter(rng);
    const double alpha =
        spammer ? 1.0
                : (1.0 - archetype.accuracy) / (k * archetype.accuracy - 1.0) * std::exp(archetype.confidence_spread * z);
    std::vector<double> alphas(static_cast<std::size_t>(k), alpha);
    if (!spammer) {
        alphas[static_cast<std::size_t>(question.truth)] += 1.0;
    }
    d.beliefs = sample_dirichlet(rng, alphas);

    d.random_option = static_cast<int>(uniform01(rng) * k);
    d.hint_points_to_truth = uniform01(rng) < archetype.reliability(threshold);
    const int wrong = static_cast<int>(uniform01(rng) * (k - 1));
    d.hint_wrong_option = wrong >= question.truth ? wrong + 1 : wrong;
    return d;
}

namespace {

int favored_option(const std::vector<double>& beliefs)
{
    return static_cast<int>(std::max_element(beliefs.begin(), beliefs.end()) - beliefs.begin());
}

// The option picked after reading the hint. Binary questions go through the
// threshold rule on the hint posterior, which puts exactly T on the hinted option.
int hint_stage_answer(const QuestionDraw& d, const Question& q, double threshold)
{
    const int hinted = d.hint_points_to_truth ? q.truth : d.hint_wrong_option;
    if (q.option_count == 2) {
        BeliefState b;
        b.p_main = d.beliefs[0];
        b.p_hint = hinted == 0 ? threshold : 1.0 - threshold;
        return decide_hint(b, threshold) == BinaryOption::A ? 0 : 1;
    }
    return hinted;
}

// Direct answer if confident, nullopt when the belief falls in the unsure band.
std::optional<int> main_stage_answer(const QuestionDraw& d, const Question& q, double epsilon)
{
    if (q.option_count == 2) {
        BeliefState b;
        b.p_main = d.beliefs[0];
        switch (decide_main(b, epsilon)) {
        case MainStageAction::AnswerA:
            return 0;
        case MainStageAction::AnswerB:
            return 1;
        case MainStageAction::EnterHint:
            return std::nullopt;
        }
    }
    return decide_main_top(d.beliefs.data(), q.option_count, epsilon);
}

}  // namespace

SessionTranscript simulate_session(const WorkerArchetype& archetype, std::span<const Question> questions,
                                   const mechanism::MechanismParams& params, std::uint64_t seed,
                                   StageSetting setting, std::string worker_id)
{
    validate(archetype);
    SessionTranscript t;
    t.worker_id = std::move(worker_id);
    t.answers.reserve(questions.size());

    const bool hints_offered = setting == StageSetting::Hybrid || setting == StageSetting::VisibleHints;

    for (std::size_t i = 0; i < questions.size(); ++i) {
        const Question& q = questions[i];
        const QuestionDraw d = draw_question(archetype, q, params.threshold, seed, i);

        AnswerRecord rec;
        rec.question_id = q.id;
        const double omit = q.subjective ? archetype.invalid_rate : archetype.omit_rate;

        int chosen = -1;
        if (d.omit_u < omit) {
            rec.stage = Stage::Unanswered;
        } else if (archetype.kind == ArchetypeKind::Spammer) {
            chosen = d.random_option;
            rec.stage = Stage::Main;
        } else if (archetype.kind == ArchetypeKind::HintAbuser && hints_offered) {
            chosen = hint_stage_answer(d, q, params.threshold);
            rec.stage = Stage::Hint;
        } else {
            auto direct = main_stage_answer(d, q, params.epsilon);
            if (direct) {
                chosen = *direct;
                rec.stage = Stage::Main;
            } else {
                switch (setting) {
                case StageSetting::Hybrid:
                case StageSetting::VisibleHints:
                    chosen = hint_stage_answer(d, q, params.threshold);
                    rec.stage = Stage::Hint;
                    break;
                case StageSetting::SingleStage:
                    chosen = favored_option(d.beliefs);
                    rec.stage = Stage::Main;
                    break;
                case StageSetting::SkipStage:
                    rec.stage = Stage::Skipped;
                    break;
                }
            }
        }
        // With hints on screen for every question, every answer is hint-informed.
        if (setting == StageSetting::VisibleHints && rec.stage == Stage::Main) {
            rec.stage = Stage::Hint;
        }
        if (chosen >= 0) {
            rec.option = option_label(chosen);
            rec.correct = chosen == q.truth;
        }
        t.answers.push_back(std::move(rec));
    }
    return t;
}

}  // namespace hintguide::sim
