#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hintguide/common/random.hpp"
#include "hintguide/mechanism/payment.hpp"
#include "hintguide/sim/session.hpp"
#include "hintguide/sim/transcript.hpp"
#include "hintguide/sim/worker.hpp"

#include <cmath>

using namespace hintguide;
using namespace hintguide::sim;

namespace {

mechanism::MechanismParams default_params(int n = 30)
{
    return mechanism::MechanismParams::with_defaults(0.75, std::max(1, n / 10), n);
}

double hint_rate(const WorkerArchetype& a, int seeds, std::uint64_t base = 1)
{
    auto params = default_params();
    auto batch = make_batch(30, 2, false, 5);
    double total = 0.0;
    for (int s = 0; s < seeds; ++s) {
        auto t = simulate_session(a, batch, params, derive_seed(base, {static_cast<std::uint64_t>(s)}));
        total += static_cast<double>(t.hint_count()) / static_cast<double>(t.answers.size());
    }
    return total / seeds;
}

}  // namespace

TEST_CASE("main-stage rule")
{
    CHECK(decide_main({0.90, 0.5}, 0.191) == MainStageAction::AnswerA);
    CHECK(decide_main({0.50, 0.5}, 0.191) == MainStageAction::EnterHint);
    CHECK(decide_main({0.50, 0.5}, 1e-9) == MainStageAction::EnterHint);
    CHECK(decide_main({0.309, 0.5}, 0.191) == MainStageAction::AnswerB);
    CHECK(decide_main({0.691, 0.5}, 0.191) == MainStageAction::AnswerA);
    CHECK(decide_main({0.69, 0.5}, 0.191) == MainStageAction::EnterHint);
    // eps = 0 leaves only p = 1/2 to answer either way; A wins the tie
    CHECK(decide_main({0.5, 0.5}, 0.0) == MainStageAction::AnswerA);
}

TEST_CASE("hint-stage rule")
{
    CHECK(decide_hint({0.5, 0.8}, 0.75) == BinaryOption::A);
    CHECK(decide_hint({0.5, 0.2}, 0.75) == BinaryOption::B);
    CHECK(decide_hint({0.5, 0.75}, 0.75) == BinaryOption::A);
    CHECK_THROWS_AS(decide_hint({0.5, 0.6}, 0.75), IndecisionError);
}

TEST_CASE("multi-option main-stage rule applies the binary band to the top belief")
{
    double confident[4] = {0.1, 0.75, 0.1, 0.05};
    CHECK(decide_main_top(confident, 4, 0.191) == 1);
    double unsure[4] = {0.3, 0.4, 0.2, 0.1};
    CHECK_FALSE(decide_main_top(unsure, 4, 0.191).has_value());
}

TEST_CASE("spammer answers at chance and never uses hints")
{
    auto params = default_params();
    auto batch = make_batch(30, 2, false, 3);
    auto spammer = WorkerArchetype::spammer();
    const int seeds = 10000;
    double sum = 0.0;
    std::size_t hints = 0;
    for (int s = 0; s < seeds; ++s) {
        auto t = simulate_session(spammer, batch, params, derive_seed(17, {static_cast<std::uint64_t>(s)}));
        sum += static_cast<double>(t.correct_count());
        hints += t.hint_count();
    }
    double mean = sum / seeds;
    // Binomial(30, 1/2): sd = sqrt(7.5)
    double se = std::sqrt(7.5 / seeds);
    CHECK(std::abs(mean - 15.0) < 3.0 * se);
    CHECK(hints == 0);
}

TEST_CASE("high-quality workers enter the hint stage less often")
{
    double hq = hint_rate(WorkerArchetype::high_quality(0.95, 0.03), 400);
    double lq = hint_rate(WorkerArchetype::low_quality(0.6, 0.4), 400);
    CHECK(hq < lq);
    CHECK(lq > 0.2);
}

TEST_CASE("hint usage falls as accuracy rises")
{
    double prev = 1.0;
    for (double acc : {0.6, 0.7, 0.8, 0.9}) {
        double r = hint_rate(WorkerArchetype::low_quality(acc, 0.15), 300, 23);
        CHECK(r < prev);
        prev = r;
    }
}

TEST_CASE("hint abuser always enters the hint stage")
{
    auto params = default_params();
    auto batch = make_batch(30, 2, false, 3);
    auto t = simulate_session(WorkerArchetype::hint_abuser(), batch, params, 99);
    CHECK(t.hint_count() == 30);
    CHECK(static_cast<double>(t.hint_count()) / 30.0 == 1.0);
}

TEST_CASE("sessions are deterministic in their seed")
{
    auto params = default_params();
    auto batch = make_batch(30, 4, false, 8);
    auto a = WorkerArchetype::low_quality();
    auto t1 = simulate_session(a, batch, params, 1234);
    auto t2 = simulate_session(a, batch, params, 1234);
    auto t3 = simulate_session(a, batch, params, 1235);
    std::vector<SessionTranscript> v1{t1}, v2{t2}, v3{t3};
    CHECK(to_transcript_text(v1) == to_transcript_text(v2));
    CHECK(to_transcript_text(v1) != to_transcript_text(v3));
}

TEST_CASE("stage consistency: confident main-stage beliefs never yield hint answers")
{
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        double t = 0.63 + 0.36 * uniform01(rng);
        int options = (trial % 2 == 0) ? 2 : 4;
        auto params = mechanism::MechanismParams::with_defaults(t, 3, 30);
        params.epsilon = params.epsilon + (0.5 - params.epsilon) * 0.8 * uniform01(rng);
        auto batch = make_batch(30, options, false, rng());
        auto archetype = WorkerArchetype::low_quality(0.55 + 0.4 * uniform01(rng), 0.05 + 0.6 * uniform01(rng));
        std::uint64_t seed = rng();
        auto session = simulate_session(archetype, batch, params, seed);
        for (std::size_t i = 0; i < batch.size(); ++i) {
            auto d = draw_question(archetype, batch[i], params.threshold, seed, i);
            bool confident;
            if (options == 2) {
                confident = decide_main({d.beliefs[0], 0.5}, params.epsilon) != MainStageAction::EnterHint;
            } else {
                confident = decide_main_top(d.beliefs.data(), options, params.epsilon).has_value();
            }
            const auto& rec = session.answers[i];
            REQUIRE(rec.answered());
            REQUIRE((rec.stage == Stage::Hint) == !confident);
        }
    }
}

TEST_CASE("behaviour adapts to the stage setting on identical beliefs")
{
    auto params = default_params();
    auto batch = make_batch(30, 2, false, 2);
    auto a = WorkerArchetype::low_quality(0.65, 0.35);
    auto hybrid = simulate_session(a, batch, params, 7, StageSetting::Hybrid);
    auto single = simulate_session(a, batch, params, 7, StageSetting::SingleStage);
    auto skip = simulate_session(a, batch, params, 7, StageSetting::SkipStage);
    auto visible = simulate_session(a, batch, params, 7, StageSetting::VisibleHints);

    CHECK(hybrid.hint_count() > 0);
    CHECK(single.hint_count() == 0);
    CHECK(single.answered_count() == 30);
    CHECK(visible.hint_count() == 30);
    for (std::size_t i = 0; i < batch.size(); ++i) {
        if (hybrid.answers[i].stage == Stage::Hint) {
            CHECK(skip.answers[i].stage == Stage::Skipped);
            CHECK(visible.answers[i].option == hybrid.answers[i].option);
        } else {
            CHECK(skip.answers[i].option == hybrid.answers[i].option);
            CHECK(single.answers[i].option == hybrid.answers[i].option);
        }
    }
}

TEST_CASE("hint-stage answers are correct at the hint reliability")
{
    auto params = default_params();
    auto batch = make_batch(30, 2, false, 2);
    auto abuser = WorkerArchetype::hint_abuser();
    abuser.hint_reliability = 0.8;
    std::size_t correct = 0;
    std::size_t total = 0;
    for (int s = 0; s < 2000; ++s) {
        auto t = simulate_session(abuser, batch, params, derive_seed(3, {static_cast<std::uint64_t>(s)}));
        correct += t.correct_count();
        total += t.answers.size();
    }
    double rate = static_cast<double>(correct) / static_cast<double>(total);
    double se = std::sqrt(0.8 * 0.2 / static_cast<double>(total));
    CHECK(std::abs(rate - 0.8) < 3.0 * se);
}

TEST_CASE("subjective questions yield invalid answers at the archetype rate")
{
    auto params = default_params(10);
    auto batch = make_batch(10, 4, true, 2);
    CHECK(batch[0].option_count == 2);
    auto a = WorkerArchetype::low_quality();
    a.invalid_rate = 0.3;
    std::size_t blank = 0;
    const int sessions = 3000;
    for (int s = 0; s < sessions; ++s) {
        auto t = simulate_session(a, batch, params, derive_seed(4, {static_cast<std::uint64_t>(s)}));
        blank += t.answers.size() - t.answered_count();
    }
    double rate = static_cast<double>(blank) / (10.0 * sessions);
    CHECK(std::abs(rate - 0.3) < 3.0 * std::sqrt(0.21 / (10.0 * sessions)));
}

TEST_CASE("archetype validation")
{
    auto a = WorkerArchetype::high_quality();
    a.accuracy = 1.0;
    CHECK_THROWS_AS(validate(a), std::invalid_argument);
    a = WorkerArchetype::low_quality();
    a.confidence_spread = -0.1;
    CHECK_THROWS_AS(validate(a), std::invalid_argument);
    a = WorkerArchetype::low_quality(0.3);
    CHECK_THROWS_AS(draw_question(a, make_batch(1, 2, false, 1)[0], 0.75, 1, 0), std::invalid_argument);
    CHECK_NOTHROW(draw_question(a, make_batch(1, 4, false, 1)[0], 0.75, 1, 0));
    CHECK(parse_archetype_kind("hint_abuser") == ArchetypeKind::HintAbuser);
    CHECK_FALSE(parse_archetype_kind("genius").has_value());
}

TEST_CASE("transcript text round-trips simulated sessions")
{
    Rng rng(12);
    for (int trial = 0; trial < 30; ++trial) {
        auto params = default_params();
        auto batch = make_batch(30, 2 + static_cast<int>(rng() % 3), false, rng());
        std::vector<SessionTranscript> sessions;
        for (int w = 0; w < 4; ++w) {
            auto a = WorkerArchetype::low_quality();
            a.omit_rate = 0.1;
            auto setting = static_cast<StageSetting>(rng() % 4);
            auto s = simulate_session(a, batch, params, rng(), setting, "w" + std::to_string(w + 1));
            s.answers[static_cast<std::size_t>(rng() % 30)].gold = true;
            sessions.push_back(std::move(s));
        }
        auto text = to_transcript_text(sessions);
        auto parsed = parse_transcripts(text);
        REQUIRE(to_transcript_text(parsed) == text);
    }
}

TEST_CASE("malformed transcripts report line numbers")
{
    std::string head = std::string(kTranscriptHeader) + "\n";
    CHECK_THROWS_WITH_AS(parse_transcripts(head + "w1,q1,main,A,1,1\nw1,q2,bogus,A,1,0\n", "t.csv"),
                         "t.csv:3: unknown stage 'bogus'", TranscriptError);
    CHECK_THROWS_WITH_AS(parse_transcripts(head + "w1,q1,main,A,1\n", "t.csv"), "t.csv:2: expected 6 fields, got 5",
                         TranscriptError);
    CHECK_THROWS_AS(parse_transcripts(head + "w1,q1,skip,A,-,0\n"), TranscriptError);
    CHECK_THROWS_AS(parse_transcripts(head + "w1,q1,main,A,1,1\nw1,q1,main,B,0,1\n"), TranscriptError);
    CHECK_THROWS_AS(parse_transcripts("worker,question\n"), TranscriptError);
}
