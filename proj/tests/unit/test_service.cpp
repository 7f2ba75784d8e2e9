#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "temp_dir.hpp"

#include "hintguide/common/random.hpp"
#include "hintguide/mechanism/payment.hpp"
#include "hintguide/service/event_log.hpp"
#include "hintguide/service/http_server.hpp"
#include "hintguide/service/task_service.hpp"
#include "hintguide/sim/scoring.hpp"
#include "hintguide/sim/transcript.hpp"

#include <boost/math/special_functions/binomial.hpp>

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>

using namespace hintguide;
using namespace hintguide::service;
using nlohmann::json;

namespace {

std::string hint_text(int i) { return fmt::format("HINTTEXT-{}-look-at-the-left-edge", i); }

BatchRequest make_request(int n, int gold, double mu_min = 0.1, double mu_max = 1.0,
                          std::optional<std::uint64_t> seed = 7)
{
    BatchRequest r;
    for (int i = 1; i <= n; ++i) {
        QuestionSpec q;
        q.id = fmt::format("q{}", i);
        q.prompt = fmt::format("Is photo {} a bridge?", i);
        q.options = {"A", "B"};
        q.hint = hint_text(i);
        q.answer = i % 2 == 0 ? "B" : "A";
        r.questions.push_back(q);
    }
    r.params = mechanism::MechanismParams::with_defaults(0.75, gold, n, mu_min, mu_max);
    r.seed = seed;
    return r;
}

ServiceConfig config_for(const TempDir& dir, std::size_t snapshot_every = 0)
{
    ServiceConfig c;
    c.state_dir = dir.path();
    c.sync = false;
    c.snapshot_every = snapshot_every;
    return c;
}

ErrorKind error_kind(const std::function<void()>& f)
{
    try {
        f();
    } catch (const ServiceError& e) {
        return e.kind();
    }
    FAIL("expected a ServiceError");
    return ErrorKind::Invalid;
}

std::string read_file(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::size_t line_count(const std::filesystem::path& p)
{
    auto text = read_file(p);
    return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

// Answers every question of a session, revealing hints where `reveal` says so.
void answer_all(TaskService& svc, const std::string& sid, const std::function<bool(const std::string&)>& reveal,
                const std::function<std::string(const std::string&)>& choose)
{
    while (true) {
        auto n = svc.next(sid);
        if (!n.question) {
            return;
        }
        const auto qid = n.question->question_id;
        if (reveal(qid)) {
            svc.reveal_hint(sid, qid);
        }
        svc.submit_answer(sid, qid, choose(qid));
    }
}

std::string truth_of(const Batch& b, const std::string& qid) { return *b.questions[b.index_of(qid)].spec.answer; }

}  // namespace

TEST_CASE("batch creation validates its input")
{
    TempDir dir;
    TaskService svc(config_for(dir));

    SUBCASE("G = N makes every question gold")
    {
        auto id = svc.create_batch(make_request(30, 30));
        auto b = svc.batch(id);
        CHECK(std::all_of(b.questions.begin(), b.questions.end(), [](const BatchQuestion& q) { return q.gold; }));
    }
    SUBCASE("G = 0 is rejected")
    {
        auto r = make_request(30, 3);
        r.params.gold_count = 0;
        CHECK(error_kind([&] { svc.create_batch(r); }) == ErrorKind::Invalid);
    }
    SUBCASE("duplicate question ids are rejected")
    {
        auto r = make_request(3, 1);
        r.questions[2].id = "q1";
        CHECK(error_kind([&] { svc.create_batch(r); }) == ErrorKind::Invalid);
    }
    SUBCASE("every hint must be non-empty")
    {
        auto r = make_request(3, 1);
        r.questions[1].hint.clear();
        CHECK(error_kind([&] { svc.create_batch(r); }) == ErrorKind::Invalid);
    }
    SUBCASE("answers must be options and gold needs answers")
    {
        auto r = make_request(3, 1);
        r.questions[0].answer = "C";
        CHECK(error_kind([&] { svc.create_batch(r); }) == ErrorKind::Invalid);
        auto r2 = make_request(3, 2);
        r2.questions[0].answer.reset();
        r2.questions[1].answer.reset();
        CHECK(error_kind([&] { svc.create_batch(r2); }) == ErrorKind::Invalid);
        r2.params.gold_count = 1;
        auto b = svc.batch(svc.create_batch(r2));
        CHECK(b.questions[2].gold);
    }
    SUBCASE("params below the admissible band are rejected")
    {
        auto r = make_request(3, 1);
        r.params.epsilon = 0.10;
        CHECK(error_kind([&] { svc.create_batch(r); }) == ErrorKind::Invalid);
    }
    SUBCASE("commas in ids or options are rejected")
    {
        auto r = make_request(3, 1);
        r.questions[0].options = {"A,B", "C"};
        CHECK(error_kind([&] { svc.create_batch(r); }) == ErrorKind::Invalid);
    }
}

TEST_CASE("gold positions are uniform over subsets")
{
    // Two independent draws of 3 of 30 coincide with probability 1/C(30,3).
    const double p = 1.0 / boost::math::binomial_coefficient<double>(30, 3);
    const int pairs = 400000;
    int collisions = 0;
    std::vector<int> hits(30, 0);
    for (int i = 0; i < pairs; ++i) {
        auto a = choose_gold(30, 3, derive_seed(99, {static_cast<std::uint64_t>(i), 0}));
        auto b = choose_gold(30, 3, derive_seed(99, {static_cast<std::uint64_t>(i), 1}));
        collisions += a == b ? 1 : 0;
        for (auto k : a) {
            ++hits[k];
        }
    }
    const double expected = pairs * p;
    CHECK(std::abs(collisions - expected) < 4.0 * std::sqrt(expected * (1 - p)));
    const double per_position = pairs * 3.0 / 30.0;
    const double sd = std::sqrt(pairs * 0.1 * 0.9);
    for (int h : hits) {
        CHECK(std::abs(h - per_position) < 5.0 * sd);
    }

    TempDir dir;
    TaskService svc(config_for(dir));
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        auto b = svc.batch(svc.create_batch(make_request(30, 3, 0.1, 1.0, seed)));
        std::vector<std::size_t> flagged;
        for (std::size_t i = 0; i < b.questions.size(); ++i) {
            if (b.questions[i].gold) {
                flagged.push_back(i);
            }
        }
        CHECK(flagged == choose_gold(30, 3, seed));
    }
}

TEST_CASE("session flow follows the two-stage state machine")
{
    TempDir dir;
    TaskService svc(config_for(dir));
    auto bid = svc.create_batch(make_request(4, 2));
    auto sid = svc.open_session(bid, "alice");
    CHECK(error_kind([&] { svc.open_session(bid, "alice"); }) == ErrorKind::Conflict);
    CHECK(error_kind([&] { svc.open_session("b99", "bob"); }) == ErrorKind::NotFound);

    // reveal before the question is shown
    CHECK(error_kind([&] { svc.reveal_hint(sid, "q1"); }) == ErrorKind::Conflict);
    CHECK(error_kind([&] { svc.submit_answer(sid, "q1", "A"); }) == ErrorKind::Conflict);

    auto n = svc.next(sid);
    REQUIRE(n.question);
    CHECK(n.question->question_id == "q1");
    CHECK(n.question->position == 1);
    CHECK(n.question->total == 4);
    CHECK_FALSE(n.question->hint);
    CHECK(n.answered == 0);

    // next is stable until the question is answered
    CHECK(svc.next(sid).question->question_id == "q1");

    const auto lines_before = line_count(svc.log_path());
    CHECK(svc.reveal_hint(sid, "q1") == hint_text(1));
    CHECK(line_count(svc.log_path()) == lines_before + 1);
    CHECK(svc.reveal_hint(sid, "q1") == hint_text(1));
    CHECK(line_count(svc.log_path()) == lines_before + 1);
    CHECK(svc.next(sid).question->hint == hint_text(1));

    CHECK(error_kind([&] { svc.submit_answer(sid, "q1", "Z"); }) == ErrorKind::Invalid);
    CHECK(error_kind([&] { svc.submit_answer(sid, "nope", "A"); }) == ErrorKind::NotFound);
    CHECK(svc.submit_answer(sid, "q1", "A") == sim::Stage::Hint);
    CHECK(error_kind([&] { svc.submit_answer(sid, "q1", "A"); }) == ErrorKind::Conflict);
    CHECK(error_kind([&] { svc.reveal_hint(sid, "q1"); }) == ErrorKind::Conflict);

    n = svc.next(sid);
    CHECK(n.question->question_id == "q2");
    CHECK(svc.submit_answer(sid, "q2", "B") == sim::Stage::Main);
    CHECK(error_kind([&] { svc.finalize(sid, false); }) == ErrorKind::Conflict);

    answer_all(svc, sid, [](const std::string&) { return false; }, [](const std::string&) { return "A"; });
    n = svc.next(sid);
    CHECK_FALSE(n.question);
    CHECK(n.answered == 4);

    auto r1 = svc.finalize(sid, false);
    auto r2 = svc.finalize(sid, false);
    CHECK(to_json(r1) == to_json(r2));
    CHECK(error_kind([&] { svc.next(sid); }) == ErrorKind::Conflict);
    CHECK(error_kind([&] { svc.submit_answer(sid, "q1", "A"); }) == ErrorKind::Conflict);
    CHECK_FALSE(svc.session(sid).completed_at.empty());
}

TEST_CASE("receipts follow the multiplicative rule")
{
    TempDir dir;
    TaskService svc(config_for(dir));

    SUBCASE("gold [D+, H+] at T = 0.75, mu in [0, 1]")
    {
        auto bid = svc.create_batch(make_request(2, 2, 0.0, 1.0));
        auto sid = svc.open_session(bid, "w1");
        const auto b = svc.batch(bid);
        answer_all(svc, sid, [](const std::string& q) { return q == "q2"; },
                   [&](const std::string& q) { return truth_of(b, q); });
        auto r = svc.finalize(sid, false);
        CHECK(mechanism::join_states(r.states) == "D+ H+");
        CHECK(mechanism::format_money(r.payment) == "0.618034");
        CHECK(r.payment == doctest::Approx((std::sqrt(5.0) - 1.0) / 2.0).epsilon(1e-12));
    }
    SUBCASE("all gold direct and correct pays mu_max")
    {
        auto bid = svc.create_batch(make_request(10, 10, 0.1, 1.0));
        const auto b = svc.batch(bid);
        auto sid = svc.open_session(bid, "w1");
        answer_all(svc, sid, [](const std::string&) { return false; },
                   [&](const std::string& q) { return truth_of(b, q); });
        CHECK(mechanism::format_money(svc.finalize(sid, false).payment) == "1.000000");
    }
    SUBCASE("one wrong gold answer pays mu_min")
    {
        auto bid = svc.create_batch(make_request(10, 10, 0.1, 1.0));
        const auto b = svc.batch(bid);
        auto sid = svc.open_session(bid, "w1");
        answer_all(svc, sid, [](const std::string&) { return false; }, [&](const std::string& q) {
            auto t = truth_of(b, q);
            return q == "q7" ? std::string(t == "A" ? "B" : "A") : t;
        });
        CHECK(mechanism::format_money(svc.finalize(sid, false).payment) == "0.100000");
    }
    SUBCASE("non-gold answers do not affect the payment")
    {
        auto bid = svc.create_batch(make_request(10, 3, 0.1, 1.0));
        const auto b = svc.batch(bid);
        auto good = svc.open_session(bid, "w1");
        auto sloppy = svc.open_session(bid, "w2");
        answer_all(svc, good, [](const std::string&) { return false; },
                   [&](const std::string& q) { return truth_of(b, q); });
        answer_all(svc, sloppy, [](const std::string&) { return false; }, [&](const std::string& q) {
            auto t = truth_of(b, q);
            const bool gold = b.questions[b.index_of(q)].gold;
            return gold ? t : std::string(t == "A" ? "B" : "A");
        });
        CHECK(svc.finalize(good, false).payment == svc.finalize(sloppy, false).payment);
    }
    SUBCASE("forced finalization scores unanswered gold as D-")
    {
        auto bid = svc.create_batch(make_request(4, 4, 0.1, 1.0));
        const auto b = svc.batch(bid);
        auto sid = svc.open_session(bid, "w1");
        auto n = svc.next(sid);
        svc.submit_answer(sid, n.question->question_id, truth_of(b, n.question->question_id));
        auto r = svc.finalize(sid, true);
        CHECK(r.forced);
        CHECK(mechanism::join_states(r.states) == "D+ D- D- D-");
        CHECK(r.payment == doctest::Approx(0.1));
        auto t = svc.transcripts(bid);
        REQUIRE(t.size() == 1);
        CHECK(t[0].answers[1].stage == sim::Stage::Unanswered);
    }
}

TEST_CASE("per-session shuffling keeps transcripts in batch order")
{
    TempDir dir;
    TaskService svc(config_for(dir));
    auto req = make_request(12, 2);
    req.shuffle = true;
    auto bid = svc.create_batch(req);
    auto s1 = svc.open_session(bid, "w1");
    auto s2 = svc.open_session(bid, "w2");
    CHECK(svc.session(s1).order != svc.session(s2).order);
    answer_all(svc, s1, [](const std::string&) { return false; }, [](const std::string&) { return "A"; });
    auto t = svc.transcripts(bid);
    REQUIRE(t.size() == 2);
    for (std::size_t i = 0; i < t[0].answers.size(); ++i) {
        CHECK(t[0].answers[i].question_id == fmt::format("q{}", i + 1));
    }
}

namespace {

// Drives a random mix of valid and invalid operations across sessions.
void random_workload(TaskService& svc, std::uint64_t seed, int steps)
{
    auto rng = make_rng(seed, {});
    std::vector<std::string> batches;
    for (int b = 0; b < 3; ++b) {
        auto req = make_request(6 + b, 2 + b, 0.1, 1.0, derive_seed(seed, {100, static_cast<std::uint64_t>(b)}));
        req.shuffle = b == 2;
        batches.push_back(svc.create_batch(req));
    }
    std::vector<std::string> sessions;
    for (int w = 0; w < 8; ++w) {
        sessions.push_back(svc.open_session(batches[static_cast<std::size_t>(w) % 3], fmt::format("w{}", w)));
    }
    for (int i = 0; i < steps; ++i) {
        const auto& sid = sessions[rng() % sessions.size()];
        try {
            const auto op = rng() % 10;
            if (op < 3) {
                svc.next(sid);
            } else {
                const auto s = svc.session(sid);
                const auto b = svc.batch(s.batch_id);
                const auto& q = b.questions[rng() % b.questions.size()].spec;
                if (op < 5) {
                    svc.reveal_hint(sid, q.id);
                } else if (op < 9) {
                    svc.submit_answer(sid, q.id, q.options[rng() % q.options.size()]);
                } else {
                    svc.finalize(sid, rng() % 2 == 0);
                }
            }
        } catch (const ServiceError&) {
        }
    }
}

}  // namespace

TEST_CASE("restart from the event log reproduces the state byte for byte")
{
    for (std::size_t snapshot_every : {std::size_t{0}, std::size_t{7}}) {
        CAPTURE(snapshot_every);
        TempDir dir;
        std::string before;
        std::map<std::string, std::string> receipts;
        {
            TaskService svc(config_for(dir, snapshot_every));
            random_workload(svc, 2024, 600);
            before = svc.dump_state();
            for (int s = 1; s <= 8; ++s) {
                auto sess = svc.session(fmt::format("s{}", s));
                if (sess.receipt) {
                    receipts[sess.id] = to_json(*sess.receipt).dump();
                }
            }
            // the service is dropped without any shutdown step
        }
        CHECK(receipts.size() >= 3);
        CHECK(std::filesystem::exists(dir.path() / "snapshot.json") == (snapshot_every != 0));

        // a crash mid-append leaves a partial record behind
        {
            std::ofstream out(dir.path() / "events.jsonl", std::ios::app | std::ios::binary);
            out << R"({"seq": 100000, "type": "answer_subm)";
        }
        TaskService again(config_for(dir, snapshot_every));
        CHECK(again.dump_state() == before);
        for (const auto& [sid, text] : receipts) {
            CHECK(to_json(*again.session(sid).receipt).dump() == text);
        }
        if (snapshot_every == 0) {
            CHECK(again.replayed_events() == line_count(dir.path() / "events.jsonl"));
            CHECK(again.replayed_events() > 40);
        } else {
            CHECK(again.replayed_events() < snapshot_every);
        }
        // the torn tail is gone and later events append cleanly
        auto extra = again.open_session("b1", "late-worker");
        again.next(extra);
        const auto after = again.dump_state();
        TaskService third(config_for(dir, snapshot_every));
        CHECK(third.dump_state() == after);
    }
}

TEST_CASE("event log keeps per-question transitions in stage order")
{
    TempDir dir;
    {
        TaskService svc(config_for(dir));
        random_workload(svc, 77, 800);
    }
    auto recovered = EventLog::recover(dir.path() / "events.jsonl");
    const std::map<std::string, int> rank{{"question_viewed", 0}, {"hint_revealed", 1}, {"answer_submitted", 2}};
    std::map<std::pair<std::string, std::string>, std::vector<int>> seen;
    std::uint64_t expected_seq = 1;
    for (const auto& e : recovered.records) {
        CHECK(e.at("seq").get<std::uint64_t>() == expected_seq++);
        auto it = rank.find(e.at("type").get<std::string>());
        if (it != rank.end()) {
            seen[{e.at("session"), e.at("question")}].push_back(it->second);
        }
    }
    CHECK(seen.size() > 20);
    for (const auto& [key, ranks] : seen) {
        REQUIRE(!ranks.empty());
        CHECK(ranks.front() == 0);
        for (std::size_t i = 1; i < ranks.size(); ++i) {
            CHECK(ranks[i] > ranks[i - 1]);
        }
    }
}

TEST_CASE("a tampered or corrupt log is refused")
{
    TempDir dir;
    {
        TaskService svc(config_for(dir));
        auto bid = svc.create_batch(make_request(2, 2, 0.0, 1.0));
        auto sid = svc.open_session(bid, "w1");
        answer_all(svc, sid, [](const std::string&) { return false; }, [](const std::string&) { return "A"; });
        svc.finalize(sid, false);
    }
    const auto path = dir.path() / "events.jsonl";
    const auto original = read_file(path);

    SUBCASE("edited receipt")
    {
        auto text = original;
        auto pos = text.find(R"("payment":"0.000000")");
        REQUIRE(pos != std::string::npos);
        text.replace(pos, 20, R"("payment":"0.500000")");
        std::ofstream(path, std::ios::binary | std::ios::trunc) << text;
        CHECK_THROWS_AS(TaskService(config_for(dir)), EventLogError);
    }
    SUBCASE("garbage in a committed line")
    {
        auto text = original;
        text.insert(text.find('\n') + 1, "not json\n");
        std::ofstream(path, std::ios::binary | std::ios::trunc) << text;
        CHECK_THROWS_WITH_AS(TaskService(config_for(dir)), doctest::Contains("events.jsonl:2"), EventLogError);
    }
}

TEST_CASE("concurrent sessions replay to the same state")
{
    TempDir dir;
    std::string before;
    {
        TaskService svc(config_for(dir));
        auto bid = svc.create_batch(make_request(20, 4));
        std::vector<std::thread> threads;
        for (int w = 0; w < 8; ++w) {
            threads.emplace_back([&svc, bid, w] {
                auto sid = svc.open_session(bid, fmt::format("w{}", w));
                answer_all(svc, sid, [w](const std::string& q) { return (q.size() + static_cast<std::size_t>(w)) % 3 == 0; },
                           [w](const std::string&) { return w % 2 == 0 ? "A" : "B"; });
                svc.finalize(sid, false);
            });
        }
        for (auto& t : threads) {
            t.join();
        }
        before = svc.dump_state();
        for (const auto& s : svc.sessions_of(bid)) {
            CHECK(s.finalized());
        }
    }
    TaskService again(config_for(dir));
    CHECK(again.dump_state() == before);
}

namespace {

struct RunningServer {
    TempDir dir;
    std::unique_ptr<TaskService> svc;
    std::unique_ptr<HttpServer> http;
    std::thread thread;
    int port = 0;

    RunningServer()
    {
        svc = std::make_unique<TaskService>(config_for(dir));
        http = std::make_unique<HttpServer>(*svc, "secret-token");
        port = http->bind("127.0.0.1", 0);
        thread = std::thread([this] { http->run(); });
        http->wait_until_ready();
    }
    ~RunningServer()
    {
        http->stop();
        thread.join();
    }
};

// Fails on any key that would leak gold information, and on hint text the
// worker has not unlocked yet.
void scan_worker_payload(const json& j, const std::set<std::string>& locked_hints)
{
    if (j.is_object()) {
        for (const auto& [key, value] : j.items()) {
            CHECK_MESSAGE(key.find("gold") == std::string::npos, key);
            CHECK_MESSAGE(key != "answer", key);
            CHECK_MESSAGE(key != "correct", key);
            CHECK_MESSAGE(key != "states", key);
            scan_worker_payload(value, locked_hints);
        }
    } else if (j.is_array()) {
        for (const auto& v : j) {
            scan_worker_payload(v, locked_hints);
        }
    } else if (j.is_string()) {
        for (const auto& h : locked_hints) {
            CHECK_MESSAGE(j.get<std::string>().find(h) == std::string::npos, h);
        }
    }
}

}  // namespace

TEST_CASE("HTTP endpoints run a full session")
{
    RunningServer server;
    httplib::Client cli("127.0.0.1", server.port);
    const httplib::Headers auth{{"Authorization", "Bearer secret-token"}};

    json questions = json::array();
    std::set<std::string> locked;
    for (int i = 1; i <= 6; ++i) {
        questions.push_back(json{{"id", fmt::format("q{}", i)},
                                 {"prompt", fmt::format("prompt {}", i)},
                                 {"options", {"A", "B"}},
                                 {"hint", hint_text(i)},
                                 {"answer", i % 2 == 0 ? "B" : "A"}});
        locked.insert(hint_text(i));
    }
    const json batch_body{{"questions", questions}, {"params", {{"G", 6}, {"mu_min", "0"}, {"mu_max", "1"}}}, {"seed", 5}};

    auto res = cli.Post("/batches", batch_body.dump(), "application/json");
    REQUIRE(res);
    CHECK(res->status == 401);
    res = cli.Post("/batches", httplib::Headers{{"Authorization", "Bearer wrong-token"}}, batch_body.dump(),
                   "application/json");
    CHECK(res->status == 401);
    res = cli.Post("/batches", auth, "{not json", "application/json");
    CHECK(res->status == 400);
    res = cli.Post("/batches", auth, json{{"questions", questions}, {"params", {{"G", 0}}}}.dump(), "application/json");
    CHECK(res->status == 400);
    res = cli.Post("/batches", auth, batch_body.dump(), "application/json");
    REQUIRE(res->status == 201);
    const auto bid = json::parse(res->body).at("batch_id").get<std::string>();

    res = cli.Post(fmt::format("/batches/{}/sessions", bid), json{{"worker_id", "alice"}}.dump(), "application/json");
    REQUIRE(res->status == 201);
    scan_worker_payload(json::parse(res->body), locked);
    const auto sid = json::parse(res->body).at("session_id").get<std::string>();
    res = cli.Post(fmt::format("/batches/{}/sessions", bid), json{{"worker_id", "alice"}}.dump(), "application/json");
    CHECK(res->status == 409);
    res = cli.Post("/batches/b404/sessions", json{{"worker_id", "bob"}}.dump(), "application/json");
    CHECK(res->status == 404);
    res = cli.Post(fmt::format("/batches/{}/sessions", bid), json{{"worker", "bob"}}.dump(), "application/json");
    CHECK(res->status == 400);

    // Reveal hints on q2 and q5; answer q3 wrong. Expected gold states:
    // D+ H+ D- D+ H+ D+, so the payment is zero.
    std::map<std::string, std::string> expected_stage;
    while (true) {
        res = cli.Get(fmt::format("/sessions/{}/next", sid));
        REQUIRE(res->status == 200);
        auto next = json::parse(res->body);
        scan_worker_payload(next, locked);
        if (next.at("complete").get<bool>()) {
            CHECK(next.at("answered") == 6);
            break;
        }
        const auto& q = next.at("question");
        CHECK(q.at("hint_available") == true);
        CHECK_FALSE(q.contains("hint"));
        const auto qid = q.at("question_id").get<std::string>();
        const int i = std::stoi(qid.substr(1));
        if (i == 2 || i == 5) {
            const auto path = fmt::format("/sessions/{}/questions/{}/hint", sid, qid);
            res = cli.Post(path, "", "application/json");
            REQUIRE(res->status == 200);
            CHECK(json::parse(res->body).at("hint") == hint_text(i));
            res = cli.Post(path, "", "application/json");  // double click
            CHECK(json::parse(res->body).at("hint") == hint_text(i));
            locked.erase(hint_text(i));
        }
        std::string option = i % 2 == 0 ? "B" : "A";
        if (i == 3) {
            option = "B";
        }
        const auto path = fmt::format("/sessions/{}/questions/{}/answer", sid, qid);
        res = cli.Post(path, json{{"option", "C"}}.dump(), "application/json");
        CHECK(res->status == 400);
        res = cli.Post(path, json{{"option", option}}.dump(), "application/json");
        REQUIRE(res->status == 200);
        auto ack = json::parse(res->body);
        scan_worker_payload(ack, locked);
        expected_stage[qid] = ack.at("stage").get<std::string>();
        res = cli.Post(path, json{{"option", option}}.dump(), "application/json");
        CHECK(res->status == 409);
    }
    CHECK(expected_stage.at("q2") == "hint");
    CHECK(expected_stage.at("q1") == "main");

    res = cli.Post(fmt::format("/sessions/{}/questions/q1/hint", sid), "", "application/json");
    CHECK(res->status == 409);

    res = cli.Post(fmt::format("/sessions/{}/finalize", sid), "", "application/json");
    REQUIRE(res->status == 200);
    auto receipt = json::parse(res->body);
    scan_worker_payload(receipt, locked);
    CHECK(receipt.at("payment") == "0.000000");
    res = cli.Post(fmt::format("/sessions/{}/finalize", sid), "", "application/json");
    CHECK(json::parse(res->body) == receipt);
    res = cli.Get(fmt::format("/sessions/{}/next", sid));
    CHECK(res->status == 409);

    // a second worker is force-finalized by the requester after one answer
    res = cli.Post(fmt::format("/batches/{}/sessions", bid), json{{"worker_id", "bob"}}.dump(), "application/json");
    const auto sid2 = json::parse(res->body).at("session_id").get<std::string>();
    cli.Get(fmt::format("/sessions/{}/next", sid2));
    cli.Post(fmt::format("/sessions/{}/questions/q1/answer", sid2), json{{"option", "A"}}.dump(), "application/json");
    res = cli.Post(fmt::format("/sessions/{}/finalize", sid2), "", "application/json");
    CHECK(res->status == 409);
    res = cli.Post(fmt::format("/sessions/{}/finalize", sid2), json{{"force", true}}.dump(), "application/json");
    CHECK(res->status == 401);
    res = cli.Post(fmt::format("/sessions/{}/finalize", sid2), auth, json{{"force", true}}.dump(), "application/json");
    REQUIRE(res->status == 200);
    CHECK(json::parse(res->body).at("payment") == "0.000000");

    res = cli.Get(fmt::format("/batches/{}/transcripts", bid));
    CHECK(res->status == 401);
    res = cli.Get(fmt::format("/batches/{}/transcripts", bid), auth);
    REQUIRE(res->status == 200);
    auto exported = json::parse(res->body);
    auto transcripts = sim::parse_transcripts(exported.at("transcript").get<std::string>(), "export");
    REQUIRE(transcripts.size() == 2);
    CHECK(transcripts[0].worker_id == "alice");
    CHECK(transcripts[0].hint_count() == 2);
    for (const auto& rec : transcripts[0].answers) {
        CHECK(std::string(sim::to_string(rec.stage)) == expected_stage.at(rec.question_id));
    }
    auto params = mechanism::params_from_config(
        KvConfig::parse(exported.at("params_config").get<std::string>(), "exported params"));
    const auto& stored = exported.at("sessions");
    for (std::size_t w = 0; w < transcripts.size(); ++w) {
        CHECK(mechanism::format_money(sim::transcript_payment(transcripts[w], params, sim::PaymentRule::Hybrid)) ==
              stored[w].at("receipt").at("payment").get<std::string>());
    }
    CHECK(stored[0].at("receipt").at("states") == json({"D+", "H+", "D-", "D+", "H+", "D+"}));

    res = cli.Get("/sessions/s404/next");
    CHECK(res->status == 404);
    CHECK(json::parse(res->body).contains("error"));
    res = cli.Get("/no/such/route");
    CHECK(res->status == 404);
}
