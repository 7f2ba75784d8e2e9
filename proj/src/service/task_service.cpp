#include "hintguide/service/task_service.hpp"

#include "hintguide/common/random.hpp"
#include "hintguide/common/text.hpp"
#include "hintguide/mechanism/payment.hpp"
#include "hintguide/sim/scoring.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <fmt/chrono.h>
#include <fmt/format.h>

namespace hintguide::service {

using nlohmann::json;

namespace {

constexpr const char* kLogName = "events.jsonl";
constexpr const char* kSnapshotName = "snapshot.json";

ServiceError invalid(const std::string& what) { return ServiceError(ErrorKind::Invalid, what); }
ServiceError conflict(const std::string& what) { return ServiceError(ErrorKind::Conflict, what); }
ServiceError not_found(const std::string& what) { return ServiceError(ErrorKind::NotFound, what); }

// Identifiers and labels end up in comma-separated transcripts.
void check_token(std::string_view what, const std::string& value)
{
    if (value.empty() || value == "-" ||
        value.find_first_of(",\r\n") != std::string::npos || text::trim(value) != value) {
        throw invalid(fmt::format("{} '{}' must be non-empty, not '-', without commas, newlines or outer spaces",
                                  what, value));
    }
}

std::optional<Progress> parse_progress(std::string_view s)
{
    for (auto p : {Progress::Unseen, Progress::MainStage, Progress::HintStage, Progress::Answered}) {
        if (to_string(p) == s) {
            return p;
        }
    }
    return std::nullopt;
}

double number_field(const json& j, const char* key, std::optional<double> fallback)
{
    if (!j.contains(key)) {
        if (!fallback) {
            throw invalid(fmt::format("params.{} is required", key));
        }
        return *fallback;
    }
    const auto& v = j.at(key);
    if (v.is_number()) {
        return v.get<double>();
    }
    if (v.is_string()) {
        if (auto d = text::parse_double(v.get<std::string>())) {
            return *d;
        }
    }
    throw invalid(fmt::format("params.{} must be a number or a decimal string", key));
}

std::string now_utc()
{
    const auto now = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
    return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", now);
}

json batch_to_json(const Batch& b)
{
    json qs = json::array();
    for (const auto& q : b.questions) {
        json jq{{"id", q.spec.id}, {"prompt", q.spec.prompt}, {"options", q.spec.options},
                {"hint", q.spec.hint}, {"gold", q.gold}};
        jq["answer"] = q.spec.answer ? json(*q.spec.answer) : json(nullptr);
        qs.push_back(std::move(jq));
    }
    return json{{"id", b.id},     {"questions", qs},       {"params", params_to_json(b.params)},
                {"seed", b.seed}, {"shuffle", b.shuffle}, {"requester", b.requester}};
}

Batch batch_from_json(const json& j)
{
    Batch b;
    b.id = j.at("id").get<std::string>();
    for (const auto& jq : j.at("questions")) {
        BatchQuestion q;
        q.spec.id = jq.at("id").get<std::string>();
        q.spec.prompt = jq.at("prompt").get<std::string>();
        q.spec.options = jq.at("options").get<std::vector<std::string>>();
        q.spec.hint = jq.at("hint").get<std::string>();
        if (!jq.at("answer").is_null()) {
            q.spec.answer = jq.at("answer").get<std::string>();
        }
        q.gold = jq.at("gold").get<bool>();
        b.questions.push_back(std::move(q));
    }
    b.params = params_from_json(j.at("params"), static_cast<int>(b.questions.size()));
    b.seed = j.at("seed").get<std::uint64_t>();
    b.shuffle = j.at("shuffle").get<bool>();
    b.requester = j.at("requester");
    return b;
}

json session_to_json(const Session& s)
{
    json progress = json::array();
    for (const auto& p : s.progress) {
        progress.push_back(json{{"state", to_string(p.state)}, {"option", p.option}, {"stage", sim::to_string(p.stage)}});
    }
    return json{{"id", s.id},
                {"worker_id", s.worker_id},
                {"batch_id", s.batch_id},
                {"order", s.order},
                {"progress", progress},
                {"receipt", s.receipt ? to_json(*s.receipt) : json(nullptr)},
                {"completed_at", s.completed_at}};
}

}  // namespace

std::string_view to_string(Progress p)
{
    switch (p) {
    case Progress::Unseen:
        return "unseen";
    case Progress::MainStage:
        return "main";
    case Progress::HintStage:
        return "hint";
    case Progress::Answered:
        return "answered";
    }
    return "?";
}

std::size_t Batch::index_of(const std::string& question_id) const
{
    for (std::size_t i = 0; i < questions.size(); ++i) {
        if (questions[i].spec.id == question_id) {
            return i;
        }
    }
    return questions.size();
}

bool Session::complete() const
{
    return std::all_of(progress.begin(), progress.end(),
                       [](const QuestionProgress& p) { return p.state == Progress::Answered; });
}

json params_to_json(const mechanism::MechanismParams& p)
{
    return json{{"T", p.threshold},
                {"epsilon", p.epsilon},
                {"mu_min", text::format_double(p.mu_min)},
                {"mu_max", text::format_double(p.mu_max)},
                {"G", p.gold_count},
                {"N", p.question_count},
                {"skip_s", p.skip_multiplier}};
}

mechanism::MechanismParams params_from_json(const json& j, int question_count)
{
    if (!j.is_object()) {
        throw invalid("params must be an object");
    }
    for (const auto& [key, value] : j.items()) {
        static const std::set<std::string> known{"T", "epsilon", "mu_min", "mu_max", "G", "N", "skip_s"};
        if (!known.count(key)) {
            throw invalid(fmt::format("unknown params field '{}'", key));
        }
    }
    mechanism::MechanismParams p;
    p.threshold = number_field(j, "T", mechanism::kDefaultThreshold);
    if (!(p.threshold > 0.625 && p.threshold < 1.0)) {
        throw invalid(fmt::format("T = {} outside (5/8, 1)", p.threshold));
    }
    p.epsilon = number_field(j, "epsilon", mechanism::epsilon_min(p.threshold));
    p.mu_min = number_field(j, "mu_min", mechanism::kDefaultMuMin);
    p.mu_max = number_field(j, "mu_max", mechanism::kDefaultMuMax);
    p.skip_multiplier = number_field(j, "skip_s", mechanism::hint_multiplier(p.threshold));
    if (!j.contains("G") || !j.at("G").is_number_integer()) {
        throw invalid("params.G must be an integer");
    }
    p.gold_count = j.at("G").get<int>();
    p.question_count = question_count;
    if (j.contains("N") && (!j.at("N").is_number_integer() || j.at("N").get<int>() != question_count)) {
        throw invalid(fmt::format("params.N must equal the question count {}", question_count));
    }
    try {
        mechanism::validate(p);
    } catch (const mechanism::ParamError& e) {
        throw invalid(e.what());
    }
    return p;
}

BatchRequest batch_request_from_json(const json& j)
{
    if (!j.is_object()) {
        throw invalid("batch request must be an object");
    }
    for (const auto& [key, value] : j.items()) {
        static const std::set<std::string> known{"questions", "params", "seed", "shuffle", "requester"};
        if (!known.count(key)) {
            throw invalid(fmt::format("unknown batch field '{}'", key));
        }
    }
    BatchRequest r;
    if (!j.contains("questions") || !j.at("questions").is_array() || j.at("questions").empty()) {
        throw invalid("questions must be a non-empty array");
    }
    std::size_t index = 0;
    for (const auto& jq : j.at("questions")) {
        ++index;
        if (!jq.is_object()) {
            throw invalid(fmt::format("question {} must be an object", index));
        }
        auto str = [&](const char* key, bool required) -> std::optional<std::string> {
            if (!jq.contains(key) || jq.at(key).is_null()) {
                if (required) {
                    throw invalid(fmt::format("question {}: '{}' is required", index, key));
                }
                return std::nullopt;
            }
            if (!jq.at(key).is_string()) {
                throw invalid(fmt::format("question {}: '{}' must be a string", index, key));
            }
            return jq.at(key).get<std::string>();
        };
        QuestionSpec q;
        q.id = *str("id", true);
        q.prompt = str("prompt", false).value_or("");
        q.hint = str("hint", false).value_or("");
        q.answer = str("answer", false);
        if (!jq.contains("options") || !jq.at("options").is_array()) {
            throw invalid(fmt::format("question {}: 'options' must be an array", index));
        }
        for (const auto& o : jq.at("options")) {
            if (!o.is_string()) {
                throw invalid(fmt::format("question {}: options must be strings", index));
            }
            q.options.push_back(o.get<std::string>());
        }
        r.questions.push_back(std::move(q));
    }
    r.params = params_from_json(j.contains("params") ? j.at("params") : json::object(),
                                static_cast<int>(r.questions.size()));
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_unsigned()) {
            throw invalid("seed must be an unsigned integer");
        }
        r.seed = j.at("seed").get<std::uint64_t>();
    }
    if (j.contains("shuffle")) {
        if (!j.at("shuffle").is_boolean()) {
            throw invalid("shuffle must be a boolean");
        }
        r.shuffle = j.at("shuffle").get<bool>();
    }
    r.requester = j.contains("requester") ? j.at("requester") : json::object();
    return r;
}

json to_json(const Receipt& r)
{
    std::vector<std::string> states;
    for (auto s : r.states) {
        states.emplace_back(mechanism::to_symbol(s));
    }
    return json{{"session_id", r.session_id},
                {"worker_id", r.worker_id},
                {"batch_id", r.batch_id},
                {"gold_questions", r.gold_questions},
                {"states", states},
                {"payment", mechanism::format_money(r.payment)},
                {"params", params_to_json(r.params)},
                {"forced", r.forced}};
}

json to_json(const QuestionView& v)
{
    json j{{"session_id", v.session_id},
           {"question_id", v.question_id},
           {"prompt", v.prompt},
           {"options", v.options},
           {"position", v.position},
           {"total", v.total},
           {"stage", to_string(v.state)},
           {"hint_available", true}};
    if (v.hint) {
        j["hint"] = *v.hint;
    }
    return j;
}

std::vector<std::size_t> choose_gold(std::size_t candidates, int gold_count, std::uint64_t seed)
{
    auto rng = make_rng(seed, {0});
    return sample_without_replacement(rng, candidates, static_cast<std::size_t>(gold_count));
}

sim::SessionTranscript session_transcript(const Batch& batch, const Session& session)
{
    sim::SessionTranscript t;
    t.worker_id = session.worker_id;
    for (std::size_t i = 0; i < batch.questions.size(); ++i) {
        const auto& q = batch.questions[i];
        const auto& p = session.progress[i];
        sim::AnswerRecord rec;
        rec.question_id = q.spec.id;
        rec.gold = q.gold;
        if (p.state == Progress::Answered) {
            rec.stage = p.stage;
            rec.option = p.option;
            if (q.spec.answer) {
                rec.correct = p.option == *q.spec.answer;
            }
        }
        t.answers.push_back(std::move(rec));
    }
    return t;
}

Receipt compute_receipt(const Batch& batch, const Session& session, bool forced)
{
    const auto t = session_transcript(batch, session);
    Receipt r;
    r.session_id = session.id;
    r.worker_id = session.worker_id;
    r.batch_id = batch.id;
    for (const auto& q : batch.questions) {
        if (q.gold) {
            r.gold_questions.push_back(q.spec.id);
        }
    }
    r.states = sim::gold_states(t);
    r.payment = sim::transcript_payment(t, batch.params, sim::PaymentRule::Hybrid);
    r.params = batch.params;
    r.forced = forced;
    return r;
}

TaskService::TaskService(ServiceConfig config) : config_(std::move(config))
{
    std::error_code ec;
    std::filesystem::create_directories(config_.state_dir, ec);
    if (ec) {
        throw EventLogError(fmt::format("{}: cannot create state directory: {}", config_.state_dir.string(),
                                        ec.message()));
    }
    const auto snapshot_path = config_.state_dir / kSnapshotName;
    if (std::filesystem::exists(snapshot_path)) {
        std::ifstream in(snapshot_path);
        json snap;
        try {
            snap = json::parse(in);
        } catch (const json::exception& e) {
            throw EventLogError(fmt::format("{}: unreadable snapshot: {}", snapshot_path.string(), e.what()));
        }
        load_state_json(snap.at("state"));
    }
    const auto log_path = config_.state_dir / kLogName;
    auto recovered = EventLog::recover(log_path);
    const std::uint64_t covered = seq_;
    for (const auto& event : recovered.records) {
        const auto seq = event.at("seq").get<std::uint64_t>();
        if (seq <= covered) {
            continue;
        }
        if (seq != seq_ + 1) {
            throw EventLogError(fmt::format("{}: event {} follows {}", log_path.string(), seq, seq_));
        }
        seq_ = seq;
        try {
            apply(event, true);
        } catch (const ServiceError& e) {
            throw EventLogError(fmt::format("{}: event {} does not apply: {}", log_path.string(), seq, e.what()));
        } catch (const json::exception& e) {
            throw EventLogError(fmt::format("{}: event {} is malformed: {}", log_path.string(), seq, e.what()));
        }
        ++replayed_;
    }
    const std::uint64_t last_logged =
        recovered.records.empty() ? 0 : recovered.records.back().at("seq").get<std::uint64_t>();
    if (last_logged < covered) {
        throw EventLogError(fmt::format("{}: log ends before the snapshot", log_path.string()));
    }
    log_ = std::make_unique<EventLog>(log_path, config_.sync);
}

TaskService::~TaskService() = default;

const std::filesystem::path& TaskService::log_path() const { return log_->path(); }

void TaskService::commit(json event)
{
    event["seq"] = seq_ + 1;
    log_->append(event);
    ++seq_;
    apply(event, false);
    if (config_.snapshot_every != 0 && ++since_snapshot_ >= config_.snapshot_every) {
        write_file_atomically(config_.state_dir / kSnapshotName,
                              json{{"seq", seq_}, {"state", state_json()}}.dump(), config_.sync);
        since_snapshot_ = 0;
    }
}

void TaskService::apply(const json& e, bool replaying)
{
    const auto type = e.at("type").get<std::string>();
    if (type == "batch_created") {
        auto b = batch_from_json(e.at("batch"));
        if (batches_.count(b.id)) {
            throw conflict(fmt::format("batch {} exists", b.id));
        }
        ++batch_counter_;
        batches_.emplace(b.id, std::move(b));
        return;
    }
    if (type == "session_opened") {
        Session s;
        s.id = e.at("session").get<std::string>();
        s.batch_id = e.at("batch").get<std::string>();
        s.worker_id = e.at("worker").get<std::string>();
        s.order = e.at("order").get<std::vector<std::size_t>>();
        const auto& b = batch_ref(s.batch_id);
        auto sorted = s.order;
        std::sort(sorted.begin(), sorted.end());
        std::vector<std::size_t> expected(b.questions.size());
        std::iota(expected.begin(), expected.end(), 0);
        if (sorted != expected) {
            throw invalid("session order is not a permutation of the batch");
        }
        s.progress.resize(b.questions.size());
        ++session_counter_;
        sessions_.emplace(s.id, std::move(s));
        return;
    }
    auto& s = session_ref(e.at("session").get<std::string>());
    if (type == "session_finalized") {
        if (s.finalized()) {
            throw conflict(fmt::format("session {} finalized twice", s.id));
        }
        const bool forced = e.at("forced").get<bool>();
        auto receipt = compute_receipt(batch_ref(s.batch_id), s, forced);
        if (replaying && to_json(receipt) != e.at("receipt")) {
            throw invalid(fmt::format("stored receipt for {} differs from the recomputed one", s.id));
        }
        s.receipt = std::move(receipt);
        s.completed_at = e.at("completed_at").get<std::string>();
        return;
    }
    const auto& b = batch_ref(s.batch_id);
    const auto qi = b.index_of(e.at("question").get<std::string>());
    if (qi == b.questions.size()) {
        throw not_found("unknown question in event");
    }
    auto& p = s.progress[qi];
    if (s.finalized()) {
        throw conflict(fmt::format("session {} changed after finalization", s.id));
    }
    if (type == "question_viewed" && p.state == Progress::Unseen) {
        p.state = Progress::MainStage;
    } else if (type == "hint_revealed" && p.state == Progress::MainStage) {
        p.state = Progress::HintStage;
    } else if (type == "answer_submitted" &&
               (p.state == Progress::MainStage || p.state == Progress::HintStage)) {
        p.stage = p.state == Progress::HintStage ? sim::Stage::Hint : sim::Stage::Main;
        p.option = e.at("option").get<std::string>();
        p.state = Progress::Answered;
    } else {
        throw conflict(fmt::format("event {} not allowed from state {}", type, to_string(p.state)));
    }
}

std::string TaskService::create_batch(const BatchRequest& request)
{
    std::lock_guard lock(mutex_);
    if (request.questions.empty()) {
        throw invalid("batch has no questions");
    }
    std::set<std::string> ids;
    std::vector<std::size_t> answerable;
    for (std::size_t i = 0; i < request.questions.size(); ++i) {
        const auto& q = request.questions[i];
        check_token("question id", q.id);
        if (!ids.insert(q.id).second) {
            throw invalid(fmt::format("duplicate question id '{}'", q.id));
        }
        if (q.hint.empty()) {
            throw invalid(fmt::format("question '{}' has an empty hint", q.id));
        }
        if (q.options.size() < 2) {
            throw invalid(fmt::format("question '{}' needs at least two options", q.id));
        }
        std::set<std::string> opts;
        for (const auto& o : q.options) {
            check_token("option", o);
            if (!opts.insert(o).second) {
                throw invalid(fmt::format("question '{}' lists option '{}' twice", q.id, o));
            }
        }
        if (q.answer) {
            if (!opts.count(*q.answer)) {
                throw invalid(fmt::format("question '{}': answer '{}' is not an option", q.id, *q.answer));
            }
            answerable.push_back(i);
        }
    }
    auto params = request.params;
    params.question_count = static_cast<int>(request.questions.size());
    try {
        mechanism::validate(params);
    } catch (const mechanism::ParamError& e) {
        throw invalid(e.what());
    }
    if (static_cast<std::size_t>(params.gold_count) > answerable.size()) {
        throw invalid(fmt::format("G = {} but only {} questions carry a known answer", params.gold_count,
                                  answerable.size()));
    }

    Batch b;
    b.id = fmt::format("b{}", batch_counter_ + 1);
    b.params = params;
    b.seed = request.seed.value_or(derive_seed(config_.seed, {batch_counter_ + 1}));
    b.shuffle = request.shuffle;
    b.requester = request.requester.is_null() ? json::object() : request.requester;
    for (const auto& q : request.questions) {
        b.questions.push_back(BatchQuestion{q, false});
    }
    for (std::size_t k : choose_gold(answerable.size(), params.gold_count, b.seed)) {
        b.questions[answerable[k]].gold = true;
    }
    commit(json{{"type", "batch_created"}, {"batch", batch_to_json(b)}});
    return b.id;
}

std::string TaskService::open_session(const std::string& batch_id, const std::string& worker_id)
{
    std::lock_guard lock(mutex_);
    const auto& b = batch_ref(batch_id);
    check_token("worker id", worker_id);
    std::size_t ordinal = 0;
    for (const auto& [id, s] : sessions_) {
        if (s.batch_id == batch_id) {
            ++ordinal;
            if (s.worker_id == worker_id) {
                throw conflict(fmt::format("worker '{}' already has session {} in batch {}", worker_id, id, batch_id));
            }
        }
    }
    std::vector<std::size_t> order(b.questions.size());
    std::iota(order.begin(), order.end(), 0);
    if (b.shuffle) {
        auto rng = make_rng(b.seed, {1, ordinal});
        std::shuffle(order.begin(), order.end(), rng);
    }
    const auto id = fmt::format("s{}", session_counter_ + 1);
    commit(json{{"type", "session_opened"}, {"session", id}, {"batch", batch_id}, {"worker", worker_id},
                {"order", order}});
    return id;
}

NextResult TaskService::next(const std::string& session_id)
{
    std::lock_guard lock(mutex_);
    auto& s = session_ref(session_id);
    if (s.finalized()) {
        throw conflict(fmt::format("session {} is finalized", session_id));
    }
    const auto& b = batch_ref(s.batch_id);
    NextResult r;
    r.total = b.questions.size();
    r.answered = static_cast<std::size_t>(std::count_if(
        s.progress.begin(), s.progress.end(), [](const QuestionProgress& p) { return p.state == Progress::Answered; }));
    for (std::size_t pos = 0; pos < s.order.size(); ++pos) {
        const auto qi = s.order[pos];
        if (s.progress[qi].state == Progress::Answered) {
            continue;
        }
        const auto& q = b.questions[qi];
        if (s.progress[qi].state == Progress::Unseen) {
            commit(json{{"type", "question_viewed"}, {"session", s.id}, {"question", q.spec.id}});
        }
        QuestionView v;
        v.session_id = s.id;
        v.question_id = q.spec.id;
        v.prompt = q.spec.prompt;
        v.options = q.spec.options;
        v.position = pos + 1;
        v.total = s.order.size();
        v.state = s.progress[qi].state;
        if (v.state == Progress::HintStage) {
            v.hint = q.spec.hint;
        }
        r.question = std::move(v);
        break;
    }
    return r;
}

std::string TaskService::reveal_hint(const std::string& session_id, const std::string& question_id)
{
    std::lock_guard lock(mutex_);
    auto& s = session_ref(session_id);
    if (s.finalized()) {
        throw conflict(fmt::format("session {} is finalized", session_id));
    }
    const auto& b = batch_ref(s.batch_id);
    const auto qi = b.index_of(question_id);
    if (qi == b.questions.size()) {
        throw not_found(fmt::format("question '{}' is not in batch {}", question_id, b.id));
    }
    switch (s.progress[qi].state) {
    case Progress::Unseen:
        throw conflict(fmt::format("question '{}' has not been shown", question_id));
    case Progress::Answered:
        throw conflict(fmt::format("question '{}' is already answered", question_id));
    case Progress::MainStage:
        commit(json{{"type", "hint_revealed"}, {"session", s.id}, {"question", question_id}});
        break;
    case Progress::HintStage:
        break;
    }
    return b.questions[qi].spec.hint;
}

sim::Stage TaskService::submit_answer(const std::string& session_id, const std::string& question_id,
                                      const std::string& option)
{
    std::lock_guard lock(mutex_);
    auto& s = session_ref(session_id);
    if (s.finalized()) {
        throw conflict(fmt::format("session {} is finalized", session_id));
    }
    const auto& b = batch_ref(s.batch_id);
    const auto qi = b.index_of(question_id);
    if (qi == b.questions.size()) {
        throw not_found(fmt::format("question '{}' is not in batch {}", question_id, b.id));
    }
    const auto& q = b.questions[qi];
    switch (s.progress[qi].state) {
    case Progress::Unseen:
        throw conflict(fmt::format("question '{}' has not been shown", question_id));
    case Progress::Answered:
        throw conflict(fmt::format("question '{}' is already answered", question_id));
    case Progress::MainStage:
    case Progress::HintStage:
        break;
    }
    if (std::find(q.spec.options.begin(), q.spec.options.end(), option) == q.spec.options.end()) {
        throw invalid(fmt::format("'{}' is not an option of question '{}'", option, question_id));
    }
    commit(json{{"type", "answer_submitted"}, {"session", s.id}, {"question", question_id}, {"option", option}});
    return s.progress[qi].stage;
}

Receipt TaskService::finalize(const std::string& session_id, bool force)
{
    std::lock_guard lock(mutex_);
    auto& s = session_ref(session_id);
    if (s.receipt) {
        return *s.receipt;
    }
    if (!force && !s.complete()) {
        const auto open = std::count_if(s.progress.begin(), s.progress.end(),
                                        [](const QuestionProgress& p) { return p.state != Progress::Answered; });
        throw conflict(fmt::format("session {} has {} unanswered questions", session_id, open));
    }
    const auto receipt = compute_receipt(batch_ref(s.batch_id), s, force);
    commit(json{{"type", "session_finalized"},
                {"session", s.id},
                {"forced", force},
                {"completed_at", now_utc()},
                {"receipt", to_json(receipt)}});
    return *s.receipt;
}

Batch TaskService::batch(const std::string& batch_id) const
{
    std::lock_guard lock(mutex_);
    return batch_ref(batch_id);
}

Session TaskService::session(const std::string& session_id) const
{
    std::lock_guard lock(mutex_);
    return session_ref(session_id);
}

std::vector<Session> TaskService::sessions_of(const std::string& batch_id) const
{
    std::lock_guard lock(mutex_);
    batch_ref(batch_id);
    std::vector<Session> out;
    for (const auto& [id, s] : sessions_) {
        if (s.batch_id == batch_id) {
            out.push_back(s);
        }
    }
    std::sort(out.begin(), out.end(), [](const Session& a, const Session& b) { return text::natural_less(a.id, b.id); });
    return out;
}

std::vector<sim::SessionTranscript> TaskService::transcripts(const std::string& batch_id) const
{
    const auto b = batch(batch_id);
    std::vector<sim::SessionTranscript> out;
    for (const auto& s : sessions_of(batch_id)) {
        out.push_back(session_transcript(b, s));
    }
    return out;
}

json TaskService::state_json() const
{
    json batches = json::array();
    for (const auto& [id, b] : batches_) {
        batches.push_back(batch_to_json(b));
    }
    json sessions = json::array();
    for (const auto& [id, s] : sessions_) {
        sessions.push_back(session_to_json(s));
    }
    return json{{"seq", seq_},
                {"batch_counter", batch_counter_},
                {"session_counter", session_counter_},
                {"batches", batches},
                {"sessions", sessions}};
}

void TaskService::load_state_json(const json& state)
{
    seq_ = state.at("seq").get<std::uint64_t>();
    batch_counter_ = state.at("batch_counter").get<std::size_t>();
    session_counter_ = state.at("session_counter").get<std::size_t>();
    for (const auto& jb : state.at("batches")) {
        auto b = batch_from_json(jb);
        batches_.emplace(b.id, std::move(b));
    }
    for (const auto& js : state.at("sessions")) {
        Session s;
        s.id = js.at("id").get<std::string>();
        s.worker_id = js.at("worker_id").get<std::string>();
        s.batch_id = js.at("batch_id").get<std::string>();
        s.order = js.at("order").get<std::vector<std::size_t>>();
        for (const auto& jp : js.at("progress")) {
            QuestionProgress p;
            auto state_name = parse_progress(jp.at("state").get<std::string>());
            auto stage = sim::parse_stage(jp.at("stage").get<std::string>());
            if (!state_name || !stage) {
                throw EventLogError(fmt::format("snapshot: bad progress in session {}", s.id));
            }
            p.state = *state_name;
            p.stage = *stage;
            p.option = jp.at("option").get<std::string>();
            s.progress.push_back(std::move(p));
        }
        s.completed_at = js.at("completed_at").get<std::string>();
        if (!js.at("receipt").is_null()) {
            const auto& b = batch_ref(s.batch_id);
            auto r = compute_receipt(b, s, js.at("receipt").at("forced").get<bool>());
            if (to_json(r) != js.at("receipt")) {
                throw EventLogError(fmt::format("snapshot: receipt for {} differs from the recomputed one", s.id));
            }
            s.receipt = std::move(r);
        }
        sessions_.emplace(s.id, std::move(s));
    }
}

std::string TaskService::dump_state() const
{
    std::lock_guard lock(mutex_);
    return state_json().dump(2);
}

void TaskService::snapshot()
{
    std::lock_guard lock(mutex_);
    write_file_atomically(config_.state_dir / kSnapshotName, json{{"seq", seq_}, {"state", state_json()}}.dump(),
                          config_.sync);
    since_snapshot_ = 0;
}

Session& TaskService::session_ref(const std::string& session_id)
{
    auto it = sessions_.find(session_id);
    if (it == sessions_.end()) {
        throw not_found(fmt::format("no session '{}'", session_id));
    }
    return it->second;
}

const Session& TaskService::session_ref(const std::string& session_id) const
{
    auto it = sessions_.find(session_id);
    if (it == sessions_.end()) {
        throw not_found(fmt::format("no session '{}'", session_id));
    }
    return it->second;
}

const Batch& TaskService::batch_ref(const std::string& batch_id) const
{
    auto it = batches_.find(batch_id);
    if (it == batches_.end()) {
        throw not_found(fmt::format("no batch '{}'", batch_id));
    }
    return it->second;
}

}  // namespace hintguide::service
