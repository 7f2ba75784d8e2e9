#pragma once
// Question batches served to workers under the two-stage answering flow.
//
// Every state change is appended to the event log before it is applied, so
// a restarted service replays the log into the same state. Finalization
// rebuilds the session transcript and prices it through the same code path
// as offline payment, and replay checks each stored receipt against that.

#include "hintguide/mechanism/params.hpp"
#include "hintguide/mechanism/types.hpp"
#include "hintguide/service/event_log.hpp"
#include "hintguide/sim/session.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace hintguide::service {

enum class ErrorKind : std::uint8_t { Invalid, NotFound, Conflict, Unauthorized };

class ServiceError : public std::runtime_error {
public:
    ServiceError(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

struct QuestionSpec {
    std::string id;
    std::string prompt;  // text or a reference to an image
    std::vector<std::string> options;
    std::string hint;
    std::optional<std::string> answer;  // known to the requester; required for gold
};

struct BatchRequest {
    std::vector<QuestionSpec> questions;
    // G, T, epsilon, mu and skip_s; N is taken from the question count.
    mechanism::MechanismParams params;
    std::optional<std::uint64_t> seed;
    bool shuffle = false;          // per-session question order
    nlohmann::json requester;      // free-form requester settings, echoed on export
};

struct BatchQuestion {
    QuestionSpec spec;
    bool gold = false;
};

struct Batch {
    std::string id;
    std::vector<BatchQuestion> questions;
    mechanism::MechanismParams params;
    std::uint64_t seed = 0;
    bool shuffle = false;
    nlohmann::json requester;

    std::size_t index_of(const std::string& question_id) const;  // questions.size() if absent
};

enum class Progress : std::uint8_t { Unseen, MainStage, HintStage, Answered };

std::string_view to_string(Progress p);

struct QuestionProgress {
    Progress state = Progress::Unseen;
    std::string option;
    sim::Stage stage = sim::Stage::Unanswered;  // Main or Hint once answered
};

struct Receipt {
    std::string session_id;
    std::string worker_id;
    std::string batch_id;
    std::vector<std::string> gold_questions;
    std::vector<mechanism::AnswerState> states;
    double payment = 0.0;
    mechanism::MechanismParams params;
    bool forced = false;
};

struct Session {
    std::string id;
    std::string worker_id;
    std::string batch_id;
    std::vector<std::size_t> order;        // batch indices in presentation order
    std::vector<QuestionProgress> progress;  // indexed by batch position
    std::optional<Receipt> receipt;
    std::string completed_at;              // UTC, set at finalization

    bool finalized() const { return receipt.has_value(); }
    bool complete() const;
};

struct QuestionView {
    std::string session_id;
    std::string question_id;
    std::string prompt;
    std::vector<std::string> options;
    std::size_t position = 0;  // 1-based in presentation order
    std::size_t total = 0;
    Progress state = Progress::MainStage;
    std::optional<std::string> hint;  // present only once revealed
};

struct NextResult {
    std::optional<QuestionView> question;  // empty when every question is answered
    std::size_t answered = 0;
    std::size_t total = 0;
};

struct ServiceConfig {
    std::filesystem::path state_dir;
    bool sync = true;
    // Events between snapshots; 0 disables snapshots.
    std::size_t snapshot_every = 1000;
    std::uint64_t seed = 1;  // batches created without a seed derive one from this
};

class TaskService {
public:
    // Restores the state found in `config.state_dir`, creating it if needed.
    explicit TaskService(ServiceConfig config);
    ~TaskService();

    std::string create_batch(const BatchRequest& request);
    std::string open_session(const std::string& batch_id, const std::string& worker_id);
    NextResult next(const std::string& session_id);
    std::string reveal_hint(const std::string& session_id, const std::string& question_id);
    sim::Stage submit_answer(const std::string& session_id, const std::string& question_id,
                             const std::string& option);
    // Without `force` every question must be answered; unanswered gold then
    // evaluates as D-. A finalized session returns its stored receipt.
    Receipt finalize(const std::string& session_id, bool force);

    Batch batch(const std::string& batch_id) const;
    Session session(const std::string& session_id) const;
    // Requester view: stages, correctness and gold flags, batch order.
    std::vector<sim::SessionTranscript> transcripts(const std::string& batch_id) const;
    std::vector<Session> sessions_of(const std::string& batch_id) const;

    // Canonical text of the whole state; equal states give equal text.
    std::string dump_state() const;
    void snapshot();

    std::size_t replayed_events() const { return replayed_; }
    const std::filesystem::path& log_path() const;

private:
    void commit(nlohmann::json event);
    void apply(const nlohmann::json& event, bool replaying);
    nlohmann::json state_json() const;
    void load_state_json(const nlohmann::json& state);

    Session& session_ref(const std::string& session_id);
    const Session& session_ref(const std::string& session_id) const;
    const Batch& batch_ref(const std::string& batch_id) const;

    ServiceConfig config_;
    mutable std::mutex mutex_;
    std::map<std::string, Batch> batches_;
    std::map<std::string, Session> sessions_;
    std::size_t batch_counter_ = 0;
    std::size_t session_counter_ = 0;
    std::uint64_t seq_ = 0;
    std::uint64_t since_snapshot_ = 0;
    std::size_t replayed_ = 0;
    std::unique_ptr<EventLog> log_;
};

// Gold positions among `candidates` questions with known answers, uniform
// over all subsets of size G.
std::vector<std::size_t> choose_gold(std::size_t candidates, int gold_count, std::uint64_t seed);

// Receipt for a session, computed from its transcript.
Receipt compute_receipt(const Batch& batch, const Session& session, bool forced);
sim::SessionTranscript session_transcript(const Batch& batch, const Session& session);

// Wire formats shared by the event log, snapshots and HTTP.
nlohmann::json to_json(const Receipt& r);
nlohmann::json to_json(const QuestionView& v);
nlohmann::json params_to_json(const mechanism::MechanismParams& p);
// Reads G, T, epsilon, mu_min, mu_max, skip_s; money may be a number or a
// decimal string. Throws ServiceError(Invalid).
mechanism::MechanismParams params_from_json(const nlohmann::json& j, int question_count);
BatchRequest batch_request_from_json(const nlohmann::json& j);

}  // namespace hintguide::service
