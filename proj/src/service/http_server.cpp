#include "hintguide/service/http_server.hpp"

#include "hintguide/common/kv_config.hpp"
#include "hintguide/mechanism/payment.hpp"
#include "hintguide/sim/transcript.hpp"

#include <random>
#include <set>
#include <stdexcept>

#include <fmt/format.h>
#include <httplib.h>

namespace hintguide::service {

using nlohmann::json;

namespace {

int status_for(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::Invalid:
        return 400;
    case ErrorKind::Unauthorized:
        return 401;
    case ErrorKind::NotFound:
        return 404;
    case ErrorKind::Conflict:
        return 409;
    }
    return 500;
}

void send(httplib::Response& res, int status, const json& body)
{
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

json parse_body(const httplib::Request& req, std::initializer_list<const char*> known)
{
    if (req.body.empty()) {
        return json::object();
    }
    json j;
    try {
        j = json::parse(req.body);
    } catch (const json::parse_error& e) {
        throw ServiceError(ErrorKind::Invalid, fmt::format("request body is not JSON: {}", e.what()));
    }
    if (!j.is_object()) {
        throw ServiceError(ErrorKind::Invalid, "request body must be a JSON object");
    }
    const std::set<std::string> allowed(known.begin(), known.end());
    for (const auto& [key, value] : j.items()) {
        if (!allowed.count(key)) {
            throw ServiceError(ErrorKind::Invalid, fmt::format("unknown field '{}'", key));
        }
    }
    return j;
}

std::string string_field(const json& j, const char* key)
{
    if (!j.contains(key) || !j.at(key).is_string()) {
        throw ServiceError(ErrorKind::Invalid, fmt::format("'{}' must be a string", key));
    }
    return j.at(key).get<std::string>();
}

bool same_token(const std::string& a, const std::string& b)
{
    if (a.size() != b.size()) {
        return false;
    }
    unsigned char diff = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff |= static_cast<unsigned char>(a[i] ^ b[i]);
    }
    return diff == 0;
}

template <typename F>
httplib::Server::Handler guarded(F f)
{
    return [f](const httplib::Request& req, httplib::Response& res) {
        try {
            f(req, res);
        } catch (const ServiceError& e) {
            send(res, status_for(e.kind()), json{{"error", e.what()}});
        } catch (const std::exception& e) {
            send(res, 500, json{{"error", e.what()}});
        }
    };
}

}  // namespace

ServeConfig load_serve_config(const std::filesystem::path& path)
{
    auto cfg = KvConfig::load(path);
    cfg.require_known({"host", "port", "state_dir", "requester_token", "sync", "snapshot_every", "seed"});
    ServeConfig c;
    c.host = cfg.get_string("host", c.host);
    c.port = static_cast<int>(cfg.get_int("port", c.port));
    if (c.port < 0 || c.port > 65535) {
        throw ConfigError(fmt::format("{}: port {} outside [0, 65535]", cfg.source(), c.port));
    }
    c.service.state_dir = cfg.get_string("state_dir", "");
    c.service.sync = cfg.get_bool("sync", true);
    const auto every = cfg.get_int("snapshot_every", 1000);
    if (every < 0) {
        throw ConfigError(fmt::format("{}: snapshot_every must be non-negative", cfg.source()));
    }
    c.service.snapshot_every = static_cast<std::size_t>(every);
    const auto seed = cfg.get_int("seed", 1);
    if (seed < 0) {
        throw ConfigError(fmt::format("{}: seed must be non-negative", cfg.source()));
    }
    c.service.seed = static_cast<std::uint64_t>(seed);
    c.requester_token = cfg.get_string("requester_token", "");
    return c;
}

std::string generate_token()
{
    std::random_device rd;
    std::string out;
    for (int i = 0; i < 4; ++i) {
        out += fmt::format("{:08x}", static_cast<std::uint32_t>(rd()));
    }
    return out;
}

HttpServer::HttpServer(TaskService& service, std::string requester_token)
    : service_(service), token_(std::move(requester_token)), server_(std::make_unique<httplib::Server>())
{
    if (token_.empty()) {
        throw std::invalid_argument("requester token must not be empty");
    }
    install_routes();
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port)
{
    if (port == 0) {
        const int bound = server_->bind_to_any_port(host);
        if (bound <= 0) {
            throw std::runtime_error(fmt::format("cannot bind {}", host));
        }
        return bound;
    }
    if (!server_->bind_to_port(host, port)) {
        throw std::runtime_error(fmt::format("cannot bind {}:{}", host, port));
    }
    return port;
}

void HttpServer::run() { server_->listen_after_bind(); }

void HttpServer::stop()
{
    if (server_) {
        server_->stop();
    }
}

void HttpServer::wait_until_ready() const { server_->wait_until_ready(); }

void HttpServer::install_routes()
{
    auto& svc = service_;
    auto require_requester = [token = token_](const httplib::Request& req) {
        const auto header = req.get_header_value("Authorization");
        constexpr std::string_view prefix = "Bearer ";
        if (header.rfind(prefix, 0) != 0 || !same_token(header.substr(prefix.size()), token)) {
            throw ServiceError(ErrorKind::Unauthorized, "requester token required");
        }
    };

    server_->Post("/batches", guarded([&svc, require_requester](const httplib::Request& req, httplib::Response& res) {
        require_requester(req);
        auto body = parse_body(req, {"questions", "params", "seed", "shuffle", "requester"});
        const auto request = batch_request_from_json(body);
        const auto id = svc.create_batch(request);
        const auto b = svc.batch(id);
        send(res, 201, json{{"batch_id", id}, {"question_count", b.questions.size()},
                            {"gold_count", b.params.gold_count}});
    }));

    server_->Post(R"(/batches/([^/]+)/sessions)",
                  guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                      auto body = parse_body(req, {"worker_id"});
                      const std::string batch_id = req.matches[1];
                      const auto id = svc.open_session(batch_id, string_field(body, "worker_id"));
                      const auto s = svc.session(id);
                      send(res, 201, json{{"session_id", id}, {"batch_id", batch_id}, {"worker_id", s.worker_id},
                                          {"question_count", s.order.size()}});
                  }));

    server_->Get(R"(/sessions/([^/]+)/next)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                     const auto r = svc.next(req.matches[1]);
                     json body{{"complete", !r.question}, {"answered", r.answered}, {"total", r.total}};
                     if (r.question) {
                         body["question"] = to_json(*r.question);
                     }
                     send(res, 200, body);
                 }));

    server_->Post(R"(/sessions/([^/]+)/questions/([^/]+)/hint)",
                  guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                      parse_body(req, {});
                      const std::string sid = req.matches[1];
                      const std::string qid = req.matches[2];
                      const auto hint = svc.reveal_hint(sid, qid);
                      send(res, 200, json{{"session_id", sid}, {"question_id", qid}, {"stage", "hint"}, {"hint", hint}});
                  }));

    server_->Post(R"(/sessions/([^/]+)/questions/([^/]+)/answer)",
                  guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                      auto body = parse_body(req, {"option"});
                      const std::string sid = req.matches[1];
                      const std::string qid = req.matches[2];
                      const auto stage = svc.submit_answer(sid, qid, string_field(body, "option"));
                      send(res, 200, json{{"session_id", sid}, {"question_id", qid},
                                          {"stage", sim::to_string(stage)}, {"accepted", true}});
                  }));

    // The worker sees the amount only; which questions were gold stays with
    // the requester because the gold set is shared across the batch.
    server_->Post(R"(/sessions/([^/]+)/finalize)",
                  guarded([&svc, require_requester](const httplib::Request& req, httplib::Response& res) {
                      auto body = parse_body(req, {"force"});
                      bool force = false;
                      if (body.contains("force")) {
                          if (!body.at("force").is_boolean()) {
                              throw ServiceError(ErrorKind::Invalid, "'force' must be a boolean");
                          }
                          force = body.at("force").get<bool>();
                      }
                      if (force) {
                          require_requester(req);
                      }
                      const std::string sid = req.matches[1];
                      const auto receipt = svc.finalize(sid, force);
                      const auto s = svc.session(sid);
                      send(res, 200, json{{"session_id", sid}, {"payment", mechanism::format_money(receipt.payment)},
                                          {"forced", receipt.forced}, {"completed_at", s.completed_at}});
                  }));

    server_->Get(R"(/batches/([^/]+)/transcripts)",
                 guarded([&svc, require_requester](const httplib::Request& req, httplib::Response& res) {
                     require_requester(req);
                     const std::string batch_id = req.matches[1];
                     const auto b = svc.batch(batch_id);
                     const auto transcripts = svc.transcripts(batch_id);
                     json sessions = json::array();
                     for (const auto& s : svc.sessions_of(batch_id)) {
                         sessions.push_back(json{{"session_id", s.id},
                                                 {"worker_id", s.worker_id},
                                                 {"finalized", s.finalized()},
                                                 {"completed_at", s.completed_at},
                                                 {"receipt", s.receipt ? to_json(*s.receipt) : json(nullptr)}});
                     }
                     send(res, 200, json{{"batch_id", batch_id},
                                         {"params", params_to_json(b.params)},
                                         {"params_config", mechanism::to_config_text(b.params)},
                                         {"requester", b.requester},
                                         {"transcript", sim::to_transcript_text(transcripts)},
                                         {"sessions", sessions}});
                 }));

    server_->set_error_handler([](const httplib::Request&, httplib::Response& res) {
        if (res.body.empty()) {
            res.set_content(json{{"error", fmt::format("HTTP {}", res.status)}}.dump(), "application/json");
        }
    });
}

}  // namespace hintguide::service
