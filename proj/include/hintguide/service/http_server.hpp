#pragma once
// JSON-over-HTTP front end for TaskService.
//
//   POST /batches                                 requester
//   POST /batches/{id}/sessions                   {"worker_id": ...}
//   GET  /sessions/{id}/next
//   POST /sessions/{id}/questions/{qid}/hint
//   POST /sessions/{id}/questions/{qid}/answer    {"option": ...}
//   POST /sessions/{id}/finalize                  {"force": true} needs the requester
//   GET  /batches/{id}/transcripts                requester
//
// Requester calls carry "Authorization: Bearer <token>". Errors come back as
// {"error": ...} with 400 (bad request), 401, 404 or 409 (state conflict).

#include "hintguide/service/task_service.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>

namespace httplib {
class Server;
}

namespace hintguide::service {

// Service config file keys: host, port, state_dir, requester_token, sync,
// snapshot_every, seed.
struct ServeConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    ServiceConfig service;
    std::string requester_token;  // empty: one is generated at startup
};

ServeConfig load_serve_config(const std::filesystem::path& path);

class HttpServer {
public:
    HttpServer(TaskService& service, std::string requester_token);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    // Port 0 binds a free port. Returns the bound port; throws on failure.
    int bind(const std::string& host, int port);
    // Serves until stop() is called.
    void run();
    void stop();
    void wait_until_ready() const;

private:
    void install_routes();

    TaskService& service_;
    std::string token_;
    std::unique_ptr<httplib::Server> server_;
};

// A random 128-bit hex token.
std::string generate_token();

}  // namespace hintguide::service
