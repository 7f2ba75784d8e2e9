#pragma once
// Append-only log with one JSON record per line. A record is committed once
// its trailing newline is on disk; a partial last line left by a crash is
// dropped on recovery.

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <vector>

#include <json.hpp>

namespace hintguide::service {

class EventLogError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class EventLog {
public:
    struct Recovered {
        std::vector<nlohmann::json> records;
        std::size_t torn_bytes = 0;  // bytes of an uncommitted tail, now truncated
    };

    // Reads every committed record and truncates any torn tail. A missing
    // file yields no records. An unparsable committed line is an error.
    static Recovered recover(const std::filesystem::path& path);

    EventLog(std::filesystem::path path, bool sync);
    ~EventLog();
    EventLog(const EventLog&) = delete;
    EventLog& operator=(const EventLog&) = delete;

    // Writes the record as one line with a single append and, when syncing,
    // returns only after fsync.
    void append(const nlohmann::json& record);

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    bool sync_ = true;
    int fd_ = -1;
};

// Replaces `path` with `contents` via a synced temporary file and rename.
void write_file_atomically(const std::filesystem::path& path, const std::string& contents, bool sync);

}  // namespace hintguide::service
