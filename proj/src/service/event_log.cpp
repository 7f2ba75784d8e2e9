#include "hintguide/service/event_log.hpp"

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include <fcntl.h>
#include <unistd.h>

#include <fmt/format.h>

namespace hintguide::service {

namespace {

std::string errno_text() { return std::strerror(errno); }

void write_all(int fd, const std::string& data, const std::filesystem::path& path)
{
    std::size_t done = 0;
    while (done < data.size()) {
        const ssize_t n = ::write(fd, data.data() + done, data.size() - done);
        if (n < 0) {
            if (errno == EINTR) {
                continue;
            }
            throw EventLogError(fmt::format("{}: write failed: {}", path.string(), errno_text()));
        }
        done += static_cast<std::size_t>(n);
    }
}

void sync_directory(const std::filesystem::path& dir)
{
    const int fd = ::open(dir.empty() ? "." : dir.c_str(), O_RDONLY | O_DIRECTORY);
    if (fd >= 0) {
        ::fsync(fd);
        ::close(fd);
    }
}

}  // namespace

EventLog::Recovered EventLog::recover(const std::filesystem::path& path)
{
    Recovered out;
    std::error_code ec;
    if (!std::filesystem::exists(path, ec)) {
        return out;
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw EventLogError(fmt::format("{}: cannot open", path.string()));
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string data = buf.str();

    std::size_t start = 0;
    std::size_t line = 0;
    while (start < data.size()) {
        const auto nl = data.find('\n', start);
        if (nl == std::string::npos) {
            out.torn_bytes = data.size() - start;
            break;
        }
        ++line;
        const std::string_view text(data.data() + start, nl - start);
        try {
            out.records.push_back(nlohmann::json::parse(text));
        } catch (const nlohmann::json::parse_error& e) {
            throw EventLogError(fmt::format("{}:{}: corrupt record: {}", path.string(), line, e.what()));
        }
        start = nl + 1;
    }
    if (out.torn_bytes != 0) {
        std::filesystem::resize_file(path, data.size() - out.torn_bytes, ec);
        if (ec) {
            throw EventLogError(fmt::format("{}: cannot drop torn tail: {}", path.string(), ec.message()));
        }
    }
    return out;
}

EventLog::EventLog(std::filesystem::path path, bool sync) : path_(std::move(path)), sync_(sync)
{
    fd_ = ::open(path_.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0) {
        throw EventLogError(fmt::format("{}: cannot open for append: {}", path_.string(), errno_text()));
    }
}

EventLog::~EventLog()
{
    if (fd_ >= 0) {
        ::close(fd_);
    }
}

void EventLog::append(const nlohmann::json& record)
{
    std::string line = record.dump();
    line.push_back('\n');
    write_all(fd_, line, path_);
    if (sync_ && ::fsync(fd_) != 0) {
        throw EventLogError(fmt::format("{}: fsync failed: {}", path_.string(), errno_text()));
    }
}

void write_file_atomically(const std::filesystem::path& path, const std::string& contents, bool sync)
{
    auto tmp = path;
    tmp += ".tmp";
    const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
    if (fd < 0) {
        throw EventLogError(fmt::format("{}: cannot create: {}", tmp.string(), errno_text()));
    }
    try {
        write_all(fd, contents, tmp);
        if (sync && ::fsync(fd) != 0) {
            throw EventLogError(fmt::format("{}: fsync failed: {}", tmp.string(), errno_text()));
        }
    } catch (...) {
        ::close(fd);
        throw;
    }
    ::close(fd);
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        throw EventLogError(fmt::format("{}: rename failed: {}", path.string(), ec.message()));
    }
    if (sync) {
        sync_directory(path.parent_path());
    }
}

}  // namespace hintguide::service
