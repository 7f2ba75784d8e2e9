#pragma once
// Plain-text key/value configuration files.
//
//   # comment
//   key = value          # trailing comment
//   worker = spammer count=3
//
// Keys may repeat; callers decide whether a repeat is legal.

#include <filesystem>
#include <initializer_list>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hintguide {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct KvEntry {
    std::string key;
    std::string value;
    int line = 0;
};

class KvConfig {
public:
    static KvConfig parse(std::string_view text, std::string source = "<string>");
    static KvConfig load(const std::filesystem::path& path);

    const std::vector<KvEntry>& entries() const { return entries_; }
    const std::string& source() const { return source_; }

    bool contains(std::string_view key) const;

    // Single-valued lookup; a repeated key is an error.
    std::optional<std::string> get(std::string_view key) const;
    std::vector<KvEntry> all(std::string_view key) const;

    double get_double(std::string_view key, double fallback) const;
    std::optional<double> get_optional_double(std::string_view key) const;
    long long get_int(std::string_view key, long long fallback) const;
    std::optional<long long> get_optional_int(std::string_view key) const;
    bool get_bool(std::string_view key, bool fallback) const;
    std::string get_string(std::string_view key, std::string fallback) const;

    // Throws ConfigError naming the first key not in `known`.
    void require_known(std::initializer_list<std::string_view> known) const;

    [[noreturn]] void fail(const KvEntry& entry, const std::string& message) const;

private:
    std::string source_;
    std::vector<KvEntry> entries_;
};

}  // namespace hintguide
