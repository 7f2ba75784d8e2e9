#include "hintguide/common/kv_config.hpp"

#include "hintguide/common/text.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace hintguide {

KvConfig KvConfig::parse(std::string_view input, std::string source)
{
    KvConfig cfg;
    cfg.source_ = std::move(source);
    int line_no = 0;
    for (auto& raw : text::split(input, '\n')) {
        ++line_no;
        std::string_view line = raw;
        // '#' starts a comment at line start or after whitespace
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '#' && (i == 0 || line[i - 1] == ' ' || line[i - 1] == '\t')) {
                line = line.substr(0, i);
                break;
            }
        }
        line = text::trim(line);
        if (line.empty()) {
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError(fmt::format("{}:{}: expected 'key = value'", cfg.source_, line_no));
        }
        auto key = text::trim(line.substr(0, eq));
        auto value = text::trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError(fmt::format("{}:{}: empty key", cfg.source_, line_no));
        }
        cfg.entries_.push_back({std::string(key), std::string(value), line_no});
    }
    return cfg;
}

KvConfig KvConfig::load(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(fmt::format("cannot read config file '{}'", path.string()));
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path.string());
}

bool KvConfig::contains(std::string_view key) const
{
    return std::any_of(entries_.begin(), entries_.end(), [&](const KvEntry& e) { return e.key == key; });
}

std::optional<std::string> KvConfig::get(std::string_view key) const
{
    const KvEntry* found = nullptr;
    for (const auto& e : entries_) {
        if (e.key == key) {
            if (found != nullptr) {
                fail(e, fmt::format("duplicate key '{}' (first set on line {})", key, found->line));
            }
            found = &e;
        }
    }
    if (found == nullptr) {
        return std::nullopt;
    }
    return found->value;
}

std::vector<KvEntry> KvConfig::all(std::string_view key) const
{
    std::vector<KvEntry> out;
    for (const auto& e : entries_) {
        if (e.key == key) {
            out.push_back(e);
        }
    }
    return out;
}

namespace {

const KvEntry& entry_for(const std::vector<KvEntry>& entries, std::string_view key)
{
    return *std::find_if(entries.begin(), entries.end(), [&](const KvEntry& e) { return e.key == key; });
}

}  // namespace

std::optional<double> KvConfig::get_optional_double(std::string_view key) const
{
    auto v = get(key);
    if (!v) {
        return std::nullopt;
    }
    auto d = text::parse_double(*v);
    if (!d) {
        fail(entry_for(entries_, key), fmt::format("'{}' is not a number", *v));
    }
    return d;
}

double KvConfig::get_double(std::string_view key, double fallback) const
{
    return get_optional_double(key).value_or(fallback);
}

std::optional<long long> KvConfig::get_optional_int(std::string_view key) const
{
    auto v = get(key);
    if (!v) {
        return std::nullopt;
    }
    auto i = text::parse_int(*v);
    if (!i) {
        fail(entry_for(entries_, key), fmt::format("'{}' is not an integer", *v));
    }
    return i;
}

long long KvConfig::get_int(std::string_view key, long long fallback) const
{
    return get_optional_int(key).value_or(fallback);
}

bool KvConfig::get_bool(std::string_view key, bool fallback) const
{
    auto v = get(key);
    if (!v) {
        return fallback;
    }
    auto b = text::parse_bool(*v);
    if (!b) {
        fail(entry_for(entries_, key), fmt::format("'{}' is not a boolean", *v));
    }
    return *b;
}

std::string KvConfig::get_string(std::string_view key, std::string fallback) const
{
    return get(key).value_or(std::move(fallback));
}

void KvConfig::require_known(std::initializer_list<std::string_view> known) const
{
    for (const auto& e : entries_) {
        if (std::find(known.begin(), known.end(), e.key) == known.end()) {
            fail(e, fmt::format("unknown key '{}'", e.key));
        }
    }
}

void KvConfig::fail(const KvEntry& entry, const std::string& message) const
{
    throw ConfigError(fmt::format("{}:{}: {}", source_, entry.line, message));
}

}  // namespace hintguide
