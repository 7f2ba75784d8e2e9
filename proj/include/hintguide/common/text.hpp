#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hintguide::text {

std::string_view trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
// Splits on `sep`, trims each piece, drops empty pieces.
std::vector<std::string> split_list(std::string_view s, char sep = ',');

std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);
std::optional<std::uint64_t> parse_u64(std::string_view s);
std::optional<bool> parse_bool(std::string_view s);

// Orders "w2" before "w10": digit runs compare numerically.
bool natural_less(std::string_view a, std::string_view b);

// Shortest round-trippable decimal form.
std::string format_double(double v);

}  // namespace hintguide::text
