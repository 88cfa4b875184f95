#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace cobra {

/// Shortest representation that parses back to the same double.
std::string format_double(double value);

/// Locale-independent strict parse; nullopt on any trailing garbage.
std::optional<double> parse_double(std::string_view text);
std::optional<unsigned long long> parse_unsigned(std::string_view text);

std::string_view trim(std::string_view text) noexcept;

}  // namespace cobra
