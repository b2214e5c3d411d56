#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace pvedge {

/// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double value);

/// Fixed-point with the given number of decimals, for aligned tables.
std::string format_fixed(double value, int decimals);

/// Parses a full string as a double. Empty or junk -> nullopt.
std::optional<double> parse_double(std::string_view text);

/// Parses "YYYY-MM-DD[T ]HH:MM[:SS][Z]" into Unix seconds (no zone math).
std::optional<std::int64_t> parse_iso8601(std::string_view text);

std::string format_iso8601(std::int64_t unix_seconds);

std::string_view trim(std::string_view text);

}  // namespace pvedge
