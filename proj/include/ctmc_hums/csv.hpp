#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ctmc_hums::csv {

/// Shortest-safe round-trip text for a double: 17 significant digits.
std::string format_double(double x);

/// Splits one CSV record. Double-quoted fields may contain commas and "" escapes.
/// A trailing '\r' is ignored so CRLF input reads like LF input.
std::vector<std::string> split_line(std::string_view line);

/// Quotes a field only when it contains a comma, quote or newline.
std::string quote_field(std::string_view field);

/// Whole-string numeric parse; nullopt on junk or trailing characters.
std::optional<double> parse_double(std::string_view text);
std::optional<long long> parse_integer(std::string_view text);

std::string trim(std::string_view text);

}  // namespace ctmc_hums::csv
