#pragma once

// Small CSV helpers. Numbers are written in shortest round-trip form so that
// export -> import -> export is byte-identical.

#include <string>
#include <string_view>
#include <vector>

namespace magiclens::csv {

/// Shortest representation that parses back to the same double; "nan",
/// "inf" and "-inf" for non-finite values.
std::string format(double v);
std::string format(long long v);

/// Fixed-point with the given number of decimals (used for ms columns).
std::string format_fixed(double v, int decimals);

/// Throws std::invalid_argument if the whole field is not a number.
double parse_double(std::string_view field);
long long parse_int(std::string_view field);

std::vector<std::string_view> split(std::string_view line, char sep = ',');
std::string_view trim(std::string_view s);

}  // namespace magiclens::csv
