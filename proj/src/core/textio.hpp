// textio.hpp - decimal formatting/parsing helpers for the ASCII file headers.
#pragma once

#include <string>
#include <vector>

namespace mpf {

// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double value);

double parse_double(const std::string& token, const std::string& context);
long long parse_int(const std::string& token, const std::string& context);

std::vector<std::string> split_tokens(const std::string& line);

} // namespace mpf
