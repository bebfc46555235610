#include "core/textio.hpp"

#include <charconv>
#include <cstdlib>
#include <sstream>

#include "core/error.hpp"

namespace mpf {

std::string format_double(double value) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& token, const std::string& context) {
    double out = 0.0;
    auto res = std::from_chars(token.data(), token.data() + token.size(), out);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size())
        fail(ErrorCode::Io, context + ": cannot parse decimal '" + token + "'");
    return out;
}

long long parse_int(const std::string& token, const std::string& context) {
    long long out = 0;
    auto res = std::from_chars(token.data(), token.data() + token.size(), out);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size())
        fail(ErrorCode::Io, context + ": cannot parse integer '" + token + "'");
    return out;
}

std::vector<std::string> split_tokens(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream iss(line);
    std::string tok;
    while (iss >> tok)
        out.push_back(tok);
    return out;
}

} // namespace mpf
