// error.hpp - error classification shared across the library and the C API.
#pragma once

#include <stdexcept>
#include <string>

namespace mpf {

enum class ErrorCode {
    Config,           // bad configuration / spec file contents
    Usage,            // bad command invocation (unknown method, missing flag)
    Dimension,        // shape mismatch between volumes / sinograms / geometry
    InvalidTransform, // exact-lattice requested with non-lattice parameters
    InvalidWeights,   // negative ray weights, broken partition of unity
    Solver,           // iterative solver diverged
    Io,               // file missing, malformed header, truncated payload
    Numeric,          // non-finite values, undefined ratios
};

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, std::string msg)
        : std::runtime_error(std::move(msg)), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) {
    throw Error(code, msg);
}

} // namespace mpf
