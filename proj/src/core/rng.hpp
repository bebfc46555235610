// rng.hpp - deterministic pseudo-random streams for the simulator.
// Hand-rolled generators so output bytes do not depend on the standard
// library's distribution implementations.
#pragma once

#include <cmath>
#include <cstdint>

namespace mpf {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Gaussian stream via Box-Muller on splitmix64 output.
class NormalStream {
  public:
    explicit NormalStream(std::uint64_t seed) : state_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        // uniforms in (0,1]
        double u1 = (splitmix64(state_) >> 11) * 0x1.0p-53 + 0x1.0p-54;
        double u2 = (splitmix64(state_) >> 11) * 0x1.0p-53;
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

  private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace mpf
