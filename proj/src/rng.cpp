#include "loojam/rng.hpp"

#include <cmath>
#include <numbers>

namespace loojam {

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t index) {
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

cd ComplexGaussian::next() {
    double u1 = 1.0 - uniform01(rng_);  // (0, 1], keeps the log finite
    double u2 = uniform01(rng_);
    double r = std::sqrt(-std::log(u1));
    double theta = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(theta), r * std::sin(theta)};
}

}  // namespace loojam
