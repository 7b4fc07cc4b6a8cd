#pragma once

#include <cstdint>
#include <random>

#include "loojam/ofdm.hpp"

namespace loojam {

// splitmix64 finalizer over base + (index + 1) * golden-ratio increment.
// Used to derive independent per-trial and per-stage seeds from one base
// seed; documented in the README so runs are reproducible by construction.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t index);

// Circular complex Gaussian draws with E|z|^2 = 1, generated by Box-Muller
// on mt19937_64 uniforms. Hand-rolled instead of std::normal_distribution so
// the byte streams do not depend on the standard library implementation.
class ComplexGaussian {
  public:
    explicit ComplexGaussian(std::uint64_t seed) : rng_(seed) {}
    cd next();

  private:
    std::mt19937_64 rng_;
};

// Uniform double in [0, 1) from the top 53 bits of one mt19937_64 draw.
double uniform01(std::mt19937_64& rng);

}  // namespace loojam
