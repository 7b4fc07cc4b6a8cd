#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "loojam/ofdm.hpp"

namespace loojam {

struct ChannelTap {
    double delay_s = 0.0;
    double power = 0.0;  // linear, normalized so the profile sums to 1
};

struct ChannelProfile {
    std::vector<ChannelTap> taps;
    bool has_los = false;
};

// Parses profile text of the form
//   ; comment
//   taps = [[delay_s, power_linear], ...]
//   has_los = true
// Delays must be non-negative and non-decreasing, powers positive; powers
// are normalized to sum to 1.
ChannelProfile load_profile(const std::string& text);
ChannelProfile load_profile_file(const std::string& path);

// Tap gains resolved onto a discrete sample grid. With has_los the first
// tap is deterministic sqrt(power); all others are Rayleigh draws.
struct ChannelRealization {
    std::vector<cd> gains;  // gains[d] multiplies x[n - d]
    double sample_rate_hz = 0.0;
    std::uint64_t seed = 0;
};

ChannelRealization make_realization(const ChannelProfile& profile,
                                    double sample_rate_hz, std::uint64_t seed);

enum class ConvolutionMode { kLinear, kCircular };

// Tapped-delay-line filtering. Linear mode truncates the tail so the output
// keeps the symbol length; circular mode wraps (the cyclic-prefix idealized
// case, so the per-bin channel is diagonal).
OfdmSymbol apply_tdl(const OfdmSymbol& symbol, const ChannelRealization& channel,
                     ConvolutionMode mode);

// Adds noise at snr_db measured against this symbol's own mean power.
OfdmSymbol add_awgn(const OfdmSymbol& symbol, double snr_db, std::uint64_t seed);

}  // namespace loojam
