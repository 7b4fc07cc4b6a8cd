#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "loojam/ofdm.hpp"

namespace loojam {

enum class ReKind { kPss, kSss, kPbchPayload, kPbchDmrs, kUnused };

const char* re_kind_name(ReKind kind);

// Resource-element map of one SSB: 4 OFDM symbols by 240 subcarriers.
//
// Symbol 0 carries the PSS, symbol 2 the SSS, both centered. Symbols 1 and 3
// are fully PBCH; symbol 2 additionally carries two 48-subcarrier PBCH bands
// below and above the SSS. Every 4th PBCH subcarrier (offset dmrs_shift)
// holds a DMRS pilot.
struct SsbGrid {
    static constexpr int kNumSymbols = 4;
    static constexpr int kNumSubcarriers = 240;
    static constexpr int kEdgeBandWidth = 48;

    int dmrs_shift = 0;
    int sss_width = 127;
    std::vector<ReKind> cells;  // row-major [symbol * 240 + subcarrier]

    ReKind at(int symbol, int subcarrier) const;
    int count(ReKind kind) const;
    int pbch_re_count() const;  // payload + DMRS
};

struct RePosition {
    int symbol = 0;
    int subcarrier = 0;
    friend bool operator==(const RePosition&, const RePosition&) = default;
    friend auto operator<=>(const RePosition&, const RePosition&) = default;
};

SsbGrid build_ssb_grid(int dmrs_shift = 0, int sss_width = 127);

// All PbchDmrs positions in (symbol, subcarrier) order.
std::vector<RePosition> dmrs_positions(const SsbGrid& grid);

// Structural violations; empty means the grid is well formed.
std::vector<std::string> validate_grid(const SsbGrid& grid);

void write_grid_csv(const SsbGrid& grid, std::ostream& out);
std::string render_grid_ascii(const SsbGrid& grid);

// Frequency-domain values laid over a grid, one complex value per RE.
struct SsbSignal {
    SsbGrid grid;
    std::vector<cd> values;  // same row-major indexing as grid.cells

    static SsbSignal from_grid(const SsbGrid& grid, std::uint64_t seed);
    cd at(int symbol, int subcarrier) const;
};

}  // namespace loojam
