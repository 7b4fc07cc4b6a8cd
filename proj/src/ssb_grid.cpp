#include "loojam/ssb_grid.hpp"

#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace loojam {
namespace {

constexpr int kSyms = SsbGrid::kNumSymbols;
constexpr int kScs = SsbGrid::kNumSubcarriers;

int center_start(int width) { return (kScs - width) / 2; }

bool in_center_band(int sc, int width) {
    return sc >= center_start(width) && sc < center_start(width) + width;
}

bool in_edge_band(int sc) {
    return sc < SsbGrid::kEdgeBandWidth || sc >= kScs - SsbGrid::kEdgeBandWidth;
}

}  // namespace

const char* re_kind_name(ReKind kind) {
    switch (kind) {
        case ReKind::kPss: return "pss";
        case ReKind::kSss: return "sss";
        case ReKind::kPbchPayload: return "pbch";
        case ReKind::kPbchDmrs: return "dmrs";
        case ReKind::kUnused: return "unused";
    }
    throw std::invalid_argument("unknown ReKind");
}

ReKind SsbGrid::at(int symbol, int subcarrier) const {
    if (symbol < 0 || symbol >= kSyms || subcarrier < 0 || subcarrier >= kScs) {
        throw std::out_of_range("grid position out of range");
    }
    return cells[static_cast<size_t>(symbol * kScs + subcarrier)];
}

int SsbGrid::count(ReKind kind) const {
    int n = 0;
    for (ReKind c : cells) n += (c == kind) ? 1 : 0;
    return n;
}

int SsbGrid::pbch_re_count() const {
    return count(ReKind::kPbchPayload) + count(ReKind::kPbchDmrs);
}

SsbGrid build_ssb_grid(int dmrs_shift, int sss_width) {
    if (dmrs_shift < 0 || dmrs_shift > 3) {
        throw std::invalid_argument("dmrs_shift must be in [0, 3]");
    }
    // The centered band has to fit strictly between the two PBCH edge bands
    // of the SSS symbol.
    if (sss_width < 1 || sss_width > kScs - 2 * SsbGrid::kEdgeBandWidth) {
        throw std::invalid_argument("sss_width must be in [1, 144]");
    }

    SsbGrid grid;
    grid.dmrs_shift = dmrs_shift;
    grid.sss_width = sss_width;
    grid.cells.assign(static_cast<size_t>(kSyms * kScs), ReKind::kUnused);

    auto set = [&grid](int sym, int sc, ReKind kind) {
        grid.cells[static_cast<size_t>(sym * kScs + sc)] = kind;
    };
    auto pbch_kind = [dmrs_shift](int sc) {
        return sc % 4 == dmrs_shift ? ReKind::kPbchDmrs : ReKind::kPbchPayload;
    };

    for (int sc = 0; sc < kScs; ++sc) {
        if (in_center_band(sc, sss_width)) set(0, sc, ReKind::kPss);
        set(1, sc, pbch_kind(sc));
        if (in_edge_band(sc)) {
            set(2, sc, pbch_kind(sc));
        } else if (in_center_band(sc, sss_width)) {
            set(2, sc, ReKind::kSss);
        }
        set(3, sc, pbch_kind(sc));
    }
    return grid;
}

std::vector<RePosition> dmrs_positions(const SsbGrid& grid) {
    std::vector<RePosition> out;
    for (int sym = 0; sym < kSyms; ++sym) {
        for (int sc = 0; sc < kScs; ++sc) {
            if (grid.at(sym, sc) == ReKind::kPbchDmrs) out.push_back({sym, sc});
        }
    }
    return out;
}

std::vector<std::string> validate_grid(const SsbGrid& grid) {
    std::vector<std::string> violations;
    auto complain = [&violations](int sym, int sc, const std::string& what) {
        std::ostringstream os;
        os << "symbol " << sym << " subcarrier " << sc << ": " << what;
        violations.push_back(os.str());
    };

    if (grid.dmrs_shift < 0 || grid.dmrs_shift > 3) {
        violations.push_back("dmrs_shift out of range");
        return violations;
    }
    if (grid.sss_width < 1 || grid.sss_width > kScs - 2 * SsbGrid::kEdgeBandWidth) {
        violations.push_back("sss_width out of range");
        return violations;
    }
    if (grid.cells.size() != static_cast<size_t>(kSyms * kScs)) {
        violations.push_back("cell array has wrong size");
        return violations;
    }

    auto expected_pbch = [&grid](int sc) {
        return sc % 4 == grid.dmrs_shift ? ReKind::kPbchDmrs : ReKind::kPbchPayload;
    };
    for (int sc = 0; sc < kScs; ++sc) {
        ReKind want0 = in_center_band(sc, grid.sss_width) ? ReKind::kPss : ReKind::kUnused;
        if (grid.at(0, sc) != want0) complain(0, sc, "PSS symbol mismatch");

        if (grid.at(1, sc) != expected_pbch(sc)) complain(1, sc, "PBCH symbol mismatch");
        if (grid.at(3, sc) != expected_pbch(sc)) complain(3, sc, "PBCH symbol mismatch");

        ReKind want2 = ReKind::kUnused;
        if (in_edge_band(sc)) {
            want2 = expected_pbch(sc);
        } else if (in_center_band(sc, grid.sss_width)) {
            want2 = ReKind::kSss;
        }
        if (grid.at(2, sc) != want2) complain(2, sc, "SSS symbol mismatch");
    }

    if (grid.pbch_re_count() != 576) violations.push_back("PBCH RE count is not 576");
    if (grid.count(ReKind::kPbchDmrs) != 144) violations.push_back("DMRS count is not 144");
    return violations;
}

void write_grid_csv(const SsbGrid& grid, std::ostream& out) {
    out << "symbol,subcarrier,kind\n";
    for (int sym = 0; sym < kSyms; ++sym) {
        for (int sc = 0; sc < kScs; ++sc) {
            out << sym << ',' << sc << ',' << re_kind_name(grid.at(sym, sc)) << '\n';
        }
    }
}

std::string render_grid_ascii(const SsbGrid& grid) {
    std::string out;
    for (int sym = 0; sym < kSyms; ++sym) {
        for (int sc = 0; sc < kScs; ++sc) {
            char c = '.';
            switch (grid.at(sym, sc)) {
                case ReKind::kPss: c = 'P'; break;
                case ReKind::kSss: c = 'S'; break;
                case ReKind::kPbchPayload: c = 'B'; break;
                case ReKind::kPbchDmrs: c = 'D'; break;
                case ReKind::kUnused: c = '.'; break;
            }
            out.push_back(c);
        }
        out.push_back('\n');
    }
    return out;
}

SsbSignal SsbSignal::from_grid(const SsbGrid& grid, std::uint64_t seed) {
    std::vector<std::string> report = validate_grid(grid);
    if (!report.empty()) throw std::invalid_argument("grid is not well formed");

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> quadrant(0, 3);
    constexpr double kPi = std::numbers::pi;

    SsbSignal sig;
    sig.grid = grid;
    sig.values.assign(grid.cells.size(), cd{0.0, 0.0});
    for (size_t idx = 0; idx < grid.cells.size(); ++idx) {
        if (grid.cells[idx] == ReKind::kUnused) continue;
        sig.values[idx] = std::polar(1.0, kPi / 4.0 + quadrant(rng) * kPi / 2.0);
    }
    return sig;
}

cd SsbSignal::at(int symbol, int subcarrier) const {
    grid.at(symbol, subcarrier);  // bounds check
    return values[static_cast<size_t>(symbol * kScs + subcarrier)];
}

}  // namespace loojam
