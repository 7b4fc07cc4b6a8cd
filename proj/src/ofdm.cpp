#include "loojam/ofdm.hpp"

#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

#include "loojam/fft.hpp"

namespace loojam {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double normalize_phase(double p) {
    double r = std::fmod(p, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    // fmod can round back up to 2*pi for tiny negative inputs.
    if (r >= kTwoPi) r = 0.0;
    return r;
}

void check_n(int n_fft) {
    if (n_fft < 2) throw std::invalid_argument("n_fft must be at least 2");
}

}  // namespace

SubcarrierSymbol::SubcarrierSymbol(int k, double a, double p) {
    if (!(a >= 0.0) || !std::isfinite(a)) {
        throw std::invalid_argument("subcarrier amplitude must be finite and >= 0");
    }
    if (!std::isfinite(p)) throw std::invalid_argument("subcarrier phase must be finite");
    index = k;
    amplitude = a;
    phase = normalize_phase(p);
}

SubcarrierSymbol SubcarrierSymbol::from_complex(int k, cd x) {
    return SubcarrierSymbol(k, std::abs(x), std::arg(x));
}

cd SubcarrierSymbol::value() const { return std::polar(amplitude, phase); }

OfdmSymbol OfdmSymbol::from_samples(std::vector<cd> samples, double scs_hz) {
    if (samples.size() < 2) throw std::invalid_argument("symbol needs at least 2 samples");
    if (!(scs_hz > 0.0)) throw std::invalid_argument("subcarrier spacing must be positive");
    for (const cd& s : samples) {
        if (!std::isfinite(s.real()) || !std::isfinite(s.imag())) {
            throw std::invalid_argument("symbol samples must be finite");
        }
    }
    OfdmSymbol out;
    out.n_fft = static_cast<int>(samples.size());
    out.scs_hz = scs_hz;
    out.samples = std::move(samples);
    return out;
}

SubcarrierWaveform::SubcarrierWaveform(double bin, double a, double p, int n)
    : k(bin), amplitude(a), phase(p), n_fft(n) {
    check_n(n);
    if (!(a >= 0.0)) throw std::invalid_argument("waveform amplitude must be >= 0");
}

cd SubcarrierWaveform::at(int n) const {
    return std::polar(amplitude, phase + kTwoPi * k * n / n_fft);
}

OfdmSymbol synthesize(const std::vector<SubcarrierSymbol>& symbols, int n_fft,
                      double scs_hz) {
    check_n(n_fft);
    std::vector<cd> bins(static_cast<size_t>(n_fft), cd{0.0, 0.0});
    std::set<int> seen;
    for (const SubcarrierSymbol& s : symbols) {
        if (s.index < 0 || s.index >= n_fft) {
            throw std::invalid_argument("subcarrier index out of range");
        }
        if (!seen.insert(s.index).second) {
            throw std::invalid_argument("duplicate subcarrier index");
        }
        bins[static_cast<size_t>(s.index)] = s.value();
    }
    return synthesize_bins(bins, scs_hz);
}

OfdmSymbol synthesize_bins(const std::vector<cd>& bins, double scs_hz) {
    check_n(static_cast<int>(bins.size()));
    const int n = static_cast<int>(bins.size());
    std::vector<cd> x = fft_inverse(bins);
    for (cd& v : x) v /= static_cast<double>(n);
    return OfdmSymbol::from_samples(std::move(x), scs_hz);
}

std::vector<SubcarrierSymbol> analyze(const OfdmSymbol& symbol) {
    std::vector<cd> bins = analyze_bins(symbol);
    std::vector<SubcarrierSymbol> out;
    out.reserve(bins.size());
    for (size_t k = 0; k < bins.size(); ++k) {
        out.push_back(SubcarrierSymbol::from_complex(static_cast<int>(k), bins[k]));
    }
    return out;
}

std::vector<cd> analyze_bins(const OfdmSymbol& symbol) {
    check_n(symbol.n_fft);
    if (symbol.samples.size() != static_cast<size_t>(symbol.n_fft)) {
        throw std::invalid_argument("sample count does not match n_fft");
    }
    return fft_forward(symbol.samples);
}

cd inner_product(const SubcarrierWaveform& a, const SubcarrierWaveform& b) {
    if (a.n_fft != b.n_fft) throw std::invalid_argument("waveform lengths differ");
    const int n = a.n_fft;
    // Compensated summation keeps the cancellation error well below the
    // 1e-9 tolerances used by the orthogonality tests even at N = 4096.
    cd sum{0.0, 0.0};
    cd comp{0.0, 0.0};
    for (int t = 0; t < n; ++t) {
        cd term = a.at(t) * std::conj(b.at(t)) - comp;
        cd next = sum + term;
        comp = (next - sum) - term;
        sum = next;
    }
    return sum / static_cast<double>(n);
}

cd geometric_sum(double d, int n_fft) {
    check_n(n_fft);
    if (!std::isfinite(d)) throw std::invalid_argument("d must be finite");
    const int n = n_fft;

    // Argument reduction: with r1 = d - round(d) and dr = d - round(d/N)*N,
    //   sin(pi d)      = +/- sin(pi r1)
    //   sin(pi d / N)  = +/- sin(pi dr / N)
    //   e^{-j pi d (N-1)/N} = (sign terms) * e^{j (pi dr / N - pi r1)}
    // and the sign terms cancel in the ratio. Reducing before multiplying
    // by pi keeps the result accurate for large |d|.
    const double r1 = d - std::round(d);
    const double dr = d - std::round(d / n) * n;

    const double sin_den = std::sin(kPi * dr / n);
    if (std::abs(sin_den) < 1e-8) {
        // Removable singularity (d near a multiple of N): sum directly.
        // e^{-j 2 pi d t / N} = e^{-j 2 pi dr t / N} since the removed part
        // contributes whole turns; the reduced argument stays tiny here.
        cd sum{0.0, 0.0};
        cd comp{0.0, 0.0};
        for (int t = 0; t < n; ++t) {
            cd term = std::polar(1.0, -kTwoPi * dr * t / n) - comp;
            cd next = sum + term;
            comp = (next - sum) - term;
            sum = next;
        }
        return sum;
    }
    const double sin_num = std::sin(kPi * r1);
    return std::polar(sin_num / sin_den, kPi * dr / n - kPi * r1);
}

Orthogonality orthogonality_classify(cd o, double epsilon) {
    if (!(epsilon >= 0.0)) throw std::invalid_argument("epsilon must be >= 0");
    return std::abs(o) <= epsilon ? Orthogonality::kOrthogonal
                                  : Orthogonality::kNonOrthogonal;
}

}  // namespace loojam
