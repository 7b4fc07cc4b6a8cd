#pragma once

#include <complex>
#include <vector>

namespace loojam {

using cd = std::complex<double>;

// One frequency-domain subcarrier: X_k = A_k * e^{j psi_k} on integer bin k.
struct SubcarrierSymbol {
    int index = 0;
    double amplitude = 0.0;
    double phase = 0.0;  // radians, normalized to [0, 2*pi)

    SubcarrierSymbol() = default;
    SubcarrierSymbol(int k, double a, double p);
    static SubcarrierSymbol from_complex(int k, cd x);
    cd value() const;
};

// One OFDM symbol in the time domain, N samples at spacing scs_hz.
struct OfdmSymbol {
    int n_fft = 0;
    double scs_hz = 15e3;
    std::vector<cd> samples;

    static OfdmSymbol from_samples(std::vector<cd> samples, double scs_hz);
    double sample_rate_hz() const { return n_fft * scs_hz; }
};

// Lazily evaluated complex exponential X * e^{j 2 pi k n / N}. The bin
// index k may be fractional (a frequency-shifted tone lands between bins).
struct SubcarrierWaveform {
    double k = 0.0;
    double amplitude = 1.0;
    double phase = 0.0;
    int n_fft = 0;

    SubcarrierWaveform(double bin, double a, double p, int n);
    cd at(int n) const;
};

// x_n = (1/N) * sum_k X_k e^{j 2 pi k n / N}. The 1/N normalization lives
// here; analyze() applies none, so the two are exact inverses.
OfdmSymbol synthesize(const std::vector<SubcarrierSymbol>& symbols, int n_fft,
                      double scs_hz = 15e3);
OfdmSymbol synthesize_bins(const std::vector<cd>& bins, double scs_hz = 15e3);

std::vector<SubcarrierSymbol> analyze(const OfdmSymbol& symbol);
std::vector<cd> analyze_bins(const OfdmSymbol& symbol);

// (1/N) * sum_n a[n] * conj(b[n]), evaluated by direct summation.
cd inner_product(const SubcarrierWaveform& a, const SubcarrierWaveform& b);

// sum_{t=0}^{N-1} e^{-j d 2 pi t / N}. Equals N when d is a multiple of N,
// 0 for any other integer d, and the Dirichlet kernel value
// sin(pi d)/sin(pi d / N) * e^{-j pi d (N-1)/N} for non-integer d. Falls
// back to direct summation near the removable singularity.
cd geometric_sum(double d, int n_fft);

enum class Orthogonality { kOrthogonal, kNonOrthogonal };

// |o| <= epsilon counts as orthogonal; epsilon must be non-negative.
Orthogonality orthogonality_classify(cd o, double epsilon);

}  // namespace loojam
