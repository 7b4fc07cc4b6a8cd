#include "loojam/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>

namespace loojam {
namespace {

struct PlanPair {
    fftw_plan forward = nullptr;
    fftw_plan inverse = nullptr;
    fftw_complex* in = nullptr;
    fftw_complex* out = nullptr;
    int n = 0;
};

// FFTW planning is not reentrant, and plan creation with FFTW_ESTIMATE is
// deterministic for a fixed size, which keeps repeated runs bit-identical.
std::map<int, PlanPair>& plan_cache() {
    static std::map<int, PlanPair> cache;
    return cache;
}

PlanPair& plans_for(int n) {
    auto& cache = plan_cache();
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    PlanPair p;
    p.n = n;
    p.in = fftw_alloc_complex(static_cast<size_t>(n));
    p.out = fftw_alloc_complex(static_cast<size_t>(n));
    if (!p.in || !p.out) throw std::runtime_error("fft: allocation failed");
    p.forward = fftw_plan_dft_1d(n, p.in, p.out, FFTW_FORWARD, FFTW_ESTIMATE);
    p.inverse = fftw_plan_dft_1d(n, p.in, p.out, FFTW_BACKWARD, FFTW_ESTIMATE);
    if (!p.forward || !p.inverse) throw std::runtime_error("fft: planning failed");
    return cache.emplace(n, p).first->second;
}

std::vector<std::complex<double>> run(const std::vector<std::complex<double>>& in,
                                      bool forward) {
    if (in.empty()) throw std::invalid_argument("fft: empty input");
    const int n = static_cast<int>(in.size());
    PlanPair& p = plans_for(n);
    for (int i = 0; i < n; ++i) {
        p.in[i][0] = in[static_cast<size_t>(i)].real();
        p.in[i][1] = in[static_cast<size_t>(i)].imag();
    }
    fftw_execute(forward ? p.forward : p.inverse);
    std::vector<std::complex<double>> out(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        out[static_cast<size_t>(i)] = {p.out[i][0], p.out[i][1]};
    }
    return out;
}

}  // namespace

std::vector<std::complex<double>> fft_forward(const std::vector<std::complex<double>>& in) {
    return run(in, true);
}

std::vector<std::complex<double>> fft_inverse(const std::vector<std::complex<double>>& in) {
    return run(in, false);
}

}  // namespace loojam
