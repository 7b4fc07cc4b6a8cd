#pragma once

#include <complex>
#include <vector>

namespace loojam {

// Unscaled DFT pair backed by FFTW, any transform size.
//   forward:  X_k = sum_n x_n e^{-j 2 pi k n / N}
//   inverse:  x_n = sum_k X_k e^{+j 2 pi k n / N}
// Plans are cached per size; not thread safe.
std::vector<std::complex<double>> fft_forward(const std::vector<std::complex<double>>& in);
std::vector<std::complex<double>> fft_inverse(const std::vector<std::complex<double>>& in);

}  // namespace loojam
