#pragma once

#include <complex>
#include <vector>

namespace nloct::detail {

/// Forward DFT, any length: out[k] = sum_n in[n] exp(-2*pi*i*n*k/N).
/// Thread-safe (FFTW planning is serialized internally).
std::vector<std::complex<double>> fft(const std::vector<std::complex<double>>& in);

/// Inverse DFT without the 1/N factor: out[n] = sum_k in[k] exp(+2*pi*i*n*k/N).
std::vector<std::complex<double>> ifft_unscaled(const std::vector<std::complex<double>>& in);

}  // namespace nloct::detail
