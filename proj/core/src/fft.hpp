#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace sphmean::detail {

enum class FftDirection { Forward, Backward };

// Unnormalized in-place DFTs (FFTW sign conventions: forward uses e^{-i}).
// Plans use FFTW_ESTIMATE so the same sizes always pick the same algorithm.
void fft_2d(std::span<std::complex<double>> data, std::size_t n0, std::size_t n1,
            FftDirection dir);
void fft_1d(std::span<std::complex<double>> data, FftDirection dir);

// Angular frequency of DFT bin k for n samples of spacing `step`.
inline double dft_frequency(std::size_t k, std::size_t n, double step) noexcept {
  const auto kk = static_cast<double>(k);
  const auto nn = static_cast<double>(n);
  const double shifted = 2 * k < n ? kk : kk - nn;
  return 2.0 * 3.14159265358979323846 * shifted / (nn * step);
}

}  // namespace sphmean::detail
