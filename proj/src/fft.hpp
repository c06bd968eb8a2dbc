#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace spemb::detail {

// In-place unnormalized DFT. sign = -1 forward, +1 backward.
void fft_1d(std::vector<std::complex<double>>& data, int sign);
// Row-major n0 x n1.
void fft_2d(std::vector<std::complex<double>>& data, std::size_t n0, std::size_t n1, int sign);

}  // namespace spemb::detail
