#include "fft.hpp"

#include <fftw3.h>

#include <mutex>

#include "spemb/error.hpp"

namespace spemb::detail {

namespace {

// Planner calls are not thread-safe in FFTW; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

void run(std::vector<std::complex<double>>& data, int rank, const int* dims, int sign) {
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_dft(rank, dims, ptr, ptr, sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  if (plan == nullptr) throw Error(ErrorCode::internal, "fft plan creation failed");
  fftw_execute(plan);
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(plan);
}

}  // namespace

void fft_1d(std::vector<std::complex<double>>& data, int sign) {
  const int n = static_cast<int>(data.size());
  if (n == 0) return;
  run(data, 1, &n, sign);
}

void fft_2d(std::vector<std::complex<double>>& data, std::size_t n0, std::size_t n1, int sign) {
  if (data.size() != n0 * n1) throw Error(ErrorCode::internal, "fft_2d size mismatch");
  const int dims[2] = {static_cast<int>(n0), static_cast<int>(n1)};
  run(data, 2, dims, sign);
}

}  // namespace spemb::detail
