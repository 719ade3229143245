#include "fft.hpp"

#include <fftw3.h>

#include <mutex>

#include "sphmean/error.hpp"

namespace sphmean::detail {

namespace {

// The FFTW planner is not thread safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct Plan {
  fftw_plan handle = nullptr;
  ~Plan() {
    if (handle) {
      std::lock_guard lock(planner_mutex());
      fftw_destroy_plan(handle);
    }
  }
};

int sign_of(FftDirection dir) { return dir == FftDirection::Forward ? FFTW_FORWARD : FFTW_BACKWARD; }

}  // namespace

void fft_2d(std::span<std::complex<double>> data, std::size_t n0, std::size_t n1,
            FftDirection dir) {
  if (data.size() != n0 * n1) throw Error(ErrorCode::InvalidArgument, "fft_2d size mismatch");
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  Plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan.handle = fftw_plan_dft_2d(static_cast<int>(n0), static_cast<int>(n1), buf, buf,
                                   sign_of(dir), FFTW_ESTIMATE);
  }
  if (!plan.handle) throw Error(ErrorCode::InvalidArgument, "fftw could not plan a 2D transform");
  fftw_execute(plan.handle);
}

void fft_1d(std::span<std::complex<double>> data, FftDirection dir) {
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  Plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan.handle = fftw_plan_dft_1d(static_cast<int>(data.size()), buf, buf, sign_of(dir),
                                   FFTW_ESTIMATE);
  }
  if (!plan.handle) throw Error(ErrorCode::InvalidArgument, "fftw could not plan a 1D transform");
  fftw_execute(plan.handle);
}

}  // namespace sphmean::detail
