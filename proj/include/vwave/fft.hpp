#pragma once

#include <complex>
#include <cstring>
#include <mutex>
#include <span>
#include <vector>

#include <fftw3.h>

#include "vwave/core.hpp"

namespace vwave {

namespace detail {
// FFTW's planner is not thread-safe; execution on distinct plans is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace detail

/// Unnormalized complex DFT on 1 or 2 dimensions (row-major, axis 0 fastest
/// in our storage convention, so a 2D grid of nx * ny points is planned as
/// fftw's ny x nx). FFTW_ESTIMATE keeps results bitwise reproducible.
class FftPlan {
 public:
  explicit FftPlan(std::size_t nx, std::size_t ny = 1) : nx_(nx), ny_(ny) {
    const std::size_t n = nx * ny;
    buffer_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
    std::lock_guard lock(detail::fftw_planner_mutex());
    if (ny == 1) {
      forward_ = fftw_plan_dft_1d(static_cast<int>(nx), buffer_, buffer_, FFTW_FORWARD, FFTW_ESTIMATE);
      backward_ = fftw_plan_dft_1d(static_cast<int>(nx), buffer_, buffer_, FFTW_BACKWARD, FFTW_ESTIMATE);
    } else {
      forward_ = fftw_plan_dft_2d(static_cast<int>(ny), static_cast<int>(nx), buffer_, buffer_, FFTW_FORWARD,
                                  FFTW_ESTIMATE);
      backward_ = fftw_plan_dft_2d(static_cast<int>(ny), static_cast<int>(nx), buffer_, buffer_, FFTW_BACKWARD,
                                   FFTW_ESTIMATE);
    }
  }

  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  ~FftPlan() {
    std::lock_guard lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
    fftw_free(buffer_);
  }

  std::size_t size() const noexcept { return nx_ * ny_; }

  /// X_m = sum_j x_j exp(-2 pi i m j / N)
  std::vector<cplx> forward(std::span<const cplx> in) { return run(in, forward_); }
  /// x_j = sum_m X_m exp(+2 pi i m j / N), no 1/N factor.
  std::vector<cplx> backward(std::span<const cplx> in) { return run(in, backward_); }

 private:
  std::vector<cplx> run(std::span<const cplx> in, fftw_plan plan) {
    if (in.size() != size()) throw ConfigError("fft: input size mismatch");
    std::memcpy(buffer_, in.data(), sizeof(fftw_complex) * in.size());
    fftw_execute(plan);
    std::vector<cplx> out(in.size());
    std::memcpy(static_cast<void*>(out.data()), buffer_, sizeof(fftw_complex) * in.size());
    return out;
  }

  std::size_t nx_, ny_;
  fftw_complex* buffer_ = nullptr;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
};

/// Angular frequency of DFT index m on a periodic grid of n points and period
/// `period`; indices above n/2 map to negative frequencies. The Nyquist index
/// of an even grid maps to +pi/h.
inline double dft_frequency(std::size_t m, std::size_t n, double period) {
  const auto sm = static_cast<long long>(m);
  const auto sn = static_cast<long long>(n);
  const long long k = sm <= sn / 2 ? sm : sm - sn;
  return 2.0 * pi * static_cast<double>(k) / period;
}

inline bool is_nyquist(std::size_t m, std::size_t n) { return n % 2 == 0 && m == n / 2; }

}  // namespace vwave
