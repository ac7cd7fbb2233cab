#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace vwave {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;

// ---------------------------------------------------------------------------
// Errors
//
// Every failure surfaces as an exception derived from vwave::Error. The CLI
// maps ConfigError to exit status 2 and everything else to 1.
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ResolutionError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class FitError : public Error {
 public:
  using Error::Error;
};

class ConstructionError : public Error {
 public:
  using Error::Error;
};

class UnsupportedError : public Error {
 public:
  using Error::Error;
};

class CflError : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::size_t step)
      : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

class GlaeserViolation : public Error {
 public:
  using Error::Error;
};

class VerificationFailure : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Uniform 1D grid: x_i = lower + i * spacing, i = 0 .. points-1.
// A periodic grid identifies lower and lower + points * spacing.
// ---------------------------------------------------------------------------

struct Grid1D {
  double lower = 0.0;
  double spacing = 1.0;
  std::size_t points = 0;
  bool periodic = false;

  double x(std::size_t i) const noexcept { return lower + static_cast<double>(i) * spacing; }
  double upper() const noexcept { return x(points - 1); }
  double length() const noexcept { return static_cast<double>(points) * spacing; }

  std::vector<double> nodes() const {
    std::vector<double> out(points);
    for (std::size_t i = 0; i < points; ++i) out[i] = x(i);
    return out;
  }

  friend bool operator==(const Grid1D&, const Grid1D&) = default;
};

/// Grid of 2m+1 points symmetric about zero, spacing h.
inline Grid1D symmetric_grid(double half_width, double spacing) {
  const auto m = static_cast<std::size_t>(std::ceil(half_width / spacing - 1e-12));
  return Grid1D{-static_cast<double>(m) * spacing, spacing, 2 * m + 1, false};
}

/// Periodic grid covering [-half_extent, half_extent) with the given count.
inline Grid1D periodic_grid(double half_extent, std::size_t points) {
  return Grid1D{-half_extent, 2.0 * half_extent / static_cast<double>(points), points, true};
}

// ---------------------------------------------------------------------------
// Small numeric helpers shared by every module.
// ---------------------------------------------------------------------------

inline double magnitude(double v) noexcept { return std::abs(v); }
inline double magnitude(const cplx& v) noexcept { return std::abs(v); }
inline double magnitude_sq(double v) noexcept { return v * v; }
inline double magnitude_sq(const cplx& v) noexcept { return std::norm(v); }

template <class T>
inline bool is_finite(const T& v) noexcept {
  if constexpr (std::is_same_v<T, cplx>) {
    return std::isfinite(v.real()) && std::isfinite(v.imag());
  } else {
    return std::isfinite(v);
  }
}

template <class T>
double sup_norm(std::span<const T> v) {
  double m = 0.0;
  for (const auto& x : v) m = std::max(m, magnitude(x));
  return m;
}

template <class T>
double sup_norm(const std::vector<T>& v) {
  return sup_norm(std::span<const T>(v));
}

/// Composite trapezoid on a uniform grid. For integrands that vanish with all
/// derivatives at both ends this is spectrally accurate.
template <class T>
T trapezoid(std::span<const T> values, double spacing) {
  if (values.empty()) return T{};
  T sum{};
  for (const auto& v : values) sum += v;
  sum -= 0.5 * (values.front() + values.back());
  return sum * spacing;
}

/// Discrete L2 norm squared, h^dim * sum |v|^2 (grid quadrature).
template <class T>
double l2_norm_sq(std::span<const T> v, double cell_volume) {
  double s = 0.0;
  for (const auto& x : v) s += magnitude_sq(x);
  return s * cell_volume;
}

template <class T>
double l2_norm(std::span<const T> v, double cell_volume) {
  return std::sqrt(l2_norm_sq(v, cell_volume));
}

}  // namespace vwave
