#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "vwave/core.hpp"

namespace vwave {

/// Unnormalized bump b(s) = exp(-beta / (1 - s^2)) on (-1, 1), zero outside.
///
/// Derivatives follow from b = exp(g) with g = -beta / (1 - s^2):
///   b'   = b g'
///   b''  = b (g'^2 + g'')
///   b''' = b (g'^3 + 3 g' g'' + g''')
/// The cumulative integral is tabulated once (Gauss-Kronrod per cell) and
/// evaluated by cubic Hermite interpolation using b itself as the slope.
class BumpProfile {
 public:
  static constexpr int max_derivative = 3;

  explicit BumpProfile(double sharpness = 1.0, std::size_t table_cells = 4096)
      : beta_(sharpness), cells_(table_cells) {
    if (!(sharpness > 0.0)) throw ConfigError("bump sharpness must be > 0");
    build_table();
  }

  double sharpness() const noexcept { return beta_; }

  double value(double s) const noexcept { return derivative(s, 0); }

  double derivative(double s, int order) const noexcept {
    if (!(std::abs(s) < 1.0)) return 0.0;
    const double q = 1.0 - s * s;
    const double g = -beta_ / q;
    const double b = std::exp(g);
    if (order == 0 || b == 0.0) return order == 0 ? b : 0.0;
    const double q2 = q * q, q3 = q2 * q, q4 = q3 * q;
    const double g1 = -2.0 * beta_ * s / q2;
    if (order == 1) return b * g1;
    const double g2 = -2.0 * beta_ / q2 - 8.0 * beta_ * s * s / q3;
    if (order == 2) return b * (g1 * g1 + g2);
    const double g3 = -24.0 * beta_ * s / q3 - 48.0 * beta_ * s * s * s / q4;
    return b * (g1 * g1 * g1 + 3.0 * g1 * g2 + g3);
  }

  /// Integral of b over (-1, 1).
  double mass() const noexcept { return cumulative_.back(); }

  /// Integral of b over (-1, s).
  double cumulative(double s) const noexcept {
    if (s <= -1.0) return 0.0;
    if (s >= 1.0) return mass();
    const double width = 2.0 / static_cast<double>(cells_);
    const double pos = (s + 1.0) / width;
    auto i = static_cast<std::size_t>(pos);
    if (i >= cells_) i = cells_ - 1;
    const double t = pos - static_cast<double>(i);
    const double s0 = -1.0 + static_cast<double>(i) * width;
    const double y0 = cumulative_[i], y1 = cumulative_[i + 1];
    const double d0 = value(s0) * width, d1 = value(s0 + width) * width;
    const double t2 = t * t, t3 = t2 * t;
    const double v = (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * d0 + (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * d1;
    return std::clamp(v, y0, y1);  // keeps the interpolant monotone
  }

  /// max |b^(order)| over (-1, 1), located by dense scan plus golden refinement.
  double derivative_sup(int order) const {
    const std::size_t n = 20000;
    double best = 0.0, arg = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
      const double s = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(n);
      const double v = std::abs(derivative(s, order));
      if (v > best) {
        best = v;
        arg = s;
      }
    }
    double lo = std::max(-1.0, arg - 2.0 / n), hi = std::min(1.0, arg + 2.0 / n);
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 80; ++it) {
      const double a = hi - gr * (hi - lo), b = lo + gr * (hi - lo);
      if (std::abs(derivative(a, order)) > std::abs(derivative(b, order)))
        hi = b;
      else
        lo = a;
    }
    return std::max(best, std::abs(derivative(0.5 * (lo + hi), order)));
  }

 private:
  void build_table() {
    cumulative_.assign(cells_ + 1, 0.0);
    const double width = 2.0 / static_cast<double>(cells_);
    auto f = [this](double s) { return value(s); };
    for (std::size_t i = 0; i < cells_; ++i) {
      const double a = -1.0 + static_cast<double>(i) * width;
      const double piece = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, a + width, 0, 0);
      cumulative_[i + 1] = cumulative_[i] + piece;
    }
  }

  double beta_;
  std::size_t cells_;
  std::vector<double> cumulative_;
};

/// Smooth step rising from 0 at t <= 0 to 1 at t >= 1, built from the
/// normalized cumulative bump.
inline double smooth_step(const BumpProfile& profile, double t) noexcept {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return profile.cumulative(2.0 * t - 1.0) / profile.mass();
}

/// Plateau function equal to 1 on |x| <= inner, 0 on |x| >= outer.
class PlateauFunction {
 public:
  PlateauFunction(double inner, double outer, std::shared_ptr<const BumpProfile> profile = nullptr)
      : inner_(inner), outer_(outer), profile_(profile ? std::move(profile) : std::make_shared<BumpProfile>()) {
    if (!(inner >= 0.0) || !(outer > inner)) throw ConfigError("plateau: need 0 <= inner < outer");
  }

  double inner() const noexcept { return inner_; }
  double outer() const noexcept { return outer_; }

  /// d^order/dx^order of the plateau, order <= 2.
  double derivative(double x, int order) const noexcept {
    const double ax = std::abs(x);
    if (ax <= inner_) return order == 0 ? 1.0 : 0.0;
    if (ax >= outer_) return 0.0;
    const double width = outer_ - inner_;
    // chi(x) = 1 - step((|x| - inner) / width); step' = 2 b(2t-1)/mass.
    const double t = (ax - inner_) / width;
    const double s = 2.0 * t - 1.0;
    const double sign = x < 0.0 ? -1.0 : 1.0;
    const double mass = profile_->mass();
    switch (order) {
      case 0: return 1.0 - smooth_step(*profile_, t);
      case 1: return -sign * 2.0 * profile_->value(s) / (mass * width);
      case 2: return -4.0 * profile_->derivative(s, 1) / (mass * width * width);
      default: return 0.0;
    }
  }

  double operator()(double x) const noexcept { return derivative(x, 0); }

 private:
  double inner_;
  double outer_;
  std::shared_ptr<const BumpProfile> profile_;
};

}  // namespace vwave
