#pragma once

#include <cmath>
#include <cstdio>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "vwave/core.hpp"

namespace vwave {

/// Rate omega(eps) at which a mollifier shrinks along an eps-ladder.
///
///   power     omega = coeff * eps^r
///   loglog    1/omega = ln(ln(1/eps)), spliced to 1 for eps >= exp(-e)
///   sqrtlog   1/omega^2 = ln(1/eps),   spliced to 1 for eps >= exp(-1)
///   constant  omega = coeff
///
/// The splice points are where the logarithmic branch reaches 1, so omega is
/// continuous, positive and bounded by 1 on (0, 1].
class PositiveScale {
 public:
  enum class Kind { power, loglog, sqrtlog, constant };

  static PositiveScale power(double exponent, double coeff = 1.0) {
    if (!(exponent > 0.0)) throw ConfigError("power scale: exponent must be > 0");
    if (!(coeff > 0.0)) throw ConfigError("power scale: coefficient must be > 0");
    return PositiveScale(Kind::power, exponent, coeff);
  }
  static PositiveScale loglog() { return PositiveScale(Kind::loglog, 0.0, 1.0); }
  static PositiveScale sqrtlog() { return PositiveScale(Kind::sqrtlog, 0.0, 1.0); }
  static PositiveScale constant(double value) {
    if (!(value > 0.0)) throw ConfigError("constant scale: value must be > 0");
    return PositiveScale(Kind::constant, 0.0, value);
  }

  Kind kind() const noexcept { return kind_; }
  double exponent() const noexcept { return exponent_; }
  double coefficient() const noexcept { return coeff_; }

  /// Threshold below which the logarithmic branches are active.
  double splice_point() const noexcept {
    switch (kind_) {
      case Kind::loglog: return std::exp(-std::numbers::e);
      case Kind::sqrtlog: return std::exp(-1.0);
      default: return 1.0;
    }
  }

  double operator()(double eps) const {
    if (!(eps > 0.0) || eps > 1.0) throw DomainError("positive scale evaluated outside (0, 1]");
    switch (kind_) {
      case Kind::power: return coeff_ * std::pow(eps, exponent_);
      case Kind::loglog:
        if (eps >= splice_point()) return 1.0;
        return 1.0 / std::log(std::log(1.0 / eps));
      case Kind::sqrtlog:
        if (eps >= splice_point()) return 1.0;
        return 1.0 / std::sqrt(std::log(1.0 / eps));
      case Kind::constant: return coeff_;
    }
    return 1.0;
  }

  std::string id() const {
    switch (kind_) {
      case Kind::power: {
        char buf[64];
        std::snprintf(buf, sizeof buf, "power%g", exponent_);
        return buf;
      }
      case Kind::loglog: return "loglog";
      case Kind::sqrtlog: return "sqrtlog";
      case Kind::constant: return "constant";
    }
    return "scale";
  }

  std::vector<double> evaluate(std::span<const double> ladder) const {
    std::vector<double> out;
    out.reserve(ladder.size());
    for (double e : ladder) out.push_back((*this)(e));
    return out;
  }

  /// Checks c2 * eps^r <= omega(eps) <= c1 on every ladder point.
  bool sandwich_holds(std::span<const double> ladder, double r, double c1, double c2) const {
    for (double e : ladder) {
      const double w = (*this)(e);
      if (!(w > 0.0) || w > c1 || w < c2 * std::pow(e, r)) return false;
    }
    return true;
  }

 private:
  PositiveScale(Kind k, double r, double c) : kind_(k), exponent_(r), coeff_(c) {}

  Kind kind_;
  double exponent_;
  double coeff_;
};

/// Geometric ladder eps_j = base^-j for j = j_min .. j_max (coarse to fine).
inline std::vector<double> geometric_ladder(int j_min = 2, int j_max = 9, double base = 2.0) {
  if (j_max < j_min) throw ConfigError("ladder: j_max < j_min");
  std::vector<double> out;
  for (int j = j_min; j <= j_max; ++j) out.push_back(std::pow(base, -j));
  return out;
}

}  // namespace vwave
