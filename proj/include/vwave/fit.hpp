#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "vwave/core.hpp"

namespace vwave {

/// Ordinary least-squares line through (log x, log y).
struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // RMS residual in log space
  std::size_t points = 0;
  bool identically_zero = false;  // every y was exactly zero; slope reported as 0
};

/// Fits log y = intercept + slope * log x. Zero y values are allowed only when
/// all of them vanish (reported via identically_zero); a mix of zero and
/// nonzero norms cannot be fitted in log space.
inline LogLogFit fit_loglog(std::span<const double> x, std::span<const double> y,
                            std::size_t min_points = 2) {
  if (x.size() != y.size()) throw FitError("fit_loglog: x and y differ in length");
  if (x.size() < min_points)
    throw FitError("fit_loglog: need at least " + std::to_string(min_points) + " points, got " +
                   std::to_string(x.size()));
  LogLogFit fit;
  fit.points = x.size();
  if (std::all_of(y.begin(), y.end(), [](double v) { return v == 0.0; })) {
    fit.identically_zero = true;
    return fit;
  }
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !std::isfinite(x[i]))
      throw FitError("fit_loglog: abscissa must be positive and finite (index " + std::to_string(i) + ")");
    if (!(y[i] > 0.0) || !std::isfinite(y[i]))
      throw FitError("fit_loglog: ordinate must be positive and finite (index " + std::to_string(i) + ")");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  const double n = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx <= 1e-24 * n) throw FitError("fit_loglog: degenerate abscissa (all values identical)");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

inline LogLogFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y,
                            std::size_t min_points = 2) {
  return fit_loglog(std::span<const double>(x), std::span<const double>(y), min_points);
}

/// Observed convergence order from errors on successively refined grids with
/// refinement ratio r: p = log(e_coarse / e_fine) / log r, averaged over pairs.
inline double observed_order(std::span<const double> errors, double ratio = 2.0) {
  if (errors.size() < 2) throw FitError("observed_order: need at least two errors");
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
    if (!(errors[i] > 0.0) || !(errors[i + 1] > 0.0)) throw FitError("observed_order: non-positive error");
    sum += std::log(errors[i] / errors[i + 1]) / std::log(ratio);
  }
  return sum / static_cast<double>(errors.size() - 1);
}

/// Richardson triple-grid estimate p = log((f1 - f2) / (f2 - f3)) / log r from
/// a scalar functional on three grids (coarse to fine). No exact solution needed.
inline double richardson_order(double coarse, double medium, double fine, double ratio = 2.0) {
  const double num = coarse - medium;
  const double den = medium - fine;
  if (den == 0.0 || num / den <= 0.0) throw FitError("richardson_order: non-monotone sequence");
  return std::log(num / den) / std::log(ratio);
}

}  // namespace vwave
