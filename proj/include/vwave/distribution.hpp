#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "vwave/bump.hpp"
#include "vwave/core.hpp"
#include "vwave/fft.hpp"
#include "vwave/mollifier.hpp"

namespace vwave {

/// Closed-form function with derivatives up to `max_order`. Derivatives are
/// weak derivatives: piecewise formulas whose kinks sit at `breakpoints`.
/// `lower`/`upper` bound the support (infinite when not compact).
struct SmoothFunction {
  std::function<double(double, int)> eval;
  int max_order = 0;
  std::vector<double> breakpoints;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  /// Optional antiderivative (used by the d'Alembert oracle).
  std::function<double(double)> antiderivative;
  std::string id;

  double operator()(double x) const { return eval(x, 0); }
  double derivative(double x, int order) const {
    if (order > max_order) throw UnsupportedError(id + ": derivative of order " + std::to_string(order) + " unavailable");
    return eval(x, order);
  }
  bool compact() const noexcept { return std::isfinite(lower) && std::isfinite(upper); }
};

namespace data {

inline SmoothFunction zero() {
  SmoothFunction f;
  f.eval = [](double, int) { return 0.0; };
  f.max_order = 16;
  f.lower = f.upper = 0.0;
  f.antiderivative = [](double) { return 0.0; };
  f.id = "zero";
  return f;
}

/// amplitude * exp(-((x - center) / width)^2)
inline SmoothFunction gaussian(double amplitude = 1.0, double center = 0.0, double width = 1.0) {
  if (!(width > 0.0)) throw ConfigError("gaussian: width must be > 0");
  SmoothFunction f;
  f.eval = [=](double x, int k) {
    const double y = (x - center) / width;
    // d^k/dy^k exp(-y^2) = (-1)^k H_k(y) exp(-y^2), physicists' Hermite
    double h0 = 1.0, h1 = 2.0 * y, hk = k == 0 ? h0 : h1;
    for (int j = 2; j <= k; ++j) {
      hk = 2.0 * y * h1 - 2.0 * (j - 1) * h0;
      h0 = h1;
      h1 = hk;
    }
    const double sign = (k % 2) ? -1.0 : 1.0;
    return amplitude * sign * hk * std::exp(-y * y) / std::pow(width, k);
  };
  f.max_order = 8;
  f.antiderivative = [=](double x) {
    return amplitude * width * std::sqrt(pi) / 2.0 * (1.0 + std::erf((x - center) / width));
  };
  f.id = "gaussian";
  return f;
}

/// amplitude * b((x - center) / radius) with b the unit bump of given sharpness.
inline SmoothFunction bump(double amplitude = 1.0, double center = 0.0, double radius = 1.0, double sharpness = 1.0) {
  if (!(radius > 0.0)) throw ConfigError("bump data: radius must be > 0");
  auto profile = std::make_shared<BumpProfile>(sharpness);
  SmoothFunction f;
  f.eval = [=](double x, int k) { return amplitude * profile->derivative((x - center) / radius, k) / std::pow(radius, k); };
  f.max_order = BumpProfile::max_derivative;
  f.lower = center - radius;
  f.upper = center + radius;
  f.antiderivative = [=](double x) { return amplitude * radius * profile->cumulative((x - center) / radius); };
  f.id = "bump";
  return f;
}

/// amplitude * cos(wavenumber * x + phase)
inline SmoothFunction cosine(double amplitude = 1.0, double wavenumber = 1.0, double phase = 0.0) {
  SmoothFunction f;
  f.eval = [=](double x, int k) { return amplitude * std::pow(wavenumber, k) * std::cos(wavenumber * x + phase + k * pi / 2); };
  f.max_order = 16;
  f.antiderivative = [=](double x) {
    return wavenumber == 0.0 ? amplitude * std::cos(phase) * x : amplitude * std::sin(wavenumber * x + phase) / wavenumber;
  };
  f.id = "cosine";
  return f;
}

/// sum_j c_j x^j
inline SmoothFunction polynomial(std::vector<double> coefficients) {
  SmoothFunction f;
  f.eval = [c = coefficients](double x, int k) {
    double acc = 0.0;
    for (std::size_t j = static_cast<std::size_t>(k); j < c.size(); ++j) {
      double falling = 1.0;
      for (int m = 0; m < k; ++m) falling *= static_cast<double>(j) - m;
      acc += c[j] * falling * std::pow(x, static_cast<double>(j) - k);
    }
    return acc;
  };
  f.max_order = 16;
  f.antiderivative = [c = coefficients](double x) {
    double acc = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) acc += c[j] * std::pow(x, static_cast<double>(j + 1)) / static_cast<double>(j + 1);
    return acc;
  };
  f.id = "polynomial";
  return f;
}

/// a(x) = x^2 chi(x) / 2 for x > 0, 0 for x <= 0; chi == 1 on |x| <= plateau,
/// 0 beyond support. Weak derivatives up to order 2 (a'' jumps at 0).
inline SmoothFunction example1(double plateau = 1.0, double support = 2.0) {
  auto chi = std::make_shared<PlateauFunction>(plateau, support);
  SmoothFunction f;
  f.eval = [chi](double x, int k) {
    if (x <= 0.0) return 0.0;
    const double c0 = chi->derivative(x, 0), c1 = chi->derivative(x, 1), c2 = chi->derivative(x, 2);
    switch (k) {
      case 0: return 0.5 * x * x * c0;
      case 1: return x * c0 + 0.5 * x * x * c1;
      default: return c0 + 2.0 * x * c1 + 0.5 * x * x * c2;
    }
  };
  f.max_order = 2;
  f.breakpoints = {0.0, plateau};
  f.lower = 0.0;
  f.upper = support;
  f.id = "example1";
  return f;
}

}  // namespace data

/// Finite sum of distributional terms.
class Distribution {
 public:
  struct Sampled {
    Grid1D grid;
    std::vector<cplx> values;
  };
  struct Heaviside {
    double location = 0.0;
    double jump = 1.0;
  };
  struct PointMass {
    double location = 0.0;
    double weight = 1.0;
  };
  using Term = std::variant<Sampled, Heaviside, PointMass, SmoothFunction>;

  Distribution() = default;
  Distribution(Term t) { terms_.push_back(std::move(t)); }  // NOLINT: implicit by design

  static Distribution heaviside(double location = 0.0, double jump = 1.0) { return Term(Heaviside{location, jump}); }
  static Distribution point_mass(double location, double weight = 1.0) { return Term(PointMass{location, weight}); }
  static Distribution smooth(SmoothFunction f) { return Term(std::move(f)); }
  static Distribution sampled(Grid1D grid, std::vector<cplx> values) {
    if (values.size() != grid.points) throw ConfigError("sampled distribution: size mismatch");
    return Term(Sampled{grid, std::move(values)});
  }

  const std::vector<Term>& terms() const noexcept { return terms_; }

  Distribution& operator+=(const Distribution& other) {
    terms_.insert(terms_.end(), other.terms_.begin(), other.terms_.end());
    return *this;
  }
  friend Distribution operator+(Distribution a, const Distribution& b) { return a += b; }

  /// True when some term is a genuine distribution (not a function).
  bool singular() const {
    for (const auto& t : terms_)
      if (std::holds_alternative<Heaviside>(t) || std::holds_alternative<PointMass>(t)) return true;
    return false;
  }

 private:
  std::vector<Term> terms_;
};

namespace detail {

inline void require_inside(double lo, double hi, const Grid1D& grid, const char* what) {
  if (lo < grid.lower - 1e-12 || hi > grid.upper() + 1e-12)
    throw DomainError(std::string("convolve: smeared support of ") + what + " [" + std::to_string(lo) + ", " +
                      std::to_string(hi) + "] exceeds the output grid");
}

inline double gk(const std::function<double(double)>& f, double a, double b) {
  if (!(b > a)) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 6, 1e-13);
}

inline void add_smooth_compact(const SmoothFunction& f, const Mollifier& k, const Grid1D& grid, int order,
                               std::vector<cplx>& out) {
  const int jf = std::min(order, f.max_order);
  const int jk = order - jf;
  if (jk > BumpProfile::max_derivative) throw UnsupportedError("convolve: derivative order too high");
  const double r = k.support_radius(), c = k.center();
  if (f.compact()) require_inside(f.lower + c - r, f.upper + c + r, grid, f.id.c_str());
  for (std::size_t i = 0; i < grid.points; ++i) {
    const double x = grid.x(i);
    double lo = std::max(x - c - r, f.lower), hi = std::min(x - c + r, f.upper);
    if (!(hi > lo)) continue;
    auto integrand = [&](double y) { return f.eval(y, jf) * k.derivative(x - y, jk); };
    double acc = 0.0, a = lo;
    for (double bp : f.breakpoints)
      if (bp > a && bp < hi) {
        acc += gk(integrand, a, bp);
        a = bp;
      }
    acc += gk(integrand, a, hi);
    out[i] += acc;
  }
}

inline void add_smooth_cutoff(const SmoothFunction& f, const Mollifier& k, const Grid1D& grid, int order,
                              std::vector<cplx>& out) {
  if (order > f.max_order) throw UnsupportedError("convolve: " + f.id + " lacks derivative " + std::to_string(order));
  const auto& y = k.abscissae();
  const auto& w = k.samples();
  const double h = k.grid_spacing();
  // psi is not compactly supported, so the output never contains the smeared
  // support; no domain check here.
  for (std::size_t i = 0; i < grid.points; ++i) {
    const double x = grid.x(i);
    cplx acc = 0.0;
    for (std::size_t s = 0; s < y.size(); ++s) {
      const double arg = x - y[s];
      if (arg <= f.lower || arg >= f.upper) continue;
      acc += f.eval(arg, order) * w[s];
    }
    out[i] += acc * h;
  }
}

inline void add_sampled_compact(const Distribution::Sampled& s, const Mollifier& k, const Grid1D& grid, int order,
                                std::vector<cplx>& out) {
  if (order > BumpProfile::max_derivative) throw UnsupportedError("convolve: derivative order too high");
  const double h = s.grid.spacing;
  if (k.support_radius() < 8.0 * h)
    throw ResolutionError("convolve: kernel radius " + std::to_string(k.support_radius()) +
                          " spans fewer than 16 data samples");
  const double period = s.grid.length();
  const double r = k.support_radius(), c = k.center();
  for (std::size_t i = 0; i < grid.points; ++i) {
    const double x = grid.x(i);
    cplx acc = 0.0;
    for (std::size_t j = 0; j < s.grid.points; ++j) {
      double d = x - s.grid.x(j) - c;
      if (s.grid.periodic) d -= period * std::round(d / period);
      if (std::abs(d) >= r) continue;
      acc += s.values[j] * k.derivative(d + c, order);
    }
    out[i] += acc * h;
  }
}

/// Spectral path: multiply the DFT by chi(omega xi) (i xi)^order.
inline void add_sampled_cutoff(const Distribution::Sampled& s, const Mollifier& k, const Grid1D& grid, int order,
                               std::vector<cplx>& out) {
  if (!grid.periodic || !(s.grid == grid))
    throw UnsupportedError("convolve: sampled data with a vanishing-moments kernel needs the periodic output grid");
  const std::size_t n = grid.points;
  FftPlan plan(n);
  auto spec = plan.forward(s.values);
  for (std::size_t m = 0; m < n; ++m) {
    const double xi = dft_frequency(m, n, grid.length());
    cplx mult = k.fourier(xi) * std::pow(cplx(0.0, xi), order);
    if (order % 2 == 1 && is_nyquist(m, n)) mult = 0.0;
    spec[m] *= mult;
  }
  const auto back = plan.backward(spec);
  for (std::size_t i = 0; i < n; ++i) out[i] += back[i] / static_cast<double>(n);
}

}  // namespace detail

/// Grid samples of d^order/dx^order (dist * phi_omega), where phi_omega is `kernel`
/// scaled by omega. Fast paths:
///   Heaviside * phi_omega = jump * cdf_omega(x - x0), derivatives phi_omega^(order-1)
///   delta * phi_omega     = weight * phi_omega(x - x0)
/// Smooth terms convolve their weak derivatives with the kernel by
/// Gauss-Kronrod quadrature (compact bumps) or by the kernel's own trapezoid
/// rule (vanishing-moments kernels).
inline std::vector<cplx> convolve(const Distribution& dist, const Mollifier& kernel, double omega, const Grid1D& grid,
                                  int order = 0) {
  if (order < 0) throw ConfigError("convolve: negative derivative order");
  const Mollifier k = scale_kernel(kernel, omega, 1);
  const bool compact = k.kind() == Mollifier::Kind::compact_bump;
  std::vector<cplx> out(grid.points, 0.0);
  for (const auto& term : dist.terms()) {
    if (const auto* hv = std::get_if<Distribution::Heaviside>(&term)) {
      if (!compact) throw UnsupportedError("convolve: Heaviside with a vanishing-moments kernel is not supported");
      if (order - 1 > BumpProfile::max_derivative) throw UnsupportedError("convolve: derivative order too high");
      for (std::size_t i = 0; i < grid.points; ++i) {
        const double d = grid.x(i) - hv->location;
        out[i] += hv->jump * (order == 0 ? k.cdf(d) : k.derivative(d, order - 1));
      }
    } else if (const auto* pm = std::get_if<Distribution::PointMass>(&term)) {
      if (!compact && order != 0) throw UnsupportedError("convolve: derivatives of delta * psi are not supported");
      const double r = k.support_radius(), c = k.center();
      detail::require_inside(pm->location + c - r, pm->location + c + r, grid, "point mass");
      if (compact) {
        if (order > BumpProfile::max_derivative) throw UnsupportedError("convolve: derivative order too high");
        for (std::size_t i = 0; i < grid.points; ++i) out[i] += pm->weight * k.derivative(grid.x(i) - pm->location, order);
      } else {
        for (std::size_t i = 0; i < grid.points; ++i) out[i] += pm->weight * k.value(grid.x(i) - pm->location);
      }
    } else if (const auto* sm = std::get_if<SmoothFunction>(&term)) {
      if (compact)
        detail::add_smooth_compact(*sm, k, grid, order, out);
      else
        detail::add_smooth_cutoff(*sm, k, grid, order, out);
    } else if (const auto* sp = std::get_if<Distribution::Sampled>(&term)) {
      if (compact)
        detail::add_sampled_compact(*sp, k, grid, order, out);
      else
        detail::add_sampled_cutoff(*sp, k, grid, order, out);
    }
  }
  return out;
}

/// Samples of a smooth function (or its derivative) on a grid.
inline std::vector<cplx> sample(const SmoothFunction& f, const Grid1D& grid, int order = 0) {
  std::vector<cplx> out(grid.points);
  for (std::size_t i = 0; i < grid.points; ++i) out[i] = f.derivative(grid.x(i), order);
  return out;
}

}  // namespace vwave
