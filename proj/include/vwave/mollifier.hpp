#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "vwave/bump.hpp"
#include "vwave/core.hpp"

namespace vwave {

/// Smooth unit-mass averaging kernel.
///
/// compact-bump:       phi(x) = b((x - c) / R) / (R Z), b the sharpness-beta bump,
///                     Z its exact mass. phi >= 0. The stored samples are
///                     renormalized to unit trapezoid mass on the kernel grid.
/// vanishing-moments:  psi = inverse Fourier transform of a plateau chi with
///                     chi == 1 on [-w, w], chi == 0 beyond w + delta. Every
///                     moment of order >= 1 vanishes analytically; psi is real
///                     only when the two transition widths agree.
///
/// The stored kernel is the one-dimensional factor; an n-dimensional kernel is
/// the tensor product of n factors. `scale()` is the accumulated omega of
/// scale_kernel, so value(x) = omega^-1 phi_1(x / omega).
class Mollifier {
 public:
  enum class Kind { compact_bump, vanishing_moments };

  struct BumpParams {
    double radius = 1.0;
    double sharpness = 1.0;
    double center = 0.0;
  };

  struct CutoffParams {
    double plateau = 1.0;      // w
    double left_width = 4.0;   // transition width for xi < -w
    double right_width = 4.0;  // transition width for xi > w
    double sharpness = 8.0;    // beta of the bump generating the transition
  };

  Kind kind() const noexcept { return kind_; }
  const std::string& id() const noexcept { return id_; }
  double scale() const noexcept { return scale_; }
  int dimension() const noexcept { return dimension_; }
  double grid_spacing() const noexcept { return spacing_; }
  /// Radius of the (scaled) support: exact for bumps, certified truncation
  /// radius for vanishing-moments kernels. Measured from center().
  double support_radius() const noexcept { return support_; }
  double center() const noexcept { return kind_ == Kind::compact_bump ? bump_.center * scale_ : 0.0; }
  const std::vector<double>& abscissae() const noexcept { return nodes_; }
  const std::vector<cplx>& samples() const noexcept { return samples_; }
  /// moment_table()[k] = integral of x^k times the 1D factor.
  const std::vector<cplx>& moment_table() const noexcept { return moments_; }
  double quadrature_tolerance() const noexcept { return quad_tol_; }
  double moment_tolerance() const noexcept { return moment_tol_; }
  const BumpParams& bump_params() const noexcept { return bump_; }
  const CutoffParams& cutoff_params() const noexcept { return cutoff_; }
  /// Discarded tail mass of a vanishing-moments kernel (0 for bumps).
  double tail_mass() const noexcept { return tail_mass_; }

  bool is_real() const noexcept {
    return std::all_of(samples_.begin(), samples_.end(), [](const cplx& v) { return v.imag() == 0.0; });
  }
  bool is_nonnegative() const noexcept {
    return kind_ == Kind::compact_bump;  // bumps are >= 0 by construction
  }

  /// 1D factor at x (scaled). Vanishing-moments kernels are truncated at
  /// support_radius().
  cplx value(double x) const {
    if (kind_ == Kind::compact_bump) return derivative(x, 0);
    if (std::abs(x) > support_) return 0.0;
    return cutoff_kernel(x / scale_) / scale_;
  }

  /// d^order/dx^order of the scaled 1D factor; compact bumps only, order <= 3.
  double derivative(double x, int order) const {
    if (kind_ != Kind::compact_bump)
      throw UnsupportedError("derivative: only compact-bump kernels provide pointwise derivatives");
    if (order < 0 || order > BumpProfile::max_derivative)
      throw UnsupportedError("derivative: order " + std::to_string(order) + " not available");
    const double r = bump_.radius * scale_;
    const double s = (x - center()) / r;
    return profile_->derivative(s, order) / (std::pow(r, order) * r * mass_);
  }

  /// Integral of the scaled 1D factor over (-inf, x); compact bumps only.
  double cdf(double x) const {
    if (kind_ != Kind::compact_bump) throw UnsupportedError("cdf: only compact-bump kernels");
    const double r = bump_.radius * scale_;
    return profile_->cumulative((x - center()) / r) / mass_;
  }

  /// sup |d^order phi_omega| of the scaled 1D factor; compact bumps only.
  double derivative_sup(int order) const {
    if (kind_ != Kind::compact_bump) throw UnsupportedError("derivative_sup: only compact-bump kernels");
    const double r = bump_.radius * scale_;
    return profile_->derivative_sup(order) / (std::pow(r, order) * r * mass_);
  }

  /// Fourier transform integral phi(x) exp(-i x xi) dx of the scaled factor;
  /// vanishing-moments kernels only (it is the plateau chi(omega xi)).
  double fourier(double xi) const {
    if (kind_ != Kind::vanishing_moments) throw UnsupportedError("fourier: only vanishing-moments kernels");
    const double t = xi * scale_;
    const double w = cutoff_.plateau;
    if (std::abs(t) <= w) return 1.0;
    const double width = t > 0.0 ? cutoff_.right_width : cutoff_.left_width;
    return 1.0 - smooth_step(*profile_, (std::abs(t) - w) / width);
  }

  /// Tensor-product kernel value omega^-n prod phi_1(x_i / omega).
  cplx value_nd(std::span<const double> x) const {
    cplx v = 1.0;
    for (double xi : x) v *= value(xi);
    return v;
  }

  friend Mollifier build_bump(double, double, double, double, int, double);
  friend Mollifier build_vanishing_moments(int, double, double, const CutoffParams*, double, double);
  friend Mollifier scale_kernel(const Mollifier&, double, int);

 private:
  Mollifier() = default;

  // Inverse Fourier transform of the plateau, evaluated in long double:
  // integrating by parts against the transition bump gives
  //   psi(x) = (R(x) - L(x)) / (2 pi i x),
  //   R(x) = int_{-1}^{1} b(s)/Z exp(i x xi_r(s)) ds, xi_r = w + dr (1+s)/2,
  //   L(x) = int_{-1}^{1} b(s)/Z exp(i x xi_l(s)) ds, xi_l = -w - dl (1+s)/2.
  cplx cutoff_kernel(double x) const {
    using ld = long double;
    const auto& rule = *rule_;
    const ld w = cutoff_.plateau, dr = cutoff_.right_width, dl = cutoff_.left_width;
    const ld two_pi = 2.0L * static_cast<ld>(pi);
    const std::size_t base_panels = rule.panels;
    const double dmax = std::max(cutoff_.left_width, cutoff_.right_width);
    const auto need = static_cast<std::size_t>(std::ceil(std::abs(x) * dmax / 8.0));
    if (need > base_panels) {
      const CutoffRule wider = make_rule(cutoff_.sharpness, need);
      return cutoff_kernel_with(x, wider, w, dr, dl, two_pi);
    }
    return cutoff_kernel_with(x, rule, w, dr, dl, two_pi);
  }

  struct CutoffRule {
    std::size_t panels = 0;
    std::vector<long double> s, weight;  // weight includes b(s)/Z
  };

  static CutoffRule make_rule(double beta, std::size_t panels) {
    using ld = long double;
    using gauss = boost::math::quadrature::gauss<ld, 20>;
    CutoffRule rule;
    rule.panels = panels;
    const auto& absc = gauss::abscissa();
    const auto& wts = gauss::weights();
    const ld width = 2.0L / static_cast<ld>(panels);
    ld total = 0.0L;
    for (std::size_t p = 0; p < panels; ++p) {
      const ld mid = -1.0L + (static_cast<ld>(p) + 0.5L) * width;
      for (std::size_t k = 0; k < absc.size(); ++k) {
        for (int sign : {-1, 1}) {
          if (k == 0 && sign == 1 && absc[0] == 0.0L) continue;
          const ld s = mid + static_cast<ld>(sign) * absc[k] * width / 2.0L;
          const ld q = 1.0L - s * s;
          const ld b = q > 0.0L ? std::exp(-static_cast<ld>(beta) / q) : 0.0L;
          const ld wgt = wts[k] * width / 2.0L * b;
          rule.s.push_back(s);
          rule.weight.push_back(wgt);
          total += wgt;
        }
      }
    }
    for (auto& v : rule.weight) v /= total;
    return rule;
  }

  static cplx cutoff_kernel_with(double x, const CutoffRule& rule, long double w, long double dr,
                                 long double dl, long double two_pi) {
    using ld = long double;
    if (x == 0.0) {
      ld acc = 0.0L;
      for (std::size_t q = 0; q < rule.s.size(); ++q) {
        const ld t = (1.0L + rule.s[q]) / 2.0L;
        acc += rule.weight[q] * ((w + dr * t) + (w + dl * t));
      }
      return static_cast<double>(acc / two_pi);
    }
    const ld X = x;
    ld cr = 0, sr = 0, cl = 0, sl = 0;
    for (std::size_t q = 0; q < rule.s.size(); ++q) {
      const ld t = (1.0L + rule.s[q]) / 2.0L;
      const ld ar = X * (w + dr * t);
      const ld al = -X * (w + dl * t);
      cr += rule.weight[q] * std::cos(ar);
      sr += rule.weight[q] * std::sin(ar);
      cl += rule.weight[q] * std::cos(al);
      sl += rule.weight[q] * std::sin(al);
    }
    // (cr - cl + i (sr - sl)) / (2 pi i X)
    const ld re = (sr - sl) / (two_pi * X);
    const ld im = -(cr - cl) / (two_pi * X);
    return {static_cast<double>(re), static_cast<double>(im)};
  }

  void compute_moments(int p_max) {
    moments_.assign(static_cast<std::size_t>(p_max) + 1, 0.0);
    for (int k = 0; k <= p_max; ++k) {
      std::vector<cplx> integrand(nodes_.size());
      for (std::size_t j = 0; j < nodes_.size(); ++j) integrand[j] = std::pow(nodes_[j], k) * samples_[j];
      moments_[static_cast<std::size_t>(k)] = trapezoid(std::span<const cplx>(integrand), spacing_);
    }
  }

  Kind kind_ = Kind::compact_bump;
  std::string id_;
  double scale_ = 1.0;
  int dimension_ = 1;
  double spacing_ = 0.0;
  double support_ = 0.0;
  double mass_ = 1.0;  // bump: exact mass of b in s units
  double quad_tol_ = 1e-10;
  double moment_tol_ = 1e-8;
  double tail_mass_ = 0.0;
  BumpParams bump_{};
  CutoffParams cutoff_{};
  std::shared_ptr<const BumpProfile> profile_;
  std::shared_ptr<const CutoffRule> rule_;
  std::vector<double> nodes_;
  std::vector<cplx> samples_;
  std::vector<cplx> moments_;
};

/// Compact bump of the given support radius sampled at `grid_spacing`.
/// Fewer than 16 samples across the support is a ResolutionError.
inline Mollifier build_bump(double support_radius, double grid_spacing, double sharpness = 1.0,
                            double center = 0.0, int p_max = 4, double tolerance = 1e-10) {
  if (!(support_radius > 0.0)) throw ConfigError("build_bump: support radius must be > 0");
  if (!(grid_spacing > 0.0)) throw ConfigError("build_bump: grid spacing must be > 0");
  const double across = 2.0 * support_radius / grid_spacing;
  if (across < 16.0)
    throw ResolutionError("build_bump: only " + std::to_string(across) +
                          " samples across the support (need at least 16)");
  Mollifier m;
  m.kind_ = Mollifier::Kind::compact_bump;
  m.bump_ = {support_radius, sharpness, center};
  m.profile_ = std::make_shared<BumpProfile>(sharpness);
  m.spacing_ = grid_spacing;
  m.support_ = support_radius;
  m.quad_tol_ = tolerance;
  const auto half = static_cast<std::size_t>(std::ceil(support_radius / grid_spacing));
  std::vector<double> raw(2 * half + 1);
  m.nodes_.resize(raw.size());
  for (std::size_t j = 0; j < raw.size(); ++j) {
    const double offset = (static_cast<double>(j) - static_cast<double>(half)) * grid_spacing;
    m.nodes_[j] = center + offset;
    raw[j] = m.profile_->value(offset / support_radius);
  }
  m.mass_ = m.profile_->mass();
  // samples: unit trapezoid mass in s = (x - c)/R units
  const double discrete = trapezoid(std::span<const double>(raw), grid_spacing / support_radius);
  m.samples_.resize(raw.size());
  for (std::size_t j = 0; j < raw.size(); ++j) m.samples_[j] = raw[j] / (support_radius * discrete);
  m.compute_moments(p_max);
  if (std::abs(m.moments_[0] - 1.0) > tolerance)
    throw ConstructionError("build_bump: normalization failed quadrature tolerance");
  char buf[96];
  std::snprintf(buf, sizeof buf, "bump-R%g-b%g%s", support_radius, sharpness,
                center != 0.0 ? ("-c" + std::to_string(center)).c_str() : "");
  m.id_ = buf;
  return m;
}

/// Bump with the given sharpness whose sup |phi'| equals `target`; its radius
/// follows from sup|phi_R'| = sup|phi_1'| / R^2.
inline Mollifier build_bump_matching_derivative(double target, double sharpness, double grid_spacing_per_radius,
                                                double center_fraction = 0.0) {
  if (!(target > 0.0)) throw ConfigError("build_bump_matching_derivative: target must be > 0");
  const BumpProfile profile(sharpness);
  // unit-radius kernel: phi_1 = b / mass, phi_1' = b' / mass
  const double unit = profile.derivative_sup(1) / profile.mass();
  const double radius = std::sqrt(unit / target);
  return build_bump(radius, radius * grid_spacing_per_radius, sharpness, center_fraction * radius);
}

/// Vanishing-moments kernel: inverse Fourier transform of a plateau equal to 1
/// on [-cutoff_width, cutoff_width]. The truncation radius is the smallest
/// grid radius whose discarded tail has mass < 1e-10 and whose discarded
/// |x|^p_max-weighted mass is below a hundredth of the moment tolerance.
inline Mollifier build_vanishing_moments(int p_max, double cutoff_width, double grid_spacing,
                                         const Mollifier::CutoffParams* shape = nullptr,
                                         double moment_tolerance = 1e-8, double quadrature_tolerance = 1e-8) {
  if (p_max < 1) throw ConfigError("build_vanishing_moments: p_max must be >= 1");
  if (!(cutoff_width > 0.0)) throw ConfigError("build_vanishing_moments: cutoff width must be > 0");
  Mollifier::CutoffParams params;
  if (shape) params = *shape;
  params.plateau = cutoff_width;
  if (!shape) {
    params.left_width = 4.0 * cutoff_width;
    params.right_width = 4.0 * cutoff_width;
  }
  if (!(params.left_width > 0.0) || !(params.right_width > 0.0))
    throw ConfigError("build_vanishing_moments: transition widths must be > 0");
  const double bandwidth = params.plateau + std::max(params.left_width, params.right_width);
  if (!(grid_spacing > 0.0) || grid_spacing > pi / bandwidth)
    throw ResolutionError("build_vanishing_moments: grid spacing must be <= pi / bandwidth = " +
                          std::to_string(pi / bandwidth));

  Mollifier m;
  m.kind_ = Mollifier::Kind::vanishing_moments;
  m.cutoff_ = params;
  m.profile_ = std::make_shared<BumpProfile>(params.sharpness);
  m.rule_ = std::make_shared<Mollifier::CutoffRule>(Mollifier::make_rule(params.sharpness, 64));
  m.spacing_ = grid_spacing;
  m.quad_tol_ = quadrature_tolerance;
  m.moment_tol_ = moment_tolerance;

  const double dmin = std::min(params.left_width, params.right_width);
  const double search = 480.0 / dmin;
  const auto half = static_cast<std::size_t>(std::ceil(search / grid_spacing));
  const bool symmetric = params.left_width == params.right_width;
  std::vector<cplx> pos(half + 1), neg(half + 1);
  for (std::size_t j = 0; j <= half; ++j) {
    const double x = static_cast<double>(j) * grid_spacing;
    pos[j] = m.cutoff_kernel(x);
    neg[j] = symmetric ? pos[j] : m.cutoff_kernel(-x);
  }
  // tail sums beyond radius index r: sum_{j > r} (|psi(x_j)| + |psi(-x_j)|) h
  std::vector<double> tail0(half + 2, 0.0), tailp(half + 2, 0.0);
  for (std::size_t j = half + 1; j-- > 0;) {
    const double x = static_cast<double>(j) * grid_spacing;
    const double a = std::abs(pos[j]) + std::abs(neg[j]);
    tail0[j] = tail0[j + 1] + a * grid_spacing;
    tailp[j] = tailp[j + 1] + a * std::pow(x, p_max) * grid_spacing;
  }
  std::size_t cut = half;
  for (std::size_t r = 1; r <= half; ++r) {
    if (tail0[r + 1] < 1e-10 && tailp[r + 1] < 0.01 * moment_tolerance) {
      cut = r;
      break;
    }
  }
  m.tail_mass_ = tail0[cut + 1];
  m.support_ = static_cast<double>(cut) * grid_spacing;
  m.nodes_.resize(2 * cut + 1);
  m.samples_.resize(2 * cut + 1);
  for (std::size_t j = 0; j <= 2 * cut; ++j) {
    const auto k = static_cast<long long>(j) - static_cast<long long>(cut);
    m.nodes_[j] = static_cast<double>(k) * grid_spacing;
    m.samples_[j] = k >= 0 ? pos[static_cast<std::size_t>(k)] : neg[static_cast<std::size_t>(-k)];
  }
  if (symmetric)
    for (auto& v : m.samples_) v = v.real();
  m.compute_moments(p_max);

  if (std::abs(m.moments_[0] - 1.0) > quadrature_tolerance)
    throw ConstructionError("build_vanishing_moments: |moment 0 - 1| = " + std::to_string(std::abs(m.moments_[0] - 1.0)) +
                            " exceeds tolerance");
  double worst = 0.0;
  int worst_k = 0;
  for (int k = 1; k <= p_max; ++k) {
    const double v = std::abs(m.moments_[static_cast<std::size_t>(k)]);
    if (v > worst) {
      worst = v;
      worst_k = k;
    }
  }
  if (worst > moment_tolerance) {
    std::ostringstream msg;
    msg << "build_vanishing_moments: moment " << worst_k << " = " << worst << " exceeds tolerance "
        << moment_tolerance;
    throw ConstructionError(msg.str());
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "vm-p%d-w%g%s", p_max, cutoff_width, symmetric ? "" : "-complex");
  m.id_ = buf;
  return m;
}

/// omega^-n phi(x / omega) in n dimensions. Only the 1D factor is stored, so
/// the transformation is exact: abscissae and spacing scale by omega, values
/// by 1/omega and the k-th moment by omega^k.
inline Mollifier scale_kernel(const Mollifier& m, double omega, int dimension = 1) {
  if (!(omega > 0.0)) throw ConfigError("scale_kernel: omega must be > 0");
  if (dimension < 1) throw ConfigError("scale_kernel: dimension must be >= 1");
  Mollifier out = m;
  out.scale_ = m.scale_ * omega;
  out.dimension_ = dimension;
  out.spacing_ = m.spacing_ * omega;
  out.support_ = m.support_ * omega;
  for (auto& x : out.nodes_) x *= omega;
  for (auto& v : out.samples_) v /= omega;
  for (std::size_t k = 0; k < out.moments_.size(); ++k) out.moments_[k] *= std::pow(omega, static_cast<double>(k));
  return out;
}

// ---------------------------------------------------------------------------
// CSV export / import (columns x, re, im) of the 1D factor.
// ---------------------------------------------------------------------------

inline void write_kernel_csv(const Mollifier& m, std::ostream& os) {
  os << "x,re,im\n";
  char buf[128];
  for (std::size_t j = 0; j < m.samples().size(); ++j) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", m.abscissae()[j], m.samples()[j].real(),
                  m.samples()[j].imag());
    os << buf;
  }
}

struct KernelTable {
  std::vector<double> x;
  std::vector<cplx> values;

  double spacing() const { return x.size() > 1 ? x[1] - x[0] : 0.0; }
  cplx integral() const { return trapezoid(std::span<const cplx>(values), spacing()); }
};

inline KernelTable read_kernel_csv(std::istream& is) {
  KernelTable t;
  std::string line;
  if (!std::getline(is, line) || line.rfind("x,re,im", 0) != 0) throw ConfigError("kernel csv: missing header x,re,im");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string a, b, c;
    if (!std::getline(row, a, ',') || !std::getline(row, b, ',') || !std::getline(row, c, ','))
      throw ConfigError("kernel csv: malformed row '" + line + "'");
    t.x.push_back(std::stod(a));
    t.values.emplace_back(std::stod(b), std::stod(c));
  }
  return t;
}

}  // namespace vwave
