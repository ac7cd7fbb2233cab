#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "vwave/core.hpp"
#include "vwave/distribution.hpp"
#include "vwave/fit.hpp"
#include "vwave/mollifier.hpp"
#include "vwave/scale.hpp"

namespace vwave {

/// Non-negative coefficient a(x) of one variable. In two dimensions each a_i
/// is a CoefficientField along one axis.
class CoefficientField {
 public:
  enum class Kind { constant, smooth, smooth_sampled, example1, heaviside, point_mass_sum };

  static CoefficientField constant(double value) {
    if (!(value >= 0.0)) throw ConfigError("constant coefficient must be >= 0");
    CoefficientField c(Kind::constant, "constant");
    c.value_ = value;
    c.function_ = data::polynomial({value});
    return c;
  }

  /// Closed-form smooth coefficient; non-negativity is checked on `probe`.
  static CoefficientField smooth(SmoothFunction f, const Grid1D& probe) {
    for (std::size_t i = 0; i < probe.points; ++i)
      if (f(probe.x(i)) < 0.0) throw ConfigError("smooth coefficient '" + f.id + "' is negative on the probe grid");
    CoefficientField c(Kind::smooth, "smooth-" + f.id);
    c.function_ = std::move(f);
    return c;
  }

  static CoefficientField smooth_sampled(Grid1D grid, std::vector<double> values) {
    if (values.size() != grid.points) throw ConfigError("smooth-sampled coefficient: size mismatch");
    for (double v : values)
      if (!(v >= 0.0)) throw ConfigError("smooth-sampled coefficient has a negative sample");
    CoefficientField c(Kind::smooth_sampled, "sampled");
    c.grid_ = grid;
    c.samples_ = std::move(values);
    return c;
  }

  static CoefficientField example1(double plateau = 1.0, double support = 2.0) {
    CoefficientField c(Kind::example1, "example1");
    c.function_ = data::example1(plateau, support);
    return c;
  }

  static CoefficientField heaviside(double location = 0.0, double jump = 1.0) {
    if (!(jump >= 0.0)) throw ConfigError("heaviside coefficient: jump must be >= 0");
    CoefficientField c(Kind::heaviside, "heaviside");
    c.locations_ = {location};
    c.weights_ = {jump};
    return c;
  }

  static CoefficientField point_mass_sum(std::vector<double> locations, std::vector<double> weights) {
    if (locations.size() != weights.size() || locations.empty())
      throw ConfigError("point-mass-sum: locations and weights must be non-empty and equal in length");
    for (double w : weights)
      if (!(w >= 0.0)) throw ConfigError("point-mass-sum: weights must be >= 0");
    CoefficientField c(Kind::point_mass_sum, "point-mass-sum");
    c.locations_ = std::move(locations);
    c.weights_ = std::move(weights);
    return c;
  }

  Kind kind() const noexcept { return kind_; }
  const std::string& id() const noexcept { return id_; }
  bool distributional() const noexcept { return kind_ == Kind::heaviside || kind_ == Kind::point_mass_sum; }
  /// Pointwise values exist (smooth or piecewise smooth fields).
  bool has_values() const noexcept { return kind_ != Kind::point_mass_sum; }
  double constant_value() const noexcept { return value_; }

  /// a(x); the Heaviside field takes the right-continuous value.
  double value(double x) const {
    switch (kind_) {
      case Kind::constant: return value_;
      case Kind::smooth:
      case Kind::example1: return function_(x);
      case Kind::heaviside: return x >= locations_[0] ? weights_[0] : 0.0;
      case Kind::smooth_sampled: {
        // linear interpolation, zero outside the table
        const double pos = (x - grid_.lower) / grid_.spacing;
        if (pos < 0.0 || pos > static_cast<double>(grid_.points - 1)) return 0.0;
        const auto i = std::min(static_cast<std::size_t>(pos), grid_.points - 2);
        const double t = pos - static_cast<double>(i);
        return (1.0 - t) * samples_[i] + t * samples_[i + 1];
      }
      case Kind::point_mass_sum: break;
    }
    throw UnsupportedError("point-mass-sum coefficient has no pointwise values");
  }

  /// Weak derivative of the field where a closed form exists.
  double derivative(double x, int order) const {
    if (order == 0) return value(x);
    switch (kind_) {
      case Kind::constant: return 0.0;
      case Kind::smooth:
      case Kind::example1: return function_.derivative(x, order);
      default: throw UnsupportedError(id_ + ": no pointwise derivative");
    }
  }

  Distribution distribution() const {
    switch (kind_) {
      case Kind::constant:
      case Kind::smooth:
      case Kind::example1: return Distribution::smooth(function_);
      case Kind::smooth_sampled: {
        std::vector<cplx> v(samples_.begin(), samples_.end());
        return Distribution::sampled(grid_, std::move(v));
      }
      case Kind::heaviside: return Distribution::heaviside(locations_[0], weights_[0]);
      case Kind::point_mass_sum: {
        Distribution d;
        for (std::size_t i = 0; i < locations_.size(); ++i) d += Distribution::point_mass(locations_[i], weights_[i]);
        return d;
      }
    }
    return {};
  }

  nlohmann::json describe() const {
    nlohmann::json j{{"kind", id_}};
    if (kind_ == Kind::constant) j["value"] = value_;
    if (!locations_.empty()) {
      j["locations"] = locations_;
      j["weights"] = weights_;
    }
    return j;
  }

 private:
  CoefficientField(Kind k, std::string id) : kind_(k), id_(std::move(id)) {}

  Kind kind_;
  std::string id_;
  double value_ = 0.0;
  SmoothFunction function_;
  Grid1D grid_{};
  std::vector<double> samples_;
  std::vector<double> locations_, weights_;
};

/// a_eps = a * phi_omega(eps) on a grid, for every eps of a ladder, with
/// derivatives up to k_max computed by convolution (never by differencing).
struct RegularizedNet {
  std::vector<double> ladder;
  std::vector<double> omegas;
  std::string scale_id;
  std::string kernel_id;
  std::string field_id;
  Grid1D grid;
  int k_max = 2;
  // derivatives[e][alpha][i]
  std::vector<std::vector<std::vector<double>>> derivatives;
  // supnorm[e][alpha] = max_i |d^alpha a_eps(x_i)|
  std::vector<std::vector<double>> supnorm;

  std::size_t size() const noexcept { return ladder.size(); }
  const std::vector<double>& values(std::size_t e) const { return derivatives.at(e).at(0); }
  const std::vector<double>& derivative(std::size_t e, int alpha) const {
    if (alpha < 0 || alpha > k_max) throw ConfigError("net: derivative order " + std::to_string(alpha) + " not stored");
    return derivatives.at(e).at(static_cast<std::size_t>(alpha));
  }

  double max_value() const {
    double m = 0.0;
    for (std::size_t e = 0; e < size(); ++e) m = std::max(m, supnorm[e][0]);
    return m;
  }
  double min_value() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& per : derivatives)
      for (double v : per[0]) m = std::min(m, v);
    return m;
  }

  void finalize_norms() {
    supnorm.assign(size(), std::vector<double>(static_cast<std::size_t>(k_max) + 1, 0.0));
    for (std::size_t e = 0; e < size(); ++e)
      for (int a = 0; a <= k_max; ++a) supnorm[e][static_cast<std::size_t>(a)] = sup_norm(derivatives[e][static_cast<std::size_t>(a)]);
  }
};

/// Net made of the unregularized field itself (one entry per ladder point),
/// for smooth fields whose derivatives exist in closed form.
inline RegularizedNet exact_net(const CoefficientField& field, const Grid1D& grid, std::vector<double> ladder = {1.0},
                                int k_max = 2) {
  RegularizedNet net;
  net.ladder = std::move(ladder);
  net.omegas.assign(net.ladder.size(), 0.0);
  net.scale_id = "none";
  net.kernel_id = "none";
  net.field_id = field.id();
  net.grid = grid;
  net.k_max = k_max;
  std::vector<std::vector<double>> per(static_cast<std::size_t>(k_max) + 1, std::vector<double>(grid.points));
  for (int a = 0; a <= k_max; ++a)
    for (std::size_t i = 0; i < grid.points; ++i) per[static_cast<std::size_t>(a)][i] = field.derivative(grid.x(i), a);
  net.derivatives.assign(net.ladder.size(), per);
  net.finalize_norms();
  return net;
}

/// Builds a_eps = a * phi_omega(eps) for every eps. Distributional fields need a
/// non-negative kernel. The output must be real: a complex kernel applied to a
/// coefficient is a configuration error.
inline RegularizedNet regularize(const CoefficientField& field, const Mollifier& kernel, const PositiveScale& scale,
                                 const std::vector<double>& ladder, const Grid1D& grid, int k_max = 2) {
  if (field.distributional() && !kernel.is_nonnegative())
    throw ConfigError("regularize: distributional coefficient '" + field.id() + "' needs a non-negative kernel");
  if (ladder.empty()) throw ConfigError("regularize: empty ladder");
  if (k_max < 0 || k_max > 3) throw ConfigError("regularize: k_max must be in 0..3");
  RegularizedNet net;
  net.ladder = ladder;
  net.omegas = scale.evaluate(ladder);
  net.scale_id = scale.id();
  net.kernel_id = kernel.id();
  net.field_id = field.id();
  net.grid = grid;
  net.k_max = k_max;
  if (field.distributional() || field.kind() == CoefficientField::Kind::example1)
    for (std::size_t e = 0; e < ladder.size(); ++e)
      if (kernel.support_radius() * net.omegas[e] < 8.0 * grid.spacing)
        throw ResolutionError("regularize: kernel at eps = " + std::to_string(ladder[e]) +
                              " spans fewer than 16 grid points");
  const auto dist = field.distribution();
  net.derivatives.resize(ladder.size());
  for (std::size_t e = 0; e < ladder.size(); ++e) {
    auto& per = net.derivatives[e];
    per.resize(static_cast<std::size_t>(k_max) + 1);
    for (int a = 0; a <= k_max; ++a) {
      auto& out = per[static_cast<std::size_t>(a)];
      if (field.kind() == CoefficientField::Kind::constant) {
        out.assign(grid.points, a == 0 ? field.constant_value() : 0.0);
        continue;
      }
      const auto c = convolve(dist, kernel, net.omegas[e], grid, a);
      out.resize(grid.points);
      for (std::size_t i = 0; i < grid.points; ++i) {
        if (std::abs(c[i].imag()) > 1e-12 * std::max(1.0, std::abs(c[i].real())))
          throw ConfigError("regularize: complex kernel produced a complex coefficient");
        out[i] = c[i].real();
      }
    }
  }
  net.finalize_norms();
  return net;
}

/// CSV of one ladder entry: x, a_eps, a_eps', a_eps'' (as many derivative
/// columns as stored).
inline void write_net_csv(const RegularizedNet& net, std::size_t e, std::ostream& os) {
  os << "x";
  for (int a = 0; a <= net.k_max; ++a) os << ",a_eps" << std::string(static_cast<std::size_t>(a), '\'');
  os << '\n';
  char buf[64];
  for (std::size_t i = 0; i < net.grid.points; ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", net.grid.x(i));
    os << buf;
    for (int a = 0; a <= net.k_max; ++a) {
      std::snprintf(buf, sizeof buf, ",%.17g", net.derivatives[e][static_cast<std::size_t>(a)][i]);
      os << buf;
    }
    os << '\n';
  }
}

struct GlaeserReport {
  std::vector<double> ladder;
  std::vector<double> omegas;
  std::vector<double> M;       // M_eps = ||a_eps''||_inf
  std::vector<double> rho;     // max_x |a_eps'|^2 / (2 M_eps a_eps + floor)
  std::vector<double> floors;  // floor used per eps
  std::vector<double> worst_x;
  double tolerance = 1e-6;
  double floor_factor = 1e-14;
  LogLogFit exponent;  // M_eps versus 1/omega
  bool exponent_available = false;
  bool passed = true;

  double max_rho() const { return rho.empty() ? 0.0 : *std::max_element(rho.begin(), rho.end()); }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["ladder"] = ladder;
    j["omega"] = omegas;
    j["M"] = M;
    j["rho"] = rho;
    j["floor"] = floors;
    j["worst_x"] = worst_x;
    j["tolerance"] = tolerance;
    j["floor_factor"] = floor_factor;
    j["max_rho"] = max_rho();
    j["passed"] = passed;
    if (exponent_available)
      j["M_exponent"] = {{"slope", exponent.slope},
                         {"residual", exponent.residual},
                         {"identically_zero", exponent.identically_zero}};
    return j;
  }
};

/// Pointwise Glaeser ratio |a'|^2 / (2 M a + floor) on a single grid function.
/// Returns (rho, argmax index).
inline std::pair<double, std::size_t> glaeser_ratio(std::span<const double> a, std::span<const double> da, double M,
                                                    double floor) {
  double rho = 0.0;
  std::size_t arg = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double num = da[i] * da[i];
    if (num == 0.0) continue;
    const double den = 2.0 * M * std::max(a[i], 0.0) + floor;
    const double r = den > 0.0 ? num / den : std::numeric_limits<double>::infinity();
    if (r > rho) {
      rho = r;
      arg = i;
    }
  }
  return {rho, arg};
}

/// Measures M_eps and the worst Glaeser ratio for every ladder entry.
/// Throws GlaeserViolation when some rho_eps exceeds 1 + tolerance, unless
/// `throw_on_violation` is false, in which case the report carries passed = false.
inline GlaeserReport glaeser_check(const RegularizedNet& net, double tolerance = 1e-6, double floor_factor = 1e-14,
                                   bool throw_on_violation = true) {
  if (net.k_max < 2) throw ConfigError("glaeser_check: net needs derivatives up to order 2");
  GlaeserReport rep;
  rep.ladder = net.ladder;
  rep.omegas = net.omegas;
  rep.tolerance = tolerance;
  rep.floor_factor = floor_factor;
  for (std::size_t e = 0; e < net.size(); ++e) {
    const double M = net.supnorm[e][2];
    const double floor = floor_factor * net.supnorm[e][0];
    const auto [rho, arg] = glaeser_ratio(net.derivative(e, 0), net.derivative(e, 1), M, floor);
    rep.M.push_back(M);
    rep.rho.push_back(rho);
    rep.floors.push_back(floor);
    rep.worst_x.push_back(net.grid.x(arg));
  }
  const bool positive_omega = std::all_of(net.omegas.begin(), net.omegas.end(), [](double w) { return w > 0.0; });
  if (net.size() >= 2 && positive_omega) {
    std::vector<double> inv(net.size());
    for (std::size_t e = 0; e < net.size(); ++e) inv[e] = 1.0 / net.omegas[e];
    try {
      rep.exponent = fit_loglog(inv, rep.M);
      rep.exponent_available = true;
    } catch (const FitError&) {
      rep.exponent_available = false;  // constant scale or mixed zero norms
    }
  }
  for (std::size_t e = 0; e < net.size(); ++e) {
    if (rep.rho[e] > 1.0 + tolerance) {
      rep.passed = false;
      if (!throw_on_violation) continue;
      char buf[160];
      std::snprintf(buf, sizeof buf, "Glaeser ratio %.12g > 1 + %g at eps = %g, x = %g", rep.rho[e], tolerance,
                    net.ladder[e], rep.worst_x[e]);
      throw GlaeserViolation(buf);
    }
  }
  return rep;
}

/// Least-squares slope of log ||d^alpha a_eps||_inf against log(1/omega).
inline LogLogFit supnorm_exponent_fit(const RegularizedNet& net, int alpha) {
  if (net.size() < 4) throw FitError("supnorm_exponent_fit: ladder needs at least 4 points");
  if (alpha < 0 || alpha > net.k_max) throw ConfigError("supnorm_exponent_fit: derivative order not stored");
  std::vector<double> inv(net.size()), y(net.size());
  for (std::size_t e = 0; e < net.size(); ++e) {
    if (!(net.omegas[e] > 0.0)) throw FitError("supnorm_exponent_fit: net has no scale");
    inv[e] = 1.0 / net.omegas[e];
    y[e] = net.supnorm[e][static_cast<std::size_t>(alpha)];
  }
  return fit_loglog(inv, y, 4);
}

}  // namespace vwave
