#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "vwave/coefficients.hpp"
#include "vwave/core.hpp"
#include "vwave/distribution.hpp"
#include "vwave/fft.hpp"
#include "vwave/fit.hpp"
#include "vwave/mollifier.hpp"
#include "vwave/scale.hpp"
#include "vwave/solver.hpp"

namespace vwave {

// ---------------------------------------------------------------------------
// Energy and Gronwall envelopes
// ---------------------------------------------------------------------------

struct EnergyTrace {
  std::vector<double> times;
  std::vector<double> energy;       // E = sum_i (a_i U_i, U_i) + ||U_{n+1}||^2
  std::vector<double> velocity_sq;  // ||U_{n+1}||^2
  double eps = 0.0;
};

/// Quadrature energy at every checkpoint. Asserts ||U_{n+1}||^2 <= E.
template <class Scalar>
EnergyTrace energy(const StateTrajectory<Scalar>& st, const std::vector<std::vector<double>>& coefficients,
                   double eps = 0.0) {
  const Grid& g = st.grid;
  if (coefficients.size() != static_cast<std::size_t>(g.dimension))
    throw ConfigError("energy: need one coefficient array per axis");
  for (const auto& a : coefficients)
    if (a.size() != g.total()) throw ConfigError("energy: coefficients and state live on different grids");
  EnergyTrace et;
  et.eps = eps;
  et.times = st.times;
  const double vol = g.cell_volume();
  for (const auto& comp : st.components) {
    if (comp.size() != static_cast<std::size_t>(g.dimension) + 1 || comp[0].size() != g.total())
      throw ConfigError("energy: state vector does not match the grid");
    double e = 0.0;
    for (int i = 0; i < g.dimension; ++i) {
      const auto& a = coefficients[static_cast<std::size_t>(i)];
      const auto& U = comp[static_cast<std::size_t>(i)];
      for (std::size_t p = 0; p < U.size(); ++p) e += a[p] * magnitude_sq(U[p]);
    }
    e *= vol;
    const double v = l2_norm_sq(std::span<const Scalar>(comp.back()), vol);
    e += v;
    if (v > e * (1.0 + 1e-12) + 1e-300) throw VerificationFailure("energy: ||U_{n+1}||^2 exceeds E");
    et.energy.push_back(e);
    et.velocity_sq.push_back(v);
  }
  return et;
}

/// Trapezoid antiderivative of samples y(t) on the given abscissae.
inline std::vector<double> cumulative_integral(const std::vector<double>& t, const std::vector<double>& y) {
  std::vector<double> out(t.size(), 0.0);
  for (std::size_t m = 1; m < t.size(); ++m) out[m] = out[m - 1] + 0.5 * (y[m] + y[m - 1]) * (t[m] - t[m - 1]);
  return out;
}

struct GronwallResult {
  bool passed = false;
  double c = 0.0;
  double tolerance = 0.05;
  double worst_ratio = 0.0;  // max over t_m > 0 of E(t_m) / bound(t_m)
  double worst_time = 0.0;
  double margin = 0.0;       // 1 + tol - worst_ratio
  std::vector<double> bound;
  // dE/dt - c E - ||f||^2 by centered differences, normalized by c E (diagnostic)
  double max_rate_excess = 0.0;

  nlohmann::json to_json() const {
    return {{"passed", passed},           {"c", c},                     {"tolerance", tolerance},
            {"worst_ratio", worst_ratio}, {"worst_time", worst_time},   {"margin", margin},
            {"max_rate_excess", max_rate_excess}};
  }
};

/// E(t_m) <= (E(0) + int_0^t_m ||f||^2) e^{c t_m} (1 + tol), c = max(2M, n + 1).
inline GronwallResult gronwall_check(const EnergyTrace& et, double M, int n, const std::vector<double>& f_norm_sq,
                                     double tolerance = 0.05, std::size_t min_checkpoints = 32) {
  const std::size_t K = et.times.size();
  if (K < min_checkpoints)
    throw ConfigError("gronwall_check: need at least " + std::to_string(min_checkpoints) + " checkpoints, got " +
                      std::to_string(K));
  if (!f_norm_sq.empty() && f_norm_sq.size() != K) throw ConfigError("gronwall_check: forcing trace length mismatch");
  const std::vector<double> f = f_norm_sq.empty() ? std::vector<double>(K, 0.0) : f_norm_sq;
  GronwallResult r;
  r.c = std::max(2.0 * M, static_cast<double>(n + 1));
  r.tolerance = tolerance;
  const auto F = cumulative_integral(et.times, f);
  r.bound.resize(K);
  for (std::size_t m = 0; m < K; ++m) {
    r.bound[m] = (et.energy[0] + F[m]) * std::exp(r.c * et.times[m]);
    if (m == 0) continue;  // equality by construction
    const double ratio = r.bound[m] > 0.0 ? et.energy[m] / r.bound[m] : (et.energy[m] > 0.0 ? 1e300 : 0.0);
    if (ratio > r.worst_ratio) {
      r.worst_ratio = ratio;
      r.worst_time = et.times[m];
    }
  }
  for (std::size_t m = 0; m < K; ++m) {
    const std::size_t a = m == 0 ? 0 : m - 1, b = m + 1 == K ? m : m + 1;
    const double dEdt = (et.energy[b] - et.energy[a]) / (et.times[b] - et.times[a]);
    const double scale = r.c * et.energy[m] + f[m];
    if (scale > 0.0) r.max_rate_excess = std::max(r.max_rate_excess, (dEdt - scale) / scale);
  }
  r.margin = 1.0 + tolerance - r.worst_ratio;
  r.passed = r.worst_ratio <= 1.0 + tolerance;
  return r;
}

struct IntegralGronwallResult {
  bool passed = false;
  double tolerance = 0.05;
  double worst_ratio = 0.0;  // max phi / envelope
  double worst_time = 0.0;
  double constant = 0.0;     // max_t envelope(t) / (phi(0) + int psi)
  std::vector<double> envelope;
};

/// Comparison solution of y' = C1 y + C2 z + psi(t), z' = y, y(0) = y0, z(0) = 0,
/// by RK4 with `substeps` steps per interval of `times`; psi is linear between
/// samples.
inline std::vector<double> comparison_solution(const std::vector<double>& times, const std::vector<double>& psi,
                                               double C1, double C2, double y0, int substeps = 32) {
  auto psi_at = [&](double t) {
    if (psi.empty()) return 0.0;
    auto it = std::upper_bound(times.begin(), times.end(), t);
    if (it == times.begin()) return psi.front();
    if (it == times.end()) return psi.back();
    const auto i = static_cast<std::size_t>(it - times.begin());
    const double w = (t - times[i - 1]) / (times[i] - times[i - 1]);
    return (1.0 - w) * psi[i - 1] + w * psi[i];
  };
  std::vector<double> out(times.size());
  double y = y0, z = 0.0;
  out[0] = y;
  for (std::size_t m = 1; m < times.size(); ++m) {
    const double h = (times[m] - times[m - 1]) / substeps;
    double t = times[m - 1];
    for (int s = 0; s < substeps; ++s) {
      auto fy = [&](double tt, double yy, double zz) { return C1 * yy + C2 * zz + psi_at(tt); };
      const double k1y = fy(t, y, z), k1z = y;
      const double k2y = fy(t + h / 2, y + h / 2 * k1y, z + h / 2 * k1z), k2z = y + h / 2 * k1y;
      const double k3y = fy(t + h / 2, y + h / 2 * k2y, z + h / 2 * k2z), k3z = y + h / 2 * k2y;
      const double k4y = fy(t + h, y + h * k3y, z + h * k3z), k4z = y + h * k3y;
      y += h / 6 * (k1y + 2 * k2y + 2 * k3y + k4y);
      z += h / 6 * (k1z + 2 * k2z + 2 * k3z + k4z);
      t += h;
    }
    out[m] = y;
  }
  return out;
}

/// If phi' <= C1 phi + C2 int_0^t phi + psi with C2 >= 0, phi stays below the
/// comparison solution started from phi(0); this checks that conclusion.
inline IntegralGronwallResult gronwall_integral_check(const std::vector<double>& times, const std::vector<double>& phi,
                                                      const std::vector<double>& psi, double C1, double C2,
                                                      double tolerance = 0.05) {
  if (times.size() != phi.size() || times.size() < 2) throw ConfigError("gronwall_integral_check: bad phi trace");
  if (!psi.empty() && psi.size() != times.size()) throw ConfigError("gronwall_integral_check: bad psi trace");
  if (C2 < 0.0) throw ConfigError("gronwall_integral_check: C2 must be >= 0");
  IntegralGronwallResult r;
  r.tolerance = tolerance;
  r.envelope = comparison_solution(times, psi, C1, C2, phi[0]);
  const auto Psi = psi.empty() ? std::vector<double>(times.size(), 0.0) : cumulative_integral(times, psi);
  for (std::size_t m = 0; m < times.size(); ++m) {
    const double env = r.envelope[m];
    const double ratio = env > 0.0 ? phi[m] / env : (phi[m] > 0.0 ? 1e300 : 0.0);
    if (ratio > r.worst_ratio) {
      r.worst_ratio = ratio;
      r.worst_time = times[m];
    }
    const double base = phi[0] + Psi[m];
    if (base > 0.0) r.constant = std::max(r.constant, env / base);
  }
  r.passed = r.worst_ratio <= 1.0 + tolerance;
  return r;
}

// ---------------------------------------------------------------------------
// Sobolev norms: ||u||^2_{H^k} = (h^n / N^n) sum_m (1 + |xi_m|^2)^k |U_m|^2,
// U the unnormalized DFT. With k = 0 this is exactly h^n sum |u|^2 (Parseval).
// ---------------------------------------------------------------------------

struct SobolevResult {
  std::vector<double> norms;  // k = 0 .. k_max, not squared
  bool aliasing_warning = false;
};

/// H^k norms of one grid function. The aliasing flag is raised when more than
/// 10% of the top-order norm comes from |xi| >= 3/4 of the largest resolved
/// frequency.
template <class Scalar>
SobolevResult sobolev_norms(const std::vector<Scalar>& u, const Grid& g, int k_max = 4) {
  if (u.size() != g.total()) throw ConfigError("sobolev_norms: grid mismatch");
  const std::size_t N = g.points;
  FftPlan plan(N, g.dimension == 2 ? N : 1);
  std::vector<cplx> buf(u.begin(), u.end());
  const auto U = plan.forward(buf);
  const double period = 2.0 * g.half_width;
  const double xi_max = pi * static_cast<double>(N) / period;
  const double scale = g.cell_volume() / static_cast<double>(g.total());
  SobolevResult r;
  r.norms.assign(static_cast<std::size_t>(k_max) + 1, 0.0);
  double top = 0.0;
  for (std::size_t q = 0; q < U.size(); ++q) {
    const std::size_t mx = q % N, my = q / N;
    const double x1 = dft_frequency(mx, N, period);
    const double x2 = g.dimension == 2 ? dft_frequency(my, N, period) : 0.0;
    const double xi2 = x1 * x1 + x2 * x2;
    const double w = std::norm(U[q]);
    double mult = 1.0;
    for (int k = 0; k <= k_max; ++k) {
      r.norms[static_cast<std::size_t>(k)] += mult * w;
      if (k == k_max && std::sqrt(xi2) >= 0.75 * xi_max) top += mult * w;
      mult *= 1.0 + xi2;
    }
  }
  const double total_top = r.norms.back();
  r.aliasing_warning = total_top > 0.0 && top > 0.1 * total_top;
  for (auto& v : r.norms) v = std::sqrt(v * scale);
  return r;
}

/// ||d_x^2 u||^2_{L2} spectrally (1D).
template <class Scalar>
double second_derivative_norm_sq(const std::vector<Scalar>& u, const Grid& g) {
  if (g.dimension != 1) throw UnsupportedError("second_derivative_norm_sq: 1D only");
  const std::size_t N = g.points;
  FftPlan plan(N);
  std::vector<cplx> buf(u.begin(), u.end());
  const auto U = plan.forward(buf);
  double s = 0.0;
  for (std::size_t m = 0; m < N; ++m) {
    const double xi = dft_frequency(m, N, 2.0 * g.half_width);
    s += xi * xi * xi * xi * std::norm(U[m]);
  }
  return s * g.cell_volume() / static_cast<double>(N);
}

struct SobolevTable {
  std::vector<double> times;
  std::vector<std::vector<double>> norms;  // [m][k]
  std::vector<bool> aliasing;
  bool any_aliasing() const { return std::find(aliasing.begin(), aliasing.end(), true) != aliasing.end(); }
  std::vector<double> sup_over_time() const {
    std::vector<double> s(norms.empty() ? 0 : norms[0].size(), 0.0);
    for (const auto& row : norms)
      for (std::size_t k = 0; k < row.size(); ++k) s[k] = std::max(s[k], row[k]);
    return s;
  }
};

template <class Scalar>
SobolevTable sobolev_norms(const SolveTrace<Scalar>& tr, int k_max = 4) {
  SobolevTable t;
  t.times = tr.times;
  for (const auto& u : tr.u) {
    auto r = sobolev_norms(u, tr.grid, k_max);
    t.norms.push_back(std::move(r.norms));
    t.aliasing.push_back(r.aliasing_warning);
  }
  return t;
}

// ---------------------------------------------------------------------------
// Moderateness
// ---------------------------------------------------------------------------

struct ModeratenessFit {
  std::vector<double> ladder;
  std::vector<double> norms;
  std::string norm_kind;
  LogLogFit fit;
  double cap = 0.0;
  double q = 0.0;
  std::string verdict;  // moderate | negligible-trend | exceeds-cap

  nlohmann::json to_json() const {
    return {{"ladder", ladder},       {"norms", norms},         {"norm_kind", norm_kind},
            {"slope", fit.slope},     {"intercept", fit.intercept}, {"residual", fit.residual},
            {"cap", cap},             {"q", q},                 {"verdict", verdict},
            {"identically_zero", fit.identically_zero}};
  }
};

/// Slope of log ||u_eps|| against log(1/eps). Verdict: negligible-trend when
/// q > 0 and slope <= -q, moderate when slope <= cap, exceeds-cap otherwise.
inline ModeratenessFit moderateness_fit(const std::vector<double>& ladder, const std::vector<double>& norms,
                                        const std::string& norm_kind = "L2", double cap = 10.0, double q = 0.0) {
  if (ladder.size() != norms.size()) throw FitError("moderateness_fit: ladder and norms differ in length");
  if (ladder.size() < 4) throw FitError("moderateness_fit: need at least 4 ladder points");
  for (std::size_t e = 0; e < norms.size(); ++e)
    if (!std::isfinite(norms[e])) throw FitError("moderateness_fit: non-finite norm at eps = " + std::to_string(ladder[e]));
  ModeratenessFit m;
  m.ladder = ladder;
  m.norms = norms;
  m.norm_kind = norm_kind;
  m.cap = cap;
  m.q = q;
  std::vector<double> inv(ladder.size());
  for (std::size_t e = 0; e < ladder.size(); ++e) inv[e] = 1.0 / ladder[e];
  m.fit = fit_loglog(inv, norms, 4);
  if (q > 0.0 && m.fit.slope <= -q)
    m.verdict = "negligible-trend";
  else if (m.fit.slope <= cap)
    m.verdict = "moderate";
  else
    m.verdict = "exceeds-cap";
  return m;
}

// ---------------------------------------------------------------------------
// Helpers shared by the ladder studies
// ---------------------------------------------------------------------------

/// Samples of d^order (data * psi_omega) on the solver grid (1D).
inline std::vector<cplx> mollify_data(const SmoothFunction& f, const Mollifier& kernel, double omega, const Grid& g,
                                      int order = 0) {
  return convolve(Distribution::smooth(f), kernel, omega, g.axis(), order);
}

inline std::vector<cplx> to_complex(const std::vector<double>& v) { return {v.begin(), v.end()}; }

inline std::vector<cplx> difference(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  std::vector<cplx> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return d;
}

/// Max over the coefficient sums of one net entry (for the CFL bound).
inline double max_coefficient(const RegularizedNet& net) { return std::max(net.max_value(), 0.0); }

/// Selects a checkpoint stride giving at least `min_checkpoints` checkpoints.
inline std::size_t stride_for(const Grid& g, std::size_t preferred = 16, std::size_t min_checkpoints = 32) {
  const std::size_t limit = std::max<std::size_t>(1, g.steps / min_checkpoints);
  return std::min(preferred, limit);
}

// ---------------------------------------------------------------------------
// Consistency with the classical solution
// ---------------------------------------------------------------------------

struct ConsistencyReport {
  std::vector<double> ladder;
  std::vector<double> omegas;
  std::vector<std::vector<double>> data_error;      // [e][k] ||g0_eps - g0||_{H^k}, k = 0..2
  std::vector<std::vector<double>> solution_error;  // [e][k] sup_t ||u_eps - u_ref||_{H^k}
  std::vector<double> floor;                        // [k] same quantity for the unmollified data
  bool no_oracle = false;  // reference is the exact-data solve, not a closed form
  bool monotone = false;   // L2 errors non-increasing down to the floor
  bool reaches_floor = false;
  double floor_slack = 0.05;
  LogLogFit data_order;  // ||g0_eps - g0||_{H^2} versus eps, above-roundoff points only
  std::size_t data_points_fitted = 0;

  nlohmann::json to_json() const {
    return {{"ladder", ladder},
            {"omega", omegas},
            {"data_error", data_error},
            {"solution_error", solution_error},
            {"floor", floor},
            {"no_oracle", no_oracle},
            {"monotone", monotone},
            {"reaches_floor", reaches_floor},
            {"data_order", data_order.slope},
            {"data_order_residual", data_order.residual},
            {"data_points_fitted", data_points_fitted}};
  }
};

struct ConsistencyInput {
  CoefficientField field = CoefficientField::constant(1.0);
  SmoothFunction g0 = data::bump(1.0, 0.0, 2.0, 1.0);
  SmoothFunction g1 = data::zero();
  Mollifier kernel = build_vanishing_moments(4, 1.0, 0.25);
  PositiveScale scale = PositiveScale::power(1.0);
  std::vector<double> ladder = geometric_ladder();
  double half_width = 10.0;
  std::size_t points = 2048;
  double horizon = 1.0;
  double theta = 0.5;
  std::size_t stride = 16;
  double floor_slack = 0.05;
};

/// Solves with psi-mollified data along the ladder and measures the distance
/// to the classical solution. Constant coefficients use d'Alembert's formula;
/// any other smooth field falls back to the exact-data solve on the same grid
/// (no_oracle = true). The floor is the exact-data solve measured against the
/// same reference.
inline ConsistencyReport consistency_test(const ConsistencyInput& in) {
  if (in.field.distributional() || in.field.kind() == CoefficientField::Kind::example1)
    throw ConfigError("consistency_test: needs a smooth coefficient field");
  ConsistencyReport rep;
  rep.ladder = in.ladder;
  rep.omegas = in.scale.evaluate(in.ladder);
  rep.floor_slack = in.floor_slack;
  const bool constant = in.field.kind() == CoefficientField::Kind::constant;
  rep.no_oracle = !constant;

  Grid1D ax{-in.half_width, 2.0 * in.half_width / static_cast<double>(in.points), in.points, true};
  const auto net = exact_net(in.field, ax);
  const double amax = max_coefficient(net);
  Grid g = make_grid(1, in.half_width, in.points, Boundary::periodic, in.horizon, in.theta, amax);
  const std::vector<std::vector<double>> coeffs{net.values(0)};

  SolveInput<cplx> base;
  base.grid = g;
  base.coefficients = coeffs;
  base.stride = in.stride;
  const auto g0 = sample(in.g0, ax), g1 = sample(in.g1, ax);
  base.g0 = g0;
  base.g1 = g1;
  const auto exact_trace = solve(base);

  std::vector<std::vector<cplx>> reference;
  if (constant) {
    const double c = in.field.constant_value();
    for (double t : exact_trace.times) {
      std::vector<cplx> u(in.points);
      for (std::size_t i = 0; i < in.points; ++i) u[i] = dalembert_oracle(c, in.g0, in.g1, t, ax.x(i));
      reference.push_back(std::move(u));
    }
  } else {
    reference = exact_trace.u;
  }

  auto sup_error = [&](const SolveTrace<cplx>& tr) {
    std::vector<double> worst(3, 0.0);
    for (std::size_t m = 0; m < tr.checkpoints(); ++m) {
      const auto r = sobolev_norms(difference(tr.u[m], reference[m]), g, 2);
      for (int k = 0; k <= 2; ++k) worst[static_cast<std::size_t>(k)] = std::max(worst[static_cast<std::size_t>(k)], r.norms[static_cast<std::size_t>(k)]);
    }
    return worst;
  };
  rep.floor = sup_error(exact_trace);

  for (std::size_t e = 0; e < in.ladder.size(); ++e) {
    SolveInput<cplx> s = base;
    s.g0 = mollify_data(in.g0, in.kernel, rep.omegas[e], g);
    s.g1 = mollify_data(in.g1, in.kernel, rep.omegas[e], g);
    rep.data_error.push_back(sobolev_norms(difference(s.g0, g0), g, 2).norms);
    rep.solution_error.push_back(sup_error(solve(s)));
  }

  // monotone down to the floor: each L2 error is below its predecessor or
  // already within the floor band
  const double band = rep.floor[0] * (1.0 + in.floor_slack);
  rep.monotone = true;
  for (std::size_t e = 1; e < rep.solution_error.size(); ++e) {
    const double prev = rep.solution_error[e - 1][0], cur = rep.solution_error[e][0];
    if (!(cur <= prev * (1.0 + 1e-9) || cur <= band)) rep.monotone = false;
  }
  rep.reaches_floor = rep.solution_error.back()[0] <= band;

  // data-error order; points at the roundoff floor carry no rate information
  const double g0_h2 = sobolev_norms(g0, g, 2).norms[2];
  std::vector<double> xs, ys;
  for (std::size_t e = 0; e < in.ladder.size(); ++e)
    if (rep.data_error[e][2] > 1e-9 * g0_h2) {
      xs.push_back(rep.omegas[e]);
      ys.push_back(rep.data_error[e][2]);
    }
  rep.data_points_fitted = xs.size();
  if (xs.size() >= 2) rep.data_order = fit_loglog(xs, ys);
  return rep;
}

// ---------------------------------------------------------------------------
// Mollifier sensitivity
// ---------------------------------------------------------------------------

struct SensitivityInput {
  CoefficientField field = CoefficientField::example1();
  Mollifier phi = build_bump(1.0, 1.0 / 256);
  Mollifier phi_tilde = build_bump(1.0, 1.0 / 256);
  Mollifier psi = build_vanishing_moments(4, 1.0, 0.25);
  PositiveScale coefficient_scale = PositiveScale::power(0.5);
  PositiveScale data_scale = PositiveScale::power(1.0);
  std::vector<double> ladder = geometric_ladder();
  SmoothFunction g0 = data::gaussian(1.0, -1.0, 0.5);
  SmoothFunction g1 = data::zero();
  double half_width = 6.0;
  std::size_t points = 4096;
  Boundary boundary = Boundary::zero_padded;
  double horizon = 1.0;
  double theta = 0.5;
  std::size_t stride = 16;
};

struct SensitivityReport {
  std::string phi_id, phi_tilde_id;
  std::vector<double> ladder;
  std::vector<double> omegas;
  std::vector<double> times;
  std::vector<std::vector<double>> difference;  // [e][m] ||u_eps - u~_eps||_{L2}(t_m)
  std::vector<double> sup_difference;           // [e]
  std::vector<double> lambda;                   // [e] sup_t ||d_x^2 u~_eps||^2_{L2}
  std::vector<double> envelope;                 // [e] omega^2 lambda
  std::vector<double> sup_norm_u, sup_norm_u_tilde;  // [e] sup_t ||u||_{L2}
  std::vector<double> M, M_tilde;                    // [e] Glaeser constants
  LogLogFit difference_fit;  // sup difference versus 1/eps
  LogLogFit ratio_fit;       // sup difference^2 / envelope versus 1/eps
  double envelope_constant = 0.0;  // max_e sup difference^2 / envelope
  std::string verdict;             // converging | non-converging | identical

  nlohmann::json to_json() const {
    nlohmann::json j{{"phi", phi_id},
                     {"phi_tilde", phi_tilde_id},
                     {"ladder", ladder},
                     {"omega", omegas},
                     {"sup_difference", sup_difference},
                     {"lambda", lambda},
                     {"envelope", envelope},
                     {"sup_norm_u", sup_norm_u},
                     {"sup_norm_u_tilde", sup_norm_u_tilde},
                     {"envelope_constant", envelope_constant},
                     {"verdict", verdict}};
    if (!difference_fit.identically_zero) {
      j["difference_slope"] = difference_fit.slope;
      j["difference_residual"] = difference_fit.residual;
      j["ratio_slope"] = ratio_fit.slope;
    }
    return j;
  }
};

/// Two solves per eps, with coefficients regularized by phi and by phi~, and
/// the same psi-mollified data.
inline SensitivityReport mollifier_sensitivity(const SensitivityInput& in) {
  if (in.field.distributional() && (!in.phi.is_nonnegative() || !in.phi_tilde.is_nonnegative()))
    throw ConfigError("mollifier_sensitivity: distributional field needs non-negative kernels");
  SensitivityReport rep;
  rep.phi_id = in.phi.id();
  rep.phi_tilde_id = in.phi_tilde.id();
  rep.ladder = in.ladder;
  rep.omegas = in.coefficient_scale.evaluate(in.ladder);
  Grid1D ax{-in.half_width, 2.0 * in.half_width / static_cast<double>(in.points), in.points,
            in.boundary == Boundary::periodic};
  const auto net = regularize(in.field, in.phi, in.coefficient_scale, in.ladder, ax);
  const auto net_t = regularize(in.field, in.phi_tilde, in.coefficient_scale, in.ladder, ax);
  const double amax = std::max(max_coefficient(net), max_coefficient(net_t));
  const Grid g = make_grid(1, in.half_width, in.points, in.boundary, in.horizon, in.theta, amax);
  const auto data_omegas = in.data_scale.evaluate(in.ladder);
  const double vol = g.cell_volume();

  for (std::size_t e = 0; e < in.ladder.size(); ++e) {
    SolveInput<cplx> s;
    s.grid = g;
    s.stride = in.stride;
    s.g0 = mollify_data(in.g0, in.psi, data_omegas[e], g);
    s.g1 = mollify_data(in.g1, in.psi, data_omegas[e], g);
    s.coefficients = {net.values(e)};
    const auto tr = solve(s);
    s.coefficients = {net_t.values(e)};
    const auto tr_t = solve(s);
    rep.times = tr.times;
    std::vector<double> diff;
    double sup_u = 0.0, sup_ut = 0.0, lam = 0.0;
    for (std::size_t m = 0; m < tr.checkpoints(); ++m) {
      diff.push_back(l2_norm(std::span<const cplx>(difference(tr.u[m], tr_t.u[m])), vol));
      sup_u = std::max(sup_u, l2_norm(std::span<const cplx>(tr.u[m]), vol));
      sup_ut = std::max(sup_ut, l2_norm(std::span<const cplx>(tr_t.u[m]), vol));
      lam = std::max(lam, second_derivative_norm_sq(tr_t.u[m], g));
    }
    rep.sup_difference.push_back(*std::max_element(diff.begin(), diff.end()));
    rep.difference.push_back(std::move(diff));
    rep.sup_norm_u.push_back(sup_u);
    rep.sup_norm_u_tilde.push_back(sup_ut);
    rep.lambda.push_back(lam);
    rep.envelope.push_back(rep.omegas[e] * rep.omegas[e] * lam);
    rep.M.push_back(net.supnorm[e][2]);
    rep.M_tilde.push_back(net_t.supnorm[e][2]);
  }
  std::vector<double> inv(in.ladder.size()), ratio(in.ladder.size());
  for (std::size_t e = 0; e < in.ladder.size(); ++e) {
    inv[e] = 1.0 / in.ladder[e];
    ratio[e] = rep.envelope[e] > 0.0 ? rep.sup_difference[e] * rep.sup_difference[e] / rep.envelope[e] : 0.0;
    rep.envelope_constant = std::max(rep.envelope_constant, ratio[e]);
  }
  rep.difference_fit = fit_loglog(inv, rep.sup_difference);
  if (rep.difference_fit.identically_zero) {
    rep.verdict = "identical";
    rep.ratio_fit.identically_zero = true;
  } else {
    rep.ratio_fit = fit_loglog(inv, ratio);
    rep.verdict = rep.difference_fit.slope < 0.0 ? "converging" : "non-converging";
  }
  return rep;
}

/// Data exponent N for the omega^2 = eps^{N+1} prescription: the smallest
/// integer >= the fitted slope of the data norms against 1/eps (0 for
/// bounded nets). `slack` absorbs fit noise.
inline int measured_data_exponent(const std::vector<double>& ladder, const std::vector<double>& norms,
                                  double slack = 0.25) {
  const auto fit = moderateness_fit(ladder, norms, "data");
  return std::max(0, static_cast<int>(std::ceil(fit.fit.slope - slack)));
}

// ---------------------------------------------------------------------------
// Scheme convergence against d'Alembert
// ---------------------------------------------------------------------------

struct OracleStudy {
  std::vector<std::size_t> points;
  std::vector<double> relative_l2_error;  // at T
  double observed_order = 0.0;
  double richardson_order = 0.0;  // from ||u(T)||_{L2} on the three finest grids
};

/// Constant-coefficient solves on successively doubled grids against
/// d'Alembert's formula at time T.
inline OracleStudy oracle_study(double c, const SmoothFunction& g0, const SmoothFunction& g1,
                                std::vector<std::size_t> points, double half_width = 10.0, double horizon = 1.0,
                                double theta = 0.5) {
  OracleStudy st;
  st.points = points;
  std::vector<double> functional;
  for (std::size_t N : points) {
    const Grid g = make_grid(1, half_width, N, Boundary::periodic, horizon, theta, c);
    const Grid1D ax = g.axis();
    SolveInput<double> in;
    in.grid = g;
    in.coefficients = {std::vector<double>(N, c)};
    in.g0.resize(N);
    in.g1.resize(N);
    for (std::size_t i = 0; i < N; ++i) {
      in.g0[i] = g0(ax.x(i));
      in.g1[i] = g1(ax.x(i));
    }
    in.stride = g.steps;
    const auto tr = solve(in);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double ex = dalembert_oracle(c, g0, g1, horizon, ax.x(i));
      num += (tr.u.back()[i] - ex) * (tr.u.back()[i] - ex);
      den += ex * ex;
    }
    st.relative_l2_error.push_back(std::sqrt(num / den));
    functional.push_back(l2_norm(std::span<const double>(tr.u.back()), g.cell_volume()));
  }
  st.observed_order = observed_order(st.relative_l2_error);
  const std::size_t n = functional.size();
  if (n >= 3) st.richardson_order = richardson_order(functional[n - 3], functional[n - 2], functional[n - 1]);
  return st;
}

}  // namespace vwave
