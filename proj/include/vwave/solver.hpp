#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "vwave/core.hpp"
#include "vwave/distribution.hpp"

namespace vwave {

enum class Boundary { periodic, zero_padded };

inline const char* to_string(Boundary b) { return b == Boundary::periodic ? "periodic" : "zero-padded"; }

/// Tensor grid on [-L, L)^n with N points per axis, x_i = -L + i h, h = 2L/N,
/// plus the time discretization.
struct Grid {
  int dimension = 1;
  double half_width = 1.0;  // L
  std::size_t points = 0;   // per axis
  Boundary boundary = Boundary::periodic;
  double horizon = 1.0;  // T
  double theta = 0.5;    // CFL factor
  double dt = 0.0;
  std::size_t steps = 0;

  double spacing() const noexcept { return 2.0 * half_width / static_cast<double>(points); }
  std::size_t total() const noexcept { return dimension == 1 ? points : points * points; }
  double cell_volume() const noexcept { return std::pow(spacing(), dimension); }
  Grid1D axis() const { return Grid1D{-half_width, spacing(), points, boundary == Boundary::periodic}; }

  nlohmann::json to_json() const {
    return {{"dimension", dimension}, {"half_width", half_width}, {"points", points},   {"boundary", to_string(boundary)},
            {"horizon", horizon},     {"theta", theta},           {"dt", dt},           {"steps", steps},
            {"spacing", spacing()}};
  }
};

/// Largest admissible time step for a coefficient sum bounded by `max_speed_sq`.
inline double cfl_limit(double spacing, double max_speed_sq, double theta) {
  return max_speed_sq > 0.0 ? theta * spacing / std::sqrt(max_speed_sq) : theta * spacing;
}

/// Fixes dt = theta h / sqrt(max sum a) (theta h when the coefficients vanish),
/// rounded down so that an integer number of steps lands exactly on T.
inline Grid make_grid(int dimension, double half_width, std::size_t points, Boundary boundary, double horizon,
                      double theta, double max_speed_sq) {
  if (dimension != 1 && dimension != 2) throw ConfigError("grid: dimension must be 1 or 2");
  if (points < 8) throw ConfigError("grid: need at least 8 points per axis");
  if (!(half_width > 0.0) || !(horizon > 0.0)) throw ConfigError("grid: half width and horizon must be > 0");
  if (!(theta > 0.0)) throw ConfigError("grid: CFL factor must be > 0");
  if (theta > 0.5) throw CflError("grid: CFL factor " + std::to_string(theta) + " exceeds the 0.5 stability margin");
  Grid g{dimension, half_width, points, boundary, horizon, theta, 0.0, 0};
  const double limit = cfl_limit(g.spacing(), max_speed_sq, theta);
  g.steps = static_cast<std::size_t>(std::ceil(horizon / limit - 1e-12));
  g.dt = horizon / static_cast<double>(g.steps);
  return g;
}

/// f(t, x) = time(t) * profile(x).
template <class Scalar>
struct Forcing {
  std::vector<Scalar> profile;
  std::function<double(double)> time;

  bool empty() const noexcept { return profile.empty(); }
  double amplitude(double t) const { return time ? time(t) : 1.0; }
  /// ||f(t)||^2_{L2}
  double norm_sq(double t, double cell_volume) const {
    if (empty()) return 0.0;
    const double s = amplitude(t);
    return s * s * l2_norm_sq(std::span<const Scalar>(profile), cell_volume);
  }
};

template <class Scalar>
struct SolveInput {
  Grid grid;
  std::vector<std::vector<double>> coefficients;  // a_i on the full grid, one array per axis
  std::vector<Scalar> g0, g1;
  Forcing<Scalar> forcing;
  std::size_t stride = 16;
  nlohmann::json metadata = nlohmann::json::object();
};

template <class Scalar>
struct SolveTrace {
  Grid grid;
  std::size_t stride = 16;
  std::vector<double> times;
  std::vector<std::vector<Scalar>> u;
  std::vector<std::vector<Scalar>> ut;  // empty for synthetic traces
  nlohmann::json metadata = nlohmann::json::object();

  std::size_t checkpoints() const noexcept { return times.size(); }
};

namespace detail {

template <class Scalar>
inline Scalar at(const std::vector<Scalar>& u, long long i, long long j, long long n, bool periodic) {
  if (periodic) {
    i = ((i % n) + n) % n;
    j = ((j % n) + n) % n;
  } else if (i < 0 || i >= n || j < 0 || j >= n) {
    return Scalar{};
  }
  return u[static_cast<std::size_t>(i + n * j)];
}

/// out = sum_i a_i D2_i u with the 3-point second difference.
template <class Scalar>
void apply_operator(const Grid& g, const std::vector<std::vector<double>>& a, const std::vector<Scalar>& u,
                    std::vector<Scalar>& out) {
  const auto n = static_cast<long long>(g.points);
  const bool per = g.boundary == Boundary::periodic;
  const double inv_h2 = 1.0 / (g.spacing() * g.spacing());
  const long long ny = g.dimension == 2 ? n : 1;
  for (long long j = 0; j < ny; ++j)
    for (long long i = 0; i < n; ++i) {
      const auto p = static_cast<std::size_t>(i + n * j);
      const Scalar c = u[p];
      Scalar acc = a[0][p] * (at(u, i - 1, j, n, per) - 2.0 * c + at(u, i + 1, j, n, per));
      if (g.dimension == 2) acc += a[1][p] * (at(u, i, j - 1, n, per) - 2.0 * c + at(u, i, j + 1, n, per));
      out[p] = acc * inv_h2;
    }
}

}  // namespace detail

/// Explicit leapfrog for d_t^2 u = sum a_i D2_i u + f, seeded by the Taylor step
/// u^1 = u^0 + dt g1 + dt^2/2 (L u^0 + f(0)). Checkpoints every `stride` steps
/// and at the final step; u_t at a checkpoint is (u^{m+1} - u^{m-1}) / (2 dt)
/// (exactly g1 at t = 0).
template <class Scalar>
SolveTrace<Scalar> solve(const SolveInput<Scalar>& in) {
  const Grid& g = in.grid;
  const std::size_t total = g.total();
  if (in.coefficients.size() != static_cast<std::size_t>(g.dimension))
    throw ConfigError("solve: need one coefficient array per axis");
  double max_sum = 0.0;
  for (std::size_t p = 0; p < total; ++p) {
    double s = 0.0;
    for (const auto& a : in.coefficients) {
      if (a.size() != total) throw ConfigError("solve: coefficient array does not match the grid");
      if (a[p] < -1e-12) throw ConfigError("solve: negative coefficient sample");
      s += a[p];
    }
    max_sum = std::max(max_sum, s);
  }
  if (in.g0.size() != total || in.g1.size() != total) throw ConfigError("solve: initial data does not match the grid");
  if (!in.forcing.empty() && in.forcing.profile.size() != total) throw ConfigError("solve: forcing does not match the grid");
  if (in.stride == 0) throw ConfigError("solve: checkpoint stride must be >= 1");
  if (g.steps == 0 || !(g.dt > 0.0)) throw ConfigError("solve: grid has no time step");
  if (g.dt > cfl_limit(g.spacing(), max_sum, 0.5) * (1.0 + 1e-12))
    throw CflError("solve: dt = " + std::to_string(g.dt) + " violates the CFL bound");

  SolveTrace<Scalar> tr;
  tr.grid = g;
  tr.stride = in.stride;
  tr.metadata = in.metadata;

  const double dt = g.dt, dt2 = dt * dt;
  std::vector<Scalar> prev = in.g0, cur(total), next(total), lap(total);
  auto force = [&](double t, std::size_t p) -> Scalar {
    return in.forcing.empty() ? Scalar{} : Scalar(in.forcing.amplitude(t)) * in.forcing.profile[p];
  };

  detail::apply_operator(g, in.coefficients, prev, lap);
  for (std::size_t p = 0; p < total; ++p) cur[p] = prev[p] + dt * in.g1[p] + 0.5 * dt2 * (lap[p] + force(0.0, p));
  tr.times.push_back(0.0);
  tr.u.push_back(in.g0);
  tr.ut.push_back(in.g1);

  // invariant: prev = u^{m-1}, cur = u^m
  for (std::size_t m = 1; m <= g.steps; ++m) {
    const double tm = static_cast<double>(m) * dt;
    detail::apply_operator(g, in.coefficients, cur, lap);
    bool finite = true;
    for (std::size_t p = 0; p < total; ++p) {
      next[p] = 2.0 * cur[p] - prev[p] + dt2 * (lap[p] + force(tm, p));
      finite = finite && is_finite(next[p]);
    }
    if (!finite) throw DivergenceError("solve: non-finite value", m + 1);
    if (m % in.stride == 0 || m == g.steps) {
      std::vector<Scalar> velocity(total);
      for (std::size_t p = 0; p < total; ++p) velocity[p] = (next[p] - prev[p]) / (2.0 * dt);
      tr.times.push_back(m == g.steps ? g.horizon : tm);
      tr.u.push_back(cur);
      tr.ut.push_back(std::move(velocity));
    }
    std::swap(prev, cur);
    std::swap(cur, next);
  }
  return tr;
}

/// Closed form for constant speed^2 c:
///   1/2 (g0(x - sqrt(c) t) + g0(x + sqrt(c) t)) + 1/(2 sqrt(c)) int g1 over [x - sqrt(c) t, x + sqrt(c) t]
/// and g0(x) + t g1(x) when c = 0. G1 is an antiderivative of g1.
inline double dalembert_oracle(double c, const std::function<double(double)>& g0, const std::function<double(double)>& g1,
                               const std::function<double(double)>& G1, double t, double x) {
  if (!(c >= 0.0)) throw ConfigError("dalembert_oracle: speed^2 must be >= 0");
  if (c == 0.0) return g0(x) + t * g1(x);
  const double s = std::sqrt(c);
  return 0.5 * (g0(x - s * t) + g0(x + s * t)) + (G1(x + s * t) - G1(x - s * t)) / (2.0 * s);
}

inline double dalembert_oracle(double c, const SmoothFunction& g0, const SmoothFunction& g1, double t, double x) {
  if (c > 0.0 && !g1.antiderivative) throw ConfigError("dalembert_oracle: g1 has no closed-form antiderivative");
  return dalembert_oracle(
      c, [&](double y) { return g0(y); }, [&](double y) { return g1(y); }, g1.antiderivative, t, x);
}

/// Time derivative of d'Alembert's solution, for comparisons of d_t u.
inline double dalembert_velocity(double c, const SmoothFunction& g0, const SmoothFunction& g1, double t, double x) {
  if (c == 0.0) return g1(x);
  const double s = std::sqrt(c);
  return 0.5 * s * (g0.derivative(x + s * t, 1) - g0.derivative(x - s * t, 1)) + 0.5 * (g1(x + s * t) + g1(x - s * t));
}

// ---------------------------------------------------------------------------
// State vector U = (d_1 u, ..., d_n u, d_t u)
// ---------------------------------------------------------------------------

template <class Scalar>
struct StateTrajectory {
  Grid grid;
  std::vector<double> times;
  // components[m][c][p]
  std::vector<std::vector<std::vector<Scalar>>> components;
};

/// 4th-order central first difference along `axis` (0 or 1).
template <class Scalar>
std::vector<Scalar> gradient(const Grid& g, const std::vector<Scalar>& u, int axis) {
  const auto n = static_cast<long long>(g.points);
  const bool per = g.boundary == Boundary::periodic;
  const double inv = 1.0 / (12.0 * g.spacing());
  const long long ny = g.dimension == 2 ? n : 1;
  std::vector<Scalar> out(u.size());
  for (long long j = 0; j < ny; ++j)
    for (long long i = 0; i < n; ++i) {
      const long long di = axis == 0 ? 1 : 0, dj = axis == 1 ? 1 : 0;
      auto v = [&](long long s) { return detail::at(u, i + s * di, j + s * dj, n, per); };
      out[static_cast<std::size_t>(i + n * j)] = (v(-2) - 8.0 * v(-1) + 8.0 * v(1) - v(2)) * inv;
    }
  return out;
}

/// Gradients by 4th-order differences; d_t u from the stored velocities, or,
/// for traces without them, by centered differences of the checkpoints
/// (one-sided second order at the ends). `max_gap` bounds the checkpoint
/// spacing accepted for that fallback.
template <class Scalar>
StateTrajectory<Scalar> state_vector(const SolveTrace<Scalar>& tr,
                                     double max_gap = std::numeric_limits<double>::infinity()) {
  StateTrajectory<Scalar> st;
  st.grid = tr.grid;
  st.times = tr.times;
  const std::size_t M = tr.checkpoints();
  const bool have_ut = tr.ut.size() == M;
  if (!have_ut) {
    if (M < 3) throw ResolutionError("state_vector: need at least 3 checkpoints to difference in time");
    for (std::size_t m = 0; m + 1 < M; ++m)
      if (tr.times[m + 1] - tr.times[m] > max_gap)
        throw ResolutionError("state_vector: checkpoint spacing too coarse for the time derivative");
  }
  st.components.resize(M);
  for (std::size_t m = 0; m < M; ++m) {
    auto& comp = st.components[m];
    for (int axis = 0; axis < tr.grid.dimension; ++axis) comp.push_back(gradient(tr.grid, tr.u[m], axis));
    if (have_ut) {
      comp.push_back(tr.ut[m]);
      continue;
    }
    std::vector<Scalar> v(tr.u[m].size());
    for (std::size_t p = 0; p < v.size(); ++p) {
      if (m == 0) {
        const double h0 = tr.times[1] - tr.times[0];
        v[p] = (-3.0 * tr.u[0][p] + 4.0 * tr.u[1][p] - tr.u[2][p]) / (2.0 * h0);
      } else if (m == M - 1) {
        const double h1 = tr.times[M - 1] - tr.times[M - 2];
        v[p] = (3.0 * tr.u[M - 1][p] - 4.0 * tr.u[M - 2][p] + tr.u[M - 3][p]) / (2.0 * h1);
      } else {
        v[p] = (tr.u[m + 1][p] - tr.u[m - 1][p]) / (tr.times[m + 1] - tr.times[m - 1]);
      }
    }
    comp.push_back(std::move(v));
  }
  return st;
}

// ---------------------------------------------------------------------------
// Persistence: CSV (t, x[, y], re, im) plus a JSON sidecar
// ---------------------------------------------------------------------------

/// One row per checkpoint and grid node; `spatial_stride` > 1 keeps every
/// k-th node along each axis.
template <class Scalar>
void write_trace_csv(const SolveTrace<Scalar>& tr, std::ostream& os, std::size_t spatial_stride = 1) {
  const Grid1D ax = tr.grid.axis();
  const std::size_t k = std::max<std::size_t>(spatial_stride, 1);
  os << (tr.grid.dimension == 1 ? "t,x,re,im\n" : "t,x,y,re,im\n");
  char buf[160];
  for (std::size_t m = 0; m < tr.checkpoints(); ++m)
    for (std::size_t p = 0; p < tr.u[m].size(); ++p) {
      const std::size_t ix = p % ax.points, iy = p / ax.points;
      if (ix % k != 0 || iy % k != 0) continue;
      const cplx v(tr.u[m][p]);
      if (tr.grid.dimension == 1)
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", tr.times[m], ax.x(p), v.real(), v.imag());
      else
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", tr.times[m], ax.x(ix), ax.x(iy), v.real(),
                      v.imag());
      os << buf;
    }
}

template <class Scalar>
nlohmann::json trace_sidecar(const SolveTrace<Scalar>& tr) {
  nlohmann::json j = tr.metadata;
  j["grid"] = tr.grid.to_json();
  j["stride"] = tr.stride;
  j["checkpoints"] = tr.checkpoints();
  j["complex"] = std::is_same_v<Scalar, cplx>;
  return j;
}

/// File stem embedding eps and kernel id, e.g. trace_eps0.0625_bump-R1-b1.
inline std::string trace_stem(double eps, const std::string& kernel_id) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "trace_eps%.6g_", eps);
  return buf + kernel_id;
}

}  // namespace vwave
