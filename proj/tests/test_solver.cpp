#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <sstream>

#include "vwave/fit.hpp"
#include "vwave/solver.hpp"

using namespace vwave;
using Catch::Approx;

namespace {

SolveInput<double> constant_problem(double c, const SmoothFunction& g0, const SmoothFunction& g1, std::size_t N,
                                    double L = 10.0, double T = 1.0, Boundary b = Boundary::periodic) {
  SolveInput<double> in;
  in.grid = make_grid(1, L, N, b, T, 0.5, c);
  const auto ax = in.grid.axis();
  in.coefficients = {std::vector<double>(N, c)};
  in.g0.resize(N);
  in.g1.resize(N);
  for (std::size_t i = 0; i < N; ++i) {
    in.g0[i] = g0(ax.x(i));
    in.g1[i] = g1(ax.x(i));
  }
  return in;
}

double relative_error_vs_dalembert(const SolveTrace<double>& tr, double c, const SmoothFunction& g0,
                                   const SmoothFunction& g1) {
  const auto ax = tr.grid.axis();
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < ax.points; ++i) {
    const double ex = dalembert_oracle(c, g0, g1, tr.times.back(), ax.x(i));
    num += std::pow(tr.u.back()[i] - ex, 2);
    den += ex * ex;
  }
  return std::sqrt(num / den);
}

}  // namespace

TEST_CASE("grid and time step") {
  const auto g = make_grid(1, 2.0, 64, Boundary::periodic, 1.0, 0.5, 4.0);
  CHECK(g.spacing() == 1.0 / 16);
  CHECK(g.dt <= 0.5 * g.spacing() / 2.0 * (1 + 1e-12));
  CHECK(static_cast<double>(g.steps) * g.dt == Approx(1.0).epsilon(1e-14));
  const auto g0 = make_grid(1, 2.0, 64, Boundary::periodic, 1.0, 0.5, 0.0);
  CHECK(g0.dt <= 0.5 * g0.spacing());
  CHECK_THROWS_AS(make_grid(1, 2.0, 64, Boundary::periodic, 1.0, 0.6, 1.0), CflError);
  CHECK_THROWS_AS(make_grid(1, 2.0, 4, Boundary::periodic, 1.0, 0.5, 1.0), ConfigError);
  CHECK_THROWS_AS(make_grid(3, 2.0, 64, Boundary::periodic, 1.0, 0.5, 1.0), ConfigError);
}

TEST_CASE("constant coefficients reproduce d'Alembert with second-order convergence") {
  for (double c : {1.0, 2.0}) {
    std::vector<double> err;
    for (std::size_t N : {256u, 512u, 1024u}) {
      auto in = constant_problem(c, data::gaussian(), data::gaussian(0.5, 1.0, 0.7), N);
      in.stride = 1u << 20;
      err.push_back(relative_error_vs_dalembert(solve(in), c, data::gaussian(), data::gaussian(0.5, 1.0, 0.7)));
    }
    CHECK(err.back() < 1e-4);
    CHECK(observed_order(err) == Approx(2.0).margin(0.1));
  }
}

TEST_CASE("vanishing coefficient: u = g0 + t g1 and E = ||u_t||^2 is constant") {
  auto in = constant_problem(0.0, data::gaussian(), data::cosine(0.3, 0.5), 256, 5.0, 1.0, Boundary::zero_padded);
  in.stride = 4;
  const auto tr = solve(in);
  const auto ax = tr.grid.axis();
  for (std::size_t m = 0; m < tr.checkpoints(); ++m) {
    double ut2 = 0.0, g12 = 0.0;
    for (std::size_t i = 0; i < ax.points; ++i) {
      CHECK(tr.u[m][i] == Approx(in.g0[i] + tr.times[m] * in.g1[i]).margin(1e-12));
      ut2 += tr.ut[m][i] * tr.ut[m][i];
      g12 += in.g1[i] * in.g1[i];
    }
    CHECK(ut2 == Approx(g12).epsilon(1e-12));
  }
}

TEST_CASE("unit coefficient conserves the continuous energy up to discretization error") {
  auto in = constant_problem(1.0, data::gaussian(1.0, 0.0, 0.8), data::zero(), 1024);
  in.stride = 8;
  const auto tr = solve(in);
  const auto st = state_vector(tr);
  const double h = tr.grid.spacing();
  std::vector<double> E;
  for (std::size_t m = 0; m < st.times.size(); ++m) {
    double e = 0.0;
    for (std::size_t p = 0; p < tr.grid.points; ++p)
      e += st.components[m][0][p] * st.components[m][0][p] + st.components[m][1][p] * st.components[m][1][p];
    E.push_back(e * h);
  }
  // exact energy of the gaussian: int (g0')^2 = sqrt(pi/2) / w
  CHECK(E.front() == Approx(std::sqrt(pi / 2) / 0.8).epsilon(1e-6));
  for (double e : E) CHECK(e == Approx(E.front()).epsilon(1e-3));
}

TEST_CASE("periodic two-dimensional standing wave") {
  // u = cos x cos y cos(sqrt(2) t) solves u_tt = u_xx + u_yy on [-pi, pi)^2
  const std::size_t N = 128;
  SolveInput<double> in;
  in.grid = make_grid(2, pi, N, Boundary::periodic, 1.0, 0.5, 2.0);
  const auto ax = in.grid.axis();
  in.coefficients = {std::vector<double>(N * N, 1.0), std::vector<double>(N * N, 1.0)};
  in.g0.resize(N * N);
  in.g1.assign(N * N, 0.0);
  for (std::size_t j = 0; j < N; ++j)
    for (std::size_t i = 0; i < N; ++i) in.g0[i + N * j] = std::cos(ax.x(i)) * std::cos(ax.x(j));
  in.stride = 1u << 20;
  const auto tr = solve(in);
  double worst = 0.0;
  for (std::size_t j = 0; j < N; ++j)
    for (std::size_t i = 0; i < N; ++i)
      worst = std::max(worst, std::abs(tr.u.back()[i + N * j] -
                                       std::cos(ax.x(i)) * std::cos(ax.x(j)) * std::cos(std::sqrt(2.0))));
  CHECK(worst < 1e-3);
  // the discrete Laplacian symbol is 2(1 - cos h)/h^2, so the error is O(h^2)
  CHECK(worst > 1e-6);
}

TEST_CASE("complex scalar runs agree with real runs") {
  auto in = constant_problem(1.0, data::gaussian(), data::zero(), 128);
  in.stride = 16;
  const auto real = solve(in);
  SolveInput<cplx> cin;
  cin.grid = in.grid;
  cin.coefficients = in.coefficients;
  cin.stride = in.stride;
  for (std::size_t i = 0; i < in.g0.size(); ++i) {
    cin.g0.push_back(cplx(in.g0[i], 2.0 * in.g0[i]));
    cin.g1.push_back(0.0);
  }
  const auto cpx = solve(cin);
  REQUIRE(cpx.checkpoints() == real.checkpoints());
  for (std::size_t i = 0; i < in.g0.size(); ++i) {
    CHECK(cpx.u.back()[i].real() == real.u.back()[i]);
    CHECK(cpx.u.back()[i].imag() == Approx(2.0 * real.u.back()[i]).margin(1e-15));
  }
}

TEST_CASE("checkpoints follow the stride and always include t = 0 and t = T") {
  auto in = constant_problem(1.0, data::gaussian(), data::zero(), 64);
  in.stride = 7;
  const auto tr = solve(in);
  const std::size_t steps = tr.grid.steps;
  CHECK(tr.checkpoints() == 1 + steps / 7 + (steps % 7 ? 1 : 0));
  CHECK(tr.times.front() == 0.0);
  CHECK(tr.times.back() == 1.0);
  CHECK(tr.ut.size() == tr.checkpoints());
}

TEST_CASE("solver input errors") {
  auto in = constant_problem(1.0, data::gaussian(), data::zero(), 64);
  auto bad = in;
  bad.grid.dt *= 3.0;
  CHECK_THROWS_AS(solve(bad), CflError);
  bad = in;
  bad.coefficients[0][3] = -1.0;
  CHECK_THROWS_AS(solve(bad), ConfigError);
  bad = in;
  bad.g1.pop_back();
  CHECK_THROWS_AS(solve(bad), ConfigError);
  bad = in;
  bad.stride = 0;
  CHECK_THROWS_AS(solve(bad), ConfigError);
  bad = in;
  bad.coefficients.push_back(bad.coefficients[0]);
  CHECK_THROWS_AS(solve(bad), ConfigError);
}

TEST_CASE("overflow is reported as divergence with the step number") {
  auto in = constant_problem(1.0, data::gaussian(), data::zero(), 64);
  for (std::size_t i = 0; i < in.g0.size(); i += 2) in.g0[i] = std::numeric_limits<double>::max() / 4;
  try {
    solve(in);
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.step() >= 1);
    CHECK(std::string(e.what()).find("step") != std::string::npos);
  }
}

TEST_CASE("state vector from velocities and from time differences agree") {
  auto in = constant_problem(1.0, data::gaussian(), data::zero(), 512);
  in.stride = 1;
  auto tr = solve(in);
  const auto with = state_vector(tr);
  tr.ut.clear();
  const auto without = state_vector(tr);
  const std::size_t m = tr.checkpoints() / 2;
  double worst = 0.0, scale = 0.0;
  for (std::size_t p = 0; p < tr.grid.points; ++p) {
    worst = std::max(worst, std::abs(with.components[m][1][p] - without.components[m][1][p]));
    scale = std::max(scale, std::abs(with.components[m][1][p]));
  }
  CHECK(worst < 1e-3 * scale);
  CHECK_THROWS_AS(state_vector(tr, 1e-9), ResolutionError);
  // gradient of the initial gaussian
  const auto ax = tr.grid.axis();
  for (std::size_t p = 0; p < ax.points; p += 37)
    CHECK(with.components[0][0][p] == Approx(data::gaussian().derivative(ax.x(p), 1)).margin(1e-6));
}

TEST_CASE("trace csv and sidecar") {
  auto in = constant_problem(1.0, data::gaussian(), data::zero(), 64);
  in.stride = 1u << 20;
  in.metadata = {{"eps", 0.25}};
  const auto tr = solve(in);
  std::ostringstream full, thin;
  write_trace_csv(tr, full);
  write_trace_csv(tr, thin, 4);
  const auto lines = [](const std::string& s) { return std::count(s.begin(), s.end(), '\n'); };
  CHECK(full.str().rfind("t,x,re,im\n", 0) == 0);
  CHECK(lines(full.str()) == 1 + 2 * 64);
  CHECK(lines(thin.str()) == 1 + 2 * 16);
  const auto j = trace_sidecar(tr);
  CHECK(j["eps"] == 0.25);
  CHECK(j["checkpoints"] == 2);
  CHECK(j["complex"] == false);
  CHECK(trace_stem(0.0625, "bump-R1-b1") == "trace_eps0.0625_bump-R1-b1");
}

TEST_CASE("d'Alembert oracle") {
  const auto g0 = data::gaussian(), g1 = data::cosine();
  CHECK(dalembert_oracle(0.0, g0, g1, 0.5, 0.3) == Approx(g0(0.3) + 0.5 * g1(0.3)));
  CHECK(dalembert_oracle(4.0, g0, data::zero(), 0.5, 0.0) == Approx(0.5 * (g0(-1.0) + g0(1.0))));
  // velocity against a time difference of the oracle
  const double h = 1e-5;
  const double fd = (dalembert_oracle(2.0, g0, g1, 0.7 + h, 0.2) - dalembert_oracle(2.0, g0, g1, 0.7 - h, 0.2)) / (2 * h);
  CHECK(dalembert_velocity(2.0, g0, g1, 0.7, 0.2) == Approx(fd).epsilon(1e-7));
  CHECK_THROWS_AS(dalembert_oracle(-1.0, g0, g1, 0.5, 0.0), ConfigError);
}
