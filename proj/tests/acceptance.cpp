// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dense_oracle.hpp"
#include "vwave/vwave.hpp"

using namespace vwave;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a = 0.0, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

std::string config_path(const std::string& name) { return std::string(VWAVE_CONFIG_DIR) + "/" + name; }

// Runs shared between criteria, each executed once.
struct Runs {
  fs::path root;
  std::map<std::string, RunOutcome> done;

  const RunOutcome& get(const std::string& config) {
    auto it = done.find(config);
    if (it == done.end()) it = done.emplace(config, run(load_config(config_path(config)), root.string())).first;
    return it->second;
  }
};

json read_json_file(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 1. Q A_k - A_k^T Q == 0 entrywise, n = 1..5, levels 0..2
Verdict symmetriser() {
  std::size_t entries = 0;
  double worst = 0.0;
  for (int n = 1; n <= 5; ++n)
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      auto sys = build_system(n, random_coefficients(n, 32, seed * 100 + static_cast<std::uint64_t>(n)));
      for (int level = 0; level <= 2; ++level) {
        const auto rep = verify_symmetriser(sys, false);
        entries += rep.entries_checked;
        worst = std::max(worst, rep.residual);
        if (level < 2) sys = derive_system(sys);
      }
    }
  return {worst == 0.0 && entries > 0, fmt("max residual %g over %g entries", worst, static_cast<double>(entries))};
}

// 2. both energy identities against dense Eigen matrices, 100 trials, n = 1..3, grid 64
Verdict identities() {
  using vwave_test::dense_lower;
  using vwave_test::dense_principal;
  using vwave_test::rel;
  double worst = 0.0, worst_closed = 0.0;
  std::mt19937_64 rng(7);
  for (int n = 1; n <= 3; ++n) {
    auto sys = derive_system(build_system(n, random_coefficients(n, 64, 7)));
    for (int level = 1; level <= 2; ++level) {
      for (int trial = 0; trial < 100; ++trial) {
        const auto v = random_grid_vector(sys.size(), sys.points(), rng);
        for (int k = 0; k < n; ++k) {
          const double oracle = dense_principal(sys, k, v);
          worst = std::max(worst, rel(principal_energy_structured(sys, k, v), oracle));
          worst_closed = std::max(worst_closed, rel(principal_energy_term(sys, k, v), oracle));
        }
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) {
            const double oracle = dense_lower(sys, i, j, v);
            worst = std::max(worst, rel(lower_order_energy_structured(sys, i, j, v), oracle));
            worst_closed = std::max(worst_closed, rel(lower_order_energy_term(sys, i, j, v), oracle));
          }
      }
      if (level == 1) sys = derive_system(sys);
    }
  }
  return {worst <= 1e-10 && worst_closed <= 1e-10,
          fmt("max relative error: operators %.3g, closed form %.3g", worst, worst_closed)};
}

// 3. Glaeser ratio on the Heaviside and Example-1 nets, equality for x^2
Verdict glaeser() {
  const auto ladder = geometric_ladder(2, 9);
  const auto grid = symmetric_grid(4.0, 1.0 / 1024);
  const auto phi = build_bump(1.0, 1.0 / 64);
  const auto h = glaeser_check(regularize(CoefficientField::heaviside(), phi, PositiveScale::sqrtlog(), ladder, grid),
                               1e-6, 1e-14, false);
  const auto e1 = glaeser_check(regularize(CoefficientField::example1(), phi, PositiveScale::power(0.5), ladder, grid),
                                1e-6, 1e-14, false);
  const auto sq = CoefficientField::smooth(data::polynomial({0.0, 0.0, 1.0}), grid);
  const auto x2 = glaeser_check(exact_net(sq, symmetric_grid(2.0, 1.0 / 256)), 1e-6, 1e-14, false);
  const bool pass = h.max_rho() <= 1.0 + 1e-6 && e1.max_rho() <= 1.0 + 1e-6 && std::abs(x2.max_rho() - 1.0) <= 1e-8;
  return {pass, fmt("max rho: heaviside %.9f, example-1 %.9f, x^2 %.12f", h.max_rho(), e1.max_rho(), x2.max_rho())};
}

// 4. every run's Gronwall envelope, plus an injected violation that must be rejected
Verdict gronwall(Runs& runs) {
  std::size_t checked = 0, failed = 0;
  for (const char* c : {"heaviside.json", "heaviside_matched.json", "example1_sensitivity.json", "point_masses_2d.json"})
    for (const auto& ch : runs.get(c).checks)
      if (ch.name == "gronwall") {
        ++checked;
        if (!ch.passed) ++failed;
      }

  const double eps = 1.0 / 64;
  const std::size_t N = 1024;
  const Grid1D ax{-4.0, 8.0 / N, N, false};
  const auto net = regularize(CoefficientField::heaviside(), build_bump(1.0, 1.0 / 64), PositiveScale::sqrtlog(), {eps}, ax);
  SolveInput<double> in;
  in.grid = make_grid(1, 4.0, N, Boundary::zero_padded, 1.0, 0.5, max_coefficient(net));
  in.coefficients = {net.values(0)};
  const auto g0 = data::bump(1.0, 0.0, 1.0);
  for (std::size_t i = 0; i < N; ++i) in.g0.push_back(g0(ax.x(i)));
  in.g1.assign(N, 0.0);
  in.stride = stride_for(in.grid);
  auto et = energy(state_vector(solve(in)), in.coefficients, eps);
  const auto ok = gronwall_check(et, net.supnorm[0][2], 1, {});
  for (std::size_t m = 0; m < et.times.size(); ++m) et.energy[m] *= std::exp(1.5 * ok.c * et.times[m]);
  const auto bad = gronwall_check(et, net.supnorm[0][2], 1, {});

  const bool pass = checked > 0 && failed == 0 && ok.passed && !bad.passed;
  return {pass, fmt("%g runs checked, %g over the envelope; injected trace ratio %.3g (rejected: %g)",
                    static_cast<double>(checked), static_cast<double>(failed), bad.worst_ratio, !bad.passed)};
}

// 5. constant coefficient against d'Alembert
Verdict oracle() {
  const auto st = oracle_study(1.0, data::gaussian(), data::zero(), {256, 512, 1024, 2048});
  const double err = st.relative_l2_error.back();
  const bool pass = err <= 1e-3 && std::abs(st.observed_order - 2.0) <= 0.3;
  return {pass, fmt("relative L2 error %.3e at 2048 points, observed order %.3f", err, st.observed_order)};
}

// 6. Heaviside with omega^-2 = ln(1/eps): slope bound and kernel independence at equal sup|phi'|
Verdict moderateness(Runs& runs) {
  bool pass = true;
  std::string detail;
  auto slope_within_bound = [&](const RunOutcome& r) {
    std::vector<double> slopes;
    for (const auto& entry : fs::directory_iterator(r.dir)) {
      const auto name = entry.path().filename().string();
      if (name.rfind("moderateness_", 0) != 0 || entry.path().extension() != ".json") continue;
      const auto j = read_json_file(entry.path());
      const double slope = j["slope"], bound = 2.0 * j["horizon"].get<double>() * j["kernel_derivative_sup"].get<double>() + 0.5;
      pass = pass && slope <= bound;
      detail += j["kernel"].get<std::string>() + fmt(" slope %.4f (bound %.3f); ", slope, bound);
      slopes.push_back(slope);
    }
    return slopes;
  };
  const auto single = slope_within_bound(runs.get("heaviside.json"));
  const auto pair = slope_within_bound(runs.get("heaviside_matched.json"));
  pass = pass && single.size() == 1 && pair.size() == 2;
  if (pair.size() == 2) {
    const double gap = std::abs(pair[0] - pair[1]);
    pass = pass && gap <= 0.3;
    detail += fmt("matched pair gap %.4f", gap);
  }
  return {pass, detail};
}

// 7. consistency with the classical solution for psi-mollified data
Verdict consistency() {
  const auto rep = consistency_test(ConsistencyInput{});
  const bool pass = rep.monotone && rep.reaches_floor && rep.data_order.slope >= 4.0 && !rep.no_oracle;
  return {pass, fmt("monotone %g, reaches floor %g, data order %.3f over %g points", rep.monotone, rep.reaches_floor,
                    rep.data_order.slope, static_cast<double>(rep.data_points_fitted))};
}

// 8. Example-1 sensitivity with omega^2 = eps^{N+1}
Verdict sensitivity(Runs& runs) {
  const auto& r = runs.get("example1_sensitivity.json");
  const auto s = read_json_file(r.dir / "sensitivity.json");
  const auto sum = read_json_file(r.dir / "summary.json");
  const double diff_slope = s["difference_slope"], ratio_slope = s["ratio_slope"];
  // bounded by C omega^2 lambda: C fitted on the coarse half must cover the fine half
  const auto d = s["sup_difference"].get<std::vector<double>>();
  const auto env = s["envelope"].get<std::vector<double>>();
  const std::size_t half = d.size() / 2;
  double C = 0.0, fine = 0.0;
  for (std::size_t e = 0; e < d.size(); ++e) {
    double& slot = e < half ? C : fine;
    slot = std::max(slot, d[e] * d[e] / env[e]);
  }
  const bool pass = s["verdict"] == "converging" && diff_slope < 0.0 && ratio_slope <= 0.1 && fine <= 1.5 * C;
  return {pass, fmt("N = %g, difference slope %.4f, ratio slope %.4f, fine/coarse constant %.3f",
                    sum["data_exponent"].get<double>(), diff_slope, ratio_slope, C > 0.0 ? fine / C : 0.0)};
}

// 9. psi moments and the convergence order on a smooth compact function
Verdict vanishing_moments() {
  const auto psi = build_vanishing_moments(4, 1.0, 0.25);
  double worst_moment = 0.0;
  for (int k = 1; k <= 4; ++k) worst_moment = std::max(worst_moment, std::abs(psi.moment_table()[static_cast<std::size_t>(k)]));
  const auto f = data::bump(1.0, 0.0, 2.0, 1.0);
  const auto g = symmetric_grid(3.0, 1.0 / 64);
  const auto exact = sample(f, g);
  std::vector<double> omegas{0.25, 0.125, 0.0625, 0.03125}, err;
  for (double w : omegas) {
    const auto c = convolve(Distribution::smooth(f), psi, w, g, 0);
    double e = 0.0;
    for (std::size_t i = 0; i < g.points; ++i) e = std::max(e, std::abs(c[i] - exact[i]));
    err.push_back(e);
  }
  const double order = fit_loglog(omegas, err).slope;
  return {worst_moment <= 1e-8 && order >= 4.0, fmt("max |moment 1..4| %.3g, sup-error order %.3f", worst_moment, order)};
}

// 10. same config and seed twice: every CSV byte-identical
Verdict determinism(Runs& runs) {
  const auto c = load_config(config_path("heaviside.json"));
  const auto a = run(c, runs.root.string()), b = run(c, runs.root.string());
  std::size_t files = 0, differ = 0;
  for (const auto& entry : fs::recursive_directory_iterator(a.dir)) {
    if (entry.path().extension() != ".csv") continue;
    ++files;
    const auto other = b.dir / fs::relative(entry.path(), a.dir);
    if (!fs::exists(other) || slurp(entry.path()) != slurp(other)) ++differ;
  }
  return {files > 0 && differ == 0, fmt("%g csv files compared, %g differ", static_cast<double>(files), static_cast<double>(differ))};
}

}  // namespace

int main() {
  char tmpl[] = "/tmp/vwave-acceptance-XXXXXX";
  if (!mkdtemp(tmpl)) {
    std::perror("mkdtemp");
    return 2;
  }
  Runs runs{tmpl, {}};
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
      {"symmetriser exactness", symmetriser},
      {"energy identities vs dense", identities},
      {"Glaeser inequality", glaeser},
      {"Gronwall envelope", [&] { return gronwall(runs); }},
      {"d'Alembert oracle", oracle},
      {"moderateness, sqrtlog scale", [&] { return moderateness(runs); }},
      {"consistency", consistency},
      {"Example-1 sensitivity", [&] { return sensitivity(runs); }},
      {"vanishing moments", vanishing_moments},
      {"determinism", [&] { return determinism(runs); }},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    if (!v.pass) ++failures;
    std::printf("criterion %2zu %-4s %-30s %s\n", i + 1, v.pass ? "PASS" : "FAIL", criteria[i].first, v.detail.c_str());
    std::fflush(stdout);
  }
  std::error_code ec;
  fs::remove_all(runs.root, ec);
  return failures == 0 ? 0 : 1;
}
