// vwave: run, sweep, verify and report weakly hyperbolic wave experiments.
//
// Exit codes: 0 ok, 1 compute or verification failure, 2 configuration error.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "vwave/vwave.hpp"

namespace {

using namespace vwave;

int print_checks(const RunOutcome& r) {
  for (const auto& c : r.checks)
    std::printf("%-13s %-40s %s  %s\n", c.name.c_str(), c.subject.c_str(), c.passed ? "pass" : "FAIL",
                c.detail.c_str());
  std::printf("run directory: %s\n", r.dir.string().c_str());
  return r.passed() ? 0 : 1;
}

int verify_symmetriser(int n, std::uint64_t seed, std::size_t points) {
  std::printf("%-3s %-6s %-8s %-10s %s\n", "n", "level", "size", "entries", "residual");
  bool ok = true;
  for (int level = 0; level <= 2; ++level) {
    auto sys = build_system(n, random_coefficients(n, points, seed));
    for (int l = 0; l < level; ++l) sys = derive_system(sys);
    const auto rep = verify_symmetriser(sys, false);
    std::printf("%-3d %-6d %-8zu %-10zu %.3g\n", n, level, sys.size(), rep.entries_checked, rep.residual);
    ok = ok && rep.residual == 0.0;
  }
  return ok ? 0 : 1;
}

int verify_identities(int n, std::size_t trials, std::uint64_t seed, std::size_t points, double tol) {
  std::printf("%-3s %-6s %-8s %-14s %-14s\n", "n", "level", "trials", "principal", "lower_order");
  bool ok = true;
  auto sys = derive_system(build_system(n, random_coefficients(n, points, seed)));
  for (int level = 1; level <= 2; ++level) {
    const auto rep = verify_energy_identities(sys, trials, seed, tol, false);
    std::printf("%-3d %-6d %-8zu %-14.3e %-14.3e\n", n, level, trials, rep.max_error("principal"),
                rep.max_error("lower_order"));
    ok = ok && rep.max_error() <= tol;
    if (level == 1) sys = derive_system(sys);
  }
  return ok ? 0 : 1;
}

int verify_oracle(std::size_t points, double tol) {
  std::vector<std::size_t> grids{points / 8, points / 4, points / 2, points};
  const auto st = oracle_study(1.0, data::gaussian(), data::zero(), grids);
  std::printf("%-8s %s\n", "points", "relative L2 error at T=1");
  for (std::size_t i = 0; i < grids.size(); ++i) std::printf("%-8zu %.4e\n", grids[i], st.relative_l2_error[i]);
  std::printf("observed order %.4f, Richardson order %.4f\n", st.observed_order, st.richardson_order);
  const bool ok = st.relative_l2_error.back() <= tol && std::abs(st.observed_order - 2.0) <= 0.3;
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vwave: regularized wave equations on an eps-ladder"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "progress on stderr");

  std::string config_path, output_root;
  std::size_t jobs = 0;
  auto* run = app.add_subcommand("run", "run one experiment config");
  run->add_option("config", config_path, "JSON config")->required();
  run->add_option("--output-root", output_root, "overrides output.root and $VWAVE_OUTPUT_ROOT");
  run->add_option("--jobs", jobs, "worker threads (0: hardware concurrency)");

  auto* sw = app.add_subcommand("sweep", "run a config over kernels x scales");
  sw->add_option("config", config_path, "JSON config")->required();
  sw->add_option("--output-root", output_root, "overrides output.root and $VWAVE_OUTPUT_ROOT");
  sw->add_option("--jobs", jobs, "worker threads (0: hardware concurrency)");

  std::string run_dir;
  auto* rep = app.add_subcommand("report", "render plots and summary.md for a run directory");
  rep->add_option("dir", run_dir, "run directory")->required();

  auto* ver = app.add_subcommand("verify", "structural and oracle checks");
  ver->require_subcommand(1);
  int n = 2;
  std::uint64_t seed = 7;
  std::size_t trials = 100, points = 64, oracle_points = 2048;
  double tol = 1e-10, oracle_tol = 1e-3;
  auto* vs = ver->add_subcommand("symmetriser", "Q A_k - A_k^T Q residual for the lifted systems");
  vs->add_option("--n", n, "space dimension")->check(CLI::Range(1, 8));
  vs->add_option("--seed", seed);
  vs->add_option("--points", points);
  auto* vi = ver->add_subcommand("identities", "energy identities against dense matrices");
  vi->add_option("--n", n, "space dimension")->check(CLI::Range(1, 5));
  vi->add_option("--trials", trials);
  vi->add_option("--seed", seed);
  vi->add_option("--points", points);
  vi->add_option("--tol", tol);
  auto* vo = ver->add_subcommand("oracle", "constant coefficients against d'Alembert");
  vo->add_option("--points", oracle_points, "finest grid")->check(CLI::Range(64, 1 << 20));
  vo->add_option("--tol", oracle_tol);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run) {
      auto c = load_config(config_path);
      if (jobs) c.jobs = jobs;
      return print_checks(vwave::run(c, output_root, verbose));
    }
    if (*sw) {
      auto c = load_config(config_path);
      if (jobs) c.jobs = jobs;
      const auto out = sweep(c, output_root, verbose);
      for (const auto& r : out.runs) print_checks(r);
      std::printf("sweep directory: %s\n", out.dir.string().c_str());
      return out.passed() ? 0 : 1;
    }
    if (*rep) {
      const auto out = report(run_dir);
      for (const auto& w : out.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
      for (const auto& p : out.rendered) std::printf("%s\n", p.string().c_str());
      if (out.rendered.empty()) {
        std::fprintf(stderr, "error: nothing to render in %s\n", run_dir.c_str());
        return 1;
      }
      return 0;
    }
    if (*vs) return verify_symmetriser(n, seed, points);
    if (*vi) return verify_identities(n, trials, seed, points, tol);
    if (*vo) return verify_oracle(oracle_points, oracle_tol);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const CflError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
