#pragma once

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "vwave/analysis.hpp"
#include "vwave/coefficients.hpp"
#include "vwave/config.hpp"
#include "vwave/svg.hpp"
#include "vwave/system.hpp"

namespace vwave {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Plumbing
// ---------------------------------------------------------------------------

/// Runs fn(0..count-1) on at most `jobs` threads; the first exception (by
/// index) is rethrown after every task finished.
template <class Fn>
void parallel_for(std::size_t count, std::size_t jobs, Fn&& fn) {
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min(jobs, count);
  std::vector<std::exception_ptr> errors(count);
  if (jobs <= 1) {
    for (std::size_t i = 0; i < count; ++i) try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < jobs; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
      });
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

/// CLI flag, then config, then $VWAVE_OUTPUT_ROOT, then ./runs.
inline fs::path output_root(const ExperimentConfig& c, const std::string& override_root = "") {
  if (!override_root.empty()) return override_root;
  if (!c.output_root.empty()) return c.output_root;
  if (const char* env = std::getenv("VWAVE_OUTPUT_ROOT"); env && *env) return env;
  return "runs";
}

/// Creates <root>/<name>-<UTC timestamp>[-k]; never reuses an existing directory.
inline fs::path make_run_dir(const fs::path& root, const std::string& name) {
  fs::create_directories(root);
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y%m%dT%H%M%SZ", &tm);
  const std::string base = name + "-" + stamp;
  for (int k = 1; k < 10000; ++k) {
    const fs::path p = root / (k == 1 ? base : base + "-" + std::to_string(k));
    if (fs::create_directory(p)) return p;
  }
  throw Error("cannot create a fresh run directory under " + root.string());
}

inline void write_text(const fs::path& p, const std::string& s) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + p.string());
  out << s;
}

inline void write_json(const fs::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

/// CSV builder with round-trip formatting.
class Csv {
 public:
  explicit Csv(const std::vector<std::string>& header) {
    for (std::size_t i = 0; i < header.size(); ++i) s_ += (i ? "," : "") + header[i];
    s_ += '\n';
  }
  Csv& row(std::initializer_list<double> values) {
    bool first = true;
    for (double v : values) cell(v, first);
    s_ += '\n';
    return *this;
  }
  Csv& row(const std::vector<double>& values) {
    bool first = true;
    for (double v : values) cell(v, first);
    s_ += '\n';
    return *this;
  }
  const std::string& str() const { return s_; }

 private:
  void cell(double v, bool& first) {
    char buf[40];
    std::snprintf(buf, sizeof buf, first ? "%.17g" : ",%.17g", v);
    s_ += buf;
    first = false;
  }
  std::string s_;
};

inline std::string safe_id(std::string s) {
  for (char& c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.' || c == '_')) c = '_';
  return s;
}

// ---------------------------------------------------------------------------
// Run
// ---------------------------------------------------------------------------

struct Check {
  std::string name;
  std::string subject;
  bool passed = true;
  std::string detail;
  json to_json() const { return {{"name", name}, {"subject", subject}, {"passed", passed}, {"detail", detail}}; }
};

struct RunOutcome {
  fs::path dir;
  ExperimentConfig resolved;
  std::vector<Check> checks;
  json summary;
  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
  }
};

namespace detail {

/// Axis samples to full-grid samples: product over axes in 2D.
inline std::vector<cplx> tensor(const std::vector<cplx>& v, int dimension) {
  if (dimension == 1) return v;
  const std::size_t N = v.size();
  std::vector<cplx> out(N * N);
  for (std::size_t j = 0; j < N; ++j)
    for (std::size_t i = 0; i < N; ++i) out[i + N * j] = v[i] * v[j];
  return out;
}

/// Coefficient of axis `axis` (a function of x_axis only) on the full grid.
inline std::vector<double> broadcast(const std::vector<double>& a, int dimension, int axis) {
  if (dimension == 1) return a;
  const std::size_t N = a.size();
  std::vector<double> out(N * N);
  for (std::size_t p = 0; p < out.size(); ++p) out[p] = a[axis == 0 ? p % N : p / N];
  return out;
}

inline std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[200];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

struct MollifiedData {
  std::vector<std::vector<cplx>> g0, g1, f;  // [e] on the full grid
  std::vector<double> g0_h2;                 // ||g0_eps||_{H^2}
};

}  // namespace detail

/// Executes every solve and analysis of a validated config into `dir`
/// (created by the caller). Result verdicts are collected, not thrown;
/// compute errors propagate.
inline RunOutcome run_in(const ExperimentConfig& config, const fs::path& dir, bool verbose = false) {
  RunOutcome out;
  out.dir = dir;
  out.resolved = config;
  ExperimentConfig& c = out.resolved;
  const auto log = [&](const std::string& s) {
    if (verbose) std::fprintf(stderr, "[vwave] %s\n", s.c_str());
  };

  const Grid1D axis = c.grid.axis();
  const int dim = c.grid.dimension;
  const std::size_t E = c.ladder.size();
  json summary{{"name", c.name}, {"seed", c.seed}};

  // data nets
  const Mollifier psi = c.data_kernel.build();
  const auto data_omega = c.data_scale.build().evaluate(c.ladder);
  const SmoothFunction g0 = c.g0.build(), g1 = c.g1.build();
  const SmoothFunction fp = c.has_forcing ? c.forcing.profile.build() : data::zero();
  detail::MollifiedData md;
  md.g0.resize(E), md.g1.resize(E), md.f.resize(E), md.g0_h2.resize(E);
  Grid probe_grid{dim, c.grid.half_width, c.grid.points, c.grid.boundary, c.grid.horizon, c.grid.theta, 0.0, 0};
  log("mollifying data with " + psi.id());
  parallel_for(E, c.jobs, [&](std::size_t e) {
    const auto tensor_of = [&](const SmoothFunction& f, bool zero) {
      if (zero) return std::vector<cplx>(probe_grid.total(), cplx(0.0));
      return detail::tensor(convolve(Distribution::smooth(f), psi, data_omega[e], axis), dim);
    };
    md.g0[e] = tensor_of(g0, c.g0.is_zero());
    md.g1[e] = tensor_of(g1, c.g1.is_zero());
    if (c.has_forcing) md.f[e] = tensor_of(fp, c.forcing.profile.is_zero());
    md.g0_h2[e] = sobolev_norms(md.g0[e], probe_grid, 2).norms[2];
  });
  {
    Csv csv({"eps", "omega", "g0_H2"});
    for (std::size_t e = 0; e < E; ++e) csv.row({c.ladder[e], data_omega[e], md.g0_h2[e]});
    write_text(dir / "data_norms.csv", csv.str());
  }

  if (c.coefficient_scale.kind == "data_exponent") {
    const int N = measured_data_exponent(c.ladder, md.g0_h2);
    c.coefficient_scale = ScaleSpec{"power", 0.5 * (N + 1), 1.0, 1.0};
    summary["data_exponent"] = N;
    log("measured data exponent N = " + std::to_string(N));
  }
  const PositiveScale scale = c.coefficient_scale.build();
  std::vector<CoefficientField> fields;
  for (const auto& f : c.coefficients) fields.push_back(f.build(axis));

  json kernels_summary = json::array();
  for (std::size_t k = 0; k < c.coefficient_kernels.size(); ++k) {
    const Mollifier phi = c.coefficient_kernels[k].build();
    const std::string tag = "k" + std::to_string(k) + "_" + safe_id(phi.id());
    log("kernel " + tag + ", scale " + scale.id());
    std::vector<RegularizedNet> nets;
    for (const auto& f : fields) nets.push_back(regularize(f, phi, scale, c.ladder, axis, 2));
    json ks{{"tag", tag}, {"kernel", phi.id()}, {"scale", scale.id()}};

    if (c.write_nets)
      for (std::size_t a = 0; a < nets.size(); ++a)
        for (std::size_t e = 0; e < E; ++e) {
          std::ostringstream os;
          write_net_csv(nets[a], e, os);
          write_text(dir / "nets" / tag / ("net_axis" + std::to_string(a) + "_e" + std::to_string(e) + ".csv"),
                     os.str());
        }

    if (c.analyses.glaeser) {
      json reps = json::array();
      for (std::size_t a = 0; a < nets.size(); ++a) {
        const auto rep = glaeser_check(nets[a], c.analyses.glaeser_tolerance, 1e-14, false);
        reps.push_back(rep.to_json());
        out.checks.push_back({"glaeser", tag + "/axis" + std::to_string(a), rep.passed,
                              detail::fmt("max rho = %.9g", rep.max_rho())});
      }
      write_json(dir / ("glaeser_" + tag + ".json"), reps);
    }

    // one time step for the whole ladder
    double amax = 0.0;
    for (const auto& n : nets) amax += max_coefficient(n);
    const Grid grid = make_grid(dim, c.grid.half_width, c.grid.points, c.grid.boundary, c.grid.horizon, c.grid.theta,
                                amax);
    const std::size_t stride = c.grid.stride ? c.grid.stride : stride_for(grid);
    const double vol = grid.cell_volume();
    ks["grid"] = grid.to_json();
    ks["stride"] = stride;

    std::vector<SolveTrace<cplx>> traces(E);
    std::vector<std::vector<std::vector<double>>> coeffs(E);
    parallel_for(E, c.jobs, [&](std::size_t e) {
      SolveInput<cplx> in;
      in.grid = grid;
      in.stride = stride;
      for (int a = 0; a < dim; ++a)
        in.coefficients.push_back(detail::broadcast(nets[static_cast<std::size_t>(a)].values(e), dim, a));
      in.g0 = md.g0[e];
      in.g1 = md.g1[e];
      if (c.has_forcing) {
        in.forcing.profile = md.f[e];
        in.forcing.time = c.forcing.time_factor();
      }
      in.metadata = {{"eps", c.ladder[e]},       {"omega", nets[0].omegas[e]}, {"kernel", phi.id()},
                     {"data_kernel", psi.id()},  {"data_omega", data_omega[e]}, {"scale", scale.id()}};
      traces[e] = solve(in);
      coeffs[e] = std::move(in.coefficients);
      if (c.write_traces) {
        const std::size_t sp =
            c.grid.trace_points ? std::max<std::size_t>(1, c.grid.points / c.grid.trace_points) : c.grid.points;
        std::ostringstream os;
        write_trace_csv(traces[e], os, sp);
        const auto stem = trace_stem(c.ladder[e], safe_id(phi.id()));
        write_text(dir / "traces" / tag / (stem + ".csv"), os.str());
        write_json(dir / "traces" / tag / (stem + ".json"), trace_sidecar(traces[e]));
      }
    });
    log("solves done for " + tag);

    // energy and Gronwall
    if (c.analyses.energy) {
      Csv csv({"eps", "t", "E", "velocity_sq", "bound"});
      json gron = json::array();
      for (std::size_t e = 0; e < E; ++e) {
        const auto st = state_vector(traces[e]);
        const auto et = energy(st, coeffs[e], c.ladder[e]);
        double M = 0.0;
        for (const auto& n : nets) M += n.supnorm[e][2];
        std::vector<double> fn(et.times.size(), 0.0);
        if (c.has_forcing) {
          Forcing<cplx> f{md.f[e], c.forcing.time_factor()};
          for (std::size_t m = 0; m < fn.size(); ++m) fn[m] = f.norm_sq(et.times[m], vol);
        }
        GronwallResult gr;
        if (c.analyses.gronwall) {
          gr = gronwall_check(et, M, dim, fn, c.analyses.gronwall_tolerance);
          json gj = gr.to_json();
          gj["eps"] = c.ladder[e];
          gj["M"] = M;
          gron.push_back(gj);
          out.checks.push_back({"gronwall", tag + "/eps=" + detail::fmt("%g", c.ladder[e]), gr.passed,
                                detail::fmt("worst E/bound = %.6g at t = %.4g", gr.worst_ratio, gr.worst_time)});
        }
        for (std::size_t m = 0; m < et.times.size(); ++m)
          csv.row({c.ladder[e], et.times[m], et.energy[m], et.velocity_sq[m],
                   gr.bound.empty() ? std::nan("") : gr.bound[m]});
      }
      write_text(dir / ("energy_" + tag + ".csv"), csv.str());
      if (c.analyses.gronwall) write_json(dir / ("gronwall_" + tag + ".json"), gron);
    }

    // Sobolev norms, the estimate ratio and moderateness
    std::vector<double> sup_l2(E, 0.0);
    if (c.analyses.sobolev || c.analyses.moderateness) {
      std::vector<std::string> header{"eps", "t"};
      const int kmax = c.analyses.sobolev ? c.analyses.k_max : 0;
      for (int q = 0; q <= kmax; ++q) header.push_back("H" + std::to_string(q));
      header.push_back("aliasing");
      Csv csv(header);
      Csv est({"eps", "sup_ratio"});
      bool aliasing = false;
      for (std::size_t e = 0; e < E; ++e) {
        const auto tab = sobolev_norms(traces[e], std::max(kmax, 1));
        for (std::size_t m = 0; m < tab.times.size(); ++m) {
          std::vector<double> row{c.ladder[e], tab.times[m]};
          for (int q = 0; q <= kmax; ++q) row.push_back(tab.norms[m][static_cast<std::size_t>(q)]);
          row.push_back(tab.aliasing[m] ? 1.0 : 0.0);
          csv.row(row);
          sup_l2[e] = std::max(sup_l2[e], tab.norms[m][0]);
        }
        aliasing = aliasing || tab.any_aliasing();
        // ||u(t)||^2_{H^1} / (||g0||^2_{H^2} + ||g1||^2_{H^1} + int ||f||^2_{H^1})
        const double d0 = sobolev_norms(md.g0[e], grid, 2).norms[2], d1 = sobolev_norms(md.g1[e], grid, 1).norms[1];
        const double fh1 = c.has_forcing ? sobolev_norms(md.f[e], grid, 1).norms[1] : 0.0;
        const auto ft = c.forcing.time_factor();
        double worst = 0.0, integral = 0.0;
        for (std::size_t m = 0; m < tab.times.size(); ++m) {
          if (m > 0 && c.has_forcing) {
            const double s0 = ft(tab.times[m - 1]), s1 = ft(tab.times[m]);
            integral += 0.5 * (s0 * s0 + s1 * s1) * fh1 * fh1 * (tab.times[m] - tab.times[m - 1]);
          }
          const double den = d0 * d0 + d1 * d1 + integral;
          if (den > 0.0) worst = std::max(worst, tab.norms[m][1] * tab.norms[m][1] / den);
        }
        est.row({c.ladder[e], worst});
      }
      if (c.analyses.sobolev) {
        write_text(dir / ("sobolev_" + tag + ".csv"), csv.str());
        write_text(dir / ("estimate_" + tag + ".csv"), est.str());
        ks["aliasing_warning"] = aliasing;
      }
    }
    if (c.analyses.moderateness) {
      const auto mf = moderateness_fit(c.ladder, sup_l2, "sup_t L2", c.analyses.cap, c.analyses.q);
      json mj = mf.to_json();
      mj["kernel"] = phi.id();
      mj["scale"] = scale.id();
      mj["kernel_derivative_sup"] = phi.is_nonnegative() ? phi.derivative_sup(1) : std::nan("");
      mj["horizon"] = c.grid.horizon;
      write_json(dir / ("moderateness_" + tag + ".json"), mj);
      Csv csv({"eps", "sup_t_L2"});
      for (std::size_t e = 0; e < E; ++e) csv.row({c.ladder[e], sup_l2[e]});
      write_text(dir / ("moderateness_" + tag + ".csv"), csv.str());
      out.checks.push_back({"moderateness", tag, mf.verdict != "exceeds-cap",
                            mf.verdict + detail::fmt(", slope = %.6g, residual = %.3g", mf.fit.slope, mf.fit.residual)});
      ks["moderateness_slope"] = mf.fit.slope;
    }

    if (c.analyses.identities) {
      json reps = json::array();
      double worst = 0.0;
      for (std::size_t e = 0; e < E; ++e) {
        auto sys = derive_system(build_system(1, samples_from_net(nets[0], e)));
        for (int level = 1; level <= 2; ++level) {
          const auto rep = verify_energy_identities(sys, c.analyses.trials, c.seed + e, 1e-10, false);
          json j = rep.to_json();
          j["eps"] = c.ladder[e];
          reps.push_back(j);
          worst = std::max(worst, rep.max_error());
          if (level == 1) sys = derive_system(sys);
        }
      }
      write_json(dir / ("identities_" + tag + ".json"), reps);
      out.checks.push_back({"identities", tag, worst <= 1e-10, detail::fmt("max relative error = %.3g", worst)});
    }
    kernels_summary.push_back(ks);
  }
  summary["kernels"] = kernels_summary;

  if (c.analyses.consistency) {
    log("consistency");
    ConsistencyInput in;
    in.field = fields[0];
    in.g0 = g0;
    in.g1 = g1;
    in.kernel = psi;
    in.scale = c.data_scale.build();
    in.ladder = c.ladder;
    in.half_width = c.grid.half_width;
    in.points = c.grid.points;
    in.horizon = c.grid.horizon;
    in.theta = c.grid.theta;
    in.stride = c.grid.stride ? c.grid.stride : 16;
    in.floor_slack = c.analyses.floor_slack;
    const auto rep = consistency_test(in);
    write_json(dir / "consistency.json", rep.to_json());
    Csv csv({"eps", "omega", "data_L2", "data_H1", "data_H2", "sol_L2", "sol_H1", "sol_H2"});
    for (std::size_t e = 0; e < E; ++e) {
      std::vector<double> row{rep.ladder[e], rep.omegas[e]};
      row.insert(row.end(), rep.data_error[e].begin(), rep.data_error[e].end());
      row.insert(row.end(), rep.solution_error[e].begin(), rep.solution_error[e].end());
      csv.row(row);
    }
    write_text(dir / "consistency.csv", csv.str());
    out.checks.push_back({"consistency", psi.id(), rep.monotone && rep.reaches_floor,
                          detail::fmt("monotone = %g, reaches floor = %g, data order = %.4g", rep.monotone,
                                      rep.reaches_floor, rep.data_order.slope)});
  }

  if (c.analyses.sensitivity) {
    log("sensitivity");
    SensitivityInput in;
    in.field = fields[0];
    in.phi = c.coefficient_kernels[0].build();
    in.phi_tilde = c.coefficient_kernels[1].build();
    in.psi = psi;
    in.coefficient_scale = scale;
    in.data_scale = c.data_scale.build();
    in.ladder = c.ladder;
    in.g0 = g0;
    in.g1 = g1;
    in.half_width = c.grid.half_width;
    in.points = c.grid.points;
    in.boundary = c.grid.boundary;
    in.horizon = c.grid.horizon;
    in.theta = c.grid.theta;
    in.stride = c.grid.stride ? c.grid.stride : 16;
    const auto rep = mollifier_sensitivity(in);
    write_json(dir / "sensitivity.json", rep.to_json());
    Csv csv({"eps", "t", "difference_L2"});
    for (std::size_t e = 0; e < E; ++e)
      for (std::size_t m = 0; m < rep.times.size(); ++m) csv.row({rep.ladder[e], rep.times[m], rep.difference[e][m]});
    write_text(dir / "sensitivity.csv", csv.str());
    Csv env({"eps", "omega", "sup_difference", "lambda", "envelope"});
    for (std::size_t e = 0; e < E; ++e)
      env.row({rep.ladder[e], rep.omegas[e], rep.sup_difference[e], rep.lambda[e], rep.envelope[e]});
    write_text(dir / "sensitivity_envelope.csv", env.str());
    summary["sensitivity_verdict"] = rep.verdict;
  }

  json checks = json::array();
  for (const auto& ch : out.checks) checks.push_back(ch.to_json());
  summary["checks"] = checks;
  summary["status"] = out.passed() ? "passed" : "failed";
  summary["coefficient_scale"] = c.coefficient_scale.to_json();
  out.summary = summary;
  write_json(dir / "summary.json", summary);
  write_json(dir / "config.json", c.to_json());
  return out;
}

/// Fresh run directory under the output root, then run_in.
inline RunOutcome run(const ExperimentConfig& config, const std::string& override_root = "", bool verbose = false) {
  const fs::path dir = make_run_dir(output_root(config, override_root), config.name);
  return run_in(config, dir, verbose);
}

// ---------------------------------------------------------------------------
// Sweep: cartesian product of coefficient kernels x coefficient scales
// ---------------------------------------------------------------------------

struct SweepOutcome {
  fs::path dir;
  std::vector<RunOutcome> runs;
  bool passed() const {
    return std::all_of(runs.begin(), runs.end(), [](const RunOutcome& r) { return r.passed(); });
  }
};

inline SweepOutcome sweep(const ExperimentConfig& config, const std::string& override_root = "", bool verbose = false) {
  const auto kernels = config.sweep_kernels.empty() ? config.coefficient_kernels : config.sweep_kernels;
  const auto scales =
      config.sweep_scales.empty() ? std::vector<ScaleSpec>{config.coefficient_scale} : config.sweep_scales;
  SweepOutcome out;
  out.dir = make_run_dir(output_root(config, override_root), config.name + "-sweep");
  Csv csv({"kernel_index", "scale_index", "max_rho", "moderateness_slope", "worst_gronwall_ratio", "passed"});
  json index = json::array();
  for (std::size_t i = 0; i < kernels.size(); ++i)
    for (std::size_t j = 0; j < scales.size(); ++j) {
      ExperimentConfig sub = config;
      sub.coefficient_kernels = {kernels[i]};
      sub.coefficient_scale = scales[j];
      sub.sweep_kernels.clear();
      sub.sweep_scales.clear();
      sub.analyses.sensitivity = false;
      sub.analyses.consistency = false;
      const std::string name = "k" + std::to_string(i) + "-s" + std::to_string(j);
      fs::create_directories(out.dir / name);
      auto r = run_in(sub, out.dir / name, verbose);
      double rho = 0.0, ratio = 0.0;
      for (const auto& ch : r.checks) {
        if (ch.name == "glaeser") std::sscanf(ch.detail.c_str(), "max rho = %lf", &rho);
        if (ch.name == "gronwall") {
          double v = 0.0;
          std::sscanf(ch.detail.c_str(), "worst E/bound = %lf", &v);
          ratio = std::max(ratio, v);
        }
      }
      const auto& kj = r.summary["kernels"][0];
      const double slope = kj.contains("moderateness_slope") ? kj["moderateness_slope"].get<double>() : std::nan("");
      csv.row({static_cast<double>(i), static_cast<double>(j), rho, slope, ratio, r.passed() ? 1.0 : 0.0});
      index.push_back({{"dir", name}, {"kernel", kernels[i].to_json()}, {"scale", scales[j].to_json()},
                       {"passed", r.passed()}});
      out.runs.push_back(std::move(r));
    }
  write_text(out.dir / "sweep_summary.csv", csv.str());
  write_json(out.dir / "sweep.json", index);
  write_json(out.dir / "config.json", config.to_json());
  return out;
}

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

struct ReportOutcome {
  std::vector<fs::path> rendered;
  std::vector<std::string> warnings;
};

namespace detail {

inline std::vector<std::vector<double>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> r;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) r.push_back(std::strtod(cell.c_str(), nullptr));
    rows.push_back(std::move(r));
  }
  return rows;
}

inline json read_json(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

inline std::string stem_after(const fs::path& p, const std::string& prefix) {
  return p.stem().string().substr(prefix.size());
}

inline void render_dir(const fs::path& dir, ReportOutcome& out, std::string& md) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file()) files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  auto emit = [&](const fs::path& p, const svg::Plot& plot) {
    write_text(p, plot.render());
    out.rendered.push_back(p);
    md += "- ![" + p.stem().string() + "](" + fs::relative(p, dir).string() + ")\n";
  };

  for (const auto& f : files) {
    const std::string name = f.filename().string();
    try {
      if (name.rfind("moderateness_", 0) == 0 && f.extension() == ".json") {
        const auto j = read_json(f);
        svg::Plot p;
        p.title = "sup_t ||u_eps||_L2, " + j.value("kernel", "") + ", " + j.value("scale", "");
        p.xlabel = "1/eps";
        p.ylabel = "sup_t ||u_eps||";
        p.log_x = p.log_y = true;
        auto s = svg::named("norm");
        s.y = j["norms"].get<std::vector<double>>();
        for (double e : j["ladder"].get<std::vector<double>>()) s.x.push_back(1.0 / e);
        // fitted line
        auto fit = svg::named("fit", false, true);
        fit.x = s.x;
        for (double x : s.x) fit.y.push_back(std::exp(j["intercept"].get<double>()) * std::pow(x, j["slope"].get<double>()));
        p.series = {s, fit};
        p.notes.push_back(fmt("slope = %.4f (residual %.2g)", j["slope"].get<double>(), j["residual"].get<double>()));
        p.notes.push_back("verdict: " + j.value("verdict", std::string("?")));
        emit(dir / "plots" / (f.stem().string() + ".svg"), p);
      } else if (name.rfind("energy_", 0) == 0 && f.extension() == ".csv") {
        const auto rows = read_csv(f);
        std::map<double, std::pair<svg::Series, svg::Series>> by_eps;
        for (const auto& r : rows) {
          if (r.size() < 5) continue;
          auto& [E, B] = by_eps[r[0]];
          E.x.push_back(r[1]), E.y.push_back(r[2]);
          B.x.push_back(r[1]), B.y.push_back(r[4]);
        }
        if (by_eps.empty()) continue;
        svg::Plot p;
        p.title = "energy and Gronwall bound, " + stem_after(f, "energy_");
        p.xlabel = "t";
        p.ylabel = "E(t)";
        p.log_y = true;
        // largest and smallest eps keep the figure readable
        for (auto it : {by_eps.begin(), std::prev(by_eps.end())}) {
          auto [E, B] = it->second;
          E.label = fmt("E, eps=%g", it->first);
          E.markers = false;
          B.label = fmt("bound, eps=%g", it->first);
          B.markers = false;
          B.dashed = true;
          p.series.push_back(E);
          p.series.push_back(B);
          if (by_eps.size() == 1) break;
        }
        emit(dir / "plots" / (f.stem().string() + ".svg"), p);
      } else if (name == "sensitivity.json") {
        const auto j = read_json(f);
        svg::Plot p;
        p.title = "kernel sensitivity, " + j.value("phi", "") + " vs " + j.value("phi_tilde", "");
        p.xlabel = "1/eps";
        p.ylabel = "sup_t ||u_eps - u~_eps||";
        p.log_x = p.log_y = true;
        auto d = svg::named("difference"), env = svg::named("sqrt(omega^2 lambda)", false, true);
        const auto lad = j["ladder"].get<std::vector<double>>();
        const auto sd = j["sup_difference"].get<std::vector<double>>();
        const auto en = j["envelope"].get<std::vector<double>>();
        for (std::size_t e = 0; e < lad.size(); ++e) {
          d.x.push_back(1.0 / lad[e]), d.y.push_back(sd[e]);
          env.x.push_back(1.0 / lad[e]), env.y.push_back(std::sqrt(en[e]));
        }
        p.series = {d, env};
        if (j.contains("difference_slope")) p.notes.push_back(fmt("slope = %.4f", j["difference_slope"].get<double>()));
        p.notes.push_back("verdict: " + j.value("verdict", std::string("?")));
        emit(dir / "plots" / "sensitivity.svg", p);
      } else if (name == "consistency.csv") {
        const auto rows = read_csv(f);
        svg::Plot p;
        p.title = "consistency with the classical solution";
        p.xlabel = "1/eps";
        p.ylabel = "error";
        p.log_x = p.log_y = true;
        auto data = svg::named("data H2 error"), sol = svg::named("solution L2 error");
        for (const auto& r : rows) {
          if (r.size() < 8) continue;
          data.x.push_back(1.0 / r[0]), data.y.push_back(r[4]);
          sol.x.push_back(1.0 / r[0]), sol.y.push_back(r[5]);
        }
        p.series = {data, sol};
        emit(dir / "plots" / "consistency.svg", p);
      } else if (name.rfind("glaeser_", 0) == 0 && f.extension() == ".json") {
        const auto j = read_json(f);
        svg::Plot p;
        p.title = "Glaeser ratio, " + stem_after(f, "glaeser_");
        p.xlabel = "1/eps";
        p.ylabel = "max_x rho_eps";
        p.log_x = true;
        for (std::size_t a = 0; a < j.size(); ++a) {
          auto s = svg::named("axis " + std::to_string(a));
          const auto lad = j[a]["ladder"].get<std::vector<double>>();
          const auto rho = j[a]["rho"].get<std::vector<double>>();
          for (std::size_t e = 0; e < lad.size(); ++e) s.x.push_back(1.0 / lad[e]), s.y.push_back(rho[e]);
          p.series.push_back(s);
        }
        emit(dir / "plots" / (f.stem().string() + ".svg"), p);
      }
    } catch (const std::exception& e) {
      out.warnings.push_back(name + ": " + e.what());
    }
  }
}

}  // namespace detail

/// Renders SVG plots and summary.md for a run (or sweep) directory. Throws
/// Error when nothing renderable is found.
inline ReportOutcome report(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(dir.string() + ": not a directory");
  ReportOutcome out;
  std::vector<fs::path> runs;
  if (fs::exists(dir / "summary.json")) runs.push_back(dir);
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_directory() && fs::exists(entry.path() / "summary.json")) runs.push_back(entry.path());
  std::sort(runs.begin(), runs.end());
  if (runs.empty()) throw Error(dir.string() + ": no run reports found");
  for (const auto& r : runs) {
    std::string md = "# " + r.filename().string() + "\n\n";
    try {
      const auto s = detail::read_json(r / "summary.json");
      md += "Status: **" + s.value("status", std::string("?")) + "**\n\n";
      if (s.contains("data_exponent")) md += "Measured data exponent N = " + s["data_exponent"].dump() + "\n\n";
      if (s.contains("sensitivity_verdict"))
        md += "Sensitivity verdict: " + s["sensitivity_verdict"].get<std::string>() + "\n\n";
      md += "| check | subject | result | detail |\n|---|---|---|---|\n";
      for (const auto& ch : s["checks"])
        md += "| " + ch["name"].get<std::string>() + " | " + ch["subject"].get<std::string>() + " | " +
              (ch["passed"].get<bool>() ? "pass" : "FAIL") + " | " + ch["detail"].get<std::string>() + " |\n";
    } catch (const std::exception& e) {
      out.warnings.push_back((r / "summary.json").string() + ": " + e.what());
    }
    md += "\n## Plots\n\n";
    detail::render_dir(r, out, md);
    for (const auto& w : out.warnings) md += "\n> warning: " + w + "\n";
    write_text(r / "summary.md", md);
  }
  return out;
}

}  // namespace vwave
