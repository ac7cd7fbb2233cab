#pragma once

#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "vwave/coefficients.hpp"
#include "vwave/core.hpp"
#include "vwave/distribution.hpp"
#include "vwave/mollifier.hpp"
#include "vwave/scale.hpp"
#include "vwave/solver.hpp"

namespace vwave {

using json = nlohmann::json;

namespace cfg {

/// JSON object view that remembers where it sits in the document, so every
/// error names the offending field, and rejects keys nobody asked about.
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("expected an object");
  }

  const std::string& path() const { return path_; }
  bool has(const std::string& key) const { return j_.contains(key); }

  [[noreturn]] void fail(const std::string& msg) const { throw ConfigError(path_ + ": " + msg); }
  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    throw ConfigError(child_path(key) + ": " + msg);
  }

  std::string child_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  Node object(const std::string& key) const {
    seen_.insert(key);
    if (!has(key)) fail(key, "missing");
    return Node(j_.at(key), child_path(key));
  }
  Node object_or_empty(const std::string& key) const {
    seen_.insert(key);
    static const json empty = json::object();
    return Node(has(key) ? j_.at(key) : empty, child_path(key));
  }
  const json& raw(const std::string& key) const {
    seen_.insert(key);
    if (!has(key)) fail(key, "missing");
    return j_.at(key);
  }

  double number(const std::string& key) const {
    const json& v = raw(key);
    if (!v.is_number()) fail(key, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(key, "must be finite");
    return d;
  }
  double number(const std::string& key, double fallback) const { return has(key) ? number(key) : mark(key, fallback); }
  double positive(const std::string& key, double fallback) const {
    const double d = number(key, fallback);
    if (!(d > 0.0)) fail(key, "must be > 0");
    return d;
  }
  long long integer(const std::string& key, long long fallback) const {
    if (!has(key)) return mark(key, fallback);
    const json& v = raw(key);
    if (!v.is_number_integer()) fail(key, "expected an integer");
    return v.get<long long>();
  }
  bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return mark(key, fallback);
    const json& v = raw(key);
    if (!v.is_boolean()) fail(key, "expected true or false");
    return v.get<bool>();
  }
  std::string string(const std::string& key) const {
    const json& v = raw(key);
    if (!v.is_string()) fail(key, "expected a string");
    return v.get<std::string>();
  }
  std::string string(const std::string& key, const std::string& fallback) const {
    return has(key) ? string(key) : mark(key, fallback);
  }
  std::vector<double> numbers(const std::string& key) const {
    const json& v = raw(key);
    if (!v.is_array()) fail(key, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) fail(key, "element " + std::to_string(i) + " is not a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  /// Every key present must have been read.
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) fail(it.key(), "unknown field");
  }

 private:
  template <class T>
  T mark(const std::string& key, T v) const {
    seen_.insert(key);
    return v;
  }

  const json& j_;
  std::string path_;
  mutable std::set<std::string> seen_;
};

}  // namespace cfg

/// Closed-form data profile: zero, gaussian, bump, cosine, polynomial.
struct FunctionSpec {
  std::string kind = "zero";
  double amplitude = 1.0, center = 0.0, width = 1.0, radius = 1.0, sharpness = 1.0, wavenumber = 1.0, phase = 0.0;
  std::vector<double> coefficients;

  static FunctionSpec parse(const cfg::Node& n) {
    FunctionSpec s;
    s.kind = n.string("kind");
    if (s.kind == "zero") {
    } else if (s.kind == "gaussian") {
      s.amplitude = n.number("amplitude", 1.0);
      s.center = n.number("center", 0.0);
      s.width = n.positive("width", 1.0);
    } else if (s.kind == "bump") {
      s.amplitude = n.number("amplitude", 1.0);
      s.center = n.number("center", 0.0);
      s.radius = n.positive("radius", 1.0);
      s.sharpness = n.positive("sharpness", 1.0);
    } else if (s.kind == "cosine") {
      s.amplitude = n.number("amplitude", 1.0);
      s.wavenumber = n.number("wavenumber", 1.0);
      s.phase = n.number("phase", 0.0);
    } else if (s.kind == "polynomial") {
      s.coefficients = n.numbers("coefficients");
    } else {
      n.fail("kind", "unknown function kind '" + s.kind + "'");
    }
    n.finish();
    return s;
  }

  json to_json() const {
    if (kind == "zero") return {{"kind", kind}};
    if (kind == "gaussian") return {{"kind", kind}, {"amplitude", amplitude}, {"center", center}, {"width", width}};
    if (kind == "bump")
      return {{"kind", kind}, {"amplitude", amplitude}, {"center", center}, {"radius", radius}, {"sharpness", sharpness}};
    if (kind == "cosine") return {{"kind", kind}, {"amplitude", amplitude}, {"wavenumber", wavenumber}, {"phase", phase}};
    return {{"kind", kind}, {"coefficients", coefficients}};
  }

  SmoothFunction build() const {
    if (kind == "gaussian") return data::gaussian(amplitude, center, width);
    if (kind == "bump") return data::bump(amplitude, center, radius, sharpness);
    if (kind == "cosine") return data::cosine(amplitude, wavenumber, phase);
    if (kind == "polynomial") return data::polynomial(coefficients);
    return data::zero();
  }

  bool is_zero() const { return kind == "zero"; }
};

/// f(t, x) = time(t) profile(x); time is "constant" or "cosine" (cos(frequency t)).
struct ForcingSpec {
  FunctionSpec profile;
  std::string time = "constant";
  double frequency = 1.0;

  static ForcingSpec parse(const cfg::Node& n) {
    ForcingSpec s;
    s.time = n.string("time", "constant");
    if (s.time != "constant" && s.time != "cosine") n.fail("time", "expected 'constant' or 'cosine'");
    s.frequency = n.number("frequency", 1.0);
    s.profile = FunctionSpec::parse(n.object("profile"));
    n.finish();
    return s;
  }
  json to_json() const { return {{"profile", profile.to_json()}, {"time", time}, {"frequency", frequency}}; }
  std::function<double(double)> time_factor() const {
    if (time == "cosine") return [w = frequency](double t) { return std::cos(w * t); };
    return [](double) { return 1.0; };
  }
};

/// Coefficient field descriptor.
struct FieldSpec {
  std::string kind = "constant";
  double value = 1.0, location = 0.0, jump = 1.0, plateau = 1.0, support = 2.0;
  std::vector<double> locations, weights;
  FunctionSpec function;

  static FieldSpec parse(const cfg::Node& n) {
    FieldSpec s;
    s.kind = n.string("kind");
    if (s.kind == "constant") {
      s.value = n.number("value", 1.0);
      if (s.value < 0.0) n.fail("value", "coefficients must be >= 0");
    } else if (s.kind == "heaviside") {
      s.location = n.number("location", 0.0);
      s.jump = n.number("jump", 1.0);
      if (s.jump < 0.0) n.fail("jump", "a negative jump makes the coefficient negative");
    } else if (s.kind == "example1") {
      s.plateau = n.positive("plateau", 1.0);
      s.support = n.positive("support", 2.0);
      if (s.support <= s.plateau) n.fail("support", "must exceed the plateau");
    } else if (s.kind == "point_masses") {
      s.locations = n.numbers("locations");
      s.weights = n.numbers("weights");
      if (s.locations.size() != s.weights.size() || s.locations.empty())
        n.fail("weights", "need one weight per location");
      for (double w : s.weights)
        if (w < 0.0) n.fail("weights", "weights must be >= 0");
    } else if (s.kind == "smooth") {
      s.function = FunctionSpec::parse(n.object("function"));
    } else {
      n.fail("kind", "unknown coefficient kind '" + s.kind + "'");
    }
    n.finish();
    return s;
  }

  json to_json() const {
    if (kind == "constant") return {{"kind", kind}, {"value", value}};
    if (kind == "heaviside") return {{"kind", kind}, {"location", location}, {"jump", jump}};
    if (kind == "example1") return {{"kind", kind}, {"plateau", plateau}, {"support", support}};
    if (kind == "point_masses") return {{"kind", kind}, {"locations", locations}, {"weights", weights}};
    return {{"kind", kind}, {"function", function.to_json()}};
  }

  bool distributional() const { return kind == "heaviside" || kind == "point_masses"; }
  bool smooth() const { return kind == "constant" || kind == "smooth"; }

  CoefficientField build(const Grid1D& probe) const {
    if (kind == "constant") return CoefficientField::constant(value);
    if (kind == "heaviside") return CoefficientField::heaviside(location, jump);
    if (kind == "example1") return CoefficientField::example1(plateau, support);
    if (kind == "point_masses") return CoefficientField::point_mass_sum(locations, weights);
    return CoefficientField::smooth(function.build(), probe);
  }
};

/// Mollifier descriptor: bump, bump_matching (sup|phi'| prescribed) or
/// vanishing_moments.
struct KernelSpec {
  std::string kind = "bump";
  double radius = 1.0, sharpness = 1.0, center = 0.0, spacing = 0.0;
  double target = 1.0, center_fraction = 0.0;
  int p_max = 4;
  double width = 1.0, left_width = 0.0, right_width = 0.0, cutoff_sharpness = 8.0;

  static KernelSpec parse(const cfg::Node& n) {
    KernelSpec s;
    s.kind = n.string("kind");
    if (s.kind == "bump") {
      s.radius = n.positive("radius", 1.0);
      s.sharpness = n.positive("sharpness", 1.0);
      s.center = n.number("center", 0.0);
      if (std::abs(s.center) >= s.radius) n.fail("center", "must lie inside (-radius, radius)");
      s.spacing = n.positive("spacing", s.radius / 64.0);
    } else if (s.kind == "bump_matching") {
      s.target = n.positive("derivative_sup", 1.0);
      s.sharpness = n.positive("sharpness", 1.0);
      s.center_fraction = n.number("center_fraction", 0.0);
      if (std::abs(s.center_fraction) >= 1.0) n.fail("center_fraction", "must lie in (-1, 1)");
      s.spacing = n.positive("spacing_per_radius", 1.0 / 64.0);
    } else if (s.kind == "vanishing_moments") {
      const long long p = n.integer("p_max", 4);
      if (p < 1 || p > 12) n.fail("p_max", "must lie in 1..12");
      s.p_max = static_cast<int>(p);
      s.width = n.positive("width", 1.0);
      s.left_width = n.positive("left_width", 4.0 * s.width);
      s.right_width = n.positive("right_width", 4.0 * s.width);
      s.cutoff_sharpness = n.positive("sharpness", 8.0);
      s.spacing = n.positive("spacing", 0.25);
    } else {
      n.fail("kind", "unknown kernel kind '" + s.kind + "'");
    }
    n.finish();
    return s;
  }

  json to_json() const {
    if (kind == "bump")
      return {{"kind", kind}, {"radius", radius}, {"sharpness", sharpness}, {"center", center}, {"spacing", spacing}};
    if (kind == "bump_matching")
      return {{"kind", kind},
              {"derivative_sup", target},
              {"sharpness", sharpness},
              {"center_fraction", center_fraction},
              {"spacing_per_radius", spacing}};
    return {{"kind", kind},          {"p_max", p_max},     {"width", width},     {"left_width", left_width},
            {"right_width", right_width}, {"sharpness", cutoff_sharpness}, {"spacing", spacing}};
  }

  bool nonnegative() const { return kind != "vanishing_moments"; }

  Mollifier build() const {
    if (kind == "bump") return build_bump(radius, spacing, sharpness, center);
    if (kind == "bump_matching") return build_bump_matching_derivative(target, sharpness, spacing, center_fraction);
    Mollifier::CutoffParams shape;
    shape.plateau = width;
    shape.left_width = left_width;
    shape.right_width = right_width;
    shape.sharpness = cutoff_sharpness;
    return build_vanishing_moments(p_max, width, spacing, &shape);
  }
};

/// power | loglog | sqrtlog | constant | data_exponent. The last one picks
/// omega = eps^{(N+1)/2} from the measured growth exponent N of the data net
/// and is rewritten as a power scale in the resolved config.
struct ScaleSpec {
  std::string kind = "power";
  double exponent = 1.0, coefficient = 1.0, value = 1.0;

  static ScaleSpec parse(const cfg::Node& n) {
    ScaleSpec s;
    s.kind = n.string("kind");
    if (s.kind == "power") {
      s.exponent = n.positive("exponent", 1.0);
      s.coefficient = n.positive("coefficient", 1.0);
    } else if (s.kind == "constant") {
      s.value = n.positive("value", 1.0);
    } else if (s.kind != "loglog" && s.kind != "sqrtlog" && s.kind != "data_exponent") {
      n.fail("kind", "unknown scale kind '" + s.kind + "'");
    }
    n.finish();
    return s;
  }

  json to_json() const {
    if (kind == "power") return {{"kind", kind}, {"exponent", exponent}, {"coefficient", coefficient}};
    if (kind == "constant") return {{"kind", kind}, {"value", value}};
    return {{"kind", kind}};
  }

  PositiveScale build() const {
    if (kind == "power") return PositiveScale::power(exponent, coefficient);
    if (kind == "constant") return PositiveScale::constant(value);
    if (kind == "loglog") return PositiveScale::loglog();
    if (kind == "sqrtlog") return PositiveScale::sqrtlog();
    throw ConfigError("scale: data_exponent must be resolved before use");
  }
};

struct GridSpec {
  int dimension = 1;
  double half_width = 6.0;
  std::size_t points = 1024;
  Boundary boundary = Boundary::zero_padded;
  double horizon = 1.0;
  double theta = 0.5;
  std::size_t stride = 0;  // 0: choose so that there are at least 32 checkpoints
  std::size_t trace_points = 512;

  static GridSpec parse(const cfg::Node& n) {
    GridSpec s;
    const long long d = n.integer("dimension", 1);
    if (d != 1 && d != 2) n.fail("dimension", "must be 1 or 2");
    s.dimension = static_cast<int>(d);
    s.half_width = n.positive("half_width", 6.0);
    const long long p = n.integer("points", 1024);
    if (p < 16 || p > (1 << 20)) n.fail("points", "must lie in 16..1048576");
    s.points = static_cast<std::size_t>(p);
    const std::string b = n.string("boundary", "zero_padded");
    if (b == "periodic")
      s.boundary = Boundary::periodic;
    else if (b == "zero_padded")
      s.boundary = Boundary::zero_padded;
    else
      n.fail("boundary", "expected 'periodic' or 'zero_padded'");
    s.horizon = n.positive("horizon", 1.0);
    s.theta = n.positive("theta", 0.5);
    if (s.theta > 0.5) n.fail("theta", "CFL factor above the 0.5 stability margin");
    const long long st = n.integer("stride", 0);
    if (st < 0) n.fail("stride", "must be >= 0 (0 selects automatically)");
    s.stride = static_cast<std::size_t>(st);
    const long long tp = n.integer("trace_points", 512);
    if (tp < 0) n.fail("trace_points", "must be >= 0");
    s.trace_points = static_cast<std::size_t>(tp);
    n.finish();
    return s;
  }

  json to_json() const {
    return {{"dimension", dimension}, {"half_width", half_width}, {"points", points},
            {"boundary", boundary == Boundary::periodic ? "periodic" : "zero_padded"},
            {"horizon", horizon},     {"theta", theta},           {"stride", stride},
            {"trace_points", trace_points}};
  }

  Grid1D axis() const {
    return Grid1D{-half_width, 2.0 * half_width / static_cast<double>(points), points, boundary == Boundary::periodic};
  }
};

struct AnalysesSpec {
  bool energy = true;
  bool gronwall = true;
  double gronwall_tolerance = 0.05;
  bool glaeser = true;
  double glaeser_tolerance = 1e-6;
  bool sobolev = true;
  int k_max = 4;
  bool moderateness = true;
  double cap = 10.0;
  double q = 0.0;
  bool consistency = false;
  double floor_slack = 0.05;
  bool sensitivity = false;
  bool identities = false;
  std::size_t trials = 20;

  static AnalysesSpec parse(const cfg::Node& n) {
    AnalysesSpec s;
    s.energy = n.boolean("energy", true);
    {
      auto g = n.object_or_empty("gronwall");
      s.gronwall = g.boolean("enabled", true);
      s.gronwall_tolerance = g.positive("tolerance", 0.05);
      g.finish();
    }
    {
      auto g = n.object_or_empty("glaeser");
      s.glaeser = g.boolean("enabled", true);
      s.glaeser_tolerance = g.positive("tolerance", 1e-6);
      g.finish();
    }
    {
      auto g = n.object_or_empty("sobolev");
      s.sobolev = g.boolean("enabled", true);
      const long long k = g.integer("k_max", 4);
      if (k < 0 || k > 8) g.fail("k_max", "must lie in 0..8");
      s.k_max = static_cast<int>(k);
      g.finish();
    }
    {
      auto g = n.object_or_empty("moderateness");
      s.moderateness = g.boolean("enabled", true);
      s.cap = g.number("cap", 10.0);
      s.q = g.number("q", 0.0);
      g.finish();
    }
    {
      auto g = n.object_or_empty("consistency");
      s.consistency = g.boolean("enabled", false);
      s.floor_slack = g.positive("floor_slack", 0.05);
      g.finish();
    }
    {
      auto g = n.object_or_empty("sensitivity");
      s.sensitivity = g.boolean("enabled", false);
      g.finish();
    }
    {
      auto g = n.object_or_empty("identities");
      s.identities = g.boolean("enabled", false);
      const long long t = g.integer("trials", 20);
      if (t < 1) g.fail("trials", "must be >= 1");
      s.trials = static_cast<std::size_t>(t);
      g.finish();
    }
    n.finish();
    return s;
  }

  json to_json() const {
    return {{"energy", energy},
            {"gronwall", {{"enabled", gronwall}, {"tolerance", gronwall_tolerance}}},
            {"glaeser", {{"enabled", glaeser}, {"tolerance", glaeser_tolerance}}},
            {"sobolev", {{"enabled", sobolev}, {"k_max", k_max}}},
            {"moderateness", {{"enabled", moderateness}, {"cap", cap}, {"q", q}}},
            {"consistency", {{"enabled", consistency}, {"floor_slack", floor_slack}}},
            {"sensitivity", {{"enabled", sensitivity}}},
            {"identities", {{"enabled", identities}, {"trials", trials}}}};
  }
};

struct ExperimentConfig {
  std::string name = "run";
  std::uint64_t seed = 1;
  // problem
  std::vector<FieldSpec> coefficients;  // one per axis
  FunctionSpec g0, g1;
  bool has_forcing = false;
  ForcingSpec forcing;
  // regularization
  std::vector<KernelSpec> coefficient_kernels;
  KernelSpec data_kernel;
  ScaleSpec coefficient_scale, data_scale;
  std::vector<double> ladder;
  // discretization, analyses, output
  GridSpec grid;
  AnalysesSpec analyses;
  std::string output_root;
  std::size_t jobs = 0;  // 0: hardware concurrency
  bool write_traces = true;
  bool write_nets = false;
  // sweep axes (cartesian product over kernels x scales)
  std::vector<KernelSpec> sweep_kernels;
  std::vector<ScaleSpec> sweep_scales;

  json to_json() const {
    json co = json::array();
    for (const auto& c : coefficients) co.push_back(c.to_json());
    json ks = json::array();
    for (const auto& k : coefficient_kernels) ks.push_back(k.to_json());
    json problem{{"coefficients", co}, {"g0", g0.to_json()}, {"g1", g1.to_json()}};
    if (has_forcing) problem["f"] = forcing.to_json();
    json j{{"name", name},
           {"seed", seed},
           {"problem", problem},
           {"regularization",
            {{"coefficient_kernels", ks},
             {"data_kernel", data_kernel.to_json()},
             {"coefficient_scale", coefficient_scale.to_json()},
             {"data_scale", data_scale.to_json()},
             {"ladder", {{"values", ladder}}}}},
           {"grid", grid.to_json()},
           {"analyses", analyses.to_json()},
           {"output", {{"jobs", jobs}, {"write_traces", write_traces}, {"write_nets", write_nets}}}};
    if (!output_root.empty()) j["output"]["root"] = output_root;
    if (!sweep_kernels.empty() || !sweep_scales.empty()) {
      json sk = json::array(), ss = json::array();
      for (const auto& k : sweep_kernels) sk.push_back(k.to_json());
      for (const auto& s : sweep_scales) ss.push_back(s.to_json());
      j["sweep"] = {{"kernels", sk}, {"scales", ss}};
    }
    return j;
  }
};

namespace detail {

inline std::vector<double> parse_ladder(const cfg::Node& n) {
  std::vector<double> out;
  if (n.has("values")) {
    out = n.numbers("values");
  } else {
    const long long lo = n.integer("j_min", 2), hi = n.integer("j_max", 9);
    const double base = n.number("base", 2.0);
    if (lo < 0 || hi < lo) n.fail("j_max", "need 0 <= j_min <= j_max");
    if (!(base > 1.0)) n.fail("base", "must be > 1");
    out = geometric_ladder(static_cast<int>(lo), static_cast<int>(hi), base);
  }
  n.finish();
  if (out.empty()) n.fail("ladder is empty");
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!(out[i] > 0.0) || out[i] > 1.0) n.fail("values", "eps must lie in (0, 1]");
    if (i > 0 && !(out[i] < out[i - 1])) n.fail("values", "ladder must be strictly decreasing");
  }
  return out;
}

}  // namespace detail

/// Parses and validates a whole config. Throws ConfigError with a field path;
/// nothing is computed here.
inline ExperimentConfig parse_config(const json& j) {
  cfg::Node root(j, "");
  ExperimentConfig c;
  c.name = root.string("name", "run");
  if (c.name.empty() || c.name.find_first_of("/\\") != std::string::npos)
    root.fail("name", "must be a non-empty file-name-safe string");
  const long long seed = root.integer("seed", 1);
  if (seed < 0) root.fail("seed", "must be >= 0");
  c.seed = static_cast<std::uint64_t>(seed);

  c.grid = GridSpec::parse(root.object_or_empty("grid"));

  {
    auto p = root.object("problem");
    const json& co = p.raw("coefficients");
    const std::string path = p.child_path("coefficients");
    if (co.is_object()) {
      c.coefficients.push_back(FieldSpec::parse(cfg::Node(co, path)));
    } else if (co.is_array()) {
      for (std::size_t i = 0; i < co.size(); ++i)
        c.coefficients.push_back(FieldSpec::parse(cfg::Node(co[i], path + "[" + std::to_string(i) + "]")));
    } else {
      throw ConfigError(path + ": expected an object or an array of objects");
    }
    if (c.coefficients.size() == 1 && c.grid.dimension == 2) c.coefficients.push_back(c.coefficients[0]);
    if (c.coefficients.size() != static_cast<std::size_t>(c.grid.dimension))
      throw ConfigError(path + ": need one coefficient per axis (" + std::to_string(c.grid.dimension) + ")");
    c.g0 = FunctionSpec::parse(p.object("g0"));
    c.g1 = p.has("g1") ? FunctionSpec::parse(p.object("g1")) : FunctionSpec{};
    if (p.has("f")) {
      c.has_forcing = true;
      c.forcing = ForcingSpec::parse(p.object("f"));
    }
    p.finish();
  }

  {
    auto r = root.object("regularization");
    const json& ks = r.raw("coefficient_kernels");
    const std::string path = r.child_path("coefficient_kernels");
    if (!ks.is_array() || ks.empty()) throw ConfigError(path + ": expected a non-empty array");
    for (std::size_t i = 0; i < ks.size(); ++i)
      c.coefficient_kernels.push_back(KernelSpec::parse(cfg::Node(ks[i], path + "[" + std::to_string(i) + "]")));
    if (r.has("data_kernel")) {
      c.data_kernel = KernelSpec::parse(r.object("data_kernel"));
    } else {
      c.data_kernel.kind = "vanishing_moments";
      c.data_kernel.left_width = c.data_kernel.right_width = 4.0;
      c.data_kernel.spacing = 0.25;
    }
    c.coefficient_scale = ScaleSpec::parse(r.object("coefficient_scale"));
    if (r.has("data_scale")) c.data_scale = ScaleSpec::parse(r.object("data_scale"));
    if (c.data_scale.kind == "data_exponent") r.fail("data_scale", "data_exponent applies to the coefficient scale only");
    c.ladder = detail::parse_ladder(r.object_or_empty("ladder"));
    r.finish();
  }

  c.analyses = AnalysesSpec::parse(root.object_or_empty("analyses"));

  {
    auto o = root.object_or_empty("output");
    c.output_root = o.string("root", "");
    const long long jobs = o.integer("jobs", 0);
    if (jobs < 0) o.fail("jobs", "must be >= 0");
    c.jobs = static_cast<std::size_t>(jobs);
    c.write_traces = o.boolean("write_traces", true);
    c.write_nets = o.boolean("write_nets", false);
    o.finish();
  }

  if (root.has("sweep")) {
    auto s = root.object("sweep");
    if (s.has("kernels")) {
      const json& a = s.raw("kernels");
      if (!a.is_array()) s.fail("kernels", "expected an array");
      for (std::size_t i = 0; i < a.size(); ++i)
        c.sweep_kernels.push_back(
            KernelSpec::parse(cfg::Node(a[i], s.child_path("kernels") + "[" + std::to_string(i) + "]")));
    }
    if (s.has("scales")) {
      const json& a = s.raw("scales");
      if (!a.is_array()) s.fail("scales", "expected an array");
      for (std::size_t i = 0; i < a.size(); ++i)
        c.sweep_scales.push_back(
            ScaleSpec::parse(cfg::Node(a[i], s.child_path("scales") + "[" + std::to_string(i) + "]")));
    }
    s.finish();
  }
  root.finish();

  // satisfiability of the requested analyses
  const auto& an = c.analyses;
  auto all_kernels = c.coefficient_kernels;
  all_kernels.insert(all_kernels.end(), c.sweep_kernels.begin(), c.sweep_kernels.end());
  for (const auto& f : c.coefficients)
    for (std::size_t i = 0; i < all_kernels.size(); ++i)
      if (f.distributional() && !all_kernels[i].nonnegative())
        throw ConfigError("regularization.coefficient_kernels[" + std::to_string(i) +
                          "]: a distributional coefficient needs a non-negative bump kernel");
  if (an.moderateness && c.ladder.size() < 4)
    throw ConfigError("analyses.moderateness: needs a ladder of at least 4 eps values");
  if (an.consistency) {
    if (c.grid.dimension != 1) throw ConfigError("analyses.consistency: 1D problems only");
    if (!c.coefficients[0].smooth())
      throw ConfigError("analyses.consistency: needs a constant or smooth coefficient field");
    if (c.data_kernel.kind != "vanishing_moments")
      throw ConfigError("analyses.consistency: needs a vanishing-moments data kernel");
    if (c.has_forcing) throw ConfigError("analyses.consistency: forcing is not supported by the reference solution");
  }
  if (an.sensitivity) {
    if (c.grid.dimension != 1) throw ConfigError("analyses.sensitivity: 1D problems only");
    if (c.coefficient_kernels.size() < 2)
      throw ConfigError("analyses.sensitivity: needs two coefficient kernels (phi and phi~)");
    if (c.has_forcing) throw ConfigError("analyses.sensitivity: forcing is not supported");
  }
  if (an.identities && c.grid.dimension != 1) throw ConfigError("analyses.identities: 1D problems only");
  if (c.coefficient_scale.kind == "data_exponent" && c.ladder.size() < 4)
    throw ConfigError("regularization.coefficient_scale: data_exponent needs at least 4 ladder points");
  if (an.gronwall && !an.energy) throw ConfigError("analyses.gronwall: requires analyses.energy");
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return parse_config(j);
}

}  // namespace vwave
