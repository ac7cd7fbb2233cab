#include <catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

std::string cli() {
  const char* p = std::getenv("VWAVE_CLI");
  return p ? p : "vwave";
}

Result sh(const std::string& cmd) {
  Result r;
  FILE* pipe = popen((cmd + " 2>&1").c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  while (std::fgets(buf, sizeof buf, pipe)) r.out += buf;
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

Result vwave(const std::string& args) { return sh(cli() + " " + args); }

std::string config(const std::string& name) { return std::string(VWAVE_CONFIG_DIR) + "/" + name; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& tag) {
  std::string t = (fs::temp_directory_path() / ("vwave-cli-" + tag + "-XXXXXX")).string();
  REQUIRE(mkdtemp(t.data()) != nullptr);
  return t;
}

fs::path run_dir(const Result& r) {
  const std::string key = "run directory: ";
  const auto at = r.out.rfind(key);
  REQUIRE(at != std::string::npos);
  const auto end = r.out.find('\n', at);
  return r.out.substr(at + key.size(), end - at - key.size());
}

// number of CSV files under a that differ from (or are missing in) b
std::size_t csv_mismatches(const fs::path& a, const fs::path& b, std::size_t& compared) {
  std::size_t bad = 0;
  compared = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (e.path().extension() != ".csv") continue;
    ++compared;
    const auto other = b / fs::relative(e.path(), a);
    if (!fs::exists(other) || slurp(e.path()) != slurp(other)) ++bad;
  }
  return bad;
}

}  // namespace

TEST_CASE("run writes a timestamped directory with reports and the resolved config") {
  const auto root = fresh_dir("run");
  const auto r = vwave("run " + config("heaviside.json") + " --output-root " + root.string());
  REQUIRE(r.code == 0);
  const auto dir = run_dir(r);
  CHECK(dir.parent_path() == root);
  CHECK(dir.filename().string().rfind("heaviside-", 0) == 0);
  for (const char* f : {"config.json", "summary.json", "data_norms.csv", "glaeser_k0_bump-R1-b1.json",
                        "moderateness_k0_bump-R1-b1.json", "energy_k0_bump-R1-b1.csv"})
    CHECK(fs::exists(dir / f));
  std::size_t traces = 0;
  for (const auto& e : fs::directory_iterator(dir / "traces" / "k0_bump-R1-b1"))
    if (e.path().extension() == ".csv") ++traces;
  CHECK(traces == 8);
  CHECK(r.out.find("FAIL") == std::string::npos);
  fs::remove_all(root);
}

TEST_CASE("two runs of the same config give byte-identical CSVs in distinct directories") {
  const auto root = fresh_dir("det");
  const auto a = vwave("run " + config("heaviside.json") + " --output-root " + root.string());
  const auto b = vwave("run " + config("heaviside.json") + " --output-root " + root.string());
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  CHECK(run_dir(a) != run_dir(b));
  std::size_t n = 0;
  CHECK(csv_mismatches(run_dir(a), run_dir(b), n) == 0);
  CHECK(n > 10);
  fs::remove_all(root);
}

TEST_CASE("the echoed config re-runs to identical results") {
  const auto root = fresh_dir("echo");
  const auto a = vwave("run " + config("heaviside.json") + " --output-root " + root.string());
  REQUIRE(a.code == 0);
  const auto b = vwave("run " + (run_dir(a) / "config.json").string() + " --output-root " + root.string());
  REQUIRE(b.code == 0);
  std::size_t n = 0;
  CHECK(csv_mismatches(run_dir(a), run_dir(b), n) == 0);
  CHECK(n > 10);
  fs::remove_all(root);
}

TEST_CASE("the output root falls back to VWAVE_OUTPUT_ROOT") {
  const auto root = fresh_dir("env");
  const auto r = sh("VWAVE_OUTPUT_ROOT=" + root.string() + " " + cli() + " run " + config("heaviside.json"));
  REQUIRE(r.code == 0);
  CHECK(run_dir(r).parent_path() == root);
  fs::remove_all(root);
}

TEST_CASE("sensitivity config produces the sensitivity report and its plot") {
  const auto root = fresh_dir("sens");
  const auto r = vwave("run " + config("example1_sensitivity.json") + " --output-root " + root.string());
  REQUIRE(r.code == 0);
  const auto dir = run_dir(r);
  CHECK(fs::exists(dir / "sensitivity.json"));
  CHECK(fs::exists(dir / "sensitivity_envelope.csv"));
  CHECK(slurp(dir / "sensitivity.json").find("\"verdict\": \"converging\"") != std::string::npos);
  const auto rep = vwave("report " + dir.string());
  CHECK(rep.code == 0);
  CHECK(fs::exists(dir / "plots" / "sensitivity.svg"));
  fs::remove_all(root);
}

TEST_CASE("report renders the moderateness plot with its fitted slope and a summary") {
  const auto root = fresh_dir("report");
  const auto r = vwave("run " + config("heaviside.json") + " --output-root " + root.string());
  REQUIRE(r.code == 0);
  const auto dir = run_dir(r);
  const auto rep = vwave("report " + dir.string());
  CHECK(rep.code == 0);
  bool found = false;
  for (const auto& e : fs::directory_iterator(dir / "plots")) {
    const auto name = e.path().filename().string();
    if (name.rfind("moderateness", 0) == 0) {
      found = true;
      CHECK(slurp(e.path()).find("slope") != std::string::npos);
    }
  }
  CHECK(found);
  CHECK(fs::exists(dir / "summary.md"));
  fs::remove_all(root);
}

TEST_CASE("report on an empty directory exits 1") {
  const auto root = fresh_dir("empty");
  CHECK(vwave("report " + root.string()).code == 1);
  fs::remove_all(root);
}

TEST_CASE("configuration errors exit 2 and name the field") {
  const auto root = fresh_dir("bad");
  {
    std::ofstream(root / "bad.json") << R"({"problem": {"coefficients": {"kind": "heaviside"},
      "g0": {"kind": "gaussian", "widht": 1}}})";
  }
  const auto r = vwave("run " + (root / "bad.json").string() + " --output-root " + root.string());
  CHECK(r.code == 2);
  CHECK(r.out.find("problem.g0.widht") != std::string::npos);
  CHECK(vwave("run " + (root / "missing.json").string()).code == 2);
  CHECK(vwave("frobnicate").code == 2);
  CHECK(vwave("verify symmetriser --n 0").code == 2);
  // nothing was written for the rejected config
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(root)) ++entries;
  CHECK(entries == 1);
  fs::remove_all(root);
}

TEST_CASE("verify subcommands print their tables and exit 0") {
  const auto s = vwave("verify symmetriser --n 4");
  CHECK(s.code == 0);
  CHECK(s.out.find("residual") != std::string::npos);
  const auto i = vwave("verify identities --n 2 --trials 100 --seed 7");
  CHECK(i.code == 0);
  CHECK(i.out.find("principal") != std::string::npos);
  const auto o = vwave("verify oracle");
  CHECK(o.code == 0);
  CHECK(o.out.find("observed order") != std::string::npos);
}
