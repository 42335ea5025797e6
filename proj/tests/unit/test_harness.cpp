#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "doctest.h"
#include "xsblab/harness.hpp"

using namespace xsblab;
using namespace xsblab::harness;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("xsblab_harness_" + std::to_string(::getpid()) + "_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kSmallEvolve = R"(
experiment = "evolve"
seed = 4

[parameters]
dt = 0.01
t_final = 0.2
dump = true

[parameters.grid]
nx = 32
nt = 32
)";

}  // namespace

TEST_CASE("catalog covers every kind") {
  CHECK(catalog().size() == 8);
  for (const auto& e : catalog()) {
    CHECK(parse_kind(to_string(e.kind)) == e.kind);
    CHECK(parse_kind(e.subcommand) == e.kind);
    CHECK_FALSE(e.claim.empty());
  }
  CHECK_FALSE(parse_kind("nonsense").has_value());
}

TEST_CASE("TOML and JSON configs parse to the same thing") {
  const auto t = parse_config(kSmallEvolve, false);
  const auto j = parse_config(
      R"({"experiment": "evolve", "seed": 4, "parameters": {"dt": 0.01, "t_final": 0.2, "dump": true,
          "grid": {"nx": 32, "nt": 32}}})",
      true);
  CHECK(t.experiment == ExperimentKind::evolve);
  CHECK(t.seed == 4);
  CHECK(t.parameters == j.parameters);
  const auto r = resolved_parameters(t);
  CHECK(r["grid"]["nx"] == 32);
  CHECK(r["grid"]["nt"] == 32);
  CHECK(r["scheme"] == "strang");
  CHECK_NOTHROW(validate(t));
}

TEST_CASE("validation lists every violation") {
  auto cfg = parse_config(R"(
experiment = "evolve"
[parameters]
dt = -1.0
t_final = 100.0
bogus = 3
dealias = "sometimes"
[parameters.grid]
nx = 31
)",
                          false);
  try {
    validate(cfg);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    const auto& v = e.violations();
    CHECK(v.size() >= 4);
    auto mentions = [&](const std::string& needle) {
      for (const auto& s : v) {
        if (s.find(needle) != std::string::npos) return true;
      }
      return false;
    };
    CHECK(mentions("bogus"));
    CHECK(mentions("dt"));
    CHECK(mentions("dealias"));
    CHECK(mentions("nx"));
  }
  CHECK_THROWS_AS(parse_config(R"(experiment = "nope")", false), ValidationError);
  CHECK_THROWS_AS(parse_config(R"(experiment = "evolve"
colour = 1)",
                               false),
                  ValidationError);
}

TEST_CASE("overrides reach nested tables") {
  auto cfg = parse_config(kSmallEvolve, false);
  apply_override(cfg, "grid.nx=64");
  apply_override(cfg, "dealias=none");
  apply_override(cfg, "initial.amplitude=0.5");
  CHECK(cfg.parameters["grid"]["nx"] == 64);
  CHECK(cfg.parameters["grid"]["nt"] == 32);
  CHECK(cfg.parameters["dealias"] == "none");
  CHECK(cfg.parameters["initial"]["amplitude"] == 0.5);
  CHECK_THROWS(apply_override(cfg, "no_equals_sign"));
}

TEST_CASE("plot data round trip") {
  const auto dir = scratch("plot");
  PlotSeries s{"ratio", {{"x", "N"}, {"s", "-0.25"}}, {{64.0, 0.1}, {128.0, 1.0 / 3.0}, {256.0, 1e-17}}};
  const auto files = emit_plotdata({s}, dir);
  REQUIRE(files.size() == 1);
  CHECK(files[0].filename() == "ratio.dat");
  const auto back = parse_plotdata(files[0]);
  CHECK(back.name == "ratio");
  CHECK(back.meta == s.meta);
  CHECK(back.points == s.points);
  fs::remove_all(dir);
}

TEST_CASE("bundles are deterministic per seed") {
  const auto a = scratch("a");
  const auto b = scratch("b");
  auto cfg = parse_config(kSmallEvolve, false);
  cfg.output_dir = a;
  const auto ra = run_experiment(cfg);
  cfg.output_dir = b;
  const auto rb = run_experiment(cfg);
  CHECK(ra.all_pass());
  CHECK(exit_code(ra) == 0);
  CHECK(fs::exists(a / "summary.json"));
  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    const auto ext = entry.path().extension();
    if (ext == ".csv" || ext == ".xsbt") {
      CHECK(slurp(entry.path()) == slurp(b / entry.path().filename()));
      ++compared;
    }
  }
  CHECK(compared >= 2);
  CHECK(ra.summary["seed"] == 4);
  CHECK(ra.summary["experiment"] == "evolve");

  // Re-running into the same directory replaces the bundle and leaves no temp dirs.
  cfg.output_dir = a;
  run_experiment(cfg);
  std::size_t siblings = 0;
  for (const auto& entry : fs::directory_iterator(a.parent_path())) {
    if (entry.path().filename().string().find("xsblab_harness_" + std::to_string(::getpid()) + "_a") != std::string::npos) ++siblings;
  }
  CHECK(siblings == 1);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("exit codes") {
  ReportBundle r;
  r.verdicts = {{"x", true, 1.0, ""}};
  CHECK(exit_code(r) == 0);
  r.verdicts.push_back({"y", false, 2.0, ""});
  CHECK(exit_code(r) == 1);
  r.incomplete = true;
  CHECK(exit_code(r) == 2);
}
