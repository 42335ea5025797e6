#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "xsblab/error.hpp"

namespace xsblab::harness {

enum class ExperimentKind {
  counterexample_scaling,
  lemma_suite,
  uniform_bound,
  trilinear_search,
  evolve,
  picard_vs_splitstep,
  continuous_dependence,
  existence_time,
};

std::string_view to_string(ExperimentKind kind);
std::optional<ExperimentKind> parse_kind(std::string_view name);

struct CatalogEntry {
  ExperimentKind kind;
  std::string_view subcommand;
  std::string_view summary;
  /// What the experiment checks, in plain words.
  std::string_view claim;
};
const std::vector<CatalogEntry>& catalog();
const CatalogEntry& catalog_entry(ExperimentKind kind);

/// `parameters` keeps the experiment-specific table as JSON; every key not
/// given falls back to the defaults of that experiment.
struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::evolve;
  nlohmann::json parameters = nlohmann::json::object();
  std::uint64_t seed = 1;
  std::filesystem::path output_dir = "xsb_lab_out";
  /// Verbatim input text, echoed into the summary.
  std::string source;
};

/// Every violated precondition, one message each.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  std::vector<std::string> violations_;
};

/// TOML or JSON (chosen by extension, .json for JSON, anything else TOML).
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(std::string_view text, bool is_json);

/// Applies `key=value` overrides to the parameter table; values parse as JSON
/// when they can and as strings otherwise. Dotted keys reach nested tables.
void apply_override(ExperimentConfig& config, std::string_view assignment);

/// Parameter table with every default filled in.
nlohmann::json resolved_parameters(const ExperimentConfig& config);

/// Throws ValidationError listing every violation.
void validate(const ExperimentConfig& config);

struct Verdict {
  std::string name;
  bool pass = false;
  double value = 0.0;
  std::string criterion;
};

struct ReportBundle {
  std::filesystem::path directory;
  nlohmann::json summary;
  std::vector<Verdict> verdicts;
  bool incomplete = false;

  bool all_pass() const;
};

/// Validates, dispatches and writes summary.json, CSV tables and plot data into
/// config.output_dir through a temporary sibling directory renamed into place.
ReportBundle run_experiment(const ExperimentConfig& config);

/// 0 all verdicts pass, 2 incomplete, 1 failed verdict.
int exit_code(const ReportBundle& bundle);

struct PlotSeries {
  std::string name;
  std::map<std::string, std::string> meta;
  std::vector<std::pair<double, double>> points;
};

/// One file `<name>.dat` per series: `# key=value` header lines, then
/// whitespace-separated x y rows printed with 17 significant digits.
std::vector<std::filesystem::path> emit_plotdata(const std::vector<PlotSeries>& series,
                                                 const std::filesystem::path& directory);
PlotSeries parse_plotdata(const std::filesystem::path& path);

}  // namespace xsblab::harness
