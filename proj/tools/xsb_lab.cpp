// Command-line front end: one subcommand per experiment.
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "xsblab/harness.hpp"

namespace h = xsblab::harness;

namespace {

struct Options {
  std::string config;
  std::vector<std::string> overrides;
  long long seed = -1;
  std::string output_dir;
};

void print_catalog() {
  for (const auto& e : h::catalog()) {
    std::printf("%-15s %-22s %s\n  checks: %s\n", std::string(e.subcommand).c_str(),
                std::string(h::to_string(e.kind)).c_str(), std::string(e.summary).c_str(),
                std::string(e.claim).c_str());
  }
}

int run(h::ExperimentKind kind, const Options& opt) {
  h::ExperimentConfig cfg;
  if (!opt.config.empty()) {
    cfg = h::load_config(opt.config);
    if (cfg.experiment != kind) {
      std::cerr << "config " << opt.config << " describes '" << h::to_string(cfg.experiment)
                << "', not '" << h::to_string(kind) << "'\n";
      return 1;
    }
  } else {
    cfg.experiment = kind;
    cfg.output_dir = std::string("xsb_lab_out/") + std::string(h::to_string(kind));
  }
  for (const auto& o : opt.overrides) h::apply_override(cfg, o);
  if (opt.seed >= 0) cfg.seed = static_cast<std::uint64_t>(opt.seed);
  if (!opt.output_dir.empty()) cfg.output_dir = opt.output_dir;

  const auto bundle = h::run_experiment(cfg);
  for (const auto& v : bundle.verdicts) {
    std::printf("%s %-28s value=%-14.6g %s\n", v.pass ? "PASS" : "FAIL", v.name.c_str(), v.value,
                v.criterion.c_str());
  }
  if (bundle.incomplete) std::printf("INCOMPLETE (see summary.json notes)\n");
  std::printf("bundle: %s\n", bundle.directory.string().c_str());
  return h::exit_code(bundle);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical experiments on X^{s,b} estimates for a third-order NLS"};
  app.require_subcommand(0, 1);
  bool list = false;
  app.add_flag("--list", list, "print the experiment catalog");

  Options opt;
  std::vector<std::pair<CLI::App*, h::ExperimentKind>> subs;
  for (const auto& e : h::catalog()) {
    auto* sub = app.add_subcommand(std::string(e.subcommand), std::string(e.summary));
    sub->add_option("--config", opt.config, "TOML or JSON experiment file")->check(CLI::ExistingFile);
    sub->add_option("--set", opt.overrides, "parameter override key=value (repeatable)");
    sub->add_option("--seed", opt.seed, "random seed")->check(CLI::NonNegativeNumber);
    sub->add_option("--output-dir", opt.output_dir, "bundle directory");
    subs.emplace_back(sub, e.kind);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  if (list) {
    print_catalog();
    return 0;
  }
  for (const auto& [sub, kind] : subs) {
    if (!sub->parsed()) continue;
    try {
      return run(kind, opt);
    } catch (const h::ValidationError& e) {
      std::cerr << e.what() << '\n';
      return 1;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 1;
    }
  }
  std::cout << app.help();
  return 0;
}
