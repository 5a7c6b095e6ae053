#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "pbrl/harness.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

pbrl::ExperimentConfig load_config(const std::string& path, const std::string& algo_override,
                                   const std::vector<std::uint64_t>& seeds_override,
                                   const std::string& out_override, bool svg) {
  pbrl::ExperimentConfig cfg = pbrl::ExperimentConfig::from_json_text(read_file(path));
  if (!algo_override.empty()) {
    if (algo_override == "known") {
      cfg.algorithm = pbrl::Algorithm::kKnown;
    } else if (algo_override == "unknown") {
      cfg.algorithm = pbrl::Algorithm::kUnknown;
    } else {
      throw std::runtime_error("--algo must be 'known' or 'unknown'");
    }
  }
  if (!seeds_override.empty()) cfg.seeds = seeds_override;
  if (!out_override.empty()) cfg.output_dir = out_override;
  if (svg) cfg.emit_svg = true;
  return cfg;
}

void print_report(const pbrl::CheckReport& report) {
  for (const auto& [name, ok] : report.entries) {
    std::cout << (ok ? "PASS" : "FAIL") << "  " << name << "\n";
  }
  for (const std::string& note : report.notes) std::cout << "note: " << note << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Preference-based dueling RL experiment runner"};
  app.require_subcommand(1);

  std::string config_path;
  std::string algo_override;
  std::string out_override;
  std::vector<std::uint64_t> seeds_override;
  bool svg = false;

  CLI::App* run = app.add_subcommand("run", "run the configured experiment and persist results");
  run->add_option("config", config_path, "experiment config (JSON)")->required();
  run->add_option("--algo", algo_override, "override the algorithm: known|unknown");
  run->add_option("--seeds", seeds_override, "override the seed list")->delimiter(',');
  run->add_option("--out", out_override, "override the output directory");
  run->add_flag("--svg", svg, "also write curve.svg");

  CLI::App* check = app.add_subcommand("check", "run the instance invariant suite only");
  check->add_option("config", config_path, "experiment config (JSON)")->required();
  check->add_option("--algo", algo_override, "override the algorithm: known|unknown");
  check->add_option("--seeds", seeds_override, "override the seed list")->delimiter(',');
  check->add_option("--out", out_override, "override the output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    const pbrl::ExperimentConfig cfg =
        load_config(config_path, algo_override, seeds_override, out_override, svg);
    if (check->parsed()) {
      const pbrl::CheckReport report = pbrl::check_instance(cfg);
      print_report(report);
      return report.all_ok() ? 0 : 1;
    }
    const pbrl::ExperimentResult result = pbrl::run_experiment(cfg);
    print_report(result.checks);
    if (cfg.rounds > 0) {
      std::cout << "final mean score regret: " << result.curve.mean_scr.back() << " (se "
                << result.curve.se_scr.back() << ")\n";
      std::cout << "sublinearity slope: " << result.sublinearity_scr << "\n";
    }
    if (!cfg.output_dir.empty()) std::cout << "results written to " << cfg.output_dir << "\n";
    return result.checks.all_ok() ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
