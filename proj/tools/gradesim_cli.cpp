// gradesim: batch rollouts, summary comparison and dataset export.
//
// Exit codes: 0 success, 1 runtime error, 2 configuration or usage error,
// 3 when the only failures were diverged rollouts.

#include "gradesim/config.hpp"
#include "gradesim/dataset.hpp"
#include "gradesim/errors.hpp"
#include "gradesim/harness.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitConfig = 2;
constexpr int kExitDiverged = 3;

// A run's output directory stands for its summary.json.
nlohmann::json read_summary(std::filesystem::path path) {
  if (std::filesystem::is_directory(path)) path /= "summary.json";
  std::ifstream f(path);
  if (!f) throw gradesim::IoError("cannot open " + path.string());
  return nlohmann::json::parse(f);
}

gradesim::ScenarioConfig effective_config(const std::string& config_path,
                                          const gradesim::CliOverrides& o) {
  if (config_path.empty()) return gradesim::parse_config(nlohmann::json::object(), o);
  return gradesim::load_config(config_path, o);
}

void print_level(const gradesim::LevelSummary& l) {
  std::printf("%-16s n=%d failed=%d time=%.2f+-%.2f s uncleared=%.3g m3 success=%d/%d (%.1f%%) "
              "diverged=%.1f%%\n",
              l.name.c_str(), l.completed, l.failed, l.time_mean, l.time_std, l.uncleared_mean,
              l.successes, l.push_legs, 100.0 * l.success_rate, 100.0 * l.divergence_rate);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dozer grading simulator with INS/aiding fusion"};
  app.require_subcommand(0, 1);

  std::string config_path;
  gradesim::CliOverrides o;
  std::string scenario;
  int rollouts = 0;
  std::uint64_t seed = 0;
  std::string out;
  bool print_config = false;
  int threads = -1;

  app.add_flag("--print-config", print_config, "Print the effective configuration and exit");
  app.add_option("--config", config_path, "Scenario configuration file (JSON)");
  app.add_option("--scenario", scenario, "noise_less, sensor_fusion, extreme or yaw_sweep");

  auto* run = app.add_subcommand("run", "Run a scenario's rollouts and write the summary");
  run->add_option("--config", config_path, "Scenario configuration file (JSON)")->required();
  run->add_option("--scenario", scenario, "Override the file's scenario");
  run->add_option("--rollouts", rollouts, "Rollouts per noise level")->check(CLI::PositiveNumber);
  run->add_option("--seed", seed, "Base seed");
  run->add_option("--out", out, "Output directory");
  run->add_option("--threads", threads, "Worker threads, 0 for all cores")->check(CLI::NonNegativeNumber);
  run->add_flag("--print-config", print_config, "Print the effective configuration and exit");

  std::string summary_a, summary_b;
  auto* compare = app.add_subcommand("compare", "Paired-seed deltas between two summaries");
  compare->add_option("summaryA", summary_a, "Baseline summary.json or run directory")->required();
  compare->add_option("summaryB", summary_b, "Compared summary.json or run directory")->required();

  int k = 0;
  auto* exp = app.add_subcommand("export-dataset", "Export augmented observations per decision");
  exp->add_option("--config", config_path, "Scenario configuration file (JSON)")->required();
  exp->add_option("--k", k, "Samples per decision")->required()->check(CLI::PositiveNumber);
  exp->add_option("--out", out, "Dataset directory")->required();
  exp->add_option("--scenario", scenario, "Override the file's scenario");
  exp->add_option("--rollouts", rollouts, "Episodes to export")->check(CLI::PositiveNumber);
  exp->add_option("--seed", seed, "Base seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  auto* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front();
  if (!scenario.empty()) o.scenario = scenario;
  if (sub && sub != compare && sub->count("--rollouts")) o.rollouts = rollouts;
  if (sub && sub != compare && sub->count("--seed")) o.seed = seed;
  if (sub == run && !out.empty()) o.output = out;

  try {
    if (sub == compare) {
      const auto deltas = gradesim::compare_summaries(read_summary(summary_a), read_summary(summary_b));
      std::cout << gradesim::to_json(deltas).dump(2) << '\n';
      return kExitOk;
    }

    gradesim::ScenarioConfig cfg = effective_config(config_path, o);
    if (threads >= 0) cfg.threads = threads;
    if (print_config || !sub) {
      std::cout << gradesim::to_json(cfg).dump(2) << '\n';
      return kExitOk;
    }

    if (sub == exp) {
      const auto rep = gradesim::export_dataset(cfg, k, out);
      std::printf("episodes=%d failed=%d decisions=%d samples=%d\n", rep.episodes,
                  rep.failed_episodes, rep.decisions, rep.samples);
      return rep.failed_episodes > 0 ? kExitError : kExitOk;
    }

    const auto summary = gradesim::run_scenario(cfg);
    for (const auto& l : summary.levels) print_level(l);
    std::printf("wrote %s\n", (cfg.output / "summary.json").string().c_str());
    if (summary.any_failed()) return kExitError;
    if (summary.any_diverged()) return kExitDiverged;
    return kExitOk;
  } catch (const gradesim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
}
