#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "svfi/config.hpp"
#include "svfi/rng.hpp"
#include "svfi/run_io.hpp"
#include "svfi/simulation.hpp"
#include "svfi/validation.hpp"

namespace fs = std::filesystem;
using namespace svfi;

namespace {

// Output root precedence: --out flag, SVFI_OUT_ROOT, the config's
// output_dir.
fs::path output_root(const std::string& flag_value, const ExperimentConfig& config) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("SVFI_OUT_ROOT")) return env;
  return config.output_dir;
}

void write_run_outputs(const fs::path& dir, const EpisodeOutput& out,
                       const ExperimentConfig& config, std::uint64_t seed) {
  write_tick_csv(dir / "ticks.csv", out.log);
  write_plan_csv(dir / "plans.csv", out.log);
  out.grid.save((dir / "grid.txt").string());
  write_summary_json(dir / "summary.json", out.log, config.name, config.scene_name, seed);
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed_flag,
            const std::string& out_flag) {
  ExperimentConfig config;
  try {
    config = load_config(config_path);
  } catch (const ConfigError& e) {
    print_error_record("config", e.what());
    return 2;
  }
  const std::uint64_t seed = seed_flag.value_or(config.seed);
  try {
    // The episode runs to completion before any output path is created, so
    // a failed run leaves nothing behind.
    const EpisodeOutput out = run_episode(config.robot, config.scene, config.episode, seed);
    const fs::path dir = create_unique_dir(output_root(out_flag, config) / config.name);
    write_run_outputs(dir, out, config, seed);
    std::cout << "run " << config.name << ": " << to_string(out.log.reason) << " after "
              << out.log.ticks_executed << " ticks, outputs in " << dir.string() << "\n";
  } catch (const std::exception& e) {
    print_error_record("run", e.what());
    return 1;
  }
  return 0;
}

int cmd_validate(const std::string& suite_name, std::uint64_t seed) {
  validation::SuiteResult result;
  try {
    result = validation::run_suite(suite_name, seed);
  } catch (const std::exception& e) {
    print_error_record("validate", e.what());
    return 2;
  }
  size_t passed = 0;
  for (const validation::CheckResult& check : result.checks) {
    std::cout << (check.pass ? "PASS " : "FAIL ") << result.suite << '/' << check.name
              << " metric=" << format_double(check.metric);
    if (!check.detail.empty()) std::cout << " (" << check.detail << ")";
    std::cout << "\n";
    if (check.pass) ++passed;
  }
  std::cout << "suite " << result.suite << ": " << passed << '/' << result.checks.size()
            << " checks passed\n";
  return result.all_pass() ? 0 : 1;
}

int cmd_batch(const std::string& config_path, std::optional<std::uint64_t> seed_flag,
              const std::string& out_flag, int trials, bool parallel) {
  ExperimentConfig config;
  try {
    config = load_config(config_path);
  } catch (const ConfigError& e) {
    print_error_record("config", e.what());
    return 2;
  }
  const std::uint64_t seed = seed_flag.value_or(config.seed);

  // Every trial's seed is derived from the master seed and the trial index,
  // so the parallel schedule cannot influence any result.
  std::vector<std::optional<EpisodeOutput>> outputs(trials);
  std::vector<std::string> errors(trials);
  auto worker = [&](int k) {
    try {
      outputs[k] =
          run_episode(config.robot, config.scene, config.episode, derive_seed(seed, "trial", k));
    } catch (const std::exception& e) {
      errors[k] = e.what();
    }
  };
  if (parallel && trials > 1) {
    const int n_threads =
        std::min<int>(trials, std::max(1u, std::thread::hardware_concurrency()));
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) {
      pool.emplace_back([&, t] {
        for (int k = t; k < trials; k += n_threads) worker(k);
      });
    }
    for (std::thread& th : pool) th.join();
  } else {
    for (int k = 0; k < trials; ++k) worker(k);
  }
  for (int k = 0; k < trials; ++k) {
    if (!errors[k].empty()) {
      print_error_record("batch", "trial " + std::to_string(k) + ": " + errors[k]);
      return 1;
    }
  }

  try {
    const fs::path dir =
        create_unique_dir(output_root(out_flag, config) / (config.name + "-batch"));
    std::vector<RunLog> logs;
    logs.reserve(trials);
    for (int k = 0; k < trials; ++k) {
      char name[32];
      std::snprintf(name, sizeof(name), "trial-%03d", k);
      const fs::path trial_dir = dir / name;
      fs::create_directories(trial_dir);
      write_run_outputs(trial_dir, *outputs[k], config, derive_seed(seed, "trial", k));
      logs.push_back(outputs[k]->log);
    }
    write_aggregate_csv(dir / "aggregate.csv", logs, 20);
    std::cout << "batch " << config.name << ": " << trials << " trials, outputs in "
              << dir.string() << "\n";
  } catch (const std::exception& e) {
    print_error_record("batch", e.what());
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "svfi_cli: contact-safe exploration episodes, validation suites and batch experiments.\n"
      "Exit codes: 0 success, 1 run or check failure, 2 bad usage or config."};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_flag;
  std::uint64_t seed_value = 0;
  std::string suite_name;
  int trials = 5;
  bool parallel = false;

  CLI::App* run = app.add_subcommand(
      "run", "Run one episode: writes ticks.csv, plans.csv, grid.txt and summary.json into a "
             "fresh directory <out>/<config name>[-k]");
  run->add_option("--config", config_path, "Experiment config (JSON)")->required();
  CLI::Option* run_seed = run->add_option("--seed", seed_value, "Master seed (overrides config)");
  run->add_option("--out", out_flag,
                  "Output root (default: SVFI_OUT_ROOT env var, then the config's output_dir)");

  CLI::App* validate = app.add_subcommand("validate", "Run a validation suite and print a check table");
  validate
      ->add_option("--suite", suite_name,
                   "Suite name: chance, jacobians, qp, ig-oracle or quantile")
      ->required()
      ->check(CLI::IsMember({"chance", "jacobians", "qp", "ig-oracle", "quantile"}));
  validate->add_option("--seed", seed_value, "Master seed for the suite's random cases")
      ->default_val(1);

  CLI::App* batch = app.add_subcommand(
      "batch", "Run several trials of one config (seeds derived per trial) and write "
               "trial-### directories plus aggregate.csv");
  batch->add_option("--config", config_path, "Experiment config (JSON)")->required();
  batch->add_option("--trials", trials, "Number of trials")
      ->default_val(5)
      ->check(CLI::Range(1, 10000));
  batch->add_flag("--parallel", parallel, "Run trials on a thread pool (results are identical)");
  CLI::Option* batch_seed =
      batch->add_option("--seed", seed_value, "Master seed (overrides config)");
  batch->add_option("--out", out_flag,
                    "Output root (default: SVFI_OUT_ROOT env var, then the config's output_dir)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (run->parsed()) {
    std::optional<std::uint64_t> seed_flag;
    if (run_seed->count() > 0) seed_flag = seed_value;
    return cmd_run(config_path, seed_flag, out_flag);
  }
  if (validate->parsed()) return cmd_validate(suite_name, seed_value);
  if (batch->parsed()) {
    std::optional<std::uint64_t> seed_flag;
    if (batch_seed->count() > 0) seed_flag = seed_value;
    return cmd_batch(config_path, seed_flag, out_flag, trials, parallel);
  }
  return 2;
}
