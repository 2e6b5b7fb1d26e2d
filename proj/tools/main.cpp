// bregmin: command-line runner for Model BPG experiments.
//
//   bregmin run --config cfg.json [--problem P --reg R --lambda F --seed I
//                                  --max-iters K --backtracking --output PATH --jobs J]
//   bregmin compare --config-a A.json --config-b B.json [--output PATH]
//   bregmin check --config cfg.json
//
// Exit codes: 0 ok, 1 solver failure, 2 config error, 3 certificate failure.

#include "bregmin/experiment.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

namespace {

using namespace bregmin;

std::mutex io_mutex;

void echo_config(const ExperimentConfig& cfg) {
  std::lock_guard lock(io_mutex);
  std::cerr << "effective config:\n" << serialize_config(cfg) << '\n';
}

int combine(int a, int b) {
  if (a == kExitSolverFailure || b == kExitSolverFailure) return kExitSolverFailure;
  return std::max(a, b);
}

int run_one(const ExperimentConfig& cfg) {
  const ExperimentResult result = run_experiment(cfg);
  if (result.exit_code == kExitSolverFailure) {
    std::lock_guard lock(io_mutex);
    std::cerr << "seed " << cfg.seed << ": solver failure at " << result.message << '\n';
    return result.exit_code;
  }
  std::ostringstream csv;
  write_experiment_csv(csv, result);
  if (cfg.output_path.empty()) {
    std::lock_guard lock(io_mutex);
    std::cout << csv.str();
  } else {
    atomic_write(cfg.output_path, csv.str());
  }
  if (!result.message.empty()) {
    std::lock_guard lock(io_mutex);
    std::cerr << "seed " << cfg.seed << ": " << result.message << '\n';
  }
  return result.exit_code;
}

int command_run(const ExperimentConfig& base, std::size_t jobs) {
  echo_config(base);
  if (base.seed_count == 1) return run_one(base);

  std::vector<ExperimentConfig> runs;
  for (std::size_t i = 0; i < base.seed_count; ++i) {
    ExperimentConfig cfg = base;
    cfg.seed = base.seed + i;
    cfg.solver.seed = cfg.seed;
    cfg.seed_count = 1;
    cfg.output_path = seed_output_path(base.output_path, cfg.seed);
    runs.push_back(std::move(cfg));
  }
  std::atomic<std::size_t> next{0};
  std::vector<int> codes(runs.size(), kExitOk);
  auto worker = [&] {
    for (std::size_t i = next++; i < runs.size(); i = next++) {
      try {
        codes[i] = run_one(runs[i]);
      } catch (const std::exception& e) {
        std::lock_guard lock(io_mutex);
        std::cerr << "seed " << runs[i].seed << ": " << e.what() << '\n';
        codes[i] = kExitSolverFailure;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < std::clamp<std::size_t>(jobs, 1, runs.size()); ++t)
    pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  int code = kExitOk;
  for (int c : codes) code = combine(code, c);
  return code;
}

int command_check(ExperimentConfig cfg) {
  cfg.emit_certificates = true;
  echo_config(cfg);
  const ExperimentResult result = run_experiment(cfg);
  if (result.exit_code == kExitSolverFailure) {
    std::cerr << "solver failure at " << result.message << '\n';
    return result.exit_code;
  }
  std::ostringstream csv;
  write_experiment_csv(csv, result);
  // Only the trailer: the trace itself is not wanted here.
  const std::string text = csv.str();
  std::cout << text.substr(text.find("# certificates:"));
  if (!result.message.empty()) std::cerr << result.message << '\n';
  return result.exit_code;
}

int command_compare(const ExperimentConfig& a, const ExperimentConfig& b,
                    const std::string& output) {
  const CompareSummary s = compare_models(a, b);
  if (output.empty()) {
    std::cout << s.csv;
  } else {
    atomic_write(output, s.csv);
  }
  std::cout << s.text;
  for (const auto* r : {&s.a, &s.b}) {
    if (!r->message.empty()) std::cerr << r->problem_name << ": " << r->message << '\n';
  }
  return combine(s.a.exit_code == kExitSolverFailure ? kExitSolverFailure : kExitOk,
                 s.b.exit_code == kExitSolverFailure ? kExitSolverFailure : kExitOk);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Model BPG experiment runner"};
  app.require_subcommand(1);

  ConfigOverrides overrides;
  std::string config_path;
  std::size_t jobs = 1;
  CLI::App* run = app.add_subcommand("run", "Run one experiment and write its trace CSV");
  run->add_option("--config", config_path, "JSON config file")->required();
  run->add_option("--problem", overrides.problem,
                  "phase_retrieval_m1, phase_retrieval_m2, robust_pr or poisson");
  run->add_option("--reg", overrides.reg, "none, l1 or l2");
  run->add_option("--lambda", overrides.lambda, "Regularization weight");
  run->add_option("--seed", overrides.seed, "Instance seed");
  run->add_option("--seed-count", overrides.seed_count, "Number of consecutive seeds to run");
  run->add_option("--max-iters", overrides.max_iters, "Outer iteration budget");
  run->add_flag("--backtracking", overrides.backtracking, "Estimate L by backtracking");
  run->add_option("--output", overrides.output_path, "Trace CSV path (default: stdout)");
  run->add_option("--jobs", jobs, "Parallel seeds when seed_count > 1")
      ->check(CLI::PositiveNumber);

  std::string config_a, config_b, compare_output;
  CLI::App* compare = app.add_subcommand("compare", "Run two models on the same instance");
  compare->add_option("--config-a", config_a, "First config")->required();
  compare->add_option("--config-b", config_b, "Second config")->required();
  compare->add_option("--output", compare_output, "Side-by-side CSV path (default: stdout)");

  CLI::App* check = app.add_subcommand("check", "Run certificates only");
  check->add_option("--config", config_path, "JSON config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfigError;
  }

  try {
    if (*run) return command_run(load_config(config_path, overrides), jobs);
    if (*check) return command_check(load_config(config_path));
    if (*compare) return command_compare(load_config(config_a), load_config(config_b),
                                         compare_output);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitSolverFailure;
  }
  return kExitOk;
}
