#pragma once

// Experiment runner: JSON configs, instance generation, solver runs, certificate
// checks and CSV emission. The command-line front end lives in tools/.

#include "bregmin/problems.hpp"
#include "bregmin/solver.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bregmin {

enum ExitCode : int {
  kExitOk = 0,
  kExitSolverFailure = 1,
  kExitConfigError = 2,
  kExitCertificateFailure = 3,
};

/// Invalid configuration; the message names the offending field.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ExperimentConfig {
  ProblemFamily problem = ProblemFamily::Poisson;
  RegKind reg = RegKind::None;
  double lambda = 0.1;
  Eigen::Index M = 50;
  Eigen::Index N = 10;
  std::uint64_t seed = 0;
  std::size_t seed_count = 1;  // runs seeds seed .. seed + seed_count - 1
  double epsilon = 1e-8;       // Poisson only
  double noise = 0.0;          // multiplicative measurement noise level
  SolverConfig solver;
  std::string output_path;  // empty: standard output
  bool emit_certificates = true;
  std::size_t map_samples = 1000;
  double map_radius = 3.0;
  double map_constant_scale = 1.0;  // multiplies the certified MAP constants (sensitivity runs)

  bool operator==(const ExperimentConfig&) const = default;
};

/// Command-line values that take precedence over the config document.
struct ConfigOverrides {
  std::optional<std::string> problem;
  std::optional<std::string> reg;
  std::optional<double> lambda;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> seed_count;
  std::optional<std::size_t> max_iters;
  bool backtracking = false;
  std::optional<std::string> output_path;
};

/// Parses a JSON config document, applies overrides and validates. Unknown keys,
/// bad enum names and out-of-range values throw ConfigError.
ExperimentConfig parse_config(std::string_view json_text, const ConfigOverrides& overrides = {});
ExperimentConfig load_config(const std::string& path, const ConfigOverrides& overrides = {});
void validate(const ExperimentConfig& cfg);
/// Complete JSON document; parse_config(serialize_config(cfg)) == cfg.
std::string serialize_config(const ExperimentConfig& cfg);

/// Generated problem plus its starting point.
struct Experiment {
  ModelProblem problem;
  Vec x0;
  std::string instance_json;
  std::uint64_t instance_hash = 0;  // FNV-1a of instance_json
};

Experiment build_experiment(const ExperimentConfig& cfg);

std::uint64_t fnv1a64(std::string_view bytes);

struct ExperimentResult {
  int exit_code = kExitOk;
  std::string message;  // failure description, empty on success
  std::uint64_t instance_hash = 0;
  std::string problem_name;
  IterateTrace trace;
  std::optional<CertificateReport> certificate;
  std::optional<MapResidualReport> map_report;
};

inline constexpr double kMapViolationTolerance = 1e-8;

ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Trace CSV followed by the `# certificates:` trailer of `# key=value` lines.
void write_experiment_csv(std::ostream& out, const ExperimentResult& result);

/// Writes to `path.tmp` and renames over `path`.
void atomic_write(const std::string& path, const std::string& content);

/// Output path of seed number `index` in a multi-seed run: "out.csv" -> "out.seed3.csv".
std::string seed_output_path(const std::string& path, std::uint64_t seed);

struct CompareSummary {
  ExperimentResult a;
  ExperimentResult b;
  std::size_t shared_rows = 0;
  double f_a = 0.0;
  double f_b = 0.0;
  std::string winner;  // "a", "b" or "tie"
  std::string csv;     // side-by-side f-vs-iteration and f-vs-time
  std::string text;
};

/// Runs both configs on the same instance. Throws ConfigError when they differ in
/// anything but the model choice and solver settings.
CompareSummary compare_models(ExperimentConfig a, ExperimentConfig b);

}  // namespace bregmin
