#include "bregmin/experiment.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace bregmin {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw ConfigError("config field '" + field + "': " + what);
}

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where) {
  for (const auto& item : obj.items()) {
    if (!known.count(item.key())) fail(where + item.key(), "unknown key");
  }
}

double get_real(const json& obj, const std::string& key, const std::string& where, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) fail(where + key, "expected a number");
  return v.get<double>();
}

std::uint64_t get_count(const json& obj, const std::string& key, const std::string& where,
                        std::uint64_t fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
    fail(where + key, "expected a nonnegative integer");
  return v.get<std::uint64_t>();
}

bool get_flag(const json& obj, const std::string& key, const std::string& where, bool fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_boolean()) fail(where + key, "expected true or false");
  return v.get<bool>();
}

std::string get_string(const json& obj, const std::string& key, const std::string& where,
                       const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_string()) fail(where + key, "expected a string");
  return v.get<std::string>();
}

ProblemFamily parse_problem(const std::string& name) {
  try {
    return problem_family_from_string(name);
  } catch (const std::invalid_argument& e) {
    fail("problem", e.what());
  }
}

RegKind parse_reg(const std::string& name) {
  try {
    return reg_kind_from_string(name);
  } catch (const std::invalid_argument& e) {
    fail("reg", e.what());
  }
}

PdhgConfig parse_inner(const json& obj) {
  const std::string where = "solver.inner.";
  if (!obj.is_object()) fail("solver.inner", "expected an object");
  reject_unknown(obj, {"tol", "max_iters", "power_iters", "step_scale", "balance"}, where);
  PdhgConfig inner;
  inner.tol = get_real(obj, "tol", where, inner.tol);
  inner.max_iters = static_cast<int>(get_count(obj, "max_iters", where, inner.max_iters));
  inner.power_iters = static_cast<int>(get_count(obj, "power_iters", where, inner.power_iters));
  inner.step_scale = get_real(obj, "step_scale", where, inner.step_scale);
  inner.balance = get_real(obj, "balance", where, inner.balance);
  return inner;
}

SolverConfig parse_solver(const json& obj) {
  const std::string where = "solver.";
  if (!obj.is_object()) fail("solver", "expected an object");
  reject_unknown(obj,
                 {"tau_fraction", "max_iters", "move_tol", "backtracking", "nu", "L_init",
                  "record_time", "inner"},
                 where);
  SolverConfig s;
  s.tau_fraction = get_real(obj, "tau_fraction", where, s.tau_fraction);
  s.max_iters = get_count(obj, "max_iters", where, s.max_iters);
  s.move_tol = get_real(obj, "move_tol", where, s.move_tol);
  s.backtracking = get_flag(obj, "backtracking", where, s.backtracking);
  s.nu = get_real(obj, "nu", where, s.nu);
  s.L_init = get_real(obj, "L_init", where, s.L_init);
  s.record_time = get_flag(obj, "record_time", where, s.record_time);
  if (obj.contains("inner")) s.inner = parse_inner(obj.at("inner"));
  return s;
}

}  // namespace

void validate(const ExperimentConfig& cfg) {
  if (cfg.M < 1) fail("M", "must be >= 1");
  if (cfg.N < 1) fail("N", "must be >= 1");
  if (!(cfg.lambda >= 0.0) || !std::isfinite(cfg.lambda)) fail("lambda", "must be finite and >= 0");
  if (!(cfg.epsilon > 0.0) || !std::isfinite(cfg.epsilon)) fail("epsilon", "must be positive");
  if (!(cfg.noise >= 0.0) || !std::isfinite(cfg.noise)) fail("noise", "must be finite and >= 0");
  if (cfg.seed_count < 1) fail("seed_count", "must be >= 1");
  if (cfg.seed_count > 1 && cfg.output_path.empty())
    fail("seed_count", "multi-seed runs need an output path (one file per seed)");
  if (!(cfg.map_radius > 0.0)) fail("map_radius", "must be positive");
  if (!(cfg.map_constant_scale > 0.0) || !std::isfinite(cfg.map_constant_scale))
    fail("map_constant_scale", "must be positive");
  try {
    validate(cfg.solver);
  } catch (const std::invalid_argument& e) {
    fail("solver", e.what());
  }
  if (!cfg.output_path.empty()) {
    const auto parent = std::filesystem::path(cfg.output_path).parent_path();
    if (!parent.empty() && !std::filesystem::is_directory(parent))
      fail("output", "directory '" + parent.string() + "' does not exist");
  }
}

ExperimentConfig parse_config(std::string_view json_text, const ConfigOverrides& overrides) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(doc,
                 {"problem", "reg", "lambda", "M", "N", "seed", "seed_count", "epsilon", "noise",
                  "solver", "output", "emit_certificates", "map_samples", "map_radius",
                  "map_constant_scale"},
                 "");

  ExperimentConfig cfg;
  if (!doc.contains("problem") && !overrides.problem) fail("problem", "is required");
  cfg.problem = parse_problem(overrides.problem.value_or(get_string(doc, "problem", "", "")));
  cfg.reg = parse_reg(overrides.reg.value_or(get_string(doc, "reg", "", "none")));
  cfg.lambda = overrides.lambda.value_or(get_real(doc, "lambda", "", cfg.lambda));
  cfg.M = static_cast<Eigen::Index>(get_count(doc, "M", "", static_cast<std::uint64_t>(cfg.M)));
  cfg.N = static_cast<Eigen::Index>(get_count(doc, "N", "", static_cast<std::uint64_t>(cfg.N)));
  cfg.seed = overrides.seed.value_or(get_count(doc, "seed", "", cfg.seed));
  cfg.seed_count = overrides.seed_count.value_or(get_count(doc, "seed_count", "", cfg.seed_count));
  cfg.epsilon = get_real(doc, "epsilon", "", cfg.epsilon);
  cfg.noise = get_real(doc, "noise", "", cfg.noise);
  if (doc.contains("solver")) cfg.solver = parse_solver(doc.at("solver"));
  if (overrides.max_iters) cfg.solver.max_iters = *overrides.max_iters;
  if (overrides.backtracking) cfg.solver.backtracking = true;
  cfg.solver.seed = cfg.seed;
  cfg.output_path = overrides.output_path.value_or(get_string(doc, "output", "", ""));
  cfg.emit_certificates = get_flag(doc, "emit_certificates", "", cfg.emit_certificates);
  cfg.map_samples = get_count(doc, "map_samples", "", cfg.map_samples);
  cfg.map_radius = get_real(doc, "map_radius", "", cfg.map_radius);
  cfg.map_constant_scale = get_real(doc, "map_constant_scale", "", cfg.map_constant_scale);
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path, const ConfigOverrides& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), overrides);
}

std::string serialize_config(const ExperimentConfig& cfg) {
  json inner = {{"tol", cfg.solver.inner.tol},
                {"max_iters", cfg.solver.inner.max_iters},
                {"power_iters", cfg.solver.inner.power_iters},
                {"step_scale", cfg.solver.inner.step_scale},
                {"balance", cfg.solver.inner.balance}};
  json solver = {{"tau_fraction", cfg.solver.tau_fraction},
                 {"max_iters", cfg.solver.max_iters},
                 {"move_tol", cfg.solver.move_tol},
                 {"backtracking", cfg.solver.backtracking},
                 {"nu", cfg.solver.nu},
                 {"L_init", cfg.solver.L_init},
                 {"record_time", cfg.solver.record_time},
                 {"inner", inner}};
  json doc = {{"problem", std::string(to_string(cfg.problem))},
              {"reg", std::string(to_string(cfg.reg))},
              {"lambda", cfg.lambda},
              {"M", cfg.M},
              {"N", cfg.N},
              {"seed", cfg.seed},
              {"seed_count", cfg.seed_count},
              {"epsilon", cfg.epsilon},
              {"noise", cfg.noise},
              {"solver", solver},
              {"output", cfg.output_path},
              {"emit_certificates", cfg.emit_certificates},
              {"map_samples", cfg.map_samples},
              {"map_radius", cfg.map_radius},
              {"map_constant_scale", cfg.map_constant_scale}};
  return doc.dump(2);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

Experiment build_experiment(const ExperimentConfig& cfg) {
  const Regularizer reg{cfg.reg, cfg.reg == RegKind::None ? 0.0 : cfg.lambda};
  Experiment ex;
  if (cfg.problem == ProblemFamily::Poisson) {
    const PoissonInstance inst = gen_poisson(cfg.seed, cfg.M, cfg.N, cfg.epsilon, reg, cfg.noise);
    ex.problem = make_poisson(inst);
    ex.instance_json = to_json(inst);
    ex.x0 = Vec::Ones(cfg.N).cwiseMax(cfg.epsilon);
  } else {
    const PhaseRetrievalInstance inst = gen_phase_retrieval(cfg.seed, cfg.M, cfg.N, reg, cfg.noise);
    switch (cfg.problem) {
      case ProblemFamily::PhaseRetrievalM1: ex.problem = make_phase_retrieval_m1(inst); break;
      case ProblemFamily::PhaseRetrievalM2: ex.problem = make_phase_retrieval_m2(inst); break;
      default: ex.problem = make_robust_pr(inst); break;
    }
    ex.instance_json = to_json(inst);
    // Separate stream from the instance generator, shared by all three models.
    std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    std::normal_distribution<double> normal(0.0, 1.0);
    ex.x0.resize(cfg.N);
    for (Eigen::Index i = 0; i < cfg.N; ++i) ex.x0[i] = normal(rng);
  }
  ex.problem.map_upper *= cfg.map_constant_scale;
  ex.problem.map_lower *= cfg.map_constant_scale;
  ex.instance_hash = fnv1a64(ex.instance_json);
  return ex;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  ExperimentResult result;
  Experiment ex;
  try {
    ex = build_experiment(cfg);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("instance generation failed: ") + e.what());
  }
  result.instance_hash = ex.instance_hash;
  result.problem_name = ex.problem.name;
  try {
    result.trace = run(ex.problem, cfg.solver, ex.x0);
  } catch (const SolverError& e) {
    result.exit_code = kExitSolverFailure;
    result.message = e.what();
    return result;
  } catch (const std::exception& e) {
    result.exit_code = kExitSolverFailure;
    result.message = std::string("iteration 0: ") + e.what();
    return result;
  }
  if (!cfg.emit_certificates) return result;

  result.certificate = descent_certificate(ex.problem, result.trace, default_slack(result.trace));
  result.map_report = map_residual_check(ex.problem, cfg.map_samples, cfg.map_radius, cfg.seed);
  const bool map_ok = result.map_report->worst_upper_violation <= kMapViolationTolerance &&
                      result.map_report->worst_lower_violation <= kMapViolationTolerance;
  if (!result.certificate->all_pass() || !map_ok) {
    result.exit_code = kExitCertificateFailure;
    std::ostringstream msg;
    msg.precision(17);
    const auto& c = *result.certificate;
    msg << "certificate failure: function_descent margin " << c.function_descent.worst_margin
        << ", lyapunov_descent margin " << c.lyapunov_descent.worst_margin
        << ", complexity margin " << c.complexity.worst_margin << ", iterates_feasible "
        << (c.iterates_feasible ? "true" : "false") << ", map upper "
        << result.map_report->worst_upper_violation << ", map lower "
        << result.map_report->worst_lower_violation;
    result.message = msg.str();
  }
  return result;
}

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string hex(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void write_check(std::ostream& out, const std::string& name, const InequalityCheck& c) {
  out << "# " << name << '=' << (c.pass ? "pass" : "fail") << '\n';
  out << "# " << name << "_worst_margin=" << fmt(c.worst_margin) << '\n';
  out << "# " << name << "_worst_iter=" << c.worst_index << '\n';
}

}  // namespace

void write_experiment_csv(std::ostream& out, const ExperimentResult& result) {
  write_trace_csv(out, result.trace);
  out << "# certificates:\n";
  out << "# problem=" << result.problem_name << '\n';
  out << "# instance_hash=" << hex(result.instance_hash) << '\n';
  out << "# rows=" << result.trace.rows.size() << '\n';
  if (result.certificate) {
    const auto& c = *result.certificate;
    out << "# slack=" << fmt(c.slack) << '\n';
    write_check(out, "function_descent", c.function_descent);
    write_check(out, "lyapunov_descent", c.lyapunov_descent);
    write_check(out, "complexity", c.complexity);
    out << "# iterates_feasible=" << (c.iterates_feasible ? "true" : "false") << '\n';
  }
  if (result.map_report) {
    const auto& m = *result.map_report;
    out << "# map_samples=" << m.samples << '\n';
    out << "# map_worst_upper_violation=" << fmt(m.worst_upper_violation) << '\n';
    out << "# map_worst_lower_violation=" << fmt(m.worst_lower_violation) << '\n';
  }
  out << "# status=" << (result.exit_code == kExitOk ? "pass" : "fail") << '\n';
}

void atomic_write(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + tmp + "' for writing");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write to '" + tmp + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot rename '" + tmp + "' to '" + path + "': " + ec.message());
  }
}

std::string seed_output_path(const std::string& path, std::uint64_t seed) {
  const std::filesystem::path p(path);
  std::string name = p.stem().string() + ".seed" + std::to_string(seed) + p.extension().string();
  return (p.parent_path() / name).string();
}

CompareSummary compare_models(ExperimentConfig a, ExperimentConfig b) {
  const bool a_poisson = a.problem == ProblemFamily::Poisson;
  const bool b_poisson = b.problem == ProblemFamily::Poisson;
  if (a_poisson != b_poisson)
    throw ConfigError("compare: poisson and phase retrieval configs use different instances");
  if (a.seed != b.seed) throw ConfigError("compare: seeds differ");
  if (a.M != b.M || a.N != b.N) throw ConfigError("compare: dimensions M, N differ");
  if (a.reg != b.reg || a.lambda != b.lambda)
    throw ConfigError("compare: regularizers differ");
  if (a.noise != b.noise || a.epsilon != b.epsilon)
    throw ConfigError("compare: noise or epsilon differ");
  a.solver.record_time = true;
  b.solver.record_time = true;

  CompareSummary s;
  s.a = run_experiment(a);
  s.b = run_experiment(b);
  if (s.a.instance_hash != s.b.instance_hash)
    throw ConfigError("compare: generated instances differ");

  const auto& ra = s.a.trace.rows;
  const auto& rb = s.b.trace.rows;
  std::ostringstream csv;
  csv << "iter,f_a,time_a,f_b,time_b\n";
  const std::size_t rows = std::max(ra.size(), rb.size());
  for (std::size_t i = 0; i < rows; ++i) {
    csv << i << ',';
    csv << (i < ra.size() ? fmt(ra[i].f) + ',' + fmt(ra[i].time_s) : std::string(",")) << ',';
    csv << (i < rb.size() ? fmt(rb[i].f) + ',' + fmt(rb[i].time_s) : std::string(",")) << '\n';
  }
  s.csv = csv.str();

  std::ostringstream text;
  text << "instance_hash=" << hex(s.a.instance_hash) << '\n';
  text << "a=" << s.a.problem_name << " exit=" << s.a.exit_code << '\n';
  text << "b=" << s.b.problem_name << " exit=" << s.b.exit_code << '\n';
  s.shared_rows = std::min(ra.size(), rb.size());
  if (s.shared_rows == 0) {
    s.winner = "tie";
  } else {
    s.f_a = ra[s.shared_rows - 1].f;
    s.f_b = rb[s.shared_rows - 1].f;
    const double gap =
        std::abs(s.f_a - s.f_b) / std::max({1.0, std::abs(s.f_a), std::abs(s.f_b)});
    s.winner = gap < 1e-12 ? "tie" : (s.f_a < s.f_b ? "a" : "b");
  }
  text << "shared_iterations=" << (s.shared_rows == 0 ? 0 : s.shared_rows - 1) << '\n';
  text << "f_a=" << fmt(s.f_a) << " f_b=" << fmt(s.f_b) << '\n';
  text << "winner=" << s.winner << '\n';
  s.text = text.str();
  return s;
}

}  // namespace bregmin
