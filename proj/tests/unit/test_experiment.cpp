#include "bregmin/experiment.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace bregmin;

TEST_CASE("minimal config gets the default table") {
  const ExperimentConfig cfg = parse_config(R"({"problem": "poisson", "seed": 0})");
  CHECK(cfg.problem == ProblemFamily::Poisson);
  CHECK(cfg.reg == RegKind::None);
  CHECK(cfg.lambda == 0.1);
  CHECK(cfg.epsilon == 1e-8);
  CHECK(cfg.M == 50);
  CHECK(cfg.N == 10);
  CHECK(cfg.solver.tau_fraction == 0.99);
  CHECK(cfg.solver.max_iters == 1000);
  CHECK(cfg.solver.move_tol == 1e-9);
  CHECK(cfg.solver.inner.tol == 1e-9);
  CHECK(cfg.solver.inner.max_iters == 2000);
}

TEST_CASE("flags override file values") {
  ConfigOverrides o;
  o.lambda = 0.5;
  o.problem = "robust_pr";
  o.max_iters = 7;
  o.backtracking = true;
  const ExperimentConfig cfg =
      parse_config(R"({"problem": "poisson", "lambda": 0.1, "reg": "l1"})", o);
  CHECK(cfg.lambda == 0.5);
  CHECK(cfg.problem == ProblemFamily::RobustPR);
  CHECK(cfg.solver.max_iters == 7);
  CHECK(cfg.solver.backtracking);
}

TEST_CASE("config errors name the field") {
  auto message = [](const char* text) {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message(R"({"problem": "lasso"})").find("problem") != std::string::npos);
  CHECK(message(R"({"problem": "poisson", "lamda": 1})").find("lamda") != std::string::npos);
  CHECK(message(R"({"problem": "poisson", "solver": {"tau": 1}})").find("solver.tau") !=
        std::string::npos);
  CHECK(message(R"({"problem": "poisson", "reg": "l3"})").find("reg") != std::string::npos);
  CHECK(message(R"({"problem": "poisson", "M": -1})").find("M") != std::string::npos);
  CHECK(message(R"({"problem": "poisson", "solver": {"tau_fraction": 1.5}})").find("solver") !=
        std::string::npos);
  CHECK(message(R"({"seed": 1})").find("problem") != std::string::npos);
  CHECK(message(R"({"problem": "poisson", "seed_count": 3})").find("seed_count") !=
        std::string::npos);
  CHECK(message("not json").find("JSON") != std::string::npos);
}

TEST_CASE("serialize and parse round trip") {
  ExperimentConfig cfg;
  cfg.problem = ProblemFamily::PhaseRetrievalM2;
  cfg.reg = RegKind::SquaredL2;
  cfg.lambda = 0.123456789012345678;
  cfg.M = 17;
  cfg.N = 4;
  cfg.seed = 99;
  cfg.noise = 0.01;
  cfg.solver.tau_fraction = 0.5;
  cfg.solver.backtracking = true;
  cfg.solver.nu = 3.0;
  cfg.solver.inner.tol = 1e-10;
  cfg.solver.inner.balance = 0.0;
  cfg.solver.seed = 99;
  cfg.map_constant_scale = 2.0;
  CHECK(parse_config(serialize_config(cfg)) == cfg);
}

TEST_CASE("experiments on the same seed share their instance") {
  ExperimentConfig a = parse_config(R"({"problem": "phase_retrieval_m1", "M": 20, "N": 4})");
  ExperimentConfig b = a;
  b.problem = ProblemFamily::PhaseRetrievalM2;
  CHECK(build_experiment(a).instance_hash == build_experiment(b).instance_hash);
  CHECK((build_experiment(a).x0 - build_experiment(b).x0).norm() == 0.0);
  b.seed = 1;
  CHECK(build_experiment(a).instance_hash != build_experiment(b).instance_hash);
}

TEST_CASE("fnv1a64 reference values") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("poisson experiment passes its certificates") {
  const ExperimentConfig cfg =
      parse_config(R"({"problem": "poisson", "seed": 0, "solver": {"max_iters": 300}})");
  const ExperimentResult r = run_experiment(cfg);
  CHECK(r.exit_code == kExitOk);
  CHECK(r.trace.rows.size() <= 301);
  REQUIRE(r.certificate);
  CHECK(r.certificate->all_pass());
  std::ostringstream out;
  write_experiment_csv(out, r);
  CHECK(out.str().find("# certificates:\n") != std::string::npos);
  CHECK(out.str().find("# status=pass\n") != std::string::npos);
}

TEST_CASE("m2 with l1 mostly meets the inner tolerance") {
  const ExperimentConfig cfg = parse_config(
      R"({"problem": "phase_retrieval_m2", "reg": "l1", "seed": 0, "solver": {"max_iters": 300}})");
  const ExperimentResult r = run_experiment(cfg);
  CHECK(r.exit_code == kExitOk);
  std::size_t within = 0;
  for (const auto& row : r.trace.rows) within += row.inner_residual <= 1e-9;
  CHECK(static_cast<double>(within) >= 0.95 * static_cast<double>(r.trace.rows.size()));
}

TEST_CASE("underestimated constants fail the certificates") {
  const ExperimentConfig cfg = parse_config(
      R"({"problem": "phase_retrieval_m1", "M": 20, "N": 4, "map_constant_scale": 1e-4,
          "solver": {"max_iters": 20}})");
  const ExperimentResult r = run_experiment(cfg);
  CHECK(r.exit_code == kExitCertificateFailure);
  CHECK(r.message.find("margin") != std::string::npos);
}

TEST_CASE("atomic_write replaces the target") {
  const auto dir = std::filesystem::temp_directory_path() / "bregmin_atomic_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "out.csv").string();
  atomic_write(path, "first");
  atomic_write(path, "second");
  std::ifstream in(path);
  std::string content;
  std::getline(in, content);
  CHECK(content == "second");
  CHECK_FALSE(std::filesystem::exists(path + ".tmp"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("seed output paths") {
  CHECK(seed_output_path("runs/out.csv", 3) == "runs/out.seed3.csv");
  CHECK(seed_output_path("trace", 0) == "trace.seed0");
}

TEST_CASE("compare requires matching instances") {
  ExperimentConfig a = parse_config(R"({"problem": "phase_retrieval_m1", "M": 20, "N": 4,
                                        "solver": {"max_iters": 30}})");
  ExperimentConfig b = a;
  b.problem = ProblemFamily::PhaseRetrievalM2;
  const CompareSummary s = compare_models(a, b);
  CHECK(s.a.instance_hash == s.b.instance_hash);
  CHECK((s.winner == "a" || s.winner == "b" || s.winner == "tie"));
  CHECK(s.text.find("winner=") != std::string::npos);
  CHECK(s.csv.rfind("iter,f_a,time_a,f_b,time_b\n", 0) == 0);
  b.seed = 5;
  CHECK_THROWS_AS(compare_models(a, b), ConfigError);
  b = a;
  b.problem = ProblemFamily::Poisson;
  CHECK_THROWS_AS(compare_models(a, b), ConfigError);
}

TEST_CASE("identical models tie") {
  ExperimentConfig a = parse_config(R"({"problem": "robust_pr", "M": 20, "N": 4,
                                        "solver": {"max_iters": 10}})");
  CHECK(compare_models(a, a).winner == "tie");
}
