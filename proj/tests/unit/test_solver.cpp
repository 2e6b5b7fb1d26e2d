#include "bregmin/problems.hpp"
#include "bregmin/solver.hpp"
#include "synthetic.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace bregmin;
using namespace bregmin::testing;

namespace {

SolverConfig iters(std::size_t n) {
  SolverConfig cfg;
  cfg.max_iters = n;
  return cfg;
}

Vec standard_normal_start(std::uint64_t seed, Eigen::Index n) {
  std::mt19937_64 rng(seed);
  return normal_vec(rng, n);
}

}  // namespace

TEST_CASE("lyapunov basics") {
  const auto pr = gen_phase_retrieval(0, 20, 4, {RegKind::L1, 0.1});
  const ModelProblem p = make_phase_retrieval_m1(pr);
  const Vec c = standard_normal_start(1, 4);
  const Vec x = standard_normal_start(2, 4);
  CHECK(lyapunov(p, c, c, p.map_upper) == doctest::Approx(p.objective(c)));
  CHECK(lyapunov(p, x, c, 0.0) == model_value(p, x, c));
  // MAP makes F(x, c) an upper bound on f(x).
  std::mt19937_64 rng(67);
  for (int s = 0; s < 200; ++s) {
    const Vec a = normal_vec(rng, 4, 2.0);
    const Vec b = normal_vec(rng, 4, 2.0);
    const double f = p.objective(a);
    CHECK(lyapunov(p, a, b, p.map_upper) >= f - 1e-8 * (1.0 + std::abs(f)));
  }
}

TEST_CASE("run validates its inputs") {
  const ModelProblem p = make_poisson(gen_poisson(0, 10, 3, 1e-8, {}));
  CHECK_THROWS_AS(run(p, iters(5), Vec::Constant(3, -1.0)), DomainError);
  CHECK_THROWS_AS(run(p, iters(5), Vec::Ones(4)), DomainError);
  SolverConfig bad;
  bad.tau_fraction = 1.0;
  CHECK_THROWS_AS(run(p, bad, Vec::Ones(3)), std::invalid_argument);
}

TEST_CASE("zero budget records only the start") {
  const ModelProblem p = make_poisson(gen_poisson(0, 10, 3, 1e-8, {}));
  const IterateTrace t = run(p, iters(0), Vec::Ones(3));
  REQUIRE(t.rows.size() == 1);
  CHECK(t.rows[0].lyapunov == t.rows[0].f);
  CHECK(t.rows[0].breg_step == 0.0);
}

TEST_CASE("a fixed point of the update stops after one step") {
  const PoissonInstance inst = gen_poisson(3, 20, 5, 1e-8, {});
  const ModelProblem p = make_poisson(inst);
  const IterateTrace t = run(p, iters(100), inst.planted);
  REQUIRE(t.rows.size() == 2);
  CHECK((t.final_x - inst.planted).norm() <= 1e-10);
  const CertificateReport c = descent_certificate(p, t, 0.0);
  CHECK(c.all_pass());
  CHECK(c.function_descent.worst_margin == doctest::Approx(0.0));
  CHECK(c.lyapunov_descent.worst_margin == doctest::Approx(0.0));
  CHECK(relative_error_diagnostic(p, t) == 0.0);
}

TEST_CASE("phase retrieval M1 seed 0 decreases and certifies") {
  const auto inst = gen_phase_retrieval(0, 50, 10, {});
  const ModelProblem p = make_phase_retrieval_m1(inst);
  const IterateTrace t = run(p, iters(500), standard_normal_start(0, 10));
  REQUIRE(t.rows.size() >= 2);
  CHECK(t.rows[1].f < t.rows[0].f);
  CHECK(t.rows.size() <= 501);
  const CertificateReport c = descent_certificate(p, t, default_slack(t));
  CHECK(c.function_descent.pass);
  CHECK(c.lyapunov_descent.pass);
  CHECK(c.complexity.pass);
  // Sandwich: f(x_k) <= F(x_k, x_{k-1}) <= f(x_k) + (L + L_lower) D_k.
  for (std::size_t j = 1; j < t.rows.size(); ++j) {
    const auto& r = t.rows[j];
    const double tol = 1e-9 * (1.0 + std::abs(r.f));
    CHECK(r.f <= r.lyapunov + tol);
    CHECK(r.lyapunov <= r.f + (r.L + p.map_lower) * r.breg_step + tol);
  }
}

TEST_CASE("poisson iterates stay in C_eps") {
  const auto inst = gen_poisson(0, 50, 10, 1e-8, {RegKind::L1, 0.1});
  const ModelProblem p = make_poisson(inst);
  const IterateTrace t = run(p, iters(300), Vec::Ones(10));
  for (const Vec& x : t.iterates) CHECK((x.array() >= inst.epsilon).all());
  CHECK(descent_certificate(p, t, default_slack(t)).all_pass());
  const double C = relative_error_diagnostic(p, t);
  CHECK(std::isfinite(C));
  CHECK(C > 0.0);
}

TEST_CASE("relative error diagnostic needs a differentiable model") {
  const auto inst = gen_phase_retrieval(0, 10, 3, {});
  const ModelProblem p = make_robust_pr(inst);
  const IterateTrace t = run(p, iters(3), standard_normal_start(0, 3));
  CHECK_THROWS_AS(relative_error_diagnostic(p, t), std::invalid_argument);
}

TEST_CASE("runs are bitwise reproducible") {
  const auto inst = gen_phase_retrieval(4, 30, 6, {RegKind::L1, 0.1});
  const ModelProblem p = make_phase_retrieval_m2(inst);
  const Vec x0 = standard_normal_start(4, 6);
  std::ostringstream a, b;
  write_trace_csv(a, run(p, iters(40), x0));
  write_trace_csv(b, run(p, iters(40), x0));
  CHECK(a.str() == b.str());
}

TEST_CASE("trace CSV format") {
  const ModelProblem p = make_poisson(gen_poisson(0, 10, 3, 1e-8, {}));
  std::ostringstream out;
  write_trace_csv(out, run(p, iters(2), Vec::Ones(3)));
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "iter,time_s,f,lyapunov,breg_step,L_k,tau_k,inner_residual");
  std::getline(in, line);
  CHECK(line.rfind("0,0,", 0) == 0);
  int rows = 1;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 3);
}

TEST_CASE("backtrack_L accepts at once when the test already holds") {
  const Vec b = (Vec(2) << 0.5, -1.0).finished();
  const ModelProblem p = scaled_kernel_problem(3.0, b);
  const Vec x = (Vec(2) << 1.0, 2.0).finished();
  const auto provider = [&](double L) {
    return solve_subproblem(p.subproblem_kind, p.subproblem(x, 0.99 / L), {});
  };
  const BacktrackResult r = backtrack_L(p, x, provider, 5.0, 2.0);
  CHECK(r.L == 5.0);
  CHECK(r.scalings == 0);
  CHECK((r.next.x - provider(5.0).x).norm() == 0.0);
}

TEST_CASE("backtrack_L finds a known constant") {
  const double L_star = 7.0;
  const Vec b = (Vec(3) << 0.5, -1.0, 2.0).finished();
  const ModelProblem p = scaled_kernel_problem(L_star, b);
  const Vec x = (Vec(3) << 1.0, 2.0, -0.5).finished();
  const auto provider = [&](double L) {
    return solve_subproblem(p.subproblem_kind, p.subproblem(x, 0.99 / L), {});
  };
  const BacktrackResult r = backtrack_L(p, x, provider, L_star / 8.0, 2.0);
  CHECK(r.L <= 2.0 * L_star);
  CHECK(r.L >= L_star);
  CHECK(r.scalings <= 4);
  CHECK_THROWS_AS(backtrack_L(p, x, provider, 1e-30, 1.0 + 1e-9), BacktrackingFailed);
  CHECK_THROWS_AS(backtrack_L(p, x, provider, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("backtracking runs keep L nondecreasing") {
  const auto inst = gen_poisson(1, 50, 10, 1e-8, {});
  const ModelProblem p = make_poisson(inst);
  SolverConfig cfg = iters(200);
  cfg.backtracking = true;
  cfg.L_init = 1.0;
  const IterateTrace t = run(p, cfg, Vec::Ones(10));
  for (std::size_t j = 1; j < t.rows.size(); ++j) CHECK(t.rows[j].L >= t.rows[j - 1].L);
  CHECK(t.rows.back().L <= 2.0 * p.map_upper);
  CHECK(descent_certificate(p, t, default_slack(t)).all_pass());
}

TEST_CASE("solver failures carry the iteration index") {
  const Vec b = (Vec(2) << 0.5, -1.0).finished();
  const ModelProblem p = scaled_kernel_problem(3.0, b);
  SolverConfig cfg = iters(10);
  cfg.backtracking = true;
  cfg.L_init = 1e-30;
  cfg.nu = 1.0 + 1e-9;
  try {
    run(p, cfg, Vec::Ones(2));
    FAIL("expected a solver error");
  } catch (const SolverError& e) {
    CHECK(e.iteration() == 1);
  }
}

TEST_CASE("certificate flags a violated descent") {
  const auto inst = gen_phase_retrieval(0, 20, 4, {});
  const ModelProblem p = make_phase_retrieval_m1(inst);
  IterateTrace t = run(p, iters(5), standard_normal_start(0, 4));
  t.rows[3].f += 1.0;
  t.rows[3].lyapunov += 1.0;
  const CertificateReport c = descent_certificate(p, t, default_slack(t));
  CHECK_FALSE(c.function_descent.pass);
  CHECK_FALSE(c.lyapunov_descent.pass);
  CHECK(c.lyapunov_descent.worst_index == 3);
  CHECK_FALSE(c.all_pass());
}
