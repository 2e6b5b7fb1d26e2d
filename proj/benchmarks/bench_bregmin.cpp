#include "bregmin/problems.hpp"
#include "bregmin/solver.hpp"
#include "bregmin/subsolve.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace bregmin;

namespace {

Vec gaussian(std::uint64_t seed, Eigen::Index n) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = g(rng);
  return v;
}

void BM_KernelBregman(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  const KernelSpec k{KernelKind::Burg, n};
  const Vec x = gaussian(1, n).cwiseAbs().array() + 0.1;
  const Vec y = gaussian(2, n).cwiseAbs().array() + 0.1;
  for (auto _ : state) benchmark::DoNotOptimize(bregman(k, x, y));
}
BENCHMARK(BM_KernelBregman)->Arg(10)->Arg(1000);

void BM_QuarticStep(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  SubproblemSpec spec;
  spec.kernel = {KernelKind::QuarticPlusQuadratic, n};
  spec.model_center = gaussian(3, n);
  spec.linear_part = gaussian(4, n);
  spec.tau = 0.5;
  spec.reg = {RegKind::L1, 0.1};
  for (auto _ : state) benchmark::DoNotOptimize(bpg_step_quartic(spec));
}
BENCHMARK(BM_QuarticStep)->Arg(10)->Arg(1000);

void BM_PoissonStep(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  SubproblemSpec spec;
  spec.kernel = {KernelKind::Burg, n};
  spec.model_center = Vec::Ones(n);
  spec.linear_part = 0.1 * gaussian(5, n);
  spec.tau = 0.5;
  spec.box_floor = 1e-8;
  for (auto _ : state) benchmark::DoNotOptimize(poisson_step(spec, *spec.linear_part));
}
BENCHMARK(BM_PoissonStep)->Arg(10)->Arg(1000);

void BM_PdhgM2(benchmark::State& state) {
  const auto inst = gen_phase_retrieval(0, state.range(0), 10, {RegKind::L1, 0.1});
  const ModelProblem p = make_phase_retrieval_m2(inst);
  const SubproblemSpec spec = p.subproblem(gaussian(6, 10), 0.99 / p.map_upper);
  for (auto _ : state) benchmark::DoNotOptimize(pdhg_solve(spec, PdhgConfig{}));
}
BENCHMARK(BM_PdhgM2)->Arg(50)->Arg(200)->Unit(benchmark::kMicrosecond);

void BM_Run(benchmark::State& state) {
  const auto family = static_cast<ProblemFamily>(state.range(0));
  ModelProblem p;
  Vec x0;
  if (family == ProblemFamily::Poisson) {
    p = make_poisson(gen_poisson(0, 50, 10, 1e-8, {}));
    x0 = Vec::Ones(10);
  } else {
    const auto inst = gen_phase_retrieval(0, 50, 10, {});
    p = family == ProblemFamily::PhaseRetrievalM1   ? make_phase_retrieval_m1(inst)
        : family == ProblemFamily::PhaseRetrievalM2 ? make_phase_retrieval_m2(inst)
                                                    : make_robust_pr(inst);
    x0 = gaussian(0, 10);
  }
  SolverConfig cfg;
  cfg.max_iters = 100;
  cfg.record_iterates = false;
  for (auto _ : state) benchmark::DoNotOptimize(run(p, cfg, x0));
  state.SetLabel(std::string(to_string(family)));
}
BENCHMARK(BM_Run)
    ->DenseRange(0, 3)
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
