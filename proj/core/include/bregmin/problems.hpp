#pragma once

// Problem families: standard phase retrieval (models M1 and M2), robust phase
// retrieval and Poisson linear inverse problems on C_eps = {x : x >= eps}.

#include "bregmin/model.hpp"
#include "bregmin/types.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace bregmin {

struct PhaseRetrievalInstance {
  std::vector<Mat> A;  // symmetric PSD, N x N
  Vec b;
  Regularizer reg;
  Vec planted;  // hidden signal when generated; empty otherwise
};

struct PoissonInstance {
  Mat a;  // row i is a_i (M x N), nonnegative
  Vec b;  // positive counts
  double epsilon = 1e-8;
  Regularizer reg;
  Vec planted;
};

/// Throws std::invalid_argument on a broken invariant.
void validate(const PhaseRetrievalInstance& inst);
void validate(const PoissonInstance& inst);

/// Rank-one Gaussian sampling matrices A_i = g_i g_i^T and b_i = x*^T A_i x*,
/// optionally perturbed by multiplicative noise (1 + noise * n_i).
PhaseRetrievalInstance gen_phase_retrieval(std::uint64_t seed, Eigen::Index M, Eigen::Index N,
                                           Regularizer reg, double noise = 0.0);

double phase_retrieval_objective(const PhaseRetrievalInstance& inst, const Vec& x);
double phase_retrieval_smooth_part(const PhaseRetrievalInstance& inst, const Vec& x);
Vec phase_retrieval_grad_smooth(const PhaseRetrievalInstance& inst, const Vec& x);
Vec phase_retrieval_hess_smooth_apply(const PhaseRetrievalInstance& inst, const Vec& x,
                                      const Vec& v);
/// M1: f1(c) + <grad f1(c), x - c> + R(x).
double model_m1(const PhaseRetrievalInstance& inst, const Vec& x, const Vec& center);
/// M2: (1/M) sum |r_i^2 + 2 r_i <2 A_i c, x - c>| + R(x), r_i = c^T A_i c - b_i.
double model_m2(const PhaseRetrievalInstance& inst, const Vec& x, const Vec& center);
/// sum_i (3 ||A_i||_F^2 + ||A_i||_F |b_i|).
double phase_retrieval_L0(const PhaseRetrievalInstance& inst);

double robust_pr_objective(const PhaseRetrievalInstance& inst, const Vec& x);
double robust_pr_model(const PhaseRetrievalInstance& inst, const Vec& x, const Vec& center);
/// 2 sum_i lambda_max(A_i) / M.
double robust_pr_L1(const PhaseRetrievalInstance& inst);

/// a_ij ~ U[0,1] (rows and columns repaired to be nonzero), planted x* ~ U[0.5, 1.5],
/// b_i = <a_i, x*> (1 + noise * n_i) clipped to stay positive.
PoissonInstance gen_poisson(std::uint64_t seed, Eigen::Index M, Eigen::Index N, double epsilon,
                            Regularizer reg, double noise = 0.0);

bool in_c_eps(const PoissonInstance& inst, const Vec& x);
/// f1(x) = sum_i <a_i, x> - b_i log <a_i, x>; x must lie in C_eps.
double poisson_smooth_part(const PoissonInstance& inst, const Vec& x);
/// f1(x) + R(x); the C_eps indicator is enforced by rejecting x.
double poisson_objective(const PoissonInstance& inst, const Vec& x);
Vec poisson_grad_smooth(const PoissonInstance& inst, const Vec& x);
Vec poisson_hess_smooth_apply(const PoissonInstance& inst, const Vec& x, const Vec& v);
double poisson_model(const PoissonInstance& inst, const Vec& x, const Vec& center);
/// sum_i b_i.
double poisson_L(const PoissonInstance& inst);

enum class ProblemFamily { PhaseRetrievalM1, PhaseRetrievalM2, RobustPR, Poisson };

std::string_view to_string(ProblemFamily family);
ProblemFamily problem_family_from_string(std::string_view name);

ModelProblem make_phase_retrieval_m1(const PhaseRetrievalInstance& inst);
ModelProblem make_phase_retrieval_m2(const PhaseRetrievalInstance& inst);
ModelProblem make_robust_pr(const PhaseRetrievalInstance& inst);
ModelProblem make_poisson(const PoissonInstance& inst);

/// Instance documents for experiment replay: matrices row-major, all fields of
/// the instance types.
std::string to_json(const PhaseRetrievalInstance& inst);
std::string to_json(const PoissonInstance& inst);
PhaseRetrievalInstance phase_retrieval_from_json(std::string_view text);
PoissonInstance poisson_from_json(std::string_view text);

}  // namespace bregmin
