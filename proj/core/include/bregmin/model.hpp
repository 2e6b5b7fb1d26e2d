#pragma once

// Model functions f(x; center) and the two-sided Model Approximation Property
//
//   -L_lower D_h(x, c) <= f(x) - f(x; c) <= L_upper D_h(x, c).
//
// The samplers here are falsification tests of that universal statement, not
// proofs of it.

#include "bregmin/kernel.hpp"
#include "bregmin/subsolve.hpp"
#include "bregmin/types.hpp"

#include <cstdint>
#include <functional>
#include <string>

namespace bregmin {

struct ModelProblem {
  std::string name;
  KernelSpec kernel;
  double map_upper = 1.0;
  double map_lower = 1.0;
  SubproblemKind subproblem_kind = SubproblemKind::ClosedFormQuartic;

  std::function<double(const Vec&)> objective;
  std::function<double(const Vec& x, const Vec& center)> model;
  /// d/dcenter of model(x; center); only set for differentiable families.
  std::function<Vec(const Vec& x, const Vec& center)> model_subgrad_center;
  /// Subproblem data for the update at `center` with step `tau`.
  std::function<SubproblemSpec(const Vec& center, double tau)> subproblem;
  /// Extra domain constraints of f beyond dom h (e.g. C_eps). Empty = none.
  std::function<bool(const Vec&)> feasible;
  /// Center of the ball the MAP sampler draws from.
  Vec sampling_origin;
};

/// Throws std::invalid_argument when the constants or callbacks are inconsistent.
void validate(const ModelProblem& p);

/// True when x is in dom f (kernel domain plus the problem's own constraints).
bool in_problem_domain(const ModelProblem& p, const Vec& x);

/// f(x; center); rejects x outside dom f and centers outside int dom h.
double model_value(const ModelProblem& p, const Vec& x, const Vec& center);

struct MapResidualReport {
  std::size_t samples = 0;
  double worst_upper_violation = 0.0;  // max(0, f - model - L_upper D) / (1 + |f|)
  double worst_lower_violation = 0.0;  // max(0, -L_lower D - (f - model)) / (1 + |f|)
};

MapResidualReport map_residual_check(const ModelProblem& p, std::size_t n_samples, double radius,
                                     std::uint64_t seed);

/// Running example f(x) = | |x|^4 - 1 | and its model |g(c) + <grad g(c), x - c>|.
double running_example_objective(const Vec& x);
double running_example_model(const Vec& x, const Vec& center);
/// omega_c(t) = 24 |c|^2 t^2 + 8 t^4 with t = |x - c|.
double growth_bound_running_example(const Vec& x, const Vec& center);
/// Running example as a ModelProblem: quartic kernel, MAP constant 4 on both sides.
ModelProblem make_running_example_problem(Eigen::Index dimension);

/// max_d |[f(c + s d) - f(c)] - [model(c + s d; c) - model(c; c)]| / s over
/// `directions` random unit directions d.
double first_order_consistency(const ModelProblem& p, const Vec& center, std::size_t directions,
                               double step, std::uint64_t seed = 0);

}  // namespace bregmin
