#pragma once

// Solvers for one Model BPG update
//
//   x+ = argmin_x  model(x; center) + (1/tau) D_h(x, center)
//
// The model part is described solver-agnostically by SubproblemSpec:
//   <linear_part, x - center>                    (additive-composite models)
// + weight * ||K x + offsets||_1                 (piecewise-linear models)
// + R(x)
// + indicator{x >= box_floor}                    (Poisson C_eps constraint)
//
// Constants of the model (f(center) etc.) are dropped; they do not move the
// minimizer.

#include "bregmin/kernel.hpp"
#include "bregmin/types.hpp"

#include <optional>
#include <string_view>
#include <vector>

namespace bregmin {

struct AffineRows {
  Mat K;          // M x N
  Vec offsets;    // M
  double weight;  // every row enters as weight * |K_i x + offsets_i|
};

struct SubproblemSpec {
  Vec model_center;
  double tau = 1.0;
  KernelSpec kernel;
  std::optional<Vec> linear_part;
  std::optional<AffineRows> affine_rows;
  Regularizer reg;
  std::optional<double> box_floor;
};

enum class SubproblemKind { ClosedFormQuartic, ClosedFormBurg, PiecewiseLinearPDHG };

std::string_view to_string(SubproblemKind kind);

struct PdhgConfig {
  double tol = 1e-9;
  int max_iters = 2000;
  int power_iters = 30;
  double step_scale = 0.95;
  double balance = 10.0;  // dual step relative to mu/|K|^2; 0 gives equal steps
  bool record_history = false;

  bool operator==(const PdhgConfig&) const = default;
};

struct PdhgResult {
  Vec x;
  double residual = 0.0;
  int iterations = 0;
  std::vector<double> residual_history;  // filled when PdhgConfig::record_history
};

struct SubproblemResult {
  Vec x;
  double inner_residual = 0.0;
  int inner_iterations = 0;
};

/// Value of the subproblem objective at x (+inf outside the box or kernel domain).
double subproblem_objective(const SubproblemSpec& spec, const Vec& x);

/// Elementwise sign(v) * max(|v| - gamma, 0).
Vec prox_l1(const Vec& v, double gamma);

/// Unique positive root of s t^3 + t - 1 = 0 for s >= 0; lies in (0, 1].
double quartic_radial_scale(double s);

/// Solves (c |x|^2 + beta) x + gamma d||x||_1 \ni q for c in {0, 1}, beta > 0.
/// This is the resolvent shared by every quartic/Euclidean step here.
Vec radial_resolvent(const Vec& q, double quartic_coeff, double beta, double gamma);

/// Exact minimizer for h = 1/4|x|^4 + 1/2|x|^2 with a linear model part.
Vec bpg_step_quartic(const SubproblemSpec& spec);

/// Exact minimizer for Burg's entropy with a linear model part on C_eps.
/// Throws StepSizeTooLarge when tau violates the formula's admissibility.
Vec poisson_step(const SubproblemSpec& spec, const Vec& grad);

/// Primal-dual hybrid gradient for piecewise-linear models.
PdhgResult pdhg_solve(const SubproblemSpec& spec, const PdhgConfig& inner);

/// Dispatches to the solver for `kind`.
SubproblemResult solve_subproblem(SubproblemKind kind, const SubproblemSpec& spec,
                                  const PdhgConfig& inner);

/// High-accuracy reference minimizer for tests (primal-dual interior point on
/// the epigraph reformulation). `tol` bounds the final surrogate duality gap.
Vec oracle_minimize(const SubproblemSpec& spec, double tol = 1e-12);

}  // namespace bregmin
