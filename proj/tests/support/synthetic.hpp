#pragma once

#include "bregmin/model.hpp"

namespace bregmin::testing {

/// f(x) = a h(x) + <b, x> with the quartic kernel h and its linearization as the
/// model. f - model = a D_h exactly, so the MAP constant is a on both sides and
/// no smaller constant works.
inline ModelProblem scaled_kernel_problem(double a, const Vec& b) {
  ModelProblem p;
  p.name = "scaled_kernel";
  p.kernel = {KernelKind::QuarticPlusQuadratic, b.size()};
  p.map_upper = a;
  p.map_lower = a;
  p.subproblem_kind = SubproblemKind::ClosedFormQuartic;
  const KernelSpec k = p.kernel;
  p.objective = [k, a, b](const Vec& x) { return a * kernel_value(k, x) + b.dot(x); };
  p.model = [k, a, b](const Vec& x, const Vec& c) {
    return a * kernel_value(k, c) + b.dot(c) + (a * kernel_grad(k, c) + b).dot(x - c);
  };
  p.model_subgrad_center = [k, a](const Vec& x, const Vec& c) {
    return a * kernel_hess_apply(k, c, x - c);
  };
  p.subproblem = [k, a, b](const Vec& c, double tau) {
    SubproblemSpec spec;
    spec.model_center = c;
    spec.tau = tau;
    spec.kernel = k;
    spec.linear_part = a * kernel_grad(k, c) + b;
    return spec;
  };
  p.sampling_origin = Vec::Zero(b.size());
  return p;
}

}  // namespace bregmin::testing
