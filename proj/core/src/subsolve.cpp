#include "bregmin/subsolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace bregmin {

std::string_view to_string(SubproblemKind kind) {
  switch (kind) {
    case SubproblemKind::ClosedFormQuartic: return "closed_form_quartic";
    case SubproblemKind::ClosedFormBurg: return "closed_form_burg";
    case SubproblemKind::PiecewiseLinearPDHG: return "pdhg";
  }
  return "unknown";
}

double subproblem_objective(const SubproblemSpec& spec, const Vec& x) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (spec.box_floor && (x.array() < *spec.box_floor).any()) return inf;
  if (!in_domain(spec.kernel, x)) return inf;
  double value = spec.reg.value(x) + bregman(spec.kernel, x, spec.model_center) / spec.tau;
  if (spec.linear_part) value += spec.linear_part->dot(x - spec.model_center);
  if (spec.affine_rows) {
    const auto& rows = *spec.affine_rows;
    value += rows.weight * (rows.K * x + rows.offsets).lpNorm<1>();
  }
  return value;
}

Vec prox_l1(const Vec& v, double gamma) {
  if (gamma < 0.0) throw std::invalid_argument("prox_l1: gamma must be nonnegative");
  return v.unaryExpr([gamma](double vi) {
    const double mag = std::abs(vi) - gamma;
    return mag > 0.0 ? std::copysign(mag, vi) : 0.0;
  });
}

double quartic_radial_scale(double s) {
  if (!(s >= 0.0) || !std::isfinite(s))
    throw std::invalid_argument("quartic_radial_scale: s must be finite and nonnegative");
  if (s == 0.0) return 1.0;
  auto phi = [s](double t) { return s * t * t * t + t - 1.0; };
  // phi is increasing and convex on t > 0; the root lies in (0, min(1, s^(-1/3))].
  double lo = 0.0;
  double hi = std::min(1.0, std::cbrt(1.0 / s));
  double t = hi;
  for (int it = 0; it < 200; ++it) {
    const double value = phi(t);
    if (value == 0.0) return t;
    if (value > 0.0) hi = t; else lo = t;
    double next = t - value / (3.0 * s * t * t + 1.0);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - t) <= 1e-16 * std::max(t, 1e-300)) return next;
    t = next;
  }
  return t;
}

Vec radial_resolvent(const Vec& q, double quartic_coeff, double beta, double gamma) {
  const Vec p = gamma > 0.0 ? prox_l1(q, gamma) : q;
  if (quartic_coeff == 0.0) return p / beta;
  const double s = quartic_coeff * p.squaredNorm() / (beta * beta * beta);
  return (quartic_radial_scale(s) / beta) * p;
}

Vec bpg_step_quartic(const SubproblemSpec& spec) {
  if (spec.kernel.kind != KernelKind::QuarticPlusQuadratic)
    throw std::invalid_argument("bpg_step_quartic: kernel must be quartic");
  if (!spec.linear_part) throw std::invalid_argument("bpg_step_quartic: linear_part missing");
  if (spec.affine_rows || spec.box_floor)
    throw std::invalid_argument("bpg_step_quartic: affine rows and box floors are unsupported");
  if (!(spec.tau > 0.0)) throw std::invalid_argument("bpg_step_quartic: tau must be positive");
  const double tau = spec.tau;
  const Vec q = kernel_grad(spec.kernel, spec.model_center) - tau * *spec.linear_part;
  switch (spec.reg.kind) {
    case RegKind::None: return radial_resolvent(q, 1.0, 1.0, 0.0);
    case RegKind::L1: return radial_resolvent(q, 1.0, 1.0, tau * spec.reg.lambda);
    case RegKind::SquaredL2: return radial_resolvent(q, 1.0, 1.0 + tau * spec.reg.lambda, 0.0);
  }
  return q;
}

Vec poisson_step(const SubproblemSpec& spec, const Vec& grad) {
  if (spec.kernel.kind != KernelKind::Burg)
    throw std::invalid_argument("poisson_step: kernel must be burg");
  if (!spec.box_floor || !(*spec.box_floor > 0.0))
    throw std::invalid_argument("poisson_step: a positive box floor (epsilon) is required");
  if (!(spec.tau > 0.0)) throw std::invalid_argument("poisson_step: tau must be positive");
  const double eps = *spec.box_floor;
  const double tau = spec.tau;
  const double lambda = spec.reg.lambda;
  const Vec& xc = spec.model_center;
  if (grad.size() != xc.size()) throw std::invalid_argument("poisson_step: gradient size mismatch");
  if ((xc.array() < eps).any()) throw DomainError("poisson_step: model center outside C_eps");

  auto inadmissible = [&](Eigen::Index i, double denom) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "poisson_step: tau = " << tau << " inadmissible at coordinate " << i
        << " (denominator " << denom << " <= 0)";
    throw StepSizeTooLarge(msg.str());
  };

  Vec next(xc.size());
  for (Eigen::Index i = 0; i < xc.size(); ++i) {
    const double x = xc[i];
    const double a = 1.0 + tau * grad[i] * x;
    double value = 0.0;
    switch (spec.reg.kind) {
      case RegKind::None:
        if (!(a > 0.0)) inadmissible(i, a);
        value = x / a;
        break;
      case RegKind::L1: {
        const double d = a + tau * lambda * x;
        if (!(d > 0.0)) inadmissible(i, d);
        value = x / d;
        break;
      }
      case RegKind::SquaredL2: {
        const double guard = a + tau * lambda * eps;
        if (!(guard > 0.0)) inadmissible(i, guard);
        // Positive root of lambda tau x z^2 + a z - x = 0, in the form that
        // avoids cancellation when a > 0.
        const double root = std::sqrt(a * a + 4.0 * lambda * tau * x * x);
        value = a > 0.0 ? 2.0 * x / (root + a) : (root - a) / (2.0 * lambda * tau * x);
        break;
      }
    }
    next[i] = std::max(eps, value);
  }
  return next;
}

namespace {

double operator_norm_estimate(const Mat& K, int power_iters) {
  if (K.size() == 0) return 0.0;
  Vec v = Vec::Ones(K.cols()) / std::sqrt(static_cast<double>(K.cols()));
  double norm = 0.0;
  for (int it = 0; it < power_iters; ++it) {
    Vec w = K.transpose() * (K * v);
    const double wn = w.norm();
    if (wn == 0.0) return 0.0;
    norm = std::sqrt(wn);
    v = w / wn;
  }
  return norm;
}

// argmin_x R(x) + (1/tau) D_h(x, center) + (1/(2 sigma)) |x - v|^2.
Vec prox_of_g(const SubproblemSpec& spec, const Vec& grad_center, const Vec& v, double sigma) {
  const double tau = spec.tau;
  const double ratio = tau / sigma;
  const double c = spec.kernel.kind == KernelKind::QuarticPlusQuadratic ? 1.0 : 0.0;
  double beta = 1.0 + ratio;
  double gamma = 0.0;
  if (spec.reg.kind == RegKind::SquaredL2) beta += tau * spec.reg.lambda;
  if (spec.reg.kind == RegKind::L1) gamma = tau * spec.reg.lambda;
  return radial_resolvent(grad_center + ratio * v, c, beta, gamma);
}

}  // namespace

PdhgResult pdhg_solve(const SubproblemSpec& spec, const PdhgConfig& inner) {
  if (!spec.affine_rows) throw std::invalid_argument("pdhg_solve: affine rows missing");
  if (spec.kernel.kind != KernelKind::Euclidean &&
      spec.kernel.kind != KernelKind::QuarticPlusQuadratic)
    throw std::invalid_argument("pdhg_solve: kernel must be euclidean or quartic");
  if (spec.linear_part || spec.box_floor)
    throw std::invalid_argument("pdhg_solve: linear parts and box floors are unsupported");
  if (!(spec.tau > 0.0)) throw std::invalid_argument("pdhg_solve: tau must be positive");

  const auto& rows = *spec.affine_rows;
  const Mat& K = rows.K;
  const Vec& c = rows.offsets;
  const double w = rows.weight;
  const Vec grad_center = kernel_grad(spec.kernel, spec.model_center);

  // Steps satisfy sigma_p sigma_d |K|^2 = step_scale^2. G is mu-strongly convex
  // with mu >= lambda_min(hess h(center)) / tau, so mu / |K|^2 is a safe dual
  // gradient step; the dual step is pushed to `balance` times that (never below
  // the equal-step choice, which balance = 0 recovers).
  const double norm_k = operator_norm_estimate(K, inner.power_iters) * 1.01;
  const double modulus = spec.kernel.kind == KernelKind::QuarticPlusQuadratic
                             ? 1.0 + spec.model_center.squaredNorm()
                             : 1.0;
  const double weight =
      norm_k > 0.0 ? std::max(1.0, inner.balance * modulus / (spec.tau * norm_k)) : 1.0;
  const double sigma_p = norm_k > 0.0 ? inner.step_scale / (norm_k * weight) : 1.0;
  const double sigma_d = norm_k > 0.0 ? inner.step_scale * weight / norm_k : 1.0;

  PdhgResult result;
  Vec x = spec.model_center;
  Vec y = Vec::Zero(K.rows());
  Vec kty = Vec::Zero(x.size());
  double best = std::numeric_limits<double>::infinity();
  const int max_iters = std::max(inner.max_iters, 1);
  for (int it = 1; it <= max_iters; ++it) {
    const Vec x_next = prox_of_g(spec, grad_center, x - sigma_p * kty, sigma_p);
    const Vec x_bar = 2.0 * x_next - x;
    const Vec y_next = (y + sigma_d * (K * x_bar + c)).cwiseMax(-w).cwiseMin(w);
    const Vec kty_next = K.transpose() * y_next;

    const Vec dx = x - x_next;
    const Vec dy = y - y_next;
    const double primal = (dx / sigma_p - (kty - kty_next)).norm();
    const double dual = (dy / sigma_d - K * dx).norm();
    const double residual = primal + dual;

    if (!x_next.allFinite() || !y_next.allFinite() || !std::isfinite(residual)) {
      std::ostringstream msg;
      msg << "pdhg_solve: non-finite iterate at inner iteration " << it;
      throw InnerSolverDiverged(msg.str());
    }
    x = x_next;
    y = y_next;
    kty = kty_next;
    best = std::min(best, residual);
    if (inner.record_history) result.residual_history.push_back(best);
    result.iterations = it;
    result.residual = residual;
    if (residual <= inner.tol) break;
  }
  result.x = std::move(x);
  return result;
}

SubproblemResult solve_subproblem(SubproblemKind kind, const SubproblemSpec& spec,
                                  const PdhgConfig& inner) {
  switch (kind) {
    case SubproblemKind::ClosedFormQuartic: return {bpg_step_quartic(spec), 0.0, 0};
    case SubproblemKind::ClosedFormBurg: {
      if (!spec.linear_part) throw std::invalid_argument("poisson subproblem without gradient");
      return {poisson_step(spec, *spec.linear_part), 0.0, 0};
    }
    case SubproblemKind::PiecewiseLinearPDHG: {
      PdhgResult r = pdhg_solve(spec, inner);
      return {std::move(r.x), r.residual, r.iterations};
    }
  }
  throw std::invalid_argument("solve_subproblem: unknown kind");
}

}  // namespace bregmin
