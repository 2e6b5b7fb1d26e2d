#pragma once

// Independent reference computations shared by the unit and acceptance tests.
// Nothing here calls into the solvers under test.

#include "bregmin/kernel.hpp"
#include "bregmin/subsolve.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

namespace bregmin::testing {

inline Vec normal_vec(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
  std::normal_distribution<double> d(0.0, scale);
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = d(rng);
  return v;
}

inline Vec uniform_vec(std::mt19937_64& rng, Eigen::Index n, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = d(rng);
  return v;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// A point in int dom h: positive orthant for Burg and Boltzmann-Shannon.
inline Vec kernel_sample(std::mt19937_64& rng, const KernelSpec& k) {
  switch (k.kind) {
    case KernelKind::Burg:
    case KernelKind::BoltzmannShannon: return uniform_vec(rng, k.dimension, 0.1, 3.0);
    default: return normal_vec(rng, k.dimension);
  }
}

/// Central-difference gradient with per-coordinate step h * max(1, |x_i|).
inline Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x, double h = 1e-6) {
  Vec g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double step = h * std::max(1.0, std::abs(x[i]));
    Vec xp = x, xm = x;
    xp[i] += step;
    xm[i] -= step;
    g[i] = (f(xp) - f(xm)) / (2.0 * step);
  }
  return g;
}

/// Central-difference Jacobian of a vector field (column i = d field / d x_i).
inline Mat fd_jacobian(const std::function<Vec(const Vec&)>& field, const Vec& x, double h = 1e-6) {
  Mat J(x.size(), x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double step = h * std::max(1.0, std::abs(x[i]));
    Vec xp = x, xm = x;
    xp[i] += step;
    xm[i] -= step;
    J.col(i) = (field(xp) - field(xm)) / (2.0 * step);
  }
  return J;
}

/// Root of an increasing function on [lo, hi] by plain bisection.
inline double bisect(const std::function<double(double)>& phi, double lo, double hi,
                     int iters = 200) {
  for (int i = 0; i < iters; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (phi(mid) > 0.0) hi = mid; else lo = mid;
  }
  return 0.5 * (lo + hi);
}

/// argmin over x of w |k x + o| + (x - center)^2 / (2 tau), derived by hand: the
/// quadratic's minimizer moves by tau w k towards the kink and sticks to it when
/// the kink is within reach.
inline double shifted_soft_threshold(double k, double o, double w, double center, double tau) {
  if (k == 0.0) return center;
  const double z = k * center + o;
  if (std::abs(z) <= tau * w * k * k) return -o / k;
  return center - tau * w * k * (z > 0.0 ? 1.0 : -1.0);
}

/// Random subproblem with a linear model part for the closed-form solvers.
inline SubproblemSpec random_quartic_spec(std::mt19937_64& rng, Eigen::Index n, RegKind reg) {
  SubproblemSpec spec;
  spec.kernel = {KernelKind::QuarticPlusQuadratic, n};
  spec.model_center = normal_vec(rng, n);
  spec.tau = uniform(rng, 0.05, 2.0);
  spec.linear_part = normal_vec(rng, n, 2.0);
  spec.reg = {reg, reg == RegKind::None ? 0.0 : uniform(rng, 0.01, 1.0)};
  return spec;
}

inline SubproblemSpec random_burg_spec(std::mt19937_64& rng, Eigen::Index n, RegKind reg) {
  SubproblemSpec spec;
  spec.kernel = {KernelKind::Burg, n};
  spec.box_floor = uniform(rng, 0.0, 1.0) < 0.5 ? 1e-8 : 0.2;
  // The center must itself lie in the box.
  spec.model_center = uniform_vec(rng, n, std::max(0.05, *spec.box_floor), 3.0);
  spec.tau = uniform(rng, 0.01, 0.5);
  spec.linear_part = normal_vec(rng, n);
  spec.reg = {reg, reg == RegKind::None ? 0.0 : uniform(rng, 0.01, 1.0)};
  return spec;
}

/// Random piecewise-linear subproblem (Euclidean or quartic kernel).
inline SubproblemSpec random_pdhg_spec(std::mt19937_64& rng, Eigen::Index n, Eigen::Index m,
                                       KernelKind kernel, RegKind reg) {
  SubproblemSpec spec;
  spec.kernel = {kernel, n};
  spec.model_center = normal_vec(rng, n);
  spec.tau = uniform(rng, 0.1, 1.0);
  Mat K(m, n);
  for (Eigen::Index i = 0; i < m; ++i) K.row(i) = normal_vec(rng, n).transpose();
  spec.affine_rows = AffineRows{K, normal_vec(rng, m), 1.0 / static_cast<double>(m)};
  spec.reg = {reg, reg == RegKind::None ? 0.0 : uniform(rng, 0.01, 0.5)};
  return spec;
}

inline RegKind reg_for_index(std::size_t i) {
  static constexpr RegKind kinds[] = {RegKind::None, RegKind::L1, RegKind::SquaredL2};
  return kinds[i % 3];
}

}  // namespace bregmin::testing
