#include "bregmin/kernel.hpp"

#include <cmath>
#include <sstream>

namespace bregmin {

std::string_view to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::Euclidean: return "euclidean";
    case KernelKind::Burg: return "burg";
    case KernelKind::BoltzmannShannon: return "boltzmann_shannon";
    case KernelKind::QuarticPlusQuadratic: return "quartic";
  }
  return "unknown";
}

namespace {

void check_dimension(const KernelSpec& k, const Vec& x, const char* what) {
  if (x.size() != k.dimension) {
    std::ostringstream msg;
    msg << to_string(k.kind) << " kernel: " << what << " has dimension " << x.size()
        << ", expected " << k.dimension;
    throw DomainError(msg.str());
  }
}

[[noreturn]] void reject(const KernelSpec& k, const Vec& x, Eigen::Index i, const char* set) {
  std::ostringstream msg;
  msg.precision(17);
  msg << to_string(k.kind) << " kernel: coordinate " << i << " = " << x[i] << " is outside "
      << set;
  throw DomainError(msg.str());
}

// Rejects points outside dom h.
void require_domain(const KernelSpec& k, const Vec& x) {
  check_dimension(k, x, "point");
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i])) reject(k, x, i, "the finite reals");
  }
  switch (k.kind) {
    case KernelKind::Burg:
      for (Eigen::Index i = 0; i < x.size(); ++i)
        if (!(x[i] >= kBurgFloor)) reject(k, x, i, "dom h = R^N_++");
      break;
    case KernelKind::BoltzmannShannon:
      for (Eigen::Index i = 0; i < x.size(); ++i)
        if (!(x[i] >= 0.0)) reject(k, x, i, "dom h = R^N_+");
      break;
    default: break;
  }
}

// Rejects points outside int dom h.
void require_interior(const KernelSpec& k, const Vec& x) {
  require_domain(k, x);
  if (k.kind == KernelKind::BoltzmannShannon) {
    for (Eigen::Index i = 0; i < x.size(); ++i)
      if (!(x[i] > 0.0)) reject(k, x, i, "int dom h = R^N_++");
  }
}

}  // namespace

bool in_domain(const KernelSpec& k, const Vec& x) {
  try {
    require_domain(k, x);
    return true;
  } catch (const DomainError&) {
    return false;
  }
}

bool in_interior(const KernelSpec& k, const Vec& x) {
  try {
    require_interior(k, x);
    return true;
  } catch (const DomainError&) {
    return false;
  }
}

double kernel_value(const KernelSpec& k, const Vec& x) {
  require_domain(k, x);
  switch (k.kind) {
    case KernelKind::Euclidean: return 0.5 * x.squaredNorm();
    case KernelKind::Burg: return -x.array().log().sum();
    case KernelKind::BoltzmannShannon: {
      double sum = 0.0;
      for (Eigen::Index i = 0; i < x.size(); ++i)
        if (x[i] > 0.0) sum += x[i] * std::log(x[i]);  // 0 log 0 := 0
      return sum;
    }
    case KernelKind::QuarticPlusQuadratic: {
      const double s = x.squaredNorm();
      return 0.25 * s * s + 0.5 * s;
    }
  }
  return 0.0;
}

Vec kernel_grad(const KernelSpec& k, const Vec& x) {
  require_interior(k, x);
  switch (k.kind) {
    case KernelKind::Euclidean: return x;
    case KernelKind::Burg: return -x.cwiseInverse();
    case KernelKind::BoltzmannShannon: return (x.array().log() + 1.0).matrix();
    case KernelKind::QuarticPlusQuadratic: return (x.squaredNorm() + 1.0) * x;
  }
  return x;
}

Vec kernel_hess_apply(const KernelSpec& k, const Vec& x, const Vec& v) {
  require_interior(k, x);
  check_dimension(k, v, "direction");
  switch (k.kind) {
    case KernelKind::Euclidean: return v;
    case KernelKind::Burg: return (v.array() / x.array().square()).matrix();
    case KernelKind::BoltzmannShannon: return (v.array() / x.array()).matrix();
    case KernelKind::QuarticPlusQuadratic:
      return (x.squaredNorm() + 1.0) * v + 2.0 * x.dot(v) * x;
  }
  return v;
}

Mat kernel_hessian(const KernelSpec& k, const Vec& x) {
  require_interior(k, x);
  const Eigen::Index n = x.size();
  switch (k.kind) {
    case KernelKind::Euclidean: return Mat::Identity(n, n);
    case KernelKind::Burg: return x.array().square().inverse().matrix().asDiagonal();
    case KernelKind::BoltzmannShannon: return x.cwiseInverse().asDiagonal();
    case KernelKind::QuarticPlusQuadratic:
      return (x.squaredNorm() + 1.0) * Mat::Identity(n, n) + 2.0 * x * x.transpose();
  }
  return Mat::Identity(n, n);
}

double bregman(const KernelSpec& k, const Vec& x, const Vec& y) {
  require_domain(k, x);
  require_interior(k, y);
  switch (k.kind) {
    case KernelKind::Euclidean: return 0.5 * (x - y).squaredNorm();
    case KernelKind::Burg: {
      double sum = 0.0;
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        // r - log r - 1 with u = r - 1; log1p keeps digits near r = 1.
        const double u = (x[i] - y[i]) / y[i];
        sum += u - std::log1p(u);
      }
      return std::max(sum, 0.0);
    }
    case KernelKind::BoltzmannShannon: {
      double sum = 0.0;
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double xlog = x[i] > 0.0 ? x[i] * (std::log(x[i]) - std::log(y[i])) : 0.0;
        sum += xlog - (x[i] - y[i]);
      }
      return std::max(sum, 0.0);
    }
    case KernelKind::QuarticPlusQuadratic: {
      // 1/4 (|x|^2 - |y|^2)^2 + 1/2 (|y|^2 + 1) |x - y|^2, a sum of nonnegative terms.
      const double sx = x.squaredNorm();
      const double sy = y.squaredNorm();
      const double d2 = (x - y).squaredNorm();
      return 0.25 * (sx - sy) * (sx - sy) + 0.5 * (sy + 1.0) * d2;
    }
  }
  return 0.0;
}

double bregman_generic(const KernelSpec& k, const Vec& x, const Vec& y) {
  return kernel_value(k, x) - kernel_value(k, y) - (x - y).dot(kernel_grad(k, y));
}

double three_point_residual(const KernelSpec& k, const Vec& x, const Vec& u, const Vec& v) {
  const double lhs = bregman_generic(k, x, u);
  const double rhs = bregman_generic(k, x, v) + bregman_generic(k, v, u) +
                     (x - v).dot(kernel_grad(k, v) - kernel_grad(k, u));
  return std::abs(lhs - rhs);
}

}  // namespace bregmin
