#pragma once

// Legendre kernels h and the Bregman distances
//   D_h(x, y) = h(x) - h(y) - <x - y, grad h(y)>
// they generate. Four kinds are shipped; adding a kind means extending the
// switch in every function of kernel.cpp.

#include "bregmin/types.hpp"

#include <string_view>

namespace bregmin {

enum class KernelKind { Euclidean, Burg, BoltzmannShannon, QuarticPlusQuadratic };

std::string_view to_string(KernelKind kind);

struct KernelSpec {
  KernelKind kind = KernelKind::Euclidean;
  Eigen::Index dimension = 1;
};

/// Smallest coordinate accepted by the Burg kernel; -1/x overflows below it.
inline constexpr double kBurgFloor = 1e-300;

/// True when x lies in dom h.
bool in_domain(const KernelSpec& k, const Vec& x);
/// True when x lies in int dom h.
bool in_interior(const KernelSpec& k, const Vec& x);

/// h(x). Throws DomainError naming the first offending coordinate.
double kernel_value(const KernelSpec& k, const Vec& x);
/// grad h(x) for x in int dom h.
Vec kernel_grad(const KernelSpec& k, const Vec& x);
/// Hessian-vector product at x in int dom h.
Vec kernel_hess_apply(const KernelSpec& k, const Vec& x, const Vec& v);
/// Dense Hessian; used by Newton-type test oracles.
Mat kernel_hessian(const KernelSpec& k, const Vec& x);

/// D_h(x, y) via the kernel-specific closed form. x in dom h, y in int dom h.
double bregman(const KernelSpec& k, const Vec& x, const Vec& y);
/// D_h(x, y) straight from the definition h(x) - h(y) - <x-y, grad h(y)>.
double bregman_generic(const KernelSpec& k, const Vec& x, const Vec& y);

/// |D(x,u) - D(x,v) - D(v,u) - <x-v, grad h(v) - grad h(u)>| using the generic
/// formula, so that it cross-checks the closed forms used by bregman().
double three_point_residual(const KernelSpec& k, const Vec& x, const Vec& u, const Vec& v);

}  // namespace bregmin
