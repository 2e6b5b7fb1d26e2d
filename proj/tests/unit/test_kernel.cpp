#include "bregmin/kernel.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>

using namespace bregmin;
using namespace bregmin::testing;

namespace {

const KernelKind kAllKinds[] = {KernelKind::Euclidean, KernelKind::Burg,
                                KernelKind::BoltzmannShannon, KernelKind::QuarticPlusQuadratic};

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }
Vec v1(double a) { return Vec::Constant(1, a); }

}  // namespace

TEST_CASE("kernel names") {
  CHECK(to_string(KernelKind::Euclidean) == "euclidean");
  CHECK(to_string(KernelKind::Burg) == "burg");
  CHECK(to_string(KernelKind::BoltzmannShannon) == "boltzmann_shannon");
  CHECK(to_string(KernelKind::QuarticPlusQuadratic) == "quartic");
}

TEST_CASE("bregman distances at hand-computed points") {
  // D(2, 1): Euclidean 1/2; Burg 1 - ln 2; Boltzmann-Shannon 2 ln 2 - 1.
  CHECK(bregman({KernelKind::Euclidean, 1}, v1(2.0), v1(1.0)) == doctest::Approx(0.5));
  CHECK(bregman({KernelKind::Burg, 1}, v1(2.0), v1(1.0)) ==
        doctest::Approx(1.0 - std::log(2.0)).epsilon(1e-14));
  CHECK(bregman({KernelKind::BoltzmannShannon, 1}, v1(2.0), v1(1.0)) ==
        doctest::Approx(2.0 * std::log(2.0) - 1.0).epsilon(1e-14));
  // Quartic: h(e1) - h(0) = 1/4 + 1/2 with grad h(0) = 0.
  CHECK(bregman({KernelKind::QuarticPlusQuadratic, 2}, v2(1.0, 0.0), v2(0.0, 0.0)) ==
        doctest::Approx(0.75));
}

TEST_CASE("boltzmann-shannon uses 0 log 0 = 0 on the boundary") {
  const KernelSpec k{KernelKind::BoltzmannShannon, 2};
  CHECK(kernel_value(k, v2(0.0, 1.0)) == doctest::Approx(0.0));
  // D(0, y) = y for a single coordinate.
  CHECK(bregman(k, v2(0.0, 1.0), v2(0.5, 1.0)) == doctest::Approx(0.5));
  CHECK_THROWS_AS(kernel_grad(k, v2(0.0, 1.0)), DomainError);
}

TEST_CASE("domain violations name the coordinate") {
  const KernelSpec burg{KernelKind::Burg, 2};
  CHECK_FALSE(in_domain(burg, v2(1.0, -1.0)));
  CHECK_FALSE(in_interior(burg, v2(1.0, 0.0)));
  try {
    kernel_value(burg, v2(1.0, -1.0));
    FAIL("expected a domain error");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("1") != std::string::npos);
  }
  CHECK_THROWS_AS(bregman(burg, v2(1.0, 1.0), v2(0.0, 1.0)), DomainError);
}

TEST_CASE("closed-form distances agree with the definition") {
  std::mt19937_64 rng(7);
  for (KernelKind kind : kAllKinds) {
    const KernelSpec k{kind, 4};
    for (int s = 0; s < 500; ++s) {
      const Vec x = kernel_sample(rng, k);
      const Vec y = kernel_sample(rng, k);
      const double closed = bregman(k, x, y);
      const double generic = bregman_generic(k, x, y);
      CHECK(std::abs(closed - generic) <= 1e-10 * (1.0 + std::abs(generic)));
    }
  }
}

TEST_CASE("gradient and Hessian match finite differences") {
  std::mt19937_64 rng(11);
  for (KernelKind kind : kAllKinds) {
    const KernelSpec k{kind, 3};
    for (int s = 0; s < 200; ++s) {
      const Vec x = kernel_sample(rng, k);
      const Vec g = kernel_grad(k, x);
      const Vec fd = fd_gradient([&](const Vec& z) { return kernel_value(k, z); }, x);
      CHECK((g - fd).norm() <= 1e-5 * std::max(1.0, g.norm()));
      const Mat H = kernel_hessian(k, x);
      const Mat J = fd_jacobian([&](const Vec& z) { return kernel_grad(k, z); }, x);
      CHECK((H - J).norm() <= 1e-4 * std::max(1.0, H.norm()));
      const Vec v = normal_vec(rng, 3);
      CHECK((kernel_hess_apply(k, x, v) - H * v).norm() <= 1e-12 * std::max(1.0, (H * v).norm()));
    }
  }
}

TEST_CASE("three point identity, nonnegativity and separation") {
  std::mt19937_64 rng(3);
  for (KernelKind kind : kAllKinds) {
    const KernelSpec k{kind, 5};
    for (int s = 0; s < 1000; ++s) {
      const Vec x = kernel_sample(rng, k);
      const Vec u = kernel_sample(rng, k);
      const Vec v = kernel_sample(rng, k);
      CHECK(three_point_residual(k, x, u, v) <= 1e-8);
      CHECK(bregman(k, x, u) > 0.0);
      CHECK(bregman(k, x, x) == doctest::Approx(0.0));
    }
  }
}

TEST_CASE("burg distance stays accurate for nearby points") {
  const KernelSpec k{KernelKind::Burg, 1};
  // D(y(1+u), y) = u - log(1+u) ~ u^2/2 for small u.
  const double u = 1e-6;
  CHECK(bregman(k, v1(3.0 * (1.0 + u)), v1(3.0)) == doctest::Approx(u * u / 2.0).epsilon(1e-5));
}
