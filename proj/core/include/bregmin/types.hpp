#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace bregmin {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Input lies outside the effective domain (or its interior) of a kernel or problem.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A closed-form step was requested with a step size its formula cannot admit.
/// Callers recover by shrinking tau.
class StepSizeTooLarge : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The PDHG inner solver produced a non-finite iterate.
class InnerSolverDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Backtracking exhausted its scaling budget.
class BacktrackingFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Test-oracle failure (budget exhausted or ill-posed spec). Not a library error.
class OracleFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Outer-loop failure, tagged with the iteration at which it happened.
class SolverError : public std::runtime_error {
 public:
  SolverError(std::size_t iteration, const std::string& what)
      : std::runtime_error("iteration " + std::to_string(iteration) + ": " + what),
        iteration_(iteration) {}
  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

enum class RegKind { None, L1, SquaredL2 };

std::string_view to_string(RegKind kind);
RegKind reg_kind_from_string(std::string_view name);

/// R(x) = 0, lambda*||x||_1 or (lambda/2)*||x||^2.
struct Regularizer {
  RegKind kind = RegKind::None;
  double lambda = 0.0;

  double value(const Vec& x) const;
};

}  // namespace bregmin
