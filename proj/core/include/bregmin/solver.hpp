#pragma once

// Model BPG outer loop:
//
//   x_{k+1} = argmin_x  f(x; x_k) + (1/tau_k) D_h(x, x_k),   tau_k < 1/L_k,
//
// with Lyapunov tracking F(x, c) = f(x; c) + L D_h(x, c) and certificate checks
// of the descent inequalities that the MAP property implies.

#include "bregmin/model.hpp"
#include "bregmin/subsolve.hpp"
#include "bregmin/types.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

namespace bregmin {

struct SolverConfig {
  double tau_fraction = 0.99;  // tau = tau_fraction / L
  std::size_t max_iters = 1000;
  double move_tol = 1e-9;  // stop when |x_{k+1} - x_k| / max(1, |x_k|) <= move_tol
  bool backtracking = false;
  double nu = 2.0;
  double L_init = 1.0;
  std::uint64_t seed = 0;
  PdhgConfig inner;
  bool record_iterates = true;
  bool record_time = false;  // time_s stays 0 otherwise, so replays are byte-identical

  bool operator==(const SolverConfig&) const = default;
};

/// Throws std::invalid_argument when a field is out of range.
void validate(const SolverConfig& cfg);

struct TraceRow {
  std::size_t k = 0;
  double time_s = 0.0;
  double f = 0.0;
  double lyapunov = 0.0;   // F(x_k, x_{k-1}) with L_k; f(x_0) for k = 0
  double breg_step = 0.0;  // D_h(x_k, x_{k-1}); 0 for k = 0
  double L = 0.0;
  double tau = 0.0;
  double inner_residual = 0.0;
};

struct IterateTrace {
  std::vector<TraceRow> rows;
  std::vector<Vec> iterates;  // parallel to rows when SolverConfig::record_iterates
  Vec final_x;
  bool inexact_subsolver = false;

  double max_inner_residual() const;
};

/// F(x, center) = f(x; center) + L_bar D_h(x, center).
double lyapunov(const ModelProblem& p, const Vec& x, const Vec& center, double L_bar);

/// Runs Model BPG from x0. Subsolver failures are rethrown as SolverError with
/// the iteration index.
IterateTrace run(const ModelProblem& p, const SolverConfig& cfg, const Vec& x0);

using CandidateProvider = std::function<SubproblemResult(double L)>;

struct BacktrackResult {
  double L = 0.0;
  SubproblemResult next;
  int scalings = 0;
};

inline constexpr int kMaxBacktrackScalings = 60;

/// Smallest L = L_prev * nu^j (j <= 60) with f(x+) <= f(x+; x_k) + L D_h(x+, x_k),
/// where x+ = candidate(L).
BacktrackResult backtrack_L(const ModelProblem& p, const Vec& x_k,
                            const CandidateProvider& candidate, double L_prev, double nu);

struct InequalityCheck {
  bool pass = true;
  double worst_margin = 0.0;  // min over checks of (rhs + slack - lhs); negative means violated
  std::size_t worst_index = 0;
};

struct CertificateReport {
  InequalityCheck function_descent;  // f_k <= f_{k-1} - eps_k D_k + slack
  InequalityCheck lyapunov_descent;  // F_k <= F_{k-1} - eps_k D_k + slack
  InequalityCheck complexity;        // min D_k <= (F_0 - F_n) / (eps_low n) + slack
  bool iterates_feasible = true;     // every recorded iterate in dom f
  double slack = 0.0;

  bool all_pass() const;
};

/// 1e-9 (1 + |F_1|), widened by max inner residual * trace length for PDHG runs.
double default_slack(const IterateTrace& trace);

CertificateReport descent_certificate(const ModelProblem& p, const IterateTrace& trace,
                                      double slack);

/// max_k of
///   (|L - 1/tau_k| |grad h(x_{k+1}) - grad h(x_k)|
///    + |d_c f(x_{k+1}; x_k) - L hess h(x_k)(x_{k+1} - x_k)|) / |x_{k+1} - x_k|,
/// with 0/0 read as 0. Needs recorded iterates and p.model_subgrad_center.
double relative_error_diagnostic(const ModelProblem& p, const IterateTrace& trace);

/// CSV header `iter,time_s,f,lyapunov,breg_step,L_k,tau_k,inner_residual`, 17 significant digits.
void write_trace_csv(std::ostream& out, const IterateTrace& trace);

}  // namespace bregmin
