#include "bregmin/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace bregmin {

void validate(const SolverConfig& cfg) {
  if (!(cfg.tau_fraction > 0.0 && cfg.tau_fraction < 1.0))
    throw std::invalid_argument("solver: tau_fraction must lie in (0, 1)");
  if (!(cfg.move_tol >= 0.0)) throw std::invalid_argument("solver: move_tol must be >= 0");
  if (!(cfg.nu > 1.0)) throw std::invalid_argument("solver: nu must be > 1");
  if (!(cfg.L_init > 0.0) || !std::isfinite(cfg.L_init))
    throw std::invalid_argument("solver: L_init must be positive");
  if (!(cfg.inner.tol > 0.0) || cfg.inner.max_iters < 1 || cfg.inner.power_iters < 1 ||
      !(cfg.inner.step_scale > 0.0 && cfg.inner.step_scale < 1.0) || !(cfg.inner.balance >= 0.0))
    throw std::invalid_argument("solver: invalid inner PDHG settings");
}

double IterateTrace::max_inner_residual() const {
  double worst = 0.0;
  for (const auto& row : rows) worst = std::max(worst, row.inner_residual);
  return worst;
}

double lyapunov(const ModelProblem& p, const Vec& x, const Vec& center, double L_bar) {
  const double m = model_value(p, x, center);
  if (L_bar == 0.0) return m;
  return m + L_bar * bregman(p.kernel, x, center);
}

namespace {

// Candidate for the update at `center` with step `tau`; rejects iterates that
// leave dom f.
SubproblemResult step(const ModelProblem& p, const Vec& center, double tau,
                      const PdhgConfig& inner) {
  SubproblemResult r = solve_subproblem(p.subproblem_kind, p.subproblem(center, tau), inner);
  if (!r.x.allFinite()) throw InnerSolverDiverged("subproblem returned a non-finite iterate");
  if (!in_problem_domain(p, r.x) || !in_interior(p.kernel, r.x))
    throw DomainError("subproblem returned an iterate outside int dom h / dom f");
  return r;
}

}  // namespace

BacktrackResult backtrack_L(const ModelProblem& p, const Vec& x_k,
                            const CandidateProvider& candidate, double L_prev, double nu) {
  if (!(nu > 1.0)) throw std::invalid_argument("backtrack_L: nu must be > 1");
  if (!(L_prev > 0.0)) throw std::invalid_argument("backtrack_L: L_prev must be positive");
  double L = L_prev;
  for (int scalings = 0; scalings <= kMaxBacktrackScalings; ++scalings, L *= nu) {
    SubproblemResult next;
    try {
      next = candidate(L);
    } catch (const StepSizeTooLarge&) {
      continue;
    } catch (const DomainError&) {
      continue;
    }
    if (!in_problem_domain(p, next.x)) continue;
    const double f = p.objective(next.x);
    const double bound = p.model(next.x, x_k) + L * bregman(p.kernel, next.x, x_k);
    if (f <= bound + 1e-13 * (1.0 + std::abs(f))) return {L, std::move(next), scalings};
  }
  throw BacktrackingFailed("backtrack_L: no acceptable L within " +
                           std::to_string(kMaxBacktrackScalings) + " scalings of " +
                           std::to_string(L_prev));
}

IterateTrace run(const ModelProblem& p, const SolverConfig& cfg, const Vec& x0) {
  validate(p);
  validate(cfg);
  if (x0.size() != p.kernel.dimension) throw DomainError("run: x0 has the wrong dimension");
  if (!in_problem_domain(p, x0) || !in_interior(p.kernel, x0))
    throw DomainError("run: x0 must lie in dom f and int dom h");

  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  auto elapsed = [&] {
    return cfg.record_time ? std::chrono::duration<double>(Clock::now() - start).count() : 0.0;
  };

  IterateTrace trace;
  trace.inexact_subsolver = p.subproblem_kind == SubproblemKind::PiecewiseLinearPDHG;
  const double f0 = p.objective(x0);
  double L = cfg.backtracking ? cfg.L_init : p.map_upper;
  trace.rows.push_back({0, elapsed(), f0, f0, 0.0, L, cfg.tau_fraction / L, 0.0});
  if (cfg.record_iterates) trace.iterates.push_back(x0);

  Vec x = x0;
  for (std::size_t k = 1; k <= cfg.max_iters; ++k) {
    SubproblemResult next;
    double tau = cfg.tau_fraction / L;
    try {
      if (cfg.backtracking) {
        const auto provider = [&](double trial_L) {
          return step(p, x, cfg.tau_fraction / trial_L, cfg.inner);
        };
        BacktrackResult bt = backtrack_L(p, x, provider, L, cfg.nu);
        L = bt.L;
        tau = cfg.tau_fraction / L;
        next = std::move(bt.next);
      } else {
        for (int halvings = 0;; ++halvings) {
          try {
            next = step(p, x, tau, cfg.inner);
            break;
          } catch (const StepSizeTooLarge& e) {
            if (halvings == kMaxBacktrackScalings)
              throw StepSizeTooLarge(std::string(e.what()) + " (after 60 halvings)");
            tau *= 0.5;
          }
        }
      }
    } catch (const SolverError&) {
      throw;
    } catch (const std::exception& e) {
      throw SolverError(k, e.what());
    }

    const double f = p.objective(next.x);
    const double D = bregman(p.kernel, next.x, x);
    const double F = p.model(next.x, x) + L * D;
    const double move = (next.x - x).norm() / std::max(1.0, x.norm());
    trace.rows.push_back({k, elapsed(), f, F, D, L, tau, next.inner_residual});
    if (cfg.record_iterates) trace.iterates.push_back(next.x);
    x = std::move(next.x);
    if (move <= cfg.move_tol) break;
  }
  trace.final_x = x;
  return trace;
}

bool CertificateReport::all_pass() const {
  return function_descent.pass && lyapunov_descent.pass && complexity.pass && iterates_feasible;
}

double default_slack(const IterateTrace& trace) {
  if (trace.rows.empty()) return 0.0;
  const double F1 = trace.rows.size() > 1 ? trace.rows[1].lyapunov : trace.rows[0].lyapunov;
  double slack = 1e-9 * (1.0 + std::abs(F1));
  if (trace.inexact_subsolver)
    slack += trace.max_inner_residual() * static_cast<double>(trace.rows.size());
  return slack;
}

namespace {

void record(InequalityCheck& check, double margin, std::size_t index) {
  if (index == 1 || margin < check.worst_margin) {
    check.worst_margin = margin;
    check.worst_index = index;
  }
  if (margin < 0.0) check.pass = false;
}

}  // namespace

CertificateReport descent_certificate(const ModelProblem& p, const IterateTrace& trace,
                                      double slack) {
  CertificateReport report;
  report.slack = slack;
  const auto& rows = trace.rows;
  if (rows.size() < 2) return report;

  double eps_low = std::numeric_limits<double>::infinity();
  double min_D = std::numeric_limits<double>::infinity();
  for (std::size_t j = 1; j < rows.size(); ++j) {
    const double eps = 1.0 / rows[j].tau - rows[j].L;
    eps_low = std::min(eps_low, eps);
    min_D = std::min(min_D, rows[j].breg_step);
    const double gap = eps * rows[j].breg_step;
    record(report.function_descent, rows[j - 1].f - gap + slack - rows[j].f, j);
    record(report.lyapunov_descent, rows[j - 1].lyapunov - gap + slack - rows[j].lyapunov, j);
  }

  const double n = static_cast<double>(rows.size() - 1);
  const double drop = rows.front().lyapunov - rows.back().lyapunov;
  if (eps_low > 0.0) {
    record(report.complexity, drop / (eps_low * n) + slack - min_D, 1);
  } else {
    record(report.complexity, -std::numeric_limits<double>::infinity(), 1);
  }

  for (const Vec& x : trace.iterates) {
    if (!in_problem_domain(p, x)) {
      report.iterates_feasible = false;
      break;
    }
  }
  return report;
}

double relative_error_diagnostic(const ModelProblem& p, const IterateTrace& trace) {
  if (!p.model_subgrad_center)
    throw std::invalid_argument("relative_error_diagnostic: '" + p.name +
                                "' has no center derivative of its model");
  if (trace.iterates.size() != trace.rows.size())
    throw std::invalid_argument("relative_error_diagnostic: trace has no recorded iterates");
  double worst = 0.0;
  for (std::size_t j = 1; j < trace.rows.size(); ++j) {
    const Vec& xk = trace.iterates[j - 1];
    const Vec& xn = trace.iterates[j];
    const Vec dx = xn - xk;
    const double move = dx.norm();
    if (move == 0.0) continue;
    const double L = trace.rows[j].L;
    const double tau = trace.rows[j].tau;
    const Vec dgrad = kernel_grad(p.kernel, xn) - kernel_grad(p.kernel, xk);
    const double t1 = std::abs(L - 1.0 / tau) * dgrad.norm();
    const double t2 =
        (p.model_subgrad_center(xn, xk) - L * kernel_hess_apply(p.kernel, xk, dx)).norm();
    worst = std::max(worst, (t1 + t2) / move);
  }
  return worst;
}

void write_trace_csv(std::ostream& out, const IterateTrace& trace) {
  out << "iter,time_s,f,lyapunov,breg_step,L_k,tau_k,inner_residual\n";
  char line[512];
  for (const auto& r : trace.rows) {
    std::snprintf(line, sizeof line, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.k,
                  r.time_s, r.f, r.lyapunov, r.breg_step, r.L, r.tau, r.inner_residual);
    out << line;
  }
}

}  // namespace bregmin
