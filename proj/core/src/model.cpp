#include "bregmin/model.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace bregmin {

void validate(const ModelProblem& p) {
  if (!p.objective || !p.model || !p.subproblem)
    throw std::invalid_argument("model problem '" + p.name + "' is missing callbacks");
  if (!(p.map_upper > 0.0))
    throw std::invalid_argument("model problem '" + p.name + "': map_upper must be positive");
  if (!(p.map_lower <= p.map_upper))
    throw std::invalid_argument("model problem '" + p.name + "': map_lower exceeds map_upper");
  if (p.sampling_origin.size() != 0 && p.sampling_origin.size() != p.kernel.dimension)
    throw std::invalid_argument("model problem '" + p.name + "': sampling origin has wrong size");
}

bool in_problem_domain(const ModelProblem& p, const Vec& x) {
  if (!in_domain(p.kernel, x)) return false;
  return !p.feasible || p.feasible(x);
}

double model_value(const ModelProblem& p, const Vec& x, const Vec& center) {
  if (!in_interior(p.kernel, center) || !in_problem_domain(p, center))
    throw DomainError("model_value: center outside dom f and int dom h");
  if (!in_problem_domain(p, x)) throw DomainError("model_value: x outside dom f");
  return p.model(x, center);
}

namespace {

Vec sample_ball(std::mt19937_64& rng, const Vec& origin, double radius) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const Eigen::Index n = origin.size();
  Vec d(n);
  for (Eigen::Index i = 0; i < n; ++i) d[i] = normal(rng);
  const double norm = d.norm();
  if (norm == 0.0) return origin;
  const double r = radius * std::pow(uniform(rng), 1.0 / static_cast<double>(n));
  return origin + (r / norm) * d;
}

}  // namespace

MapResidualReport map_residual_check(const ModelProblem& p, std::size_t n_samples, double radius,
                                     std::uint64_t seed) {
  validate(p);
  if (!(radius > 0.0)) throw std::invalid_argument("map_residual_check: radius must be positive");
  const Vec origin = p.sampling_origin.size() == p.kernel.dimension
                         ? p.sampling_origin
                         : Vec::Zero(p.kernel.dimension);
  std::mt19937_64 rng(seed);
  constexpr int kMaxRetries = 1000;

  auto draw = [&](bool interior) {
    for (int attempt = 0; attempt < kMaxRetries; ++attempt) {
      Vec x = sample_ball(rng, origin, radius);
      if (!in_problem_domain(p, x)) continue;
      if (interior && !in_interior(p.kernel, x)) continue;
      return x;
    }
    throw std::runtime_error("map_residual_check: sampler found no feasible point for '" +
                             p.name + "'");
  };

  MapResidualReport report;
  for (std::size_t s = 0; s < n_samples; ++s) {
    const Vec center = draw(true);
    const Vec x = draw(false);
    const double f = p.objective(x);
    const double gap = f - p.model(x, center);
    const double dist = bregman(p.kernel, x, center);
    const double scale = 1.0 + std::abs(f);
    report.worst_upper_violation =
        std::max(report.worst_upper_violation, (gap - p.map_upper * dist) / scale);
    report.worst_lower_violation =
        std::max(report.worst_lower_violation, (-p.map_lower * dist - gap) / scale);
    ++report.samples;
  }
  return report;
}

double running_example_objective(const Vec& x) {
  const double s = x.squaredNorm();
  return std::abs(s * s - 1.0);
}

double running_example_model(const Vec& x, const Vec& center) {
  const double s = center.squaredNorm();
  const double g = s * s - 1.0;
  const Vec grad = 4.0 * s * center;
  return std::abs(g + grad.dot(x - center));
}

double growth_bound_running_example(const Vec& x, const Vec& center) {
  const double t = (x - center).norm();
  return 24.0 * center.squaredNorm() * t * t + 8.0 * t * t * t * t;
}

ModelProblem make_running_example_problem(Eigen::Index dimension) {
  ModelProblem p;
  p.name = "running_example";
  p.kernel = {KernelKind::QuarticPlusQuadratic, dimension};
  p.map_upper = 4.0;
  p.map_lower = 4.0;
  p.subproblem_kind = SubproblemKind::PiecewiseLinearPDHG;
  p.objective = running_example_objective;
  p.model = running_example_model;
  p.subproblem = [kernel = p.kernel](const Vec& center, double tau) {
    const double s = center.squaredNorm();
    const Vec grad = 4.0 * s * center;
    SubproblemSpec spec;
    spec.model_center = center;
    spec.tau = tau;
    spec.kernel = kernel;
    spec.affine_rows = AffineRows{grad.transpose(), Vec::Constant(1, s * s - 1.0 - grad.dot(center)),
                                  1.0};
    return spec;
  };
  p.sampling_origin = Vec::Zero(dimension);
  return p;
}

double first_order_consistency(const ModelProblem& p, const Vec& center, std::size_t directions,
                               double step, std::uint64_t seed) {
  validate(p);
  if (!(step > 0.0)) throw std::invalid_argument("first_order_consistency: step must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double f0 = p.objective(center);
  const double m0 = p.model(center, center);
  double worst = 0.0;
  for (std::size_t k = 0; k < directions; ++k) {
    Vec d(center.size());
    for (Eigen::Index i = 0; i < d.size(); ++i) d[i] = normal(rng);
    d.normalize();
    const Vec x = center + step * d;
    if (!in_problem_domain(p, x)) continue;
    const double df = p.objective(x) - f0;
    const double dm = p.model(x, center) - m0;
    worst = std::max(worst, std::abs(df - dm) / step);
  }
  return worst;
}

}  // namespace bregmin
