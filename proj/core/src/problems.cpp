#include "bregmin/problems.hpp"

#include <json.hpp>

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace bregmin {

namespace {

Eigen::Index measurement_count(const PhaseRetrievalInstance& inst) {
  return static_cast<Eigen::Index>(inst.A.size());
}

// r_i = x^T A_i x - b_i.
Vec residuals(const PhaseRetrievalInstance& inst, const Vec& x) {
  Vec r(measurement_count(inst));
  for (Eigen::Index i = 0; i < r.size(); ++i) r[i] = x.dot(inst.A[i] * x) - inst.b[i];
  return r;
}

void check_regularizer(const Regularizer& reg) {
  if (!(reg.lambda >= 0.0) || !std::isfinite(reg.lambda))
    throw std::invalid_argument("regularization weight must be finite and nonnegative");
}

}  // namespace

void validate(const PhaseRetrievalInstance& inst) {
  const Eigen::Index M = measurement_count(inst);
  if (M < 1) throw std::invalid_argument("phase retrieval: need at least one measurement");
  if (inst.b.size() != M) throw std::invalid_argument("phase retrieval: |b| != number of A_i");
  const Eigen::Index N = inst.A.front().rows();
  if (N < 1) throw std::invalid_argument("phase retrieval: dimension must be positive");
  for (Eigen::Index i = 0; i < M; ++i) {
    const Mat& A = inst.A[i];
    if (A.rows() != N || A.cols() != N)
      throw std::invalid_argument("phase retrieval: A_" + std::to_string(i) + " is not N x N");
    if ((A - A.transpose()).norm() > 1e-12)
      throw std::invalid_argument("phase retrieval: A_" + std::to_string(i) + " is not symmetric");
    const double min_eig = Eigen::SelfAdjointEigenSolver<Mat>(A, Eigen::EigenvaluesOnly)
                               .eigenvalues()
                               .minCoeff();
    if (min_eig < -1e-10)
      throw std::invalid_argument("phase retrieval: A_" + std::to_string(i) + " is not PSD");
  }
  check_regularizer(inst.reg);
}

void validate(const PoissonInstance& inst) {
  const Eigen::Index M = inst.a.rows();
  const Eigen::Index N = inst.a.cols();
  if (M < 1 || N < 1) throw std::invalid_argument("poisson: empty measurement matrix");
  if (inst.b.size() != M) throw std::invalid_argument("poisson: |b| != number of rows");
  if ((inst.a.array() < 0.0).any()) throw std::invalid_argument("poisson: negative entry in a");
  for (Eigen::Index i = 0; i < M; ++i)
    if (inst.a.row(i).sum() <= 0.0)
      throw std::invalid_argument("poisson: row a_" + std::to_string(i) + " is zero");
  for (Eigen::Index j = 0; j < N; ++j)
    if (inst.a.col(j).sum() <= 0.0)
      throw std::invalid_argument("poisson: column " + std::to_string(j) + " sums to zero");
  if ((inst.b.array() <= 0.0).any()) throw std::invalid_argument("poisson: counts must be positive");
  if (!(inst.epsilon > 0.0)) throw std::invalid_argument("poisson: epsilon must be positive");
  check_regularizer(inst.reg);
}

PhaseRetrievalInstance gen_phase_retrieval(std::uint64_t seed, Eigen::Index M, Eigen::Index N,
                                           Regularizer reg, double noise) {
  if (M < 1 || N < 1) throw std::invalid_argument("gen_phase_retrieval: M and N must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto gaussian = [&](Eigen::Index n) {
    Vec v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = normal(rng);
    return v;
  };
  PhaseRetrievalInstance inst;
  inst.reg = reg;
  inst.A.reserve(static_cast<std::size_t>(M));
  for (Eigen::Index i = 0; i < M; ++i) {
    const Vec g = gaussian(N);
    inst.A.push_back(g * g.transpose());
  }
  inst.planted = gaussian(N);
  inst.b.resize(M);
  for (Eigen::Index i = 0; i < M; ++i) {
    inst.b[i] = inst.planted.dot(inst.A[i] * inst.planted);
    if (noise != 0.0) inst.b[i] *= 1.0 + noise * normal(rng);
  }
  validate(inst);
  return inst;
}

double phase_retrieval_smooth_part(const PhaseRetrievalInstance& inst, const Vec& x) {
  return residuals(inst, x).squaredNorm() / static_cast<double>(measurement_count(inst));
}

double phase_retrieval_objective(const PhaseRetrievalInstance& inst, const Vec& x) {
  return phase_retrieval_smooth_part(inst, x) + inst.reg.value(x);
}

Vec phase_retrieval_grad_smooth(const PhaseRetrievalInstance& inst, const Vec& x) {
  const Eigen::Index M = measurement_count(inst);
  Vec grad = Vec::Zero(x.size());
  for (Eigen::Index i = 0; i < M; ++i) {
    const Vec ax = inst.A[i] * x;
    grad += (x.dot(ax) - inst.b[i]) * ax;
  }
  return (4.0 / static_cast<double>(M)) * grad;
}

Vec phase_retrieval_hess_smooth_apply(const PhaseRetrievalInstance& inst, const Vec& x,
                                      const Vec& v) {
  const Eigen::Index M = measurement_count(inst);
  Vec out = Vec::Zero(x.size());
  for (Eigen::Index i = 0; i < M; ++i) {
    const Vec ax = inst.A[i] * x;
    out += (x.dot(ax) - inst.b[i]) * (inst.A[i] * v) + 2.0 * ax.dot(v) * ax;
  }
  return (4.0 / static_cast<double>(M)) * out;
}

double model_m1(const PhaseRetrievalInstance& inst, const Vec& x, const Vec& center) {
  return phase_retrieval_smooth_part(inst, center) +
         phase_retrieval_grad_smooth(inst, center).dot(x - center) + inst.reg.value(x);
}

double model_m2(const PhaseRetrievalInstance& inst, const Vec& x, const Vec& center) {
  const Eigen::Index M = measurement_count(inst);
  const Vec d = x - center;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < M; ++i) {
    const Vec ac = inst.A[i] * center;
    const double r = center.dot(ac) - inst.b[i];
    sum += std::abs(r * r + 4.0 * r * ac.dot(d));
  }
  return sum / static_cast<double>(M) + inst.reg.value(x);
}

double phase_retrieval_L0(const PhaseRetrievalInstance& inst) {
  double total = 0.0;
  for (std::size_t i = 0; i < inst.A.size(); ++i) {
    const double fro = inst.A[i].norm();
    total += 3.0 * fro * fro + fro * std::abs(inst.b[static_cast<Eigen::Index>(i)]);
  }
  return total;
}

double robust_pr_objective(const PhaseRetrievalInstance& inst, const Vec& x) {
  return residuals(inst, x).lpNorm<1>() / static_cast<double>(measurement_count(inst)) +
         inst.reg.value(x);
}

double robust_pr_model(const PhaseRetrievalInstance& inst, const Vec& x, const Vec& center) {
  const Eigen::Index M = measurement_count(inst);
  const Vec d = x - center;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < M; ++i) {
    const Vec ac = inst.A[i] * center;
    sum += std::abs(center.dot(ac) - inst.b[i] + 2.0 * ac.dot(d));
  }
  return sum / static_cast<double>(M) + inst.reg.value(x);
}

double robust_pr_L1(const PhaseRetrievalInstance& inst) {
  double total = 0.0;
  for (const Mat& A : inst.A) {
    total += Eigen::SelfAdjointEigenSolver<Mat>(A, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
  }
  return std::max(0.0, 2.0 * total / static_cast<double>(inst.A.size()));
}

PoissonInstance gen_poisson(std::uint64_t seed, Eigen::Index M, Eigen::Index N, double epsilon,
                            Regularizer reg, double noise) {
  if (M < 1 || N < 1) throw std::invalid_argument("gen_poisson: M and N must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> signal(0.5, 1.5);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<Eigen::Index> column(0, N - 1);
  std::uniform_int_distribution<Eigen::Index> row(0, M - 1);

  PoissonInstance inst;
  inst.epsilon = epsilon;
  inst.reg = reg;
  inst.a.resize(M, N);
  for (Eigen::Index i = 0; i < M; ++i)
    for (Eigen::Index j = 0; j < N; ++j) inst.a(i, j) = unit(rng);
  // Positivity repair: every row and column carries some mass.
  for (Eigen::Index i = 0; i < M; ++i)
    if (inst.a.row(i).sum() <= 0.0) inst.a(i, column(rng)) = 0.5 + 0.5 * unit(rng);
  for (Eigen::Index j = 0; j < N; ++j)
    if (inst.a.col(j).sum() <= 0.0) inst.a(row(rng), j) = 0.5 + 0.5 * unit(rng);

  inst.planted.resize(N);
  for (Eigen::Index j = 0; j < N; ++j) inst.planted[j] = signal(rng);
  inst.b = inst.a * inst.planted;
  if (noise != 0.0) {
    for (Eigen::Index i = 0; i < M; ++i)
      inst.b[i] = std::max(1e-6 * inst.b[i], inst.b[i] * (1.0 + noise * normal(rng)));
  }
  validate(inst);
  return inst;
}

bool in_c_eps(const PoissonInstance& inst, const Vec& x) {
  return x.size() == inst.a.cols() && x.allFinite() && (x.array() >= inst.epsilon).all();
}

namespace {

void require_c_eps(const PoissonInstance& inst, const Vec& x, const char* what) {
  if (x.size() != inst.a.cols())
    throw DomainError(std::string(what) + ": dimension mismatch");
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    if (!(x[j] >= inst.epsilon)) {
      std::ostringstream msg;
      msg.precision(17);
      msg << what << ": coordinate " << j << " = " << x[j] << " is below epsilon = "
          << inst.epsilon;
      throw DomainError(msg.str());
    }
  }
}

}  // namespace

double poisson_smooth_part(const PoissonInstance& inst, const Vec& x) {
  require_c_eps(inst, x, "poisson_smooth_part");
  const Vec ax = inst.a * x;
  return ax.sum() - inst.b.dot(ax.array().log().matrix());
}

double poisson_objective(const PoissonInstance& inst, const Vec& x) {
  return poisson_smooth_part(inst, x) + inst.reg.value(x);
}

Vec poisson_grad_smooth(const PoissonInstance& inst, const Vec& x) {
  require_c_eps(inst, x, "poisson_grad_smooth");
  const Vec ax = inst.a * x;
  const Vec weights = (1.0 - inst.b.array() / ax.array()).matrix();
  return inst.a.transpose() * weights;
}

Vec poisson_hess_smooth_apply(const PoissonInstance& inst, const Vec& x, const Vec& v) {
  require_c_eps(inst, x, "poisson_hess_smooth_apply");
  const Vec ax = inst.a * x;
  const Vec av = inst.a * v;
  const Vec weights = (inst.b.array() * av.array() / ax.array().square()).matrix();
  return inst.a.transpose() * weights;
}

double poisson_model(const PoissonInstance& inst, const Vec& x, const Vec& center) {
  require_c_eps(inst, x, "poisson_model");
  return poisson_smooth_part(inst, center) + poisson_grad_smooth(inst, center).dot(x - center) +
         inst.reg.value(x);
}

double poisson_L(const PoissonInstance& inst) { return inst.b.sum(); }

std::string_view to_string(ProblemFamily family) {
  switch (family) {
    case ProblemFamily::PhaseRetrievalM1: return "phase_retrieval_m1";
    case ProblemFamily::PhaseRetrievalM2: return "phase_retrieval_m2";
    case ProblemFamily::RobustPR: return "robust_pr";
    case ProblemFamily::Poisson: return "poisson";
  }
  return "unknown";
}

ProblemFamily problem_family_from_string(std::string_view name) {
  for (auto family : {ProblemFamily::PhaseRetrievalM1, ProblemFamily::PhaseRetrievalM2,
                      ProblemFamily::RobustPR, ProblemFamily::Poisson}) {
    if (to_string(family) == name) return family;
  }
  throw std::invalid_argument("unknown problem '" + std::string(name) +
                              "' (expected phase_retrieval_m1, phase_retrieval_m2, robust_pr or "
                              "poisson)");
}

namespace {

// Positive floor so degenerate all-zero instances still make a valid problem.
double positive(double L) { return std::max(L, 1e-12); }

}  // namespace

ModelProblem make_phase_retrieval_m1(const PhaseRetrievalInstance& inst) {
  validate(inst);
  const Eigen::Index N = inst.A.front().rows();
  const double M = static_cast<double>(inst.A.size());
  ModelProblem p;
  p.name = "phase_retrieval_m1";
  p.kernel = {KernelKind::QuarticPlusQuadratic, N};
  // The Frobenius constant certifies (1/4) sum (.)^2; the objective carries 1/M.
  p.map_upper = positive(std::max(1.0, 4.0 / M) * phase_retrieval_L0(inst));
  p.map_lower = p.map_upper;
  p.subproblem_kind = SubproblemKind::ClosedFormQuartic;
  p.objective = [inst](const Vec& x) { return phase_retrieval_objective(inst, x); };
  p.model = [inst](const Vec& x, const Vec& c) { return model_m1(inst, x, c); };
  p.model_subgrad_center = [inst](const Vec& x, const Vec& c) {
    return phase_retrieval_hess_smooth_apply(inst, c, x - c);
  };
  p.subproblem = [inst, kernel = p.kernel](const Vec& c, double tau) {
    SubproblemSpec spec;
    spec.model_center = c;
    spec.tau = tau;
    spec.kernel = kernel;
    spec.linear_part = phase_retrieval_grad_smooth(inst, c);
    spec.reg = inst.reg;
    return spec;
  };
  p.sampling_origin = Vec::Zero(N);
  return p;
}

ModelProblem make_phase_retrieval_m2(const PhaseRetrievalInstance& inst) {
  ModelProblem p = make_phase_retrieval_m1(inst);
  p.name = "phase_retrieval_m2";
  p.subproblem_kind = SubproblemKind::PiecewiseLinearPDHG;
  p.model = [inst](const Vec& x, const Vec& c) { return model_m2(inst, x, c); };
  p.model_subgrad_center = nullptr;
  p.subproblem = [inst, kernel = p.kernel](const Vec& c, double tau) {
    const Eigen::Index M = static_cast<Eigen::Index>(inst.A.size());
    AffineRows rows{Mat(M, c.size()), Vec(M), 1.0 / static_cast<double>(M)};
    for (Eigen::Index i = 0; i < M; ++i) {
      const Vec ac = inst.A[i] * c;
      const double r = c.dot(ac) - inst.b[i];
      rows.K.row(i) = (4.0 * r) * ac.transpose();
      rows.offsets[i] = r * r - 4.0 * r * ac.dot(c);
    }
    SubproblemSpec spec;
    spec.model_center = c;
    spec.tau = tau;
    spec.kernel = kernel;
    spec.affine_rows = std::move(rows);
    spec.reg = inst.reg;
    return spec;
  };
  return p;
}

ModelProblem make_robust_pr(const PhaseRetrievalInstance& inst) {
  validate(inst);
  const Eigen::Index N = inst.A.front().rows();
  ModelProblem p;
  p.name = "robust_pr";
  p.kernel = {KernelKind::Euclidean, N};
  p.map_upper = positive(robust_pr_L1(inst));
  p.map_lower = p.map_upper;
  p.subproblem_kind = SubproblemKind::PiecewiseLinearPDHG;
  p.objective = [inst](const Vec& x) { return robust_pr_objective(inst, x); };
  p.model = [inst](const Vec& x, const Vec& c) { return robust_pr_model(inst, x, c); };
  p.subproblem = [inst, kernel = p.kernel](const Vec& c, double tau) {
    const Eigen::Index M = static_cast<Eigen::Index>(inst.A.size());
    AffineRows rows{Mat(M, c.size()), Vec(M), 1.0 / static_cast<double>(M)};
    for (Eigen::Index i = 0; i < M; ++i) {
      const Vec ac = inst.A[i] * c;
      rows.K.row(i) = 2.0 * ac.transpose();
      rows.offsets[i] = c.dot(ac) - inst.b[i] - 2.0 * ac.dot(c);
    }
    SubproblemSpec spec;
    spec.model_center = c;
    spec.tau = tau;
    spec.kernel = kernel;
    spec.affine_rows = std::move(rows);
    spec.reg = inst.reg;
    return spec;
  };
  p.sampling_origin = Vec::Zero(N);
  return p;
}

ModelProblem make_poisson(const PoissonInstance& inst) {
  validate(inst);
  const Eigen::Index N = inst.a.cols();
  ModelProblem p;
  p.name = "poisson";
  p.kernel = {KernelKind::Burg, N};
  p.map_upper = positive(poisson_L(inst));
  p.map_lower = p.map_upper;
  p.subproblem_kind = SubproblemKind::ClosedFormBurg;
  p.objective = [inst](const Vec& x) { return poisson_objective(inst, x); };
  p.model = [inst](const Vec& x, const Vec& c) { return poisson_model(inst, x, c); };
  p.model_subgrad_center = [inst](const Vec& x, const Vec& c) {
    return poisson_hess_smooth_apply(inst, c, x - c);
  };
  p.subproblem = [inst, kernel = p.kernel](const Vec& c, double tau) {
    SubproblemSpec spec;
    spec.model_center = c;
    spec.tau = tau;
    spec.kernel = kernel;
    spec.linear_part = poisson_grad_smooth(inst, c);
    spec.reg = inst.reg;
    spec.box_floor = inst.epsilon;
    return spec;
  };
  p.feasible = [inst](const Vec& x) { return in_c_eps(inst, x); };
  p.sampling_origin = Vec::Constant(N, 3.5);
  return p;
}

// --- JSON -------------------------------------------------------------------

namespace {

using nlohmann::json;

json vec_to_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vec vec_from_json(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vec>(values.data(), static_cast<Eigen::Index>(values.size()));
}

json mat_to_json(const Mat& m) {
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) flat.push_back(m(i, j));
  return flat;
}

Mat mat_from_json(const json& j, Eigen::Index rows, Eigen::Index cols) {
  const auto flat = j.get<std::vector<double>>();
  if (static_cast<Eigen::Index>(flat.size()) != rows * cols)
    throw std::invalid_argument("instance json: matrix has the wrong number of entries");
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j2 = 0; j2 < cols; ++j2) m(i, j2) = flat[static_cast<std::size_t>(i * cols + j2)];
  return m;
}

Regularizer reg_from_json(const json& j) {
  return {reg_kind_from_string(j.at("reg").get<std::string>()), j.at("lambda").get<double>()};
}

}  // namespace

std::string to_json(const PhaseRetrievalInstance& inst) {
  json doc;
  doc["type"] = "phase_retrieval";
  doc["M"] = inst.A.size();
  doc["N"] = inst.A.empty() ? 0 : inst.A.front().rows();
  json mats = json::array();
  for (const Mat& A : inst.A) mats.push_back(mat_to_json(A));
  doc["A"] = std::move(mats);
  doc["b"] = vec_to_json(inst.b);
  doc["reg"] = to_string(inst.reg.kind);
  doc["lambda"] = inst.reg.lambda;
  doc["planted"] = vec_to_json(inst.planted);
  return doc.dump();
}

std::string to_json(const PoissonInstance& inst) {
  json doc;
  doc["type"] = "poisson";
  doc["M"] = inst.a.rows();
  doc["N"] = inst.a.cols();
  doc["a"] = mat_to_json(inst.a);
  doc["b"] = vec_to_json(inst.b);
  doc["epsilon"] = inst.epsilon;
  doc["reg"] = to_string(inst.reg.kind);
  doc["lambda"] = inst.reg.lambda;
  doc["planted"] = vec_to_json(inst.planted);
  return doc.dump();
}

PhaseRetrievalInstance phase_retrieval_from_json(std::string_view text) {
  const json doc = json::parse(text);
  if (doc.at("type") != "phase_retrieval")
    throw std::invalid_argument("instance json: not a phase_retrieval document");
  const auto N = doc.at("N").get<Eigen::Index>();
  PhaseRetrievalInstance inst;
  for (const auto& m : doc.at("A")) inst.A.push_back(mat_from_json(m, N, N));
  inst.b = vec_from_json(doc.at("b"));
  inst.reg = reg_from_json(doc);
  inst.planted = vec_from_json(doc.at("planted"));
  validate(inst);
  return inst;
}

PoissonInstance poisson_from_json(std::string_view text) {
  const json doc = json::parse(text);
  if (doc.at("type") != "poisson")
    throw std::invalid_argument("instance json: not a poisson document");
  PoissonInstance inst;
  inst.a = mat_from_json(doc.at("a"), doc.at("M").get<Eigen::Index>(),
                         doc.at("N").get<Eigen::Index>());
  inst.b = vec_from_json(doc.at("b"));
  inst.epsilon = doc.at("epsilon").get<double>();
  inst.reg = reg_from_json(doc);
  inst.planted = vec_from_json(doc.at("planted"));
  validate(inst);
  return inst;
}

}  // namespace bregmin
