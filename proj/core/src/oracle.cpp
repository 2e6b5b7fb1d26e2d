// Reference minimizer for subproblem specs, used by the test suites.
//
// The subproblem is rewritten in epigraph form over z = (x, t, s):
//   min  <lin, x - c> + w sum t + lambda sum s | (lambda/2)|x|^2 + (1/tau) D_h(x, c)
//   s.t. +-(K_i x + o_i) <= t_i,   +-x_j <= s_j (L1),   eps - x_j <= 0 (box)
// and solved with a primal-dual interior point method. This shares nothing with
// the closed forms or PDHG beyond kernel derivatives.

#include "bregmin/subsolve.hpp"

#include <cmath>
#include <limits>

namespace bregmin {

namespace {

struct Layout {
  Eigen::Index n = 0;       // x
  Eigen::Index m_rows = 0;  // t
  Eigen::Index n_l1 = 0;    // s
  Eigen::Index size() const { return n + m_rows + n_l1; }
};

// Linear inequality constraints a^T z + b <= 0.
struct Constraints {
  Mat A;  // one row per constraint
  Vec b;
  Eigen::Index count() const { return A.rows(); }
};

Constraints build_constraints(const SubproblemSpec& spec, const Layout& lay) {
  const Eigen::Index rows = 2 * lay.m_rows + 2 * lay.n_l1 + (spec.box_floor ? lay.n : 0);
  Constraints con{Mat::Zero(rows, lay.size()), Vec::Zero(rows)};
  Eigen::Index r = 0;
  if (spec.affine_rows) {
    const auto& ar = *spec.affine_rows;
    for (Eigen::Index i = 0; i < lay.m_rows; ++i) {
      for (double sign : {1.0, -1.0}) {
        con.A.row(r).head(lay.n) = sign * ar.K.row(i);
        con.A(r, lay.n + i) = -1.0;
        con.b[r] = sign * ar.offsets[i];
        ++r;
      }
    }
  }
  for (Eigen::Index j = 0; j < lay.n_l1; ++j) {
    for (double sign : {1.0, -1.0}) {
      con.A(r, j) = sign;
      con.A(r, lay.n + lay.m_rows + j) = -1.0;
      ++r;
    }
  }
  if (spec.box_floor) {
    for (Eigen::Index j = 0; j < lay.n; ++j) {
      con.A(r, j) = -1.0;
      con.b[r] = *spec.box_floor;
      ++r;
    }
  }
  return con;
}

struct Oracle {
  const SubproblemSpec& spec;
  Layout lay;
  Vec grad_center;
  Vec lin;       // gradient of the linear terms in z
  double l2 = 0;  // lambda for squared L2

  Vec gradient(const Vec& z) const {
    const Vec x = z.head(lay.n);
    Vec g = lin;
    g.head(lay.n) += l2 * x + (kernel_grad(spec.kernel, x) - grad_center) / spec.tau;
    return g;
  }

  Mat hessian(const Vec& z) const {
    const Vec x = z.head(lay.n);
    Mat H = Mat::Zero(lay.size(), lay.size());
    H.topLeftCorner(lay.n, lay.n) =
        kernel_hessian(spec.kernel, x) / spec.tau + l2 * Mat::Identity(lay.n, lay.n);
    return H;
  }
};

}  // namespace

Vec oracle_minimize(const SubproblemSpec& spec, double tol) {
  const Eigen::Index n = spec.model_center.size();
  if (n > 20) throw OracleFailed("oracle_minimize: dimension above 20");
  if (!(spec.tau > 0.0)) throw OracleFailed("oracle_minimize: tau must be positive");

  Layout lay;
  lay.n = n;
  lay.m_rows = spec.affine_rows ? spec.affine_rows->K.rows() : 0;
  lay.n_l1 = spec.reg.kind == RegKind::L1 ? n : 0;

  Oracle oracle{spec, lay, kernel_grad(spec.kernel, spec.model_center), Vec::Zero(lay.size())};
  if (spec.linear_part) oracle.lin.head(n) = *spec.linear_part;
  if (spec.affine_rows) oracle.lin.segment(n, lay.m_rows).setConstant(spec.affine_rows->weight);
  if (spec.reg.kind == RegKind::L1) oracle.lin.tail(lay.n_l1).setConstant(spec.reg.lambda);
  if (spec.reg.kind == RegKind::SquaredL2) oracle.l2 = spec.reg.lambda;

  const Constraints con = build_constraints(spec, lay);
  const Eigen::Index m = con.count();

  // Strictly feasible start.
  Vec z = Vec::Zero(lay.size());
  Vec x0 = spec.model_center;
  if (spec.box_floor) {
    const double eps = *spec.box_floor;
    const double lift = std::max(eps, 1e-12);
    x0 = x0.cwiseMax(eps + lift);
  }
  z.head(n) = x0;
  if (spec.affine_rows) {
    const auto& ar = *spec.affine_rows;
    z.segment(n, lay.m_rows) = (ar.K * x0 + ar.offsets).cwiseAbs().array() + 1.0;
  }
  if (lay.n_l1 > 0) z.tail(lay.n_l1) = x0.cwiseAbs().array() + 1.0;

  auto slack = [&](const Vec& zz) -> Vec { return con.A * zz + con.b; };  // must stay < 0
  auto feasible = [&](const Vec& zz) {
    if (m > 0 && (slack(zz).array() >= 0.0).any()) return false;
    return in_interior(spec.kernel, Vec(zz.head(n)));
  };
  if (!feasible(z)) throw OracleFailed("oracle_minimize: could not build a feasible start");

  Vec u = m > 0 ? Vec((-slack(z)).cwiseInverse()) : Vec();
  constexpr double mu = 10.0;

  auto residual = [&](const Vec& zz, const Vec& uu, double t) {
    Vec r_dual = oracle.gradient(zz);
    if (m > 0) r_dual += con.A.transpose() * uu;
    Vec r(zz.size() + m);
    r.head(zz.size()) = r_dual;
    if (m > 0) r.tail(m) = -uu.cwiseProduct(slack(zz)).array() - 1.0 / t;
    return r;
  };

  for (int iter = 0; iter < 500; ++iter) {
    const Vec g = m > 0 ? slack(z) : Vec();
    const double eta = m > 0 ? -g.dot(u) : 0.0;
    const double t = m > 0 ? mu * static_cast<double>(m) / std::max(eta, 1e-300) : 1.0;

    const Vec grad = oracle.gradient(z);
    Vec r_dual = grad;
    if (m > 0) r_dual += con.A.transpose() * u;
    const double scale = 1.0 + grad.cwiseAbs().maxCoeff();
    if (r_dual.norm() <= tol * scale && eta <= tol) return z.head(n);

    Mat H = oracle.hessian(z);
    Vec rhs = -r_dual;
    Vec r_cent;
    if (m > 0) {
      r_cent = -u.cwiseProduct(g).array() - 1.0 / t;
      const Vec weight = -u.cwiseQuotient(g);  // > 0
      H.noalias() += con.A.transpose() * weight.asDiagonal() * con.A;
      rhs -= con.A.transpose() * r_cent.cwiseQuotient(g);
    }
    const Eigen::LDLT<Mat> ldlt(H);
    const Vec dz = ldlt.solve(rhs);
    if (!dz.allFinite()) throw OracleFailed("oracle_minimize: singular Newton system");
    Vec du;
    if (m > 0) du = (r_cent - u.cwiseProduct(con.A * dz)).cwiseQuotient(g);

    double step = 1.0;
    if (m > 0) {
      for (Eigen::Index i = 0; i < m; ++i)
        if (du[i] < 0.0) step = std::min(step, -u[i] / du[i]);
      step *= 0.99;
    }
    while (step > 1e-20 && !feasible(z + step * dz)) step *= 0.5;
    const double r0 = residual(z, u, t).norm();
    while (step > 1e-20) {
      const Vec zn = z + step * dz;
      const Vec un = m > 0 ? Vec(u + step * du) : Vec();
      if (residual(zn, un, t).norm() <= (1.0 - 0.01 * step) * r0) break;
      step *= 0.5;
    }
    if (step <= 1e-20) {
      // Stalled at the floating-point floor; accept if already near optimal.
      if (r_dual.norm() <= 1e3 * tol * scale && eta <= 1e3 * tol) return z.head(n);
      throw OracleFailed("oracle_minimize: line search stalled");
    }
    z += step * dz;
    if (m > 0) u += step * du;
  }
  throw OracleFailed("oracle_minimize: iteration budget exhausted");
}

}  // namespace bregmin
