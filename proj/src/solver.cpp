#include "bflow/solver.hpp"

#include <cmath>

#include <Eigen/SVD>

namespace bflow {

CGResult cg_solve(const LinearOperator& apply, const Eigen::VectorXd& rhs,
                  const CGConfig& cfg, std::vector<double>* residual_history) {
  cfg.validate();
  if (!rhs.allFinite()) {
    throw NumericalBreakdown("cg_solve: right-hand side is not finite", 0);
  }

  const double rhs_norm = rhs.norm();
  if (rhs_norm == 0.0) {
    return {Eigen::VectorXd::Zero(rhs.size()), 0, 0.0, true};
  }

  Eigen::VectorXd x = cfg.x0.size() == 0 ? Eigen::VectorXd::Zero(rhs.size()) : cfg.x0;
  if (x.size() != rhs.size()) {
    throw DimensionError("cg_solve: start vector length mismatch");
  }

  Eigen::VectorXd r = cfg.x0.size() == 0 ? rhs : Eigen::VectorXd(rhs - apply(x));
  Eigen::VectorXd p = r;
  double rs = r.squaredNorm();
  double rel = std::sqrt(rs) / rhs_norm;
  if (rel <= cfg.tol) {
    return {std::move(x), 0, rel, true};
  }

  for (int k = 1; k <= cfg.max_iter; ++k) {
    const Eigen::VectorXd ap = apply(p);
    const double p_ap = p.dot(ap);
    if (!std::isfinite(p_ap)) {
      throw NumericalBreakdown("cg_solve: operator produced NaN/Inf", k);
    }
    if (p_ap == 0.0) {
      // Search direction in the operator null space; stop and report.
      return {std::move(x), k - 1, rel, false};
    }
    const double alpha = rs / p_ap;
    x += alpha * p;
    r -= alpha * ap;
    const double rs_new = r.squaredNorm();
    if (!std::isfinite(rs_new)) {
      throw NumericalBreakdown("cg_solve: residual is not finite", k);
    }
    rel = std::sqrt(rs_new) / rhs_norm;
    if (residual_history) residual_history->push_back(rel);
    if (rel <= cfg.tol) {
      return {std::move(x), k, rel, true};
    }
    p = r + (rs_new / rs) * p;
    rs = rs_new;
  }
  return {std::move(x), cfg.max_iter, rel, false};
}

CGResult tikhonov_solve(const FlowSystem& sys, const TikhonovConfig& cfg,
                        const CGConfig& cg) {
  if (cfg.alpha <= 0.0) {
    throw DomainError("tikhonov_solve: alpha must be positive");
  }
  const auto apply = [&](const Eigen::VectorXd& v) {
    return Eigen::VectorXd(sys.A.apply_transpose(sys.A.apply(v)) +
                           cfg.alpha * sys.L.apply(v));
  };
  return cg_solve(apply, sys.A.apply_transpose(sys.b), cg);
}

Eigen::VectorXd least_squares_dense(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  if (a.rows() != b.size()) {
    throw DimensionError("least_squares_dense: matrix/vector shapes differ");
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1e-12);
  return svd.solve(b);
}

Eigen::VectorXd posterior_precision_apply(const FlowSystem& sys, double lambda,
                                          double delta, const Eigen::VectorXd& v) {
  if (v.size() != sys.n) {
    throw DimensionError("posterior_precision_apply: vector length mismatch");
  }
  return lambda * sys.A.apply_transpose(sys.A.apply(v)) + delta * sys.L.apply(v);
}

ConditionalSample sample_conditional_x(const FlowSystem& sys, double lambda,
                                       double delta, const CGConfig& cg,
                                       RandomStream& rng) {
  if (lambda <= 0.0 || delta <= 0.0) {
    throw DomainError("sample_conditional_x: lambda and delta must be positive");
  }
  const int m = sys.m;

  Eigen::VectorXd e1(m);
  for (int i = 0; i < m; ++i) e1[i] = rng.normal();
  Eigen::VectorXd e2(4 * m);
  for (int i = 0; i < 4 * m; ++i) e2[i] = rng.normal();

  // C^T e2 per block: the u block sees [Qx; Qy]^T applied to the first two
  // segments, the v block the last two.
  Eigen::VectorXd w(2 * m);
  w.head(m) = sys.qx.apply_transpose(e2.segment(0, m)) +
              sys.qy.apply_transpose(e2.segment(m, m));
  w.tail(m) = sys.qx.apply_transpose(e2.segment(2 * m, m)) +
              sys.qy.apply_transpose(e2.segment(3 * m, m));
  w *= std::sqrt(delta);
  w += std::sqrt(lambda) * sys.A.apply_transpose(e1);

  const Eigen::VectorXd rhs = lambda * sys.A.apply_transpose(sys.b) + w;
  const auto apply = [&](const Eigen::VectorXd& v) {
    return posterior_precision_apply(sys, lambda, delta, v);
  };
  CGResult res = cg_solve(apply, rhs, cg);
  return {std::move(res.x), res.converged, res.iterations};
}

}  // namespace bflow
