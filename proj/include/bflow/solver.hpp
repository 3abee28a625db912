#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "bflow/operators.hpp"
#include "bflow/rng.hpp"

namespace bflow {

struct CGConfig {
  double tol = 1e-6;      // relative residual target
  int max_iter = 500;
  Eigen::VectorXd x0;     // empty means all zeros

  void validate() const {
    if (tol <= 0.0) throw DomainError("CGConfig: tol must be positive");
    if (max_iter < 1) throw DomainError("CGConfig: max_iter must be at least 1");
  }
};

struct CGResult {
  Eigen::VectorXd x;
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

using LinearOperator = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Conjugate gradients for a symmetric positive (semi)definite operator.
/// Returns the iterate and a converged flag; never silently truncates. A zero
/// right-hand side short-circuits to x = 0. NaN/Inf anywhere in the recurrence
/// throws NumericalBreakdown with the iteration index. If residual_history is
/// given, the relative residual after every iteration is appended to it.
CGResult cg_solve(const LinearOperator& apply, const Eigen::VectorXd& rhs,
                  const CGConfig& cfg, std::vector<double>* residual_history = nullptr);

struct TikhonovConfig {
  double alpha = 1.0;  // > 0
};

/// Solves (A^T A + alpha L) x = A^T b by CG. Deterministic given config;
/// non-convergence is reported through the result flag.
CGResult tikhonov_solve(const FlowSystem& sys, const TikhonovConfig& cfg,
                        const CGConfig& cg);

/// Minimum-norm least-squares solution via SVD pseudo-inverse, truncating
/// singular values below 1e-12 times the largest. Test-scale matrices only.
Eigen::VectorXd least_squares_dense(const Eigen::MatrixXd& a, const Eigen::VectorXd& b);

/// (lambda A^T A + delta L) v without forming the product matrix.
Eigen::VectorXd posterior_precision_apply(const FlowSystem& sys, double lambda,
                                          double delta, const Eigen::VectorXd& v);

struct ConditionalSample {
  Eigen::VectorXd x;
  bool cg_converged = false;
  int cg_iterations = 0;
};

/// One draw from the Gaussian full conditional
///   N((lambda A^T A + delta L)^{-1} lambda A^T b, (lambda A^T A + delta L)^{-1})
/// via the perturbed linear system: the right-hand side is lambda A^T b + w
/// with w = sqrt(lambda) A^T e1 + sqrt(delta) C^T e2, where e1, e2 are
/// standard normal (lengths m and 4m) and C = I_2 (x) [Qx; Qy] satisfies
/// C^T C = L. The perturbation has exact covariance lambda A^T A + delta L by
/// construction, with no factorization of the precision matrix.
ConditionalSample sample_conditional_x(const FlowSystem& sys, double lambda,
                                       double delta, const CGConfig& cg,
                                       RandomStream& rng);

}  // namespace bflow
