#pragma once

#include <cmath>
#include <limits>

#include <Eigen/Dense>

namespace swerve::symreg::detail {

struct LevMarOptions {
  int max_iters = 100;
  double lambda_init = 1e-3;
  double step_tol = 1e-14;
};

struct LevMarResult {
  Eigen::VectorXd theta;
  double cost = std::numeric_limits<double>::infinity();  // sum of squares
  int iters = 0;
};

/// Damped Gauss-Newton minimization of |r(theta)|^2. residual_fn returns the
/// residual vector, jacobian_fn its Jacobian at theta. Steps are accepted
/// only when the cost decreases, so the result never degrades the start.
template <typename ResidualFn, typename JacobianFn>
LevMarResult levenberg_marquardt(Eigen::VectorXd theta, ResidualFn&& residual_fn,
                                 JacobianFn&& jacobian_fn,
                                 const LevMarOptions& opts = {}) {
  LevMarResult res;
  res.theta = theta;

  Eigen::VectorXd r = residual_fn(theta);
  if (!r.allFinite()) return res;
  double cost = r.squaredNorm();
  res.cost = cost;

  double lambda = opts.lambda_init;
  for (int iter = 0; iter < opts.max_iters; ++iter) {
    res.iters = iter + 1;
    const Eigen::MatrixXd jac = jacobian_fn(theta);
    if (!jac.allFinite()) break;
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd jtr = jac.transpose() * r;

    bool accepted = false;
    for (int attempt = 0; attempt < 12; ++attempt) {
      Eigen::MatrixXd damped = jtj;
      for (int i = 0; i < damped.rows(); ++i)
        damped(i, i) += lambda * std::max(jtj(i, i), 1e-12);
      const Eigen::VectorXd step = damped.ldlt().solve(-jtr);
      if (!step.allFinite()) {
        lambda *= 10.0;
        continue;
      }
      const Eigen::VectorXd candidate = theta + step;
      const Eigen::VectorXd r_new = residual_fn(candidate);
      const double cost_new = r_new.allFinite()
                                  ? r_new.squaredNorm()
                                  : std::numeric_limits<double>::infinity();
      if (cost_new < cost) {
        theta = candidate;
        r = r_new;
        cost = cost_new;
        res.theta = theta;
        res.cost = cost;
        lambda = std::max(lambda / 3.0, 1e-12);
        accepted = true;
        if (step.norm() < opts.step_tol * (1.0 + theta.norm())) return res;
        break;
      }
      lambda *= 10.0;
      if (lambda > 1e12) return res;
    }
    if (!accepted) break;
  }
  return res;
}

}  // namespace swerve::symreg::detail
