#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "swerve/errors.hpp"
#include "swerve/symreg/levmar.hpp"

namespace swerve::symreg {

/// Parameters of y = k*sin(a*x + b) + c.
struct SinusoidParams {
  double k = 0.0;
  double a = 1.0;
  double b = 0.0;
  double c = 0.0;

  double eval(double x) const { return k * std::sin(a * x + b) + c; }
};

/// Maps the sign/phase symmetries k*sin(a*x+b) = -k*sin(a*x+b+pi) =
/// -k*sin(-a*x-b) onto one representative: k >= 0, a > 0, b in [-pi, pi).
/// Degenerate zero-amplitude fits get the fixed form (0, 1, 0, c).
inline SinusoidParams canonicalize(SinusoidParams p) {
  if (p.a < 0.0) {
    p.a = -p.a;
    p.b = -p.b;
    p.k = -p.k;
  }
  if (p.k < 0.0) {
    p.k = -p.k;
    p.b += M_PI;
  }
  double w = std::fmod(p.b + M_PI, 2.0 * M_PI);
  if (w < 0.0) w += 2.0 * M_PI;
  p.b = w - M_PI;
  if (p.k == 0.0 || p.a == 0.0) {
    p.k = 0.0;
    p.a = 1.0;
    p.b = 0.0;
  }
  return p;
}

/// Nonlinear least squares for k*sin(a*x+b) + c.
///
/// Sinusoid fitting is multimodal in the frequency, so the solver sweeps a
/// log-spaced grid of candidate frequencies spanning one-tenth cycle over
/// the x range up to Nyquist of the sample spacing; at each fixed frequency
/// the remaining parameters are a linear solve (k*cos b, k*sin b, c), and
/// every start is polished with damped Gauss-Newton before taking the
/// global best. The result is canonicalized (k >= 0, a > 0, b in [-pi,pi)).
inline SinusoidParams fit_sinusoid(const std::vector<double>& xs,
                                   const std::vector<double>& ys) {
  const int n = static_cast<int>(xs.size());
  if (n < 4 || ys.size() != xs.size())
    throw Error(ErrorKind::InvalidInput,
                "sinusoid fit needs >= 4 (x, y) samples of equal length");
  for (int i = 0; i < n; ++i)
    if (!std::isfinite(xs[i]) || !std::isfinite(ys[i]))
      throw Error(ErrorKind::InvalidInput, "non-finite value in sinusoid fit data");

  Eigen::Map<const Eigen::VectorXd> y(ys.data(), n);
  const double y_mean = y.mean();

  const auto [min_it, max_it] = std::minmax_element(ys.begin(), ys.end());
  if (*max_it - *min_it == 0.0) return SinusoidParams{0.0, 1.0, 0.0, y_mean};

  std::vector<double> sorted_x = xs;
  std::sort(sorted_x.begin(), sorted_x.end());
  const double range = sorted_x.back() - sorted_x.front();
  if (!(range > 0.0))
    throw Error(ErrorKind::InvalidInput, "sinusoid fit needs spread in x");
  double min_step = range;
  for (int i = 1; i < n; ++i) {
    const double step = sorted_x[i] - sorted_x[i - 1];
    if (step > 0.0) min_step = std::min(min_step, step);
  }

  const double a_lo = 2.0 * M_PI / (range * 10.0);
  const double a_hi = 2.0 * M_PI / (min_step * 2.0);
  constexpr int kStarts = 32;

  const auto residual = [&](const Eigen::VectorXd& t) {
    Eigen::VectorXd r(n);
    for (int i = 0; i < n; ++i)
      r(i) = t(0) * std::sin(t(1) * xs[i] + t(2)) + t(3) - ys[i];
    return r;
  };
  const auto jacobian = [&](const Eigen::VectorXd& t) {
    Eigen::MatrixXd jac(n, 4);
    for (int i = 0; i < n; ++i) {
      const double phase = t(1) * xs[i] + t(2);
      jac(i, 0) = std::sin(phase);
      jac(i, 1) = t(0) * xs[i] * std::cos(phase);
      jac(i, 2) = t(0) * std::cos(phase);
      jac(i, 3) = 1.0;
    }
    return jac;
  };

  double best_cost = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_theta;
  for (int s = 0; s < kStarts; ++s) {
    const double frac = kStarts == 1 ? 0.0 : static_cast<double>(s) / (kStarts - 1);
    const double a = a_lo * std::pow(a_hi / a_lo, frac);

    Eigen::MatrixXd design(n, 3);
    for (int i = 0; i < n; ++i)
      design.row(i) << std::sin(a * xs[i]), std::cos(a * xs[i]), 1.0;
    const Eigen::Vector3d lin = design.colPivHouseholderQr().solve(y);

    Eigen::VectorXd theta(4);
    theta << std::hypot(lin(0), lin(1)), a, std::atan2(lin(1), lin(0)), lin(2);
    const detail::LevMarResult res =
        detail::levenberg_marquardt(theta, residual, jacobian,
                                    {.max_iters = 200, .step_tol = 1e-15});
    if (res.cost < best_cost && res.theta.allFinite()) {
      best_cost = res.cost;
      best_theta = res.theta;
    }
  }

  if (!std::isfinite(best_cost)) {
    std::ostringstream msg;
    msg << "sinusoid fit did not converge from any frequency start"
        << " (best residual sum of squares: " << best_cost << ")";
    throw Error(ErrorKind::FitFailure, msg.str());
  }

  return canonicalize(
      SinusoidParams{best_theta(0), best_theta(1), best_theta(2), best_theta(3)});
}

}  // namespace swerve::symreg
