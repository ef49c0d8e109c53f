#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "swerve/errors.hpp"
#include "swerve/symreg/expr.hpp"
#include "swerve/symreg/levmar.hpp"

namespace swerve::symreg {

inline double mse(const Expr& e, const std::vector<double>& xs,
                  const std::vector<double>& ys) {
  double sum = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = eval_expr(e, xs[i]) - ys[i];
    sum += r * r;
  }
  if (!std::isfinite(sum)) return std::numeric_limits<double>::infinity();
  return xs.empty() ? std::numeric_limits<double>::infinity() : sum / xs.size();
}

namespace detail {

// The complexity cap (25 nodes) bounds constants at 13, so a fixed-size
// gradient vector avoids heap traffic in the optimization hot loop.
constexpr int kMaxConstants = 16;

struct ValGrad {
  double value = 0.0;
  std::array<double, kMaxConstants> grad{};
};

inline void extract_constants(const Expr& e, std::vector<double>& out) {
  if (e.op == Op::Constant) out.push_back(e.value);
  for (const Expr& c : e.children) extract_constants(c, out);
}

inline void apply_constants(Expr& e, const Eigen::VectorXd& values, int& index) {
  if (e.op == Op::Constant) e.value = values(index++);
  for (Expr& c : e.children) apply_constants(c, values, index);
}

/// Forward-mode value and gradient with respect to the constants, indexed
/// in preorder.
inline ValGrad eval_with_grad(const Expr& e, double x, int& cidx) {
  ValGrad out;
  switch (e.op) {
    case Op::Constant:
      out.value = e.value;
      out.grad[cidx++] = 1.0;
      return out;
    case Op::Variable:
      out.value = x;
      return out;
    case Op::Sin:
    case Op::Cos: {
      ValGrad child = eval_with_grad(e.children[0], x, cidx);
      const double scale =
          e.op == Op::Sin ? std::cos(child.value) : -std::sin(child.value);
      out.value = e.op == Op::Sin ? std::sin(child.value) : std::cos(child.value);
      for (int j = 0; j < kMaxConstants; ++j) out.grad[j] = scale * child.grad[j];
      return out;
    }
    case Op::Add: {
      const ValGrad l = eval_with_grad(e.children[0], x, cidx);
      const ValGrad r = eval_with_grad(e.children[1], x, cidx);
      out.value = l.value + r.value;
      for (int j = 0; j < kMaxConstants; ++j) out.grad[j] = l.grad[j] + r.grad[j];
      return out;
    }
    case Op::Mul: {
      const ValGrad l = eval_with_grad(e.children[0], x, cidx);
      const ValGrad r = eval_with_grad(e.children[1], x, cidx);
      out.value = l.value * r.value;
      for (int j = 0; j < kMaxConstants; ++j)
        out.grad[j] = l.value * r.grad[j] + r.value * l.grad[j];
      return out;
    }
  }
  return out;
}

}  // namespace detail

/// Gradient-based local refinement of an expression's constants against the
/// data (damped Gauss-Newton with analytic derivatives). The returned
/// expression never has a larger MSE than the input; expressions without
/// constants, or whose evaluation is non-finite, come back unchanged.
inline Expr optimize_constants(const Expr& e, const std::vector<double>& xs,
                               const std::vector<double>& ys, int max_iters = 50) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw Error(ErrorKind::InvalidInput,
                "constant optimization needs >= 2 (x, y) samples of equal length");

  std::vector<double> constants;
  detail::extract_constants(e, constants);
  const int m = static_cast<int>(constants.size());
  if (m == 0 || m > detail::kMaxConstants) return e;

  const int n = static_cast<int>(xs.size());
  Eigen::VectorXd theta(m);
  for (int j = 0; j < m; ++j) theta(j) = constants[j];

  Expr scratch = e;
  const auto residual = [&](const Eigen::VectorXd& t) {
    int idx = 0;
    detail::apply_constants(scratch, t, idx);
    Eigen::VectorXd r(n);
    for (int i = 0; i < n; ++i) r(i) = eval_expr(scratch, xs[i]) - ys[i];
    return r;
  };
  const auto jacobian = [&](const Eigen::VectorXd& t) {
    int idx = 0;
    detail::apply_constants(scratch, t, idx);
    Eigen::MatrixXd jac(n, m);
    for (int i = 0; i < n; ++i) {
      int cidx = 0;
      const detail::ValGrad vg = detail::eval_with_grad(scratch, xs[i], cidx);
      for (int j = 0; j < m; ++j) jac(i, j) = vg.grad[j];
    }
    return jac;
  };

  const detail::LevMarResult res =
      detail::levenberg_marquardt(theta, residual, jacobian, {.max_iters = max_iters});

  Expr out = e;
  int idx = 0;
  detail::apply_constants(out, res.theta, idx);
  return mse(out, xs, ys) <= mse(e, xs, ys) ? out : e;
}

}  // namespace swerve::symreg
