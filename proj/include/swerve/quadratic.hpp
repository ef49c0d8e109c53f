#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "swerve/core.hpp"
#include "swerve/errors.hpp"

namespace swerve {

/// Coefficients of the quadratic lateral-deviation model
///   y = a0 + a1*x + a2*D + a3*x^2 + a4*D^2 + a5*x*D
/// with x the along-motion coordinate (cm), D the current inter-pedestrian
/// distance (cm) and y the cross-motion deviation (cm).
struct QuadraticSwerveParams {
  std::array<double, 6> a{};

  double eval(double x, double d) const {
    return a[0] + a[1] * x + a[2] * d + a[3] * x * x + a[4] * d * d + a[5] * x * d;
  }

  /// The same surface expressed in shifted coordinates x' = x - dx,
  /// y' = y - dy (D is translation-invariant). Useful when samples were
  /// re-based, e.g. x measured from an approach-window start.
  QuadraticSwerveParams rebased(double dx, double dy) const {
    QuadraticSwerveParams out;
    out.a[0] = a[0] + a[1] * dx + a[3] * dx * dx - dy;
    out.a[1] = a[1] + 2.0 * a[3] * dx;
    out.a[2] = a[2] + a[5] * dx;
    out.a[3] = a[3];
    out.a[4] = a[4];
    out.a[5] = a[5];
    return out;
  }

  void validate() const {
    for (double v : a)
      if (!std::isfinite(v))
        throw Error(ErrorKind::InvalidConfig, "non-finite quadratic coefficient");
  }
};

/// One regression sample: along-motion coordinate, inter-pedestrian
/// distance, observed lateral deviation (all cm).
struct FitSample {
  double x = 0.0;
  double d = 0.0;
  double y = 0.0;
};

struct FitDiagnostics {
  double rmse = 0.0;
  double r_squared = 0.0;
  int n_points = 0;
  /// Ratio of extreme diagonal magnitudes of the R factor (computed on the
  /// standardized basis), a cheap conditioning estimate.
  double condition_estimate = 0.0;

  /// Fits on fewer than 20 samples are flagged as unreliable; the intended
  /// regime is the 61-frame approach window.
  bool low_sample_count() const { return n_points < 20; }
};

/// Ordinary least squares over the basis [1, x, D, x^2, D^2, xD].
///
/// The basis on cm-scale data is badly conditioned (x, D ~ 1e2, squares
/// ~ 1e4), so the non-constant columns are centered and scaled before
/// solving with a column-pivoted Householder QR; coefficients are mapped
/// back afterwards. Normal equations are deliberately avoided.
inline std::pair<QuadraticSwerveParams, FitDiagnostics> fit_quadratic(
    const std::vector<FitSample>& samples) {
  const int n = static_cast<int>(samples.size());
  if (n < 6)
    throw Error(ErrorKind::InvalidInput,
                "quadratic fit needs at least 6 samples, got " + std::to_string(n));
  for (const FitSample& s : samples)
    if (!std::isfinite(s.x) || !std::isfinite(s.d) || !std::isfinite(s.y))
      throw Error(ErrorKind::InvalidInput, "non-finite value in fit samples");

  Eigen::MatrixXd basis(n, 6);
  Eigen::VectorXd target(n);
  for (int i = 0; i < n; ++i) {
    const FitSample& s = samples[i];
    basis.row(i) << 1.0, s.x, s.d, s.x * s.x, s.d * s.d, s.x * s.d;
    target(i) = s.y;
  }

  // Standardize columns 1..5; a zero-variance column stays centered at zero
  // and the rank check below reports the degeneracy.
  Eigen::Matrix<double, 6, 1> mu = Eigen::Matrix<double, 6, 1>::Zero();
  Eigen::Matrix<double, 6, 1> scale = Eigen::Matrix<double, 6, 1>::Ones();
  Eigen::MatrixXd design = basis;
  for (int j = 1; j < 6; ++j) {
    mu(j) = basis.col(j).mean();
    design.col(j).array() -= mu(j);
    const double sd = std::sqrt(design.col(j).squaredNorm() / n);
    if (sd > 0.0) {
      scale(j) = sd;
      design.col(j) /= sd;
    }
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  const Eigen::VectorXd rdiag = qr.matrixR().diagonal().cwiseAbs();
  const double rmax = rdiag.maxCoeff();
  const double rmin = rdiag.minCoeff();
  const double condition =
      rmin > 0.0 ? rmax / rmin : std::numeric_limits<double>::infinity();
  if (qr.rank() < 6)
    throw DegenerateFitError("quadratic fit design matrix is rank-deficient",
                             condition);

  const Eigen::Matrix<double, 6, 1> c = qr.solve(target);

  QuadraticSwerveParams params;
  double intercept = c(0);
  for (int j = 1; j < 6; ++j) {
    params.a[j] = c(j) / scale(j);
    intercept -= c(j) * mu(j) / scale(j);
  }
  params.a[0] = intercept;

  Eigen::Matrix<double, 6, 1> coef;
  for (int j = 0; j < 6; ++j) coef(j) = params.a[j];
  const Eigen::VectorXd residuals = target - basis * coef;
  const double ss_res = residuals.squaredNorm();
  const double ss_tot = (target.array() - target.mean()).matrix().squaredNorm();

  FitDiagnostics diag;
  diag.rmse = std::sqrt(ss_res / n);
  if (ss_tot > 0.0)
    diag.r_squared = 1.0 - ss_res / ss_tot;
  else
    diag.r_squared = ss_res == 0.0 ? 1.0 : -std::numeric_limits<double>::infinity();
  diag.n_points = n;
  diag.condition_estimate = condition;
  return {params, diag};
}

/// Rolls the quadratic model forward along a known x path, approximating the
/// current distance by the previous frame's value: y(t) = f(x(t), D(t-1)),
/// with D then recomputed from the predicted position (x(t), y(t)) and the
/// other pedestrian's position. The first frame uses the caller-supplied
/// initial distance. other_path must be in the same coordinate frame as
/// x_path and the returned y series.
inline std::vector<double> predict_trajectory(const QuadraticSwerveParams& p,
                                              const std::vector<double>& x_path,
                                              const std::vector<Vec2>& other_path,
                                              double initial_distance) {
  p.validate();
  if (x_path.empty())
    throw Error(ErrorKind::InvalidInput, "predict_trajectory: empty x path");
  if (x_path.size() != other_path.size())
    throw Error(ErrorKind::InvalidInput,
                "predict_trajectory: x path and other path lengths differ");
  if (!std::isfinite(initial_distance) || initial_distance < 0.0)
    throw Error(ErrorKind::InvalidInput,
                "predict_trajectory: initial distance must be finite and >= 0");

  std::vector<double> y(x_path.size());
  double d_prev = initial_distance;
  for (std::size_t t = 0; t < x_path.size(); ++t) {
    y[t] = p.eval(x_path[t], d_prev);
    d_prev = (Vec2(x_path[t], y[t]) - other_path[t]).norm();
  }
  return y;
}

/// Empirical distribution of per-encounter coefficient vectors.
struct ParamDistribution {
  Eigen::Matrix<double, 6, 1> mean = Eigen::Matrix<double, 6, 1>::Zero();
  Eigen::Matrix<double, 6, 6> covariance = Eigen::Matrix<double, 6, 6>::Zero();
  int n_encounters = 0;

  QuadraticSwerveParams mean_params() const {
    QuadraticSwerveParams p;
    for (int j = 0; j < 6; ++j) p.a[j] = mean(j);
    return p;
  }
};

/// Sample mean and sample covariance (divisor n-1) of coefficient vectors.
inline ParamDistribution aggregate_params(const std::vector<QuadraticSwerveParams>& fits) {
  if (fits.empty())
    throw Error(ErrorKind::InvalidInput, "aggregate_params: no fits given");
  ParamDistribution dist;
  dist.n_encounters = static_cast<int>(fits.size());
  for (const QuadraticSwerveParams& p : fits) {
    p.validate();
    for (int j = 0; j < 6; ++j) dist.mean(j) += p.a[j];
  }
  dist.mean /= static_cast<double>(fits.size());
  if (fits.size() > 1) {
    for (const QuadraticSwerveParams& p : fits) {
      Eigen::Matrix<double, 6, 1> v;
      for (int j = 0; j < 6; ++j) v(j) = p.a[j];
      v -= dist.mean;
      dist.covariance += v * v.transpose();
    }
    dist.covariance /= static_cast<double>(fits.size() - 1);
  }
  return dist;
}

}  // namespace swerve
