#pragma once

#include <array>
#include <cmath>

#include <Eigen/Dense>

#include "swerve/errors.hpp"

namespace swerve {

/// Scalar-observation tracker for the cross-motion deviation: 2-state
/// [y (cm), vy (cm/s)] constant-velocity process with white-noise
/// acceleration, unscented transform for the moment propagation.
struct UkfConfig {
  double alpha = 1e-3;
  double beta = 2.0;
  double kappa = 0.0;
  /// Spectral density q of the white-noise acceleration; the per-step
  /// process covariance is q * [[dt^3/3, dt^2/2], [dt^2/2, dt]].
  double process_noise_spectral = 2500.0;
  double measurement_noise_var = 1.0;
  double dt = 1.0 / 30.0;

  void validate() const {
    if (!(alpha > 0.0) || alpha > 1.0)
      throw Error(ErrorKind::InvalidConfig, "ukf alpha must be in (0, 1]");
    if (!(kappa > -2.0))
      throw Error(ErrorKind::InvalidConfig, "ukf kappa must exceed -n = -2");
    if (!(measurement_noise_var > 0.0))
      throw Error(ErrorKind::InvalidConfig, "measurement noise variance must be > 0");
    if (!(dt > 0.0)) throw Error(ErrorKind::InvalidConfig, "ukf dt must be > 0");
    if (!(process_noise_spectral >= 0.0))
      throw Error(ErrorKind::InvalidConfig, "process noise must be >= 0");
  }

  Eigen::Matrix2d process_cov() const {
    Eigen::Matrix2d q;
    q << dt * dt * dt / 3.0, dt * dt / 2.0, dt * dt / 2.0, dt;
    return process_noise_spectral * q;
  }

  Eigen::Matrix2d transition() const {
    Eigen::Matrix2d f;
    f << 1.0, dt, 0.0, 1.0;
    return f;
  }
};

struct StateEstimate {
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  Eigen::Matrix2d cov = Eigen::Matrix2d::Identity();

  void validate() const {
    if (!mean.allFinite() || !cov.allFinite())
      throw Error(ErrorKind::InvalidState, "non-finite filter state");
    const Eigen::Matrix2d sym = 0.5 * (cov + cov.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(sym);
    if (eig.eigenvalues().minCoeff() < -1e-9)
      throw Error(ErrorKind::InvalidState,
                  "filter covariance has eigenvalue below -1e-9");
  }
};

/// Mean = first observation, uninformative pedestrian-scale velocity prior.
inline StateEstimate ukf_init(double z0, const UkfConfig& cfg) {
  cfg.validate();
  if (!std::isfinite(z0))
    throw Error(ErrorKind::InvalidInput, "ukf init needs a finite observation");
  StateEstimate est;
  est.mean << z0, 0.0;
  est.cov << cfg.measurement_noise_var, 0.0, 0.0, 50.0 * 50.0;
  return est;
}

struct SigmaPoints {
  std::array<Eigen::Vector2d, 5> points;
  std::array<double, 5> wm;
  std::array<double, 5> wc;
};

/// 2n+1 = 5 symmetric sigma points with the standard scaled weights:
/// lambda = alpha^2 (n + kappa) - n, spread sqrt(n + lambda) along the
/// covariance square-root columns.
inline SigmaPoints sigma_points(const StateEstimate& est, const UkfConfig& cfg) {
  constexpr double n = 2.0;
  const double lambda = cfg.alpha * cfg.alpha * (n + cfg.kappa) - n;
  const double spread = std::sqrt(n + lambda);

  const Eigen::Matrix2d sym = 0.5 * (est.cov + est.cov.transpose());
  Eigen::Matrix2d root;
  Eigen::LLT<Eigen::Matrix2d> llt(sym);
  if (llt.info() == Eigen::Success) {
    root = llt.matrixL();
  } else {
    // Semi-definite covariance: symmetric square root via eigendecomposition
    // with negative eigenvalues clamped.
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(sym);
    root = eig.eigenvectors() *
           eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
           eig.eigenvectors().transpose();
  }

  SigmaPoints sp;
  sp.points[0] = est.mean;
  for (int i = 0; i < 2; ++i) {
    sp.points[1 + i] = est.mean + spread * root.col(i);
    sp.points[3 + i] = est.mean - spread * root.col(i);
  }
  sp.wm[0] = lambda / (n + lambda);
  sp.wc[0] = sp.wm[0] + 1.0 - cfg.alpha * cfg.alpha + cfg.beta;
  for (int i = 1; i < 5; ++i) sp.wm[i] = sp.wc[i] = 1.0 / (2.0 * (n + lambda));
  return sp;
}

inline StateEstimate ukf_predict(const StateEstimate& est, const UkfConfig& cfg) {
  cfg.validate();
  est.validate();
  const SigmaPoints sp = sigma_points(est, cfg);
  const Eigen::Matrix2d f = cfg.transition();

  std::array<Eigen::Vector2d, 5> propagated;
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (int i = 0; i < 5; ++i) {
    propagated[i] = f * sp.points[i];
    mean += sp.wm[i] * propagated[i];
  }
  Eigen::Matrix2d cov = cfg.process_cov();
  for (int i = 0; i < 5; ++i) {
    const Eigen::Vector2d d = propagated[i] - mean;
    cov += sp.wc[i] * d * d.transpose();
  }
  StateEstimate out;
  out.mean = mean;
  out.cov = 0.5 * (cov + cov.transpose());
  return out;
}

inline StateEstimate ukf_update(const StateEstimate& predicted, double z,
                                const UkfConfig& cfg) {
  cfg.validate();
  predicted.validate();
  if (!std::isfinite(z))
    throw Error(ErrorKind::InvalidInput, "ukf update needs a finite observation");
  const SigmaPoints sp = sigma_points(predicted, cfg);

  // Scalar position measurement h(x) = x(0).
  std::array<double, 5> zi;
  double z_mean = 0.0;
  for (int i = 0; i < 5; ++i) {
    zi[i] = sp.points[i](0);
    z_mean += sp.wm[i] * zi[i];
  }
  double s = cfg.measurement_noise_var;
  Eigen::Vector2d pxz = Eigen::Vector2d::Zero();
  for (int i = 0; i < 5; ++i) {
    const double dz = zi[i] - z_mean;
    s += sp.wc[i] * dz * dz;
    pxz += sp.wc[i] * (sp.points[i] - predicted.mean) * dz;
  }

  const Eigen::Vector2d gain = pxz / s;
  StateEstimate out;
  out.mean = predicted.mean + gain * (z - z_mean);
  const Eigen::Matrix2d cov = predicted.cov - s * gain * gain.transpose();
  out.cov = 0.5 * (cov + cov.transpose());
  return out;
}

/// One predict-update cycle.
inline StateEstimate ukf_step(const StateEstimate& est, double z, const UkfConfig& cfg) {
  return ukf_update(ukf_predict(est, cfg), z, cfg);
}

}  // namespace swerve
