#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "swerve/core.hpp"
#include "swerve/errors.hpp"
#include "swerve/quadratic.hpp"
#include "swerve/ukf.hpp"

namespace swerve {

struct DynamicUpdateConfig {
  /// Frames between offset corrections once observations flow.
  int correction_interval = 5;
  /// Frames predicted from the prior model alone before the first correction.
  int bootstrap_frames = 10;

  void validate() const {
    if (correction_interval < 1)
      throw Error(ErrorKind::InvalidConfig, "correction interval must be >= 1");
    if (bootstrap_frames < 1)
      throw Error(ErrorKind::InvalidConfig, "bootstrap frame count must be >= 1");
  }
};

/// Offset correction of a model extrapolation against streaming
/// observations: y_p(t) = y_e(t) + y_obs(t_i) - y_e(t_i) with t_i the latest
/// correction frame <= t. Correction frames are bootstrap_frames,
/// bootstrap_frames + interval, ...; before the first one y_p = y_e. A NaN
/// observation counts as missing and the most recent earlier available
/// observation is used instead.
inline std::vector<double> dynamic_update(const std::vector<double>& y_e,
                                          const std::vector<double>& y_obs,
                                          const DynamicUpdateConfig& cfg) {
  cfg.validate();
  if (y_e.size() != y_obs.size())
    throw Error(ErrorKind::InvalidInput,
                "dynamic update: estimate and observation series lengths differ");
  const int n = static_cast<int>(y_e.size());
  std::vector<double> y_p(y_e.begin(), y_e.end());

  double offset = 0.0;
  bool corrected = false;
  int next_correction = cfg.bootstrap_frames;
  for (int t = 0; t < n; ++t) {
    bool anchored_here = false;
    if (t == next_correction) {
      int ti = t;
      while (ti >= 0 && !std::isfinite(y_obs[ti])) --ti;
      if (ti >= 0) {
        offset = y_obs[ti] - y_e[ti];
        corrected = true;
        anchored_here = ti == t;
      }
      next_correction += cfg.correction_interval;
    }
    // Assign the anchor frame directly so it reproduces the observation
    // bit-exactly instead of within round-off of y_e + (y_obs - y_e).
    if (anchored_here)
      y_p[t] = y_obs[t];
    else if (corrected)
      y_p[t] = y_e[t] + offset;
  }
  return y_p;
}

/// Model-based extrapolation of the first n frames from training data. The
/// prior coefficients come from one pooled least-squares fit over all
/// training samples; the distribution-mean and explicit-parameter overloads
/// cover the aggregated alternative.
inline std::vector<double> initial_estimate(const QuadraticSwerveParams& params,
                                            const std::vector<double>& x_path,
                                            const std::vector<Vec2>& other_path,
                                            double initial_distance, int n_frames) {
  if (n_frames < 1)
    throw Error(ErrorKind::InvalidInput, "initial estimate needs n >= 1 frames");
  if (x_path.size() != other_path.size() ||
      static_cast<std::size_t>(n_frames) > x_path.size())
    throw Error(ErrorKind::InvalidInput,
                "initial estimate: path shorter than requested frame count");
  const std::vector<double> xs(x_path.begin(), x_path.begin() + n_frames);
  const std::vector<Vec2> others(other_path.begin(), other_path.begin() + n_frames);
  return predict_trajectory(params, xs, others, initial_distance);
}

inline std::vector<double> initial_estimate(const std::vector<FitSample>& pooled,
                                            const std::vector<double>& x_path,
                                            const std::vector<Vec2>& other_path,
                                            double initial_distance, int n_frames) {
  if (pooled.empty())
    throw Error(ErrorKind::InvalidInput, "initial estimate: empty training pool");
  return initial_estimate(fit_quadratic(pooled).first, x_path, other_path,
                          initial_distance, n_frames);
}

inline std::vector<double> initial_estimate(const ParamDistribution& training,
                                            const std::vector<double>& x_path,
                                            const std::vector<Vec2>& other_path,
                                            double initial_distance, int n_frames) {
  if (training.n_encounters < 1)
    throw Error(ErrorKind::InvalidInput, "initial estimate: empty training distribution");
  return initial_estimate(training.mean_params(), x_path, other_path,
                          initial_distance, n_frames);
}

enum class PredictorMethod { DynamicUpdate, Ukf };

inline const char* to_string(PredictorMethod m) {
  return m == PredictorMethod::DynamicUpdate ? "dynamic" : "ukf";
}

struct PredictionRun {
  std::vector<int> frames;
  std::vector<double> y_obs;
  std::vector<double> y_pred;
  std::vector<double> abs_err;
  std::string method;
  int bootstrap_frames = 0;
};

/// Replays an approach region frame-by-frame against one predictor. The
/// estimate recorded at frame t uses observations up to and including t,
/// never later ones. other_path gives the other pedestrian's positions in
/// the region's coordinate frame (needed to roll the quadratic model
/// forward); initial_distance defaults to the region's first distance.
inline PredictionRun run_predictor(
    const ApproachRegion& region, const std::vector<Vec2>& other_path,
    PredictorMethod method, const QuadraticSwerveParams& base_params,
    const DynamicUpdateConfig& dyn_cfg, const UkfConfig& ukf_cfg,
    double initial_distance = std::numeric_limits<double>::quiet_NaN()) {
  if (region.size() == 0)
    throw Error(ErrorKind::InvalidInput, "run_predictor: empty approach region");
  if (other_path.size() != region.size())
    throw Error(ErrorKind::InvalidInput,
                "run_predictor: other path length does not match region");
  dyn_cfg.validate();

  const int n = static_cast<int>(region.size());
  PredictionRun run;
  run.frames = region.frames;
  run.y_obs = region.y_cm;
  run.method = to_string(method);
  run.bootstrap_frames = dyn_cfg.bootstrap_frames;

  const double d0 =
      std::isnan(initial_distance) ? region.d_cm.front() : initial_distance;

  if (method == PredictorMethod::DynamicUpdate) {
    const std::vector<double> y_e =
        initial_estimate(base_params, region.x_cm, other_path, d0, n);
    run.y_pred = dynamic_update(y_e, region.y_cm, dyn_cfg);
  } else {
    if (!std::isfinite(region.y_cm.front()))
      throw Error(ErrorKind::InvalidInput,
                  "run_predictor: first observation must be finite for the ukf");
    StateEstimate est = ukf_init(region.y_cm.front(), ukf_cfg);
    run.y_pred.resize(n);
    run.y_pred[0] = est.mean(0);
    for (int t = 1; t < n; ++t) {
      est = ukf_predict(est, ukf_cfg);
      if (std::isfinite(region.y_cm[t])) est = ukf_update(est, region.y_cm[t], ukf_cfg);
      run.y_pred[t] = est.mean(0);
    }
  }

  run.abs_err.resize(n);
  for (int t = 0; t < n; ++t) run.abs_err[t] = std::abs(run.y_pred[t] - run.y_obs[t]);
  return run;
}

struct PredictorMetrics {
  std::string method;
  double rmse_cm = 0.0;
  double max_err_cm = 0.0;
  double bootstrap_rmse_cm = 0.0;
  double post_rmse_cm = 0.0;
};

namespace detail {

inline double rms(const std::vector<double>& v, int lo, int hi) {
  double sum = 0.0;
  int count = 0;
  for (int i = lo; i < hi; ++i) {
    if (!std::isfinite(v[i])) continue;
    sum += v[i] * v[i];
    ++count;
  }
  return count > 0 ? std::sqrt(sum / count) : 0.0;
}

}  // namespace detail

/// One metrics row per run: overall RMSE, worst error, and the split
/// between the bootstrap phase and the corrected remainder.
inline std::vector<PredictorMetrics> compare_predictors(
    const std::vector<PredictionRun>& runs) {
  if (runs.empty())
    throw Error(ErrorKind::InvalidInput, "compare_predictors: no runs given");
  std::vector<PredictorMetrics> metrics;
  metrics.reserve(runs.size());
  for (const PredictionRun& run : runs) {
    const int n = static_cast<int>(run.abs_err.size());
    const int split = std::clamp(run.bootstrap_frames, 0, n);
    PredictorMetrics m;
    m.method = run.method;
    m.rmse_cm = detail::rms(run.abs_err, 0, n);
    m.max_err_cm = 0.0;
    for (double e : run.abs_err)
      if (std::isfinite(e)) m.max_err_cm = std::max(m.max_err_cm, e);
    m.bootstrap_rmse_cm = detail::rms(run.abs_err, 0, split);
    m.post_rmse_cm = detail::rms(run.abs_err, split, n);
    metrics.push_back(std::move(m));
  }
  return metrics;
}

}  // namespace swerve
