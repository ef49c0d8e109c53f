#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "swerve/core.hpp"
#include "swerve/errors.hpp"
#include "swerve/quadratic.hpp"
#include "swerve/symreg/sinusoid.hpp"

namespace swerve {

enum class PlantedModel { None, Quadratic, Sinusoid };

/// How the distance argument of a planted quadratic is produced.
enum class QuadraticDrive {
  /// Self-consistent: y(t) solves y = f(x(t), D(t)) where D(t) includes the
  /// deviation itself (Newton per frame). The generated samples satisfy the
  /// model with the current distance exactly.
  Implicit,
  /// Previous frame's actual distance, the same recursion predict_trajectory
  /// uses, so model-based prediction reproduces the truth exactly.
  Lagged,
  /// Distance between the unperturbed straight-line paths; no feedback.
  /// Keeps coefficient sets with strong D^2 feedback finite.
  Nominal,
};

struct ScenarioSpec {
  double swerver_speed_cm_s = 120.0;
  double other_speed_cm_s = 120.0;
  /// Minimum distance the unperturbed straight-line paths reach.
  double crossing_offset_cm = 60.0;
  PlantedModel model = PlantedModel::None;
  QuadraticSwerveParams quad{};
  QuadraticDrive drive = QuadraticDrive::Implicit;
  symreg::SinusoidParams sinusoid{};
  double noise_sigma_cm = 0.0;
  double fps = 30.0;
  double duration_s = 4.0;
  /// Time of closest unperturbed approach; NaN means duration_s / 2.
  double approach_time_s = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t seed = 0;

  double approach_time() const {
    return std::isnan(approach_time_s) ? duration_s / 2.0 : approach_time_s;
  }

  void validate() const {
    if (!(swerver_speed_cm_s > 0.0) || !(other_speed_cm_s > 0.0))
      throw Error(ErrorKind::InvalidInput, "scenario speeds must be positive");
    if (!(fps > 0.0)) throw Error(ErrorKind::InvalidInput, "scenario fps must be positive");
    if (!(duration_s > 0.0))
      throw Error(ErrorKind::InvalidInput, "scenario duration must be positive");
    if (!(noise_sigma_cm >= 0.0))
      throw Error(ErrorKind::InvalidInput, "noise sigma must be >= 0");
    if (!std::isfinite(crossing_offset_cm) || crossing_offset_cm < 0.0)
      throw Error(ErrorKind::InvalidInput, "crossing offset must be finite and >= 0");
    const double tc = approach_time();
    if (!(tc > 0.0) || !(tc < duration_s))
      throw Error(ErrorKind::InvalidInput,
                  "approach time must lie strictly inside the duration");
    if (model == PlantedModel::Quadratic) quad.validate();
  }
};

struct SyntheticEncounter {
  Encounter encounter;
  /// Planted lateral deviation per frame, noise-free.
  std::vector<double> y_true;
  /// For quadratic plantings: the exact (x, D, y) triples the deviation was
  /// generated from (D meaning depends on the drive mode). Empty otherwise.
  std::vector<FitSample> model_samples;
  /// Distance between the unperturbed paths at frame 0.
  double initial_distance = 0.0;
  /// Frame at which the unperturbed paths reach minimum distance.
  int design_min_frame = 0;
};

namespace detail {

/// Solves y = f(x, D(y)) with D(y) = |(x, y) - other| by Newton iteration.
inline double solve_implicit_deviation(const QuadraticSwerveParams& p, double x,
                                       const Vec2& other, double y_start, int frame) {
  double y = y_start;
  for (int pass = 0; pass < 2; ++pass) {
    for (int it = 0; it < 100; ++it) {
      const double dx = x - other.x();
      const double dy = y - other.y();
      const double dist = std::sqrt(dx * dx + dy * dy);
      const double g = y - p.eval(x, dist);
      if (std::abs(g) < 1e-12 * (1.0 + std::abs(y))) return y;
      // d/dy of f(x, D(y)) = (a2 + 2 a4 D + a5 x) * (y - oy) / D
      const double df_dd = p.a[2] + 2.0 * p.a[4] * dist + p.a[5] * x;
      const double slope = 1.0 - (dist > 0.0 ? df_dd * dy / dist : 0.0);
      if (!std::isfinite(g) || std::abs(slope) < 1e-9) break;
      y -= g / slope;
      if (!std::isfinite(y)) break;
    }
    y = y_start * 0.5;  // one damped restart before giving up
  }
  throw Error(ErrorKind::FitFailure,
              "implicit quadratic drive failed to converge at frame " +
                  std::to_string(frame) +
                  "; use a lagged or nominal drive for this coefficient set");
}

}  // namespace detail

/// Generates a perpendicular crossing: the swerver walks +x from the origin,
/// the other pedestrian walks +y on a vertical line placed so the
/// unperturbed straight paths reach minimum distance crossing_offset_cm at
/// approach_time(). The swerver's lateral deviation follows the planted
/// model; Gaussian noise is then added to every coordinate of both
/// pedestrians. Deterministic for a given spec.
inline SyntheticEncounter generate_encounter(const ScenarioSpec& spec) {
  spec.validate();
  const double vs = spec.swerver_speed_cm_s;
  const double vo = spec.other_speed_cm_s;
  const double tc = spec.approach_time();
  const double rel = std::sqrt(vs * vs + vo * vo);
  // Offsets placing the closest unperturbed approach at tc with distance
  // exactly crossing_offset_cm (relative position perpendicular to relative
  // velocity at tc).
  const double alpha = spec.crossing_offset_cm * vo / (vs * rel);
  const double beta = -spec.crossing_offset_cm * vs / (vo * rel);
  const double other_x = vs * (tc + alpha);
  const double dt = 1.0 / spec.fps;
  const int n_frames = static_cast<int>(std::lround(spec.duration_s * spec.fps)) + 1;
  if (n_frames < 2)
    throw Error(ErrorKind::InvalidInput, "scenario spans fewer than 2 frames");

  std::vector<double> x_path(n_frames);
  std::vector<Vec2> other_path(n_frames);
  std::vector<double> d_nominal(n_frames);
  for (int k = 0; k < n_frames; ++k) {
    const double t = k * dt;
    x_path[k] = vs * t;
    other_path[k] = Vec2(other_x, vo * (t - (tc + beta)));
    d_nominal[k] = (Vec2(x_path[k], 0.0) - other_path[k]).norm();
  }

  SyntheticEncounter out;
  out.initial_distance = d_nominal[0];
  out.design_min_frame = static_cast<int>(std::lround(tc * spec.fps));
  out.y_true.assign(n_frames, 0.0);

  switch (spec.model) {
    case PlantedModel::None:
      break;
    case PlantedModel::Sinusoid:
      for (int k = 0; k < n_frames; ++k) out.y_true[k] = spec.sinusoid.eval(x_path[k]);
      break;
    case PlantedModel::Quadratic: {
      out.model_samples.resize(n_frames);
      double d_prev = out.initial_distance;
      for (int k = 0; k < n_frames; ++k) {
        double y = 0.0;
        double d_used = 0.0;
        switch (spec.drive) {
          case QuadraticDrive::Implicit: {
            const double start = k == 0 ? spec.quad.eval(x_path[k], d_nominal[k])
                                        : out.y_true[k - 1];
            y = detail::solve_implicit_deviation(spec.quad, x_path[k], other_path[k],
                                                 start, k);
            d_used = (Vec2(x_path[k], y) - other_path[k]).norm();
            break;
          }
          case QuadraticDrive::Lagged:
            y = spec.quad.eval(x_path[k], d_prev);
            d_used = d_prev;
            d_prev = (Vec2(x_path[k], y) - other_path[k]).norm();
            break;
          case QuadraticDrive::Nominal:
            y = spec.quad.eval(x_path[k], d_nominal[k]);
            d_used = d_nominal[k];
            break;
        }
        if (!std::isfinite(y))
          throw Error(ErrorKind::FitFailure,
                      "planted quadratic produced a non-finite deviation at frame " +
                          std::to_string(k));
        out.y_true[k] = y;
        out.model_samples[k] = FitSample{x_path[k], d_used, y};
      }
      break;
    }
  }

  Trajectory swerver;
  swerver.ped_id = "1";
  swerver.fps = spec.fps;
  Trajectory other;
  other.ped_id = "2";
  other.fps = spec.fps;
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const double sigma = spec.noise_sigma_cm;
  for (int k = 0; k < n_frames; ++k) {
    Vec2 s(x_path[k], out.y_true[k]);
    Vec2 o = other_path[k];
    if (sigma > 0.0) {
      s.x() += sigma * noise(rng);
      s.y() += sigma * noise(rng);
      o.x() += sigma * noise(rng);
      o.y() += sigma * noise(rng);
    }
    swerver.points.push_back({k, s});
    other.points.push_back({k, o});
  }

  out.encounter = make_encounter(std::move(swerver), std::move(other));
  return out;
}

}  // namespace swerve
