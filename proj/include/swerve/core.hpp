#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "swerve/errors.hpp"

namespace swerve {

using Vec2 = Eigen::Vector2d;

/// One tracked sample: frame index plus planar position. Positions are in
/// centimeters once scale_to_cm has run, raw pixels before.
struct TrackPoint {
  int frame = 0;
  Vec2 pos = Vec2::Zero();
};

/// Ordered track of a single pedestrian. Frames are strictly increasing;
/// fps carries the time base so rate-dependent defaults (the +/-1 s
/// approach window) generalize beyond 30 fps recordings.
struct Trajectory {
  std::string ped_id;
  std::vector<TrackPoint> points;
  double fps = 30.0;

  std::size_t size() const { return points.size(); }
  int first_frame() const { return points.front().frame; }
  int last_frame() const { return points.back().frame; }
  double dt() const { return 1.0 / fps; }

  /// Index of the point with the given frame, or -1 when absent.
  int index_of(int frame) const {
    auto it = std::lower_bound(points.begin(), points.end(), frame,
                               [](const TrackPoint& p, int f) { return p.frame < f; });
    if (it == points.end() || it->frame != frame) return -1;
    return static_cast<int>(it - points.begin());
  }

  /// Net displacement from first to last point.
  Vec2 net_displacement() const { return points.back().pos - points.front().pos; }

  void validate() const {
    if (points.size() < 2)
      throw Error(ErrorKind::InvalidInput,
                  "trajectory '" + ped_id + "' needs at least 2 points");
    if (!(fps > 0.0))
      throw Error(ErrorKind::InvalidConfig, "fps must be positive");
    for (std::size_t i = 0; i < points.size(); ++i) {
      const TrackPoint& p = points[i];
      if (p.frame < 0)
        throw Error(ErrorKind::InvalidInput,
                    "trajectory '" + ped_id + "' has negative frame index");
      if (!std::isfinite(p.pos.x()) || !std::isfinite(p.pos.y()))
        throw Error(ErrorKind::InvalidInput,
                    "trajectory '" + ped_id + "' has non-finite position at frame " +
                        std::to_string(p.frame));
      if (i > 0 && points[i - 1].frame >= p.frame)
        throw Error(ErrorKind::InvalidInput,
                    "trajectory '" + ped_id + "' frames not strictly increasing near frame " +
                        std::to_string(p.frame));
    }
  }
};

/// Inclusive frame range.
struct FrameRange {
  int first = 0;
  int last = -1;

  bool empty() const { return last < first; }
  int count() const { return empty() ? 0 : last - first + 1; }
  bool contains(int f) const { return f >= first && f <= last; }
};

/// A frame-aligned pair of trajectories. Both pedestrians cover every frame
/// of the overlap range. Build with make_encounter.
struct Encounter {
  Trajectory swerver;
  Trajectory other;
  FrameRange overlap;

  const Vec2& swerver_pos(int frame) const {
    return swerver.points[swerver_overlap_base_ + (frame - overlap.first)].pos;
  }
  const Vec2& other_pos(int frame) const {
    return other.points[other_overlap_base_ + (frame - overlap.first)].pos;
  }

  int swerver_overlap_base_ = 0;  // index of overlap.first in swerver.points
  int other_overlap_base_ = 0;   // index of overlap.first in other.points
};

/// Pairs two trajectories, computes their common frame range, and checks
/// both cover it with no gaps.
inline Encounter make_encounter(Trajectory swerver, Trajectory other) {
  swerver.validate();
  other.validate();
  FrameRange overlap{std::max(swerver.first_frame(), other.first_frame()),
                     std::min(swerver.last_frame(), other.last_frame())};
  if (overlap.empty())
    throw Error(ErrorKind::NoOverlap,
                "trajectories '" + swerver.ped_id + "' and '" + other.ped_id +
                    "' share no frames");
  Encounter enc{std::move(swerver), std::move(other), overlap};
  enc.swerver_overlap_base_ = enc.swerver.index_of(overlap.first);
  enc.other_overlap_base_ = enc.other.index_of(overlap.first);
  for (const Trajectory* t : {&enc.swerver, &enc.other}) {
    int base = (t == &enc.swerver) ? enc.swerver_overlap_base_ : enc.other_overlap_base_;
    if (base < 0 || base + overlap.count() > static_cast<int>(t->size()))
      throw Error(ErrorKind::NoOverlap,
                  "trajectory '" + t->ped_id + "' does not cover the overlap range");
    for (int k = 0; k < overlap.count(); ++k) {
      if (t->points[base + k].frame != overlap.first + k)
        throw Error(ErrorKind::NoOverlap,
                    "trajectory '" + t->ped_id + "' has a frame gap inside the overlap");
    }
  }
  return enc;
}

/// Approach window of an encounter: aligned per-frame series for the
/// swerving pedestrian. x_cm is the along-motion coordinate re-based to 0
/// at the window start; y_cm is the swerver's lateral coordinate in the
/// axis-aligned frame (cross-motion deviation up to a constant offset);
/// d_cm is the inter-pedestrian Euclidean distance.
struct ApproachRegion {
  std::vector<int> frames;
  std::vector<double> x_cm;
  std::vector<double> y_cm;
  std::vector<double> d_cm;
  int min_frame = 0;

  std::size_t size() const { return frames.size(); }
};

struct PreprocessConfig {
  double cm_per_pixel = 1.0;
  /// Moving-average width in frames. Effective window is floor(w/2) frames
  /// on each side of a sample, so even sizes behave like the next odd size.
  int smooth_window = 30;
  /// Half-width of the approach window in frames (1 s at 30 fps).
  int approach_half_window = 30;

  void validate() const {
    if (!(cm_per_pixel > 0.0))
      throw Error(ErrorKind::InvalidConfig, "cm_per_pixel must be positive");
    if (smooth_window < 1)
      throw Error(ErrorKind::InvalidConfig, "smooth_window must be >= 1");
    if (approach_half_window < 1)
      throw Error(ErrorKind::InvalidConfig, "approach_half_window must be >= 1");
  }
};

/// Converts pixel positions to centimeters. Frames and fps are untouched.
inline Trajectory scale_to_cm(const Trajectory& traj, const PreprocessConfig& cfg) {
  if (!(cfg.cm_per_pixel > 0.0))
    throw Error(ErrorKind::InvalidConfig, "cm_per_pixel must be positive");
  Trajectory out = traj;
  for (TrackPoint& p : out.points) p.pos *= cfg.cm_per_pixel;
  return out;
}

/// Centered moving-average smoothing. A window of w frames covers
/// floor(w/2) frames on each side of the sample (even sizes behave like
/// the next odd size up); near the trajectory ends the window is clipped
/// to the available samples. Length and frame indices are preserved.
inline Trajectory smooth_moving_average(const Trajectory& traj, int window) {
  if (window < 1)
    throw Error(ErrorKind::InvalidConfig, "smoothing window must be >= 1");
  if (traj.points.empty())
    throw Error(ErrorKind::InvalidInput, "cannot smooth an empty trajectory");
  const int n = static_cast<int>(traj.points.size());
  const int half = window / 2;
  Trajectory out = traj;
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - half);
    const int hi = std::min(n - 1, i + half);
    Vec2 sum = Vec2::Zero();
    for (int j = lo; j <= hi; ++j) sum += traj.points[j].pos;
    out.points[i].pos = sum / static_cast<double>(hi - lo + 1);
  }
  return out;
}

/// Rotates both trajectories by one rigid rotation so the swerver's net
/// displacement points along +x; if the other pedestrian then moves toward
/// -y, the y axis is flipped so its dominant direction is +y. Distances are
/// preserved exactly and the swerver's y coordinate reads as cross-motion
/// deviation (up to a constant offset the quadratic model's a0 absorbs).
inline Encounter rotate_axis_align(const Encounter& enc) {
  const Vec2 u = enc.swerver.net_displacement();
  const Vec2 v = enc.other.net_displacement();
  if (u.norm() <= 0.0)
    throw Error(ErrorKind::DegenerateTrajectory,
                "swerver '" + enc.swerver.ped_id + "' has zero net displacement");
  if (v.norm() <= 0.0)
    throw Error(ErrorKind::DegenerateTrajectory,
                "other pedestrian '" + enc.other.ped_id + "' has zero net displacement");
  const double angle = std::atan2(u.y(), u.x());
  Eigen::Rotation2Dd rot(-angle);

  Encounter out = enc;
  for (Trajectory* t : {&out.swerver, &out.other})
    for (TrackPoint& p : t->points) p.pos = rot * p.pos;

  if (out.other.net_displacement().y() < 0.0) {
    for (Trajectory* t : {&out.swerver, &out.other})
      for (TrackPoint& p : t->points) p.pos.y() = -p.pos.y();
  }
  return out;
}

/// Angle in degrees between the two pedestrians' dominant (net-displacement)
/// directions, in [0, 180].
inline double approach_angle_deg(const Encounter& enc) {
  const Vec2 u = enc.swerver.net_displacement();
  const Vec2 v = enc.other.net_displacement();
  if (u.norm() <= 0.0 || v.norm() <= 0.0)
    throw Error(ErrorKind::DegenerateTrajectory,
                "approach angle undefined: a trajectory has zero net displacement");
  const double c = std::clamp(u.dot(v) / (u.norm() * v.norm()), -1.0, 1.0);
  return std::acos(c) * 180.0 / M_PI;
}

inline bool is_roughly_perpendicular(const Encounter& enc, double tolerance_deg = 20.0) {
  return std::abs(approach_angle_deg(enc) - 90.0) <= tolerance_deg;
}

struct MinApproach {
  int frame = 0;
  double distance_cm = 0.0;
};

/// Frame of minimum inter-pedestrian distance over the overlap, ties broken
/// toward the earliest frame.
inline MinApproach min_approach_point(const Encounter& enc) {
  if (enc.overlap.empty())
    throw Error(ErrorKind::NoOverlap, "encounter has an empty overlap");
  MinApproach best{enc.overlap.first,
                   (enc.swerver_pos(enc.overlap.first) - enc.other_pos(enc.overlap.first)).norm()};
  for (int f = enc.overlap.first + 1; f <= enc.overlap.last; ++f) {
    const double d = (enc.swerver_pos(f) - enc.other_pos(f)).norm();
    if (d < best.distance_cm) best = {f, d};
  }
  return best;
}

/// Cuts the window [min_frame - half, min_frame + half] out of the overlap
/// and assembles the aligned x/y/d series (see ApproachRegion for the
/// coordinate conventions). The encounter is expected to be axis-aligned
/// already, i.e. the swerver's x is the along-motion coordinate.
inline ApproachRegion extract_approach_region(const Encounter& enc,
                                              const PreprocessConfig& cfg) {
  cfg.validate();
  const MinApproach m = min_approach_point(enc);
  const int lo = std::max(enc.overlap.first, m.frame - cfg.approach_half_window);
  const int hi = std::min(enc.overlap.last, m.frame + cfg.approach_half_window);

  ApproachRegion region;
  region.min_frame = m.frame;
  const double x0 = enc.swerver_pos(lo).x();
  for (int f = lo; f <= hi; ++f) {
    const Vec2& s = enc.swerver_pos(f);
    region.frames.push_back(f);
    region.x_cm.push_back(s.x() - x0);
    region.y_cm.push_back(s.y());
    region.d_cm.push_back((s - enc.other_pos(f)).norm());
  }
  return region;
}

/// Minimal predicted distance: the closest the two pedestrians will get if
/// both keep their current velocity, never earlier than now (t >= 0).
inline double compute_mpd(const Vec2& pos_a, const Vec2& vel_a,
                          const Vec2& pos_b, const Vec2& vel_b) {
  const Vec2 r = pos_a - pos_b;
  const Vec2 v = vel_a - vel_b;
  const double vv = v.squaredNorm();
  if (vv <= 0.0) return r.norm();
  const double t = std::max(0.0, -r.dot(v) / vv);
  return (r + t * v).norm();
}

namespace detail {

/// RMS deviation of a track from its own start-to-end chord, restricted to
/// the given frame range.
inline double cross_track_rms(const Trajectory& traj, const FrameRange& frames) {
  const Vec2 d = traj.net_displacement();
  const double len = d.norm();
  if (len <= 0.0) return 0.0;
  const Vec2 unit = d / len;
  double sum = 0.0;
  int n = 0;
  for (const TrackPoint& p : traj.points) {
    if (!frames.contains(p.frame)) continue;
    const Vec2 rel = p.pos - traj.points.front().pos;
    const double cross = rel.x() * unit.y() - rel.y() * unit.x();
    sum += cross * cross;
    ++n;
  }
  return n > 0 ? std::sqrt(sum / n) : 0.0;
}

}  // namespace detail

/// Picks the swerving pedestrian of a pair: the one with the larger
/// cross-track deviation RMS inside the approach window. Returns 0 for the
/// first trajectory, 1 for the second (ties go to the first).
inline int identify_swerver(const Trajectory& a, const Trajectory& b,
                            const PreprocessConfig& cfg) {
  Encounter enc = make_encounter(a, b);
  const MinApproach m = min_approach_point(enc);
  FrameRange window{std::max(enc.overlap.first, m.frame - cfg.approach_half_window),
                    std::min(enc.overlap.last, m.frame + cfg.approach_half_window)};
  const double rms_a = detail::cross_track_rms(enc.swerver, window);
  const double rms_b = detail::cross_track_rms(enc.other, window);
  return rms_b > rms_a ? 1 : 0;
}

}  // namespace swerve
