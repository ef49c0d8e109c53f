#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstring>

#include "swerve/core.hpp"
#include "swerve/symreg/sinusoid.hpp"
#include "swerve/synth.hpp"

#include "oracles.hpp"

using namespace swerve;
using Catch::Approx;

namespace {

const QuadraticSwerveParams kNarrow{{-5.21, 0.172, -0.036, -0.0011, 0.009, 0.0002}};
const QuadraticSwerveParams kWide{{319.9, -9.82, 0.031, 0.075, -0.076, 0.0003}};

bool same_bits(const Trajectory& a, const Trajectory& b) {
  if (a.points.size() != b.points.size()) return false;
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    if (a.points[i].frame != b.points[i].frame) return false;
    if (std::memcmp(a.points[i].pos.data(), b.points[i].pos.data(),
                    2 * sizeof(double)) != 0)
      return false;
  }
  return true;
}

}  // namespace

TEST_CASE("scenario validation") {
  ScenarioSpec spec;
  REQUIRE_NOTHROW(spec.validate());
  SECTION("speeds must be positive") {
    spec.swerver_speed_cm_s = 0.0;
    REQUIRE_THROWS_AS(spec.validate(), Error);
  }
  SECTION("frame rate must be positive") {
    spec.fps = -30.0;
    REQUIRE_THROWS_AS(spec.validate(), Error);
  }
  SECTION("duration must be positive") {
    spec.duration_s = 0.0;
    REQUIRE_THROWS_AS(spec.validate(), Error);
  }
  SECTION("noise must be non-negative") {
    spec.noise_sigma_cm = -1.0;
    REQUIRE_THROWS_AS(spec.validate(), Error);
  }
  SECTION("generate_encounter rejects invalid specs") {
    spec.crossing_offset_cm = -5.0;
    REQUIRE_THROWS_AS(generate_encounter(spec), Error);
  }
}

TEST_CASE("straight crossing with no planted model") {
  ScenarioSpec spec;  // defaults: 120 cm/s each, offset 60, 4 s at 30 fps
  auto enc = generate_encounter(spec);

  SECTION("swerver stays on the axis") {
    for (const TrackPoint& pt : enc.encounter.swerver.points)
      CHECK(pt.pos.y() == 0.0);
    for (double y : enc.y_true) CHECK(y == 0.0);
  }
  SECTION("minimum approach equals the crossing offset up to sampling") {
    MinApproach m = min_approach_point(enc.encounter);
    const double frame_travel =
        (spec.swerver_speed_cm_s + spec.other_speed_cm_s) / spec.fps;
    CHECK(m.distance_cm >= 60.0 - 1e-9);
    CHECK(m.distance_cm <= 60.0 + frame_travel);
    CHECK(std::abs(m.frame - enc.design_min_frame) <= 1);
  }
  SECTION("minimal predicted distance at frame zero equals the offset") {
    const Vec2 pa = enc.encounter.swerver_pos(0);
    const Vec2 pb = enc.encounter.other_pos(0);
    const Vec2 va(spec.swerver_speed_cm_s, 0.0);
    const Vec2 vb(0.0, spec.other_speed_cm_s);
    CHECK(compute_mpd(pa, va, pb, vb) == Approx(60.0).margin(1e-6));
  }
  SECTION("the other pedestrian crosses perpendicularly") {
    CHECK(is_roughly_perpendicular(enc.encounter));
  }
}

TEST_CASE("planted quadratic round trips through region extraction") {
  ScenarioSpec spec;
  spec.swerver_speed_cm_s = 12.0;
  spec.other_speed_cm_s = 12.0;
  spec.crossing_offset_cm = 30.0;
  spec.duration_s = 3.0;
  spec.approach_time_s = 0.7;
  spec.model = PlantedModel::Quadratic;
  spec.quad = kNarrow;
  spec.drive = QuadraticDrive::Implicit;
  auto enc = generate_encounter(spec);

  ApproachRegion region =
      extract_approach_region(enc.encounter, PreprocessConfig{1.0, 1, 30});
  std::vector<FitSample> samples;
  for (std::size_t i = 0; i < region.size(); ++i)
    samples.push_back({region.x_cm[i], region.d_cm[i], region.y_cm[i]});
  auto [fit, diag] = fit_quadratic(samples);
  for (int i = 0; i < 6; ++i)
    CHECK(std::abs(fit.a[i] - kNarrow.a[i]) / std::abs(kNarrow.a[i]) < 1e-6);
  CHECK(diag.rmse < 1e-6);
}

TEST_CASE("planted quadratic drives") {
  ScenarioSpec spec;
  spec.swerver_speed_cm_s = 12.0;
  spec.other_speed_cm_s = 12.0;
  spec.crossing_offset_cm = 30.0;
  spec.duration_s = 3.0;
  spec.approach_time_s = 0.7;
  spec.model = PlantedModel::Quadratic;
  spec.quad = kNarrow;

  SECTION("implicit drive satisfies the self-consistency equation") {
    spec.drive = QuadraticDrive::Implicit;
    auto enc = generate_encounter(spec);
    for (std::size_t k = 0; k < enc.y_true.size(); ++k) {
      const Vec2 s = enc.encounter.swerver.points[k].pos;
      const Vec2 o = enc.encounter.other.points[k].pos;
      const double d = (s - o).norm();
      CHECK(enc.y_true[k] == Approx(kNarrow.eval(s.x(), d)).margin(1e-9));
    }
  }
  SECTION("lagged drive uses the previous frame's actual distance") {
    spec.drive = QuadraticDrive::Lagged;
    auto enc = generate_encounter(spec);
    REQUIRE(enc.model_samples.size() == enc.y_true.size());
    CHECK(enc.model_samples[0].d == Approx(enc.initial_distance));
    for (std::size_t k = 1; k < enc.y_true.size(); ++k) {
      const Vec2 s = enc.encounter.swerver.points[k - 1].pos;
      const Vec2 o = enc.encounter.other.points[k - 1].pos;
      CHECK(enc.model_samples[k].d == Approx((s - o).norm()).margin(1e-9));
      CHECK(enc.y_true[k] ==
            Approx(kNarrow.eval(enc.model_samples[k].x, enc.model_samples[k].d))
                .margin(1e-9));
    }
  }
  SECTION("nominal drive reads distances off the unperturbed paths") {
    spec.drive = QuadraticDrive::Nominal;
    auto enc = generate_encounter(spec);
    ScenarioSpec base = spec;
    base.model = PlantedModel::None;
    auto straight = generate_encounter(base);
    for (std::size_t k = 0; k < enc.model_samples.size(); ++k) {
      const double d_straight = (straight.encounter.swerver.points[k].pos -
                                 straight.encounter.other.points[k].pos)
                                    .norm();
      CHECK(enc.model_samples[k].d == Approx(d_straight).margin(1e-9));
    }
  }
}

TEST_CASE("planted sinusoid round trips through the direct fitter") {
  ScenarioSpec spec;
  spec.model = PlantedModel::Sinusoid;
  spec.sinusoid = symreg::SinusoidParams{-0.335, 0.046, -4.137, -0.968};
  auto enc = generate_encounter(spec);

  std::vector<double> xs, ys;
  for (const TrackPoint& pt : enc.encounter.swerver.points) {
    xs.push_back(pt.pos.x());
    ys.push_back(pt.pos.y());
  }
  const symreg::SinusoidParams fit = symreg::fit_sinusoid(xs, ys);
  const symreg::SinusoidParams want = symreg::canonicalize(spec.sinusoid);
  CHECK(fit.k == Approx(want.k).epsilon(1e-6));
  CHECK(fit.a == Approx(want.a).epsilon(1e-6));
  CHECK(fit.b == Approx(want.b).margin(1e-6));
  CHECK(fit.c == Approx(want.c).margin(1e-6));
}

TEST_CASE("seeded generation is reproducible and noise is well behaved") {
  SECTION("identical specs give bitwise identical encounters") {
    ScenarioSpec spec;
    spec.noise_sigma_cm = 2.0;
    spec.seed = 99;
    auto a = generate_encounter(spec);
    auto b = generate_encounter(spec);
    CHECK(same_bits(a.encounter.swerver, b.encounter.swerver));
    CHECK(same_bits(a.encounter.other, b.encounter.other));
    CHECK(a.y_true == b.y_true);
  }
  SECTION("different seeds decorrelate the noise") {
    ScenarioSpec spec;
    spec.noise_sigma_cm = 2.0;
    spec.seed = 1;
    auto a = generate_encounter(spec);
    spec.seed = 2;
    auto b = generate_encounter(spec);
    CHECK_FALSE(same_bits(a.encounter.swerver, b.encounter.swerver));
  }
  SECTION("residual moments match the requested noise level") {
    const double sigma = 2.0;
    std::vector<double> residuals;
    for (unsigned seed = 0; seed < 10; ++seed) {
      ScenarioSpec spec;
      spec.noise_sigma_cm = sigma;
      spec.seed = seed;
      auto noisy = generate_encounter(spec);
      ScenarioSpec clean = spec;
      clean.noise_sigma_cm = 0.0;
      auto truth = generate_encounter(clean);
      for (std::size_t k = 0; k < noisy.encounter.swerver.points.size(); ++k) {
        const Vec2 dn = noisy.encounter.swerver.points[k].pos -
                        truth.encounter.swerver.points[k].pos;
        const Vec2 do_ = noisy.encounter.other.points[k].pos -
                         truth.encounter.other.points[k].pos;
        residuals.insert(residuals.end(), {dn.x(), dn.y(), do_.x(), do_.y()});
      }
    }
    REQUIRE(residuals.size() >= 1000);
    double mean = 0.0;
    for (double r : residuals) mean += r;
    mean /= residuals.size();
    double var = 0.0;
    for (double r : residuals) var += (r - mean) * (r - mean);
    var /= (residuals.size() - 1);
    CHECK(std::abs(mean) < 4.0 * sigma / std::sqrt(residuals.size()));
    CHECK(var > 0.8 * sigma * sigma);
    CHECK(var < 1.2 * sigma * sigma);
  }
}

TEST_CASE("scenario bookkeeping") {
  ScenarioSpec spec;
  auto enc = generate_encounter(spec);
  SECTION("initial distance matches the first frame geometry") {
    const double d0 =
        (enc.encounter.swerver_pos(0) - enc.encounter.other_pos(0)).norm();
    CHECK(enc.initial_distance == Approx(d0));
  }
  SECTION("frame count covers the requested duration") {
    CHECK(enc.encounter.swerver.points.size() == 121);
    CHECK(enc.encounter.overlap.count() == 121);
  }
  SECTION("design minimum sits at the approach time") {
    CHECK(enc.design_min_frame == 60);
  }
}
