#include <catch2/catch_amalgamated.hpp>

#include <swerve/swerve.hpp>

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using Catch::Matchers::ContainsSubstring;
using swerve::InputError;
using swerve::Trajectory;
using swerve::Vec2;
namespace io = swerve::io;

namespace {

fs::path test_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "swerve-io-test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

fs::path write_temp(const std::string& name, const std::string& content) {
  fs::path p = test_dir() / name;
  io::write_text_file(p, content);
  return p;
}

}  // namespace

TEST_CASE("nine significant digit float serialization") {
  CHECK(io::format_g9(0.123456789012) == "0.123456789");
  CHECK(io::format_g9(-5.21) == "-5.21");
  CHECK(io::format_g9(0.0) == "0");
  CHECK(io::format_g9(123456789012.0) == "1.23456789e+11");
  CHECK(io::format_g9(1e-7) == "1e-07");
  // Round-trip through the parser reproduces the serialized value exactly.
  for (double v : {0.123456789012, -5.21, 3.0, 1e-7, -272.456}) {
    std::string s = io::format_g9(v);
    double parsed = swerve::detail::parse_double(s, "test");
    CHECK(io::format_g9(parsed) == s);
  }
}

TEST_CASE("trajectory csv") {
  Trajectory a;
  a.ped_id = "walker_a";
  a.fps = 30.0;
  a.points = {{0, Vec2(12.3456789012, -3.5)}, {1, Vec2(13.0, -3.25)}, {3, Vec2(14.5, -3.0)}};
  Trajectory b;
  b.ped_id = "walker_b";
  b.fps = 30.0;
  b.points = {{0, Vec2(0.0, 50.0)}, {1, Vec2(0.5, 49.0)}};

  SECTION("write, read, write is byte identical") {
    std::string text = io::trajectory_csv({&a, &b});
    fs::path p = write_temp("traj.csv", text);
    auto back = io::read_trajectory_csv(p, 30.0);
    REQUIRE(back.size() == 2);
    CHECK(back[0].ped_id == "walker_a");
    CHECK(back[1].ped_id == "walker_b");
    CHECK(back[0].fps == 30.0);
    REQUIRE(back[0].points.size() == 3);
    CHECK(back[0].points[2].frame == 3);
    CHECK(back[0].points[0].pos.x() == swerve::detail::parse_double("12.3456789", "t"));
    CHECK(io::trajectory_csv({&back[0], &back[1]}) == text);
  }

  SECTION("reader groups interleaved rows by pedestrian") {
    fs::path p = write_temp("interleaved.csv",
                            "ped_id,frame,x,y\n"
                            "p1,0,1,2\n"
                            "p2,0,5,6\n"
                            "p1,1,1.5,2.5\n"
                            "p2,2,5.5,6.5\n");
    auto back = io::read_trajectory_csv(p, 25.0);
    REQUIRE(back.size() == 2);
    CHECK(back[0].points.size() == 2);
    CHECK(back[1].points.size() == 2);
    CHECK(back[1].points[1].frame == 2);
    CHECK(back[0].fps == 25.0);
  }

  SECTION("malformed input is rejected with location context") {
    CHECK_THROWS_WITH(
        io::read_trajectory_csv(write_temp("bad_header.csv", "id,frame,x,y\np1,0,1,2\n"), 30.0),
        ContainsSubstring("expected header"));
    CHECK_THROWS_WITH(
        io::read_trajectory_csv(
            write_temp("bad_order.csv", "ped_id,frame,x,y\np1,5,1,2\np1,5,1,2\n"), 30.0),
        ContainsSubstring("p1") && ContainsSubstring("strictly increasing"));
    CHECK_THROWS_WITH(
        io::read_trajectory_csv(
            write_temp("bad_float.csv", "ped_id,frame,x,y\np1,0,1,2\np1,1,oops,2\n"), 30.0),
        ContainsSubstring("line 3"));
    CHECK_THROWS_WITH(
        io::read_trajectory_csv(write_temp("bad_fields.csv", "ped_id,frame,x,y\np1,0,1\n"), 30.0),
        ContainsSubstring("line 2") && ContainsSubstring("fields"));
    CHECK_THROWS_WITH(io::read_trajectory_csv(write_temp("empty.csv", "\n"), 30.0),
                      ContainsSubstring("empty input"));
    CHECK_THROWS_AS(io::read_trajectory_csv(test_dir() / "missing.csv", 30.0), InputError);
  }
}

TEST_CASE("pairs csv") {
  std::vector<io::EncounterPair> pairs = {{"walker_a", "walker_b"}, {"p3", "p9"}};
  std::string text = io::pairs_csv(pairs);
  fs::path p = write_temp("pairs.csv", text);
  auto back = io::read_pairs_csv(p);
  REQUIRE(back.size() == 2);
  CHECK(back[1].swerver_id == "p3");
  CHECK(back[1].other_id == "p9");
  CHECK(io::pairs_csv(back) == text);

  CHECK_THROWS_WITH(io::read_pairs_csv(write_temp("pairs_bad.csv", "swerver_id,other_id\n,p2\n")),
                    ContainsSubstring("empty pedestrian id"));
}

TEST_CASE("approach region csv") {
  swerve::ApproachRegion region;
  region.frames = {40, 41, 42, 43, 44};
  region.x_cm = {0.0, 10.25, 20.5, 30.75, 41.0};
  region.y_cm = {0.5, 1.23456789012, -0.25, 0.0, 0.125};
  region.d_cm = {90.0, 70.0, 55.5, 62.0, 80.0};
  region.min_frame = 42;

  std::string text = io::region_csv(region);
  fs::path p = write_temp("region.csv", text);
  auto back = io::read_region_csv(p);
  REQUIRE(back.size() == 5);
  CHECK(back.frames == region.frames);
  CHECK(back.min_frame == 42);  // recomputed from the distance column
  CHECK(io::region_csv(back) == text);

  CHECK_THROWS_WITH(io::read_region_csv(write_temp("region_empty.csv", "frame,x_cm,y_cm,d_cm\n")),
                    ContainsSubstring("no data rows"));
}

TEST_CASE("other path and truth csv") {
  std::vector<int> frames = {7, 8, 9};
  std::vector<Vec2> pos = {Vec2(1.0, 2.0), Vec2(1.5, 2.5), Vec2(2.0, 3.0)};
  std::string path_text = io::other_path_csv(frames, pos);
  auto pos_back = io::read_other_path_csv(write_temp("other.csv", path_text));
  REQUIRE(pos_back.size() == 3);
  CHECK(pos_back[2].y() == 3.0);
  CHECK(io::other_path_csv(frames, pos_back) == path_text);

  std::vector<double> y_true = {0.0, -0.335, 1.456};
  std::string truth_text = io::truth_csv(frames, y_true);
  auto truth_back = io::read_truth_csv(write_temp("truth.csv", truth_text));
  CHECK(truth_back == y_true);
  CHECK(io::truth_csv(frames, truth_back) == truth_text);

  CHECK_THROWS_WITH(io::read_truth_csv(write_temp("truth_bad.csv", "frame,y_true\n1,\n")),
                    ContainsSubstring("line 2"));
}

TEST_CASE("model sample csv") {
  std::vector<swerve::FitSample> samples = {{0.0, 45.0, -5.21}, {10.0, 38.7654321012, 0.172}};
  std::string text = io::samples_csv(samples);
  auto back = io::read_samples_csv(write_temp("samples.csv", text));
  REQUIRE(back.size() == 2);
  CHECK(back[1].d == swerve::detail::parse_double("38.7654321", "t"));
  CHECK(io::samples_csv(back) == text);
}

TEST_CASE("prediction csv") {
  swerve::PredictionRun run;
  run.method = "dynamic";
  run.frames = {0, 1, 2};
  run.y_obs = {0.1, 0.2, 0.3};
  run.y_pred = {0.1, 0.25, 0.28};
  run.abs_err = {0.0, 0.05, 0.02};
  std::string text = io::prediction_csv(run);
  fs::path p = write_temp("dynamic.csv", text);
  auto back = io::read_prediction_csv(p);
  CHECK(back.method == "dynamic");  // named after the file stem
  CHECK(back.frames == run.frames);
  CHECK(io::prediction_csv(back) == text);
}

TEST_CASE("swerve parameter json") {
  swerve::QuadraticSwerveParams params;
  params.a = {-5.2123456789012, 0.172, -0.036, -0.0011, 0.009, 0.0002};
  swerve::FitDiagnostics diag;
  diag.rmse = 0.125;
  diag.r_squared = 0.9987;
  diag.n_points = 61;

  std::string text = io::params_json(params, diag);
  fs::path p = write_temp("params.json", text);
  auto back = io::read_params_json(p);
  CHECK(back.a[0] == swerve::detail::parse_double("-5.21234568", "t"));
  CHECK(back.a[5] == 0.0002);
  CHECK(io::params_json(back, diag) == text);

  auto j = nlohmann::json::parse(text);
  CHECK(j["a"].size() == 6);
  CHECK(j["n"] == 61);

  CHECK_THROWS_WITH(io::read_params_json(write_temp("params_noa.json", "{\"rmse_cm\": 1}\n")),
                    ContainsSubstring("'a'"));
  CHECK_THROWS_WITH(
      io::read_params_json(write_temp("params_badnum.json", "{\"a\": [1,2,3,4,5,\"x\"]}\n")),
      ContainsSubstring("numbers"));
  CHECK_THROWS_WITH(io::read_params_json(write_temp("params_garbled.json", "{oops\n")),
                    ContainsSubstring("cannot parse"));
}

TEST_CASE("parameter distribution json") {
  swerve::ParamDistribution dist;
  for (int i = 0; i < 6; ++i) dist.mean(i) = 0.5 * i - 1.0;
  dist.covariance = Eigen::Matrix<double, 6, 6>::Identity() * 0.25;
  dist.covariance(0, 1) = dist.covariance(1, 0) = 0.0625;
  dist.n_encounters = 14;

  std::string text = io::distribution_json(dist);
  CHECK(io::distribution_json(dist) == text);  // deterministic serialization

  auto j = nlohmann::json::parse(text);
  REQUIRE(j["mean"].size() == 6);
  REQUIRE(j["covariance"].size() == 36);  // row-major 6x6
  CHECK(j["mean"][2] == 0.0);
  CHECK(j["covariance"][1] == 0.0625);  // (0,1) entry in row-major order
  CHECK(j["covariance"][7] == 0.25);    // (1,1) entry
  CHECK(j["n_encounters"] == 14);
}

TEST_CASE("metrics, front, and sinusoid json") {
  swerve::PredictorMetrics m1{"dynamic", 1.25, 3.5, 4.75, 0.875};
  swerve::PredictorMetrics m2{"ukf", 1.5, 2.5, 3.5, 1.125};
  std::string metrics_text = io::metrics_json({m1, m2});
  auto jm = nlohmann::json::parse(metrics_text);
  REQUIRE(jm.size() == 2);
  CHECK(jm[0]["method"] == "dynamic");
  CHECK(jm[0]["post_rmse_cm"] == 0.875);
  CHECK(jm[1]["bootstrap_rmse_cm"] == 3.5);

  using swerve::symreg::Expr;
  swerve::symreg::Individual ind;
  ind.expr = Expr::add(Expr::variable(), Expr::constant(1.0));
  ind.mse = 0.5;
  ind.complexity = 3;
  std::string front_text = io::front_json({ind});
  auto jf = nlohmann::json::parse(front_text);
  REQUIRE(jf.size() == 1);
  CHECK(jf[0]["expr"] == "x + 1");
  CHECK(jf[0]["mse"] == 0.5);
  CHECK(jf[0]["complexity"] == 3);

  swerve::symreg::SinusoidParams sp{0.335, 0.046, -0.995, -0.968};
  auto js = nlohmann::json::parse(io::sinusoid_json(sp, 0.001));
  CHECK(js["k"] == 0.335);
  CHECK(js["a"] == 0.046);
  CHECK(js["rmse"] == 0.001);
}

TEST_CASE("dataset config json") {
  io::DatasetConfig cfg;
  cfg.cm_per_pixel = 2.5;
  cfg.fps = 16.0;
  std::string text = io::dataset_config_json(cfg);
  auto back = io::read_dataset_config(write_temp("config.json", text));
  CHECK(back.cm_per_pixel == 2.5);
  CHECK(back.fps == 16.0);
  CHECK(io::dataset_config_json(back) == text);

  CHECK_THROWS_WITH(
      io::read_dataset_config(write_temp("config_nofps.json", "{\"cm_per_pixel\": 1.0}\n")),
      ContainsSubstring("'fps'"));
  CHECK_THROWS_WITH(
      io::read_dataset_config(
          write_temp("config_badscale.json", "{\"cm_per_pixel\": 0, \"fps\": 30}\n")),
      ContainsSubstring("cm_per_pixel"));
  CHECK_THROWS_WITH(io::read_dataset_config(write_temp("config_garbled.json", "nope\n")),
                    ContainsSubstring("cannot parse"));
}

TEST_CASE("run manifest json") {
  io::RunManifest m;
  m.subcommand = "synth";
  m.argv = {"swerve_cli", "synth", "--label", "a \"quoted\"\tvalue", "--out", "runs/s1"};
  m.inputs = {"data/trajectories.csv"};
  m.config_path = "data/config.json";
  m.output_dir = "runs/s1";
  m.seed = 42;
  m.tool_version = swerve::kToolVersion;

  std::string text = io::manifest_json(m);
  CHECK(io::manifest_json(m) == text);

  auto j = nlohmann::json::parse(text);  // escaping must produce valid JSON
  CHECK(j["subcommand"] == "synth");
  CHECK(j["argv"][3] == "a \"quoted\"\tvalue");
  CHECK(j["inputs"][0] == "data/trajectories.csv");
  CHECK(j["seed"] == 42);
  CHECK(j["tool_version"] == std::string(swerve::kToolVersion));
}
