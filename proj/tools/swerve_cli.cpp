// Batch front-end for the swerving-pedestrian toolkit. Subcommands cover the
// full pipeline: preprocess raw tracks, fit the quadratic deviation model,
// roll predictions forward, assimilate observations, run symbolic regression,
// generate synthetic encounters, and score prediction files.
//
// Exit codes: 0 success, 1 domain error, 2 input error, 64 usage error.

#include <atomic>
#include <cctype>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "swerve/swerve.hpp"

namespace fs = std::filesystem;
using swerve::detail::format_g9;

namespace {

std::vector<std::string> g_argv;

swerve::io::RunManifest make_manifest(const std::string& subcommand,
                                      std::vector<std::string> inputs,
                                      const std::string& config_path,
                                      const std::string& out_dir, std::uint64_t seed) {
  swerve::io::RunManifest m;
  m.subcommand = subcommand;
  m.argv = g_argv;
  m.inputs = std::move(inputs);
  m.config_path = config_path;
  m.output_dir = out_dir;
  m.seed = seed;
  m.tool_version = swerve::kToolVersion;
  return m;
}

void prepare_out_dir(const std::string& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec)
    throw swerve::InputError("cannot create output directory '" + out_dir +
                             "': " + ec.message());
}

std::string sanitize_id(const std::string& id) {
  std::string out;
  for (char c : id)
    out += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
  return out;
}

std::vector<swerve::FitSample> region_to_samples(const swerve::ApproachRegion& region) {
  std::vector<swerve::FitSample> samples;
  samples.reserve(region.size());
  for (std::size_t i = 0; i < region.size(); ++i)
    samples.push_back({region.x_cm[i], region.d_cm[i], region.y_cm[i]});
  return samples;
}

// ---------------------------------------------------------------------------
// preprocess

struct PreprocessOpts {
  std::string trajectories;
  std::string pairs;
  std::string config;
  std::string out;
  int smooth_window = 30;
  int half_window = 30;
  int jobs = 1;
  bool perpendicular_only = false;
  bool trust_pairing = false;
};

void cmd_preprocess(const PreprocessOpts& opt) {
  const swerve::io::DatasetConfig ds = swerve::io::read_dataset_config(opt.config);
  swerve::PreprocessConfig pcfg;
  pcfg.cm_per_pixel = ds.cm_per_pixel;
  pcfg.smooth_window = opt.smooth_window;
  pcfg.approach_half_window = opt.half_window;
  pcfg.validate();
  if (opt.jobs < 1) throw swerve::InputError("--jobs must be >= 1");

  const std::vector<swerve::Trajectory> trajs =
      swerve::io::read_trajectory_csv(opt.trajectories, ds.fps);
  std::map<std::string, const swerve::Trajectory*> by_id;
  for (const swerve::Trajectory& t : trajs) by_id[t.ped_id] = &t;

  const std::vector<swerve::io::EncounterPair> pairs =
      swerve::io::read_pairs_csv(opt.pairs);
  prepare_out_dir(opt.out);

  struct RowResult {
    std::string summary_line;  // empty when the pair was skipped
    std::string note;
  };
  std::vector<RowResult> rows(pairs.size());

  const auto lookup = [&](const std::string& id) -> const swerve::Trajectory& {
    auto it = by_id.find(id);
    if (it == by_id.end())
      throw swerve::InputError("pedestrian '" + id + "' from '" + opt.pairs +
                               "' not found in '" + opt.trajectories + "'");
    return *it->second;
  };

  const auto process_pair = [&](std::size_t idx) {
    const swerve::io::EncounterPair& pair = pairs[idx];
    if (pair.swerver_id == pair.other_id)
      throw swerve::InputError("pair '" + pair.swerver_id +
                               "' references the same pedestrian twice");
    swerve::Trajectory a = smooth_moving_average(
        scale_to_cm(lookup(pair.swerver_id), pcfg), pcfg.smooth_window);
    swerve::Trajectory b = smooth_moving_average(
        scale_to_cm(lookup(pair.other_id), pcfg), pcfg.smooth_window);
    if (!opt.trust_pairing && swerve::identify_swerver(a, b, pcfg) == 1)
      std::swap(a, b);

    swerve::Encounter enc = swerve::make_encounter(std::move(a), std::move(b));
    if (opt.perpendicular_only && !swerve::is_roughly_perpendicular(enc)) {
      rows[idx].note = "skipped pair " + pair.swerver_id + "," + pair.other_id +
                       ": approach angle " + format_g9(swerve::approach_angle_deg(enc)) +
                       " deg is not roughly perpendicular";
      return;
    }
    enc = swerve::rotate_axis_align(enc);
    const swerve::ApproachRegion region = swerve::extract_approach_region(enc, pcfg);

    const std::string stem =
        sanitize_id(enc.swerver.ped_id) + "_" + sanitize_id(enc.other.ped_id);
    swerve::io::write_text_file(fs::path(opt.out) / ("region_" + stem + ".csv"),
                                swerve::io::region_csv(region));

    // Other pedestrian's path in the region's coordinate frame (x re-based
    // the same way as the region's x series).
    const double x0 = enc.swerver_pos(region.frames.front()).x();
    std::vector<swerve::Vec2> other_path;
    other_path.reserve(region.size());
    for (int f : region.frames)
      other_path.push_back(enc.other_pos(f) - swerve::Vec2(x0, 0.0));
    swerve::io::write_text_file(fs::path(opt.out) / ("otherpath_" + stem + ".csv"),
                                swerve::io::other_path_csv(region.frames, other_path));

    const swerve::MinApproach m = swerve::min_approach_point(enc);
    rows[idx].summary_line = enc.swerver.ped_id + "," + enc.other.ped_id + "," +
                             format_g9(m.distance_cm) + "," + std::to_string(m.frame) +
                             "," + std::to_string(region.size()) + "\n";
  };

  if (opt.jobs == 1 || pairs.size() <= 1) {
    for (std::size_t i = 0; i < pairs.size(); ++i) process_pair(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    const int n_workers = std::min<std::size_t>(opt.jobs, pairs.size());
    std::vector<std::thread> workers;
    workers.reserve(n_workers);
    for (int w = 0; w < n_workers; ++w) {
      workers.emplace_back([&]() {
        while (true) {
          const std::size_t idx = next.fetch_add(1);
          if (idx >= pairs.size()) return;
          try {
            process_pair(idx);
          } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
            return;
          }
        }
      });
    }
    for (std::thread& t : workers) t.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  std::string summary = "swerver_id,other_id,min_distance_cm,min_frame,n_frames\n";
  for (const RowResult& row : rows) {
    summary += row.summary_line;
    if (!row.note.empty()) std::cout << row.note << "\n";
  }
  swerve::io::write_text_file(fs::path(opt.out) / "summary.csv", summary);
  swerve::io::write_text_file(
      fs::path(opt.out) / "manifest.json",
      swerve::io::manifest_json(make_manifest(
          "preprocess", {opt.trajectories, opt.pairs}, opt.config, opt.out, 0)));
}

// ---------------------------------------------------------------------------
// fit

struct FitOpts {
  std::string region;
  std::string samples;
  std::string out;
};

void cmd_fit(const FitOpts& opt) {
  if (opt.region.empty() == opt.samples.empty())
    throw swerve::InputError("fit needs exactly one of --region or --samples");
  std::vector<swerve::FitSample> samples;
  std::string input;
  if (!opt.region.empty()) {
    input = opt.region;
    samples = region_to_samples(swerve::io::read_region_csv(opt.region));
  } else {
    input = opt.samples;
    samples = swerve::io::read_samples_csv(opt.samples);
  }
  const auto [params, diag] = swerve::fit_quadratic(samples);
  prepare_out_dir(opt.out);
  swerve::io::write_text_file(fs::path(opt.out) / "params.json",
                              swerve::io::params_json(params, diag));
  swerve::io::write_text_file(
      fs::path(opt.out) / "manifest.json",
      swerve::io::manifest_json(make_manifest("fit", {input}, "", opt.out, 0)));
  std::cout << "fit " << diag.n_points << " samples: rmse_cm=" << format_g9(diag.rmse)
            << " r2=" << format_g9(diag.r_squared) << "\n";
}

// ---------------------------------------------------------------------------
// predict

struct PredictOpts {
  std::string region;
  std::string other;
  std::string params;
  std::string out;
  double initial_distance = std::numeric_limits<double>::quiet_NaN();
};

void cmd_predict(const PredictOpts& opt) {
  const swerve::ApproachRegion region = swerve::io::read_region_csv(opt.region);
  const std::vector<swerve::Vec2> other = swerve::io::read_other_path_csv(opt.other);
  if (other.size() != region.size())
    throw swerve::InputError("'" + opt.other + "' has " + std::to_string(other.size()) +
                             " rows but '" + opt.region + "' has " +
                             std::to_string(region.size()));
  const swerve::QuadraticSwerveParams params = swerve::io::read_params_json(opt.params);
  const double d0 =
      std::isnan(opt.initial_distance) ? region.d_cm.front() : opt.initial_distance;

  swerve::PredictionRun run;
  run.frames = region.frames;
  run.y_obs = region.y_cm;
  run.y_pred = swerve::predict_trajectory(params, region.x_cm, other, d0);
  run.method = "model";
  run.abs_err.resize(region.size());
  for (std::size_t i = 0; i < region.size(); ++i)
    run.abs_err[i] = std::abs(run.y_pred[i] - run.y_obs[i]);

  prepare_out_dir(opt.out);
  swerve::io::write_text_file(fs::path(opt.out) / "prediction.csv",
                              swerve::io::prediction_csv(run));
  swerve::io::write_text_file(
      fs::path(opt.out) / "manifest.json",
      swerve::io::manifest_json(make_manifest(
          "predict", {opt.region, opt.other, opt.params}, "", opt.out, 0)));
}

// ---------------------------------------------------------------------------
// assimilate

struct AssimilateOpts {
  std::string region;
  std::string other;
  std::string params;
  std::string method = "dynamic";
  std::string out;
  int interval = 5;
  int bootstrap = 10;
  double fps = 30.0;
  double ukf_alpha = 1e-3;
  double ukf_beta = 2.0;
  double ukf_kappa = 0.0;
  double process_noise = 2500.0;
  double measurement_noise = 1.0;
  double initial_distance = std::numeric_limits<double>::quiet_NaN();
};

void cmd_assimilate(const AssimilateOpts& opt) {
  swerve::PredictorMethod method;
  if (opt.method == "dynamic") {
    method = swerve::PredictorMethod::DynamicUpdate;
  } else if (opt.method == "ukf") {
    method = swerve::PredictorMethod::Ukf;
  } else {
    throw swerve::Error(swerve::ErrorKind::InvalidConfig,
                        "unknown assimilation method '" + opt.method +
                            "' (expected 'dynamic' or 'ukf')");
  }

  const swerve::ApproachRegion region = swerve::io::read_region_csv(opt.region);
  const std::vector<swerve::Vec2> other = swerve::io::read_other_path_csv(opt.other);
  if (other.size() != region.size())
    throw swerve::InputError("'" + opt.other + "' has " + std::to_string(other.size()) +
                             " rows but '" + opt.region + "' has " +
                             std::to_string(region.size()));
  swerve::QuadraticSwerveParams params;
  std::vector<std::string> inputs{opt.region, opt.other};
  if (method == swerve::PredictorMethod::DynamicUpdate) {
    if (opt.params.empty())
      throw swerve::InputError("--params is required for --method dynamic");
    params = swerve::io::read_params_json(opt.params);
    inputs.push_back(opt.params);
  }

  swerve::DynamicUpdateConfig dyn;
  dyn.correction_interval = opt.interval;
  dyn.bootstrap_frames = opt.bootstrap;
  swerve::UkfConfig ukf;
  ukf.alpha = opt.ukf_alpha;
  ukf.beta = opt.ukf_beta;
  ukf.kappa = opt.ukf_kappa;
  ukf.process_noise_spectral = opt.process_noise;
  ukf.measurement_noise_var = opt.measurement_noise;
  if (!(opt.fps > 0.0))
    throw swerve::Error(swerve::ErrorKind::InvalidConfig, "--fps must be positive");
  ukf.dt = 1.0 / opt.fps;
  ukf.validate();

  swerve::PredictionRun run = swerve::run_predictor(region, other, method, params, dyn,
                                                    ukf, opt.initial_distance);
  const std::vector<swerve::PredictorMetrics> metrics =
      swerve::compare_predictors({run});

  prepare_out_dir(opt.out);
  swerve::io::write_text_file(fs::path(opt.out) / "prediction.csv",
                              swerve::io::prediction_csv(run));
  swerve::io::write_text_file(fs::path(opt.out) / "metrics.json",
                              swerve::io::metrics_json(metrics));
  swerve::io::write_text_file(
      fs::path(opt.out) / "manifest.json",
      swerve::io::manifest_json(make_manifest("assimilate", inputs, "", opt.out, 0)));
  std::cout << "assimilate method=" << run.method
            << " rmse_cm=" << format_g9(metrics[0].rmse_cm)
            << " post_rmse_cm=" << format_g9(metrics[0].post_rmse_cm) << "\n";
}

// ---------------------------------------------------------------------------
// symreg

struct SymregOpts {
  std::string region;
  std::string data;
  std::string out;
  swerve::symreg::SymRegConfig cfg;
  double prune_tol = -1.0;  // < 0 disables pruning
  bool fit_sinusoid_too = false;
};

void read_xy_csv(const std::string& path, std::vector<double>& xs,
                 std::vector<double>& ys) {
  swerve::io::detail::for_each_csv_row(
      swerve::io::read_text_file(path), path, "x,y", 2,
      [&](const std::vector<std::string_view>& f, int line_no) {
        const std::string context = swerve::io::detail::row_context(path, line_no);
        xs.push_back(swerve::detail::parse_double(f[0], context));
        ys.push_back(swerve::detail::parse_double(f[1], context));
      });
}

void cmd_symreg(const SymregOpts& opt) {
  if (opt.region.empty() == opt.data.empty())
    throw swerve::InputError("symreg needs exactly one of --region or --data");
  std::vector<double> xs, ys;
  std::string input;
  if (!opt.region.empty()) {
    input = opt.region;
    const swerve::ApproachRegion region = swerve::io::read_region_csv(opt.region);
    xs = region.x_cm;
    ys = region.y_cm;
  } else {
    input = opt.data;
    read_xy_csv(opt.data, xs, ys);
  }

  const swerve::symreg::SymRegResult result = swerve::symreg::run_search(xs, ys, opt.cfg);
  prepare_out_dir(opt.out);
  swerve::io::write_text_file(fs::path(opt.out) / "front.json",
                              swerve::io::front_json(result.front));

  if (opt.prune_tol >= 0.0) {
    const swerve::symreg::Expr pruned =
        swerve::symreg::prune_insignificant_terms(result.best.expr, xs, ys, opt.prune_tol);
    swerve::symreg::Individual ind;
    ind.expr = pruned;
    ind.mse = swerve::symreg::mse(pruned, xs, ys);
    ind.complexity = swerve::symreg::complexity(pruned);
    swerve::io::write_text_file(fs::path(opt.out) / "pruned.json",
                                swerve::io::front_json({ind}));
  }

  if (opt.fit_sinusoid_too) {
    const swerve::symreg::SinusoidParams p = swerve::symreg::fit_sinusoid(xs, ys);
    double sq = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double r = p.eval(xs[i]) - ys[i];
      sq += r * r;
    }
    const double rmse = std::sqrt(sq / static_cast<double>(xs.size()));
    swerve::io::write_text_file(fs::path(opt.out) / "sinusoid.json",
                                swerve::io::sinusoid_json(p, rmse));
  }

  swerve::io::write_text_file(
      fs::path(opt.out) / "manifest.json",
      swerve::io::manifest_json(
          make_manifest("symreg", {input}, "", opt.out, opt.cfg.seed)));
  std::cout << "symreg front size " << result.front.size() << ", best mse "
            << format_g9(result.best.mse) << ": "
            << swerve::symreg::to_string(result.best.expr) << "\n";
}

// ---------------------------------------------------------------------------
// synth

struct SynthOpts {
  swerve::ScenarioSpec spec;
  std::string model = "none";
  std::string drive = "implicit";
  std::vector<double> coeffs;
  std::vector<double> sinusoid;
  std::string out;
};

void cmd_synth(const SynthOpts& opt) {
  swerve::ScenarioSpec spec = opt.spec;
  if (opt.model == "none") {
    spec.model = swerve::PlantedModel::None;
  } else if (opt.model == "quadratic") {
    spec.model = swerve::PlantedModel::Quadratic;
  } else if (opt.model == "sinusoid") {
    spec.model = swerve::PlantedModel::Sinusoid;
  } else {
    throw swerve::Error(swerve::ErrorKind::InvalidConfig,
                        "unknown planted model '" + opt.model +
                            "' (expected 'none', 'quadratic' or 'sinusoid')");
  }
  if (opt.drive == "implicit") {
    spec.drive = swerve::QuadraticDrive::Implicit;
  } else if (opt.drive == "lagged") {
    spec.drive = swerve::QuadraticDrive::Lagged;
  } else if (opt.drive == "nominal") {
    spec.drive = swerve::QuadraticDrive::Nominal;
  } else {
    throw swerve::Error(swerve::ErrorKind::InvalidConfig,
                        "unknown quadratic drive '" + opt.drive +
                            "' (expected 'implicit', 'lagged' or 'nominal')");
  }
  if (spec.model == swerve::PlantedModel::Quadratic) {
    if (opt.coeffs.size() != 6)
      throw swerve::Error(swerve::ErrorKind::InvalidConfig,
                          "--coeffs needs exactly 6 values for a quadratic model");
    for (int i = 0; i < 6; ++i) spec.quad.a[i] = opt.coeffs[i];
  }
  if (spec.model == swerve::PlantedModel::Sinusoid) {
    if (opt.sinusoid.size() != 4)
      throw swerve::Error(swerve::ErrorKind::InvalidConfig,
                          "--sinusoid needs exactly 4 values (k a b c)");
    spec.sinusoid.k = opt.sinusoid[0];
    spec.sinusoid.a = opt.sinusoid[1];
    spec.sinusoid.b = opt.sinusoid[2];
    spec.sinusoid.c = opt.sinusoid[3];
  }

  const swerve::SyntheticEncounter synth = swerve::generate_encounter(spec);
  prepare_out_dir(opt.out);

  swerve::io::write_text_file(
      fs::path(opt.out) / "trajectories.csv",
      swerve::io::trajectory_csv({&synth.encounter.swerver, &synth.encounter.other}));
  swerve::io::write_text_file(fs::path(opt.out) / "config.json",
                              swerve::io::dataset_config_json({1.0, spec.fps}));
  swerve::io::write_text_file(
      fs::path(opt.out) / "encounters.csv",
      swerve::io::pairs_csv({{synth.encounter.swerver.ped_id,
                              synth.encounter.other.ped_id}}));

  std::vector<int> frames(synth.y_true.size());
  for (std::size_t i = 0; i < frames.size(); ++i) frames[i] = static_cast<int>(i);
  swerve::io::write_text_file(fs::path(opt.out) / "truth.csv",
                              swerve::io::truth_csv(frames, synth.y_true));
  if (spec.model == swerve::PlantedModel::Quadratic)
    swerve::io::write_text_file(fs::path(opt.out) / "samples.csv",
                                swerve::io::samples_csv(synth.model_samples));

  swerve::io::write_text_file(
      fs::path(opt.out) / "scenario.json",
      std::string("{\"initial_distance_cm\": ") + format_g9(synth.initial_distance) +
          ", \"design_min_frame\": " + std::to_string(synth.design_min_frame) +
          ", \"n_frames\": " + std::to_string(synth.y_true.size()) + "}\n");

  swerve::io::write_text_file(
      fs::path(opt.out) / "manifest.json",
      swerve::io::manifest_json(make_manifest("synth", {}, "", opt.out, spec.seed)));
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateOpts {
  std::vector<std::string> pred_files;
  std::string out;
  int bootstrap = 10;
};

void cmd_evaluate(const EvaluateOpts& opt) {
  std::vector<swerve::PredictionRun> runs;
  runs.reserve(opt.pred_files.size());
  for (const std::string& path : opt.pred_files) {
    swerve::PredictionRun run = swerve::io::read_prediction_csv(path);
    run.bootstrap_frames = opt.bootstrap;
    runs.push_back(std::move(run));
  }
  const std::vector<swerve::PredictorMetrics> metrics = swerve::compare_predictors(runs);
  prepare_out_dir(opt.out);
  swerve::io::write_text_file(fs::path(opt.out) / "metrics.json",
                              swerve::io::metrics_json(metrics));
  swerve::io::write_text_file(
      fs::path(opt.out) / "manifest.json",
      swerve::io::manifest_json(
          make_manifest("evaluate", opt.pred_files, "", opt.out, 0)));
}

}  // namespace

int main(int argc, char** argv) {
  g_argv.assign(argv, argv + argc);

  CLI::App app{"Pedestrian swerving model toolkit: preprocessing, quadratic "
               "deviation fitting, assimilation, symbolic regression, and "
               "synthetic encounter generation"};
  app.require_subcommand(1);

  PreprocessOpts pre;
  CLI::App* sub_pre = app.add_subcommand(
      "preprocess", "Scale, smooth, rotate and cut approach regions from raw tracks");
  sub_pre->add_option("--trajectories", pre.trajectories, "trajectory CSV (ped_id,frame,x,y)")
      ->required();
  sub_pre->add_option("--pairs", pre.pairs, "encounter pairing CSV (swerver_id,other_id)")
      ->required();
  sub_pre->add_option("--config", pre.config, "dataset config JSON (cm_per_pixel, fps)")
      ->required();
  sub_pre->add_option("--out", pre.out, "output directory")->required();
  sub_pre->add_option("--smooth-window", pre.smooth_window, "moving-average width in frames");
  sub_pre->add_option("--half-window", pre.half_window, "approach half-window in frames");
  sub_pre->add_option("--jobs", pre.jobs, "parallel encounter workers");
  sub_pre->add_flag("--perpendicular-only", pre.perpendicular_only,
                    "skip pairs whose paths are not roughly perpendicular");
  sub_pre->add_flag("--trust-pairing", pre.trust_pairing,
                    "take the swerver from the pairing file instead of auto-detecting");
  sub_pre->callback([&]() { cmd_preprocess(pre); });

  FitOpts fit;
  CLI::App* sub_fit =
      app.add_subcommand("fit", "Fit the quadratic deviation model y(x, D)");
  sub_fit->add_option("--region", fit.region, "approach-region CSV");
  sub_fit->add_option("--samples", fit.samples, "raw sample CSV (x_cm,d_cm,y_cm)");
  sub_fit->add_option("--out", fit.out, "output directory")->required();
  sub_fit->callback([&]() { cmd_fit(fit); });

  PredictOpts pred;
  CLI::App* sub_pred = app.add_subcommand(
      "predict", "Roll a fitted model forward along an approach region");
  sub_pred->add_option("--region", pred.region, "approach-region CSV")->required();
  sub_pred->add_option("--other", pred.other, "other pedestrian path CSV")->required();
  sub_pred->add_option("--params", pred.params, "model params JSON")->required();
  sub_pred->add_option("--initial-distance", pred.initial_distance,
                       "distance seed for the first frame (default: region's first)");
  sub_pred->add_option("--out", pred.out, "output directory")->required();
  sub_pred->callback([&]() { cmd_predict(pred); });

  AssimilateOpts asm_opt;
  CLI::App* sub_asm = app.add_subcommand(
      "assimilate", "Replay a region through an observation-corrected predictor");
  sub_asm->add_option("--region", asm_opt.region, "approach-region CSV")->required();
  sub_asm->add_option("--other", asm_opt.other, "other pedestrian path CSV")->required();
  sub_asm->add_option("--params", asm_opt.params, "model params JSON (dynamic method)");
  sub_asm->add_option("--method", asm_opt.method, "predictor: dynamic | ukf");
  sub_asm->add_option("--interval", asm_opt.interval, "frames between corrections");
  sub_asm->add_option("--bootstrap", asm_opt.bootstrap, "frames before the first correction");
  sub_asm->add_option("--fps", asm_opt.fps, "frame rate for the filter time step");
  sub_asm->add_option("--ukf-alpha", asm_opt.ukf_alpha, "sigma-point spread");
  sub_asm->add_option("--ukf-beta", asm_opt.ukf_beta, "prior-distribution weight");
  sub_asm->add_option("--ukf-kappa", asm_opt.ukf_kappa, "secondary scaling");
  sub_asm->add_option("--process-noise", asm_opt.process_noise,
                      "white-acceleration spectral density (cm^2/s^3)");
  sub_asm->add_option("--measurement-noise", asm_opt.measurement_noise,
                      "measurement variance (cm^2)");
  sub_asm->add_option("--initial-distance", asm_opt.initial_distance,
                      "distance seed for the first frame (default: region's first)");
  sub_asm->add_option("--out", asm_opt.out, "output directory")->required();
  sub_asm->callback([&]() { cmd_assimilate(asm_opt); });

  SymregOpts sym;
  CLI::App* sub_sym = app.add_subcommand(
      "symreg", "Search symbolic expressions y(x) over an approach region");
  sub_sym->add_option("--region", sym.region, "approach-region CSV (uses x_cm, y_cm)");
  sub_sym->add_option("--data", sym.data, "plain CSV with header x,y");
  sub_sym->add_option("--out", sym.out, "output directory")->required();
  sub_sym->add_option("--population", sym.cfg.population_size, "total population size");
  sub_sym->add_option("--islands", sym.cfg.n_islands, "number of islands");
  sub_sym->add_option("--generations", sym.cfg.generations, "generations to run");
  sub_sym->add_option("--max-complexity", sym.cfg.max_complexity, "node-count cap");
  sub_sym->add_option("--parsimony", sym.cfg.parsimony_init,
                      "initial complexity penalty (relative to data variance)");
  sub_sym->add_option("--crossover-rate", sym.cfg.crossover_rate, "crossover probability");
  sub_sym->add_option("--mutation-rate", sym.cfg.mutation_rate, "mutation probability");
  sub_sym->add_option("--const-opt-iters", sym.cfg.constant_opt_iters,
                      "constant-refinement iterations per generation");
  sub_sym->add_option("--opt-fraction", sym.cfg.opt_fraction,
                      "population share refined per generation");
  sub_sym->add_option("--simplify-every", sym.cfg.simplify_every, "simplify cadence");
  sub_sym->add_option("--migrate-every", sym.cfg.migrate_every, "migration cadence");
  sub_sym->add_option("--tournament", sym.cfg.tournament_size, "tournament size");
  sub_sym->add_option("--seed", sym.cfg.seed, "random seed");
  sub_sym->add_option("--prune-tol", sym.prune_tol,
                      "also prune the best expression with this MSE tolerance");
  sub_sym->add_flag("--sinusoid", sym.fit_sinusoid_too,
                    "also fit a single sinusoid k*sin(a*x+b)+c");
  sub_sym->callback([&]() { cmd_symreg(sym); });

  SynthOpts syn;
  CLI::App* sub_syn = app.add_subcommand(
      "synth", "Generate a synthetic crossing encounter with a planted model");
  sub_syn->add_option("--swerver-speed", syn.spec.swerver_speed_cm_s, "cm/s");
  sub_syn->add_option("--other-speed", syn.spec.other_speed_cm_s, "cm/s");
  sub_syn->add_option("--offset", syn.spec.crossing_offset_cm,
                      "closest unperturbed approach distance (cm)");
  sub_syn->add_option("--model", syn.model, "planted model: none | quadratic | sinusoid");
  sub_syn->add_option("--drive", syn.drive,
                      "quadratic distance drive: implicit | lagged | nominal");
  sub_syn->add_option("--coeffs", syn.coeffs, "quadratic coefficients a0..a5")
      ->expected(6);
  sub_syn->add_option("--sinusoid", syn.sinusoid, "sinusoid parameters k a b c")
      ->expected(4);
  sub_syn->add_option("--noise", syn.spec.noise_sigma_cm, "coordinate noise sigma (cm)");
  sub_syn->add_option("--fps", syn.spec.fps, "frames per second");
  sub_syn->add_option("--duration", syn.spec.duration_s, "encounter length (s)");
  sub_syn->add_option("--approach-time", syn.spec.approach_time_s,
                      "time of closest unperturbed approach (s)");
  sub_syn->add_option("--seed", syn.spec.seed, "random seed");
  sub_syn->add_option("--out", syn.out, "output directory")->required();
  sub_syn->callback([&]() { cmd_synth(syn); });

  EvaluateOpts eval;
  CLI::App* sub_eval =
      app.add_subcommand("evaluate", "Score one or more prediction CSVs");
  sub_eval->add_option("--pred", eval.pred_files, "prediction CSV files")
      ->required()
      ->expected(-1);
  sub_eval->add_option("--bootstrap", eval.bootstrap,
                       "bootstrap split for the phase metrics");
  sub_eval->add_option("--out", eval.out, "output directory")->required();
  sub_eval->callback([&]() { cmd_evaluate(eval); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 64;
  } catch (const swerve::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const swerve::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
