#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "swerve/assimilation.hpp"
#include "swerve/core.hpp"
#include "swerve/errors.hpp"
#include "swerve/numfmt.hpp"
#include "swerve/quadratic.hpp"
#include "swerve/symreg/search.hpp"
#include "swerve/symreg/sinusoid.hpp"

namespace swerve::io {

namespace fs = std::filesystem;
using detail::format_g9;

inline std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_text_file(const fs::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open '" + path.string() + "' for writing");
  out << content;
  if (!out) throw InputError("failed writing '" + path.string() + "'");
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return out;
}

/// Splits file content into non-empty lines, checks the header, and hands
/// each data row (with its 1-based line number) to the callback.
template <typename RowFn>
void for_each_csv_row(const std::string& content, const fs::path& path,
                      std::string_view expected_header, int expected_fields,
                      RowFn&& row_fn) {
  std::size_t pos = 0;
  int line_no = 0;
  bool header_seen = false;
  while (pos <= content.size()) {
    const std::size_t eol = content.find('\n', pos);
    std::string_view line(content.data() + pos,
                          (eol == std::string::npos ? content.size() : eol) - pos);
    pos = eol == std::string::npos ? content.size() + 1 : eol + 1;
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != expected_header)
        throw InputError("'" + path.string() + "' line 1: expected header '" +
                         std::string(expected_header) + "', got '" +
                         std::string(line) + "'");
      header_seen = true;
      continue;
    }
    const std::vector<std::string_view> fields = split_fields(line);
    if (static_cast<int>(fields.size()) != expected_fields)
      throw InputError("'" + path.string() + "' line " + std::to_string(line_no) +
                       ": expected " + std::to_string(expected_fields) +
                       " fields, got " + std::to_string(fields.size()));
    row_fn(fields, line_no);
  }
  if (!header_seen)
    throw InputError("empty input file '" + path.string() + "'");
}

inline std::string row_context(const fs::path& path, int line_no) {
  return "'" + path.string() + "' line " + std::to_string(line_no);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Trajectory CSV: ped_id,frame,x,y (units set by the sidecar config)

inline std::vector<Trajectory> read_trajectory_csv(const fs::path& path, double fps) {
  std::map<std::string, std::size_t> index;
  std::vector<Trajectory> out;
  detail::for_each_csv_row(
      read_text_file(path), path, "ped_id,frame,x,y", 4,
      [&](const std::vector<std::string_view>& f, int line_no) {
        const std::string context = detail::row_context(path, line_no);
        const std::string id(f[0]);
        if (id.empty()) throw InputError(context + ": empty ped_id");
        const long frame = swerve::detail::parse_long(f[1], context);
        const double x = swerve::detail::parse_double(f[2], context);
        const double y = swerve::detail::parse_double(f[3], context);
        auto [it, inserted] = index.try_emplace(id, out.size());
        if (inserted) {
          out.emplace_back();
          out.back().ped_id = id;
          out.back().fps = fps;
        }
        Trajectory& traj = out[it->second];
        if (!traj.points.empty() && traj.points.back().frame >= frame)
          throw InputError(context + ": frames for pedestrian '" + id +
                           "' not strictly increasing");
        traj.points.push_back({static_cast<int>(frame), Vec2(x, y)});
      });
  return out;
}

inline std::string trajectory_csv(const std::vector<const Trajectory*>& trajs) {
  std::string out = "ped_id,frame,x,y\n";
  for (const Trajectory* t : trajs)
    for (const TrackPoint& p : t->points)
      out += t->ped_id + "," + std::to_string(p.frame) + "," + format_g9(p.pos.x()) +
             "," + format_g9(p.pos.y()) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Encounter pairing CSV: swerver_id,other_id

struct EncounterPair {
  std::string swerver_id;
  std::string other_id;
};

inline std::vector<EncounterPair> read_pairs_csv(const fs::path& path) {
  std::vector<EncounterPair> out;
  detail::for_each_csv_row(
      read_text_file(path), path, "swerver_id,other_id", 2,
      [&](const std::vector<std::string_view>& f, int line_no) {
        if (f[0].empty() || f[1].empty())
          throw InputError(detail::row_context(path, line_no) + ": empty pedestrian id");
        out.push_back({std::string(f[0]), std::string(f[1])});
      });
  return out;
}

inline std::string pairs_csv(const std::vector<EncounterPair>& pairs) {
  std::string out = "swerver_id,other_id\n";
  for (const EncounterPair& p : pairs) out += p.swerver_id + "," + p.other_id + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Approach region CSV: frame,x_cm,y_cm,d_cm

inline std::string region_csv(const ApproachRegion& region) {
  std::string out = "frame,x_cm,y_cm,d_cm\n";
  for (std::size_t i = 0; i < region.size(); ++i)
    out += std::to_string(region.frames[i]) + "," + format_g9(region.x_cm[i]) + "," +
           format_g9(region.y_cm[i]) + "," + format_g9(region.d_cm[i]) + "\n";
  return out;
}

inline ApproachRegion read_region_csv(const fs::path& path) {
  ApproachRegion region;
  detail::for_each_csv_row(
      read_text_file(path), path, "frame,x_cm,y_cm,d_cm", 4,
      [&](const std::vector<std::string_view>& f, int line_no) {
        const std::string context = detail::row_context(path, line_no);
        region.frames.push_back(static_cast<int>(swerve::detail::parse_long(f[0], context)));
        region.x_cm.push_back(swerve::detail::parse_double(f[1], context));
        region.y_cm.push_back(swerve::detail::parse_double(f[2], context));
        region.d_cm.push_back(swerve::detail::parse_double(f[3], context));
      });
  if (region.frames.empty())
    throw InputError("region file '" + path.string() + "' has no data rows");
  std::size_t min_idx = 0;
  for (std::size_t i = 1; i < region.size(); ++i)
    if (region.d_cm[i] < region.d_cm[min_idx]) min_idx = i;
  region.min_frame = region.frames[min_idx];
  return region;
}

// ---------------------------------------------------------------------------
// Other-pedestrian path CSV (region coordinate frame): frame,x_cm,y_cm

inline std::string other_path_csv(const std::vector<int>& frames,
                                  const std::vector<Vec2>& positions) {
  std::string out = "frame,x_cm,y_cm\n";
  for (std::size_t i = 0; i < frames.size(); ++i)
    out += std::to_string(frames[i]) + "," + format_g9(positions[i].x()) + "," +
           format_g9(positions[i].y()) + "\n";
  return out;
}

inline std::vector<Vec2> read_other_path_csv(const fs::path& path) {
  std::vector<Vec2> out;
  detail::for_each_csv_row(
      read_text_file(path), path, "frame,x_cm,y_cm", 3,
      [&](const std::vector<std::string_view>& f, int line_no) {
        const std::string context = detail::row_context(path, line_no);
        swerve::detail::parse_long(f[0], context);
        out.emplace_back(swerve::detail::parse_double(f[1], context),
                         swerve::detail::parse_double(f[2], context));
      });
  return out;
}

// ---------------------------------------------------------------------------
// Ground-truth CSV: frame,y_true

inline std::string truth_csv(const std::vector<int>& frames,
                             const std::vector<double>& y_true) {
  std::string out = "frame,y_true\n";
  for (std::size_t i = 0; i < frames.size(); ++i)
    out += std::to_string(frames[i]) + "," + format_g9(y_true[i]) + "\n";
  return out;
}

inline std::vector<double> read_truth_csv(const fs::path& path) {
  std::vector<double> out;
  detail::for_each_csv_row(
      read_text_file(path), path, "frame,y_true", 2,
      [&](const std::vector<std::string_view>& f, int line_no) {
        const std::string context = detail::row_context(path, line_no);
        swerve::detail::parse_long(f[0], context);
        out.push_back(swerve::detail::parse_double(f[1], context));
      });
  return out;
}

// ---------------------------------------------------------------------------
// Model-sample CSV: x_cm,d_cm,y_cm

inline std::string samples_csv(const std::vector<FitSample>& samples) {
  std::string out = "x_cm,d_cm,y_cm\n";
  for (const FitSample& s : samples)
    out += format_g9(s.x) + "," + format_g9(s.d) + "," + format_g9(s.y) + "\n";
  return out;
}

inline std::vector<FitSample> read_samples_csv(const fs::path& path) {
  std::vector<FitSample> out;
  detail::for_each_csv_row(
      read_text_file(path), path, "x_cm,d_cm,y_cm", 3,
      [&](const std::vector<std::string_view>& f, int line_no) {
        const std::string context = detail::row_context(path, line_no);
        out.push_back({swerve::detail::parse_double(f[0], context),
                       swerve::detail::parse_double(f[1], context),
                       swerve::detail::parse_double(f[2], context)});
      });
  return out;
}

// ---------------------------------------------------------------------------
// Prediction CSV: frame,y_obs,y_pred,abs_err

inline std::string prediction_csv(const PredictionRun& run) {
  std::string out = "frame,y_obs,y_pred,abs_err\n";
  for (std::size_t i = 0; i < run.frames.size(); ++i)
    out += std::to_string(run.frames[i]) + "," + format_g9(run.y_obs[i]) + "," +
           format_g9(run.y_pred[i]) + "," + format_g9(run.abs_err[i]) + "\n";
  return out;
}

inline PredictionRun read_prediction_csv(const fs::path& path) {
  PredictionRun run;
  detail::for_each_csv_row(
      read_text_file(path), path, "frame,y_obs,y_pred,abs_err", 4,
      [&](const std::vector<std::string_view>& f, int line_no) {
        const std::string context = detail::row_context(path, line_no);
        run.frames.push_back(
            static_cast<int>(swerve::detail::parse_long(f[0], context)));
        run.y_obs.push_back(swerve::detail::parse_double(f[1], context));
        run.y_pred.push_back(swerve::detail::parse_double(f[2], context));
        run.abs_err.push_back(swerve::detail::parse_double(f[3], context));
      });
  run.method = path.stem().string();
  return run;
}

// ---------------------------------------------------------------------------
// JSON output (hand-built so every float honors the 9-significant-digit
// serialization contract and reruns are byte-identical)

namespace detail {

inline std::string json_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

inline std::string json_str(std::string_view s) {
  return "\"" + json_escape(s) + "\"";
}

inline std::string json_array(const std::vector<std::string>& items) {
  std::string out = "[";
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += items[i];
  }
  return out + "]";
}

}  // namespace detail

inline std::string params_json(const QuadraticSwerveParams& p, const FitDiagnostics& d) {
  std::vector<std::string> coeffs;
  for (double a : p.a) coeffs.push_back(format_g9(a));
  std::string out = "{\n";
  out += "  \"a\": " + detail::json_array(coeffs) + ",\n";
  out += "  \"rmse_cm\": " + format_g9(d.rmse) + ",\n";
  out += "  \"r2\": " + format_g9(d.r_squared) + ",\n";
  out += "  \"n\": " + std::to_string(d.n_points) + "\n";
  return out + "}\n";
}

inline QuadraticSwerveParams read_params_json(const fs::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw InputError("cannot parse '" + path.string() + "': " + e.what());
  }
  if (!j.contains("a") || !j["a"].is_array() || j["a"].size() != 6)
    throw InputError("'" + path.string() + "' is missing the 6-entry field 'a'");
  QuadraticSwerveParams p;
  for (int i = 0; i < 6; ++i) {
    if (!j["a"][i].is_number())
      throw InputError("'" + path.string() + "': field 'a' must hold numbers");
    p.a[i] = j["a"][i].get<double>();
  }
  p.validate();
  return p;
}

inline std::string distribution_json(const ParamDistribution& dist) {
  std::vector<std::string> mean, cov;
  for (int i = 0; i < 6; ++i) mean.push_back(format_g9(dist.mean(i)));
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) cov.push_back(format_g9(dist.covariance(i, j)));
  std::string out = "{\n";
  out += "  \"mean\": " + detail::json_array(mean) + ",\n";
  out += "  \"covariance\": " + detail::json_array(cov) + ",\n";
  out += "  \"n_encounters\": " + std::to_string(dist.n_encounters) + "\n";
  return out + "}\n";
}

inline std::string metrics_json(const std::vector<PredictorMetrics>& metrics) {
  std::string out = "[\n";
  for (std::size_t i = 0; i < metrics.size(); ++i) {
    const PredictorMetrics& m = metrics[i];
    out += "  {\"method\": " + detail::json_str(m.method) +
           ", \"rmse_cm\": " + format_g9(m.rmse_cm) +
           ", \"max_err_cm\": " + format_g9(m.max_err_cm) +
           ", \"bootstrap_rmse_cm\": " + format_g9(m.bootstrap_rmse_cm) +
           ", \"post_rmse_cm\": " + format_g9(m.post_rmse_cm) + "}";
    out += i + 1 < metrics.size() ? ",\n" : "\n";
  }
  return out + "]\n";
}

inline std::string front_json(const std::vector<symreg::Individual>& front) {
  std::string out = "[\n";
  for (std::size_t i = 0; i < front.size(); ++i) {
    out += "  {\"expr\": " + detail::json_str(symreg::to_string(front[i].expr)) +
           ", \"mse\": " + format_g9(front[i].mse) +
           ", \"complexity\": " + std::to_string(front[i].complexity) + "}";
    out += i + 1 < front.size() ? ",\n" : "\n";
  }
  return out + "]\n";
}

inline std::string sinusoid_json(const symreg::SinusoidParams& p, double rmse) {
  return "{\"k\": " + format_g9(p.k) + ", \"a\": " + format_g9(p.a) +
         ", \"b\": " + format_g9(p.b) + ", \"c\": " + format_g9(p.c) +
         ", \"rmse\": " + format_g9(rmse) + "}\n";
}

// ---------------------------------------------------------------------------
// Sidecar dataset config: {"cm_per_pixel": <float>, "fps": <float>}

struct DatasetConfig {
  double cm_per_pixel = 1.0;
  double fps = 30.0;
};

inline DatasetConfig read_dataset_config(const fs::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw InputError("cannot parse '" + path.string() + "': " + e.what());
  }
  DatasetConfig cfg;
  for (const char* field : {"cm_per_pixel", "fps"}) {
    if (!j.contains(field) || !j[field].is_number())
      throw InputError("'" + path.string() + "' is missing numeric field '" +
                       std::string(field) + "'");
  }
  cfg.cm_per_pixel = j["cm_per_pixel"].get<double>();
  cfg.fps = j["fps"].get<double>();
  if (!(cfg.cm_per_pixel > 0.0))
    throw InputError("'" + path.string() + "': cm_per_pixel must be positive");
  if (!(cfg.fps > 0.0)) throw InputError("'" + path.string() + "': fps must be positive");
  return cfg;
}

inline std::string dataset_config_json(const DatasetConfig& cfg) {
  return "{\"cm_per_pixel\": " + format_g9(cfg.cm_per_pixel) +
         ", \"fps\": " + format_g9(cfg.fps) + "}\n";
}

// ---------------------------------------------------------------------------
// Run manifest, recorded verbatim into every output directory

struct RunManifest {
  std::string subcommand;
  std::vector<std::string> argv;
  std::vector<std::string> inputs;
  std::string config_path;
  std::string output_dir;
  std::uint64_t seed = 0;
  std::string tool_version;
};

inline std::string manifest_json(const RunManifest& m) {
  std::vector<std::string> argv_items, input_items;
  for (const std::string& a : m.argv) argv_items.push_back(detail::json_str(a));
  for (const std::string& p : m.inputs) input_items.push_back(detail::json_str(p));
  std::string out = "{\n";
  out += "  \"subcommand\": " + detail::json_str(m.subcommand) + ",\n";
  out += "  \"argv\": " + detail::json_array(argv_items) + ",\n";
  out += "  \"inputs\": " + detail::json_array(input_items) + ",\n";
  out += "  \"config_path\": " + detail::json_str(m.config_path) + ",\n";
  out += "  \"output_dir\": " + detail::json_str(m.output_dir) + ",\n";
  out += "  \"seed\": " + std::to_string(m.seed) + ",\n";
  out += "  \"tool_version\": " + detail::json_str(m.tool_version) + "\n";
  return out + "}\n";
}

}  // namespace swerve::io
