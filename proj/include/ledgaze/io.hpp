#pragma once

// File formats: JSON config and calibration files, line-delimited JSON
// session logs, CSV tables and JSON report summaries.
//
// Session log, one JSON object per line:
//   {"type":"header","format":"ledgaze-session","version":1,"channel_count":M,"frame_period_us":T}
//   {"type":"frame","t":us,"raw":[M counts],"values":[M reals],"gaze":[x,y],"target":[x,y]}
//   {"type":"event","kind":"blink"|"target_move","start":us,"end":us,"target":[x,y]}
// Readers ignore unknown keys so fields can be added without a version bump.

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ledgaze/calib.hpp"
#include "ledgaze/core.hpp"
#include "ledgaze/evaluate.hpp"
#include "ledgaze/eyesim.hpp"
#include "ledgaze/kernels.hpp"
#include "ledgaze/session.hpp"
#include "ledgaze/sigproc.hpp"

namespace ledgaze::io {

using Json = nlohmann::ordered_json;

struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

template <class T>
void read(const Json& j, const char* key, T& field) {
  if (auto it = j.find(key); it != j.end() && !it->is_null()) it->get_to(field);
}

inline void check_keys(const Json& j, std::initializer_list<const char*> known, const char* where) {
  if (!j.is_object()) throw FormatError(std::string(where) + ": expected an object");
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* n : known) ok = ok || k == n;
    if (!ok) throw FormatError(std::string(where) + ": unknown key '" + k + "'");
  }
}

inline Json point(ScreenPoint p) { return Json::array({p.x, p.y}); }
inline ScreenPoint point(const Json& j) {
  if (!j.is_array() || j.size() != 2) throw FormatError("point must be [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

inline Json to_json(const SubjectProfile& s) {
  return {{"eye_offset_x_mm", s.eye_offset_x_mm}, {"eye_offset_y_mm", s.eye_offset_y_mm},
          {"eye_radius_mm", s.eye_radius_mm},     {"corneal_gain", s.corneal_gain},
          {"noise_std", s.noise_std},             {"srt_mean_ms", s.srt_mean_ms},
          {"srt_std_ms", s.srt_std_ms},           {"blink_rate_per_min", s.blink_rate_per_min},
          {"blink_duration_ms", s.blink_duration_ms}, {"seed", s.seed}};
}

inline SubjectProfile subject_from_json(const Json& j) {
  using detail::read;
  detail::check_keys(j, {"eye_offset_x_mm", "eye_offset_y_mm", "eye_radius_mm", "corneal_gain", "noise_std",
                         "srt_mean_ms", "srt_std_ms", "blink_rate_per_min", "blink_duration_ms", "seed"},
                     "subject");
  SubjectProfile s;
  read(j, "eye_offset_x_mm", s.eye_offset_x_mm);
  read(j, "eye_offset_y_mm", s.eye_offset_y_mm);
  read(j, "eye_radius_mm", s.eye_radius_mm);
  read(j, "corneal_gain", s.corneal_gain);
  read(j, "noise_std", s.noise_std);
  read(j, "srt_mean_ms", s.srt_mean_ms);
  read(j, "srt_std_ms", s.srt_std_ms);
  read(j, "blink_rate_per_min", s.blink_rate_per_min);
  read(j, "blink_duration_ms", s.blink_duration_ms);
  read(j, "seed", s.seed);
  return s;
}

inline Json to_json(const MeasureSpec& m) {
  Json j{{"kind", to_string(m.kind)}, {"m", m.m}, {"sigma", m.sigma}, {"rbf_squared", m.rbf_squared}};
  j["weights"] = m.weights ? Json(*m.weights) : Json(nullptr);
  return j;
}

inline MeasureSpec measure_from_json(const Json& j) {
  detail::check_keys(j, {"kind", "m", "sigma", "rbf_squared", "weights"}, "measure");
  MeasureSpec m;
  if (j.contains("kind")) m.kind = measure_kind_from_string(j["kind"].get<std::string>());
  detail::read(j, "m", m.m);
  detail::read(j, "sigma", m.sigma);
  detail::read(j, "rbf_squared", m.rbf_squared);
  if (j.contains("weights") && !j["weights"].is_null()) m.weights = j["weights"].get<std::vector<double>>();
  return m;
}

/// [{"fixate":[x,y],"ms":d} | {"saccade":[x,y]} | {"blink_ms":d}, ...]
inline Json to_json(const GazeScript& script) {
  Json out = Json::array();
  for (const auto& e : script.events) {
    const double ms = static_cast<double>(e.duration) / 1000.0;
    switch (e.kind) {
      case ScriptEvent::Kind::fixation: out.push_back({{"fixate", detail::point(e.target)}, {"ms", ms}}); break;
      case ScriptEvent::Kind::saccade: out.push_back({{"saccade", detail::point(e.target)}}); break;
      case ScriptEvent::Kind::blink: out.push_back({{"blink_ms", ms}}); break;
    }
  }
  return out;
}

inline GazeScript script_from_json(const Json& j) {
  if (!j.is_array()) throw FormatError("script must be an array");
  auto us = [](double ms) { return static_cast<Micros>(std::llround(ms * 1000.0)); };
  GazeScript script;
  for (const auto& e : j) {
    if (e.contains("fixate")) {
      detail::check_keys(e, {"fixate", "ms"}, "script fixation");
      script.fixate(detail::point(e["fixate"]), us(e.at("ms").get<double>()));
    } else if (e.contains("saccade")) {
      detail::check_keys(e, {"saccade"}, "script saccade");
      script.saccade(detail::point(e["saccade"]));
    } else if (e.contains("blink_ms")) {
      detail::check_keys(e, {"blink_ms"}, "script blink");
      script.blink(us(e["blink_ms"].get<double>()));
    } else {
      throw FormatError("script entries need one of fixate, saccade, blink_ms");
    }
  }
  return script;
}

inline Json to_json(const SessionConfig& c) {
  Json j;
  j["version"] = c.version;
  j["seed"] = c.seed;
  j["display"] = {{"width", c.display.width}, {"height", c.display.height},
                  {"degrees_per_pixel", c.display.degrees_per_pixel}};
  j["layout"] = {{"mode", to_string(c.mode)}, {"ring_radius_mm", c.ring_radius_mm},
                 {"eye_relief_mm", c.eye_relief_mm}};
  j["optics"] = {{"brightness", c.optics.brightness},
                 {"ambient", c.optics.ambient},
                 {"lobe_exponent", c.optics.lobe_exponent},
                 {"cornea_offset_ratio", c.optics.cornea_offset_ratio},
                 {"eyelid_level", c.optics.eyelid_level},
                 {"reference_exposure_us", c.optics.reference_exposure_us}};
  j["signal"] = {{"step_duration_us", c.signal.step_duration_us},
                 {"min_exposure_us", c.signal.exposure_min_us},
                 {"max_exposure_us", c.signal.exposure_max_us},
                 {"iir_alpha", c.signal.iir_alpha},
                 {"adc_max", c.signal.adc_max}};
  j["blink_ramp_ms"] = c.blink_ramp_ms;
  j["subject"] = c.subject ? to_json(*c.subject) : Json(nullptr);
  j["noise_std"] = c.noise_std;
  j["blink_rate_per_min"] = c.blink_rate_per_min;
  j["headset_jitter_mm"] = c.headset_jitter_mm;
  j["grid"] = {{"rows", c.grid.rows}, {"cols", c.grid.cols}, {"margin_px", c.grid.margin}};
  j["dwell"] = {{"fix_duration_ms", c.dwell.fix_duration_ms},
                {"sample_interval_ms", c.dwell.sample_interval_ms},
                {"variance_threshold", c.dwell.variance_threshold},
                {"settle_ms", c.dwell.settle_ms}};
  j["measure"] = to_json(c.measure);
  j["estimator"] = {{"kind", to_string(c.estimator)},
                    {"jitter", c.jitter},
                    {"svr_normalize", c.svr_normalize},
                    {"svr_sigma", c.svr_sigma},
                    {"sigma_grid", {{"lo", c.sigma_grid.lo}, {"hi", c.sigma_grid.hi}, {"count", c.sigma_grid.count}}}};
  j["benchmark"] = {{"augmentations", c.benchmark.augmentations},
                    {"gameplay_fix_ms", c.benchmark.gameplay_fix_ms},
                    {"test_fixations", c.benchmark.test_fixations},
                    {"fixation_min_ms", c.benchmark.fixation_min_ms},
                    {"fixation_max_ms", c.benchmark.fixation_max_ms}};
  j["task"] = {{"candidate_min", c.task.candidate_min},
               {"candidate_max", c.task.candidate_max},
               {"dwell_to_select_ms", c.task.dwell_to_select_ms},
               {"tasks_per_session", c.task.tasks_per_session},
               {"object_radius_deg", c.task.object_radius_deg},
               {"window_fraction", c.task.window_fraction},
               {"timeout_ms", c.task.timeout_ms},
               {"feedback_ms", c.task.feedback_ms},
               {"min_separation_deg", c.task.min_separation_deg}};
  j["script"] = c.script ? to_json(*c.script) : Json(nullptr);
  return j;
}

/// Missing keys keep their defaults; unknown keys are an error.
inline SessionConfig config_from_json(const Json& j) {
  using detail::check_keys;
  using detail::read;
  check_keys(j, {"version", "seed", "display", "layout", "optics", "signal", "blink_ramp_ms", "subject", "noise_std",
                 "blink_rate_per_min", "headset_jitter_mm", "grid", "dwell", "measure", "estimator", "benchmark",
                 "task", "script"},
             "config");
  SessionConfig c;
  if (!j.contains("version")) throw FormatError("config: missing 'version'");
  read(j, "version", c.version);
  if (c.version != 1) throw FormatError("config: unsupported version " + std::to_string(c.version));
  read(j, "seed", c.seed);
  if (auto it = j.find("display"); it != j.end()) {
    check_keys(*it, {"width", "height", "degrees_per_pixel"}, "display");
    read(*it, "width", c.display.width);
    read(*it, "height", c.display.height);
    read(*it, "degrees_per_pixel", c.display.degrees_per_pixel);
  }
  if (auto it = j.find("layout"); it != j.end()) {
    check_keys(*it, {"mode", "ring_radius_mm", "eye_relief_mm"}, "layout");
    if (it->contains("mode")) c.mode = prototype_mode_from_string((*it)["mode"].get<std::string>());
    read(*it, "ring_radius_mm", c.ring_radius_mm);
    read(*it, "eye_relief_mm", c.eye_relief_mm);
  }
  if (auto it = j.find("optics"); it != j.end()) {
    check_keys(*it, {"brightness", "ambient", "lobe_exponent", "cornea_offset_ratio", "eyelid_level",
                     "reference_exposure_us"},
               "optics");
    read(*it, "brightness", c.optics.brightness);
    read(*it, "ambient", c.optics.ambient);
    read(*it, "lobe_exponent", c.optics.lobe_exponent);
    read(*it, "cornea_offset_ratio", c.optics.cornea_offset_ratio);
    read(*it, "eyelid_level", c.optics.eyelid_level);
    read(*it, "reference_exposure_us", c.optics.reference_exposure_us);
  }
  if (auto it = j.find("signal"); it != j.end()) {
    check_keys(*it, {"step_duration_us", "min_exposure_us", "max_exposure_us", "iir_alpha", "adc_max"}, "signal");
    read(*it, "step_duration_us", c.signal.step_duration_us);
    read(*it, "min_exposure_us", c.signal.exposure_min_us);
    read(*it, "max_exposure_us", c.signal.exposure_max_us);
    read(*it, "iir_alpha", c.signal.iir_alpha);
    read(*it, "adc_max", c.signal.adc_max);
  }
  read(j, "blink_ramp_ms", c.blink_ramp_ms);
  if (auto it = j.find("subject"); it != j.end() && !it->is_null()) c.subject = subject_from_json(*it);
  read(j, "noise_std", c.noise_std);
  read(j, "blink_rate_per_min", c.blink_rate_per_min);
  read(j, "headset_jitter_mm", c.headset_jitter_mm);
  if (auto it = j.find("grid"); it != j.end()) {
    check_keys(*it, {"rows", "cols", "margin_px"}, "grid");
    read(*it, "rows", c.grid.rows);
    read(*it, "cols", c.grid.cols);
    read(*it, "margin_px", c.grid.margin);
  }
  if (auto it = j.find("dwell"); it != j.end()) {
    check_keys(*it, {"fix_duration_ms", "sample_interval_ms", "variance_threshold", "settle_ms"}, "dwell");
    read(*it, "fix_duration_ms", c.dwell.fix_duration_ms);
    read(*it, "sample_interval_ms", c.dwell.sample_interval_ms);
    read(*it, "variance_threshold", c.dwell.variance_threshold);
    read(*it, "settle_ms", c.dwell.settle_ms);
  }
  if (auto it = j.find("measure"); it != j.end()) c.measure = measure_from_json(*it);
  if (auto it = j.find("estimator"); it != j.end()) {
    check_keys(*it, {"kind", "jitter", "svr_normalize", "svr_sigma", "sigma_grid"}, "estimator");
    if (it->contains("kind")) c.estimator = estimator_kind_from_string((*it)["kind"].get<std::string>());
    read(*it, "jitter", c.jitter);
    read(*it, "svr_normalize", c.svr_normalize);
    read(*it, "svr_sigma", c.svr_sigma);
    if (auto g = it->find("sigma_grid"); g != it->end()) {
      check_keys(*g, {"lo", "hi", "count"}, "sigma_grid");
      read(*g, "lo", c.sigma_grid.lo);
      read(*g, "hi", c.sigma_grid.hi);
      read(*g, "count", c.sigma_grid.count);
    }
  }
  if (auto it = j.find("benchmark"); it != j.end()) {
    check_keys(*it, {"augmentations", "gameplay_fix_ms", "test_fixations", "fixation_min_ms", "fixation_max_ms"},
               "benchmark");
    read(*it, "augmentations", c.benchmark.augmentations);
    read(*it, "gameplay_fix_ms", c.benchmark.gameplay_fix_ms);
    read(*it, "test_fixations", c.benchmark.test_fixations);
    read(*it, "fixation_min_ms", c.benchmark.fixation_min_ms);
    read(*it, "fixation_max_ms", c.benchmark.fixation_max_ms);
  }
  if (auto it = j.find("task"); it != j.end()) {
    check_keys(*it, {"candidate_min", "candidate_max", "dwell_to_select_ms", "tasks_per_session",
                     "object_radius_deg", "window_fraction", "timeout_ms", "feedback_ms", "min_separation_deg"},
               "task");
    read(*it, "candidate_min", c.task.candidate_min);
    read(*it, "candidate_max", c.task.candidate_max);
    read(*it, "dwell_to_select_ms", c.task.dwell_to_select_ms);
    read(*it, "tasks_per_session", c.task.tasks_per_session);
    read(*it, "object_radius_deg", c.task.object_radius_deg);
    read(*it, "window_fraction", c.task.window_fraction);
    read(*it, "timeout_ms", c.task.timeout_ms);
    read(*it, "feedback_ms", c.task.feedback_ms);
    read(*it, "min_separation_deg", c.task.min_separation_deg);
  }
  if (auto it = j.find("script"); it != j.end() && !it->is_null()) c.script = script_from_json(*it);
  c.validate();
  return c;
}

inline Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

inline SessionConfig load_config(const std::filesystem::path& path) {
  try {
    return config_from_json(read_json_file(path));
  } catch (const Json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out << text;
}

inline void write_json(const std::filesystem::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

// ---------------------------------------------------------------------------
// Calibration sets
// ---------------------------------------------------------------------------

inline Json to_json(const CalibrationSet& cal) {
  Json entries = Json::array();
  for (const auto& e : cal.entries()) entries.push_back({{"mean", e.mean}, {"target", detail::point(e.target)}});
  return {{"format", "ledgaze-calibration"}, {"version", 1}, {"channel_count", cal.channel_count()},
          {"entries", std::move(entries)}};
}

inline CalibrationSet calibration_from_json(const Json& j) {
  if (j.value("format", "") != "ledgaze-calibration") throw FormatError("not a calibration file");
  if (j.value("version", 0) != 1) throw FormatError("unsupported calibration version");
  CalibrationSet cal(j.at("channel_count").get<std::size_t>());
  for (const auto& e : j.at("entries")) cal.add(e.at("mean").get<std::vector<double>>(), detail::point(e.at("target")));
  return cal;
}

inline CalibrationSet load_calibration(const std::filesystem::path& path) {
  try {
    return calibration_from_json(read_json_file(path));
  } catch (const Json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Session logs
// ---------------------------------------------------------------------------

inline void write_session_log(std::ostream& out, const SessionLog& log) {
  out << Json{{"type", "header"}, {"format", "ledgaze-session"}, {"version", 1},
              {"channel_count", log.channel_count}, {"frame_period_us", log.frame_period_us}}
             .dump()
      << '\n';
  for (const auto& f : log.frames) {
    out << Json{{"type", "frame"},       {"t", f.raw.timestamp},
                {"raw", f.raw.channels}, {"values", f.values},
                {"gaze", detail::point(f.gaze)}, {"target", detail::point(f.target)}}
               .dump()
        << '\n';
  }
  for (const auto& e : log.events) {
    out << Json{{"type", "event"}, {"kind", to_string(e.kind)}, {"start", e.start}, {"end", e.end},
                {"target", detail::point(e.target)}}
               .dump()
        << '\n';
  }
}

inline std::string session_log_string(const SessionLog& log) {
  std::ostringstream s;
  write_session_log(s, log);
  return s.str();
}

inline SessionLog read_session_log(std::istream& in) {
  SessionLog log;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = Json::parse(line);
      const auto type = j.at("type").get<std::string>();
      if (type == "header") {
        if (j.value("format", "") != "ledgaze-session") throw FormatError("not a session log");
        if (j.value("version", 0) != 1) throw FormatError("unsupported session log version");
        log.channel_count = j.at("channel_count").get<std::size_t>();
        log.frame_period_us = j.at("frame_period_us").get<Micros>();
        header = true;
      } else if (!header) {
        throw FormatError("record before header");
      } else if (type == "frame") {
        LogFrame f;
        f.raw.timestamp = j.at("t").get<Micros>();
        f.raw.channels = j.at("raw").get<std::vector<std::uint16_t>>();
        f.values = j.at("values").get<std::vector<double>>();
        f.gaze = detail::point(j.at("gaze"));
        f.target = detail::point(j.at("target"));
        require_same_length(f.raw.channels.size(), log.channel_count, "log frame");
        require_same_length(f.values.size(), log.channel_count, "log frame");
        log.frames.push_back(std::move(f));
      } else if (type == "event") {
        LogEvent e;
        const auto kind = j.at("kind").get<std::string>();
        if (kind == "blink") {
          e.kind = EventKind::blink;
        } else if (kind == "target_move") {
          e.kind = EventKind::target_move;
        } else {
          throw FormatError("unknown event kind " + kind);
        }
        e.start = j.at("start").get<Micros>();
        e.end = j.at("end").get<Micros>();
        e.target = detail::point(j.at("target"));
        log.events.push_back(e);
      }
    } catch (const Json::exception& e) {
      throw FormatError("session log line " + std::to_string(lineno) + ": " + e.what());
    } catch (const FormatError& e) {
      throw FormatError("session log line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (!header) throw FormatError("session log has no header");
  return log;
}

inline SessionLog load_session_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  return read_session_log(in);
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

/// Shortest round-trip formatting, identical across runs.
inline std::string fmt(double v) {
  if (std::isnan(v)) return "";
  return Json(v).dump();
}

inline Json summary_json(const AccuracyReport& r) {
  Json per_target = Json::array();
  for (const auto& t : r.per_target) {
    per_target.push_back({{"target", detail::point(t.target)}, {"frames", t.frames}, {"mean_deg", t.mean}});
  }
  return {{"total_frames", r.total_frames},
          {"used_frames", r.used_frames},
          {"blink_excluded", r.blink_excluded},
          {"saccade_excluded", r.saccade_excluded},
          {"failed_estimates", r.failed_estimates},
          {"mean_deg", r.mean},
          {"median_deg", r.median},
          {"std_deg", r.stddev},
          {"bin_width_deg", r.bin_width},
          {"histogram", r.histogram},
          {"per_target", std::move(per_target)}};
}

/// bin_lo_deg,bin_hi_deg,<name>...; columns padded with zeros to a common length.
inline std::string histogram_csv(const std::vector<std::pair<std::string, const AccuracyReport*>>& reports) {
  std::size_t bins = 0;
  double width = 0.25;
  for (const auto& [name, r] : reports) {
    bins = std::max(bins, r->histogram.size());
    width = r->bin_width;
  }
  std::string out = "bin_lo_deg,bin_hi_deg";
  for (const auto& [name, r] : reports) out += "," + name;
  out += "\n";
  for (std::size_t b = 0; b < bins; ++b) {
    out += fmt(width * static_cast<double>(b)) + "," + fmt(width * static_cast<double>(b + 1));
    for (const auto& [name, r] : reports) out += "," + fmt(b < r->histogram.size() ? r->histogram[b] : 0.0);
    out += "\n";
  }
  return out;
}

inline std::string per_target_csv(const AccuracyReport& r) {
  std::string out = "target_x,target_y,frames,mean_deg\n";
  for (const auto& t : r.per_target) {
    out += fmt(t.target.x) + "," + fmt(t.target.y) + "," + std::to_string(t.frames) + "," + fmt(t.mean) + "\n";
  }
  return out;
}

inline std::string_view to_string(Exclusion e) {
  switch (e) {
    case Exclusion::none: return "none";
    case Exclusion::blink: return "blink";
    case Exclusion::saccade: return "saccade";
  }
  return "none";
}

/// Per-frame trace for plotting: time, target, estimate, exclusion.
inline std::string trace_csv(const SessionLog& log, const AccuracyReport& r) {
  require_same_length(log.frames.size(), r.estimates.size(), "trace");
  std::string out = "time_s,target_x,target_y,gaze_x,gaze_y,estimate_x,estimate_y,error_deg,excluded,exclusion\n";
  for (std::size_t i = 0; i < log.frames.size(); ++i) {
    const auto& f = log.frames[i];
    out += fmt(static_cast<double>(f.raw.timestamp) * 1e-6) + "," + fmt(f.target.x) + "," + fmt(f.target.y) + "," +
           fmt(f.gaze.x) + "," + fmt(f.gaze.y) + "," + fmt(r.estimates[i].x) + "," + fmt(r.estimates[i].y) + "," +
           fmt(r.frame_errors[i]) + "," + (r.exclusions[i] == Exclusion::none ? "0" : "1") + "," +
           std::string(to_string(r.exclusions[i])) + "\n";
  }
  return out;
}

inline std::string sweep_csv(const SweepReport& s) {
  std::string out = std::string(to_string(s.axis)) + ",calibration_size,used_frames,mean_deg,median_deg,std_deg\n";
  for (const auto& row : s.rows) {
    out += std::to_string(row.value) + "," + std::to_string(row.calibration_size) + "," +
           std::to_string(row.report.used_frames) + "," + fmt(row.report.mean) + "," + fmt(row.report.median) + "," +
           fmt(row.report.stddev) + "\n";
  }
  return out;
}

inline Json to_json(const PairedComparison& p) {
  return {{"frames", p.frames},
          {"mean_difference_deg", p.mean_difference},
          {"median_difference_deg", p.median_difference},
          {"a_better", p.a_better},
          {"b_better", p.b_better}};
}

inline Json to_json(const TaskSessionOutcome& s) {
  return {{"success_ratio", s.success_ratio},
          {"first_half_successes", s.first_half_successes},
          {"second_half_successes", s.second_half_successes},
          {"initial_calibration_size", s.initial_calibration_size},
          {"final_calibration_size", s.final_calibration_size}};
}

inline Json to_json(const ScenarioReport& r) {
  Json sessions = Json::array();
  for (const auto& s : r.sessions) sessions.push_back(to_json(s));
  return {{"scenario", to_string(r.scenario)},
          {"sessions", r.sessions.size()},
          {"mean", r.mean},
          {"median", r.median},
          {"q1", r.q1},
          {"q3", r.q3},
          {"first_half_successes", r.first_half_successes},
          {"second_half_successes", r.second_half_successes},
          {"per_session", std::move(sessions)}};
}

inline std::string scenarios_csv(const std::vector<const ScenarioReport*>& reports) {
  std::string out = "scenario,session,tasks,success_ratio,first_half_successes,second_half_successes,"
                    "initial_calibration_size,final_calibration_size\n";
  for (const auto* r : reports) {
    for (std::size_t i = 0; i < r->sessions.size(); ++i) {
      const auto& s = r->sessions[i];
      out += std::string(to_string(r->scenario)) + "," + std::to_string(i) + "," + std::to_string(s.tasks.size()) +
             "," + fmt(s.success_ratio) + "," + std::to_string(s.first_half_successes) + "," +
             std::to_string(s.second_half_successes) + "," + std::to_string(s.initial_calibration_size) + "," +
             std::to_string(s.final_calibration_size) + "\n";
    }
  }
  return out;
}

}  // namespace ledgaze::io
