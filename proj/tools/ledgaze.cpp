// ledgaze: run simulated sessions, evaluate estimators and write reports.
//
//   ledgaze <command> <config.json> [--seed N] [--out DIR] [options]
//
// Exit status: 0 success, 1 runtime failure, 2 usage or input error.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ledgaze/ledgaze.hpp"

namespace fs = std::filesystem;
using namespace ledgaze;
using io::Json;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  unsigned threads = 0;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("config", c.config, "Config file (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "Seed; defaults to the config's seed");
  cmd->add_option("--out", c.out, "Output directory")->capture_default_str();
}

struct Loaded {
  SessionConfig cfg;
  std::uint64_t seed;
  fs::path out;
};

Loaded load(const Common& c) {
  Loaded l{io::load_config(c.config), 0, c.out};
  l.seed = c.seed.value_or(l.cfg.seed);
  l.cfg.seed = l.seed;
  fs::create_directories(l.out);
  return l;
}

Json header(const Loaded& l, std::string_view command) {
  return {{"command", command},
          {"seed", l.seed},
          {"simulator_note", "optics, signal and subject values are model parameters, not hardware measurements"},
          {"config", io::to_json(l.cfg)}};
}

BenchmarkSession session_or_files(const Loaded& l, const std::string& calibration, const std::string& log) {
  if (calibration.empty() != log.empty()) throw ArgumentError("--calibration and --log go together");
  if (calibration.empty()) return run_benchmark_session(l.cfg, l.seed);
  BenchmarkSession s;
  s.calibration = io::load_calibration(calibration);
  s.log = io::load_session_log(log);
  return s;
}

int cmd_calibrate(const Common& c, std::optional<std::size_t> augmentations) {
  const auto l = load(c);
  const auto rig = make_rig(l.cfg, l.seed, l.seed);
  const auto outcome = calibrate_rig(l.cfg, rig, l.seed);
  const auto n = augmentations.value_or(l.cfg.benchmark.augmentations);
  const auto cal = gameplay_augment(l.cfg, rig, outcome.calibration, n, l.seed);
  io::write_json(l.out / "calibration.json", io::to_json(cal));

  Json dropped = Json::array();
  for (auto p : outcome.dropped) dropped.push_back(Json::array({p.x, p.y}));
  auto j = header(l, "calibrate");
  j["grid_points"] = l.cfg.grid.size();
  j["accepted_grid_points"] = outcome.calibration.size();
  j["attempts"] = outcome.attempts;
  j["augmentations"] = cal.size() - outcome.calibration.size();
  j["calibration_size"] = cal.size();
  j["dropped"] = std::move(dropped);
  j["warnings"] = outcome.warnings;
  io::write_json(l.out / "calibrate_summary.json", j);
  for (const auto& w : outcome.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << "calibration: " << cal.size() << " points (" << outcome.calibration.size() << " grid)\n";
  return 0;
}

int cmd_run(const Common& c) {
  const auto l = load(c);
  const auto rig = make_rig(l.cfg, l.seed, l.seed);
  const auto log = record_test_session(l.cfg, rig, l.seed);
  io::write_text(l.out / "session.ndjson", io::session_log_string(log));
  auto j = header(l, "run");
  j["frames"] = log.frames.size();
  j["events"] = log.events.size();
  j["frame_period_us"] = log.frame_period_us;
  j["channel_count"] = log.channel_count;
  io::write_json(l.out / "run_summary.json", j);
  std::cout << "session: " << log.frames.size() << " frames, " << log.events.size() << " events\n";
  return 0;
}

int cmd_eval(const Common& c, const std::string& calibration, const std::string& log_path, bool trace,
             double bin_width) {
  const auto l = load(c);
  const auto s = session_or_files(l, calibration, log_path);
  const auto report = evaluate_accuracy(s.log, make_estimator(l.cfg, s.calibration), l.cfg.display, bin_width);
  auto j = header(l, "eval");
  j["estimator"] = to_string(l.cfg.estimator);
  j["calibration_size"] = s.calibration.size();
  j["report"] = io::summary_json(report);
  io::write_json(l.out / "eval_summary.json", j);
  io::write_text(l.out / "eval_histogram.csv", io::histogram_csv({{"fraction", &report}}));
  io::write_text(l.out / "eval_per_target.csv", io::per_target_csv(report));
  if (trace) io::write_text(l.out / "eval_trace.csv", io::trace_csv(s.log, report));
  std::cout << "mean " << report.mean << " deg, median " << report.median << " deg, std " << report.stddev
            << " deg over " << report.used_frames << "/" << report.total_frames << " frames\n";
  return 0;
}

std::vector<int> default_sweep_values(SweepAxis axis) {
  if (axis == SweepAxis::calibration_points) return {4, 9, 16, 25};
  return {4, 5, 6, 7, 8, 9, 10, 11, 12};
}

int cmd_sweep(const Common& c, const std::string& axis_name, std::vector<int> values) {
  const auto l = load(c);
  const auto axis = sweep_axis_from_string(axis_name);
  if (values.empty()) values = default_sweep_values(axis);
  const auto r = sweep(l.cfg, axis, values, l.seed);
  io::write_text(l.out / "sweep.csv", io::sweep_csv(r));
  auto j = header(l, "sweep");
  j["axis"] = to_string(axis);
  j["channel_order"] = r.channel_order;
  Json rows = Json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"value", row.value}, {"calibration_size", row.calibration_size},
                    {"report", io::summary_json(row.report)}});
  }
  j["rows"] = std::move(rows);
  io::write_json(l.out / "sweep_summary.json", j);
  for (const auto& row : r.rows) std::cout << to_string(axis) << " " << row.value << ": mean " << row.report.mean << "\n";
  return 0;
}

int cmd_compare(const Common& c, const std::string& calibration, const std::string& log_path, bool all_measures,
                std::size_t seeds) {
  const auto l = load(c);
  if (seeds > 1) {
    const auto suite = compare_suite(l.cfg, seeds, l.seed, c.threads);
    std::string csv = "run,seed,calibration_size,gpr_mean_deg,gpr_median_deg,svr_mean_deg,svr_median_deg,svr_sigma\n";
    Json runs = Json::array();
    for (std::size_t i = 0; i < suite.runs.size(); ++i) {
      const auto& r = suite.runs[i];
      csv += std::to_string(i) + "," + std::to_string(r.seed) + "," + std::to_string(r.calibration_size) + "," +
             io::fmt(r.gpr_mean) + "," + io::fmt(r.gpr_median) + "," + io::fmt(r.svr_mean) + "," +
             io::fmt(r.svr_median) + "," + io::fmt(r.svr_sigma) + "\n";
    }
    io::write_text(l.out / "compare_seeds.csv", csv);
    auto j = header(l, "compare");
    j["seeds"] = seeds;
    j["gpr_wins"] = suite.gpr_wins;
    j["gpr_win_fraction"] = static_cast<double>(suite.gpr_wins) / static_cast<double>(seeds);
    io::write_json(l.out / "compare_summary.json", j);
    std::cout << "GPR better in " << suite.gpr_wins << "/" << seeds << " runs\n";
    return 0;
  }
  const auto s = session_or_files(l, calibration, log_path);
  const auto r = compare_estimators(l.cfg, s.calibration, s.log, all_measures);
  std::vector<std::pair<std::string, const AccuracyReport*>> cols{{"gpr_minkowski", &r.gpr}, {"svr_rbf", &r.svr}};
  std::string csv = "estimator,mean_deg,median_deg,std_deg,used_frames,failed_estimates\n";
  auto row = [&](const std::string& name, const AccuracyReport& a) {
    csv += name + "," + io::fmt(a.mean) + "," + io::fmt(a.median) + "," + io::fmt(a.stddev) + "," +
           std::to_string(a.used_frames) + "," + std::to_string(a.failed_estimates) + "\n";
  };
  row("gpr_minkowski", r.gpr);
  row("svr_rbf", r.svr);
  for (const auto& m : r.measures) {
    if (m.kind == MeasureKind::minkowski) continue;
    const auto name = "gpr_" + std::string(to_string(m.kind));
    row(name, m.report);
    cols.emplace_back(name, &m.report);
  }
  io::write_text(l.out / "compare.csv", csv);
  io::write_text(l.out / "compare_histogram.csv", io::histogram_csv(cols));
  auto j = header(l, "compare");
  j["calibration_size"] = s.calibration.size();
  j["svr_sigma"] = r.svr_sigma;
  j["sigma_validation"] = r.sigma_validation;
  j["gpr"] = io::summary_json(r.gpr);
  j["svr"] = io::summary_json(r.svr);
  j["paired_gpr_minus_svr"] = io::to_json(r.paired);
  Json measures = Json::object();
  for (const auto& m : r.measures) measures[std::string(to_string(m.kind))] = io::summary_json(m.report);
  if (all_measures) j["gpr_measures"] = std::move(measures);
  io::write_json(l.out / "compare_summary.json", j);
  std::cout << "GPR-minkowski mean " << r.gpr.mean << " deg, SVR-RBF mean " << r.svr.mean << " deg (sigma "
            << r.svr_sigma << ")\n";
  return 0;
}

int cmd_scenarios(const Common& c, const std::string& scenario, std::size_t sessions, const std::string& prior) {
  const auto l = load(c);
  auto j = header(l, "scenarios");
  if (scenario == "all") {
    const auto suite = run_scenario_suite(l.cfg, sessions, l.seed, c.threads);
    io::write_text(l.out / "scenarios.csv", io::scenarios_csv({&suite.calibrated, &suite.same_user_prior,
                                                               &suite.cross_user_prior}));
    j["subjects"] = sessions;
    j["scenarios"] = Json::array({io::to_json(suite.calibrated), io::to_json(suite.same_user_prior),
                                  io::to_json(suite.cross_user_prior)});
    for (const auto* r : {&suite.calibrated, &suite.same_user_prior, &suite.cross_user_prior}) {
      std::cout << to_string(r->scenario) << ": median success " << r->median << "\n";
    }
  } else {
    const auto which = scenario_from_string(scenario);
    std::optional<CalibrationSet> p;
    if (!prior.empty()) p = io::load_calibration(prior);
    const auto r = run_scenarios(l.cfg, which, p, sessions, l.seed, c.threads);
    io::write_text(l.out / "scenarios.csv", io::scenarios_csv({&r}));
    j["scenarios"] = Json::array({io::to_json(r)});
    std::cout << to_string(r.scenario) << ": median success " << r.median << "\n";
  }
  io::write_json(l.out / "scenarios_summary.json", j);
  return 0;
}

int cmd_wire_test(const Common& c, const std::string& log_path, std::size_t max_gap) {
  const auto l = load(c);
  SessionLog log;
  if (log_path.empty()) {
    log = record_test_session(l.cfg, make_rig(l.cfg, l.seed, l.seed), l.seed);
  } else {
    log = io::load_session_log(log_path);
  }

  std::vector<std::uint8_t> clean;
  for (const auto& f : log.frames) {
    const auto b = wire::encode(f.raw);
    clean.insert(clean.end(), b.begin(), b.end());
  }
  io::write_text(l.out / "wire_clean.bin", std::string(clean.begin(), clean.end()));

  // Garbage between frames and single-bit flips inside some frames.
  std::mt19937_64 rng(derive_seed(l.seed, 77));
  std::uniform_int_distribution<std::size_t> gap(0, max_gap);
  std::uniform_int_distribution<int> byte(0, 255);
  std::bernoulli_distribution flip(0.05);
  std::vector<std::uint8_t> noisy;
  std::vector<bool> corrupted;
  for (const auto& f : log.frames) {
    for (std::size_t g = gap(rng); g > 0; --g) noisy.push_back(static_cast<std::uint8_t>(byte(rng)));
    auto b = wire::encode(f.raw);
    const bool bad = flip(rng);
    if (bad) {
      const auto bit = std::uniform_int_distribution<std::size_t>(8, 8 * b.size() - 1)(rng);
      b[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    }
    corrupted.push_back(bad);
    noisy.insert(noisy.end(), b.begin(), b.end());
  }
  io::write_text(l.out / "wire_noisy.bin", std::string(noisy.begin(), noisy.end()));

  wire::DecoderStats clean_stats, noisy_stats;
  const auto clean_frames = wire::decode(clean, &clean_stats);
  const auto channels = static_cast<std::uint8_t>(log.channel_count);
  const auto noisy_frames = wire::decode(noisy, &noisy_stats, channels);

  std::size_t clean_ok = clean_frames.size() == log.frames.size() ? 0 : 1;
  for (std::size_t i = 0; clean_ok == 0 && i < clean_frames.size(); ++i) {
    if (!(clean_frames[i] == log.frames[i].raw)) clean_ok = 1;
  }
  // Every decoded frame from the noisy stream must be one of the originals, in order.
  std::size_t recovered = 0, intact = 0, unexpected = 0, cursor = 0;
  for (std::size_t i = 0; i < corrupted.size(); ++i) intact += corrupted[i] ? 0 : 1;
  for (const auto& f : noisy_frames) {
    while (cursor < log.frames.size() && !(log.frames[cursor].raw == f)) ++cursor;
    if (cursor == log.frames.size()) {
      ++unexpected;
      cursor = 0;
      continue;
    }
    recovered += corrupted[cursor] ? 0 : 1;
    ++cursor;
  }

  auto j = header(l, "wire-test");
  j["frames"] = log.frames.size();
  j["bytes_clean"] = clean.size();
  j["bytes_noisy"] = noisy.size();
  j["clean_roundtrip_exact"] = clean_ok == 0;
  j["corrupted_frames"] = log.frames.size() - intact;
  j["intact_frames"] = intact;
  j["intact_recovered"] = recovered;
  j["misdecoded"] = unexpected;
  j["decoder"] = {{"frames", noisy_stats.frames}, {"resyncs", noisy_stats.resyncs},
                  {"skipped_bytes", noisy_stats.skipped_bytes}};
  io::write_json(l.out / "wire_summary.json", j);
  const bool ok = clean_ok == 0 && recovered == intact && unexpected == 0;
  std::cout << (ok ? "ok" : "FAILED") << ": " << recovered << "/" << intact << " intact frames recovered, "
            << unexpected << " misdecoded, " << noisy_stats.resyncs << " resyncs\n";
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LED gaze tracking simulator and evaluator"};
  app.require_subcommand(1);
  Common common;

  auto* calibrate = app.add_subcommand("calibrate", "Run the calibration phase and write calibration.json");
  add_common(calibrate, common);
  std::optional<std::size_t> augmentations;
  calibrate->add_option("--augmentations", augmentations, "Gameplay augmentations (default from config)");

  auto* run = app.add_subcommand("run", "Record a free-viewing test session as line-delimited JSON");
  add_common(run, common);

  std::string calibration, log, prior;
  auto* eval = app.add_subcommand("eval", "Accuracy report for the configured estimator");
  add_common(eval, common);
  bool trace = false;
  double bin_width = 0.25;
  eval->add_option("--calibration", calibration, "Calibration file; simulated when omitted");
  eval->add_option("--log", log, "Session log; simulated when omitted");
  eval->add_flag("--trace", trace, "Also write a per-frame trace CSV");
  eval->add_option("--bin-width", bin_width, "Histogram bin width in degrees")->capture_default_str();

  auto* sweep_cmd = app.add_subcommand("sweep", "Accuracy against calibration points or LED count");
  add_common(sweep_cmd, common);
  std::string axis = "calibration_points";
  std::vector<int> values;
  sweep_cmd->add_option("--axis", axis, "calibration_points | led_count")->capture_default_str();
  sweep_cmd->add_option("--values", values, "Sweep values")->delimiter(',')->allow_extra_args(false);

  auto* compare = app.add_subcommand("compare", "GPR-Minkowski against SVR-RBF on the same frames");
  add_common(compare, common);
  bool all_measures = false;
  std::size_t seeds = 1;
  compare->add_option("--calibration", calibration, "Calibration file; simulated when omitted");
  compare->add_option("--log", log, "Session log; simulated when omitted");
  compare->add_flag("--all-measures", all_measures, "Also evaluate GPR with cosine, manhattan and canberra");
  compare->add_option("--seeds", seeds, "Number of simulated subjects")->capture_default_str();
  compare->add_option("--threads", common.threads, "Worker threads (0: all cores)");

  auto* scenarios = app.add_subcommand("scenarios", "Dwell-to-select success ratios");
  add_common(scenarios, common);
  std::string scenario = "all";
  std::size_t sessions = 20;
  scenarios->add_option("--scenario", scenario, "calibrated | same_user_prior | cross_user_prior | all")
      ->capture_default_str();
  scenarios->add_option("--sessions", sessions, "Sessions, or subjects with 'all'")->capture_default_str();
  scenarios->add_option("--prior", prior, "Stored calibration for the prior scenarios");
  scenarios->add_option("--threads", common.threads, "Worker threads (0: all cores)");

  auto* wire_test = app.add_subcommand("wire-test", "Encode a session, corrupt the stream, decode and check");
  add_common(wire_test, common);
  std::size_t max_gap = 8;
  wire_test->add_option("--log", log, "Session log; simulated when omitted");
  wire_test->add_option("--max-garbage", max_gap, "Max garbage bytes between frames")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*calibrate) return cmd_calibrate(common, augmentations);
    if (*run) return cmd_run(common);
    if (*eval) return cmd_eval(common, calibration, log, trace, bin_width);
    if (*sweep_cmd) return cmd_sweep(common, axis, values);
    if (*compare) return cmd_compare(common, calibration, log, all_measures, seeds);
    if (*scenarios) return cmd_scenarios(common, scenario, sessions, prior);
    if (*wire_test) return cmd_wire_test(common, log, max_gap);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const io::FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
