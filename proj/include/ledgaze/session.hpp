#pragma once

// Experimental procedures on top of the simulator: calibration sessions,
// gameplay augmentation, the accuracy benchmark, estimator comparison,
// parameter sweeps and the dwell-to-select task scenarios.

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>
#include <cmath>
#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "ledgaze/calib.hpp"
#include "ledgaze/core.hpp"
#include "ledgaze/evaluate.hpp"
#include "ledgaze/eyesim.hpp"
#include "ledgaze/kernels.hpp"
#include "ledgaze/regress.hpp"
#include "ledgaze/sigproc.hpp"

namespace ledgaze {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

enum class EstimatorKind { gpr, svr };

inline std::string_view to_string(EstimatorKind k) { return k == EstimatorKind::gpr ? "gpr" : "svr"; }
inline EstimatorKind estimator_kind_from_string(std::string_view s) {
  if (s == "gpr") return EstimatorKind::gpr;
  if (s == "svr") return EstimatorKind::svr;
  throw ArgumentError("unknown estimator: " + std::string(s));
}

struct BenchmarkSpec {
  std::size_t augmentations = 66;
  double gameplay_fix_ms = 1000.0;
  std::size_t test_fixations = 40;
  double fixation_min_ms = 1500.0;
  double fixation_max_ms = 3000.0;
};

struct TaskSpec {
  int candidate_min = 3;
  int candidate_max = 8;
  double dwell_to_select_ms = 3000.0;
  std::size_t tasks_per_session = 50;
  double object_radius_deg = 1.5;
  double window_fraction = 0.95;
  double timeout_ms = 8000.0;
  double feedback_ms = 500.0;
  double min_separation_deg = 6.0;

  void validate() const {
    if (candidate_min < 1 || candidate_max < candidate_min) throw ArgumentError("invalid candidate range");
    if (!(dwell_to_select_ms > 0.0) || !(timeout_ms >= dwell_to_select_ms)) throw ArgumentError("invalid task timing");
    if (!(window_fraction > 0.0 && window_fraction <= 1.0)) throw ArgumentError("invalid window fraction");
    if (!(object_radius_deg > 0.0)) throw ArgumentError("object radius must be positive");
  }
};

struct SigmaGrid {
  double lo = 0.01;
  double hi = 1.0;
  std::size_t count = 30;
  [[nodiscard]] std::vector<double> values() const { return log_grid(lo, hi, count); }
};

struct SessionConfig {
  int version = 1;
  std::uint64_t seed = 1;
  DisplayGeometry display;
  PrototypeMode mode = PrototypeMode::prototype1;
  double ring_radius_mm = 18.0;
  double eye_relief_mm = 25.0;
  OpticsModel optics;
  SignalConfig signal;
  double blink_ramp_ms = 50.0;
  std::optional<SubjectProfile> subject;  ///< random from the seed when unset
  double noise_std = 0.01;                ///< for random subjects
  double blink_rate_per_min = 8.0;        ///< for random subjects
  double headset_jitter_mm = 0.7;         ///< per-session placement spread
  CalibrationGridSpec grid;
  DwellConfig dwell;
  MeasureSpec measure;
  EstimatorKind estimator = EstimatorKind::gpr;
  double jitter = 1e-8;
  bool svr_normalize = true;
  double svr_sigma = 0.0;  ///< 0 selects sigma by leave-one-out grid search
  SigmaGrid sigma_grid;
  BenchmarkSpec benchmark;
  TaskSpec task;
  std::optional<GazeScript> script;  ///< test recording; random fixations when unset

  void validate() const {
    if (version != 1) throw ArgumentError("unsupported config version " + std::to_string(version));
    display.validate();
    grid.validate(display);
    dwell.validate();
    measure.validate();
    task.validate();
    if (!(jitter > 0.0)) throw ArgumentError("jitter must be positive");
  }
};

/// Deterministic seed derivation, so each phase of a run has its own stream.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (tag + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Runs fn(i) for i in [0, n) on up to `threads` workers (0: hardware
/// concurrency). Callers write results by index, so output order is fixed.
/// The first exception thrown by any task is rethrown.
template <class F>
void parallel_for(std::size_t n, F&& fn, unsigned threads = 0) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

namespace seed_tag {
inline constexpr std::uint64_t placement = 1, calibration = 2, gameplay = 3, test_script = 4, test_sim = 5,
                               tasks = 6, calibration_sim = 7, gameplay_sim = 8;
}

// ---------------------------------------------------------------------------
// Rig: one subject wearing the headset in one placement
// ---------------------------------------------------------------------------

struct Rig {
  LedLayout layout;
  SubjectProfile subject;
  SimConfig sim;
  HeadsetShift placement;
};

inline SubjectProfile subject_for(const SessionConfig& cfg, std::uint64_t subject_seed, std::size_t channels) {
  if (cfg.subject) return *cfg.subject;
  auto s = SubjectProfile::random(subject_seed, channels);
  s.noise_std = cfg.noise_std;
  s.blink_rate_per_min = cfg.blink_rate_per_min;
  return s;
}

/// Builds the rig for `subject_seed` with a headset placement drawn from `placement_seed`.
inline Rig make_rig(const SessionConfig& cfg, std::uint64_t subject_seed, std::uint64_t placement_seed) {
  cfg.validate();
  Rig rig;
  auto layout = LedLayout::make(cfg.mode, cfg.ring_radius_mm, cfg.eye_relief_mm);
  std::mt19937_64 rng(derive_seed(placement_seed, seed_tag::placement));
  std::normal_distribution<double> n(0.0, 1.0);
  rig.placement.dx_mm = cfg.headset_jitter_mm > 0.0 ? cfg.headset_jitter_mm * n(rng) : 0.0;
  rig.placement.dy_mm = cfg.headset_jitter_mm > 0.0 ? cfg.headset_jitter_mm * n(rng) : 0.0;
  rig.layout = apply_shift(std::move(layout), rig.placement);
  rig.subject = subject_for(cfg, subject_seed, rig.layout.channel_count());
  rig.sim.geom = cfg.display;
  rig.sim.optics = cfg.optics;
  rig.sim.signal = cfg.signal;
  rig.sim.blink_ramp_ms = cfg.blink_ramp_ms;
  return rig;
}

inline Simulator make_simulator(const Rig& rig, std::uint64_t seed) {
  return Simulator(rig.layout, rig.subject, rig.sim, seed);
}

/// Shows targets on a live simulator and returns the frames captured while the user dwells.
class SimulatedDwellSource : public DwellSource {
 public:
  explicit SimulatedDwellSource(Simulator& sim) : sim_(sim) {}

  /// Adds sensor noise while any of `targets` is displayed.
  void inject_noise(std::vector<ScreenPoint> targets, double extra_std) {
    noisy_ = std::move(targets);
    extra_std_ = extra_std;
  }

  DwellCapture dwell(ScreenPoint target, const DwellConfig& config) override {
    const bool noisy = std::find(noisy_.begin(), noisy_.end(), target) != noisy_.end();
    sim_.set_extra_noise(noisy ? extra_std_ : 0.0);
    DwellCapture cap;
    cap.onset = sim_.now();
    sim_.show_target(target);
    const Micros end = cap.onset + static_cast<Micros>(std::llround((config.settle_ms + config.fix_duration_ms) * 1000.0));
    while (sim_.now() < end) {
      const auto& f = sim_.step_frame();
      cap.frames.push_back({f.raw.timestamp, f.values});
    }
    sim_.set_extra_noise(0.0);
    return cap;
  }

 private:
  Simulator& sim_;
  std::vector<ScreenPoint> noisy_;
  double extra_std_ = 0.0;
};

/// Calibration phase for one rig; the subject holds still (no blinks) while dwelling.
inline CalibrationOutcome calibrate_rig(const SessionConfig& cfg, const Rig& rig, std::uint64_t seed) {
  auto sim = make_simulator(rig, derive_seed(seed, seed_tag::calibration_sim));
  SimulatedDwellSource source(sim);
  return run_calibration(source, cfg.grid, cfg.display, cfg.dwell, derive_seed(seed, seed_tag::calibration));
}

inline ScreenPoint random_point_in_grid(const SessionConfig& cfg, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ux(cfg.grid.margin, cfg.display.width - cfg.grid.margin);
  std::uniform_real_distribution<double> uy(cfg.grid.margin, cfg.display.height - cfg.grid.margin);
  return {std::round(ux(rng)), std::round(uy(rng))};
}

/// Gameplay phase: the user dwells on random objects and every accepted
/// dwell is appended to the calibration set.
inline CalibrationSet gameplay_augment(const SessionConfig& cfg, const Rig& rig, CalibrationSet calibration,
                                       std::size_t count, std::uint64_t seed) {
  if (count == 0) return calibration;
  auto sim = make_simulator(rig, derive_seed(seed, seed_tag::gameplay_sim));
  SimulatedDwellSource source(sim);
  std::mt19937_64 rng(derive_seed(seed, seed_tag::gameplay));
  DwellConfig dwell = cfg.dwell;
  dwell.fix_duration_ms = cfg.benchmark.gameplay_fix_ms;
  std::size_t added = 0;
  for (std::size_t tries = 0; added < count && tries < 4 * count; ++tries) {
    const auto target = random_point_in_grid(cfg, rng);
    const auto samples = sample_dwell(source.dwell(target, dwell), dwell);
    auto agg = aggregate_point(std::span<const std::vector<double>>(samples), dwell);
    if (!agg.accepted()) continue;
    calibration = augment(calibration, std::move(agg.mean), target);
    ++added;
  }
  return calibration;
}

/// Free-viewing test recording: random fixations with natural blinks.
inline SessionLog record_test_session(const SessionConfig& cfg, const Rig& rig, std::uint64_t seed) {
  const auto script = cfg.script ? *cfg.script : make_fixation_script(cfg.display, rig.subject, cfg.benchmark.test_fixations,
                                           cfg.benchmark.fixation_min_ms, cfg.benchmark.fixation_max_ms,
                                           cfg.grid.margin, derive_seed(seed, seed_tag::test_script));
  return run_script(rig.layout, rig.subject, script, rig.layout.schedule(), rig.sim,
                    derive_seed(seed, seed_tag::test_sim));
}

struct BenchmarkSession {
  Rig rig;
  CalibrationSet grid_calibration;
  CalibrationSet calibration;  ///< grid entries plus gameplay augmentations
  std::vector<std::string> warnings;
  SessionLog log;
};

/// Calibration, gameplay augmentation and a free-viewing recording for the
/// subject and headset placement given by `seed`.
inline BenchmarkSession run_benchmark_session(const SessionConfig& cfg, std::uint64_t seed) {
  BenchmarkSession s;
  s.rig = make_rig(cfg, seed, seed);
  auto cal = calibrate_rig(cfg, s.rig, seed);
  s.grid_calibration = cal.calibration;
  s.warnings = std::move(cal.warnings);
  s.calibration = gameplay_augment(cfg, s.rig, s.grid_calibration, cfg.benchmark.augmentations, seed);
  s.log = record_test_session(cfg, s.rig, seed);
  return s;
}

// ---------------------------------------------------------------------------
// Estimators
// ---------------------------------------------------------------------------

inline Estimator gpr_estimator(CalibrationSet calibration, MeasureSpec measure, double jitter) {
  auto model = std::make_shared<const GprModel>(std::move(calibration), std::move(measure), jitter);
  return [model](std::span<const double> v) { return model->estimate(v).position; };
}

inline Estimator svr_estimator(SvrModel model) {
  auto m = std::make_shared<const SvrModel>(std::move(model));
  return [m](std::span<const double> v) { return svr_estimate(*m, v).position; };
}

/// Restricts an estimator to a subset of frame channels.
inline Estimator with_channels(Estimator inner, std::vector<std::size_t> channels) {
  return [inner = std::move(inner), channels = std::move(channels)](std::span<const double> v) {
    std::vector<double> sub;
    sub.reserve(channels.size());
    for (auto c : channels) sub.push_back(v[c]);
    return inner(sub);
  };
}

inline double select_svr_sigma(const SessionConfig& cfg, const CalibrationSet& calibration) {
  if (cfg.svr_sigma > 0.0) return cfg.svr_sigma;
  const auto grid = cfg.sigma_grid.values();
  return grid_search_sigma_loo(calibration, grid, cfg.display, cfg.svr_normalize);
}

/// The estimator named by the config.
inline Estimator make_estimator(const SessionConfig& cfg, const CalibrationSet& calibration) {
  if (cfg.estimator == EstimatorKind::gpr) return gpr_estimator(calibration, cfg.measure, cfg.jitter);
  return svr_estimator({calibration, select_svr_sigma(cfg, calibration), cfg.svr_normalize, false});
}

// ---------------------------------------------------------------------------
// Estimator comparison
// ---------------------------------------------------------------------------

struct MeasureReport {
  MeasureKind kind;
  AccuracyReport report;
};

struct ComparisonReport {
  AccuracyReport gpr;  ///< GPR with minkowski m=2, unit weights
  AccuracyReport svr;  ///< SVR-form RBF with grid-searched sigma
  double svr_sigma = 0.0;
  std::string sigma_validation = "leave-one-out";
  PairedComparison paired;  ///< gpr minus svr
  std::vector<MeasureReport> measures;
};

inline ComparisonReport compare_estimators(const SessionConfig& cfg, const CalibrationSet& calibration,
                                           const SessionLog& log, bool all_measures = false) {
  ComparisonReport out;
  out.gpr = evaluate_accuracy(log, gpr_estimator(calibration, MeasureSpec::minkowski_default(), cfg.jitter),
                              cfg.display);
  out.svr_sigma = grid_search_sigma_loo(calibration, cfg.sigma_grid.values(), cfg.display, cfg.svr_normalize);
  out.svr = evaluate_accuracy(log, svr_estimator({calibration, out.svr_sigma, cfg.svr_normalize, false}),
                              cfg.display);
  out.paired = compare_reports(out.gpr, out.svr);
  if (all_measures) {
    out.measures.push_back({MeasureKind::minkowski, out.gpr});
    for (auto k : {MeasureKind::cosine, MeasureKind::manhattan, MeasureKind::canberra}) {
      out.measures.push_back(
          {k, evaluate_accuracy(log, gpr_estimator(calibration, MeasureSpec::of(k), cfg.jitter), cfg.display)});
    }
  }
  return out;
}

struct SeedComparison {
  std::uint64_t seed = 0;
  std::size_t calibration_size = 0;
  double gpr_mean = 0.0;
  double gpr_median = 0.0;
  double svr_mean = 0.0;
  double svr_median = 0.0;
  double svr_sigma = 0.0;
};

struct ComparisonSuite {
  std::vector<SeedComparison> runs;
  std::size_t gpr_wins = 0;  ///< runs where GPR mean error is strictly lower
};

/// One benchmark session per seed (distinct subject and placement each), GPR vs SVR on each.
inline ComparisonSuite compare_suite(const SessionConfig& cfg, std::size_t seeds, std::uint64_t seed,
                                     unsigned threads = 0) {
  ComparisonSuite out;
  out.runs.resize(seeds);
  parallel_for(
      seeds,
      [&](std::size_t i) {
        const auto s = derive_seed(seed, 2000 + i);
        const auto session = run_benchmark_session(cfg, s);
        const auto c = compare_estimators(cfg, session.calibration, session.log);
        out.runs[i] = {s, session.calibration.size(), c.gpr.mean, c.gpr.median, c.svr.mean, c.svr.median, c.svr_sigma};
      },
      threads);
  for (const auto& r : out.runs) out.gpr_wins += r.gpr_mean < r.svr_mean ? 1 : 0;
  return out;
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

enum class SweepAxis { calibration_points, led_count };

inline std::string_view to_string(SweepAxis a) {
  return a == SweepAxis::calibration_points ? "calibration_points" : "led_count";
}
inline SweepAxis sweep_axis_from_string(std::string_view s) {
  if (s == "calibration_points") return SweepAxis::calibration_points;
  if (s == "led_count") return SweepAxis::led_count;
  throw ArgumentError("unknown sweep axis: " + std::string(s));
}

struct SweepRow {
  int value = 0;
  std::size_t calibration_size = 0;
  AccuracyReport report;
};

struct SweepReport {
  SweepAxis axis = SweepAxis::calibration_points;
  std::vector<std::size_t> channel_order;  ///< led_count only: channels by descending variance
  std::vector<SweepRow> rows;
};

/// Channels sorted by variance of their calibration means, largest first.
inline std::vector<std::size_t> channels_by_variance(const CalibrationSet& calibration) {
  const std::size_t m = calibration.channel_count();
  std::vector<double> var(m, 0.0);
  for (std::size_t c = 0; c < m; ++c) {
    double mean = 0.0;
    for (const auto& e : calibration.entries()) mean += e.mean[c];
    mean /= static_cast<double>(calibration.size());
    for (const auto& e : calibration.entries()) var[c] += (e.mean[c] - mean) * (e.mean[c] - mean);
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return var[a] > var[b]; });
  return order;
}

/// calibration_points: each value must be k*k with k in [2, 8]; the grid is
/// calibrated without gameplay augmentation and evaluated on one shared test
/// recording. led_count: one benchmark session, evaluated on the `value`
/// highest-variance channels.
inline SweepReport sweep(const SessionConfig& cfg, SweepAxis axis, std::span<const int> values, std::uint64_t seed) {
  if (values.empty()) throw ArgumentError("sweep needs at least one value");
  SweepReport out;
  out.axis = axis;
  if (axis == SweepAxis::calibration_points) {
    for (int v : values) {
      const int k = static_cast<int>(std::lround(std::sqrt(static_cast<double>(std::max(v, 0)))));
      if (k * k != v || k < 2 || k > 8) throw ArgumentError("calibration point counts must be k*k with k in [2, 8]");
    }
    const auto rig = make_rig(cfg, seed, seed);
    const auto log = record_test_session(cfg, rig, seed);
    for (int v : values) {
      SessionConfig c = cfg;
      c.grid.rows = c.grid.cols = static_cast<int>(std::lround(std::sqrt(static_cast<double>(v))));
      const auto cal = calibrate_rig(c, rig, seed).calibration;
      out.rows.push_back({v, cal.size(), evaluate_accuracy(log, make_estimator(c, cal), cfg.display)});
    }
    return out;
  }
  const auto session = run_benchmark_session(cfg, seed);
  const std::size_t m = session.calibration.channel_count();
  for (int v : values) {
    if (v < 4) throw ArgumentError("LED count sweep starts at 4 channels");
    if (static_cast<std::size_t>(v) > m) throw ArgumentError("LED count exceeds available channels");
  }
  out.channel_order = channels_by_variance(session.calibration);
  for (int v : values) {
    std::vector<std::size_t> chans(out.channel_order.begin(), out.channel_order.begin() + v);
    const auto sub = session.calibration.select_channels(chans);
    out.rows.push_back({v, sub.size(),
                        evaluate_accuracy(session.log, with_channels(make_estimator(cfg, sub), chans), cfg.display)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dwell-to-select task sessions
// ---------------------------------------------------------------------------

/// Estimator whose calibration grows during use.
class OnlineEstimator {
 public:
  OnlineEstimator(const SessionConfig& cfg, CalibrationSet calibration) : cfg_(cfg) { rebuild(std::move(calibration)); }

  [[nodiscard]] ScreenPoint estimate(std::span<const double> v) const {
    if (auto* g = std::get_if<GprModel>(&model_)) return g->estimate(v).position;
    return svr_estimate(std::get<SvrModel>(model_), v).position;
  }
  void augment(std::vector<double> frame, ScreenPoint target) {
    if (auto* g = std::get_if<GprModel>(&model_)) {
      g->augment(std::move(frame), target);
    } else {
      auto& s = std::get<SvrModel>(model_);
      s.calibration.add(std::move(frame), target);
    }
  }
  [[nodiscard]] std::size_t calibration_size() const {
    if (auto* g = std::get_if<GprModel>(&model_)) return g->calibration().size();
    return std::get<SvrModel>(model_).calibration.size();
  }

 private:
  void rebuild(CalibrationSet calibration) {
    if (cfg_.estimator == EstimatorKind::gpr) {
      model_.emplace<GprModel>(std::move(calibration), cfg_.measure, cfg_.jitter);
    } else {
      const double sigma = select_svr_sigma(cfg_, calibration);
      model_.emplace<SvrModel>(SvrModel{std::move(calibration), sigma, cfg_.svr_normalize, false});
    }
  }

  SessionConfig cfg_;
  std::variant<std::monostate, GprModel, SvrModel> model_;
};

struct TaskOutcome {
  bool success = false;
  bool augmented = false;
  int candidates = 0;
  Micros duration = 0;
};

struct TaskSessionOutcome {
  std::vector<TaskOutcome> tasks;
  double success_ratio = 0.0;
  std::size_t first_half_successes = 0;
  std::size_t second_half_successes = 0;
  std::size_t initial_calibration_size = 0;
  std::size_t final_calibration_size = 0;
};

/// Random candidate objects separated by at least `min_separation_deg`.
inline std::vector<ScreenPoint> place_candidates(const SessionConfig& cfg, int count, std::mt19937_64& rng) {
  const double sep_px = cfg.task.min_separation_deg / cfg.display.degrees_per_pixel;
  std::vector<ScreenPoint> out;
  for (int tries = 0; static_cast<int>(out.size()) < count && tries < 10000; ++tries) {
    const auto p = random_point_in_grid(cfg, rng);
    const bool clear = std::all_of(out.begin(), out.end(), [&](ScreenPoint q) {
      return std::hypot(p.x - q.x, p.y - q.y) >= sep_px;
    });
    if (clear) out.push_back(p);
  }
  if (static_cast<int>(out.size()) < count) throw ArgumentError("cannot place candidate objects");
  return out;
}

/// One session of dwell-to-select tasks starting from `calibration`. The
/// estimator sees only sensor frames; the true target reaches it solely
/// through augmentation after a failed task.
inline TaskSessionOutcome run_task_session(const SessionConfig& cfg, const Rig& rig, CalibrationSet calibration,
                                           std::uint64_t seed) {
  TaskSessionOutcome out;
  out.initial_calibration_size = calibration.size();
  OnlineEstimator est(cfg, std::move(calibration));
  auto sim = make_simulator(rig, derive_seed(seed, seed_tag::test_sim));
  sim.set_spontaneous_blinks(true);
  std::mt19937_64 rng(derive_seed(seed, seed_tag::tasks));
  std::uniform_int_distribution<int> ncand(cfg.task.candidate_min, cfg.task.candidate_max);

  const double radius_px = cfg.task.object_radius_deg / cfg.display.degrees_per_pixel;
  const auto window = static_cast<std::size_t>(
      std::ceil(cfg.task.dwell_to_select_ms * 1000.0 / static_cast<double>(sim.frame_period())));
  const auto needed = static_cast<std::size_t>(std::ceil(cfg.task.window_fraction * static_cast<double>(window)));
  const auto timeout = static_cast<Micros>(std::llround(cfg.task.timeout_ms * 1000.0));
  const auto feedback = static_cast<Micros>(std::llround(cfg.task.feedback_ms * 1000.0));

  for (std::size_t task = 0; task < cfg.task.tasks_per_session; ++task) {
    const int n = ncand(rng);
    const auto candidates = place_candidates(cfg, n, rng);
    const int target = std::uniform_int_distribution<int>(0, n - 1)(rng);
    sim.show_target(candidates[static_cast<std::size_t>(target)]);
    const Micros t0 = sim.now();

    std::deque<int> hits;
    std::vector<std::size_t> counts(static_cast<std::size_t>(n), 0);
    int selected = -1;
    while (selected < 0 && sim.now() < t0 + timeout) {
      const auto& f = sim.step_frame();
      int hit = -1;
      try {
        const auto e = est.estimate(f.values);
        double best = radius_px;
        for (int c = 0; c < n; ++c) {
          const auto& p = candidates[static_cast<std::size_t>(c)];
          const double d = std::hypot(e.x - p.x, e.y - p.y);
          if (d <= best) {
            best = d;
            hit = c;
          }
        }
      } catch (const EstimationFailure&) {
      }
      hits.push_back(hit);
      if (hit >= 0) ++counts[static_cast<std::size_t>(hit)];
      if (hits.size() > window) {
        if (hits.front() >= 0) --counts[static_cast<std::size_t>(hits.front())];
        hits.pop_front();
      }
      if (hits.size() == window) {
        for (int c = 0; c < n; ++c) {
          if (counts[static_cast<std::size_t>(c)] >= needed) selected = c;
        }
      }
    }

    TaskOutcome t;
    t.candidates = n;
    t.success = selected == target;
    t.duration = sim.now() - t0;
    if (!t.success) {
      // The user keeps looking at the target and presses the button.
      for (int attempt = 0; attempt < 3 && !t.augmented; ++attempt) {
        std::vector<std::vector<double>> frames;
        const Micros end = sim.now() + feedback;
        while (sim.now() < end) frames.push_back(sim.step_frame().values);
        if (frames.size() < 2) break;
        auto agg = aggregate_point(std::span<const std::vector<double>>(frames), cfg.dwell);
        if (agg.accepted()) {
          est.augment(std::move(agg.mean), candidates[static_cast<std::size_t>(target)]);
          t.augmented = true;
        }
      }
    }
    out.tasks.push_back(t);
  }

  const std::size_t half = out.tasks.size() / 2;
  std::size_t ok = 0;
  for (std::size_t i = 0; i < out.tasks.size(); ++i) {
    if (!out.tasks[i].success) continue;
    ++ok;
    (i < half ? out.first_half_successes : out.second_half_successes) += 1;
  }
  out.success_ratio = out.tasks.empty() ? 0.0 : static_cast<double>(ok) / static_cast<double>(out.tasks.size());
  out.final_calibration_size = est.calibration_size();
  return out;
}

enum class Scenario { calibrated, same_user_prior, cross_user_prior };

inline std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::calibrated: return "calibrated";
    case Scenario::same_user_prior: return "same_user_prior";
    case Scenario::cross_user_prior: return "cross_user_prior";
  }
  return "unknown";
}
inline Scenario scenario_from_string(std::string_view s) {
  if (s == "calibrated") return Scenario::calibrated;
  if (s == "same_user_prior") return Scenario::same_user_prior;
  if (s == "cross_user_prior") return Scenario::cross_user_prior;
  throw ArgumentError("unknown scenario: " + std::string(s));
}

struct ScenarioReport {
  Scenario scenario = Scenario::calibrated;
  std::vector<TaskSessionOutcome> sessions;
  std::vector<double> ratios;
  double mean = 0.0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  std::size_t first_half_successes = 0;
  std::size_t second_half_successes = 0;
};

inline double quantile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline void summarize(ScenarioReport& r) {
  r.ratios.clear();
  r.first_half_successes = r.second_half_successes = 0;
  for (const auto& s : r.sessions) {
    r.ratios.push_back(s.success_ratio);
    r.first_half_successes += s.first_half_successes;
    r.second_half_successes += s.second_half_successes;
  }
  if (r.ratios.empty()) return;
  r.mean = std::accumulate(r.ratios.begin(), r.ratios.end(), 0.0) / static_cast<double>(r.ratios.size());
  r.median = quantile(r.ratios, 0.5);
  r.q1 = quantile(r.ratios, 0.25);
  r.q3 = quantile(r.ratios, 0.75);
}

/// Sessions for a single user (the config seed). Session i wears the headset
/// in placement derive_seed(seed, i). Prior scenarios start from `prior`
/// instead of calibrating.
inline ScenarioReport run_scenarios(const SessionConfig& cfg, Scenario scenario,
                                    const std::optional<CalibrationSet>& prior, std::size_t sessions,
                                    std::uint64_t seed, unsigned threads = 0) {
  if (scenario != Scenario::calibrated && (!prior || prior->empty())) {
    throw ArgumentError("prior scenarios need a stored calibration set");
  }
  ScenarioReport r;
  r.scenario = scenario;
  r.sessions.resize(sessions);
  parallel_for(
      sessions,
      [&](std::size_t i) {
        const auto session_seed = derive_seed(seed, 100 + i);
        const auto rig = make_rig(cfg, seed, session_seed);
        CalibrationSet start =
            scenario == Scenario::calibrated ? calibrate_rig(cfg, rig, session_seed).calibration : *prior;
        r.sessions[i] = run_task_session(cfg, rig, std::move(start), session_seed);
      },
      threads);
  summarize(r);
  return r;
}

struct ScenarioSuite {
  ScenarioReport calibrated, same_user_prior, cross_user_prior;
};

/// Paired comparison over `subjects` synthetic users. For user i the same
/// task session is run three ways: after calibrating, from the user's own
/// calibration in an earlier headset placement, and from user i+1's calibration.
inline ScenarioSuite run_scenario_suite(const SessionConfig& cfg, std::size_t subjects, std::uint64_t seed,
                                        unsigned threads = 0) {
  ScenarioSuite out;
  out.calibrated.scenario = Scenario::calibrated;
  out.same_user_prior.scenario = Scenario::same_user_prior;
  out.cross_user_prior.scenario = Scenario::cross_user_prior;
  out.calibrated.sessions.resize(subjects);
  out.same_user_prior.sessions.resize(subjects);
  out.cross_user_prior.sessions.resize(subjects);
  auto subject_seed = [&](std::size_t i) { return derive_seed(seed, 1000 + i); };
  parallel_for(subjects, [&](std::size_t i) {
    const auto user = subject_seed(i);
    const auto other = subject_seed(i + 1 == subjects ? 0 : i + 1);
    const auto session_seed = derive_seed(user, 1);
    const auto rig = make_rig(cfg, user, session_seed);

    const auto own_earlier = derive_seed(user, 2);
    const auto prior_same = calibrate_rig(cfg, make_rig(cfg, user, own_earlier), own_earlier).calibration;
    const auto other_session = derive_seed(other, 3);
    const auto prior_cross = calibrate_rig(cfg, make_rig(cfg, other, other_session), other_session).calibration;

    out.calibrated.sessions[i] =
        run_task_session(cfg, rig, calibrate_rig(cfg, rig, session_seed).calibration, session_seed);
    out.same_user_prior.sessions[i] = run_task_session(cfg, rig, prior_same, session_seed);
    out.cross_user_prior.sessions[i] = run_task_session(cfg, rig, prior_cross, session_seed);
  }, threads);
  summarize(out.calibrated);
  summarize(out.same_user_prior);
  summarize(out.cross_user_prior);
  return out;
}

}  // namespace ledgaze
