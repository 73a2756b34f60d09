#pragma once

// Calibration matrix construction: grid scheduling, dwell aggregation with
// a per-channel spread check, and the retry-once calibration run.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ledgaze/core.hpp"

namespace ledgaze {

struct CalibrationGridSpec {
  int rows = 4;
  int cols = 4;
  double margin = 65.0;  ///< pixels inset from every display edge

  void validate(const DisplayGeometry& geom) const {
    if (rows < 2 || rows > 8 || cols < 2 || cols > 8) throw ArgumentError("grid rows/cols must be in [2, 8]");
    if (margin < 0.0 || 2.0 * margin >= geom.width || 2.0 * margin >= geom.height) {
      throw ArgumentError("calibration grid does not fit in the display");
    }
  }
  [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(rows * cols); }
};

struct DwellConfig {
  double fix_duration_ms = 1500.0;
  double sample_interval_ms = 10.0;
  double variance_threshold = 0.05;  ///< max per-channel sample std, normalized units
  double settle_ms = 400.0;          ///< discarded after target onset while the eye lands

  void validate() const {
    if (!(sample_interval_ms > 0.0) || fix_duration_ms < 2.0 * sample_interval_ms) {
      throw ArgumentError("dwell must cover at least two sample intervals");
    }
    if (!(variance_threshold > 0.0)) throw ArgumentError("variance threshold must be positive");
    if (settle_ms < 0.0) throw ArgumentError("settle time must be non-negative");
  }
};

/// Grid points in row-major order.
inline std::vector<ScreenPoint> grid_points(const CalibrationGridSpec& grid, const DisplayGeometry& geom) {
  grid.validate(geom);
  std::vector<ScreenPoint> pts;
  const double w = geom.width - 2.0 * grid.margin;
  const double h = geom.height - 2.0 * grid.margin;
  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) {
      pts.push_back({grid.margin + w * c / (grid.cols - 1), grid.margin + h * r / (grid.rows - 1)});
    }
  }
  return pts;
}

/// Every grid point once, in a seeded random order.
inline std::vector<ScreenPoint> schedule_targets(const CalibrationGridSpec& grid, const DisplayGeometry& geom,
                                                 std::uint64_t seed) {
  auto pts = grid_points(grid, geom);
  std::mt19937_64 rng(seed);
  std::shuffle(pts.begin(), pts.end(), rng);
  return pts;
}

// ---------------------------------------------------------------------------
// Dwell aggregation
// ---------------------------------------------------------------------------

struct AggregateResult {
  std::vector<double> mean;
  std::vector<double> stddev;
  std::vector<std::size_t> offending;  ///< channels whose spread exceeded the threshold

  [[nodiscard]] bool accepted() const { return offending.empty(); }
};

/// Per-channel mean of the samples, rejected when any channel's sample
/// standard deviation (n-1) exceeds the threshold.
inline AggregateResult aggregate_point(std::span<const std::vector<double>> frames, const DwellConfig& config) {
  if (frames.size() < 2) throw InsufficientDataError("aggregation needs at least two frames");
  const std::size_t m = frames.front().size();
  AggregateResult out;
  out.mean.assign(m, 0.0);
  out.stddev.assign(m, 0.0);
  for (const auto& f : frames) {
    require_same_length(f.size(), m, "aggregate_point");
    for (std::size_t i = 0; i < m; ++i) out.mean[i] += f[i];
  }
  const auto n = static_cast<double>(frames.size());
  for (auto& v : out.mean) v /= n;
  for (const auto& f : frames) {
    for (std::size_t i = 0; i < m; ++i) {
      const double d = f[i] - out.mean[i];
      out.stddev[i] += d * d;
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    out.stddev[i] = std::sqrt(out.stddev[i] / (n - 1.0));
    // Clamp rounding so the mean stays inside the observed range.
    double lo = frames.front()[i], hi = lo;
    for (const auto& f : frames) {
      lo = std::min(lo, f[i]);
      hi = std::max(hi, f[i]);
    }
    out.mean[i] = std::clamp(out.mean[i], lo, hi);
    if (out.stddev[i] > config.variance_threshold) out.offending.push_back(i);
  }
  return out;
}

inline AggregateResult aggregate_point(std::span<const SensorFrame> frames, const DwellConfig& config,
                                       std::uint16_t adc_max = kDefaultAdcMax) {
  std::vector<std::vector<double>> v;
  v.reserve(frames.size());
  for (const auto& f : frames) v.push_back(normalize_frame(f, adc_max));
  return aggregate_point(std::span<const std::vector<double>>(v), config);
}

// ---------------------------------------------------------------------------
// Calibration run
// ---------------------------------------------------------------------------

struct TaggedFrame {
  Micros timestamp = 0;
  std::vector<double> values;
};

/// Frames recorded while one target was displayed, starting at its onset.
struct DwellCapture {
  Micros onset = 0;
  std::vector<TaggedFrame> frames;
};

/// Anything that can show a target and hand back the frames captured while
/// the user looked at it for settle + fix duration.
class DwellSource {
 public:
  virtual ~DwellSource() = default;
  virtual DwellCapture dwell(ScreenPoint target, const DwellConfig& config) = 0;
};

/// Samples a capture at the dwell interval, skipping the settle period.
inline std::vector<std::vector<double>> sample_dwell(const DwellCapture& capture, const DwellConfig& config) {
  std::vector<std::vector<double>> out;
  const auto first = capture.onset + static_cast<Micros>(std::llround(config.settle_ms * 1000.0));
  const auto last = first + static_cast<Micros>(std::llround(config.fix_duration_ms * 1000.0));
  const auto step = static_cast<Micros>(std::llround(config.sample_interval_ms * 1000.0));
  std::size_t idx = 0;
  std::size_t prev = capture.frames.size();
  for (Micros instant = first; instant < last; instant += step) {
    while (idx < capture.frames.size() && capture.frames[idx].timestamp < instant) ++idx;
    if (idx >= capture.frames.size()) break;
    if (idx != prev && capture.frames[idx].timestamp < last) out.push_back(capture.frames[idx].values);
    prev = idx;
  }
  return out;
}

struct CalibrationOutcome {
  CalibrationSet calibration;
  std::vector<ScreenPoint> dropped;
  std::vector<std::string> warnings;
  std::size_t attempts = 0;
};

/// Shows every grid target once in seeded order. A rejected target goes to
/// the back of the queue once; if it fails again it is dropped with a warning.
inline CalibrationOutcome run_calibration(DwellSource& source, const CalibrationGridSpec& grid,
                                          const DisplayGeometry& geom, const DwellConfig& config,
                                          std::uint64_t seed) {
  config.validate();
  const auto targets = schedule_targets(grid, geom, seed);
  CalibrationOutcome out;
  std::vector<ScreenPoint> retry;

  auto attempt = [&](ScreenPoint target) {
    ++out.attempts;
    const auto samples = sample_dwell(source.dwell(target, config), config);
    auto agg = aggregate_point(std::span<const std::vector<double>>(samples), config);
    if (agg.accepted()) out.calibration.add(std::move(agg.mean), target);
    return agg;
  };

  for (auto t : targets) {
    if (!attempt(t).accepted()) retry.push_back(t);
  }
  for (auto t : retry) {
    const auto agg = attempt(t);
    if (!agg.accepted()) {
      out.dropped.push_back(t);
      std::string chans;
      for (auto c : agg.offending) chans += (chans.empty() ? "" : ",") + std::to_string(c);
      out.warnings.push_back("dropped target (" + std::to_string(t.x) + ", " + std::to_string(t.y) +
                             ") after retry; unstable channels " + chans);
    }
  }
  if (out.calibration.empty()) throw CalibrationFailure("every calibration target was rejected");
  return out;
}

}  // namespace ledgaze
