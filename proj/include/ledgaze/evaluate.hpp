#pragma once

// Accuracy evaluation over a recorded session: frame exclusion around blinks
// and target moves, error statistics, histograms, and paired comparisons.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "ledgaze/core.hpp"
#include "ledgaze/eyesim.hpp"

namespace ledgaze {

/// Maps a processed frame vector to a screen position. May throw EstimationFailure.
using Estimator = std::function<ScreenPoint(std::span<const double>)>;

enum class Exclusion : std::uint8_t { none = 0, blink = 1, saccade = 2 };

/// Per-frame exclusion. A frame is a blink frame when its capture cycle
/// overlaps a blink interval. After a target move, frames are excluded until
/// the first frame whose ground-truth gaze is on the new target.
inline std::vector<Exclusion> compute_exclusions(const SessionLog& log) {
  const auto& frames = log.frames;
  std::vector<Exclusion> out(frames.size(), Exclusion::none);
  for (const auto& ev : log.events) {
    if (ev.kind == EventKind::blink) {
      for (std::size_t i = 0; i < frames.size(); ++i) {
        const Micros a = frames[i].raw.timestamp;
        const Micros b = a + log.frame_period_us;
        if (a < ev.end && b > ev.start) out[i] = Exclusion::blink;
      }
    }
  }
  std::vector<Micros> moves;
  for (const auto& ev : log.events) {
    if (ev.kind == EventKind::target_move) moves.push_back(ev.start);
  }
  std::sort(moves.begin(), moves.end());
  for (const auto& ev : log.events) {
    if (ev.kind != EventKind::target_move) continue;
    // A later move that supersedes this one opens its own window.
    const auto nxt = std::upper_bound(moves.begin(), moves.end(), ev.start);
    const Micros stop = nxt == moves.end() ? std::numeric_limits<Micros>::max() : *nxt;
    auto it = std::lower_bound(frames.begin(), frames.end(), ev.start,
                               [](const LogFrame& f, Micros t) { return f.raw.timestamp < t; });
    for (; it != frames.end() && it->raw.timestamp < stop; ++it) {
      if (it->gaze == ev.target) break;
      auto& x = out[static_cast<std::size_t>(it - frames.begin())];
      if (x == Exclusion::none) x = Exclusion::saccade;
    }
  }
  return out;
}

struct TargetBreakdown {
  ScreenPoint target;
  std::size_t frames = 0;
  double mean = 0.0;
};

struct AccuracyReport {
  std::size_t total_frames = 0;
  std::size_t used_frames = 0;
  std::size_t blink_excluded = 0;
  std::size_t saccade_excluded = 0;
  std::size_t failed_estimates = 0;  ///< counted at the display diagonal
  double mean = 0.0;
  double median = 0.0;
  double stddev = 0.0;
  double bin_width = 0.25;
  std::vector<double> histogram;  ///< normalized, sums to 1
  std::vector<TargetBreakdown> per_target;
  std::vector<double> frame_errors;      ///< NaN for excluded frames
  std::vector<ScreenPoint> estimates;    ///< one per frame, excluded included
  std::vector<Exclusion> exclusions;
};

struct ErrorStats {
  double mean = 0.0;
  double median = 0.0;
  double stddev = 0.0;
};

inline ErrorStats error_stats(std::vector<double> v) {
  if (v.empty()) throw EmptyReportError("no samples");
  ErrorStats s;
  const auto n = static_cast<double>(v.size());
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - s.mean) * (x - s.mean);
  s.stddev = std::sqrt(ss / n);
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  s.median = v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
  return s;
}

inline std::vector<double> normalized_histogram(std::span<const double> values, double bin_width) {
  if (!(bin_width > 0.0)) throw ArgumentError("histogram bin width must be positive");
  std::vector<double> h;
  for (double x : values) {
    const auto bin = static_cast<std::size_t>(std::floor(x / bin_width));
    if (bin >= h.size()) h.resize(bin + 1, 0.0);
    h[bin] += 1.0;
  }
  for (auto& c : h) c /= static_cast<double>(values.size());
  return h;
}

/// Runs the estimator on every frame and reports error statistics over the
/// frames that are not excluded. Errors are measured against the displayed target.
inline AccuracyReport evaluate_accuracy(const SessionLog& log, const Estimator& estimator,
                                        const DisplayGeometry& geom, double bin_width = 0.25) {
  geom.validate();
  AccuracyReport r;
  r.bin_width = bin_width;
  r.total_frames = log.frames.size();
  r.exclusions = compute_exclusions(log);
  r.frame_errors.assign(log.frames.size(), std::numeric_limits<double>::quiet_NaN());
  r.estimates.resize(log.frames.size());

  std::vector<double> used;
  for (std::size_t i = 0; i < log.frames.size(); ++i) {
    const auto& f = log.frames[i];
    bool failed = false;
    try {
      r.estimates[i] = estimator(f.values);
    } catch (const EstimationFailure&) {
      failed = true;
      r.estimates[i] = {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
    }
    switch (r.exclusions[i]) {
      case Exclusion::blink: ++r.blink_excluded; continue;
      case Exclusion::saccade: ++r.saccade_excluded; continue;
      case Exclusion::none: break;
    }
    double err = 0.0;
    if (failed) {
      ++r.failed_estimates;
      err = geom.diagonal_degrees();
    } else {
      err = angular_error(r.estimates[i], f.target, geom);
    }
    r.frame_errors[i] = err;
    used.push_back(err);

    auto pt = std::find_if(r.per_target.begin(), r.per_target.end(),
                           [&](const TargetBreakdown& t) { return t.target == f.target; });
    if (pt == r.per_target.end()) {
      r.per_target.push_back({f.target, 0, 0.0});
      pt = std::prev(r.per_target.end());
    }
    ++pt->frames;
    pt->mean += err;
  }
  if (used.empty()) throw EmptyReportError("every frame was excluded");
  for (auto& t : r.per_target) t.mean /= static_cast<double>(t.frames);
  r.used_frames = used.size();
  r.histogram = normalized_histogram(used, bin_width);
  const auto s = error_stats(std::move(used));
  r.mean = s.mean;
  r.median = s.median;
  r.stddev = s.stddev;
  return r;
}

/// Frame-by-frame comparison of two reports on the same log (a minus b).
struct PairedComparison {
  std::size_t frames = 0;
  double mean_difference = 0.0;
  double median_difference = 0.0;
  std::size_t a_better = 0;
  std::size_t b_better = 0;
};

inline PairedComparison compare_reports(const AccuracyReport& a, const AccuracyReport& b) {
  require_same_length(a.frame_errors.size(), b.frame_errors.size(), "paired comparison");
  PairedComparison p;
  std::vector<double> diffs;
  for (std::size_t i = 0; i < a.frame_errors.size(); ++i) {
    const double ea = a.frame_errors[i], eb = b.frame_errors[i];
    if (std::isnan(ea) || std::isnan(eb)) continue;
    diffs.push_back(ea - eb);
    if (ea < eb) ++p.a_better;
    if (eb < ea) ++p.b_better;
  }
  if (diffs.empty()) throw EmptyReportError("no frames in common");
  p.frames = diffs.size();
  const auto s = error_stats(std::move(diffs));
  p.mean_difference = s.mean;
  p.median_difference = s.median;
  return p;
}

}  // namespace ledgaze
