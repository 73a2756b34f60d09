#pragma once

// Shared domain types for the LED gaze pipeline: frames, screen geometry,
// calibration sets and the angular error metric.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ledgaze {

/// Microseconds since session start.
using Micros = std::int64_t;

inline constexpr std::uint16_t kDefaultAdcMax = 1023;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct ArgumentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct DegenerateInputError : std::domain_error {
  using std::domain_error::domain_error;
};
struct EstimationFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InsufficientDataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct CalibrationFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EncodingError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct EmptyReportError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require_same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": length mismatch (" + std::to_string(a) +
                         " vs " + std::to_string(b) + ")");
  }
}

// ---------------------------------------------------------------------------
// Frames and screen geometry
// ---------------------------------------------------------------------------

/// One capture vector: M raw ADC readings taken during a single capture cycle.
struct SensorFrame {
  Micros timestamp = 0;
  std::vector<std::uint16_t> channels;

  friend bool operator==(const SensorFrame&, const SensorFrame&) = default;
};

/// Checks a recorded frame sequence against the session invariants:
/// fixed channel count, readings within the ADC range, strictly increasing time.
inline void validate_frames(std::span<const SensorFrame> frames, std::size_t channel_count,
                            std::uint16_t adc_max = kDefaultAdcMax) {
  if (channel_count < 4) throw ArgumentError("sessions need at least 4 channels");
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto& f = frames[i];
    require_same_length(f.channels.size(), channel_count, "frame channels");
    for (auto r : f.channels) {
      if (r > adc_max) throw ArgumentError("reading exceeds ADC range");
    }
    if (i > 0 && f.timestamp <= frames[i - 1].timestamp) {
      throw ArgumentError("frame timestamps must be strictly increasing");
    }
  }
}

/// ADC counts to [0,1] reals.
inline std::vector<double> normalize_frame(const SensorFrame& frame,
                                           std::uint16_t adc_max = kDefaultAdcMax) {
  std::vector<double> out(frame.channels.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<double>(frame.channels[i]) / adc_max;
  }
  return out;
}

/// A location on the virtual image plane, in pixels, origin top-left.
struct ScreenPoint {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const ScreenPoint&, const ScreenPoint&) = default;
};

struct DisplayGeometry {
  double width = 520.0;
  double height = 520.0;
  double degrees_per_pixel = 0.12;

  void validate() const {
    if (!(degrees_per_pixel > 0.0)) throw ArgumentError("degrees_per_pixel must be positive");
    if (!(width > 0.0) || !(height > 0.0)) throw ArgumentError("display size must be positive");
  }
  [[nodiscard]] bool contains(ScreenPoint p) const {
    return p.x >= 0.0 && p.x < width && p.y >= 0.0 && p.y < height;
  }
  [[nodiscard]] ScreenPoint center() const { return {width / 2.0, height / 2.0}; }
  /// Diagonal extent in visual degrees.
  [[nodiscard]] double diagonal_degrees() const {
    return std::hypot(width, height) * degrees_per_pixel;
  }
};

/// Visual angle between two screen points, using the flat pixel-to-degree scale.
inline double angular_error(ScreenPoint estimate, ScreenPoint target, const DisplayGeometry& geom) {
  return geom.degrees_per_pixel * std::hypot(estimate.x - target.x, estimate.y - target.y);
}

// ---------------------------------------------------------------------------
// Calibration set
// ---------------------------------------------------------------------------

struct CalibrationEntry {
  std::vector<double> mean;
  ScreenPoint target;
};

/// Ordered rows of the calibration matrix: mean sensor vector and the
/// screen target the user was fixating while it was recorded.
class CalibrationSet {
 public:
  CalibrationSet() = default;
  explicit CalibrationSet(std::size_t channel_count) : channel_count_(channel_count) {}

  void add(std::vector<double> mean, ScreenPoint target) {
    if (channel_count_ == 0) channel_count_ = mean.size();
    require_same_length(mean.size(), channel_count_, "calibration entry");
    entries_.push_back({std::move(mean), target});
  }

  [[nodiscard]] std::size_t channel_count() const { return channel_count_; }
  [[nodiscard]] std::size_t size() const { return entries_.size(); }
  [[nodiscard]] bool empty() const { return entries_.empty(); }
  [[nodiscard]] const std::vector<CalibrationEntry>& entries() const { return entries_; }
  [[nodiscard]] const CalibrationEntry& operator[](std::size_t i) const { return entries_[i]; }

  /// Keeps only the listed channels, in the listed order.
  [[nodiscard]] CalibrationSet select_channels(std::span<const std::size_t> channels) const {
    CalibrationSet out(channels.size());
    for (const auto& e : entries_) {
      std::vector<double> v;
      v.reserve(channels.size());
      for (auto c : channels) {
        if (c >= channel_count_) throw DimensionError("channel index out of range");
        v.push_back(e.mean[c]);
      }
      out.add(std::move(v), e.target);
    }
    return out;
  }

 private:
  std::size_t channel_count_ = 0;
  std::vector<CalibrationEntry> entries_;
};

struct GazeEstimate {
  Micros timestamp = 0;
  ScreenPoint position;
  std::string method;
};

}  // namespace ledgaze
