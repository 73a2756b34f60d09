#pragma once

// Signal path between LED readings and regression input: time-multiplexed
// capture schedule, per-LED adaptive exposure, and first-order IIR smoothing.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "ledgaze/core.hpp"

namespace ledgaze {

enum class PrototypeMode { prototype1, prototype2 };

inline std::string_view to_string(PrototypeMode m) {
  return m == PrototypeMode::prototype1 ? "prototype1" : "prototype2";
}

inline PrototypeMode prototype_mode_from_string(std::string_view s) {
  if (s == "prototype1") return PrototypeMode::prototype1;
  if (s == "prototype2") return PrototypeMode::prototype2;
  throw ArgumentError("unknown prototype mode: " + std::string(s));
}

// ---------------------------------------------------------------------------
// Capture schedule
// ---------------------------------------------------------------------------

struct CaptureStep {
  std::size_t sensing_channel = 0;
  std::size_t sensing_led = 0;
  std::vector<std::size_t> illuminators_on;  ///< LED indices, sorted
};

/// One full cycle of time-multiplexed captures. Each channel is sensed exactly once.
class CaptureSchedule {
 public:
  CaptureSchedule() = default;
  CaptureSchedule(std::vector<CaptureStep> steps, PrototypeMode mode)
      : steps_(std::move(steps)), mode_(mode) {
    if (steps_.empty()) throw ArgumentError("capture schedule needs at least one step");
    std::vector<int> seen(steps_.size(), 0);
    for (auto& s : steps_) {
      if (s.sensing_channel >= steps_.size()) throw ArgumentError("sensing channel out of range");
      if (++seen[s.sensing_channel] != 1) throw ArgumentError("channel sensed twice in one cycle");
      std::sort(s.illuminators_on.begin(), s.illuminators_on.end());
      if (std::find(s.illuminators_on.begin(), s.illuminators_on.end(), s.sensing_led) !=
          s.illuminators_on.end()) {
        throw ArgumentError("an LED cannot illuminate while it is sensing");
      }
    }
  }

  [[nodiscard]] std::size_t cycle_length() const { return steps_.size(); }
  [[nodiscard]] std::size_t channel_count() const { return steps_.size(); }
  [[nodiscard]] PrototypeMode mode() const { return mode_; }
  [[nodiscard]] const std::vector<CaptureStep>& steps() const { return steps_; }

 private:
  std::vector<CaptureStep> steps_;
  PrototypeMode mode_ = PrototypeMode::prototype1;
};

/// Entry for capture number `step_index`; the schedule repeats every cycle.
inline const CaptureStep& next_capture(const CaptureSchedule& schedule, std::size_t step_index) {
  return schedule.steps()[step_index % schedule.cycle_length()];
}

/// Full capture vectors per second when each of `channels` captures takes `step_duration_us`.
inline double full_frame_rate_hz(double step_duration_us, std::size_t channels) {
  if (!(step_duration_us > 0.0) || channels == 0) throw ArgumentError("invalid capture timing");
  return 1e6 / (static_cast<double>(channels) * step_duration_us);
}

// ---------------------------------------------------------------------------
// Adaptive exposure
// ---------------------------------------------------------------------------

inline constexpr std::uint16_t kNearSaturation = 1000;
inline constexpr std::uint16_t kNearDark = 23;

struct ExposureState {
  std::vector<double> exposure_us;
  double min_us = 50.0;
  double max_us = 800.0;

  ExposureState() = default;
  ExposureState(std::size_t channels, double initial_us, double min, double max)
      : exposure_us(channels, std::clamp(initial_us, min, max)), min_us(min), max_us(max) {
    if (!(min > 0.0) || !(max >= min)) throw ArgumentError("invalid exposure bounds");
  }
};

/// Halves exposure near saturation, doubles it near the dark floor, clamps to bounds.
/// Other channels are untouched.
inline ExposureState adapt_exposure(ExposureState state, std::size_t channel, std::uint16_t reading) {
  if (channel >= state.exposure_us.size()) throw DimensionError("exposure channel out of range");
  double& e = state.exposure_us[channel];
  if (reading >= kNearSaturation) {
    e *= 0.5;
  } else if (reading <= kNearDark) {
    e *= 2.0;
  }
  e = std::clamp(e, state.min_us, state.max_us);
  return state;
}

// ---------------------------------------------------------------------------
// IIR low-pass
// ---------------------------------------------------------------------------

/// y_t = alpha x_t + (1 - alpha) y_{t-1}; the first input initializes the state.
class IirFilter {
 public:
  explicit IirFilter(double alpha = 0.3) : alpha_(alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ArgumentError("IIR alpha must be in (0, 1]");
  }

  [[nodiscard]] double alpha() const { return alpha_; }
  [[nodiscard]] bool primed() const { return !state_.empty(); }
  [[nodiscard]] const std::vector<double>& state() const { return state_; }

  void reset() { state_.clear(); }
  void prime(std::vector<double> y0) { state_ = std::move(y0); }

  const std::vector<double>& step(std::span<const double> x) {
    if (state_.empty()) {
      state_.assign(x.begin(), x.end());
      return state_;
    }
    require_same_length(x.size(), state_.size(), "iir_step");
    for (std::size_t i = 0; i < x.size(); ++i) {
      state_[i] = alpha_ * x[i] + (1.0 - alpha_) * state_[i];
    }
    return state_;
  }

 private:
  double alpha_;
  std::vector<double> state_;
};

inline std::vector<double> iir_step(IirFilter& filter, std::span<const double> frame) {
  return filter.step(frame);
}

// ---------------------------------------------------------------------------
// Signal chain
// ---------------------------------------------------------------------------

struct SignalConfig {
  double step_duration_us = 833.0;
  double reference_exposure_us = 400.0;
  double exposure_min_us = 50.0;
  double exposure_max_us = 800.0;
  double iir_alpha = 0.3;
  std::uint16_t adc_max = kDefaultAdcMax;
};

/// Per-eye-pair processing state: exposure control, exposure compensation,
/// normalization to [0,1] and IIR smoothing.
class SignalChain {
 public:
  SignalChain(std::size_t channels, const SignalConfig& cfg)
      : cfg_(cfg),
        exposure_(channels, cfg.reference_exposure_us, cfg.exposure_min_us, cfg.exposure_max_us),
        filter_(cfg.iir_alpha),
        pending_(channels, 0.0) {}

  [[nodiscard]] double exposure(std::size_t channel) const { return exposure_.exposure_us.at(channel); }
  [[nodiscard]] const ExposureState& exposure_state() const { return exposure_; }
  [[nodiscard]] const SignalConfig& config() const { return cfg_; }

  /// Records one capture taken at the channel's current exposure, then adapts that exposure.
  void capture(std::size_t channel, std::uint16_t reading) {
    const double used = exposure_.exposure_us.at(channel);
    pending_[channel] = static_cast<double>(reading) / cfg_.adc_max * (cfg_.reference_exposure_us / used);
    exposure_ = adapt_exposure(std::move(exposure_), channel, reading);
  }

  /// Closes a capture cycle and returns the filtered, exposure-compensated vector.
  const std::vector<double>& finish_cycle() { return filter_.step(pending_); }

 private:
  SignalConfig cfg_;
  ExposureState exposure_;
  IirFilter filter_;
  std::vector<double> pending_;
};

}  // namespace ledgaze
