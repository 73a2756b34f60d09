#pragma once

// Synthetic stand-in for the LED ring hardware. A rotating corneal sphere
// reflects light from the illuminating LEDs into the sensing LED; the
// response is a cosine lobe of the angle between the gaze axis and the
// half-vector of the illuminator/sensor pair. Everything is seeded and
// reproducible.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <numbers>
#include <optional>
#include <utility>
#include <random>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "ledgaze/core.hpp"
#include "ledgaze/sigproc.hpp"

namespace ledgaze {

// ---------------------------------------------------------------------------
// Layout
// ---------------------------------------------------------------------------

enum class LedRole { sense, illuminate, both };

struct Led {
  std::size_t eye = 0;       ///< 0 left, 1 right
  double angle_rad = 0.0;    ///< position on the ring, in the eye's own frame
  double radius_mm = 18.0;
  LedRole role = LedRole::both;
  double dx_mm = 0.0;        ///< rigid headset displacement
  double dy_mm = 0.0;

  [[nodiscard]] Eigen::Vector3d position(double eye_relief_mm) const {
    return {radius_mm * std::cos(angle_rad) + dx_mm, radius_mm * std::sin(angle_rad) + dy_mm,
            eye_relief_mm};
  }
  [[nodiscard]] bool senses() const { return role != LedRole::illuminate; }
  [[nodiscard]] bool illuminates() const { return role != LedRole::sense; }
};

struct LedLayout {
  PrototypeMode mode = PrototypeMode::prototype1;
  double eye_relief_mm = 25.0;
  std::vector<Led> leds;

  /// Ring layout per eye. prototype1: three groups of sense, sense, illuminate with
  /// sensing LEDs 60 degrees apart and the illuminator between them.
  /// prototype2: six dual-role LEDs 60 degrees apart. The right eye is mirrored.
  static LedLayout make(PrototypeMode mode, double ring_radius_mm = 18.0, double eye_relief_mm = 25.0,
                        std::size_t eyes = 2) {
    using std::numbers::pi;
    LedLayout out;
    out.mode = mode;
    out.eye_relief_mm = eye_relief_mm;
    const double deg = pi / 180.0;
    for (std::size_t eye = 0; eye < eyes; ++eye) {
      auto place = [&](double a, LedRole role) {
        const double angle = eye == 0 ? a : pi - a;
        out.leds.push_back({eye, angle, ring_radius_mm, role, 0.0, 0.0});
      };
      if (mode == PrototypeMode::prototype1) {
        for (int g = 0; g < 3; ++g) {
          const double a0 = 120.0 * g * deg;
          place(a0, LedRole::sense);
          place(a0 + 60.0 * deg, LedRole::sense);
          place(a0 + 30.0 * deg, LedRole::illuminate);
        }
      } else {
        for (int k = 0; k < 6; ++k) place(60.0 * k * deg, LedRole::both);
      }
    }
    return out;
  }

  /// LED index of each channel, in channel order.
  [[nodiscard]] std::vector<std::size_t> sensing_leds() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < leds.size(); ++i) {
      if (leds[i].senses()) out.push_back(i);
    }
    return out;
  }
  [[nodiscard]] std::size_t channel_count() const { return sensing_leds().size(); }

  /// Which LEDs light the scene while `led` senses.
  [[nodiscard]] std::vector<std::size_t> illuminators_for(std::size_t led) const {
    std::vector<std::size_t> out;
    const auto& s = leds.at(led);
    if (mode == PrototypeMode::prototype2) {
      for (std::size_t j = 0; j < leds.size(); ++j) {
        if (j != led && leds[j].eye == s.eye && leds[j].illuminates()) out.push_back(j);
      }
      return out;
    }
    // Dedicated illuminator nearest on the ring.
    std::optional<std::size_t> best;
    double best_d = 0.0;
    for (std::size_t j = 0; j < leds.size(); ++j) {
      if (j == led || leds[j].eye != s.eye || leds[j].role != LedRole::illuminate) continue;
      const double d = std::abs(std::remainder(leds[j].angle_rad - s.angle_rad, 2.0 * std::numbers::pi));
      if (!best || d < best_d) {
        best = j;
        best_d = d;
      }
    }
    if (best) out.push_back(*best);
    return out;
  }

  [[nodiscard]] CaptureSchedule schedule() const {
    std::vector<CaptureStep> steps;
    const auto sensing = sensing_leds();
    for (std::size_t ch = 0; ch < sensing.size(); ++ch) {
      steps.push_back({ch, sensing[ch], illuminators_for(sensing[ch])});
    }
    return CaptureSchedule(std::move(steps), mode);
  }
};

struct HeadsetShift {
  double dx_mm = 0.0;
  double dy_mm = 0.0;
  Micros onset = 0;
};

/// Rigidly translates every LED; the subject is unaffected.
inline LedLayout apply_shift(LedLayout layout, const HeadsetShift& shift) {
  for (auto& led : layout.leds) {
    led.dx_mm += shift.dx_mm;
    led.dy_mm += shift.dy_mm;
  }
  return layout;
}

// ---------------------------------------------------------------------------
// Subject and optics
// ---------------------------------------------------------------------------

struct SubjectProfile {
  double eye_offset_x_mm = 0.0;  ///< eye rotation center relative to the lens axis (mirrored for the right eye)
  double eye_offset_y_mm = 0.0;
  double eye_radius_mm = 12.0;
  std::vector<double> corneal_gain;  ///< one per channel
  double noise_std = 0.01;           ///< normalized units
  double srt_mean_ms = 200.0;
  double srt_std_ms = 30.0;
  double blink_rate_per_min = 8.0;
  double blink_duration_ms = 150.0;
  std::uint64_t seed = 0;

  void validate(std::size_t channels) const {
    require_same_length(corneal_gain.size(), channels, "subject gains");
    for (double g : corneal_gain) {
      if (!(g > 0.0)) throw ArgumentError("corneal gains must be positive");
    }
    if (!(noise_std >= 0.0)) throw ArgumentError("noise_std must be non-negative");
    if (!(srt_mean_ms > 0.0)) throw ArgumentError("srt_mean must be positive");
    if (!(srt_std_ms >= 0.0) || !(blink_rate_per_min >= 0.0) || !(eye_radius_mm > 0.0)) {
      throw ArgumentError("invalid subject parameters");
    }
  }

  /// A plausible random subject. Same seed, same subject.
  static SubjectProfile random(std::uint64_t seed, std::size_t channels) {
    std::mt19937_64 rng(seed ^ 0x5A17C0DE1234ABCDULL);
    std::normal_distribution<double> n01(0.0, 1.0);
    SubjectProfile s;
    s.seed = seed;
    s.eye_offset_x_mm = 1.5 * n01(rng);
    s.eye_offset_y_mm = 1.5 * n01(rng);
    s.eye_radius_mm = std::clamp(12.0 + 0.5 * n01(rng), 10.5, 13.5);
    for (std::size_t i = 0; i < channels; ++i) s.corneal_gain.push_back(std::exp(0.15 * n01(rng)));
    s.srt_mean_ms = std::max(120.0, 200.0 + 25.0 * n01(rng));
    return s;
  }
};

/// Artifact parameters of the reflectance proxy.
struct OpticsModel {
  double brightness = 0.7;          ///< lobe peak per illuminator at reference exposure
  double ambient = 0.0;             ///< illumination-independent term
  double lobe_exponent = 1.0;
  double cornea_offset_ratio = 0.47;  ///< cornea center distance from rotation center / eye radius
  double eyelid_level = 0.6;        ///< closed-lid reflectance at reference exposure
  double reference_exposure_us = 400.0;
};

/// Unit gaze axis for a screen point; x to the right, y up, z toward the display.
inline Eigen::Vector3d gaze_direction(ScreenPoint gaze, const DisplayGeometry& geom) {
  const double deg = std::numbers::pi / 180.0;
  const double az = (gaze.x - geom.width / 2.0) * geom.degrees_per_pixel * deg;
  const double el = -(gaze.y - geom.height / 2.0) * geom.degrees_per_pixel * deg;
  return {std::sin(az) * std::cos(el), std::sin(el), std::cos(az) * std::cos(el)};
}

/// Pre-noise response of one sensing channel at reference exposure with the eye open.
inline double signal_level(const LedLayout& layout, const SubjectProfile& subject, const OpticsModel& optics,
                           const DisplayGeometry& geom, ScreenPoint gaze,
                           std::span<const std::size_t> illuminators_on, std::size_t sensing_channel) {
  const auto sensing = layout.sensing_leds();
  if (sensing_channel >= sensing.size()) throw DimensionError("sensing channel out of range");
  const Led& s = layout.leds[sensing[sensing_channel]];
  const double mirror = s.eye == 0 ? 1.0 : -1.0;
  const Eigen::Vector3d center(mirror * subject.eye_offset_x_mm, subject.eye_offset_y_mm, 0.0);
  const Eigen::Vector3d g = gaze_direction(gaze, geom);
  const Eigen::Vector3d cornea = center + optics.cornea_offset_ratio * subject.eye_radius_mm * g;
  const Eigen::Vector3d to_sensor = (s.position(layout.eye_relief_mm) - cornea).normalized();

  double sum = optics.ambient;
  for (auto j : illuminators_on) {
    const Led& l = layout.leds.at(j);
    if (l.eye != s.eye) continue;
    const Eigen::Vector3d to_light = (l.position(layout.eye_relief_mm) - cornea).normalized();
    const Eigen::Vector3d half = (to_light + to_sensor).normalized();
    const double c = std::clamp(g.dot(half), -1.0, 1.0);
    sum += optics.brightness * std::pow(0.5 * (1.0 + c), optics.lobe_exponent);
  }
  return subject.corneal_gain.at(sensing_channel) * sum;
}

/// One quantized reading. `lid_closure` in [0,1] blends toward the eyelid reflectance.
template <class Rng>
std::uint16_t sense(const LedLayout& layout, const SubjectProfile& subject, const OpticsModel& optics,
                    const DisplayGeometry& geom, ScreenPoint gaze, std::span<const std::size_t> illuminators_on,
                    std::size_t sensing_channel, double exposure_us, Rng& rng, double lid_closure = 0.0,
                    double extra_noise_std = 0.0, std::uint16_t adc_max = kDefaultAdcMax) {
  const double scale = exposure_us / optics.reference_exposure_us;
  double v = scale * signal_level(layout, subject, optics, geom, gaze, illuminators_on, sensing_channel);
  if (lid_closure > 0.0) {
    const double lid = scale * subject.corneal_gain[sensing_channel] * optics.eyelid_level;
    v = (1.0 - lid_closure) * v + lid_closure * lid;
  }
  const double noise = subject.noise_std + extra_noise_std;
  if (noise > 0.0) v += std::normal_distribution<double>(0.0, noise)(rng);
  v = std::clamp(v, 0.0, 1.0);
  return static_cast<std::uint16_t>(std::lround(v * adc_max));
}

// ---------------------------------------------------------------------------
// Scripts and logs
// ---------------------------------------------------------------------------

struct ScriptEvent {
  enum class Kind { fixation, saccade, blink };
  Kind kind = Kind::fixation;
  ScreenPoint target;
  Micros duration = 0;
};

/// Sequential timeline. A fixation or saccade to a new location moves the
/// displayed target; the eye follows one reaction time later.
struct GazeScript {
  std::vector<ScriptEvent> events;

  GazeScript& fixate(ScreenPoint target, Micros duration) {
    events.push_back({ScriptEvent::Kind::fixation, target, duration});
    return *this;
  }
  GazeScript& saccade(ScreenPoint to) {
    events.push_back({ScriptEvent::Kind::saccade, to, 0});
    return *this;
  }
  GazeScript& blink(Micros duration) {
    events.push_back({ScriptEvent::Kind::blink, {}, duration});
    return *this;
  }
  [[nodiscard]] Micros duration() const {
    Micros t = 0;
    for (const auto& e : events) t += e.duration;
    return t;
  }
};

enum class EventKind { blink, target_move };

inline std::string_view to_string(EventKind k) { return k == EventKind::blink ? "blink" : "target_move"; }

/// Blink: [start, end) of lid motion. Target move: start is when the target
/// moved, end is when the gaze landed on it.
struct LogEvent {
  EventKind kind = EventKind::blink;
  Micros start = 0;
  Micros end = 0;
  ScreenPoint target;

  friend bool operator==(const LogEvent&, const LogEvent&) = default;
};

struct LogFrame {
  SensorFrame raw;
  std::vector<double> values;  ///< exposure-compensated, normalized, filtered
  ScreenPoint gaze;            ///< ground truth at frame start
  ScreenPoint target;          ///< displayed target at frame start

  friend bool operator==(const LogFrame&, const LogFrame&) = default;
};

struct SessionLog {
  std::size_t channel_count = 0;
  Micros frame_period_us = 0;
  std::vector<LogFrame> frames;
  std::vector<LogEvent> events;

  friend bool operator==(const SessionLog&, const SessionLog&) = default;
};

// ---------------------------------------------------------------------------
// Simulator
// ---------------------------------------------------------------------------

struct SimConfig {
  DisplayGeometry geom;
  OpticsModel optics;
  SignalConfig signal;
  double blink_ramp_ms = 50.0;
  bool spontaneous_blinks = false;
  std::optional<ScreenPoint> initial_gaze;  ///< display center when unset
};

/// Steps simulated time one capture cycle at a time. Targets, blinks and
/// headset shifts can be scheduled ahead or triggered at the current time,
/// so the same engine serves scripted runs and closed-loop tasks.
class Simulator {
 public:
  Simulator(LedLayout layout, SubjectProfile subject, SimConfig cfg, std::uint64_t seed)
      : layout_(std::move(layout)), subject_(std::move(subject)), cfg_(std::move(cfg)),
        schedule_(layout_.schedule()), chain_(schedule_.channel_count(), chain_config(cfg_)), rng_(seed) {
    init();
  }

  Simulator(LedLayout layout, SubjectProfile subject, CaptureSchedule schedule, SimConfig cfg, std::uint64_t seed)
      : layout_(std::move(layout)), subject_(std::move(subject)), cfg_(std::move(cfg)),
        schedule_(std::move(schedule)), chain_(schedule_.channel_count(), chain_config(cfg_)), rng_(seed) {
    require_same_length(schedule_.channel_count(), layout_.channel_count(), "schedule vs layout");
    init();
  }

  [[nodiscard]] Micros now() const { return now_; }
  [[nodiscard]] Micros frame_period() const { return period_; }
  [[nodiscard]] std::size_t channel_count() const { return schedule_.channel_count(); }
  [[nodiscard]] ScreenPoint gaze() const { return gaze_; }
  [[nodiscard]] ScreenPoint displayed_target() const { return displayed_; }
  [[nodiscard]] const LedLayout& layout() const { return layout_; }
  [[nodiscard]] const SubjectProfile& subject() const { return subject_; }
  [[nodiscard]] const SimConfig& config() const { return cfg_; }
  [[nodiscard]] const SessionLog& log() const { return log_; }
  SessionLog take_log() { return std::exchange(log_, SessionLog{channel_count(), period_, {}, {}}); }

  void show_target(ScreenPoint p) { schedule_target(now_, p); }
  void start_blink(Micros duration) { schedule_blink(now_, duration); }
  void schedule_target(Micros at, ScreenPoint p) { actions_.emplace(at, Action{p}); }
  void schedule_blink(Micros at, Micros duration) { actions_.emplace(at, Action{BlinkAction{duration}}); }
  void schedule_shift(const HeadsetShift& shift) { actions_.emplace(shift.onset, Action{shift}); }
  void set_extra_noise(double std) { extra_noise_ = std; }
  void set_spontaneous_blinks(bool on) { cfg_.spontaneous_blinks = on; }
  [[nodiscard]] bool blinking_at(Micros t) const { return lid_closure(t) > 0.0; }

  /// Simulates one full capture cycle and appends it to the log.
  const LogFrame& step_frame() {
    const Micros start = now_;
    maybe_spontaneous_blink(start);
    LogFrame frame;
    frame.raw.timestamp = start;
    frame.raw.channels.resize(channel_count());
    for (std::size_t i = 0; i < schedule_.cycle_length(); ++i) {
      const Micros ts = start + static_cast<Micros>(i) * step_us_;
      advance_to(ts);
      if (i == 0) {
        frame.gaze = gaze_;
        frame.target = displayed_;
      }
      const auto& step = next_capture(schedule_, i);
      const auto reading =
          sense(layout_, subject_, cfg_.optics, cfg_.geom, gaze_, step.illuminators_on, step.sensing_channel,
                chain_.exposure(step.sensing_channel), rng_, lid_closure(ts), extra_noise_, cfg_.signal.adc_max);
      frame.raw.channels[step.sensing_channel] = reading;
      chain_.capture(step.sensing_channel, reading);
    }
    frame.values = chain_.finish_cycle();
    now_ = start + period_;
    log_.frames.push_back(std::move(frame));
    return log_.frames.back();
  }

  /// Steps whole frames until `t` is reached.
  void run_until(Micros t) {
    while (now_ < t) step_frame();
  }

 private:
  struct BlinkAction {
    Micros duration;
  };
  using Action = std::variant<ScreenPoint, BlinkAction, HeadsetShift>;
  struct Blink {
    Micros start, end;
  };
  struct PendingSaccade {
    Micros at;
    ScreenPoint to;
  };

  static SignalConfig chain_config(SimConfig& cfg) {
    cfg.signal.reference_exposure_us = cfg.optics.reference_exposure_us;
    return cfg.signal;
  }

  void init() {
    cfg_.geom.validate();
    subject_.validate(schedule_.channel_count());
    step_us_ = static_cast<Micros>(std::llround(cfg_.signal.step_duration_us));
    if (step_us_ <= 0) throw ArgumentError("capture step duration must be positive");
    period_ = step_us_ * static_cast<Micros>(schedule_.cycle_length());
    gaze_ = cfg_.initial_gaze.value_or(cfg_.geom.center());
    displayed_ = gaze_;
    log_.channel_count = schedule_.channel_count();
    log_.frame_period_us = period_;
  }

  void advance_to(Micros ts) {
    while (!actions_.empty() && actions_.begin()->first <= ts) {
      auto node = actions_.extract(actions_.begin());
      apply(node.key(), node.mapped());
    }
    while (!pending_.empty() && pending_.front().at <= ts) {
      gaze_ = pending_.front().to;
      pending_.pop_front();
    }
  }

  void apply(Micros at, const Action& a) {
    if (const auto* p = std::get_if<ScreenPoint>(&a)) {
      if (*p == displayed_) return;
      displayed_ = *p;
      double srt_ms = subject_.srt_mean_ms;
      if (subject_.srt_std_ms > 0.0) {
        srt_ms = std::normal_distribution<double>(subject_.srt_mean_ms, subject_.srt_std_ms)(rng_);
      }
      const Micros land = at + static_cast<Micros>(std::llround(std::max(0.0, srt_ms) * 1000.0));
      pending_.push_back({land, *p});
      log_.events.push_back({EventKind::target_move, at, land, *p});
    } else if (const auto* b = std::get_if<BlinkAction>(&a)) {
      blinks_.push_back({at, at + b->duration});
      log_.events.push_back({EventKind::blink, at, at + b->duration, displayed_});
    } else {
      layout_ = apply_shift(std::move(layout_), std::get<HeadsetShift>(a));
    }
  }

  [[nodiscard]] double lid_closure(Micros t) const {
    double c = 0.0;
    const double ramp_us = cfg_.blink_ramp_ms * 1000.0;
    for (auto it = blinks_.rbegin(); it != blinks_.rend(); ++it) {
      if (t < it->start || t >= it->end) continue;
      const double u = static_cast<double>(t - it->start);
      const double d = static_cast<double>(it->end - it->start);
      const double r = std::min(ramp_us, d / 2.0);
      double v = 1.0;
      if (r > 0.0) v = std::min({1.0, u / r, (d - u) / r});
      c = std::max(c, v);
    }
    return c;
  }

  void maybe_spontaneous_blink(Micros t) {
    if (!cfg_.spontaneous_blinks || subject_.blink_rate_per_min <= 0.0) return;
    if (!blinks_.empty() && t < blinks_.back().end) return;
    const double p = subject_.blink_rate_per_min / 60.0 * static_cast<double>(period_) * 1e-6;
    if (std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < p) {
      const auto d = static_cast<Micros>(std::llround(subject_.blink_duration_ms * 1000.0));
      blinks_.push_back({t, t + d});
      log_.events.push_back({EventKind::blink, t, t + d, displayed_});
    }
  }

  LedLayout layout_;
  SubjectProfile subject_;
  SimConfig cfg_;
  CaptureSchedule schedule_;
  SignalChain chain_;
  std::mt19937_64 rng_;
  Micros step_us_ = 0;
  Micros period_ = 0;
  Micros now_ = 0;
  ScreenPoint gaze_;
  ScreenPoint displayed_;
  double extra_noise_ = 0.0;
  std::multimap<Micros, Action> actions_;
  std::deque<PendingSaccade> pending_;
  std::vector<Blink> blinks_;
  SessionLog log_;
};

/// Runs a fixed script from t=0. Unless the config sets an initial gaze, the
/// eye starts on the script's first target.
inline SessionLog run_script(const LedLayout& layout, const SubjectProfile& subject, const GazeScript& script,
                             const CaptureSchedule& schedule, SimConfig cfg, std::uint64_t seed) {
  if (!cfg.initial_gaze) {
    for (const auto& e : script.events) {
      if (e.kind != ScriptEvent::Kind::blink) {
        cfg.initial_gaze = e.target;
        break;
      }
    }
  }
  Simulator sim(layout, subject, schedule, cfg, seed);
  Micros t = 0;
  for (const auto& e : script.events) {
    if (e.duration < 0) throw ArgumentError("negative script event duration");
    switch (e.kind) {
      case ScriptEvent::Kind::fixation:
      case ScriptEvent::Kind::saccade: sim.schedule_target(t, e.target); break;
      case ScriptEvent::Kind::blink: sim.schedule_blink(t, e.duration); break;
    }
    t += e.duration;
  }
  if (t < sim.frame_period()) throw ArgumentError("script is shorter than one capture cycle");
  sim.run_until(t);
  return sim.take_log();
}

/// Random fixations inside the inset rectangle with blinks at the subject's rate.
inline GazeScript make_fixation_script(const DisplayGeometry& geom, const SubjectProfile& subject, std::size_t count,
                                       double min_ms, double max_ms, double margin_px, std::uint64_t seed) {
  if (count == 0 || !(max_ms >= min_ms) || !(min_ms > 0.0)) throw ArgumentError("invalid fixation script spec");
  if (2.0 * margin_px >= geom.width || 2.0 * margin_px >= geom.height) throw ArgumentError("margin too large");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(margin_px, geom.width - margin_px);
  std::uniform_real_distribution<double> uy(margin_px, geom.height - margin_px);
  std::uniform_real_distribution<double> udur(min_ms, max_ms);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const auto blink_us = static_cast<Micros>(std::llround(subject.blink_duration_ms * 1000.0));
  GazeScript script;
  for (std::size_t i = 0; i < count; ++i) {
    const ScreenPoint target{std::round(ux(rng)), std::round(uy(rng))};
    const auto dur = static_cast<Micros>(std::llround(udur(rng) * 1000.0));
    const double p_blink = subject.blink_rate_per_min / 60.0 * static_cast<double>(dur) * 1e-6;
    if (u01(rng) < p_blink && dur > 2 * blink_us) {
      const auto before = static_cast<Micros>(u01(rng) * static_cast<double>(dur - blink_us));
      script.fixate(target, before).blink(blink_us).fixate(target, dur - blink_us - before);
    } else {
      script.fixate(target, dur);
    }
  }
  return script;
}

}  // namespace ledgaze
