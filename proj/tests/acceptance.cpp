// End-to-end acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "ledgaze/ledgaze.hpp"
#include "oracle.hpp"

using namespace ledgaze;
namespace fs = std::filesystem;

namespace {

struct Result {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string num(double v, int prec = 4) {
  std::ostringstream s;
  s.precision(prec);
  s << v;
  return s.str();
}

// 1
Result gpr_interpolation() {
  const auto t0 = Clock::now();
  SessionConfig cfg;
  cfg.noise_std = 0.0;
  const auto rig = make_rig(cfg, 1, 1);
  const auto cal = calibrate_rig(cfg, rig, 1).calibration;
  const GprModel model(cal, MeasureSpec::minkowski_default(), 1e-8);
  double worst = 0.0;
  for (const auto& e : cal.entries()) {
    const auto p = model.estimate(e.mean).position;
    worst = std::max(worst, std::hypot(p.x - e.target.x, p.y - e.target.y));
  }
  const double dt = seconds_since(t0);
  return {cal.size() == 16 && worst <= 1e-4 && dt < 1.0,
          "P=" + std::to_string(cal.size()) + " max error " + num(worst) + " px in " + num(dt, 3) + " s"};
}

// 2
Result solver_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> psize(2, 50);
  std::uniform_real_distribution<double> u(0.0, 1.0), px(0.0, 520.0);
  long double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = psize(rng);
    CalibrationSet cal;
    std::vector<std::vector<double>> means;
    std::vector<std::pair<double, double>> targets;
    for (std::size_t i = 0; i < p; ++i) {
      std::vector<double> v(12);
      for (auto& x : v) x = u(rng);
      const ScreenPoint t{px(rng), px(rng)};
      cal.add(v, t);
      means.push_back(v);
      targets.emplace_back(t.x, t.y);
    }
    std::vector<double> frame(12);
    for (auto& x : frame) x = u(rng);
    const GprModel model(cal, MeasureSpec::minkowski_default(), 1e-8);
    const auto got = model.estimate(frame).position;
    const auto [ox, oy] = oracle::gpr(means, targets, frame, oracle::default_jitter(means));
    const long double rel = std::hypot(static_cast<long double>(got.x) - ox, static_cast<long double>(got.y) - oy) /
                            std::max(1.0L, std::hypot(ox, oy));
    worst = std::max(worst, rel);
  }
  const double dt = seconds_since(t0);
  return {worst < 1e-9L && dt < 10.0, "max relative error " + num(static_cast<double>(worst)) + " in " + num(dt, 3) + " s"};
}

// 3
Result desk_accuracy() {
  const SessionConfig cfg;
  constexpr std::size_t kSeeds = 5;
  std::vector<AccuracyReport> reports(kSeeds);
  std::vector<std::size_t> sizes(kSeeds);
  parallel_for(kSeeds, [&](std::size_t i) {
    const auto s = run_benchmark_session(cfg, i + 1);
    sizes[i] = s.calibration.size();
    reports[i] = evaluate_accuracy(s.log, gpr_estimator(s.calibration, MeasureSpec::minkowski_default(), cfg.jitter),
                                   cfg.display);
  });
  bool ok = true;
  double worst_mean = 0, worst_median = 0;
  for (std::size_t i = 0; i < kSeeds; ++i) {
    ok = ok && sizes[i] == 82 && reports[i].mean <= 1.6 && reports[i].median <= 1.2;
    worst_mean = std::max(worst_mean, reports[i].mean);
    worst_median = std::max(worst_median, reports[i].median);
  }
  return {ok, "P=82 over " + std::to_string(kSeeds) + " seeds, worst mean " + num(worst_mean) + " deg, worst median " +
                  num(worst_median) + " deg"};
}

// 4
Result estimator_ordering() {
  const auto t0 = Clock::now();
  const SessionConfig cfg;
  const auto suite = compare_suite(cfg, 20, 1);
  const double frac = static_cast<double>(suite.gpr_wins) / static_cast<double>(suite.runs.size());
  const double dt = seconds_since(t0);
  return {frac >= 0.7 && dt < 120.0, "GPR better in " + std::to_string(suite.gpr_wins) + "/" +
                                          std::to_string(suite.runs.size()) + " runs in " + num(dt, 3) + " s"};
}

// 5
Result scenario_ordering() {
  const auto t0 = Clock::now();
  const SessionConfig cfg;
  const auto s = run_scenario_suite(cfg, 20, 7);
  const auto& x = s.cross_user_prior;
  const bool order = s.calibrated.median >= s.same_user_prior.median && s.same_user_prior.median >= x.median;
  const bool online = x.second_half_successes >= x.first_half_successes;
  const double dt = seconds_since(t0);
  return {order && online && dt < 300.0,
          "medians " + num(s.calibrated.median) + " >= " + num(s.same_user_prior.median) + " >= " + num(x.median) +
              ", cross-user halves " + std::to_string(x.first_half_successes) + " -> " +
              std::to_string(x.second_half_successes) + " in " + num(dt, 3) + " s"};
}

// 6
Result exclusion() {
  SessionConfig cfg;
  const auto rig = make_rig(cfg, 3, 3);
  const auto cal = calibrate_rig(cfg, rig, 3).calibration;
  const auto est = gpr_estimator(cal, cfg.measure, cfg.jitter);
  const ScreenPoint a{150, 200}, b{380, 330}, c{420, 120};
  GazeScript clean_script;
  clean_script.fixate(a, 1'500'000).saccade(b).fixate(b, 1'500'000);
  const auto clean = run_script(rig.layout, rig.subject, clean_script, rig.layout.schedule(), rig.sim, 5);

  // Segments recorded from the same subject: a blink at a, and an excursion toward c.
  const auto blink_log = run_script(rig.layout, rig.subject, GazeScript{}.fixate(a, 300'000).blink(150'000).fixate(a, 300'000),
                                    rig.layout.schedule(), rig.sim, 6);
  const auto sacc_log = run_script(rig.layout, rig.subject, GazeScript{}.fixate(a, 300'000).saccade(c).fixate(c, 300'000),
                                   rig.layout.schedule(), rig.sim, 7);
  const auto blink_ex = compute_exclusions(blink_log);
  const auto sacc_ex = compute_exclusions(sacc_log);
  std::vector<LogFrame> blink_frames, sacc_frames;
  for (std::size_t i = 0; i < blink_log.frames.size(); ++i) {
    if (blink_ex[i] == Exclusion::blink) blink_frames.push_back(blink_log.frames[i]);
  }
  for (std::size_t i = 0; i < sacc_log.frames.size(); ++i) {
    if (sacc_ex[i] == Exclusion::saccade) sacc_frames.push_back(sacc_log.frames[i]);
  }

  // Splice them into the clean log, shifting later frames and events.
  const Micros period = clean.frame_period_us;
  SessionLog injected{clean.channel_count, period, {}, {}};
  const std::size_t blink_at = clean.frames.size() / 4, sacc_at = clean.frames.size() * 3 / 4;
  Micros shift = 0;
  auto splice = [&](const std::vector<LogFrame>& seg, EventKind kind, ScreenPoint target, ScreenPoint back) {
    const Micros start = injected.frames.back().raw.timestamp + period;
    for (std::size_t k = 0; k < seg.size(); ++k) {
      LogFrame f = seg[k];
      f.raw.timestamp = start + static_cast<Micros>(k) * period;
      injected.frames.push_back(std::move(f));
    }
    const Micros end = start + static_cast<Micros>(seg.size()) * period;
    injected.events.push_back({kind, start, end, target});
    // The aborted excursion returns to the original target at the resume point.
    if (kind == EventKind::target_move) injected.events.push_back({EventKind::target_move, end, end, back});
    shift += end - start;
  };
  for (std::size_t i = 0; i < clean.frames.size(); ++i) {
    if (i == blink_at) splice(blink_frames, EventKind::blink, a, a);
    if (i == sacc_at) splice(sacc_frames, EventKind::target_move, c, clean.frames[i].target);
    LogFrame f = clean.frames[i];
    f.raw.timestamp += shift;
    injected.frames.push_back(std::move(f));
  }
  for (auto ev : clean.events) {
    const auto idx = static_cast<std::size_t>(std::lower_bound(clean.frames.begin(), clean.frames.end(), ev.start,
                                                               [](const LogFrame& f, Micros t) {
                                                                 return f.raw.timestamp < t;
                                                               }) - clean.frames.begin());
    const Micros s = (idx >= blink_at ? static_cast<Micros>(blink_frames.size()) * period : 0) +
                     (idx >= sacc_at ? static_cast<Micros>(sacc_frames.size()) * period : 0);
    ev.start += s;
    ev.end += s;
    injected.events.push_back(ev);
  }
  std::sort(injected.events.begin(), injected.events.end(), [](auto& x, auto& y) { return x.start < y.start; });

  const auto r0 = evaluate_accuracy(clean, est, cfg.display);
  const auto r1 = evaluate_accuracy(injected, est, cfg.display);
  auto rel = [](double x, double y) { return std::abs(x - y) / std::max(std::abs(x), 1e-300); };
  const double worst = std::max({rel(r0.mean, r1.mean), rel(r0.median, r1.median), rel(r0.stddev, r1.stddev)});
  const bool injected_ok = !blink_frames.empty() && !sacc_frames.empty() &&
                           r1.blink_excluded == r0.blink_excluded + blink_frames.size() &&
                           r1.saccade_excluded == r0.saccade_excluded + sacc_frames.size();
  return {injected_ok && worst < 1e-12 && r0.histogram == r1.histogram,
          "injected " + std::to_string(blink_frames.size()) + " blink + " + std::to_string(sacc_frames.size()) +
              " saccade frames, max relative change " + num(worst)};
}

// 7
Result kernel_identities() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<std::size_t> len(1, 24);
  std::size_t bad = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto n = len(rng);
    std::vector<double> a(n), b(n), w(n, 1.0);
    for (auto& x : a) x = u(rng);
    for (auto& x : b) x = u(rng);
    if (minkowski(a, b, 1.0, w) != manhattan(a, b)) ++bad;
    for (auto k : {MeasureKind::minkowski, MeasureKind::manhattan, MeasureKind::canberra, MeasureKind::cosine,
                   MeasureKind::rbf}) {
      const auto spec = MeasureSpec::of(k);
      if (evaluate(spec, a, b) != evaluate(spec, b, a)) ++bad;
      if (evaluate(spec, a, a) != (k == MeasureKind::rbf ? 1.0 : 0.0)) ++bad;
    }
    if (minkowski(a, b, 3.0, w) != minkowski(b, a, 3.0, w) || minkowski(a, a, 3.0, w) != 0.0) ++bad;
  }
  return {bad == 0, std::to_string(bad) + " violations over 10000 pairs"};
}

// 8
Result wire_roundtrip() {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> reading(0, 1023), byte(0, 255), gap(0, 8);
  std::uniform_int_distribution<std::uint32_t> ts;
  auto random_frame = [&](std::size_t m) {
    SensorFrame f{ts(rng), {}};
    for (std::size_t i = 0; i < m; ++i) f.channels.push_back(static_cast<std::uint16_t>(reading(rng)));
    return f;
  };
  std::size_t roundtrip_bad = 0;
  std::uniform_int_distribution<std::size_t> msize(1, 255);
  for (int i = 0; i < 10000; ++i) {
    const auto f = random_frame(msize(rng));
    const auto d = wire::decode(wire::encode(f));
    if (d.size() != 1 || d[0] != f) ++roundtrip_bad;
  }
  std::vector<std::uint8_t> stream;
  std::vector<SensorFrame> intact;
  std::size_t corrupted = 0;
  std::bernoulli_distribution flip(0.1);
  for (int i = 0; i < 2000; ++i) {
    for (int g = gap(rng); g > 0; --g) stream.push_back(static_cast<std::uint8_t>(byte(rng)));
    const auto f = random_frame(12);
    auto b = wire::encode(f);
    if (flip(rng)) {
      const auto bit = std::uniform_int_distribution<std::size_t>(0, b.size() * 8 - 1)(rng);
      b[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
      ++corrupted;
    } else {
      intact.push_back(f);
    }
    stream.insert(stream.end(), b.begin(), b.end());
  }
  wire::DecoderStats stats;
  const auto got = wire::decode(stream, &stats, 12);
  const bool stream_ok = got == intact && stats.skipped_bytes > 0 && stats.resyncs > 0;
  return {roundtrip_bad == 0 && stream_ok,
          "10000 round trips (" + std::to_string(roundtrip_bad) + " bad); stream " + std::to_string(got.size()) + "/" +
              std::to_string(intact.size()) + " intact frames recovered, " + std::to_string(corrupted) +
              " corrupted dropped, " + std::to_string(stats.resyncs) + " resyncs, " +
              std::to_string(stats.skipped_bytes) + " bytes skipped"};
}

// 9
Result iir_properties() {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_dc = 0.0, worst_rate = 0.0;
  for (double alpha : {0.05, 0.3, 0.5, 0.9, 1.0}) {
    std::vector<double> x(12);
    for (auto& v : x) v = u(rng);
    IirFilter f(alpha);
    f.prime(std::vector<double>(12, 0.0));
    std::vector<double> y;
    for (int n = 0; n < 2000; ++n) y = f.step(x);
    for (std::size_t i = 0; i < x.size(); ++i) worst_dc = std::max(worst_dc, std::abs(y[i] / x[i] - 1.0));

    IirFilter s(alpha);
    s.prime({0.0});
    const std::vector<double> one{1.0};
    for (int n = 1; n <= 40; ++n) {
      const double got = s.step(one)[0];
      const double closed = 1.0 - std::pow(1.0 - alpha, n);
      worst_rate = std::max(worst_rate, std::abs(got - closed));
    }
  }
  return {worst_dc <= 1e-12 && worst_rate <= 1e-12,
          "DC gain error " + num(worst_dc) + ", step response vs 1-(1-a)^n " + num(worst_rate)};
}

// 10
Result cli_determinism(const std::string& cli, const std::string& config, const fs::path& work) {
  const std::vector<std::pair<std::string, std::string>> cmds{
      {"calibrate", ""},
      {"run", ""},
      {"eval", "--trace"},
      {"sweep", "--axis calibration_points --values 4,9,16"},
      {"compare", "--all-measures"},
      {"scenarios", "--scenario all --sessions 2"},
      {"wire-test", ""},
  };
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  std::size_t files = 0;
  std::vector<std::string> problems;
  for (const auto& [cmd, extra] : cmds) {
    std::map<std::string, std::string> first;
    for (int run = 0; run < 2; ++run) {
      const auto out = work / cmd / (run ? "b" : "a");
      fs::remove_all(out);
      const auto line = "\"" + cli + "\" " + cmd + " \"" + config + "\" --seed 5 --out \"" + out.string() + "\" " +
                        extra + " > \"" + (work / (cmd + ".log")).string() + "\" 2>&1";
      if (std::system(line.c_str()) != 0) {
        problems.push_back(cmd + " exited nonzero");
        break;
      }
      std::map<std::string, std::string> contents;
      for (const auto& e : fs::recursive_directory_iterator(out)) {
        if (e.is_regular_file()) contents[fs::relative(e.path(), out).string()] = slurp(e.path());
      }
      if (run == 0) {
        first = std::move(contents);
        if (first.empty()) problems.push_back(cmd + " wrote nothing");
      } else if (contents != first) {
        problems.push_back(cmd + " differs between runs");
      } else {
        files += contents.size();
      }
    }
  }
  std::string detail = std::to_string(cmds.size()) + " commands, " + std::to_string(files) + " files byte-identical";
  for (const auto& p : problems) detail += "; " + p;
  return {problems.empty(), detail};
}

// 11
Result sweep_trends() {
  const SessionConfig cfg;
  std::vector<int> leds;
  for (int v = 4; v <= 12; ++v) leds.push_back(v);
  const std::vector<int> points{4, 9, 16, 25};
  constexpr std::uint64_t kSeeds = 3;
  std::vector<SweepReport> led_reports(kSeeds), point_reports(kSeeds);
  parallel_for(2 * kSeeds, [&](std::size_t i) {
    if (i < kSeeds) {
      led_reports[i] = sweep(cfg, SweepAxis::led_count, leds, i + 1);
    } else {
      point_reports[i - kSeeds] = sweep(cfg, SweepAxis::calibration_points, points, i - kSeeds + 1);
    }
  });
  double worst_rise = -1e9;
  std::string detail;
  auto check = [&](const SweepReport& r, const char* name) {
    std::string means;
    for (std::size_t k = 0; k < r.rows.size(); ++k) {
      means += (k ? " " : "") + num(r.rows[k].report.mean, 3);
      if (k) worst_rise = std::max(worst_rise, r.rows[k].report.mean - r.rows[k - 1].report.mean);
    }
    if (detail.size() < 200) detail += std::string(detail.empty() ? "" : "; ") + name + " [" + means + "]";
  };
  for (const auto& r : led_reports) check(r, "leds");
  for (const auto& r : point_reports) check(r, "points");
  return {worst_rise <= 0.1, "largest step increase " + num(worst_rise, 3) + " deg over " + std::to_string(kSeeds) +
                                 " seeds per axis; " + detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ledgaze acceptance run"};
  std::string cli, config, workdir = "acceptance_work";
  app.add_option("--cli", cli, "path to the ledgaze executable")->required();
  app.add_option("--config", config, "config for the CLI runs")->required();
  app.add_option("--workdir", workdir, "scratch directory");
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(workdir);

  const std::vector<std::pair<std::string, std::function<Result()>>> criteria{
      {"GPR interpolation exactness", gpr_interpolation},
      {"solver matches elimination oracle", solver_oracle},
      {"desk-scale accuracy", desk_accuracy},
      {"GPR beats SVR", estimator_ordering},
      {"scenario ordering and online training", scenario_ordering},
      {"blink and saccade exclusion", exclusion},
      {"kernel identities", kernel_identities},
      {"wire round trip and resync", wire_roundtrip},
      {"IIR DC gain and convergence", iir_properties},
      {"CLI determinism", [&] { return cli_determinism(cli, config, workdir); }},
      {"sweep trends", sweep_trends},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Result r;
    try {
      r = criteria[i].second();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    failures += r.pass ? 0 : 1;
    std::printf("[%s] criterion %zu: %s: %s\n", r.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                r.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
