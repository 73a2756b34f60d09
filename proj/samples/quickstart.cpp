// Calibrate a simulated user, record a viewing session and report accuracy.

#include <iostream>

#include "ledgaze/ledgaze.hpp"

int main() {
  using namespace ledgaze;

  SessionConfig cfg;
  const std::uint64_t seed = 42;

  const auto session = run_benchmark_session(cfg, seed);
  std::cout << "calibration points: " << session.calibration.size() << "\n";

  const auto gpr = make_estimator(cfg, session.calibration);
  const auto report = evaluate_accuracy(session.log, gpr, cfg.display);
  std::cout << "frames used: " << report.used_frames << " of " << report.total_frames << "\n"
            << "mean error:   " << report.mean << " deg\n"
            << "median error: " << report.median << " deg\n";

  // A single live estimate from the last recorded frame.
  const auto& last = session.log.frames.back();
  const auto p = gpr(last.values);
  std::cout << "last frame: estimate (" << p.x << ", " << p.y << "), target (" << last.target.x << ", "
            << last.target.y << ")\n";
}
