#pragma once

// Gaze regression from a calibration set: kernel-weighted (SVR-form) and
// GPR-form estimators, the sigma grid search, and online augmentation.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ledgaze/core.hpp"
#include "ledgaze/kernels.hpp"

namespace ledgaze {

/// k_p = kappa(frame, mean_p) for every calibration entry, in calibration order.
inline std::vector<double> similarity_vector(std::span<const double> frame,
                                             const CalibrationSet& calibration,
                                             const MeasureSpec& measure) {
  require_same_length(frame.size(), calibration.channel_count(), "similarity_vector");
  std::vector<double> k;
  k.reserve(calibration.size());
  for (const auto& e : calibration.entries()) k.push_back(evaluate(measure, frame, e.mean));
  return k;
}

/// Returns a copy of `calibration` with one more entry appended.
inline CalibrationSet augment(const CalibrationSet& calibration, std::vector<double> frame,
                              ScreenPoint true_target) {
  CalibrationSet out = calibration;
  out.add(std::move(frame), true_target);
  return out;
}

// ---------------------------------------------------------------------------
// GPR form: e = k^T (C + eps I)^-1 U
// ---------------------------------------------------------------------------

/// Holds the calibration, the pairwise matrix C and its LU factorization.
/// Const member functions are safe to call concurrently; augment() is not.
class GprModel {
 public:
  static constexpr double kMaxJitterScale = 1e-2;
  static constexpr double kMinRcond = 1e-13;

  GprModel(CalibrationSet calibration, MeasureSpec measure, double jitter_scale = 1e-8)
      : calibration_(std::move(calibration)), measure_(std::move(measure)),
        jitter_scale_(jitter_scale) {
    if (!(jitter_scale_ > 0.0)) throw ArgumentError("jitter must be positive");
    if (calibration_.empty()) throw ArgumentError("GPR needs at least one calibration entry");
    measure_.validate(calibration_.channel_count());
    factorize();
  }

  [[nodiscard]] const CalibrationSet& calibration() const { return calibration_; }
  [[nodiscard]] const MeasureSpec& measure() const { return measure_; }
  [[nodiscard]] const Eigen::MatrixXd& covariance() const { return cov_; }
  /// Absolute diagonal term actually added to C.
  [[nodiscard]] double jitter() const { return jitter_; }
  [[nodiscard]] bool usable() const { return usable_; }

  /// Solves (C + eps I) z = k.
  [[nodiscard]] Eigen::VectorXd solve(std::span<const double> k) const {
    if (!usable_) throw EstimationFailure("calibration matrix is singular even with maximal jitter");
    require_same_length(k.size(), calibration_.size(), "gpr solve");
    Eigen::Map<const Eigen::VectorXd> kv(k.data(), static_cast<Eigen::Index>(k.size()));
    return lu_.solve(kv);
  }

  [[nodiscard]] GazeEstimate estimate(std::span<const double> frame, Micros timestamp = 0) const {
    const auto k = similarity_vector(frame, calibration_, measure_);
    const Eigen::VectorXd z = solve(k);
    const Eigen::RowVector2d e = z.transpose() * targets_;
    if (!e.allFinite()) throw EstimationFailure("non-finite GPR estimate");
    return {timestamp, {e(0), e(1)}, "gpr-" + std::string(to_string(measure_.kind))};
  }

  /// Appends an entry and refactorizes.
  void augment(std::vector<double> frame, ScreenPoint true_target) {
    calibration_.add(std::move(frame), true_target);
    factorize();
  }

 private:
  void factorize() {
    const auto n = static_cast<Eigen::Index>(calibration_.size());
    cov_.resize(n, n);
    targets_.resize(n, 2);
    const auto& entries = calibration_.entries();
    for (Eigen::Index i = 0; i < n; ++i) {
      targets_(i, 0) = entries[i].target.x;
      targets_(i, 1) = entries[i].target.y;
      for (Eigen::Index j = 0; j < n; ++j) cov_(i, j) = evaluate(measure_, entries[i].mean, entries[j].mean);
    }
    double scale = cov_.cwiseAbs().mean();
    if (!(scale > 0.0) || !std::isfinite(scale)) scale = 1.0;

    usable_ = false;
    for (double f = jitter_scale_; f <= kMaxJitterScale * (1.0 + 1e-9); f *= 10.0) {
      jitter_ = f * scale;
      Eigen::MatrixXd a = cov_;
      a.diagonal().array() += jitter_;
      lu_.compute(a);
      if (lu_.rcond() >= kMinRcond && lu_.matrixLU().allFinite()) {
        usable_ = true;
        break;
      }
    }
  }

  CalibrationSet calibration_;
  MeasureSpec measure_;
  double jitter_scale_;
  double jitter_ = 0.0;
  bool usable_ = false;
  Eigen::MatrixXd cov_;
  Eigen::Matrix<double, Eigen::Dynamic, 2> targets_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

inline GazeEstimate gpr_estimate(const GprModel& model, std::span<const double> frame,
                                 Micros timestamp = 0) {
  return model.estimate(frame, timestamp);
}

// ---------------------------------------------------------------------------
// SVR form: e = k^T U, optionally normalized by sum(k)
// ---------------------------------------------------------------------------

struct SvrModel {
  CalibrationSet calibration;
  double sigma = 0.1;
  bool normalize = true;
  bool rbf_squared = false;
};

inline GazeEstimate svr_estimate(const SvrModel& model, std::span<const double> frame,
                                 Micros timestamp = 0) {
  MeasureSpec spec = MeasureSpec::rbf_with(model.sigma);
  spec.rbf_squared = model.rbf_squared;
  spec.validate();
  const auto k = similarity_vector(frame, model.calibration, spec);
  double ex = 0.0, ey = 0.0, sum = 0.0;
  const auto& entries = model.calibration.entries();
  for (std::size_t p = 0; p < k.size(); ++p) {
    ex += k[p] * entries[p].target.x;
    ey += k[p] * entries[p].target.y;
    sum += k[p];
  }
  if (model.normalize) {
    if (!(sum > std::numeric_limits<double>::min())) {
      throw EstimationFailure("all RBF weights vanished; sigma too small for this frame");
    }
    ex /= sum;
    ey /= sum;
  }
  return {timestamp, {ex, ey}, "svr-rbf"};
}

// ---------------------------------------------------------------------------
// Sigma selection
// ---------------------------------------------------------------------------

struct ValidationSample {
  std::vector<double> frame;
  ScreenPoint target;
};

namespace detail {

inline double svr_mean_error(const SvrModel& model, std::span<const ValidationSample> samples,
                             const DisplayGeometry& geom) {
  double total = 0.0;
  for (const auto& s : samples) {
    try {
      total += angular_error(svr_estimate(model, s.frame).position, s.target, geom);
    } catch (const EstimationFailure&) {
      return std::numeric_limits<double>::infinity();
    }
  }
  return total / static_cast<double>(samples.size());
}

inline double pick_sigma(std::span<const double> grid, const std::vector<double>& errors) {
  double best_sigma = 0.0;
  double best_err = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double e = errors[i];
    if (e < best_err || (e == best_err && std::isfinite(e) && grid[i] < best_sigma)) {
      best_err = e;
      best_sigma = grid[i];
    }
  }
  if (std::isinf(best_err)) throw EstimationFailure("every sigma in the grid failed validation");
  return best_sigma;
}

inline void check_grid(std::span<const double> grid) {
  if (grid.empty()) throw ArgumentError("sigma grid is empty");
  for (double s : grid) {
    if (!(s > 0.0)) throw ArgumentError("sigma grid values must be positive");
  }
}

}  // namespace detail

/// Grid sigma minimizing mean angular error of svr_estimate on a held-out
/// validation set. Ties go to the smaller sigma.
inline double grid_search_sigma(const CalibrationSet& calibration,
                                std::span<const ValidationSample> validation,
                                std::span<const double> grid, const DisplayGeometry& geom = {},
                                bool normalize = true) {
  detail::check_grid(grid);
  if (validation.empty()) throw ArgumentError("validation set is empty");
  std::vector<double> errors;
  for (double sigma : grid) {
    errors.push_back(detail::svr_mean_error({calibration, sigma, normalize, false}, validation, geom));
  }
  return detail::pick_sigma(grid, errors);
}

/// Leave-one-out variant: each calibration entry is validated against a model built from the others.
inline double grid_search_sigma_loo(const CalibrationSet& calibration, std::span<const double> grid,
                                    const DisplayGeometry& geom = {}, bool normalize = true) {
  detail::check_grid(grid);
  if (calibration.size() < 2) throw ArgumentError("leave-one-out needs at least two entries");
  std::vector<CalibrationSet> folds;
  for (std::size_t hold = 0; hold < calibration.size(); ++hold) {
    CalibrationSet fold(calibration.channel_count());
    for (std::size_t p = 0; p < calibration.size(); ++p) {
      if (p != hold) fold.add(calibration[p].mean, calibration[p].target);
    }
    folds.push_back(std::move(fold));
  }
  std::vector<double> errors;
  for (double sigma : grid) {
    double total = 0.0;
    for (std::size_t hold = 0; hold < calibration.size() && std::isfinite(total); ++hold) {
      const ValidationSample s{calibration[hold].mean, calibration[hold].target};
      total += detail::svr_mean_error({folds[hold], sigma, normalize, false}, {&s, 1}, geom);
    }
    errors.push_back(total / static_cast<double>(calibration.size()));
  }
  return detail::pick_sigma(grid, errors);
}

/// Log-spaced sigma candidates.
inline std::vector<double> log_grid(double lo, double hi, std::size_t count) {
  if (count == 0 || !(lo > 0.0) || !(hi >= lo)) throw ArgumentError("invalid grid bounds");
  std::vector<double> g;
  for (std::size_t i = 0; i < count; ++i) {
    const double t = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
    g.push_back(lo * std::pow(hi / lo, t));
  }
  return g;
}

}  // namespace ledgaze
