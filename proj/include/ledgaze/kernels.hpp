#pragma once

// Distance measures and the RBF similarity used to compare sensor vectors.

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ledgaze/core.hpp"

namespace ledgaze {

enum class MeasureKind { minkowski, rbf, cosine, manhattan, canberra };

inline std::string_view to_string(MeasureKind k) {
  switch (k) {
    case MeasureKind::minkowski: return "minkowski";
    case MeasureKind::rbf: return "rbf";
    case MeasureKind::cosine: return "cosine";
    case MeasureKind::manhattan: return "manhattan";
    case MeasureKind::canberra: return "canberra";
  }
  return "unknown";
}

inline MeasureKind measure_kind_from_string(std::string_view s) {
  if (s == "minkowski") return MeasureKind::minkowski;
  if (s == "rbf") return MeasureKind::rbf;
  if (s == "cosine") return MeasureKind::cosine;
  if (s == "manhattan") return MeasureKind::manhattan;
  if (s == "canberra") return MeasureKind::canberra;
  throw ArgumentError("unknown measure: " + std::string(s));
}

/// Which measure to use and its parameters.
struct MeasureSpec {
  MeasureKind kind = MeasureKind::minkowski;
  double m = 2.0;                      ///< minkowski norm degree
  std::optional<std::vector<double>> weights;  ///< minkowski per-channel weights, all 1 if unset
  double sigma = 0.1;                  ///< rbf free parameter
  bool rbf_squared = false;            ///< textbook exp(-|a-b|^2 / 2 sigma^2) instead of the unsquared norm

  static MeasureSpec minkowski_default() { return {}; }
  static MeasureSpec rbf_with(double sigma) {
    MeasureSpec s;
    s.kind = MeasureKind::rbf;
    s.sigma = sigma;
    return s;
  }
  static MeasureSpec of(MeasureKind k) {
    MeasureSpec s;
    s.kind = k;
    return s;
  }

  /// Throws ArgumentError when parameters are out of range. `channels` of 0 skips the weights length check.
  void validate(std::size_t channels = 0) const {
    if (kind == MeasureKind::minkowski) {
      if (!(m >= 1.0)) throw ArgumentError("minkowski degree must be >= 1");
      if (weights) {
        if (channels != 0 && weights->size() != channels) {
          throw ArgumentError("minkowski weights must have one entry per channel");
        }
        for (double w : *weights) {
          if (!(w >= 0.0)) throw ArgumentError("minkowski weights must be non-negative");
        }
      }
    }
    if (kind == MeasureKind::rbf && !(sigma > 0.0)) throw ArgumentError("rbf sigma must be positive");
  }
};

// ---------------------------------------------------------------------------
// Measures
// ---------------------------------------------------------------------------

/// Weighted Minkowski distance (sum_i w_i |a_i - b_i|^m)^(1/m). Empty `w` means unit weights.
inline double minkowski(std::span<const double> a, std::span<const double> b, double m,
                        std::span<const double> w = {}) {
  require_same_length(a.size(), b.size(), "minkowski");
  if (!w.empty()) require_same_length(a.size(), w.size(), "minkowski weights");
  double sum = 0.0;
  if (m == 2.0) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double d = a[i] - b[i];
      sum += (w.empty() ? 1.0 : w[i]) * d * d;
    }
    return std::sqrt(sum);
  }
  if (m == 1.0) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      sum += (w.empty() ? 1.0 : w[i]) * std::abs(a[i] - b[i]);
    }
    return sum;
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    sum += (w.empty() ? 1.0 : w[i]) * std::pow(std::abs(a[i] - b[i]), m);
  }
  return std::pow(sum, 1.0 / m);
}

inline double manhattan(std::span<const double> a, std::span<const double> b) {
  require_same_length(a.size(), b.size(), "manhattan");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
  return sum;
}

/// Canberra distance; coordinates where both inputs are zero contribute nothing.
inline double canberra(std::span<const double> a, std::span<const double> b) {
  require_same_length(a.size(), b.size(), "canberra");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double den = std::abs(a[i]) + std::abs(b[i]);
    if (den > 0.0) sum += std::abs(a[i] - b[i]) / den;
  }
  return sum;
}

/// 1 - cos(angle between a and b).
inline double cosine(std::span<const double> a, std::span<const double> b) {
  require_same_length(a.size(), b.size(), "cosine");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw DegenerateInputError("cosine distance of a zero vector");
  // sqrt(na * nb) keeps self-distance exactly zero: sqrt(x * x) == x in IEEE arithmetic.
  return 1.0 - dot / std::sqrt(na * nb);
}

/// exp(-|a-b| / (2 sigma^2)) with the plain Euclidean norm; `squared` switches to |a-b|^2.
inline double rbf(std::span<const double> a, std::span<const double> b, double sigma,
                  bool squared = false) {
  if (!(sigma > 0.0)) throw ArgumentError("rbf sigma must be positive");
  const double d = minkowski(a, b, 2.0);
  const double num = squared ? d * d : d;
  return std::exp(-num / (2.0 * sigma * sigma));
}

/// Evaluates the measure named by `spec`. For rbf this is a similarity, for the rest a distance.
inline double evaluate(const MeasureSpec& spec, std::span<const double> a, std::span<const double> b) {
  switch (spec.kind) {
    case MeasureKind::minkowski:
      return spec.weights ? minkowski(a, b, spec.m, *spec.weights) : minkowski(a, b, spec.m);
    case MeasureKind::rbf: return rbf(a, b, spec.sigma, spec.rbf_squared);
    case MeasureKind::cosine: return cosine(a, b);
    case MeasureKind::manhattan: return manhattan(a, b);
    case MeasureKind::canberra: return canberra(a, b);
  }
  throw ArgumentError("unknown measure kind");
}

}  // namespace ledgaze
