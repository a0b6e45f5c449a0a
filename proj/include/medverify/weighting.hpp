#pragma once

#include <span>
#include <vector>

#include "medverify/indicators.hpp"

namespace medverify {

inline constexpr double kDefaultVarianceFloor = 1e-9;
inline constexpr double kDefaultScoreCap = 1e6;

/// Importance of each indicator inside the distance. Mean 1, or exactly all
/// ones when no indicator separates the classes.
struct WeightVector {
  std::vector<double> weights;
  double epsilon = kDefaultVarianceFloor;
  double cap = kDefaultScoreCap;
};

/// Per-indicator ratio of between-class variance to pooled within-class
/// variance (population moments, class sizes as weights).
std::vector<double> discriminative_scores(std::span<const LabeledVector> training,
                                          double epsilon = kDefaultVarianceFloor,
                                          double cap = kDefaultScoreCap);

/// Scores rescaled to mean 1. Needs at least two specialty classes.
WeightVector compute_weights(std::span<const LabeledVector> training,
                             double epsilon = kDefaultVarianceFloor,
                             double cap = kDefaultScoreCap);

}  // namespace medverify
