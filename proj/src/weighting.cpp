#include "medverify/weighting.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "medverify/errors.hpp"

namespace medverify {

namespace {

struct ClassMoments {
  std::size_t count = 0;
  std::vector<double> mean;
  std::vector<double> variance;  // population
};

// Classes keyed by id so the reduction order does not depend on training order.
std::map<std::string, ClassMoments> class_moments(std::span<const LabeledVector> training,
                                                  std::size_t n_ind) {
  std::map<std::string, std::vector<const std::vector<double>*>> members;
  for (const auto& item : training) {
    if (item.vector.values.size() != n_ind) {
      throw DimensionMismatch("training vector for user '" + item.vector.user_id + "' has " +
                              std::to_string(item.vector.values.size()) + " values, expected " +
                              std::to_string(n_ind));
    }
    members[item.specialty_id].push_back(&item.vector.values);
  }
  std::map<std::string, ClassMoments> out;
  for (const auto& [id, vectors] : members) {
    ClassMoments m;
    m.count = vectors.size();
    m.mean.assign(n_ind, 0.0);
    m.variance.assign(n_ind, 0.0);
    const double n = static_cast<double>(m.count);
    for (std::size_t i = 0; i < n_ind; ++i) {
      StableSum sum;
      for (const auto* v : vectors) sum.add((*v)[i]);
      m.mean[i] = sum.value() / n;
      StableSum squares;
      for (const auto* v : vectors) {
        const double d = (*v)[i] - m.mean[i];
        squares.add(d * d);
      }
      m.variance[i] = squares.value() / n;
    }
    out.emplace(id, std::move(m));
  }
  return out;
}

}  // namespace

std::vector<double> discriminative_scores(std::span<const LabeledVector> training, double epsilon,
                                          double cap) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw ValidationError("weighting epsilon must be a positive finite number");
  }
  if (!(cap > 0.0) || !std::isfinite(cap)) {
    throw ValidationError("weighting cap must be a positive finite number");
  }
  if (training.empty()) throw ValidationError("training set is empty");
  const std::size_t n_ind = training.front().vector.values.size();
  const auto classes = class_moments(training, n_ind);
  if (classes.size() < 2) {
    throw ValidationError("weights need at least two specialty classes, got " +
                          std::to_string(classes.size()));
  }
  const double total = static_cast<double>(training.size());

  std::vector<double> scores(n_ind, 0.0);
  for (std::size_t i = 0; i < n_ind; ++i) {
    // Identical class means separate nothing; skip the arithmetic so rounding
    // in the grand mean cannot fake a tiny positive score.
    const double first_mean = classes.begin()->second.mean[i];
    if (std::all_of(classes.begin(), classes.end(),
                    [&](const auto& c) { return c.second.mean[i] == first_mean; })) {
      continue;
    }
    StableSum grand;
    for (const auto& [id, m] : classes) grand.add(static_cast<double>(m.count) / total * m.mean[i]);
    const double overall = grand.value();
    StableSum between;
    StableSum within;
    for (const auto& [id, m] : classes) {
      const double share = static_cast<double>(m.count) / total;
      const double d = m.mean[i] - overall;
      between.add(share * d * d);
      within.add(share * m.variance[i]);
    }
    const double score = between.value() / (within.value() + epsilon);
    scores[i] = std::clamp(score, 0.0, cap);
  }
  return scores;
}

WeightVector compute_weights(std::span<const LabeledVector> training, double epsilon, double cap) {
  WeightVector out;
  out.epsilon = epsilon;
  out.cap = cap;
  const auto scores = discriminative_scores(training, epsilon, cap);
  StableSum sum;
  for (const double s : scores) sum.add(s);
  const double total = sum.value();
  if (total == 0.0) {
    out.weights.assign(scores.size(), 1.0);
    return out;
  }
  const double n = static_cast<double>(scores.size());
  out.weights.reserve(scores.size());
  for (const double s : scores) out.weights.push_back(s * n / total);
  return out;
}

}  // namespace medverify
