#include "medverify/indicators.hpp"

#include <cmath>
#include <unordered_map>

#include "medverify/errors.hpp"

namespace medverify {

void StableSum::add(double value) noexcept {
  const double t = sum_ + value;
  if (std::fabs(sum_) >= std::fabs(value)) {
    compensation_ += (sum_ - t) + value;
  } else {
    compensation_ += (value - t) + sum_;
  }
  sum_ = t;
}

IndicatorVector compute_indicator_vector(const TrackAnalysis& analysis,
                                         const MarkerLexicon& lexicon) {
  if (analysis.token_count == 0) {
    throw InsufficientContent("user '" + analysis.user_id + "' has no tokens");
  }
  IndicatorVector out;
  out.user_id = analysis.user_id;
  out.token_count = analysis.token_count;
  out.post_count = analysis.post_count;
  out.values.reserve(lexicon.groups().size());
  const double tokens = static_cast<double>(analysis.token_count);
  for (const auto& group : lexicon.groups()) {
    const auto it = analysis.hits_per_group.find(group.group_id);
    const double hits = it == analysis.hits_per_group.end() ? 0.0 : static_cast<double>(it->second);
    out.values.push_back(hits / tokens * kTokensPerRateUnit);
  }
  return out;
}

ReferenceMatrix::ReferenceMatrix(std::vector<std::string> indicator_ids,
                                 std::vector<std::string> specialty_ids,
                                 std::vector<double> entries, std::vector<std::size_t> support)
    : indicator_ids_(std::move(indicator_ids)),
      specialty_ids_(std::move(specialty_ids)),
      entries_(std::move(entries)),
      support_(std::move(support)) {
  std::vector<std::string> problems;
  if (entries_.size() != indicator_ids_.size() * specialty_ids_.size()) {
    problems.push_back("matrix has " + std::to_string(entries_.size()) + " entries, expected " +
                       std::to_string(indicator_ids_.size()) + " x " +
                       std::to_string(specialty_ids_.size()));
  }
  if (support_.size() != specialty_ids_.size()) {
    problems.push_back("support has " + std::to_string(support_.size()) +
                       " counts for " + std::to_string(specialty_ids_.size()) + " specialties");
  }
  for (std::size_t j = 0; j < support_.size(); ++j) {
    if (support_[j] == 0) problems.push_back("specialty column " + std::to_string(j) + " has no support");
  }
  for (const double v : entries_) {
    if (!std::isfinite(v)) {
      problems.push_back("matrix contains a non-finite entry");
      break;
    }
  }
  if (!problems.empty()) throw DimensionMismatch("invalid reference matrix", std::move(problems));
}

std::size_t ReferenceMatrix::specialty_index(std::string_view specialty_id) const {
  for (std::size_t j = 0; j < specialty_ids_.size(); ++j) {
    if (specialty_ids_[j] == specialty_id) return j;
  }
  throw LookupError("unknown specialty '" + std::string(specialty_id) + "'");
}

std::size_t ReferenceMatrix::indicator_index(std::string_view indicator_id) const {
  for (std::size_t i = 0; i < indicator_ids_.size(); ++i) {
    if (indicator_ids_[i] == indicator_id) return i;
  }
  throw LookupError("unknown indicator '" + std::string(indicator_id) + "'");
}

std::vector<double> ReferenceMatrix::column(std::size_t col) const {
  std::vector<double> out(rows());
  for (std::size_t i = 0; i < rows(); ++i) out[i] = at(i, col);
  return out;
}

std::vector<double> ReferenceMatrix::row(std::size_t row) const {
  const auto first = entries_.begin() + static_cast<std::ptrdiff_t>(row * cols());
  return {first, first + static_cast<std::ptrdiff_t>(cols())};
}

ReferenceMatrix build_reference_matrix(std::span<const LabeledVector> training,
                                       std::vector<std::string> indicator_ids) {
  if (training.empty()) throw ValidationError("training set is empty");
  const std::size_t n_ind = indicator_ids.size();

  std::vector<std::string> specialties;
  std::unordered_map<std::string, std::size_t> slot;
  std::vector<std::vector<StableSum>> sums;
  std::vector<std::size_t> support;
  for (const auto& item : training) {
    if (item.vector.values.size() != n_ind) {
      throw DimensionMismatch("training vector for user '" + item.vector.user_id + "' has " +
                              std::to_string(item.vector.values.size()) + " values, expected " +
                              std::to_string(n_ind));
    }
    auto [it, inserted] = slot.emplace(item.specialty_id, specialties.size());
    if (inserted) {
      specialties.push_back(item.specialty_id);
      sums.emplace_back(n_ind);
      support.push_back(0);
    }
    const std::size_t j = it->second;
    for (std::size_t i = 0; i < n_ind; ++i) sums[j][i].add(item.vector.values[i]);
    ++support[j];
  }

  const std::size_t n_vi = specialties.size();
  std::vector<double> entries(n_ind * n_vi);
  for (std::size_t j = 0; j < n_vi; ++j) {
    for (std::size_t i = 0; i < n_ind; ++i) {
      entries[i * n_vi + j] = sums[j][i].value() / static_cast<double>(support[j]);
    }
  }
  return ReferenceMatrix(std::move(indicator_ids), std::move(specialties), std::move(entries),
                         std::move(support));
}

std::vector<double> reference_column(const ReferenceMatrix& matrix, std::string_view specialty_id) {
  return matrix.column(matrix.specialty_index(specialty_id));
}

std::vector<double> indicator_row(const ReferenceMatrix& matrix, std::string_view indicator_id) {
  return matrix.row(matrix.indicator_index(indicator_id));
}

}  // namespace medverify
