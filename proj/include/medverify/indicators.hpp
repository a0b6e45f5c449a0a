#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "medverify/lexicon.hpp"

namespace medverify {

/// Marker-group rates of one user, in hits per 1000 tokens, lexicon group order.
struct IndicatorVector {
  std::string user_id;
  std::vector<double> values;
  std::uint64_t token_count = 0;
  std::uint64_t post_count = 0;
};

struct LabeledVector {
  IndicatorVector vector;
  std::string specialty_id;
};

inline constexpr double kTokensPerRateUnit = 1000.0;

/// Throws InsufficientContent when the analysis has no tokens.
IndicatorVector compute_indicator_vector(const TrackAnalysis& analysis,
                                         const MarkerLexicon& lexicon);

/// Indicators (rows) by specialty values (columns); each column is the
/// prototype of one specialty.
class ReferenceMatrix {
 public:
  ReferenceMatrix() = default;
  /// `entries` is row-major, indicator_ids.size() x specialty_ids.size().
  ReferenceMatrix(std::vector<std::string> indicator_ids, std::vector<std::string> specialty_ids,
                  std::vector<double> entries, std::vector<std::size_t> support);

  std::size_t rows() const noexcept { return indicator_ids_.size(); }
  std::size_t cols() const noexcept { return specialty_ids_.size(); }

  double at(std::size_t row, std::size_t col) const { return entries_[row * cols() + col]; }

  const std::vector<std::string>& indicator_ids() const noexcept { return indicator_ids_; }
  const std::vector<std::string>& specialty_ids() const noexcept { return specialty_ids_; }
  const std::vector<std::size_t>& support() const noexcept { return support_; }
  std::span<const double> entries() const noexcept { return entries_; }

  std::size_t specialty_index(std::string_view specialty_id) const;  // throws LookupError
  std::size_t indicator_index(std::string_view indicator_id) const;  // throws LookupError

  std::vector<double> column(std::size_t col) const;
  std::vector<double> row(std::size_t row) const;

  bool operator==(const ReferenceMatrix&) const = default;

 private:
  std::vector<std::string> indicator_ids_;
  std::vector<std::string> specialty_ids_;
  std::vector<double> entries_;
  std::vector<std::size_t> support_;
};

/// Column j is the mean of the vectors labeled with specialty j; columns are
/// ordered by first appearance in `training`.
ReferenceMatrix build_reference_matrix(std::span<const LabeledVector> training,
                                       std::vector<std::string> indicator_ids);

std::vector<double> reference_column(const ReferenceMatrix& matrix, std::string_view specialty_id);
std::vector<double> indicator_row(const ReferenceMatrix& matrix, std::string_view indicator_id);

/// Neumaier-compensated running sum.
class StableSum {
 public:
  void add(double value) noexcept;
  double value() const noexcept { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

}  // namespace medverify
