#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "medverify/corpus.hpp"
#include "medverify/indicators.hpp"
#include "medverify/lexicon.hpp"
#include "medverify/weighting.hpp"

namespace medverify {

inline constexpr std::string_view kAttributeName = "medical_specialty";
inline constexpr std::string_view kNormalization = "per_1000_tokens";

/// The trained artifact: prototypes, weights and acceptance radii for one
/// attribute of one community.
struct ReferenceModel {
  std::string community_id;
  std::string attribute_name{kAttributeName};
  ReferenceMatrix matrix;
  WeightVector weights;
  std::map<std::string, double> acceptance_radii;
  std::string lexicon_version;
  std::string model_version;

  /// Throws ValidationError when dimensions, radii or ids disagree.
  void validate() const;
};

std::string model_to_json(const ReferenceModel& model);
ReferenceModel model_from_json(std::string_view json_source);
ReferenceModel load_model_file(const std::filesystem::path& path);

/// Hex digest of the model contents (excluding model_version itself).
std::string content_version(const ReferenceModel& model);

/// sqrt(sum_i (reference_i - user_i)^2 * weight_i)
double weighted_distance(std::span<const double> reference, std::span<const double> user,
                         std::span<const double> weights);

double distance(const IndicatorVector& user, const ReferenceModel& model,
                std::string_view specialty_id);

struct Prediction {
  std::string user_id;
  std::vector<std::pair<std::string, double>> distances;  // column order
  std::string best;
  double best_distance = 0.0;
  double margin = 0.0;      // second best minus best; 0 for a single specialty
  double confidence = 0.0;  // margin / (best + second + 1e-12)
};

/// Nearest prototype; ties go to the earlier column.
Prediction classify(const IndicatorVector& user, const ReferenceModel& model);

struct Thresholds {
  std::uint64_t min_tokens = 500;
  std::uint64_t min_posts = 10;
  double radius_multiplier = 2.0;

  void validate() const;
};

/// Per specialty: mean + multiplier * stddev of training members' distances to
/// their own prototype. Classes under three members use statistics pooled over
/// every training member.
std::map<std::string, double> calibrate_radii(std::span<const LabeledVector> training,
                                              const ReferenceMatrix& matrix,
                                              const WeightVector& weights,
                                              double radius_multiplier);

/// Maps free-text profile claims to specialty ids. Keys are compared after
/// text::normalize_claim; a claim equal to a known specialty id resolves to it.
class AliasTable {
 public:
  AliasTable() = default;
  explicit AliasTable(const std::map<std::string, std::string>& aliases);

  std::optional<std::string> resolve(std::string_view claim,
                                     std::span<const std::string> specialty_ids) const;

  /// Alias targets that are not in `specialty_ids`.
  std::vector<std::string> unknown_targets(std::span<const std::string> specialty_ids) const;

  const std::map<std::string, std::string>& entries() const noexcept { return aliases_; }

 private:
  std::map<std::string, std::string> aliases_;
};

AliasTable load_aliases(std::string_view json_source);
AliasTable load_aliases_file(const std::filesystem::path& path);

enum class Outcome { kVerified, kIncorrectClaim, kMissingClaim, kNonMedical, kUnverified };

inline constexpr Outcome kAllOutcomes[] = {Outcome::kVerified, Outcome::kIncorrectClaim,
                                           Outcome::kMissingClaim, Outcome::kNonMedical,
                                           Outcome::kUnverified};

std::string_view to_string(Outcome outcome);
std::optional<Outcome> outcome_from_string(std::string_view name);

/// Distances are absent exactly when no prediction was made (Unverified).
struct Verdict {
  std::string user_id;
  Outcome outcome = Outcome::kUnverified;
  std::optional<std::string> claimed_raw;
  std::optional<std::string> claimed_id;
  std::optional<std::string> predicted_id;
  std::optional<double> best_distance;
  std::optional<double> margin;
  std::optional<double> confidence;
  std::uint64_t token_count = 0;
  std::uint64_t post_count = 0;

  bool operator==(const Verdict&) const = default;
};

/// Ordered decision rules:
///   1. too little content, or no prediction  -> Unverified
///   2. nearest prototype outside its radius  -> NonMedical
///   3. no claim                              -> MissingClaim
///   4. claim resolves to the prediction      -> Verified
///   5. claim resolves elsewhere or not at all -> IncorrectClaim
Verdict categorize(const UserProfile* profile, const TrackAnalysis& analysis,
                   const Prediction* prediction, const ReferenceModel& model,
                   const Thresholds& thresholds, const AliasTable& aliases);

}  // namespace medverify
