#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "medverify/corpus.hpp"
#include "medverify/lexicon.hpp"

namespace medverify::synth {

struct SpecialtySpec {
  std::string specialty_id;
  std::map<std::string, double> marker_group_rates;  // per-token emission probability
};

struct CommunitySpec {
  std::string community_id = "synthetic";
  std::vector<SpecialtySpec> specialties;
  std::uint64_t users_per_specialty = 1;
  std::uint64_t posts_per_user = 1;
  std::uint64_t tokens_per_post = 1;
  std::uint64_t noise_vocabulary_size = 1;
  double fraction_missing_claim = 0.0;
  double fraction_wrong_claim = 0.0;
  double fraction_low_content = 0.0;
  // Honest users left out of the labels file, per specialty (the last ones in
  // user order). They form a held-out evaluation set.
  std::uint64_t holdout_per_specialty = 0;
  std::uint64_t seed = 0;

  /// Throws ValidationError listing every problem, including rates that name
  /// groups without literal markers in `lexicon`.
  void validate(const MarkerLexicon& lexicon) const;
};

CommunitySpec spec_from_json(std::string_view json_source);
CommunitySpec load_spec_file(const std::filesystem::path& path);

enum class ClaimBehavior { kHonest, kMissing, kWrong, kLowContent };

std::string_view to_string(ClaimBehavior behavior);

struct TruthEntry {
  std::string true_specialty;
  ClaimBehavior claimed_behavior = ClaimBehavior::kHonest;
  bool labeled = false;  // present in the training labels

  bool operator==(const TruthEntry&) const = default;
};

using GroundTruth = std::map<std::string, TruthEntry>;

struct Community {
  std::vector<Post> posts;
  std::vector<UserProfile> profiles;
  std::vector<Label> labels;
  GroundTruth truth;
};

inline constexpr std::uint64_t kLowContentPosts = 1;
inline constexpr std::uint64_t kLowContentTokens = 10;

/// Pure function of (spec, lexicon). Each token is a marker of group g with
/// probability rate_g (uniform over g's literal markers), otherwise a noise
/// word. Randomness comes from std::mt19937_64 seeded with spec.seed, with
/// integer and real draws derived from raw engine output so results do not
/// depend on the standard library's distribution implementations.
Community generate(const CommunitySpec& spec, const MarkerLexicon& lexicon);

std::string truth_to_json(const GroundTruth& truth);
GroundTruth truth_from_json(std::string_view json_source);

/// Writes posts.jsonl, profiles.jsonl, labels.jsonl and truth.json into `dir`.
void write_community(const Community& community, const std::filesystem::path& dir);

/// Portable draws on top of a 64-bit Mersenne Twister.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform in [0, bound), bound > 0, by rejection sampling.
  std::uint64_t below(std::uint64_t bound);

 private:
  std::mt19937_64 engine_;
};

}  // namespace medverify::synth
