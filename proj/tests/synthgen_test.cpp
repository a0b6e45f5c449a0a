#include "medverify/synthgen.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "medverify/errors.hpp"

namespace medverify::synth {
namespace {

MarkerLexicon literal_lexicon() {
  return MarkerLexicon::create(
      "t-1", {{"heart", ""}, {"skin", ""}},
      {{"h1", "heart", MarkerKind::kLiteralToken, "pulse", false},
       {"h2", "heart", MarkerKind::kLiteralToken, "valve", false},
       {"s1", "skin", MarkerKind::kLiteralToken, "rash", false}});
}

CommunitySpec small_spec(std::uint64_t seed = 17) {
  CommunitySpec spec;
  spec.community_id = "test";
  spec.specialties = {{"heart", {{"heart", 0.05}}}, {"skin", {{"skin", 0.05}}}};
  spec.users_per_specialty = 100;
  spec.posts_per_user = 50;
  spec.tokens_per_post = 40;
  spec.noise_vocabulary_size = 500;
  spec.holdout_per_specialty = 5;
  spec.seed = seed;
  return spec;
}

std::string jsonl(const Community& c) {
  std::ostringstream out;
  write_posts_jsonl(out, c.posts);
  write_profiles_jsonl(out, c.profiles);
  write_labels_jsonl(out, c.labels);
  return out.str() + truth_to_json(c.truth);
}

TEST(Generate, DeterministicForSeed) {
  const auto lexicon = literal_lexicon();
  EXPECT_EQ(jsonl(generate(small_spec(), lexicon)), jsonl(generate(small_spec(), lexicon)));
  EXPECT_NE(jsonl(generate(small_spec(1), lexicon)), jsonl(generate(small_spec(2), lexicon)));
}

TEST(Generate, MarkerCountsAreBinomial) {
  const auto lexicon = literal_lexicon();
  const auto spec = small_spec();
  const auto community = generate(spec, lexicon);
  const auto corpus = build_tracks(community.posts, community.profiles, spec.community_id);
  const double n = static_cast<double>(spec.posts_per_user * spec.tokens_per_post);
  const double expected = n * 0.05;
  const double sd = std::sqrt(n * 0.05 * 0.95);

  double total = 0.0;
  std::size_t users = 0, outside = 0;
  for (const auto& [id, track] : corpus.tracks) {
    const auto analysis = scan_track(track, lexicon);
    const auto& truth = community.truth.at(id);
    EXPECT_EQ(analysis.token_count, static_cast<std::uint64_t>(n));
    const std::string other = truth.true_specialty == "heart" ? "skin" : "heart";
    EXPECT_EQ(analysis.hits_per_group.at(other), 0u);
    const double hits = static_cast<double>(analysis.hits_per_group.at(truth.true_specialty));
    outside += std::fabs(hits - expected) > 3 * sd;
    total += hits;
    ++users;
  }
  EXPECT_EQ(users, 200u);
  EXPECT_LE(outside, 4u);  // about 0.5 expected
  EXPECT_NEAR(total / users, expected, 3 * sd / std::sqrt(static_cast<double>(users)));
}

TEST(Generate, OutputIngestsCleanly) {
  const auto lexicon = literal_lexicon();
  auto spec = small_spec();
  spec.fraction_missing_claim = 0.1;
  spec.fraction_wrong_claim = 0.1;
  spec.fraction_low_content = 0.1;
  const auto community = generate(spec, lexicon);
  const auto dir = std::filesystem::temp_directory_path() / "medverify_synth_test";
  std::filesystem::remove_all(dir);
  write_community(community, dir);
  EXPECT_TRUE(ingest_posts_file(dir / "posts.jsonl").issues.empty());
  EXPECT_TRUE(ingest_profiles_file(dir / "profiles.jsonl").issues.empty());
  const auto labels = ingest_labels_file(dir / "labels.jsonl");
  EXPECT_TRUE(labels.issues.empty());
  std::ifstream truth_in(dir / "truth.json");
  std::stringstream truth_text;
  truth_text << truth_in.rdbuf();
  EXPECT_EQ(truth_from_json(truth_text.str()), community.truth);
  std::filesystem::remove_all(dir);

  // Every user has a truth entry; labels cover only honest, non-held-out users.
  std::set<std::string> posters;
  for (const auto& p : community.posts) posters.insert(p.user_id);
  EXPECT_EQ(posters.size(), community.truth.size());
  std::map<ClaimBehavior, int> behaviors;
  for (const auto& [id, t] : community.truth) ++behaviors[t.claimed_behavior];
  EXPECT_EQ(behaviors[ClaimBehavior::kMissing], 20);
  EXPECT_EQ(behaviors[ClaimBehavior::kWrong], 20);
  EXPECT_EQ(behaviors[ClaimBehavior::kLowContent], 20);
  for (const auto& label : labels.records) {
    const auto& t = community.truth.at(label.user_id);
    EXPECT_TRUE(t.labeled);
    EXPECT_EQ(t.claimed_behavior, ClaimBehavior::kHonest);
    EXPECT_EQ(t.true_specialty, label.specialty_id);
  }
  std::size_t labeled = 0;
  for (const auto& [id, t] : community.truth) labeled += t.labeled;
  EXPECT_EQ(labeled, labels.records.size());

  for (const auto& profile : community.profiles) {
    const auto& t = community.truth.at(profile.user_id);
    if (t.claimed_behavior == ClaimBehavior::kMissing) {
      EXPECT_FALSE(profile.claimed_specialty_raw);
    } else if (t.claimed_behavior == ClaimBehavior::kWrong) {
      EXPECT_NE(profile.claimed_specialty_raw, t.true_specialty);
    } else {
      EXPECT_EQ(profile.claimed_specialty_raw, t.true_specialty);
    }
  }
}

TEST(Spec, ValidationListsEveryProblem) {
  auto spec = small_spec();
  spec.users_per_specialty = 0;
  spec.fraction_wrong_claim = 1.5;
  spec.specialties.push_back({"ghost", {{"nowhere", 0.1}}});
  try {
    spec.validate(literal_lexicon());
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_GE(e.violations().size(), 3u);
  }
  EXPECT_THROW(generate(spec, literal_lexicon()), ValidationError);
  EXPECT_THROW(spec_from_json("{\"seed\": \"x\"}"), ValidationError);
  EXPECT_THROW(load_spec_file("/nonexistent/spec.json"), IoError);
}

TEST(Rng, DrawsAreInRangeAndReproducible) {
  Rng a(99), b(99);
  for (int k = 0; k < 1000; ++k) {
    const double u = a.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    EXPECT_EQ(u, b.uniform());
    const auto x = a.below(7);
    EXPECT_LT(x, 7u);
    EXPECT_EQ(x, b.below(7));
  }
  EXPECT_THROW(a.below(0), ValidationError);
}

}  // namespace
}  // namespace medverify::synth
