#include "medverify/corpus.hpp"

#include <gtest/gtest.h>

#include <sstream>

#include "medverify/errors.hpp"

namespace medverify {
namespace {

IngestResult<Post> posts_from(const std::string& text) {
  std::istringstream in(text);
  return ingest_posts(in);
}

IngestResult<UserProfile> profiles_from(const std::string& text) {
  std::istringstream in(text);
  return ingest_profiles(in);
}

TEST(IngestPosts, AppliesSchema) {
  const auto result = posts_from(R"({"post_id":"p1","user_id":"u1","text":"hello"})" "\n");
  ASSERT_TRUE(result.issues.empty());
  ASSERT_EQ(result.records.size(), 1u);
  EXPECT_EQ(result.records[0], (Post{"p1", "u1", "hello", std::nullopt, std::nullopt}));
}

TEST(IngestPosts, MalformedLineBecomesIssueWithLineNumber) {
  const auto result = posts_from(
      R"({"post_id":"p1","user_id":"u1","text":"a"})" "\n"
      R"({"post_id":"p2","user_id":"u1","text":"b"})" "\n"
      "not json\n");
  ASSERT_EQ(result.issues.size(), 1u);
  EXPECT_EQ(result.issues[0].line, 3u);
  EXPECT_EQ(result.issues[0].kind, IssueKind::kMalformed);
  EXPECT_EQ(result.records.size(), 2u);
}

TEST(IngestPosts, DuplicateIdKeepsFirst) {
  const auto result = posts_from(
      R"({"post_id":"p1","user_id":"u1","text":"first"})" "\n"
      R"({"post_id":"p1","user_id":"u2","text":"second"})" "\n");
  ASSERT_EQ(result.records.size(), 1u);
  EXPECT_EQ(result.records[0].text, "first");
  ASSERT_EQ(result.issues.size(), 1u);
  EXPECT_EQ(result.issues[0].kind, IssueKind::kDuplicateId);
  EXPECT_EQ(result.issues[0].line, 2u);
}

TEST(IngestPosts, FieldProblems) {
  const auto result = posts_from(
      R"({"user_id":"u1","text":"x"})" "\n"
      R"({"post_id":"","user_id":"u1","text":"x"})" "\n"
      R"({"post_id":"p3","user_id":7,"text":"x"})" "\n"
      R"({"post_id":"p4","user_id":"u1"})" "\n"
      R"({"post_id":"p5","user_id":"u1","text":"x","timestamp":"yesterday"})" "\n"
      R"([1,2,3])" "\n"
      "{\"post_id\":\"p7\",\"user_id\":\"u1\",\"text\":\"\xff\"}\n");
  ASSERT_EQ(result.issues.size(), 7u);
  EXPECT_EQ(result.issues[0].kind, IssueKind::kMissingField);
  EXPECT_EQ(result.issues[1].kind, IssueKind::kInvalidField);
  EXPECT_EQ(result.issues[2].kind, IssueKind::kInvalidField);
  EXPECT_EQ(result.issues[3].kind, IssueKind::kMissingField);
  EXPECT_EQ(result.issues[4].kind, IssueKind::kInvalidField);
  EXPECT_EQ(result.issues[5].kind, IssueKind::kMalformed);
  EXPECT_EQ(result.issues[6].kind, IssueKind::kMalformed);
  EXPECT_TRUE(result.records.empty());
}

TEST(IngestPosts, EmptyTextAndBlankLinesTolerated) {
  const auto result = posts_from("\n" R"({"post_id":"p1","user_id":"u1","text":""})" "\r\n\n");
  EXPECT_TRUE(result.issues.empty());
  ASSERT_EQ(result.records.size(), 1u);
  EXPECT_EQ(result.records[0].text, "");
}

TEST(IngestPosts, OptionalFields) {
  const auto result = posts_from(
      R"({"post_id":"p1","user_id":"u1","text":"t","timestamp":"2018-11-10T12:00:00+02:00","section":"кардіологія"})"
      "\n");
  ASSERT_TRUE(result.issues.empty());
  EXPECT_EQ(result.records[0].timestamp, "2018-11-10T12:00:00+02:00");
  EXPECT_EQ(result.records[0].section, "кардіологія");
}

TEST(IngestPosts, UnreadableFileIsFatal) {
  EXPECT_THROW(ingest_posts_file("/nonexistent/posts.jsonl"), IoError);
}

TEST(IngestProfiles, ClaimPreservedVerbatim) {
  const auto result = profiles_from(
      R"({"user_id":"u1","claimed_specialty_raw":"  Кардіолог "})" "\n"
      R"({"claimed_specialty_raw":"хірург"})" "\n"
      R"({"user_id":"u2"})" "\n"
      R"({"user_id":"u1"})" "\n");
  ASSERT_EQ(result.records.size(), 2u);
  EXPECT_EQ(result.records[0].claimed_specialty_raw, "  Кардіолог ");
  EXPECT_FALSE(result.records[1].claimed_specialty_raw.has_value());
  ASSERT_EQ(result.issues.size(), 2u);
  EXPECT_EQ(result.issues[0].line, 2u);
  EXPECT_EQ(result.issues[0].kind, IssueKind::kMissingField);
  EXPECT_EQ(result.issues[1].kind, IssueKind::kDuplicateId);
}

TEST(Iso8601, ParsesOffsetsAndFractions) {
  EXPECT_EQ(parse_iso8601("1970-01-01T00:00:00Z"), 0);
  EXPECT_EQ(parse_iso8601("1970-01-01"), 0);
  EXPECT_EQ(parse_iso8601("1970-01-01T02:00:00+02:00"), 0);
  EXPECT_EQ(parse_iso8601("1970-01-01T00:00:01.5Z"), 1'500'000);
  EXPECT_EQ(parse_iso8601("2018-11-10T00:00:00Z"), 1541808000LL * 1'000'000);
  EXPECT_FALSE(parse_iso8601("2018-02-30"));
  EXPECT_FALSE(parse_iso8601("2018-11-10T25:00Z"));
  EXPECT_FALSE(parse_iso8601("2018-11-10Tnoon"));
  EXPECT_EQ(format_iso8601(1541808000), "2018-11-10T00:00:00Z");
}

TEST(BuildTracks, SortsByTimestampThenInputOrder) {
  std::vector<Post> posts = {
      {"p1", "u1", "c", "2018-01-03T00:00:00Z", {}},
      {"p2", "u1", "none1", std::nullopt, {}},
      {"p3", "u1", "a", "2018-01-01T00:00:00Z", {}},
      {"p4", "u1", "b", "2018-01-02T01:00:00+01:00", {}},  // same instant as p5
      {"p5", "u1", "b2", "2018-01-02T00:00:00Z", {}},
      {"p6", "u1", "none2", std::nullopt, {}},
  };
  const auto corpus = build_tracks(posts, {});
  const auto& track = corpus.tracks.at("u1");
  std::vector<std::string> order;
  for (const auto& m : track.messages) order.push_back(m.post_id);
  EXPECT_EQ(order, (std::vector<std::string>{"p3", "p4", "p5", "p1", "p2", "p6"}));
  EXPECT_EQ(track.post_count, 6u);
}

TEST(BuildTracks, ProfileOnlyUserGetsEmptyTrack) {
  const auto corpus = build_tracks({{"p1", "u1", "текст", {}, {}}}, {{"u9", {}, "хірург", {}}});
  ASSERT_TRUE(corpus.tracks.contains("u9"));
  EXPECT_EQ(corpus.tracks.at("u9").post_count, 0u);
  EXPECT_NE(corpus.profile("u9"), nullptr);
  EXPECT_EQ(corpus.profile("u1"), nullptr);  // poster without profile
  EXPECT_EQ(corpus.tracks.at("u1").char_count, 5u);  // code points, not bytes
}

TEST(BuildTracks, PostCountsSumToPosts) {
  std::vector<Post> posts;
  for (int i = 0; i < 50; ++i) {
    posts.push_back({"p" + std::to_string(i), "u" + std::to_string(i % 7), std::string(i % 5, 'x'),
                     {}, {}});
  }
  const auto corpus = build_tracks(posts, {{"u100", {}, {}, {}}});
  std::size_t total = 0, chars = 0;
  for (const auto& [id, track] : corpus.tracks) {
    total += track.post_count;
    chars += track.char_count;
    EXPECT_EQ(track.post_count, track.messages.size());
  }
  EXPECT_EQ(total, posts.size());
  std::size_t expected_chars = 0;
  for (const auto& p : posts) expected_chars += p.text.size();
  EXPECT_EQ(chars, expected_chars);
}

TEST(BuildTracks, DeterministicAndRoundTripsThroughCanonicalJsonl) {
  const std::string source =
      R"({"post_id":"p2","user_id":"u2","text":"друге","timestamp":"2018-05-01T10:00:00Z"})" "\n"
      R"({"post_id":"p1","user_id":"u1","text":"перше \"лапки\"","section":"s"})" "\n"
      R"({"post_id":"p3","user_id":"u2","text":"","timestamp":"2018-04-01"})" "\n";
  const std::string profile_source =
      R"({"user_id":"u1","username":"Лікар","claimed_specialty_raw":"кардіолог","registered_at":"2017-01-01"})" "\n"
      R"({"user_id":"u3"})" "\n";
  auto posts = posts_from(source).records;
  auto profiles = profiles_from(profile_source).records;
  const auto a = build_tracks(posts, profiles, "oc");
  const auto b = build_tracks(posts, profiles, "oc");
  EXPECT_EQ(serialize_corpus(a), serialize_corpus(b));

  std::ostringstream posts_out, profiles_out;
  write_posts_jsonl(posts_out, a.posts);
  write_profiles_jsonl(profiles_out, a.profiles);
  const auto again = build_tracks(posts_from(posts_out.str()).records,
                                  profiles_from(profiles_out.str()).records, "oc");
  EXPECT_EQ(again, a);
  EXPECT_EQ(serialize_corpus(again), serialize_corpus(a));
}

}  // namespace
}  // namespace medverify
