#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace medverify {

struct Post {
  std::string post_id;
  std::string user_id;
  std::string text;
  std::optional<std::string> timestamp;  // ISO-8601, kept verbatim
  std::optional<std::string> section;

  bool operator==(const Post&) const = default;
};

struct UserProfile {
  std::string user_id;
  std::optional<std::string> username;
  std::optional<std::string> claimed_specialty_raw;  // never normalized at ingest
  std::optional<std::string> registered_at;

  bool operator==(const UserProfile&) const = default;
};

/// Everything one user posted, oldest first. Posts without a timestamp come
/// after all timestamped ones, in input order.
struct InformationTrack {
  std::string user_id;
  std::vector<Post> messages;
  std::size_t post_count = 0;
  std::size_t char_count = 0;  // Unicode code points over all message texts

  bool operator==(const InformationTrack&) const = default;
};

struct Corpus {
  std::string community_id;
  std::vector<Post> posts;
  std::vector<UserProfile> profiles;
  std::map<std::string, InformationTrack> tracks;
  std::map<std::string, std::size_t, std::less<>> profile_index;  // user_id -> profiles slot

  const UserProfile* profile(std::string_view user_id) const;

  bool operator==(const Corpus&) const = default;
};

/// Training label: a trusted (user, specialty) pair.
struct Label {
  std::string user_id;
  std::string specialty_id;

  bool operator==(const Label&) const = default;
};

enum class IssueKind { kMalformed, kMissingField, kInvalidField, kDuplicateId };

std::string_view to_string(IssueKind kind);

/// A non-fatal problem with one input line. Line numbers are 1-based.
struct IngestIssue {
  std::size_t line = 0;
  IssueKind kind = IssueKind::kMalformed;
  std::string message;
};

template <typename Record>
struct IngestResult {
  std::vector<Record> records;
  std::vector<IngestIssue> issues;
};

IngestResult<Post> ingest_posts(std::istream& source);
IngestResult<UserProfile> ingest_profiles(std::istream& source);
IngestResult<Label> ingest_labels(std::istream& source);

// File variants throw IoError when the file cannot be opened or read.
IngestResult<Post> ingest_posts_file(const std::filesystem::path& path);
IngestResult<UserProfile> ingest_profiles_file(const std::filesystem::path& path);
IngestResult<Label> ingest_labels_file(const std::filesystem::path& path);

Corpus build_tracks(std::vector<Post> posts, std::vector<UserProfile> profiles,
                    std::string community_id = "community");

/// Parses an ISO-8601 date or date-time into microseconds since the Unix epoch.
/// A missing UTC offset is read as UTC.
std::optional<std::int64_t> parse_iso8601(std::string_view value);
std::string format_iso8601(std::int64_t epoch_seconds);

// Canonical JSONL: one object per line, keys sorted, absent optionals omitted.
void write_posts_jsonl(std::ostream& sink, const std::vector<Post>& posts);
void write_profiles_jsonl(std::ostream& sink, const std::vector<UserProfile>& profiles);
void write_labels_jsonl(std::ostream& sink, const std::vector<Label>& labels);

/// Deterministic serialization of a whole corpus, tracks included.
std::string serialize_corpus(const Corpus& corpus);

}  // namespace medverify
