#include "medverify/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "medverify/errors.hpp"
#include "medverify/text.hpp"

namespace medverify {

using json = nlohmann::json;

namespace {

struct FieldError {
  IssueKind kind;
  std::string message;
};

// Reads a required non-empty (or possibly empty) string field.
std::optional<FieldError> require_string(const json& record, const char* key, bool allow_empty,
                                         std::string& out) {
  const auto it = record.find(key);
  if (it == record.end() || it->is_null()) {
    return FieldError{IssueKind::kMissingField, std::string("missing required field '") + key + "'"};
  }
  if (!it->is_string()) {
    return FieldError{IssueKind::kInvalidField, std::string("field '") + key + "' must be a string"};
  }
  out = it->get<std::string>();
  if (!allow_empty && out.empty()) {
    return FieldError{IssueKind::kInvalidField, std::string("field '") + key + "' must not be empty"};
  }
  return std::nullopt;
}

std::optional<FieldError> optional_string(const json& record, const char* key,
                                          std::optional<std::string>& out) {
  const auto it = record.find(key);
  if (it == record.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) {
    return FieldError{IssueKind::kInvalidField, std::string("field '") + key + "' must be a string"};
  }
  out = it->get<std::string>();
  return std::nullopt;
}

std::optional<FieldError> optional_instant(const json& record, const char* key,
                                           std::optional<std::string>& out) {
  if (auto error = optional_string(record, key, out)) return error;
  if (out && !parse_iso8601(*out)) {
    return FieldError{IssueKind::kInvalidField,
                      std::string("field '") + key + "' is not an ISO-8601 instant: " + *out};
  }
  return std::nullopt;
}

// Shared line loop: blank lines are skipped, CR before LF is tolerated, every
// other line must be a JSON object. `decode` fills a record or returns the
// problem; `id_of` feeds first-wins deduplication.
template <typename Record, typename Decode, typename IdOf>
IngestResult<Record> ingest_lines(std::istream& source, Decode decode, IdOf id_of,
                                  const char* id_name) {
  IngestResult<Record> result;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(source, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;

    if (!text::is_valid_utf8(line)) {
      result.issues.push_back({line_number, IssueKind::kMalformed, "line is not valid UTF-8"});
      continue;
    }
    json record = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (record.is_discarded() || !record.is_object()) {
      result.issues.push_back(
          {line_number, IssueKind::kMalformed, "malformed record: expected one JSON object"});
      continue;
    }
    Record decoded;
    if (auto error = decode(record, decoded)) {
      result.issues.push_back({line_number, error->kind, std::move(error->message)});
      continue;
    }
    const std::string& id = id_of(decoded);
    if (!seen.insert(id).second) {
      result.issues.push_back({line_number, IssueKind::kDuplicateId,
                               std::string("duplicate ") + id_name + " '" + id +
                                   "', first occurrence kept"});
      continue;
    }
    result.records.push_back(std::move(decoded));
  }
  if (source.bad()) throw IoError("read failure while ingesting records");
  return result;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

std::optional<FieldError> decode_post(const json& record, Post& post) {
  if (auto e = require_string(record, "post_id", false, post.post_id)) return e;
  if (auto e = require_string(record, "user_id", false, post.user_id)) return e;
  if (auto e = require_string(record, "text", true, post.text)) return e;
  if (auto e = optional_instant(record, "timestamp", post.timestamp)) return e;
  if (auto e = optional_string(record, "section", post.section)) return e;
  return std::nullopt;
}

std::optional<FieldError> decode_profile(const json& record, UserProfile& profile) {
  if (auto e = require_string(record, "user_id", false, profile.user_id)) return e;
  if (auto e = optional_string(record, "username", profile.username)) return e;
  if (auto e = optional_string(record, "claimed_specialty_raw", profile.claimed_specialty_raw)) {
    return e;
  }
  if (auto e = optional_instant(record, "registered_at", profile.registered_at)) return e;
  return std::nullopt;
}

std::optional<FieldError> decode_label(const json& record, Label& label) {
  if (auto e = require_string(record, "user_id", false, label.user_id)) return e;
  if (auto e = require_string(record, "specialty_id", false, label.specialty_id)) return e;
  return std::nullopt;
}

json post_json(const Post& post) {
  json out = {{"post_id", post.post_id}, {"user_id", post.user_id}, {"text", post.text}};
  if (post.timestamp) out["timestamp"] = *post.timestamp;
  if (post.section) out["section"] = *post.section;
  return out;
}

json profile_json(const UserProfile& profile) {
  json out = {{"user_id", profile.user_id}};
  if (profile.username) out["username"] = *profile.username;
  if (profile.claimed_specialty_raw) out["claimed_specialty_raw"] = *profile.claimed_specialty_raw;
  if (profile.registered_at) out["registered_at"] = *profile.registered_at;
  return out;
}

template <typename Record, typename ToJson>
void write_jsonl(std::ostream& sink, const std::vector<Record>& records, ToJson to_json) {
  for (const auto& record : records) sink << to_json(record).dump() << '\n';
  if (!sink) throw IoError("write failure while emitting JSONL");
}

// Fixed-width unsigned integer at `pos`, advancing it.
bool read_digits(std::string_view s, std::size_t& pos, std::size_t width, int& out) {
  if (pos + width > s.size()) return false;
  const auto* first = s.data() + pos;
  const auto [ptr, ec] = std::from_chars(first, first + width, out);
  if (ec != std::errc{} || ptr != first + width) return false;
  pos += width;
  return true;
}

bool expect(std::string_view s, std::size_t& pos, char c) {
  if (pos >= s.size() || s[pos] != c) return false;
  ++pos;
  return true;
}

}  // namespace

std::string_view to_string(IssueKind kind) {
  switch (kind) {
    case IssueKind::kMalformed: return "malformed";
    case IssueKind::kMissingField: return "missing_field";
    case IssueKind::kInvalidField: return "invalid_field";
    case IssueKind::kDuplicateId: return "duplicate_id";
  }
  return "unknown";
}

const UserProfile* Corpus::profile(std::string_view user_id) const {
  const auto it = profile_index.find(user_id);
  return it == profile_index.end() ? nullptr : &profiles[it->second];
}

IngestResult<Post> ingest_posts(std::istream& source) {
  return ingest_lines<Post>(source, decode_post, [](const Post& p) -> const std::string& {
    return p.post_id;
  }, "post_id");
}

IngestResult<UserProfile> ingest_profiles(std::istream& source) {
  return ingest_lines<UserProfile>(
      source, decode_profile, [](const UserProfile& p) -> const std::string& { return p.user_id; },
      "user_id");
}

IngestResult<Label> ingest_labels(std::istream& source) {
  return ingest_lines<Label>(source, decode_label,
                             [](const Label& l) -> const std::string& { return l.user_id; },
                             "user_id");
}

IngestResult<Post> ingest_posts_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  return ingest_posts(in);
}

IngestResult<UserProfile> ingest_profiles_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  return ingest_profiles(in);
}

IngestResult<Label> ingest_labels_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  return ingest_labels(in);
}

Corpus build_tracks(std::vector<Post> posts, std::vector<UserProfile> profiles,
                    std::string community_id) {
  Corpus corpus;
  corpus.community_id = std::move(community_id);

  // Sort key per post: (has no timestamp, instant, input position).
  struct Key {
    bool untimed;
    std::int64_t instant;
    std::size_t position;
    auto operator<=>(const Key&) const = default;
  };
  std::map<std::string, std::vector<std::pair<Key, std::size_t>>> by_user;
  for (std::size_t i = 0; i < posts.size(); ++i) {
    std::optional<std::int64_t> instant;
    if (posts[i].timestamp) instant = parse_iso8601(*posts[i].timestamp);
    by_user[posts[i].user_id].push_back({Key{!instant, instant.value_or(0), i}, i});
  }
  for (auto& [user_id, entries] : by_user) {
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    InformationTrack track;
    track.user_id = user_id;
    for (const auto& [key, index] : entries) {
      track.char_count += text::codepoint_count(posts[index].text);
      track.messages.push_back(posts[index]);
    }
    track.post_count = track.messages.size();
    corpus.tracks.emplace(user_id, std::move(track));
  }
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    const auto& profile = profiles[i];
    corpus.profile_index.emplace(profile.user_id, i);
    if (!corpus.tracks.contains(profile.user_id)) {
      corpus.tracks.emplace(profile.user_id, InformationTrack{profile.user_id, {}, 0, 0});
    }
  }
  corpus.posts = std::move(posts);
  corpus.profiles = std::move(profiles);
  return corpus;
}

std::optional<std::int64_t> parse_iso8601(std::string_view s) {
  using namespace std::chrono;
  std::size_t pos = 0;
  int year = 0, month = 0, day = 0;
  if (!read_digits(s, pos, 4, year) || !expect(s, pos, '-') || !read_digits(s, pos, 2, month) ||
      !expect(s, pos, '-') || !read_digits(s, pos, 2, day)) {
    return std::nullopt;
  }
  const year_month_day date{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                            std::chrono::day{static_cast<unsigned>(day)}};
  if (!date.ok()) return std::nullopt;
  std::int64_t micros = duration_cast<microseconds>(sys_days{date}.time_since_epoch()).count();
  if (pos == s.size()) return micros;

  if (s[pos] != 'T' && s[pos] != 't' && s[pos] != ' ') return std::nullopt;
  ++pos;
  int hour = 0, minute = 0, second = 0;
  if (!read_digits(s, pos, 2, hour) || !expect(s, pos, ':') || !read_digits(s, pos, 2, minute)) {
    return std::nullopt;
  }
  if (pos < s.size() && s[pos] == ':') {
    ++pos;
    if (!read_digits(s, pos, 2, second)) return std::nullopt;
    if (pos < s.size() && (s[pos] == '.' || s[pos] == ',')) {
      ++pos;
      std::int64_t fraction = 0;
      int digits = 0;
      while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
        if (digits < 6) {
          fraction = fraction * 10 + (s[pos] - '0');
          ++digits;
        }
        ++pos;
      }
      if (digits == 0) return std::nullopt;
      while (digits < 6) {
        fraction *= 10;
        ++digits;
      }
      micros += fraction;
    }
  }
  if (hour > 23 || minute > 59 || second > 60) return std::nullopt;
  micros += (static_cast<std::int64_t>(hour) * 3600 + minute * 60 + second) * 1'000'000;

  if (pos == s.size()) return micros;
  if (s[pos] == 'Z' || s[pos] == 'z') {
    return pos + 1 == s.size() ? std::optional(micros) : std::nullopt;
  }
  if (s[pos] != '+' && s[pos] != '-') return std::nullopt;
  const int sign = s[pos] == '+' ? 1 : -1;
  ++pos;
  int offset_hours = 0, offset_minutes = 0;
  if (!read_digits(s, pos, 2, offset_hours)) return std::nullopt;
  if (pos < s.size() && s[pos] == ':') ++pos;
  if (!read_digits(s, pos, 2, offset_minutes) || pos != s.size()) return std::nullopt;
  if (offset_hours > 23 || offset_minutes > 59) return std::nullopt;
  micros -= sign * (static_cast<std::int64_t>(offset_hours) * 3600 + offset_minutes * 60) *
            1'000'000;
  return micros;
}

std::string format_iso8601(std::int64_t epoch_seconds) {
  using namespace std::chrono;
  const sys_seconds instant{seconds{epoch_seconds}};
  const auto day_point = floor<days>(instant);
  const year_month_day date{day_point};
  const hh_mm_ss time{instant - day_point};
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%04d-%02u-%02uT%02d:%02d:%02dZ", int(date.year()),
                unsigned(date.month()), unsigned(date.day()), int(time.hours().count()),
                int(time.minutes().count()), int(time.seconds().count()));
  return buffer;
}

void write_posts_jsonl(std::ostream& sink, const std::vector<Post>& posts) {
  write_jsonl(sink, posts, post_json);
}

void write_profiles_jsonl(std::ostream& sink, const std::vector<UserProfile>& profiles) {
  write_jsonl(sink, profiles, profile_json);
}

void write_labels_jsonl(std::ostream& sink, const std::vector<Label>& labels) {
  write_jsonl(sink, labels, [](const Label& label) {
    return json{{"user_id", label.user_id}, {"specialty_id", label.specialty_id}};
  });
}

std::string serialize_corpus(const Corpus& corpus) {
  json tracks = json::array();
  for (const auto& [user_id, track] : corpus.tracks) {
    json messages = json::array();
    for (const auto& post : track.messages) messages.push_back(post.post_id);
    tracks.push_back({{"user_id", user_id},
                      {"post_ids", std::move(messages)},
                      {"post_count", track.post_count},
                      {"char_count", track.char_count}});
  }
  json posts = json::array();
  for (const auto& post : corpus.posts) posts.push_back(post_json(post));
  json profiles = json::array();
  for (const auto& profile : corpus.profiles) profiles.push_back(profile_json(profile));
  const json out = {{"community_id", corpus.community_id},
                    {"posts", std::move(posts)},
                    {"profiles", std::move(profiles)},
                    {"tracks", std::move(tracks)}};
  return out.dump(2) + "\n";
}

}  // namespace medverify
