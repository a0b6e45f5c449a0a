#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "medverify/corpus.hpp"

namespace medverify {

enum class MarkerKind { kLiteralToken, kPhrase, kRegex };

std::string_view to_string(MarkerKind kind);

struct MarkerDef {
  std::string marker_id;
  std::string group_id;
  MarkerKind kind = MarkerKind::kLiteralToken;
  std::string pattern;
  bool case_sensitive = false;
};

/// One indicator: a semantic group of markers.
struct IndicatorGroup {
  std::string group_id;
  std::string label;
};

struct Token {
  std::string raw;     // NFC text as written
  std::string folded;  // lowercased raw
};

/// Splits NFC-normalized text on anything that is not a letter, digit, or
/// combining mark. Apostrophes and hyphens stay inside a token when both
/// neighbours are word characters ("п'ять", "x-ray").
std::vector<Token> tokenize_detailed(std::string_view utf8);

/// Lowercased tokens of tokenize_detailed.
std::vector<std::string> tokenize(std::string_view utf8);

namespace detail {
class CompiledMatcher;
}

/// Immutable, validated marker catalog. Group order is the canonical indicator
/// order used by every vector and matrix derived from it.
class MarkerLexicon {
 public:
  /// Validates and compiles. Throws ValidationError listing every violation.
  static MarkerLexicon create(std::string lexicon_version, std::vector<IndicatorGroup> groups,
                              std::vector<MarkerDef> markers);

  const std::string& version() const noexcept { return version_; }
  const std::vector<IndicatorGroup>& groups() const noexcept { return groups_; }
  const std::vector<MarkerDef>& markers() const noexcept { return markers_; }
  std::vector<std::string> group_ids() const;
  std::size_t group_index(std::string_view group_id) const;  // throws LookupError

  const detail::CompiledMatcher& matcher() const noexcept { return *matcher_; }

 private:
  MarkerLexicon() = default;

  std::string version_;
  std::vector<IndicatorGroup> groups_;
  std::vector<MarkerDef> markers_;
  std::shared_ptr<const detail::CompiledMatcher> matcher_;
};

MarkerLexicon load_lexicon(std::string_view json_source);
MarkerLexicon load_lexicon_file(const std::filesystem::path& path);
std::string lexicon_to_json(const MarkerLexicon& lexicon);

/// Raw marker hits of one track, before length normalization.
struct TrackAnalysis {
  std::string user_id;
  std::uint64_t token_count = 0;
  std::uint64_t post_count = 0;
  std::map<std::string, std::uint64_t> hits_per_group;  // every declared group present

  bool operator==(const TrackAnalysis&) const = default;
};

/// Literal markers match single tokens, phrases match consecutive tokens inside
/// one message (every start position counts), regexes match the NFC text of
/// each message with leftmost non-overlapping, non-empty matches.
TrackAnalysis scan_track(const InformationTrack& track, const MarkerLexicon& lexicon);

/// Per-group hits of a single text, in lexicon group order.
std::vector<std::uint64_t> scan_text(std::string_view utf8, const MarkerLexicon& lexicon,
                                     std::uint64_t* token_count = nullptr);

}  // namespace medverify
