#include "medverify/lexicon.hpp"

#include <unicode/regex.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "medverify/errors.hpp"
#include "medverify/text.hpp"

namespace medverify {

using json = nlohmann::json;

namespace {

bool is_word_char(UChar32 c) {
  return u_isalnum(c) || (U_GET_GC_MASK(c) & U_GC_M_MASK) != 0;
}

bool is_joiner(UChar32 c) {
  switch (c) {
    case 0x0027:  // apostrophe
    case 0x2019:  // right single quotation mark
    case 0x02BC:  // modifier letter apostrophe
    case 0x002D:  // hyphen-minus
    case 0x2010:  // hyphen
    case 0x2011:  // non-breaking hyphen
      return true;
    default:
      return false;
  }
}

std::string fold(std::string_view raw) {
  const bool ascii = std::all_of(raw.begin(), raw.end(),
                                 [](char c) { return static_cast<unsigned char>(c) < 0x80; });
  if (!ascii) return text::lower(raw);
  std::string out(raw);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

// Tokens of already-normalized text, as byte ranges.
template <typename Emit>
void split_tokens(std::string_view nfc_text, Emit emit) {
  struct Cp {
    UChar32 c;
    int32_t begin;
    int32_t end;
  };
  std::vector<Cp> cps;
  const auto length = static_cast<int32_t>(nfc_text.size());
  for (int32_t offset = 0; offset < length;) {
    const int32_t begin = offset;
    UChar32 c;
    U8_NEXT(nfc_text.data(), offset, length, c);
    cps.push_back({c, begin, offset});
  }
  std::size_t i = 0;
  while (i < cps.size()) {
    if (!is_word_char(cps[i].c)) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    ++i;
    while (i < cps.size()) {
      if (is_word_char(cps[i].c)) {
        ++i;
      } else if (is_joiner(cps[i].c) && i + 1 < cps.size() && is_word_char(cps[i + 1].c)) {
        i += 2;
      } else {
        break;
      }
    }
    emit(nfc_text.substr(cps[start].begin, cps[i - 1].end - cps[start].begin));
  }
}

icu::UnicodeString to_unicode(std::string_view utf8) {
  return icu::UnicodeString::fromUTF8(
      icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
}

std::optional<MarkerKind> kind_from_string(std::string_view name) {
  if (name == "literal_token") return MarkerKind::kLiteralToken;
  if (name == "phrase") return MarkerKind::kPhrase;
  if (name == "regex") return MarkerKind::kRegex;
  return std::nullopt;
}

}  // namespace

namespace detail {

// Token tries for literal and phrase markers (one keyed on folded tokens, one
// on raw tokens for case-sensitive markers) plus compiled regexes.
class CompiledMatcher {
 public:
  explicit CompiledMatcher(std::size_t group_count) : group_count_(group_count) {
    folded_.emplace_back();
    raw_.emplace_back();
  }

  void add_sequence(const std::vector<std::string>& tokens, bool case_sensitive,
                    std::uint32_t group) {
    auto& trie = case_sensitive ? raw_ : folded_;
    std::uint32_t node = 0;
    for (const auto& token : tokens) {
      const auto it = trie[node].next.find(token);
      if (it != trie[node].next.end()) {
        node = it->second;
      } else {
        const auto child = static_cast<std::uint32_t>(trie.size());
        trie[node].next.emplace(token, child);
        trie.emplace_back();
        node = child;
      }
    }
    trie[node].groups.push_back(group);
    (case_sensitive ? has_raw_ : has_folded_) = true;
  }

  void add_regex(std::unique_ptr<icu::RegexPattern> pattern, std::uint32_t group) {
    regexes_.push_back({std::move(pattern), group});
  }

  std::size_t group_count() const noexcept { return group_count_; }

  void scan(std::string_view utf8, std::span<std::uint64_t> hits,
            std::uint64_t& token_count) const {
    const std::string normalized = text::nfc(utf8);
    const std::vector<Token> tokens = tokenize_normalized(normalized);
    token_count += tokens.size();
    if (has_folded_) walk(folded_, tokens, &Token::folded, hits);
    if (has_raw_) walk(raw_, tokens, &Token::raw, hits);
    if (!regexes_.empty()) {
      const icu::UnicodeString input = to_unicode(normalized);
      for (const auto& entry : regexes_) {
        UErrorCode status = U_ZERO_ERROR;
        std::unique_ptr<icu::RegexMatcher> matcher(entry.pattern->matcher(input, status));
        if (U_FAILURE(status)) throw Error("regex matcher creation failed");
        while (matcher->find(status) && U_SUCCESS(status)) {
          const int32_t start = matcher->start(status);
          const int32_t end = matcher->end(status);
          if (end > start) ++hits[entry.group];
        }
      }
    }
  }

  static std::vector<Token> tokenize_normalized(std::string_view normalized) {
    std::vector<Token> tokens;
    split_tokens(normalized, [&](std::string_view raw) {
      tokens.push_back({std::string(raw), fold(raw)});
    });
    return tokens;
  }

 private:
  struct Node {
    std::unordered_map<std::string, std::uint32_t> next;
    std::vector<std::uint32_t> groups;
  };
  struct RegexEntry {
    std::unique_ptr<icu::RegexPattern> pattern;
    std::uint32_t group;
  };

  // Every start position walks the trie as far as the tokens allow, so
  // overlapping phrase occurrences all count.
  static void walk(const std::vector<Node>& trie, const std::vector<Token>& tokens,
                   std::string Token::*field, std::span<std::uint64_t> hits) {
    for (std::size_t start = 0; start < tokens.size(); ++start) {
      std::uint32_t node = 0;
      for (std::size_t k = start; k < tokens.size(); ++k) {
        const auto it = trie[node].next.find(tokens[k].*field);
        if (it == trie[node].next.end()) break;
        node = it->second;
        for (const auto group : trie[node].groups) ++hits[group];
      }
    }
  }

  std::size_t group_count_;
  std::vector<Node> folded_;
  std::vector<Node> raw_;
  bool has_folded_ = false;
  bool has_raw_ = false;
  std::vector<RegexEntry> regexes_;
};

}  // namespace detail

std::string_view to_string(MarkerKind kind) {
  switch (kind) {
    case MarkerKind::kLiteralToken: return "literal_token";
    case MarkerKind::kPhrase: return "phrase";
    case MarkerKind::kRegex: return "regex";
  }
  return "unknown";
}

std::vector<Token> tokenize_detailed(std::string_view utf8) {
  return detail::CompiledMatcher::tokenize_normalized(text::nfc(utf8));
}

std::vector<std::string> tokenize(std::string_view utf8) {
  std::vector<std::string> out;
  for (auto& token : tokenize_detailed(utf8)) out.push_back(std::move(token.folded));
  return out;
}

MarkerLexicon MarkerLexicon::create(std::string lexicon_version,
                                    std::vector<IndicatorGroup> groups,
                                    std::vector<MarkerDef> markers) {
  std::vector<std::string> violations;
  if (lexicon_version.empty()) violations.push_back("lexicon_version must not be empty");
  if (groups.empty()) violations.push_back("lexicon declares no indicator groups");

  std::unordered_map<std::string, std::uint32_t> group_slots;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const auto& id = groups[i].group_id;
    if (id.empty()) {
      violations.push_back("group #" + std::to_string(i) + " has an empty group_id");
    } else if (!group_slots.emplace(id, static_cast<std::uint32_t>(i)).second) {
      violations.push_back("duplicate group_id '" + id + "'");
    }
  }

  auto matcher = std::make_shared<detail::CompiledMatcher>(groups.size());
  std::unordered_set<std::string> marker_ids;
  for (std::size_t i = 0; i < markers.size(); ++i) {
    auto& marker = markers[i];
    const std::string name =
        marker.marker_id.empty() ? "marker #" + std::to_string(i) : "marker '" + marker.marker_id + "'";
    if (marker.marker_id.empty()) {
      violations.push_back(name + " has an empty marker_id");
    } else if (!marker_ids.insert(marker.marker_id).second) {
      violations.push_back("duplicate marker_id '" + marker.marker_id + "'");
    }
    const auto slot = group_slots.find(marker.group_id);
    if (slot == group_slots.end()) {
      violations.push_back(name + " references undeclared group '" + marker.group_id + "'");
    }
    if (marker.pattern.empty()) {
      violations.push_back(name + " has an empty pattern");
      continue;
    }
    const std::uint32_t group = slot == group_slots.end() ? 0 : slot->second;
    const bool usable = slot != group_slots.end();

    if (marker.kind == MarkerKind::kRegex) {
      UErrorCode status = U_ZERO_ERROR;
      UParseError parse_error{};
      const uint32_t flags = marker.case_sensitive ? 0 : UREGEX_CASE_INSENSITIVE;
      std::unique_ptr<icu::RegexPattern> compiled(icu::RegexPattern::compile(
          to_unicode(text::nfc(marker.pattern)), flags, parse_error, status));
      if (U_FAILURE(status)) {
        violations.push_back(name + " has a regex that does not compile (" +
                             u_errorName(status) + " at offset " +
                             std::to_string(parse_error.offset) + "): " + marker.pattern);
      } else if (usable) {
        matcher->add_regex(std::move(compiled), group);
      }
      continue;
    }

    const auto tokens = tokenize_detailed(marker.pattern);
    if (tokens.empty()) {
      violations.push_back(name + " pattern contains no word tokens: " + marker.pattern);
      continue;
    }
    if (marker.kind == MarkerKind::kLiteralToken && tokens.size() != 1) {
      violations.push_back(name + " is literal_token but its pattern spans " +
                           std::to_string(tokens.size()) + " tokens; use kind 'phrase'");
      continue;
    }
    std::vector<std::string> keys;
    for (const auto& token : tokens) keys.push_back(marker.case_sensitive ? token.raw : token.folded);
    if (usable) matcher->add_sequence(keys, marker.case_sensitive, group);
  }

  if (!violations.empty()) throw ValidationError("invalid marker lexicon", std::move(violations));

  MarkerLexicon lexicon;
  lexicon.version_ = std::move(lexicon_version);
  lexicon.groups_ = std::move(groups);
  lexicon.markers_ = std::move(markers);
  lexicon.matcher_ = std::move(matcher);
  return lexicon;
}

std::vector<std::string> MarkerLexicon::group_ids() const {
  std::vector<std::string> ids;
  ids.reserve(groups_.size());
  for (const auto& group : groups_) ids.push_back(group.group_id);
  return ids;
}

std::size_t MarkerLexicon::group_index(std::string_view group_id) const {
  for (std::size_t i = 0; i < groups_.size(); ++i) {
    if (groups_[i].group_id == group_id) return i;
  }
  throw LookupError("unknown indicator group '" + std::string(group_id) + "'");
}

MarkerLexicon load_lexicon(std::string_view json_source) {
  const json doc = json::parse(json_source, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw ValidationError("marker lexicon is not a JSON object");
  }
  std::vector<std::string> violations;
  auto string_field = [&](const json& obj, const char* key, const std::string& where,
                          bool required) -> std::string {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) {
      if (required) violations.push_back(where + ": missing '" + key + "'");
      return {};
    }
    if (!it->is_string()) {
      violations.push_back(where + ": '" + key + "' must be a string");
      return {};
    }
    return it->get<std::string>();
  };

  std::string version = string_field(doc, "lexicon_version", "lexicon", true);

  std::vector<IndicatorGroup> groups;
  const auto groups_it = doc.find("groups");
  if (groups_it == doc.end() || !groups_it->is_array()) {
    violations.push_back("lexicon: 'groups' must be an array");
  } else {
    for (std::size_t i = 0; i < groups_it->size(); ++i) {
      const auto& entry = (*groups_it)[i];
      const std::string where = "groups[" + std::to_string(i) + "]";
      if (!entry.is_object()) {
        violations.push_back(where + " must be an object");
        continue;
      }
      groups.push_back(
          {string_field(entry, "group_id", where, true), string_field(entry, "label", where, false)});
    }
  }

  std::vector<MarkerDef> markers;
  const auto markers_it = doc.find("markers");
  if (markers_it == doc.end() || !markers_it->is_array()) {
    violations.push_back("lexicon: 'markers' must be an array");
  } else {
    for (std::size_t i = 0; i < markers_it->size(); ++i) {
      const auto& entry = (*markers_it)[i];
      const std::string where = "markers[" + std::to_string(i) + "]";
      if (!entry.is_object()) {
        violations.push_back(where + " must be an object");
        continue;
      }
      MarkerDef marker;
      marker.marker_id = string_field(entry, "marker_id", where, true);
      marker.group_id = string_field(entry, "group_id", where, true);
      marker.pattern = string_field(entry, "pattern", where, true);
      const std::string kind = string_field(entry, "kind", where, true);
      if (const auto parsed = kind_from_string(kind)) {
        marker.kind = *parsed;
      } else if (!kind.empty()) {
        violations.push_back(where + ": unknown kind '" + kind + "'");
      }
      if (const auto cs = entry.find("case_sensitive"); cs != entry.end() && !cs->is_null()) {
        if (cs->is_boolean()) {
          marker.case_sensitive = cs->get<bool>();
        } else {
          violations.push_back(where + ": 'case_sensitive' must be a boolean");
        }
      }
      markers.push_back(std::move(marker));
    }
  }
  if (!violations.empty()) throw ValidationError("invalid marker lexicon", std::move(violations));
  return MarkerLexicon::create(std::move(version), std::move(groups), std::move(markers));
}

MarkerLexicon load_lexicon_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open lexicon " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError("cannot read lexicon " + path.string());
  return load_lexicon(buffer.str());
}

std::string lexicon_to_json(const MarkerLexicon& lexicon) {
  json groups = json::array();
  for (const auto& group : lexicon.groups()) {
    groups.push_back({{"group_id", group.group_id}, {"label", group.label}});
  }
  json markers = json::array();
  for (const auto& marker : lexicon.markers()) {
    markers.push_back({{"marker_id", marker.marker_id},
                       {"group_id", marker.group_id},
                       {"kind", to_string(marker.kind)},
                       {"pattern", marker.pattern},
                       {"case_sensitive", marker.case_sensitive}});
  }
  const json out = {{"lexicon_version", lexicon.version()},
                    {"groups", std::move(groups)},
                    {"markers", std::move(markers)}};
  return out.dump(2) + "\n";
}

std::vector<std::uint64_t> scan_text(std::string_view utf8, const MarkerLexicon& lexicon,
                                     std::uint64_t* token_count) {
  std::vector<std::uint64_t> hits(lexicon.groups().size(), 0);
  std::uint64_t tokens = 0;
  lexicon.matcher().scan(utf8, hits, tokens);
  if (token_count != nullptr) *token_count = tokens;
  return hits;
}

TrackAnalysis scan_track(const InformationTrack& track, const MarkerLexicon& lexicon) {
  std::vector<std::uint64_t> hits(lexicon.groups().size(), 0);
  TrackAnalysis analysis;
  analysis.user_id = track.user_id;
  analysis.post_count = track.messages.size();
  for (const auto& message : track.messages) {
    lexicon.matcher().scan(message.text, hits, analysis.token_count);
  }
  for (std::size_t i = 0; i < hits.size(); ++i) {
    analysis.hits_per_group.emplace(lexicon.groups()[i].group_id, hits[i]);
  }
  return analysis;
}

}  // namespace medverify
