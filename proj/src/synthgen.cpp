#include "medverify/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "medverify/errors.hpp"

namespace medverify::synth {

using json = nlohmann::json;

namespace {

constexpr std::int64_t kBaseEpochSeconds = 1514764800;  // 2018-01-01T00:00:00Z
constexpr std::int64_t kSecondsBetweenPosts = 600;

std::string numbered(const char* prefix, std::uint64_t n, int width) {
  char buffer[48];
  std::snprintf(buffer, sizeof buffer, "%s%0*llu", prefix, width, static_cast<unsigned long long>(n));
  return buffer;
}

std::string base26(std::uint64_t n) {
  std::string out;
  do {
    out.insert(out.begin(), static_cast<char>('a' + n % 26));
    n /= 26;
  } while (n > 0);
  return out;
}

// Literal marker patterns grouped by lexicon group index.
std::vector<std::vector<std::string>> literal_markers(const MarkerLexicon& lexicon) {
  std::vector<std::vector<std::string>> out(lexicon.groups().size());
  for (const auto& marker : lexicon.markers()) {
    if (marker.kind == MarkerKind::kLiteralToken) {
      out[lexicon.group_index(marker.group_id)].push_back(marker.pattern);
    }
  }
  return out;
}

// Noise words never collide with a literal or phrase marker token.
std::vector<std::string> noise_vocabulary(std::uint64_t size, const MarkerLexicon& lexicon) {
  std::set<std::string> reserved;
  for (const auto& marker : lexicon.markers()) {
    if (marker.kind == MarkerKind::kRegex) continue;
    for (auto& token : tokenize(marker.pattern)) reserved.insert(std::move(token));
  }
  std::vector<std::string> words;
  words.reserve(size);
  for (std::uint64_t k = 0; words.size() < size; ++k) {
    std::string word = "nz" + base26(k);
    if (!reserved.contains(word)) words.push_back(std::move(word));
  }
  return words;
}

std::uint64_t share(double fraction, std::uint64_t n) {
  return static_cast<std::uint64_t>(std::llround(fraction * static_cast<double>(n)));
}

ClaimBehavior behavior_from_string(std::string_view name) {
  if (name == "honest") return ClaimBehavior::kHonest;
  if (name == "missing") return ClaimBehavior::kMissing;
  if (name == "wrong") return ClaimBehavior::kWrong;
  if (name == "low_content") return ClaimBehavior::kLowContent;
  throw ValidationError("unknown claimed_behavior '" + std::string(name) + "'");
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << content;
  out.flush();
  if (!out) throw IoError("failed to write " + path.string());
}

}  // namespace

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) throw ValidationError("Rng::below needs a positive bound");
  // Largest multiple of bound that fits; draws at or above it are rejected.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % bound;
}

std::string_view to_string(ClaimBehavior behavior) {
  switch (behavior) {
    case ClaimBehavior::kHonest: return "honest";
    case ClaimBehavior::kMissing: return "missing";
    case ClaimBehavior::kWrong: return "wrong";
    case ClaimBehavior::kLowContent: return "low_content";
  }
  return "unknown";
}

void CommunitySpec::validate(const MarkerLexicon& lexicon) const {
  std::vector<std::string> problems;
  if (community_id.empty()) problems.push_back("community_id must not be empty");
  if (specialties.empty()) problems.push_back("at least one specialty is required");
  if (users_per_specialty < 1) problems.push_back("users_per_specialty must be >= 1");
  if (posts_per_user < 1) problems.push_back("posts_per_user must be >= 1");
  if (tokens_per_post < 1) problems.push_back("tokens_per_post must be >= 1");
  if (noise_vocabulary_size < 1) problems.push_back("noise_vocabulary_size must be >= 1");

  const double fractions[] = {fraction_missing_claim, fraction_wrong_claim, fraction_low_content};
  const char* names[] = {"fraction_missing_claim", "fraction_wrong_claim", "fraction_low_content"};
  double fraction_sum = 0.0;
  for (int k = 0; k < 3; ++k) {
    if (!(fractions[k] >= 0.0 && fractions[k] <= 1.0)) {
      problems.push_back(std::string(names[k]) + " must lie in [0, 1]");
    }
    fraction_sum += fractions[k];
  }
  if (fraction_sum > 1.0 + 1e-12) problems.push_back("claim fractions sum to more than 1");
  if (fraction_wrong_claim > 0.0 && specialties.size() < 2) {
    problems.push_back("wrong claims need at least two specialties");
  }

  const auto literals = literal_markers(lexicon);
  std::set<std::string> seen;
  for (const auto& specialty : specialties) {
    const std::string where = "specialty '" + specialty.specialty_id + "'";
    if (specialty.specialty_id.empty()) problems.push_back("specialty_id must not be empty");
    if (!seen.insert(specialty.specialty_id).second) problems.push_back("duplicate " + where);
    double total = 0.0;
    for (const auto& [group_id, rate] : specialty.marker_group_rates) {
      if (!(rate >= 0.0 && rate <= 1.0)) {
        problems.push_back(where + ": rate for '" + group_id + "' must lie in [0, 1]");
      }
      total += rate;
      std::size_t index = 0;
      try {
        index = lexicon.group_index(group_id);
      } catch (const LookupError&) {
        problems.push_back(where + ": group '" + group_id + "' is not in the lexicon");
        continue;
      }
      if (rate > 0.0 && literals[index].empty()) {
        problems.push_back(where + ": group '" + group_id + "' has no literal_token markers");
      }
    }
    if (total > 1.0 + 1e-12) problems.push_back(where + ": marker rates sum to more than 1");
  }

  const std::uint64_t n = users_per_specialty;
  const std::uint64_t dishonest = std::min<std::uint64_t>(
      n, share(fraction_missing_claim, n) + share(fraction_wrong_claim, n) +
             share(fraction_low_content, n));
  if (n - dishonest <= holdout_per_specialty) {
    problems.push_back("holdout_per_specialty leaves no labeled honest user per specialty");
  }
  if (!problems.empty()) throw ValidationError("invalid community spec", std::move(problems));
}

CommunitySpec spec_from_json(std::string_view json_source) {
  const json doc = json::parse(json_source, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) throw ValidationError("community spec is not a JSON object");
  CommunitySpec spec;
  try {
    spec.community_id = doc.value("community_id", spec.community_id);
    spec.users_per_specialty = doc.at("users_per_specialty").get<std::uint64_t>();
    spec.posts_per_user = doc.at("posts_per_user").get<std::uint64_t>();
    spec.tokens_per_post = doc.at("tokens_per_post").get<std::uint64_t>();
    spec.noise_vocabulary_size = doc.at("noise_vocabulary_size").get<std::uint64_t>();
    spec.fraction_missing_claim = doc.value("fraction_missing_claim", 0.0);
    spec.fraction_wrong_claim = doc.value("fraction_wrong_claim", 0.0);
    spec.fraction_low_content = doc.value("fraction_low_content", 0.0);
    spec.holdout_per_specialty = doc.value("holdout_per_specialty", std::uint64_t{0});
    spec.seed = doc.at("seed").get<std::uint64_t>();
    for (const auto& entry : doc.at("specialties")) {
      SpecialtySpec specialty;
      specialty.specialty_id = entry.at("specialty_id").get<std::string>();
      specialty.marker_group_rates =
          entry.at("marker_group_rates").get<std::map<std::string, double>>();
      spec.specialties.push_back(std::move(specialty));
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("community spec: ") + e.what());
  }
  return spec;
}

CommunitySpec load_spec_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open community spec " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return spec_from_json(buffer.str());
}

Community generate(const CommunitySpec& spec, const MarkerLexicon& lexicon) {
  spec.validate(lexicon);
  Rng rng(spec.seed);
  const auto literals = literal_markers(lexicon);
  const auto noise = noise_vocabulary(spec.noise_vocabulary_size, lexicon);
  const std::size_t n_groups = lexicon.groups().size();

  Community community;
  std::uint64_t user_counter = 0;
  std::uint64_t post_counter = 0;
  for (std::size_t s = 0; s < spec.specialties.size(); ++s) {
    const auto& specialty = spec.specialties[s];
    std::vector<double> rates(n_groups, 0.0);
    for (const auto& [group_id, rate] : specialty.marker_group_rates) {
      rates[lexicon.group_index(group_id)] = rate;
    }

    const std::uint64_t n = spec.users_per_specialty;
    std::vector<ClaimBehavior> behaviors;
    auto append = [&](ClaimBehavior b, std::uint64_t count) {
      for (std::uint64_t k = 0; k < count && behaviors.size() < n; ++k) behaviors.push_back(b);
    };
    append(ClaimBehavior::kMissing, share(spec.fraction_missing_claim, n));
    append(ClaimBehavior::kWrong, share(spec.fraction_wrong_claim, n));
    append(ClaimBehavior::kLowContent, share(spec.fraction_low_content, n));
    append(ClaimBehavior::kHonest, n);
    for (std::size_t k = behaviors.size(); k > 1; --k) {
      std::swap(behaviors[k - 1], behaviors[rng.below(k)]);
    }
    const auto honest_total = static_cast<std::uint64_t>(
        std::count(behaviors.begin(), behaviors.end(), ClaimBehavior::kHonest));
    const std::uint64_t labeled_quota = honest_total - spec.holdout_per_specialty;
    std::uint64_t honest_seen = 0;

    for (std::uint64_t k = 0; k < n; ++k) {
      const ClaimBehavior behavior = behaviors[k];
      const std::string user_id = numbered("u", ++user_counter, 5);

      UserProfile profile;
      profile.user_id = user_id;
      profile.username = numbered("user", user_counter, 5);
      profile.registered_at = format_iso8601(kBaseEpochSeconds - 86400 * 30);
      if (behavior == ClaimBehavior::kWrong) {
        std::uint64_t other = rng.below(spec.specialties.size() - 1);
        if (other >= s) ++other;
        profile.claimed_specialty_raw = spec.specialties[other].specialty_id;
      } else if (behavior != ClaimBehavior::kMissing) {
        profile.claimed_specialty_raw = specialty.specialty_id;
      }
      community.profiles.push_back(std::move(profile));

      bool labeled = false;
      if (behavior == ClaimBehavior::kHonest) {
        labeled = honest_seen++ < labeled_quota;
        if (labeled) community.labels.push_back({user_id, specialty.specialty_id});
      }
      community.truth.emplace(user_id, TruthEntry{specialty.specialty_id, behavior, labeled});

      const bool low = behavior == ClaimBehavior::kLowContent;
      const std::uint64_t posts = low ? kLowContentPosts : spec.posts_per_user;
      const std::uint64_t tokens = low ? kLowContentTokens : spec.tokens_per_post;
      for (std::uint64_t p = 0; p < posts; ++p) {
        std::string text;
        for (std::uint64_t t = 0; t < tokens; ++t) {
          if (t > 0) text += ' ';
          const double u = rng.uniform();
          double cumulative = 0.0;
          std::size_t group = n_groups;
          for (std::size_t g = 0; g < n_groups; ++g) {
            cumulative += rates[g];
            if (u < cumulative) {
              group = g;
              break;
            }
          }
          if (group < n_groups) {
            text += literals[group][rng.below(literals[group].size())];
          } else {
            text += noise[rng.below(noise.size())];
          }
        }
        Post post;
        post.post_id = numbered("p", ++post_counter, 7);
        post.user_id = user_id;
        post.text = std::move(text);
        post.timestamp = format_iso8601(kBaseEpochSeconds +
                                        static_cast<std::int64_t>(post_counter) * kSecondsBetweenPosts);
        community.posts.push_back(std::move(post));
      }
    }
  }
  return community;
}

std::string truth_to_json(const GroundTruth& truth) {
  json out = json::object();
  for (const auto& [user_id, entry] : truth) {
    out[user_id] = {{"true_specialty", entry.true_specialty},
                    {"claimed_behavior", to_string(entry.claimed_behavior)},
                    {"labeled", entry.labeled}};
  }
  return out.dump(2) + "\n";
}

GroundTruth truth_from_json(std::string_view json_source) {
  const json doc = json::parse(json_source, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) throw ValidationError("truth file is not a JSON object");
  GroundTruth truth;
  try {
    for (const auto& [user_id, entry] : doc.items()) {
      truth.emplace(user_id,
                    TruthEntry{entry.at("true_specialty").get<std::string>(),
                               behavior_from_string(entry.at("claimed_behavior").get<std::string>()),
                               entry.value("labeled", false)});
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("truth file: ") + e.what());
  }
  return truth;
}

void write_community(const Community& community, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  std::ostringstream posts;
  write_posts_jsonl(posts, community.posts);
  write_text(dir / "posts.jsonl", posts.str());
  std::ostringstream profiles;
  write_profiles_jsonl(profiles, community.profiles);
  write_text(dir / "profiles.jsonl", profiles.str());
  std::ostringstream labels;
  write_labels_jsonl(labels, community.labels);
  write_text(dir / "labels.jsonl", labels.str());
  write_text(dir / "truth.json", truth_to_json(community.truth));
}

}  // namespace medverify::synth
