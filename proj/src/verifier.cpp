#include "medverify/verifier.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "medverify/errors.hpp"
#include "medverify/text.hpp"

namespace medverify {

using json = nlohmann::json;

namespace {

std::string read_file(const std::filesystem::path& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(std::string("cannot open ") + what + " " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError(std::string("cannot read ") + what + " " + path.string());
  return buffer.str();
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (const unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

struct Moments {
  double mean = 0.0;
  double stddev = 0.0;
};

Moments moments(const std::vector<double>& values) {
  if (values.empty()) return {};
  StableSum sum;
  for (const double v : values) sum.add(v);
  const double n = static_cast<double>(values.size());
  const double mean = sum.value() / n;
  StableSum squares;
  for (const double v : values) squares.add((v - mean) * (v - mean));
  return {mean, std::sqrt(squares.value() / n)};
}

template <typename T>
T get_field(const json& doc, const char* key) {
  const auto it = doc.find(key);
  if (it == doc.end()) throw ValidationError(std::string("model: missing '") + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ValidationError(std::string("model: field '") + key + "' has the wrong type");
  }
}

}  // namespace

void ReferenceModel::validate() const {
  std::vector<std::string> problems;
  if (attribute_name != kAttributeName) {
    problems.push_back("attribute_name must be '" + std::string(kAttributeName) + "', got '" +
                       attribute_name + "'");
  }
  if (lexicon_version.empty()) problems.push_back("lexicon_version is empty");
  if (matrix.cols() == 0) problems.push_back("model has no specialties");
  if (weights.weights.size() != matrix.rows()) {
    problems.push_back("weights length " + std::to_string(weights.weights.size()) +
                       " does not match " + std::to_string(matrix.rows()) + " indicators");
  }
  for (const double w : weights.weights) {
    if (!std::isfinite(w) || w < 0.0) {
      problems.push_back("weights must be finite and non-negative");
      break;
    }
  }
  for (const auto& id : matrix.specialty_ids()) {
    const auto it = acceptance_radii.find(id);
    if (it == acceptance_radii.end()) {
      problems.push_back("no acceptance radius for specialty '" + id + "'");
    } else if (!std::isfinite(it->second) || it->second < 0.0) {
      problems.push_back("acceptance radius for '" + id + "' must be finite and non-negative");
    }
  }
  const std::set<std::string> known(matrix.specialty_ids().begin(), matrix.specialty_ids().end());
  if (known.size() != matrix.cols()) problems.push_back("duplicate specialty ids");
  for (const auto& [id, radius] : acceptance_radii) {
    if (!known.contains(id)) problems.push_back("acceptance radius for unknown specialty '" + id + "'");
  }
  const std::set<std::string> indicators(matrix.indicator_ids().begin(), matrix.indicator_ids().end());
  if (indicators.size() != matrix.rows()) problems.push_back("duplicate indicator ids");
  if (!problems.empty()) throw ValidationError("invalid reference model", std::move(problems));
}

std::string model_to_json(const ReferenceModel& model) {
  json matrix = json::array();
  for (std::size_t i = 0; i < model.matrix.rows(); ++i) matrix.push_back(model.matrix.row(i));
  const json out = {{"model_version", model.model_version},
                    {"community_id", model.community_id},
                    {"attribute_name", model.attribute_name},
                    {"lexicon_version", model.lexicon_version},
                    {"indicator_ids", model.matrix.indicator_ids()},
                    {"specialty_ids", model.matrix.specialty_ids()},
                    {"specialty_support", model.matrix.support()},
                    {"reference_matrix", std::move(matrix)},
                    {"weights", model.weights.weights},
                    {"weighting", {{"epsilon", model.weights.epsilon}, {"cap", model.weights.cap}}},
                    {"acceptance_radii", model.acceptance_radii},
                    {"normalization", kNormalization}};
  return out.dump(2) + "\n";
}

ReferenceModel model_from_json(std::string_view json_source) {
  const json doc = json::parse(json_source, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) throw ValidationError("model is not a JSON object");

  const auto normalization = get_field<std::string>(doc, "normalization");
  if (normalization != kNormalization) {
    throw ValidationError("model normalization '" + normalization + "' is not supported");
  }
  ReferenceModel model;
  model.model_version = get_field<std::string>(doc, "model_version");
  model.community_id = get_field<std::string>(doc, "community_id");
  model.attribute_name = get_field<std::string>(doc, "attribute_name");
  model.lexicon_version = get_field<std::string>(doc, "lexicon_version");
  auto indicator_ids = get_field<std::vector<std::string>>(doc, "indicator_ids");
  auto specialty_ids = get_field<std::vector<std::string>>(doc, "specialty_ids");
  const auto rows = get_field<std::vector<std::vector<double>>>(doc, "reference_matrix");
  model.weights.weights = get_field<std::vector<double>>(doc, "weights");
  model.acceptance_radii = get_field<std::map<std::string, double>>(doc, "acceptance_radii");

  std::vector<std::size_t> support(specialty_ids.size(), 1);
  if (doc.contains("specialty_support")) {
    support = get_field<std::vector<std::size_t>>(doc, "specialty_support");
  }
  if (const auto it = doc.find("weighting"); it != doc.end() && it->is_object()) {
    model.weights.epsilon = it->value("epsilon", kDefaultVarianceFloor);
    model.weights.cap = it->value("cap", kDefaultScoreCap);
  }

  if (rows.size() != indicator_ids.size()) {
    throw DimensionMismatch("model: reference_matrix has " + std::to_string(rows.size()) +
                            " rows for " + std::to_string(indicator_ids.size()) + " indicators");
  }
  std::vector<double> entries;
  for (const auto& row : rows) {
    if (row.size() != specialty_ids.size()) {
      throw DimensionMismatch("model: reference_matrix row has " + std::to_string(row.size()) +
                              " entries for " + std::to_string(specialty_ids.size()) +
                              " specialties");
    }
    entries.insert(entries.end(), row.begin(), row.end());
  }
  model.matrix = ReferenceMatrix(std::move(indicator_ids), std::move(specialty_ids),
                                 std::move(entries), std::move(support));
  model.validate();
  return model;
}

ReferenceModel load_model_file(const std::filesystem::path& path) {
  return model_from_json(read_file(path, "model"));
}

std::string content_version(const ReferenceModel& model) {
  ReferenceModel copy = model;
  copy.model_version.clear();
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "fnv1a64-%016llx",
                static_cast<unsigned long long>(fnv1a64(model_to_json(copy))));
  return buffer;
}

double weighted_distance(std::span<const double> reference, std::span<const double> user,
                         std::span<const double> weights) {
  if (reference.size() != user.size() || weights.size() != user.size()) {
    throw DimensionMismatch("distance operands differ in length: reference " +
                            std::to_string(reference.size()) + ", user " +
                            std::to_string(user.size()) + ", weights " +
                            std::to_string(weights.size()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < user.size(); ++i) {
    const double d = reference[i] - user[i];
    sum += d * d * weights[i];
  }
  return std::sqrt(sum);
}

double distance(const IndicatorVector& user, const ReferenceModel& model,
                std::string_view specialty_id) {
  if (user.values.size() != model.matrix.rows()) {
    throw DimensionMismatch("user vector has " + std::to_string(user.values.size()) +
                            " indicators, model has " + std::to_string(model.matrix.rows()));
  }
  const auto column = model.matrix.column(model.matrix.specialty_index(specialty_id));
  return weighted_distance(column, user.values, model.weights.weights);
}

Prediction classify(const IndicatorVector& user, const ReferenceModel& model) {
  const auto& matrix = model.matrix;
  if (matrix.cols() == 0) throw ValidationError("model has no specialties");
  if (user.values.size() != matrix.rows()) {
    throw DimensionMismatch("user vector has " + std::to_string(user.values.size()) +
                            " indicators, model has " + std::to_string(matrix.rows()));
  }
  Prediction out;
  out.user_id = user.user_id;
  out.distances.reserve(matrix.cols());
  std::size_t best = 0;
  for (std::size_t j = 0; j < matrix.cols(); ++j) {
    const double d = weighted_distance(matrix.column(j), user.values, model.weights.weights);
    out.distances.emplace_back(matrix.specialty_ids()[j], d);
    if (d < out.distances[best].second) best = j;
  }
  out.best = out.distances[best].first;
  out.best_distance = out.distances[best].second;
  if (matrix.cols() > 1) {
    double second = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < matrix.cols(); ++j) {
      if (j != best) second = std::min(second, out.distances[j].second);
    }
    out.margin = second - out.best_distance;
    out.confidence = out.margin / (out.best_distance + second + 1e-12);
  }
  return out;
}

void Thresholds::validate() const {
  if (!std::isfinite(radius_multiplier) || radius_multiplier < 0.0) {
    throw ValidationError("radius multiplier must be finite and non-negative");
  }
}

std::map<std::string, double> calibrate_radii(std::span<const LabeledVector> training,
                                              const ReferenceMatrix& matrix,
                                              const WeightVector& weights,
                                              double radius_multiplier) {
  if (training.empty()) throw ValidationError("training set is empty");
  if (!std::isfinite(radius_multiplier) || radius_multiplier < 0.0) {
    throw ValidationError("radius multiplier must be finite and non-negative");
  }
  std::vector<std::vector<double>> per_class(matrix.cols());
  std::vector<double> pooled;
  pooled.reserve(training.size());
  for (const auto& item : training) {
    const std::size_t j = matrix.specialty_index(item.specialty_id);
    const double d = weighted_distance(matrix.column(j), item.vector.values, weights.weights);
    per_class[j].push_back(d);
    pooled.push_back(d);
  }
  const Moments pooled_stats = moments(pooled);
  std::map<std::string, double> radii;
  for (std::size_t j = 0; j < matrix.cols(); ++j) {
    const Moments stats = per_class[j].size() >= 3 ? moments(per_class[j]) : pooled_stats;
    radii[matrix.specialty_ids()[j]] = std::max(0.0, stats.mean + radius_multiplier * stats.stddev);
  }
  return radii;
}

AliasTable::AliasTable(const std::map<std::string, std::string>& aliases) {
  std::vector<std::string> problems;
  for (const auto& [claim, target] : aliases) {
    const std::string key = text::normalize_claim(claim);
    if (key.empty()) {
      problems.push_back("alias key '" + claim + "' is blank after normalization");
      continue;
    }
    const auto [it, inserted] = aliases_.emplace(key, target);
    if (!inserted && it->second != target) {
      problems.push_back("alias '" + key + "' maps to both '" + it->second + "' and '" + target + "'");
    }
  }
  if (!problems.empty()) throw ValidationError("invalid alias table", std::move(problems));
}

std::optional<std::string> AliasTable::resolve(std::string_view claim,
                                               std::span<const std::string> specialty_ids) const {
  const std::string key = text::normalize_claim(claim);
  if (key.empty()) return std::nullopt;
  if (const auto it = aliases_.find(key); it != aliases_.end()) return it->second;
  for (const auto& id : specialty_ids) {
    if (text::normalize_claim(id) == key) return id;
  }
  return std::nullopt;
}

std::vector<std::string> AliasTable::unknown_targets(
    std::span<const std::string> specialty_ids) const {
  const std::set<std::string> known(specialty_ids.begin(), specialty_ids.end());
  std::set<std::string> unknown;
  for (const auto& [claim, target] : aliases_) {
    if (!known.contains(target)) unknown.insert(target);
  }
  return {unknown.begin(), unknown.end()};
}

AliasTable load_aliases(std::string_view json_source) {
  const json doc = json::parse(json_source, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw ValidationError("alias table must be a JSON object of claim -> specialty_id");
  }
  std::map<std::string, std::string> entries;
  for (const auto& [claim, target] : doc.items()) {
    if (!target.is_string()) {
      throw ValidationError("alias '" + claim + "' must map to a specialty_id string");
    }
    entries.emplace(claim, target.get<std::string>());
  }
  return AliasTable(entries);
}

AliasTable load_aliases_file(const std::filesystem::path& path) {
  return load_aliases(read_file(path, "alias table"));
}

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::kVerified: return "Verified";
    case Outcome::kIncorrectClaim: return "IncorrectClaim";
    case Outcome::kMissingClaim: return "MissingClaim";
    case Outcome::kNonMedical: return "NonMedical";
    case Outcome::kUnverified: return "Unverified";
  }
  return "Unknown";
}

std::optional<Outcome> outcome_from_string(std::string_view name) {
  for (const Outcome o : kAllOutcomes) {
    if (to_string(o) == name) return o;
  }
  return std::nullopt;
}

Verdict categorize(const UserProfile* profile, const TrackAnalysis& analysis,
                   const Prediction* prediction, const ReferenceModel& model,
                   const Thresholds& thresholds, const AliasTable& aliases) {
  Verdict verdict;
  verdict.user_id = analysis.user_id;
  verdict.token_count = analysis.token_count;
  verdict.post_count = analysis.post_count;
  bool has_claim = false;
  if (profile != nullptr && profile->claimed_specialty_raw) {
    verdict.claimed_raw = profile->claimed_specialty_raw;
    has_claim = !text::normalize_claim(*profile->claimed_specialty_raw).empty();
    if (has_claim) {
      verdict.claimed_id = aliases.resolve(*profile->claimed_specialty_raw,
                                           model.matrix.specialty_ids());
    }
  }

  if (prediction == nullptr || analysis.token_count < thresholds.min_tokens ||
      analysis.post_count < thresholds.min_posts) {
    verdict.outcome = Outcome::kUnverified;
    return verdict;
  }

  verdict.predicted_id = prediction->best;
  verdict.best_distance = prediction->best_distance;
  verdict.margin = prediction->margin;
  verdict.confidence = prediction->confidence;

  const auto radius = model.acceptance_radii.find(prediction->best);
  if (radius == model.acceptance_radii.end()) {
    throw LookupError("no acceptance radius for specialty '" + prediction->best + "'");
  }
  if (prediction->best_distance > radius->second) {
    verdict.outcome = Outcome::kNonMedical;
  } else if (!has_claim) {
    verdict.outcome = Outcome::kMissingClaim;
  } else if (verdict.claimed_id == prediction->best) {
    verdict.outcome = Outcome::kVerified;
  } else {
    verdict.outcome = Outcome::kIncorrectClaim;
  }
  return verdict;
}

}  // namespace medverify
