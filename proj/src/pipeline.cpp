#include "medverify/pipeline.hpp"

#include <set>
#include <unordered_map>
#include <unordered_set>

#include "medverify/errors.hpp"
#include "medverify/indicators.hpp"

namespace medverify {

TrainResult train_model(const Corpus& corpus, const std::vector<Label>& labels,
                        const MarkerLexicon& lexicon, const TrainParams& params) {
  params.thresholds.validate();
  std::vector<std::string> problems;
  std::unordered_set<std::string> labeled;
  for (const auto& label : labels) {
    if (!labeled.insert(label.user_id).second) {
      problems.push_back("user '" + label.user_id + "' is labeled more than once");
    }
    if (!corpus.tracks.contains(label.user_id)) {
      problems.push_back("labeled user '" + label.user_id + "' is not in the corpus");
    }
  }
  if (labels.empty()) problems.push_back("no training labels");
  if (!problems.empty()) throw ValidationError("invalid training labels", std::move(problems));

  TrainResult result;
  std::vector<std::string> specialties;  // first-appearance order
  std::unordered_map<std::string, std::size_t> kept;
  for (const auto& label : labels) {
    if (kept.emplace(label.specialty_id, 0).second) specialties.push_back(label.specialty_id);
    const auto analysis = scan_track(corpus.tracks.at(label.user_id), lexicon);
    if (analysis.token_count < params.thresholds.min_tokens ||
        analysis.post_count < params.thresholds.min_posts || analysis.token_count == 0) {
      result.warnings.push_back("excluding labeled user '" + label.user_id + "': " +
                                std::to_string(analysis.token_count) + " tokens, " +
                                std::to_string(analysis.post_count) +
                                " posts (below content minimums)");
      continue;
    }
    result.training.push_back({compute_indicator_vector(analysis, lexicon), label.specialty_id});
    ++kept[label.specialty_id];
  }
  for (const auto& specialty : specialties) {
    if (kept[specialty] == 0) {
      problems.push_back("specialty '" + specialty + "' has no training users above the content minimums");
    }
  }
  if (specialties.size() < 2) {
    problems.push_back("training needs at least two specialties, got " +
                       std::to_string(specialties.size()));
  }
  if (!problems.empty()) throw ValidationError("cannot train model", std::move(problems));

  ReferenceModel& model = result.model;
  model.community_id = corpus.community_id;
  model.lexicon_version = lexicon.version();
  model.matrix = build_reference_matrix(result.training, lexicon.group_ids());
  model.weights = compute_weights(result.training, params.epsilon, params.cap);
  model.acceptance_radii = calibrate_radii(result.training, model.matrix, model.weights,
                                           params.thresholds.radius_multiplier);
  model.validate();
  model.model_version = content_version(model);
  return result;
}

void check_compatible(const ReferenceModel& model, const MarkerLexicon& lexicon,
                      const AliasTable& aliases) {
  if (model.lexicon_version != lexicon.version()) {
    throw ValidationError("lexicon version mismatch: model was trained with '" +
                          model.lexicon_version + "', lexicon is '" + lexicon.version() + "'");
  }
  if (model.matrix.indicator_ids() != lexicon.group_ids()) {
    throw DimensionMismatch("model indicators (" + std::to_string(model.matrix.rows()) +
                            ") do not match lexicon groups (" +
                            std::to_string(lexicon.groups().size()) + ")");
  }
  const auto unknown = aliases.unknown_targets(model.matrix.specialty_ids());
  if (!unknown.empty()) {
    std::vector<std::string> problems;
    for (const auto& id : unknown) problems.push_back("alias target '" + id + "' is not a model specialty");
    throw ValidationError("alias table does not fit the model", std::move(problems));
  }
}

std::vector<Verdict> verify_corpus(const Corpus& corpus, const ReferenceModel& model,
                                   const MarkerLexicon& lexicon, const AliasTable& aliases,
                                   const Thresholds& thresholds) {
  check_compatible(model, lexicon, aliases);
  thresholds.validate();
  std::vector<Verdict> verdicts;
  verdicts.reserve(corpus.tracks.size());
  for (const auto& [user_id, track] : corpus.tracks) {
    const auto analysis = scan_track(track, lexicon);
    std::optional<Prediction> prediction;
    if (analysis.token_count > 0 && analysis.token_count >= thresholds.min_tokens &&
        analysis.post_count >= thresholds.min_posts) {
      prediction = classify(compute_indicator_vector(analysis, lexicon), model);
    }
    verdicts.push_back(categorize(corpus.profile(user_id), analysis,
                                  prediction ? &*prediction : nullptr, model, thresholds, aliases));
  }
  return verdicts;
}

}  // namespace medverify
