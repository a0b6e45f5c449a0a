#pragma once

#include <string>
#include <vector>

#include "medverify/corpus.hpp"
#include "medverify/lexicon.hpp"
#include "medverify/verifier.hpp"
#include "medverify/weighting.hpp"

namespace medverify {

struct TrainParams {
  Thresholds thresholds;
  double epsilon = kDefaultVarianceFloor;
  double cap = kDefaultScoreCap;
};

struct TrainResult {
  ReferenceModel model;
  std::vector<LabeledVector> training;
  std::vector<std::string> warnings;
};

/// scan -> indicator vectors -> reference matrix -> weights -> radii.
/// Labeled users under the content minimums are dropped with a warning.
/// Throws ValidationError for unknown users, duplicate labels, a specialty left
/// without members, or fewer than two specialties.
TrainResult train_model(const Corpus& corpus, const std::vector<Label>& labels,
                        const MarkerLexicon& lexicon, const TrainParams& params);

/// Throws ValidationError when the model does not fit the lexicon or the alias
/// table names unknown specialties.
void check_compatible(const ReferenceModel& model, const MarkerLexicon& lexicon,
                      const AliasTable& aliases);

/// One verdict per track (profiled users and profile-less posters), sorted by
/// user_id.
std::vector<Verdict> verify_corpus(const Corpus& corpus, const ReferenceModel& model,
                                   const MarkerLexicon& lexicon, const AliasTable& aliases,
                                   const Thresholds& thresholds);

}  // namespace medverify
