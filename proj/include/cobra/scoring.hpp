#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "cobra/core.hpp"

namespace cobra {

enum class MissingPolicy {
  ExcludeSubject,  // score becomes MISSING
  ErrorOut,        // throw EmptyRelevantSubset
};

struct ScoreConfig {
  ClassSet class_set;
  MissingPolicy missing_policy = MissingPolicy::ExcludeSubject;
};

/// argmax; ties go to the lowest index.
ClassIndex predict_class(std::span<const double> probs) noexcept;

/// Largest class probability.
double confidence(std::span<const double> probs) noexcept;

/// Mean confidence over the subject's records whose predicted class is
/// relevant. The score is MISSING (or an error under ErrorOut) when no
/// record qualifies.
SubjectScore cobra_score(const SubjectDataset& dataset, const ScoreConfig& cfg);

/// One score per dataset, in input order. Subject ids must be distinct.
std::vector<SubjectScore> cohort_scores(std::span<const SubjectDataset> datasets,
                                        const ScoreConfig& cfg);

/// Scores restricted to each group's records. Records without a group fall
/// into kNoGroup; a subject with no records in a group is omitted from it.
std::map<std::string, std::vector<SubjectScore>> cobra_by_group(
    std::span<const SubjectDataset> datasets, const ScoreConfig& cfg);

}  // namespace cobra
