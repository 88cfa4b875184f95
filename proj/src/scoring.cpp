#include "cobra/scoring.hpp"

#include <unordered_set>

#include "cobra/numeric.hpp"

namespace cobra {

ClassIndex predict_class(std::span<const double> probs) noexcept {
  ClassIndex best = 0;
  for (ClassIndex k = 1; k < probs.size(); ++k) {
    if (probs[k] > probs[best]) best = k;
  }
  return best;
}

double confidence(std::span<const double> probs) noexcept {
  return probs.empty() ? 0.0 : probs[predict_class(probs)];
}

SubjectScore cobra_score(const SubjectDataset& dataset, const ScoreConfig& cfg) {
  if (dataset.records.empty()) {
    throw Error(ErrorCode::InvalidArgument,
                "subject " + dataset.subject_id + " has no records");
  }
  const std::size_t num_classes = cfg.class_set.num_classes();
  std::vector<double> confidences;
  confidences.reserve(dataset.records.size());
  for (const auto& rec : dataset.records) {
    if (rec.probs.size() != num_classes) {
      throw Error(ErrorCode::WrongArity,
                  "record " + rec.point_id + " of subject " + dataset.subject_id +
                      " does not have the configured class count");
    }
    if (cfg.class_set.is_relevant(predict_class(rec.probs))) {
      confidences.push_back(confidence(rec.probs));
    }
  }

  SubjectScore out{dataset.subject_id, std::nullopt, dataset.records.size(),
                   confidences.size()};
  if (confidences.empty()) {
    if (cfg.missing_policy == MissingPolicy::ErrorOut) {
      throw Error(ErrorCode::EmptyRelevantSubset,
                  "subject " + dataset.subject_id +
                      " has no datapoints predicted in a relevant class");
    }
    return out;
  }
  out.score = pairwise_mean(confidences);
  return out;
}

std::vector<SubjectScore> cohort_scores(std::span<const SubjectDataset> datasets,
                                        const ScoreConfig& cfg) {
  std::unordered_set<std::string> seen;
  std::vector<SubjectScore> out;
  out.reserve(datasets.size());
  for (const auto& ds : datasets) {
    if (!seen.insert(ds.subject_id).second) {
      throw Error(ErrorCode::InvalidArgument,
                  "subject " + ds.subject_id + " appears more than once");
    }
    out.push_back(cobra_score(ds, cfg));
  }
  return out;
}

std::map<std::string, std::vector<SubjectScore>> cobra_by_group(
    std::span<const SubjectDataset> datasets, const ScoreConfig& cfg) {
  std::map<std::string, std::vector<SubjectScore>> out;
  for (const auto& ds : datasets) {
    std::map<std::string, SubjectDataset> split;
    for (const auto& rec : ds.records) {
      auto [it, inserted] =
          split.try_emplace(rec.group_or_default(), SubjectDataset{ds.subject_id, {}});
      it->second.records.push_back(rec);
    }
    for (const auto& [group, part] : split) {
      out[group].push_back(cobra_score(part, cfg));
    }
  }
  return out;
}

}  // namespace cobra
