#include "cobra/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cobra/numeric.hpp"

namespace cobra {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::WrongArity: return "WrongArity";
    case ErrorCode::NegativeEntry: return "NegativeEntry";
    case ErrorCode::SumOutOfTolerance: return "SumOutOfTolerance";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::LabelOutOfRange: return "LabelOutOfRange";
    case ErrorCode::MissingLabels: return "MissingLabels";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::CheckpointMismatch: return "CheckpointMismatch";
    case ErrorCode::EmptyRelevantSubset: return "EmptyRelevantSubset";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::DegenerateVariance: return "DegenerateVariance";
    case ErrorCode::RhoOutOfRange: return "RhoOutOfRange";
    case ErrorCode::TooFewPairs: return "TooFewPairs";
    case ErrorCode::TooManyDegenerateResamples: return "TooManyDegenerateResamples";
    case ErrorCode::InsufficientOverlap: return "InsufficientOverlap";
    case ErrorCode::DegenerateData: return "DegenerateData";
    case ErrorCode::TooFewRows: return "TooFewRows";
  }
  return "Unknown";
}

const std::string& ProbabilityRecord::group_or_default() const {
  static const std::string none{kNoGroup};
  return group ? *group : none;
}

ClassSet::ClassSet(std::size_t num_classes, std::vector<ClassIndex> relevant,
                   std::vector<std::string> class_names)
    : num_classes_(num_classes),
      relevant_(std::move(relevant)),
      mask_(num_classes, false),
      names_(std::move(class_names)) {
  if (num_classes_ < 2) {
    throw Error(ErrorCode::InvalidArgument, "class count must be at least 2");
  }
  if (relevant_.empty()) {
    throw Error(ErrorCode::InvalidArgument, "relevant class set is empty");
  }
  if (!names_.empty() && names_.size() != num_classes_) {
    throw Error(ErrorCode::InvalidArgument,
                "class name count does not match class count");
  }
  std::sort(relevant_.begin(), relevant_.end());
  relevant_.erase(std::unique(relevant_.begin(), relevant_.end()),
                  relevant_.end());
  for (ClassIndex k : relevant_) {
    if (k >= num_classes_) {
      std::ostringstream msg;
      msg << "relevant class " << k << " outside [0, " << num_classes_ << ")";
      throw Error(ErrorCode::InvalidArgument, msg.str());
    }
    mask_[k] = true;
  }
}

ClassSet ClassSet::all(std::size_t num_classes,
                       std::vector<std::string> class_names) {
  std::vector<ClassIndex> every(num_classes);
  for (std::size_t k = 0; k < num_classes; ++k) every[k] = k;
  return ClassSet(num_classes, std::move(every), std::move(class_names));
}

ClassSet ClassSet::complement() const {
  std::vector<ClassIndex> rest;
  for (std::size_t k = 0; k < num_classes_; ++k) {
    if (!mask_[k]) rest.push_back(k);
  }
  return ClassSet(num_classes_, std::move(rest), names_);
}

AssessmentTable::AssessmentTable(std::string score_name, int orientation)
    : score_name_(std::move(score_name)), orientation_(orientation) {
  if (orientation_ != 1 && orientation_ != -1) {
    throw Error(ErrorCode::InvalidArgument, "orientation must be +1 or -1");
  }
}

void AssessmentTable::add(std::string subject_id, double value) {
  if (index_.count(subject_id)) {
    throw Error(ErrorCode::InvalidArgument,
                "duplicate subject id in assessments: " + subject_id);
  }
  index_.emplace(subject_id, entries_.size());
  entries_.push_back({std::move(subject_id), value});
}

std::optional<double> AssessmentTable::find(const std::string& subject_id) const {
  auto it = index_.find(subject_id);
  if (it == index_.end()) return std::nullopt;
  return entries_[it->second].value;
}

std::vector<double> validate_record(std::span<const double> raw,
                                    std::size_t num_classes) {
  if (num_classes < 2 || raw.size() != num_classes) {
    std::ostringstream msg;
    msg << "expected " << num_classes << " probabilities, got " << raw.size();
    throw Error(ErrorCode::WrongArity, msg.str());
  }
  for (std::size_t k = 0; k < raw.size(); ++k) {
    if (!std::isfinite(raw[k]) || raw[k] < 0.0) {
      std::ostringstream msg;
      msg << "probability p_" << k << " = " << raw[k] << " is negative or not finite";
      throw Error(ErrorCode::NegativeEntry, msg.str());
    }
    if (raw[k] > 1.0 + kSimplexTolerance) {
      std::ostringstream msg;
      msg << "probability p_" << k << " = " << raw[k] << " exceeds 1";
      throw Error(ErrorCode::SumOutOfTolerance, msg.str());
    }
  }
  const double total = pairwise_sum(raw);
  if (std::abs(total - 1.0) > kSimplexTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "probabilities sum to " << total;
    throw Error(ErrorCode::SumOutOfTolerance, msg.str());
  }
  return {raw.begin(), raw.end()};
}

std::vector<SubjectDataset> partition_by_subject(
    std::span<const ProbabilityRecord> records) {
  std::vector<SubjectDataset> out;
  std::unordered_map<std::string, std::size_t> slot;
  for (const auto& rec : records) {
    auto [it, inserted] = slot.try_emplace(rec.subject_id, out.size());
    if (inserted) out.push_back({rec.subject_id, {}});
    out[it->second].records.push_back(rec);
  }
  return out;
}

}  // namespace cobra
