#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "cobra/error.hpp"

namespace cobra {

/// Maximum tolerated |sum(p) - 1| for a probability row.
inline constexpr double kSimplexTolerance = 1e-6;

/// Group label assigned to records that carry none.
inline constexpr const char* kNoGroup = "\xE2\x88\x85";  // "∅"

using ClassIndex = std::size_t;

/// One datapoint's class-probability vector.
struct ProbabilityRecord {
  std::string subject_id;
  std::string point_id;
  std::optional<std::string> group;
  std::vector<double> probs;
  std::optional<ClassIndex> true_label;

  std::size_t num_classes() const noexcept { return probs.size(); }
  const std::string& group_or_default() const;
};

struct SubjectDataset {
  std::string subject_id;
  std::vector<ProbabilityRecord> records;
};

/// Class count plus the clinically relevant subset.
class ClassSet {
 public:
  ClassSet(std::size_t num_classes, std::vector<ClassIndex> relevant,
           std::vector<std::string> class_names = {});

  /// Every class relevant.
  static ClassSet all(std::size_t num_classes,
                      std::vector<std::string> class_names = {});

  std::size_t num_classes() const noexcept { return num_classes_; }
  const std::vector<ClassIndex>& relevant() const noexcept { return relevant_; }
  const std::vector<std::string>& class_names() const noexcept { return names_; }
  bool is_relevant(ClassIndex k) const noexcept {
    return k < mask_.size() && mask_[k];
  }

  /// The classes not in the relevant subset; throws if that set is empty.
  ClassSet complement() const;

 private:
  std::size_t num_classes_;
  std::vector<ClassIndex> relevant_;
  std::vector<bool> mask_;
  std::vector<std::string> names_;
};

struct SubjectScore {
  std::string subject_id;
  std::optional<double> score;  // empty == MISSING
  std::size_t n_total = 0;
  std::size_t n_relevant = 0;

  bool missing() const noexcept { return !score.has_value(); }
};

/// subject id -> clinical score, keeping insertion order.
class AssessmentTable {
 public:
  struct Entry {
    std::string subject_id;
    double value;
  };

  explicit AssessmentTable(std::string score_name = "clinical_score",
                           int orientation = +1);

  /// Throws InvalidArgument on a duplicate subject id.
  void add(std::string subject_id, double value);

  std::optional<double> find(const std::string& subject_id) const;
  const std::vector<Entry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }

  const std::string& score_name() const noexcept { return score_name_; }
  /// +1 when higher means healthier (FMA-like), -1 when higher means more
  /// severe (KL-like).
  int orientation() const noexcept { return orientation_; }

 private:
  std::string score_name_;
  int orientation_;
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Checks that `raw` is a K-point on the probability simplex. Never
/// renormalizes.
std::vector<double> validate_record(std::span<const double> raw,
                                    std::size_t num_classes);

/// Stable grouping by subject id, subjects in first-appearance order.
std::vector<SubjectDataset> partition_by_subject(
    std::span<const ProbabilityRecord> records);

}  // namespace cobra
