#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "cobra/core.hpp"
#include "cobra/vectors.hpp"

namespace cobra {

/// Clinical-score analogue: 66 for healthy, 0 for maximal impairment.
inline constexpr double kMaxClinicalScore = 66.0;

struct ConfounderConfig {
  double shift_magnitude = 8.0;
  double fraction = 0.5;  // share of test subjects affected, per severity level
  /// Unit direction of the shift; defaults to the last input coordinate.
  std::vector<double> direction;
};

struct SynthConfig {
  std::size_t num_classes = 5;
  std::size_t input_dim = 8;
  /// Explicit class means (num_classes x input_dim). Empty selects
  /// mean_scale * e_k.
  std::vector<std::vector<double>> class_means;
  double mean_scale = 4.0;
  double spread = 1.0;
  /// Classes whose means move toward their common centroid with severity.
  std::vector<ClassIndex> degraded_classes = {0, 1, 2};
  std::vector<std::string> class_names = {"reach", "reposition", "transport", "stabilize",
                                          "rest"};
  std::vector<std::string> groups = {"task_a", "task_b", "task_c", "task_d"};
  std::size_t points_per_subject = 100;
  std::size_t healthy_subjects = 20;
  std::size_t reference_subjects = 2;
  std::size_t subjects_per_level = 10;
  std::vector<double> severity_grid = {0.0, 0.25, 0.5, 0.75, 1.0};
  std::optional<ConfounderConfig> confounder;
  std::uint64_t seed = 42;

  /// Throws InvalidArgument when the invariants do not hold.
  void validate() const;
};

/// Per-class Gaussian means at severity s; rows are classes. Degraded class
/// means are (1 - s) m_k + s m_bar, where m_bar is their centroid.
Eigen::MatrixXd class_means_at(const SynthConfig& cfg, double severity);

/// The centroid the degraded classes collapse onto at s = 1.
Eigen::VectorXd degraded_centroid(const SynthConfig& cfg);

/// Shift added to every point of a confounded subject (zero vector when no
/// confounder is configured).
Eigen::VectorXd confounder_shift(const SynthConfig& cfg);

struct SynthSubject {
  std::string subject_id;
  double severity = 0.0;
  bool confounded = false;
  std::vector<VectorRow> rows;

  double clinical_score() const { return kMaxClinicalScore * (1.0 - severity); }
};

/// `healthy_subjects` subjects drawn at severity 0, ids H000, H001, ...
VectorTable generate_healthy(const SynthConfig& cfg);

SynthSubject generate_subject(const SynthConfig& cfg, double severity, bool confounded,
                              std::uint64_t seed, std::string subject_id);

struct SynthCohort {
  VectorTable healthy;
  VectorTable reference;  // held-out severity-0 subjects for distance baselines
  std::vector<SynthSubject> test;
  AssessmentTable assessments{"fma_like", +1};
  std::unordered_map<std::string, std::string> strata;  // "clean" | "confounded"
  std::vector<std::string> strata_order;

  VectorTable test_table(std::size_t dim) const;
};

SynthCohort generate_cohort(const SynthConfig& cfg);

}  // namespace cobra
