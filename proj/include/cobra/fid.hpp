#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cobra/core.hpp"
#include "cobra/stats.hpp"

namespace cobra {

inline constexpr const char* kReferenceId = "REFERENCE";

/// Ridge added to each covariance before taking square roots.
inline constexpr double kFrechetRidge = 1e-10;

/// Feature rows (n x D) belonging to one subject or to the reference
/// population. `predicted` is either empty or holds one predicted class per
/// row, which enables class-restricted distances.
struct FeatureSet {
  std::string subject_id;
  Eigen::MatrixXd rows;
  std::vector<ClassIndex> predicted;

  std::size_t dim() const noexcept { return static_cast<std::size_t>(rows.cols()); }
  std::size_t size() const noexcept { return static_cast<std::size_t>(rows.rows()); }
};

struct GaussianSummary {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  std::size_t n = 0;
};

/// Sample mean and unbiased (n - 1) covariance, symmetrized.
GaussianSummary summarize(const FeatureSet& features);

/// Principal square root of a symmetric PSD matrix via eigendecomposition;
/// negative eigenvalues are clamped to zero.
Eigen::MatrixXd matrix_sqrt_psd(const Eigen::MatrixXd& m);

/// ||mu_a - mu_b||^2 + tr(Sa) + tr(Sb) - 2 tr((sqrt(Sa) Sb sqrt(Sa))^(1/2)).
double frechet_distance(const GaussianSummary& a, const GaussianSummary& b);

/// Rows whose predicted class is relevant in `classes`.
FeatureSet restrict_to_classes(const FeatureSet& features, const ClassSet& classes);

struct SubjectDistance {
  std::string subject_id;
  double distance = 0.0;
  std::size_t n_rows = 0;
};

struct FidReport {
  std::vector<SubjectDistance> distances;
  JoinedCorrelation correlation;
};

std::vector<SubjectDistance> subject_distances(const FeatureSet& reference,
                                               std::span<const FeatureSet> subjects);

JoinedCorrelation correlate_distances(std::span<const SubjectDistance> distances,
                                      const AssessmentTable& assessments,
                                      const CiOptions& opts = {});

/// Distance of every subject to the reference population and the Pearson
/// correlation of those distances with the clinical scores.
FidReport fid_report(const FeatureSet& reference, std::span<const FeatureSet> subjects,
                     const AssessmentTable& assessments, const CiOptions& opts = {});

}  // namespace cobra
