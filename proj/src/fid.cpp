#include "cobra/fid.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace cobra {

namespace {

constexpr double kSymmetryTolerance = 1e-9;
constexpr double kNegativeClamp = 1e-8;

void require_symmetric(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::NotSymmetric, "matrix is not square");
  }
  const double scale = 1.0 + m.cwiseAbs().maxCoeff();
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance * scale) {
    throw Error(ErrorCode::NotSymmetric, "matrix is not symmetric within 1e-9");
  }
}

}  // namespace

GaussianSummary summarize(const FeatureSet& features) {
  const auto n = features.rows.rows();
  if (n < 2) {
    throw Error(ErrorCode::TooFewRows,
                "feature set " + features.subject_id + " needs at least 2 rows");
  }
  GaussianSummary out;
  out.n = static_cast<std::size_t>(n);
  out.mean = features.rows.colwise().mean().transpose();
  const Eigen::MatrixXd centred = features.rows.rowwise() - out.mean.transpose();
  const Eigen::MatrixXd cov = (centred.transpose() * centred) / static_cast<double>(n - 1);
  out.cov = 0.5 * (cov + cov.transpose());
  return out;
}

Eigen::MatrixXd matrix_sqrt_psd(const Eigen::MatrixXd& m) {
  require_symmetric(m);
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  if (eig.info() != Eigen::Success) {
    throw Error(ErrorCode::NotSymmetric, "eigendecomposition did not converge");
  }
  const Eigen::VectorXd roots = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Eigen::MatrixXd& v = eig.eigenvectors();
  const Eigen::MatrixXd root = v * roots.asDiagonal() * v.transpose();
  return 0.5 * (root + root.transpose());
}

double frechet_distance(const GaussianSummary& a, const GaussianSummary& b) {
  if (a.mean.size() != b.mean.size() || a.cov.rows() != b.cov.rows() ||
      a.cov.rows() != a.mean.size()) {
    std::ostringstream msg;
    msg << "frechet_distance: dimensions " << a.mean.size() << " and " << b.mean.size()
        << " differ";
    throw Error(ErrorCode::DimensionMismatch, msg.str());
  }
  const auto dim = a.mean.size();
  const Eigen::MatrixXd ridge = kFrechetRidge * Eigen::MatrixXd::Identity(dim, dim);
  const Eigen::MatrixXd sa = a.cov + ridge;
  const Eigen::MatrixXd sb = b.cov + ridge;

  // tr((sqrt(Sa) Sb sqrt(Sa))^(1/2)) == nuclear norm of sqrt(Sa) sqrt(Sb).
  const Eigen::MatrixXd product = matrix_sqrt_psd(sa) * matrix_sqrt_psd(sb);
  const double cross = Eigen::JacobiSVD<Eigen::MatrixXd>(product).singularValues().sum();

  const double mean_gap = (a.mean - b.mean).squaredNorm();
  const double d = mean_gap + sa.trace() + sb.trace() - 2.0 * cross;
  return (d < 0.0 && d >= -kNegativeClamp) ? 0.0 : d;
}

FeatureSet restrict_to_classes(const FeatureSet& features, const ClassSet& classes) {
  if (features.predicted.size() != features.size()) {
    throw Error(ErrorCode::InvalidArgument,
                "feature set " + features.subject_id + " carries no predicted classes");
  }
  std::vector<Eigen::Index> keep;
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (classes.is_relevant(features.predicted[i])) keep.push_back(static_cast<Eigen::Index>(i));
  }
  FeatureSet out{features.subject_id,
                 Eigen::MatrixXd(static_cast<Eigen::Index>(keep.size()), features.rows.cols()),
                 {}};
  out.predicted.reserve(keep.size());
  for (std::size_t r = 0; r < keep.size(); ++r) {
    out.rows.row(static_cast<Eigen::Index>(r)) = features.rows.row(keep[r]);
    out.predicted.push_back(features.predicted[static_cast<std::size_t>(keep[r])]);
  }
  return out;
}

std::vector<SubjectDistance> subject_distances(const FeatureSet& reference,
                                               std::span<const FeatureSet> subjects) {
  const GaussianSummary ref = summarize(reference);
  std::vector<SubjectDistance> out;
  out.reserve(subjects.size());
  for (const auto& subject : subjects) {
    out.push_back({subject.subject_id, frechet_distance(ref, summarize(subject)), subject.size()});
  }
  return out;
}

JoinedCorrelation correlate_distances(std::span<const SubjectDistance> distances,
                                      const AssessmentTable& assessments, const CiOptions& opts) {
  std::vector<SubjectScore> as_scores;
  as_scores.reserve(distances.size());
  for (const auto& d : distances) as_scores.push_back({d.subject_id, d.distance, d.n_rows, d.n_rows});
  return correlate_scores(as_scores, assessments, opts);
}

FidReport fid_report(const FeatureSet& reference, std::span<const FeatureSet> subjects,
                     const AssessmentTable& assessments, const CiOptions& opts) {
  FidReport out;
  out.distances = subject_distances(reference, subjects);
  out.correlation = correlate_distances(out.distances, assessments, opts);
  return out;
}

}  // namespace cobra
