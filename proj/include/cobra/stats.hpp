#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "cobra/core.hpp"

namespace cobra {

enum class CiMethod { FisherZ, Bootstrap };

std::string_view to_string(CiMethod method) noexcept;
CiMethod parse_ci_method(std::string_view name);

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

struct CiOptions {
  CiMethod method = CiMethod::FisherZ;
  double level = 0.95;
  std::size_t bootstrap_iters = 2000;
  std::uint64_t seed = 42;
};

struct CorrelationReport {
  double rho = 0.0;
  std::size_t n = 0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  CiMethod ci_method = CiMethod::FisherZ;
  double level = 0.95;
};

/// A joined (score, assessment) observation for one subject.
struct ScorePair {
  std::string subject_id;
  double x = 0.0;
  double y = 0.0;
};

/// Product-moment correlation, clamped to [-1, 1].
double pearson(std::span<const double> xs, std::span<const double> ys);

/// Fisher-z interval tanh(atanh(rho) -/+ z / sqrt(n - 3)).
Interval fisher_ci(double rho, std::size_t n, double level);

/// Percentile bootstrap of pearson over `iters` resamples with replacement.
/// Resample i draws from derive_stream(seed, i); a resample with zero
/// variance is redrawn from the same stream, at most 100 times.
Interval bootstrap_ci(std::span<const ScorePair> pairs, double level,
                      std::size_t iters, std::uint64_t seed);

/// pearson + interval on already-joined pairs.
CorrelationReport correlate_pairs(std::span<const ScorePair> pairs,
                                  const CiOptions& opts = {});

struct JoinedCorrelation {
  CorrelationReport report;
  std::vector<ScorePair> pairs;
  std::size_t dropped_missing = 0;    // MISSING scores
  std::size_t dropped_unmatched = 0;  // no assessment for the subject
};

/// Joins scores with assessments on subject id and correlates them.
/// Throws InsufficientOverlap when fewer than 3 pairs survive the join.
JoinedCorrelation correlate_scores(std::span<const SubjectScore> scores,
                                   const AssessmentTable& assessments,
                                   const CiOptions& opts = {});

struct StratifiedCorrelation {
  std::map<std::string, CorrelationReport> strata;
  std::vector<std::string> skipped;  // strata with fewer than 3 pairs
  CorrelationReport pooled;
};

/// Per-stratum correlations plus the pooled one. Subjects without a stratum
/// entry are collected under kNoGroup.
StratifiedCorrelation stratified_correlation(
    std::span<const ScorePair> pairs,
    const std::unordered_map<std::string, std::string>& strata,
    const CiOptions& opts = {});

struct DensityCurve {
  std::vector<double> grid;
  std::vector<double> density;
  double bandwidth = 0.0;
};

inline constexpr std::size_t kDensityGridSize = 512;

/// 0.9 * min(sd, IQR / 1.34) * n^(-1/5); falls back to sd when IQR is 0.
double silverman_bandwidth(std::span<const double> values);

/// Gaussian KDE on a 512-point grid spanning [min - 4h, max + 4h].
DensityCurve kde(std::span<const double> values,
                 std::optional<double> bandwidth = std::nullopt);

/// Trapezoidal integral of a curve over its grid.
double trapezoid(std::span<const double> grid, std::span<const double> ys);

enum class PerformanceGrouping { None, Group, CohortLabel };

struct PerformanceOptions {
  PerformanceGrouping grouping = PerformanceGrouping::None;
  /// subject id -> label, used by CohortLabel grouping.
  std::unordered_map<std::string, std::string> cohort_labels;
  /// When set, only records predicted in this set's relevant classes count.
  std::optional<ClassSet> restrict_to;
  std::size_t bootstrap_iters = 2000;
  std::uint64_t seed = 42;
  double level = 0.95;
};

struct PerformanceReport {
  std::string group;
  std::size_t n = 0;
  double accuracy = 0.0;
  Interval accuracy_ci;
  double macro_precision = 0.0;
  Interval precision_ci;
  /// Classes with no predictions; each contributed precision 0.
  std::vector<ClassIndex> never_predicted;
};

std::vector<PerformanceReport> performance_metrics(
    std::span<const ProbabilityRecord> records, const PerformanceOptions& opts = {});

/// Linear-interpolation sample quantile (R type 7) of sorted data.
double sorted_quantile(std::span<const double> sorted, double q);

/// Spearman rank correlation (average ranks for ties).
double spearman(std::span<const double> xs, std::span<const double> ys);

}  // namespace cobra
