#include "cobra/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include <boost/math/distributions/normal.hpp>

#include "cobra/numeric.hpp"
#include "cobra/scoring.hpp"

namespace cobra {

namespace {

constexpr int kMaxDegenerateRedraws = 100;

void check_level(double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "confidence level must lie in (0, 1)");
  }
}

// Returns NaN instead of throwing when either side has zero variance.
double pearson_or_nan(std::span<const double> xs, std::span<const double> ys) {
  const double mx = pairwise_mean(xs);
  const double my = pairwise_mean(ys);
  std::vector<double> sxy(xs.size()), sxx(xs.size()), syy(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy[i] = dx * dy;
    sxx[i] = dx * dx;
    syy[i] = dy * dy;
  }
  const double vx = pairwise_sum(sxx);
  const double vy = pairwise_sum(syy);
  if (!(vx > 0.0) || !(vy > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  const double r = pairwise_sum(sxy) / std::sqrt(vx * vy);
  return std::clamp(r, -1.0, 1.0);
}

void split_pairs(std::span<const ScorePair> pairs, std::vector<double>& xs,
                 std::vector<double>& ys) {
  xs.resize(pairs.size());
  ys.resize(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    xs[i] = pairs[i].x;
    ys[i] = pairs[i].y;
  }
}

Interval percentile_interval(std::vector<double> samples, double level) {
  std::sort(samples.begin(), samples.end());
  return {sorted_quantile(samples, (1.0 - level) / 2.0),
          sorted_quantile(samples, (1.0 + level) / 2.0)};
}

}  // namespace

std::string_view to_string(CiMethod method) noexcept {
  return method == CiMethod::FisherZ ? "fisher" : "bootstrap";
}

CiMethod parse_ci_method(std::string_view name) {
  if (name == "fisher" || name == "fisher-z" || name == "FisherZ") return CiMethod::FisherZ;
  if (name == "bootstrap" || name == "Bootstrap") return CiMethod::Bootstrap;
  throw Error(ErrorCode::InvalidArgument,
              "unknown CI method '" + std::string(name) + "' (fisher|bootstrap)");
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw Error(ErrorCode::LengthMismatch, "pearson: inputs differ in length");
  }
  if (xs.size() < 3) {
    throw Error(ErrorCode::TooFewPairs, "pearson: need at least 3 pairs");
  }
  const double r = pearson_or_nan(xs, ys);
  if (std::isnan(r)) {
    throw Error(ErrorCode::DegenerateVariance, "pearson: an input has zero variance");
  }
  return r;
}

Interval fisher_ci(double rho, std::size_t n, double level) {
  check_level(level);
  if (!(std::abs(rho) < 1.0)) {
    throw Error(ErrorCode::RhoOutOfRange, "fisher_ci: |rho| must be below 1");
  }
  if (n < 4) {
    throw Error(ErrorCode::TooFewPairs, "fisher_ci: need at least 4 pairs");
  }
  const boost::math::normal standard;
  const double z = boost::math::quantile(standard, (1.0 + level) / 2.0);
  const double centre = std::atanh(rho);
  const double half = z / std::sqrt(static_cast<double>(n) - 3.0);
  return {std::tanh(centre - half), std::tanh(centre + half)};
}

Interval bootstrap_ci(std::span<const ScorePair> pairs, double level,
                      std::size_t iters, std::uint64_t seed) {
  check_level(level);
  if (pairs.size() < 4) {
    throw Error(ErrorCode::TooFewPairs, "bootstrap_ci: need at least 4 pairs");
  }
  if (iters < 1000) {
    throw Error(ErrorCode::InvalidArgument, "bootstrap_ci: need at least 1000 iterations");
  }
  const std::size_t n = pairs.size();
  std::vector<double> rhos(iters);
  std::vector<double> xs(n), ys(n);
  for (std::size_t it = 0; it < iters; ++it) {
    auto rng = derive_stream(seed, it);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    double r = std::numeric_limits<double>::quiet_NaN();
    for (int attempt = 0; attempt < kMaxDegenerateRedraws && std::isnan(r); ++attempt) {
      for (std::size_t i = 0; i < n; ++i) {
        const auto& p = pairs[pick(rng)];
        xs[i] = p.x;
        ys[i] = p.y;
      }
      r = pearson_or_nan(xs, ys);
    }
    if (std::isnan(r)) {
      std::ostringstream msg;
      msg << "bootstrap_ci: resample " << it << " stayed degenerate after "
          << kMaxDegenerateRedraws << " draws";
      throw Error(ErrorCode::TooManyDegenerateResamples, msg.str());
    }
    rhos[it] = r;
  }
  return percentile_interval(std::move(rhos), level);
}

CorrelationReport correlate_pairs(std::span<const ScorePair> pairs,
                                  const CiOptions& opts) {
  std::vector<double> xs, ys;
  split_pairs(pairs, xs, ys);
  CorrelationReport report;
  report.rho = pearson(xs, ys);
  report.n = pairs.size();
  report.ci_method = opts.method;
  report.level = opts.level;
  Interval ci;
  if (opts.method == CiMethod::FisherZ) {
    // The Fisher interval collapses onto rho as |rho| -> 1.
    ci = std::abs(report.rho) < 1.0 ? fisher_ci(report.rho, report.n, opts.level)
                                    : Interval{report.rho, report.rho};
  } else {
    ci = bootstrap_ci(pairs, opts.level, opts.bootstrap_iters, opts.seed);
  }
  report.ci_low = ci.low;
  report.ci_high = ci.high;
  return report;
}

JoinedCorrelation correlate_scores(std::span<const SubjectScore> scores,
                                   const AssessmentTable& assessments,
                                   const CiOptions& opts) {
  JoinedCorrelation out;
  for (const auto& s : scores) {
    const auto clinical = assessments.find(s.subject_id);
    if (!clinical) {
      ++out.dropped_unmatched;
      continue;
    }
    if (s.missing()) {
      ++out.dropped_missing;
      continue;
    }
    out.pairs.push_back({s.subject_id, *s.score, *clinical});
  }
  if (out.pairs.size() < 3) {
    std::ostringstream msg;
    msg << "only " << out.pairs.size()
        << " subjects have both a score and an assessment (need 3)";
    throw Error(ErrorCode::InsufficientOverlap, msg.str());
  }
  out.report = correlate_pairs(out.pairs, opts);
  return out;
}

StratifiedCorrelation stratified_correlation(
    std::span<const ScorePair> pairs,
    const std::unordered_map<std::string, std::string>& strata,
    const CiOptions& opts) {
  std::map<std::string, std::vector<ScorePair>> split;
  for (const auto& p : pairs) {
    auto it = strata.find(p.subject_id);
    split[it == strata.end() ? std::string(kNoGroup) : it->second].push_back(p);
  }
  StratifiedCorrelation out;
  for (const auto& [name, members] : split) {
    if (members.size() < 3) {
      out.skipped.push_back(name);
      continue;
    }
    out.strata.emplace(name, correlate_pairs(members, opts));
  }
  out.pooled = correlate_pairs(pairs, opts);
  return out;
}

double sorted_quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) {
    throw Error(ErrorCode::DegenerateData, "quantile of an empty sample");
  }
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double silverman_bandwidth(std::span<const double> values) {
  if (values.size() < 2) {
    throw Error(ErrorCode::DegenerateData, "bandwidth needs at least 2 values");
  }
  const double mean = pairwise_mean(values);
  std::vector<double> sq(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    sq[i] = (values[i] - mean) * (values[i] - mean);
  }
  const double sd = std::sqrt(pairwise_sum(sq) / static_cast<double>(values.size() - 1));
  if (!(sd > 0.0)) {
    throw Error(ErrorCode::DegenerateData, "all values are identical");
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double iqr = sorted_quantile(sorted, 0.75) - sorted_quantile(sorted, 0.25);
  const double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
  return 0.9 * spread * std::pow(static_cast<double>(values.size()), -0.2);
}

DensityCurve kde(std::span<const double> values, std::optional<double> bandwidth) {
  if (values.size() < 2) {
    throw Error(ErrorCode::DegenerateData, "kde needs at least 2 values");
  }
  const auto [min_it, max_it] = std::minmax_element(values.begin(), values.end());
  if (*min_it == *max_it) {
    throw Error(ErrorCode::DegenerateData, "all values are identical");
  }
  if (bandwidth && !(*bandwidth > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "bandwidth must be positive");
  }
  DensityCurve curve;
  curve.bandwidth = bandwidth ? *bandwidth : silverman_bandwidth(values);
  const double h = curve.bandwidth;
  const double lo = *min_it - 4.0 * h;
  const double hi = *max_it + 4.0 * h;
  const double step = (hi - lo) / static_cast<double>(kDensityGridSize - 1);
  const double norm = 1.0 / (static_cast<double>(values.size()) * h *
                             std::sqrt(2.0 * std::numbers::pi));
  curve.grid.resize(kDensityGridSize);
  curve.density.resize(kDensityGridSize);
  std::vector<double> terms(values.size());
  for (std::size_t g = 0; g < kDensityGridSize; ++g) {
    const double x = lo + step * static_cast<double>(g);
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double u = (x - values[i]) / h;
      terms[i] = std::exp(-0.5 * u * u);
    }
    curve.grid[g] = x;
    curve.density[g] = norm * pairwise_sum(terms);
  }
  return curve;
}

double trapezoid(std::span<const double> grid, std::span<const double> ys) {
  if (grid.size() != ys.size()) {
    throw Error(ErrorCode::LengthMismatch, "trapezoid: grid and values differ in length");
  }
  double total = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    total += 0.5 * (grid[i] - grid[i - 1]) * (ys[i] + ys[i - 1]);
  }
  return total;
}

namespace {

struct LabeledPrediction {
  ClassIndex truth;
  ClassIndex predicted;
};

struct Metrics {
  double accuracy;
  double macro_precision;
};

Metrics compute_metrics(std::span<const LabeledPrediction> points,
                        std::span<const std::size_t> sample, std::size_t num_classes,
                        std::vector<ClassIndex>* never_predicted) {
  std::vector<std::size_t> predicted(num_classes, 0), hits(num_classes, 0);
  std::size_t correct = 0;
  for (std::size_t idx : sample) {
    const auto& p = points[idx];
    ++predicted[p.predicted];
    if (p.predicted == p.truth) {
      ++hits[p.predicted];
      ++correct;
    }
  }
  std::vector<double> precision(num_classes, 0.0);
  for (std::size_t k = 0; k < num_classes; ++k) {
    if (predicted[k] > 0) {
      precision[k] = static_cast<double>(hits[k]) / static_cast<double>(predicted[k]);
    } else if (never_predicted) {
      never_predicted->push_back(k);
    }
  }
  return {static_cast<double>(correct) / static_cast<double>(sample.size()),
          pairwise_mean(precision)};
}

PerformanceReport evaluate_group(std::string name,
                                 const std::vector<LabeledPrediction>& points,
                                 std::size_t num_classes, const PerformanceOptions& opts) {
  PerformanceReport report;
  report.group = std::move(name);
  report.n = points.size();
  std::vector<std::size_t> identity(points.size());
  std::iota(identity.begin(), identity.end(), std::size_t{0});
  const Metrics full = compute_metrics(points, identity, num_classes, &report.never_predicted);
  report.accuracy = full.accuracy;
  report.macro_precision = full.macro_precision;

  std::vector<double> acc(opts.bootstrap_iters), prec(opts.bootstrap_iters);
  std::vector<std::size_t> sample(points.size());
  for (std::size_t it = 0; it < opts.bootstrap_iters; ++it) {
    auto rng = derive_stream(opts.seed, it);
    std::uniform_int_distribution<std::size_t> pick(0, points.size() - 1);
    for (auto& s : sample) s = pick(rng);
    const Metrics m = compute_metrics(points, sample, num_classes, nullptr);
    acc[it] = m.accuracy;
    prec[it] = m.macro_precision;
  }
  if (opts.bootstrap_iters > 0) {
    report.accuracy_ci = percentile_interval(std::move(acc), opts.level);
    report.precision_ci = percentile_interval(std::move(prec), opts.level);
  } else {
    report.accuracy_ci = {report.accuracy, report.accuracy};
    report.precision_ci = {report.macro_precision, report.macro_precision};
  }
  return report;
}

}  // namespace

std::vector<PerformanceReport> performance_metrics(
    std::span<const ProbabilityRecord> records, const PerformanceOptions& opts) {
  check_level(opts.level);
  if (records.empty()) {
    throw Error(ErrorCode::DegenerateData, "performance_metrics: no records");
  }
  const std::size_t num_classes = records.front().probs.size();
  std::map<std::string, std::vector<LabeledPrediction>> groups;
  for (const auto& rec : records) {
    if (!rec.true_label) {
      throw Error(ErrorCode::MissingLabels,
                  "record " + rec.point_id + " of subject " + rec.subject_id +
                      " has no true label");
    }
    if (rec.probs.size() != num_classes || *rec.true_label >= num_classes) {
      throw Error(ErrorCode::LabelOutOfRange,
                  "record " + rec.point_id + " has an inconsistent class count or label");
    }
    const ClassIndex predicted = predict_class(rec.probs);
    if (opts.restrict_to && !opts.restrict_to->is_relevant(predicted)) continue;

    std::string key = "all";
    if (opts.grouping == PerformanceGrouping::Group) {
      key = rec.group_or_default();
    } else if (opts.grouping == PerformanceGrouping::CohortLabel) {
      auto it = opts.cohort_labels.find(rec.subject_id);
      key = it == opts.cohort_labels.end() ? std::string(kNoGroup) : it->second;
    }
    groups[key].push_back({*rec.true_label, predicted});
  }
  std::vector<PerformanceReport> out;
  for (const auto& [name, points] : groups) {
    out.push_back(evaluate_group(name, points, num_classes, opts));
  }
  return out;
}

double spearman(std::span<const double> xs, std::span<const double> ys) {
  auto ranks = [](std::span<const double> v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < order.size();) {
      std::size_t j = i;
      while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
      const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
      for (std::size_t t = i; t <= j; ++t) r[order[t]] = avg;
      i = j + 1;
    }
    return r;
  };
  if (xs.size() != ys.size()) {
    throw Error(ErrorCode::LengthMismatch, "spearman: inputs differ in length");
  }
  const auto rx = ranks(xs);
  const auto ry = ranks(ys);
  return pearson(rx, ry);
}

}  // namespace cobra
