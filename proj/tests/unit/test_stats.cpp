#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "cobra/stats.hpp"
#include "fixtures.hpp"

using namespace cobra;
using cobra::testing::pairs_with_correlation;
using cobra::testing::record;

namespace {

ErrorCode error_code(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

// Two-pass formula in extended precision.
double pearson_oracle(const std::vector<double>& x, const std::vector<double>& y) {
  long double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= x.size();
  my /= y.size();
  long double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return static_cast<double>(sxy / std::sqrt(sxx * syy));
}

std::vector<ScorePair> to_pairs(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<ScorePair> out;
  for (std::size_t i = 0; i < x.size(); ++i) out.push_back({"s" + std::to_string(i), x[i], y[i]});
  return out;
}

}  // namespace

TEST_CASE("pearson examples") {
  CHECK(pearson(std::vector<double>{1, 2, 3}, std::vector<double>{2, 4, 6}) == doctest::Approx(1.0));
  CHECK(pearson(std::vector<double>{1, 2, 3}, std::vector<double>{-2, -4, -6}) ==
        doctest::Approx(-1.0));
  CHECK(pearson(std::vector<double>{1, 2, 3, 4}, std::vector<double>{1, 3, 2, 4}) ==
        doctest::Approx(0.8).epsilon(1e-14));
}

TEST_CASE("pearson errors") {
  CHECK(error_code([] { pearson(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2}); }) ==
        ErrorCode::LengthMismatch);
  CHECK(error_code([] { pearson(std::vector<double>{1, 2}, std::vector<double>{1, 2}); }) ==
        ErrorCode::TooFewPairs);
  CHECK(error_code([] { pearson(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}); }) ==
        ErrorCode::DegenerateVariance);
}

TEST_CASE("pearson matches oracle and is affine invariant") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> scale(0.1, 100.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 3 + rng() % 100;
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = normal(rng);
      y[i] = 0.5 * x[i] + normal(rng);
    }
    const double r = pearson(x, y);
    CHECK(std::abs(r - pearson_oracle(x, y)) < 1e-12);
    CHECK(std::abs(r - pearson(y, x)) < 1e-14);
    const double a = scale(rng), b = normal(rng) * 100.0;
    std::vector<double> xa(n), yn(n);
    for (std::size_t i = 0; i < n; ++i) {
      xa[i] = a * x[i] + b;
      yn[i] = -y[i];
    }
    CHECK(std::abs(pearson(xa, y) - r) < 1e-10);
    CHECK(std::abs(pearson(x, yn) + r) < 1e-12);
  }
}

TEST_CASE("fisher_ci reproduces published intervals") {
  const auto a = fisher_ci(0.814, 55, 0.95);
  CHECK(std::abs(a.low - 0.700) <= 0.002);
  CHECK(std::abs(a.high - 0.888) <= 0.002);
  const auto b = fisher_ci(0.736, 55, 0.95);
  CHECK(std::abs(b.low - 0.584) <= 0.002);
  CHECK(std::abs(b.high - 0.838) <= 0.002);
}

TEST_CASE("fisher_ci properties") {
  for (std::size_t n : {4, 10, 55, 1000}) {
    const auto ci = fisher_ci(0.0, n, 0.95);
    CHECK(ci.low == doctest::Approx(-ci.high));
  }
  double last_width = 2.0;
  for (std::size_t n = 4; n < 200; n += 7) {
    const auto ci = fisher_ci(0.5, n, 0.95);
    CHECK(ci.low < 0.5);
    CHECK(ci.high > 0.5);
    CHECK(ci.high - ci.low < last_width);
    last_width = ci.high - ci.low;
  }
  const auto narrow = fisher_ci(0.5, 30, 0.8);
  const auto wide = fisher_ci(0.5, 30, 0.99);
  CHECK(wide.high - wide.low > narrow.high - narrow.low);
  // Oracle: z = 1.959963984540054 for 95%.
  const double z = std::atanh(0.3), se = 1.0 / std::sqrt(47.0);
  CHECK(fisher_ci(0.3, 50, 0.95).low == doctest::Approx(std::tanh(z - 1.959963984540054 * se)));

  CHECK(error_code([] { fisher_ci(1.0, 10, 0.95); }) == ErrorCode::RhoOutOfRange);
  CHECK(error_code([] { fisher_ci(0.5, 3, 0.95); }) == ErrorCode::TooFewPairs);
  CHECK(error_code([] { fisher_ci(0.5, 10, 1.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("bootstrap_ci") {
  const std::vector<double> x{1, 2, 3, 4, 5, 6, 7, 8};
  const std::vector<double> y{3, 5, 7, 9, 11, 13, 15, 17};
  const auto linear = bootstrap_ci(to_pairs(x, y), 0.95, 1000, 42);
  CHECK(linear.low == doctest::Approx(1.0));
  CHECK(linear.high == doctest::Approx(1.0));

  std::mt19937_64 rng(42);
  std::normal_distribution<double> normal;
  std::vector<double> bx(50), by(50);
  for (std::size_t i = 0; i < 50; ++i) {
    bx[i] = normal(rng);
    by[i] = 0.8 * bx[i] + 0.6 * normal(rng);
  }
  const auto pairs = to_pairs(bx, by);
  const auto boot = bootstrap_ci(pairs, 0.95, 2000, 42);
  const auto again = bootstrap_ci(pairs, 0.95, 2000, 42);
  CHECK(boot.low == again.low);
  CHECK(boot.high == again.high);
  const auto fisher = fisher_ci(pearson(bx, by), 50, 0.95);
  CHECK(std::abs(boot.low - fisher.low) < 0.05);
  CHECK(std::abs(boot.high - fisher.high) < 0.05);
  CHECK(boot.low >= -1.0);
  CHECK(boot.high <= 1.0);
  CHECK(bootstrap_ci(pairs, 0.95, 2000, 7).low != boot.low);

  CHECK(error_code([&] { bootstrap_ci(pairs, 0.95, 10, 42); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("bootstrap_ci redraws zero-variance resamples") {
  // A single distinct x: roughly a third of resamples have zero variance.
  std::vector<double> x(30, 0.0), y(30);
  x[0] = 1.0;
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = static_cast<double>(i);
  const auto ci = bootstrap_ci(to_pairs(x, y), 0.95, 1000, 1);
  CHECK(std::isfinite(ci.low));
  CHECK(ci.low >= -1.0);
  CHECK(ci.high <= 1.0);
  CHECK(ci.low <= ci.high);
}

TEST_CASE("correlate_scores joins on subject id") {
  AssessmentTable table;
  std::vector<SubjectScore> scores;
  for (int i = 0; i < 10; ++i) {
    const std::string id = "S" + std::to_string(i);
    table.add(id, i * 1.5);
    SubjectScore s{id, i * 1.5, 5, 5};
    if (i == 4) s.score.reset();
    scores.push_back(s);
  }
  scores.push_back({"unknown", 0.3, 1, 1});
  const auto joined = correlate_scores(scores, table);
  CHECK(joined.report.n == 9);
  CHECK(joined.report.rho == doctest::Approx(1.0));
  CHECK(joined.dropped_missing == 1);
  CHECK(joined.dropped_unmatched == 1);
  CHECK(joined.report.ci_low == doctest::Approx(1.0));

  const std::vector<SubjectScore> few{{"S0", 0.1, 1, 1}, {"S1", 0.2, 1, 1}};
  CHECK(error_code([&] { correlate_scores(few, table); }) == ErrorCode::InsufficientOverlap);
}

TEST_CASE("stratified_correlation") {
  std::vector<ScorePair> pairs;
  std::unordered_map<std::string, std::string> strata;
  for (int i = 1; i <= 5; ++i) {
    pairs.push_back({"A" + std::to_string(i), double(i), double(i)});
    strata["A" + std::to_string(i)] = "a";
    pairs.push_back({"B" + std::to_string(i), double(i), double(i - 10)});
    strata["B" + std::to_string(i)] = "b";
  }
  const auto st = stratified_correlation(pairs, strata);
  CHECK(st.strata.at("a").rho == doctest::Approx(1.0));
  CHECK(st.strata.at("b").rho == doctest::Approx(1.0));
  CHECK(st.pooled.rho < 1.0);
  CHECK(st.pooled.n == 10);

  const auto [x, y] = pairs_with_correlation(0.6, 20, 4);
  std::vector<ScorePair> one;
  std::unordered_map<std::string, std::string> single;
  for (std::size_t i = 0; i < x.size(); ++i) {
    one.push_back({"s" + std::to_string(i), x[i], y[i]});
    single["s" + std::to_string(i)] = "only";
  }
  const auto same = stratified_correlation(one, single);
  CHECK(same.strata.at("only").rho == same.pooled.rho);
  CHECK(same.strata.at("only").ci_low == same.pooled.ci_low);

  const auto unlabelled = stratified_correlation(one, {});
  CHECK(unlabelled.strata.count(kNoGroup) == 1);
}

TEST_CASE("silverman bandwidth and kde") {
  const std::vector<double> v{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  // sd = 3.02765, IQR (type 7) = 4.5, IQR/1.34 = 3.35821.
  const double sd = std::sqrt(82.5 / 9.0);
  CHECK(silverman_bandwidth(v) == doctest::Approx(0.9 * sd * std::pow(10.0, -0.2)));

  std::mt19937_64 rng(9);
  std::normal_distribution<double> jitter(0.0, 1e-3);
  std::vector<double> cluster(50);
  for (auto& c : cluster) c = 3.0 + jitter(rng);
  const auto curve = kde(cluster);
  REQUIRE(curve.grid.size() == kDensityGridSize);
  const auto peak = std::max_element(curve.density.begin(), curve.density.end());
  CHECK(std::abs(curve.grid[peak - curve.density.begin()] - 3.0) < 0.01);

  CHECK(error_code([] { kde(std::vector<double>{2.0, 2.0, 2.0}); }) == ErrorCode::DegenerateData);
  CHECK(error_code([] { kde(std::vector<double>{2.0}); }) == ErrorCode::DegenerateData);
}

TEST_CASE("kde integrates to one") {
  std::mt19937_64 rng(10);
  std::gamma_distribution<double> gamma(2.0, 1.5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> sample(100);
    for (auto& s : sample) s = gamma(rng);
    const auto curve = kde(sample);
    const double area = trapezoid(curve.grid, curve.density);
    CHECK(area >= 0.98);
    CHECK(area <= 1.02);
  }
}

TEST_CASE("sorted_quantile follows type 7") {
  const std::vector<double> v{1, 2, 3, 4};
  CHECK(sorted_quantile(v, 0.0) == 1.0);
  CHECK(sorted_quantile(v, 1.0) == 4.0);
  CHECK(sorted_quantile(v, 0.5) == 2.5);
  CHECK(sorted_quantile(v, 0.25) == doctest::Approx(1.75));
}

TEST_CASE("spearman") {
  CHECK(spearman(std::vector<double>{1, 2, 3, 4}, std::vector<double>{1, 8, 27, 64}) ==
        doctest::Approx(1.0));
  // Average ranks: y ranks (1, 2.5, 2.5, 4).
  CHECK(spearman(std::vector<double>{1, 2, 3, 4}, std::vector<double>{0, 5, 5, 9}) ==
        doctest::Approx(pearson(std::vector<double>{1, 2, 3, 4},
                                std::vector<double>{1, 2.5, 2.5, 4})));
}

TEST_CASE("performance_metrics") {
  std::vector<ProbabilityRecord> correct{record("A", {0.9, 0.1}, "g", 0), record("A", {0.2, 0.8}, "g", 1),
                                         record("B", {0.6, 0.4}, "h", 0)};
  PerformanceOptions opts;
  opts.bootstrap_iters = 200;
  const auto all = performance_metrics(correct, opts);
  REQUIRE(all.size() == 1);
  CHECK(all[0].group == "all");
  CHECK(all[0].accuracy == 1.0);
  CHECK(all[0].macro_precision == 1.0);

  std::vector<ProbabilityRecord> half{record("A", {0.9, 0.1}, std::nullopt, 0),
                                      record("A", {0.9, 0.1}, std::nullopt, 1),
                                      record("B", {0.7, 0.3}, std::nullopt, 0),
                                      record("B", {0.6, 0.4}, std::nullopt, 1)};
  const auto h = performance_metrics(half, opts);
  CHECK(h[0].accuracy == 0.5);
  CHECK(h[0].macro_precision == 0.25);
  CHECK(h[0].never_predicted == std::vector<ClassIndex>{1});
  CHECK(h[0].accuracy_ci.low <= 0.5);
  CHECK(h[0].accuracy_ci.high >= 0.5);

  opts.grouping = PerformanceGrouping::Group;
  const auto grouped = performance_metrics(correct, opts);
  REQUIRE(grouped.size() == 2);
  CHECK(grouped[0].group == "g");
  CHECK(grouped[0].n == 2);

  opts.grouping = PerformanceGrouping::CohortLabel;
  opts.cohort_labels = {{"A", "mild"}, {"B", "severe"}};
  const auto cohort = performance_metrics(correct, opts);
  REQUIRE(cohort.size() == 2);

  opts.grouping = PerformanceGrouping::None;
  opts.restrict_to = ClassSet(2, {1});
  const auto restricted = performance_metrics(correct, opts);
  CHECK(restricted[0].n == 1);

  std::vector<ProbabilityRecord> unlabelled{record("A", {0.5, 0.5})};
  CHECK(error_code([&] { performance_metrics(unlabelled); }) == ErrorCode::MissingLabels);
}
