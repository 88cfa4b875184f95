#include "fixtures.hpp"

#include <atomic>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "cobra/cli.hpp"

namespace cobra::testing {

namespace fs = std::filesystem;

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() /
          ("cobra_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

ProbabilityRecord record(std::string subject, std::vector<double> probs,
                         std::optional<std::string> group, std::optional<ClassIndex> label) {
  ProbabilityRecord r;
  r.subject_id = std::move(subject);
  r.probs = std::move(probs);
  r.group = std::move(group);
  r.true_label = label;
  return r;
}

std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t k) {
  std::exponential_distribution<double> expo(1.0);
  std::vector<double> p(k);
  double total = 0.0;
  for (auto& v : p) total += (v = expo(rng));
  for (auto& v : p) v /= total;
  return p;
}

Eigen::MatrixXd random_psd(std::mt19937_64& rng, std::size_t d, double eps) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd a(d, d);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = normal(rng);
  return a * a.transpose() + eps * Eigen::MatrixXd::Identity(d, d);
}

Pipeline run_pipeline(const SynthConfig& config, const TrainConfig& train) {
  Pipeline p;
  p.config = config;
  p.cohort = generate_cohort(config);
  p.training = train_with_history(p.cohort.healthy, config.num_classes, train);
  p.test = predict_dataset(p.training.model, p.cohort.test_table(config.input_dim));
  p.reference = predict_dataset(p.training.model, p.cohort.reference);
  return p;
}

CliResult run(std::vector<std::string> args) {
  args.insert(args.begin(), "cobra");
  std::ostringstream out;
  std::ostringstream err;
  CliResult r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

}  // namespace cobra::testing

namespace cobra::testing {

std::pair<std::vector<double>, std::vector<double>> pairs_with_correlation(double rho,
                                                                          std::size_t n,
                                                                          std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd x(n), z(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = normal(rng);
    z[i] = normal(rng);
  }
  x.array() -= x.mean();
  z.array() -= z.mean();
  z -= (z.dot(x) / x.dot(x)) * x;
  x /= x.norm();
  z /= z.norm();
  const Eigen::VectorXd y = rho * x + std::sqrt(1.0 - rho * rho) * z;
  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = 50.0 + 10.0 * x[i];
    ys[i] = y[i];
  }
  return {xs, ys};
}

}  // namespace cobra::testing
