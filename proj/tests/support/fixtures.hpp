#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cobra/core.hpp"
#include "cobra/refmodel.hpp"
#include "cobra/synth.hpp"

namespace cobra::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

void write_text(const std::filesystem::path& path, const std::string& text);

ProbabilityRecord record(std::string subject, std::vector<double> probs,
                         std::optional<std::string> group = std::nullopt,
                         std::optional<ClassIndex> label = std::nullopt);

/// Uniform random point on the K-simplex.
std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t k);

/// A A^T + eps I for a Gaussian A.
Eigen::MatrixXd random_psd(std::mt19937_64& rng, std::size_t d, double eps = 0.0);

/// Synthetic cohort, a classifier trained on its healthy subjects, and the
/// classifier's outputs on the test subjects.
struct Pipeline {
  SynthConfig config;
  SynthCohort cohort;
  TrainResult training;
  Predictions test;
  Predictions reference;
};

Pipeline run_pipeline(const SynthConfig& config, const TrainConfig& train = {});

/// Runs the CLI in-process; stdout/stderr are captured.
struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};
CliResult run(std::vector<std::string> args);

}  // namespace cobra::testing

namespace cobra::testing {

/// n pairs whose sample Pearson correlation is exactly `rho` (up to
/// rounding): y is built from x and a residual orthogonalized against it.
std::pair<std::vector<double>, std::vector<double>> pairs_with_correlation(double rho,
                                                                          std::size_t n,
                                                                          std::uint64_t seed);

}  // namespace cobra::testing
