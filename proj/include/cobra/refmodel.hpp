#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cobra/core.hpp"
#include "cobra/fid.hpp"
#include "cobra/vectors.hpp"

namespace cobra {

/// Single-hidden-layer tanh network with a softmax head:
///   hidden = tanh(W1 x + b1), probs = softmax(W2 hidden + b2).
struct RefModel {
  Eigen::MatrixXd w1;  // H x D_in
  Eigen::VectorXd b1;  // H
  Eigen::MatrixXd w2;  // K x H
  Eigen::VectorXd b2;  // K

  std::size_t input_dim() const noexcept { return static_cast<std::size_t>(w1.cols()); }
  std::size_t hidden_dim() const noexcept { return static_cast<std::size_t>(w1.rows()); }
  std::size_t num_classes() const noexcept { return static_cast<std::size_t>(w2.rows()); }

  /// Zero-initialized model of the given shape.
  static RefModel zeros(std::size_t input_dim, std::size_t hidden_dim, std::size_t num_classes);
};

struct TrainConfig {
  double learning_rate = 0.1;
  std::size_t epochs = 40;
  std::size_t batch_size = 32;
  std::uint64_t seed = 42;
  std::size_t hidden_dim = 32;
  /// Half-width of the uniform init; 1/sqrt(fan_in) per layer when unset.
  std::optional<double> init_scale;
};

struct ForwardResult {
  Eigen::VectorXd probs;
  Eigen::VectorXd hidden;
};

/// Numerically stable softmax (max-subtracted).
Eigen::VectorXd softmax(const Eigen::VectorXd& logits);

ForwardResult forward(const RefModel& model, std::span<const double> x);

struct Gradients {
  Eigen::MatrixXd w1;
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;
  Eigen::VectorXd b2;
};

struct LossAndGrad {
  double loss = 0.0;
  Gradients grad;
};

/// Mean cross-entropy over the batch (rows of `x`) and its analytic gradient.
LossAndGrad loss_and_grad(const RefModel& model, const Eigen::MatrixXd& x,
                          std::span<const ClassIndex> labels);

/// Uniform [-s, s] init from the seeded generator.
RefModel init_model(std::size_t input_dim, std::size_t num_classes, const TrainConfig& cfg);

struct TrainResult {
  RefModel model;
  std::vector<double> step_losses;  // mini-batch loss at every step
  double initial_loss = 0.0;        // full-data loss before training
  double final_loss = 0.0;          // full-data loss after training
};

/// Plain mini-batch gradient descent; deterministic given cfg.seed.
TrainResult train_with_history(const VectorTable& data, std::size_t num_classes,
                               const TrainConfig& cfg);

RefModel train(const VectorTable& data, std::size_t num_classes, const TrainConfig& cfg);

struct Predictions {
  std::vector<ProbabilityRecord> records;
  /// Hidden activations, one row per input row, with the predicted class.
  VectorTable features;
};

Predictions predict_dataset(const RefModel& model, const VectorTable& data);

/// Text checkpoint: a versioned header, the layer sizes, then row-major
/// parameter arrays. Values are written in shortest round-trip form.
void write_checkpoint(std::ostream& out, const RefModel& model);
RefModel read_checkpoint(std::istream& in);

}  // namespace cobra
