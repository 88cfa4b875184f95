#include "doctest.h"

#include <cmath>
#include <random>
#include <sstream>

#include "cobra/refmodel.hpp"
#include "cobra/synth.hpp"
#include "fixtures.hpp"

using namespace cobra;

namespace {

RefModel random_model(std::mt19937_64& rng, std::size_t d, std::size_t h, std::size_t k) {
  std::normal_distribution<double> normal(0.0, 0.7);
  RefModel m = RefModel::zeros(d, h, k);
  for (auto* p : {&m.w1, &m.w2}) {
    for (Eigen::Index i = 0; i < p->size(); ++i) p->data()[i] = normal(rng);
  }
  for (auto* p : {&m.b1, &m.b2}) {
    for (Eigen::Index i = 0; i < p->size(); ++i) p->data()[i] = normal(rng);
  }
  return m;
}

VectorTable toy_set(std::size_t n, std::size_t d, std::size_t k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  VectorTable t;
  t.dim = d;
  for (std::size_t i = 0; i < n; ++i) {
    VectorRow row;
    row.subject_id = "T";
    row.point_id = "p" + std::to_string(i);
    row.label = i % k;
    for (std::size_t j = 0; j < d; ++j) row.values.push_back(normal(rng));
    t.rows.push_back(row);
  }
  return t;
}

// Relative error with an absolute floor for near-zero components.
double rel_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
}

}  // namespace

TEST_CASE("softmax and forward") {
  const auto p = softmax(Eigen::Vector3d(1000, 1000, 1000));
  CHECK(p.sum() == doctest::Approx(1.0));
  CHECK(p(0) == doctest::Approx(1.0 / 3.0));

  const RefModel zero = RefModel::zeros(3, 4, 5);
  const auto out = forward(zero, std::vector<double>{0.3, -1.0, 2.0});
  for (Eigen::Index i = 0; i < 5; ++i) CHECK(out.probs(i) == doctest::Approx(0.2));

  // 1 input, 1 hidden unit, 2 classes: hidden = tanh(atanh(0.5)) = 0.5, logits (2, 0).
  RefModel m = RefModel::zeros(1, 1, 2);
  m.w1(0, 0) = 1.0;
  m.b1(0) = std::atanh(0.5) - 1.0;
  m.w2(0, 0) = 4.0;
  const auto hand = forward(m, std::vector<double>{1.0});
  CHECK(hand.hidden(0) == doctest::Approx(0.5));
  CHECK(hand.probs(0) == doctest::Approx(std::exp(2.0) / (std::exp(2.0) + 1.0)));
  CHECK(hand.probs(1) == doctest::Approx(0.1192).epsilon(1e-3));
}

TEST_CASE("cross-entropy limits") {
  const RefModel zero = RefModel::zeros(2, 3, 4);
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(6, 2);
  const std::vector<ClassIndex> labels{0, 1, 2, 3, 0, 1};
  CHECK(loss_and_grad(zero, x, labels).loss == doctest::Approx(std::log(4.0)));

  RefModel confident = RefModel::zeros(1, 1, 2);
  confident.b2(0) = 50.0;
  Eigen::MatrixXd one = Eigen::MatrixXd::Zero(3, 1);
  const std::vector<ClassIndex> zeros{0, 0, 0};
  CHECK(loss_and_grad(confident, one, zeros).loss < 1e-15);
}

TEST_CASE("analytic gradient matches central differences") {
  std::mt19937_64 rng(31);
  constexpr double step = 1e-5;
  for (int config = 0; config < 25; ++config) {
    const std::size_t d = 1 + rng() % 5, h = 1 + rng() % 6, k = 2 + rng() % 4, n = 1 + rng() % 8;
    RefModel m = random_model(rng, d, h, k);
    Eigen::MatrixXd x(n, d);
    std::normal_distribution<double> normal;
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = normal(rng);
    std::vector<ClassIndex> labels(n);
    for (auto& l : labels) l = rng() % k;

    const auto analytic = loss_and_grad(m, x, labels).grad;
    auto check = [&](Eigen::MatrixXd& param, const Eigen::MatrixXd& grad) {
      for (Eigen::Index i = 0; i < param.size(); ++i) {
        const double saved = param.data()[i];
        param.data()[i] = saved + step;
        const double up = loss_and_grad(m, x, labels).loss;
        param.data()[i] = saved - step;
        const double down = loss_and_grad(m, x, labels).loss;
        param.data()[i] = saved;
        CHECK(rel_error((up - down) / (2 * step), grad.data()[i]) < 1e-4);
      }
    };
    auto checkv = [&](Eigen::VectorXd& param, const Eigen::VectorXd& grad) {
      Eigen::MatrixXd as_matrix = param;
      for (Eigen::Index i = 0; i < param.size(); ++i) {
        const double saved = param(i);
        param(i) = saved + step;
        const double up = loss_and_grad(m, x, labels).loss;
        param(i) = saved - step;
        const double down = loss_and_grad(m, x, labels).loss;
        param(i) = saved;
        CHECK(rel_error((up - down) / (2 * step), grad(i)) < 1e-4);
      }
    };
    check(m.w1, analytic.w1);
    check(m.w2, analytic.w2);
    checkv(m.b1, analytic.b1);
    checkv(m.b2, analytic.b2);
  }
}

TEST_CASE("training memorizes a small toy set") {
  const auto data = toy_set(10, 4, 3, 5);
  TrainConfig cfg;
  cfg.batch_size = 10;
  cfg.epochs = 2000;
  cfg.learning_rate = 0.5;
  cfg.hidden_dim = 16;
  const auto result = train_with_history(data, 3, cfg);
  CHECK(result.step_losses.size() == 2000);
  CHECK(result.final_loss < 0.05);
  CHECK(result.final_loss < result.initial_loss);
}

TEST_CASE("training is deterministic per seed") {
  SynthConfig synth;
  synth.healthy_subjects = 4;
  const auto data = generate_healthy(synth);
  TrainConfig cfg;
  cfg.epochs = 10;
  const auto a = train_with_history(data, 5, cfg);
  const auto b = train_with_history(data, 5, cfg);
  CHECK(a.model.w1 == b.model.w1);
  CHECK(a.model.b2 == b.model.b2);
  CHECK(a.step_losses == b.step_losses);

  cfg.seed = 7;
  const auto c = train_with_history(data, 5, cfg);
  CHECK(c.model.w1 != a.model.w1);
  CHECK(c.final_loss < 2.0 * a.final_loss);
  CHECK(a.final_loss < 2.0 * c.final_loss);
}

TEST_CASE("smoothed training loss decreases") {
  const auto data = generate_healthy(SynthConfig{});
  const auto result = train_with_history(data, 5, TrainConfig{});
  const auto& losses = result.step_losses;
  REQUIRE(losses.size() >= 20);
  std::vector<double> windows;
  for (std::size_t start = 0; start + 10 <= losses.size(); start += 10) {
    double sum = 0.0;
    for (std::size_t i = start; i < start + 10; ++i) sum += losses[i];
    windows.push_back(sum / 10.0);
  }
  CHECK(windows.back() <= 0.9 * windows.front());
  for (double w : windows) CHECK(w <= windows.front());
  CHECK(result.final_loss < result.initial_loss);
}

TEST_CASE("training input validation") {
  auto data = toy_set(6, 2, 3, 1);
  CHECK_THROWS_AS(train(data, 2, TrainConfig{}), Error);  // label 2 out of range
  try {
    train(data, 2, TrainConfig{});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::LabelOutOfRange);
  }
  auto unlabelled = data;
  unlabelled.rows[0].label.reset();
  try {
    train(unlabelled, 3, TrainConfig{});
    FAIL("expected MissingLabels");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingLabels);
  }
}

TEST_CASE("predict_dataset") {
  std::mt19937_64 rng(33);
  const RefModel m = random_model(rng, 4, 5, 3);
  const auto data = toy_set(17, 4, 3, 2);
  const auto pred = predict_dataset(m, data);
  REQUIRE(pred.records.size() == 17);
  REQUIRE(pred.features.rows.size() == 17);
  CHECK(pred.features.dim == 5);
  for (std::size_t i = 0; i < 17; ++i) {
    CHECK_NOTHROW(validate_record(pred.records[i].probs, 3));
    CHECK(pred.records[i].true_label == data.rows[i].label);
    CHECK(pred.features.rows[i].predicted.has_value());
  }
  try {
    predict_dataset(m, toy_set(3, 2, 3, 2));
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionMismatch);
  }
}

TEST_CASE("checkpoint round trip and corruption") {
  std::mt19937_64 rng(34);
  const RefModel m = random_model(rng, 3, 4, 2);
  std::stringstream buf;
  write_checkpoint(buf, m);
  const std::string text = buf.str();
  const RefModel back = read_checkpoint(buf);
  CHECK(back.w1 == m.w1);
  CHECK(back.b1 == m.b1);
  CHECK(back.w2 == m.w2);
  CHECK(back.b2 == m.b2);

  // Cut after a complete line partway through the parameters.
  std::istringstream truncated(text.substr(0, text.rfind('\n', text.size() / 2) + 1));
  try {
    read_checkpoint(truncated);
    FAIL("expected CheckpointMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CheckpointMismatch);
    CHECK(std::string(e.what()).find("size mismatch") != std::string::npos);
  }
  std::istringstream no_tail(text.substr(0, text.find("b2")));
  try {
    read_checkpoint(no_tail);
    FAIL("expected CheckpointMismatch");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("size mismatch for b2") != std::string::npos);
  }
  std::istringstream garbage("not a checkpoint\n");
  CHECK_THROWS_AS(read_checkpoint(garbage), Error);
}
