#include "cobra/refmodel.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "cobra/numeric.hpp"
#include "cobra/scoring.hpp"
#include "cobra/text.hpp"

namespace cobra {

namespace {

constexpr const char* kCheckpointMagic = "cobra-refmodel";
constexpr int kCheckpointVersion = 1;

// Stream indices used under the training seed.
constexpr std::uint64_t kInitStream = 0;
constexpr std::uint64_t kShuffleStream = 1;

Eigen::MatrixXd batch_matrix(const VectorTable& data, std::span<const std::size_t> idx) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(data.dim));
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const auto& values = data.rows[idx[r]].values;
    for (std::size_t c = 0; c < data.dim; ++c) {
      x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = values[c];
    }
  }
  return x;
}

void check_finite(const RefModel& m) {
  if (!m.w1.allFinite() || !m.b1.allFinite() || !m.w2.allFinite() || !m.b2.allFinite()) {
    throw Error(ErrorCode::CheckpointMismatch, "model contains non-finite parameters");
  }
}

}  // namespace

RefModel RefModel::zeros(std::size_t input_dim, std::size_t hidden_dim,
                         std::size_t num_classes) {
  const auto d = static_cast<Eigen::Index>(input_dim);
  const auto h = static_cast<Eigen::Index>(hidden_dim);
  const auto k = static_cast<Eigen::Index>(num_classes);
  return {Eigen::MatrixXd::Zero(h, d), Eigen::VectorXd::Zero(h), Eigen::MatrixXd::Zero(k, h),
          Eigen::VectorXd::Zero(k)};
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  const Eigen::VectorXd e = (logits.array() - logits.maxCoeff()).exp().matrix();
  return e / e.sum();
}

ForwardResult forward(const RefModel& model, std::span<const double> x) {
  if (x.size() != model.input_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "forward: input dimension does not match model");
  }
  const Eigen::Map<const Eigen::VectorXd> input(x.data(), static_cast<Eigen::Index>(x.size()));
  ForwardResult out;
  out.hidden = (model.w1 * input + model.b1).array().tanh().matrix();
  out.probs = softmax(model.w2 * out.hidden + model.b2);
  return out;
}

LossAndGrad loss_and_grad(const RefModel& model, const Eigen::MatrixXd& x,
                          std::span<const ClassIndex> labels) {
  const auto batch = x.rows();
  if (batch == 0 || static_cast<std::size_t>(batch) != labels.size()) {
    throw Error(ErrorCode::LengthMismatch, "loss_and_grad: batch and labels differ in size");
  }
  if (static_cast<std::size_t>(x.cols()) != model.input_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "loss_and_grad: input dimension does not match model");
  }
  const auto num_classes = static_cast<Eigen::Index>(model.num_classes());

  const Eigen::MatrixXd hidden =
      ((x * model.w1.transpose()).rowwise() + model.b1.transpose()).array().tanh().matrix();
  const Eigen::MatrixXd logits = (hidden * model.w2.transpose()).rowwise() + model.b2.transpose();

  Eigen::MatrixXd delta(batch, num_classes);  // dLoss/dlogits, unscaled
  std::vector<double> losses(static_cast<std::size_t>(batch));
  for (Eigen::Index i = 0; i < batch; ++i) {
    const ClassIndex y = labels[static_cast<std::size_t>(i)];
    if (y >= model.num_classes()) {
      throw Error(ErrorCode::LabelOutOfRange, "loss_and_grad: label outside [0, K)");
    }
    const Eigen::RowVectorXd z = logits.row(i);
    const double zmax = z.maxCoeff();
    const Eigen::RowVectorXd e = (z.array() - zmax).exp().matrix();
    const double total = e.sum();
    losses[static_cast<std::size_t>(i)] =
        std::log(total) - (z(static_cast<Eigen::Index>(y)) - zmax);
    delta.row(i) = e / total;
    delta(i, static_cast<Eigen::Index>(y)) -= 1.0;
  }
  delta /= static_cast<double>(batch);

  LossAndGrad out;
  out.loss = pairwise_mean(losses);
  out.grad.w2 = delta.transpose() * hidden;
  out.grad.b2 = delta.colwise().sum().transpose();
  const Eigen::MatrixXd dpre =
      ((delta * model.w2).array() * (1.0 - hidden.array().square())).matrix();
  out.grad.w1 = dpre.transpose() * x;
  out.grad.b1 = dpre.colwise().sum().transpose();
  return out;
}

RefModel init_model(std::size_t input_dim, std::size_t num_classes, const TrainConfig& cfg) {
  if (input_dim == 0 || cfg.hidden_dim == 0 || num_classes < 2) {
    throw Error(ErrorCode::InvalidArgument, "init_model: degenerate layer sizes");
  }
  RefModel m = RefModel::zeros(input_dim, cfg.hidden_dim, num_classes);
  auto rng = derive_stream(cfg.seed, kInitStream);
  auto fill = [&](auto& param, double fan_in) {
    const double s = cfg.init_scale.value_or(1.0 / std::sqrt(fan_in));
    std::uniform_real_distribution<double> u(-s, s);
    for (Eigen::Index i = 0; i < param.size(); ++i) param.data()[i] = u(rng);
  };
  fill(m.w1, static_cast<double>(input_dim));
  fill(m.b1, static_cast<double>(input_dim));
  fill(m.w2, static_cast<double>(cfg.hidden_dim));
  fill(m.b2, static_cast<double>(cfg.hidden_dim));
  return m;
}

TrainResult train_with_history(const VectorTable& data, std::size_t num_classes,
                               const TrainConfig& cfg) {
  if (!(cfg.learning_rate > 0.0) || cfg.epochs == 0 || cfg.batch_size == 0) {
    throw Error(ErrorCode::InvalidArgument,
                "train: learning rate, epochs and batch size must be positive");
  }
  if (data.rows.empty() || !data.has_labels()) {
    throw Error(ErrorCode::MissingLabels, "train: every training row needs a label");
  }
  std::set<ClassIndex> distinct;
  std::vector<ClassIndex> labels;
  labels.reserve(data.rows.size());
  for (const auto& row : data.rows) {
    if (*row.label >= num_classes) {
      throw Error(ErrorCode::LabelOutOfRange,
                  "train: label " + std::to_string(*row.label) + " outside [0, " +
                      std::to_string(num_classes) + ")");
    }
    distinct.insert(*row.label);
    labels.push_back(*row.label);
  }
  if (distinct.size() < num_classes) {
    throw Error(ErrorCode::InvalidArgument, "train: not every class occurs in the training data");
  }

  TrainResult out;
  out.model = init_model(data.dim, num_classes, cfg);
  RefModel& m = out.model;

  std::vector<std::size_t> all(data.rows.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  const Eigen::MatrixXd x_all = batch_matrix(data, all);
  out.initial_loss = loss_and_grad(m, x_all, labels).loss;

  auto rng = derive_stream(cfg.seed, kShuffleStream);
  std::vector<std::size_t> order = all;
  std::vector<ClassIndex> batch_labels;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      const std::span<const std::size_t> idx(order.data() + start, stop - start);
      batch_labels.clear();
      for (std::size_t i : idx) batch_labels.push_back(labels[i]);
      const auto lg = loss_and_grad(m, batch_matrix(data, idx), batch_labels);
      out.step_losses.push_back(lg.loss);
      m.w1 -= cfg.learning_rate * lg.grad.w1;
      m.b1 -= cfg.learning_rate * lg.grad.b1;
      m.w2 -= cfg.learning_rate * lg.grad.w2;
      m.b2 -= cfg.learning_rate * lg.grad.b2;
    }
  }
  out.final_loss = loss_and_grad(m, x_all, labels).loss;
  return out;
}

RefModel train(const VectorTable& data, std::size_t num_classes, const TrainConfig& cfg) {
  return train_with_history(data, num_classes, cfg).model;
}

Predictions predict_dataset(const RefModel& model, const VectorTable& data) {
  if (data.dim != model.input_dim()) {
    std::ostringstream msg;
    msg << "predict: data dimension " << data.dim << " does not match model input "
        << model.input_dim();
    throw Error(ErrorCode::DimensionMismatch, msg.str());
  }
  Predictions out;
  out.records.reserve(data.rows.size());
  out.features.dim = model.hidden_dim();
  out.features.rows.reserve(data.rows.size());
  for (const auto& row : data.rows) {
    const ForwardResult f = forward(model, row.values);
    ProbabilityRecord rec{row.subject_id, row.point_id, row.group,
                          std::vector<double>(f.probs.data(), f.probs.data() + f.probs.size()),
                          row.label};
    VectorRow feat{row.subject_id, row.point_id, row.group, row.label,
                   predict_class(rec.probs),
                   std::vector<double>(f.hidden.data(), f.hidden.data() + f.hidden.size())};
    out.records.push_back(std::move(rec));
    out.features.rows.push_back(std::move(feat));
  }
  return out;
}

void write_checkpoint(std::ostream& out, const RefModel& model) {
  out << kCheckpointMagic << ' ' << kCheckpointVersion << '\n';
  out << "input_dim " << model.input_dim() << '\n';
  out << "hidden_dim " << model.hidden_dim() << '\n';
  out << "num_classes " << model.num_classes() << '\n';
  auto emit = [&](const char* name, const auto& param) {
    out << name << ' ' << param.size();
    // Row-major regardless of Eigen's storage order.
    for (Eigen::Index r = 0; r < param.rows(); ++r) {
      for (Eigen::Index c = 0; c < param.cols(); ++c) out << ' ' << format_double(param(r, c));
    }
    out << '\n';
  };
  emit("w1", model.w1);
  emit("b1", model.b1);
  emit("w2", model.w2);
  emit("b2", model.b2);
}

RefModel read_checkpoint(std::istream& in) {
  auto fail = [](const std::string& msg) -> void {
    throw Error(ErrorCode::CheckpointMismatch, "checkpoint: " + msg);
  };
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != kCheckpointMagic) fail("not a refmodel checkpoint");
  if (version != kCheckpointVersion) fail("unsupported version " + std::to_string(version));

  auto read_size = [&](const char* key) {
    std::string name, value;
    if (!(in >> name >> value) || name != key) fail(std::string("expected ") + key);
    const auto v = parse_unsigned(value);
    if (!v || *v == 0) fail(std::string("invalid ") + key);
    return static_cast<std::size_t>(*v);
  };
  const std::size_t input_dim = read_size("input_dim");
  const std::size_t hidden_dim = read_size("hidden_dim");
  const std::size_t num_classes = read_size("num_classes");
  RefModel m = RefModel::zeros(input_dim, hidden_dim, num_classes);

  auto read_param = [&](const char* key, auto& param) {
    std::string name;
    if (!(in >> name)) {
      std::ostringstream msg;
      msg << "size mismatch for " << key << ": layer sizes require " << param.size()
          << " values, found none (file truncated)";
      fail(msg.str());
    }
    if (name != key) fail(std::string("expected parameter ") + key);
    // The rest of the line holds the declared count and the values.
    std::string line;
    std::getline(in, line);
    std::istringstream values(line);
    std::string token;
    std::vector<double> parsed;
    std::size_t declared = 0;
    if (!(values >> token)) fail(std::string("missing size for ") + key);
    if (auto d = parse_unsigned(token)) declared = static_cast<std::size_t>(*d);
    while (values >> token) {
      const auto v = parse_double(token);
      if (!v || !std::isfinite(*v)) fail(std::string("bad value in ") + key + ": " + token);
      parsed.push_back(*v);
    }
    const auto expected = static_cast<std::size_t>(param.size());
    if (declared != expected || parsed.size() != expected) {
      std::ostringstream msg;
      msg << "size mismatch for " << key << ": layer sizes require " << expected
          << " values, header declares " << declared << ", found " << parsed.size();
      fail(msg.str());
    }
    std::size_t i = 0;
    for (Eigen::Index r = 0; r < param.rows(); ++r) {
      for (Eigen::Index c = 0; c < param.cols(); ++c) param(r, c) = parsed[i++];
    }
  };
  read_param("w1", m.w1);
  read_param("b1", m.b1);
  read_param("w2", m.w2);
  read_param("b2", m.b2);
  std::string extra;
  if (in >> extra) fail("trailing content after parameters");
  check_finite(m);
  return m;
}

}  // namespace cobra
