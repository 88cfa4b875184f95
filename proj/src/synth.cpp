#include "cobra/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "cobra/numeric.hpp"

namespace cobra {

namespace {

// Stream offsets under the cohort seed; each subject draws its own seed from
// a distinct stream.
constexpr std::uint64_t kHealthyStreams = 0;
constexpr std::uint64_t kReferenceStreams = 1'000'000;
constexpr std::uint64_t kTestStreams = 2'000'000;
constexpr std::uint64_t kConfounderStream = 3'000'000;

std::uint64_t subject_seed(std::uint64_t cohort_seed, std::uint64_t stream) {
  auto rng = derive_stream(cohort_seed, stream);
  return rng();
}

std::string make_id(const char* prefix, std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%03zu", prefix, index);
  return buf;
}

Eigen::MatrixXd base_means(const SynthConfig& cfg) {
  const auto k = static_cast<Eigen::Index>(cfg.num_classes);
  const auto d = static_cast<Eigen::Index>(cfg.input_dim);
  Eigen::MatrixXd means = Eigen::MatrixXd::Zero(k, d);
  if (cfg.class_means.empty()) {
    for (Eigen::Index c = 0; c < k; ++c) means(c, c) = cfg.mean_scale;
    return means;
  }
  for (Eigen::Index c = 0; c < k; ++c) {
    for (Eigen::Index j = 0; j < d; ++j) {
      means(c, j) = cfg.class_means[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)];
    }
  }
  return means;
}

void append_rows(const VectorTable& src, VectorTable& dst) {
  dst.rows.insert(dst.rows.end(), src.rows.begin(), src.rows.end());
}

}  // namespace

void SynthConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidArgument, msg); };
  if (num_classes < 2) fail("synth: need at least 2 classes");
  if (input_dim == 0) fail("synth: input dimension must be positive");
  if (!(spread > 0.0)) fail("synth: spread must be positive");
  if (class_means.empty() && num_classes > input_dim) {
    fail("synth: default class means need num_classes <= input_dim");
  }
  if (!class_means.empty()) {
    if (class_means.size() != num_classes) fail("synth: class_means needs one row per class");
    for (const auto& row : class_means) {
      if (row.size() != input_dim) fail("synth: class_means rows must have input_dim entries");
    }
  }
  for (ClassIndex k : degraded_classes) {
    if (k >= num_classes) fail("synth: degraded class outside [0, K)");
  }
  if (!class_names.empty() && class_names.size() != num_classes) {
    fail("synth: class_names needs one name per class");
  }
  if (points_per_subject == 0) fail("synth: points_per_subject must be positive");
  for (double s : severity_grid) {
    if (!(s >= 0.0 && s <= 1.0)) fail("synth: severity values must lie in [0, 1]");
  }
  if (confounder) {
    if (!(confounder->fraction >= 0.0 && confounder->fraction <= 1.0)) {
      fail("synth: confounder fraction must lie in [0, 1]");
    }
    if (!confounder->direction.empty() && confounder->direction.size() != input_dim) {
      fail("synth: confounder direction must have input_dim entries");
    }
  }
}

Eigen::VectorXd degraded_centroid(const SynthConfig& cfg) {
  const Eigen::MatrixXd means = base_means(cfg);
  if (cfg.degraded_classes.empty()) return means.colwise().mean().transpose();
  Eigen::VectorXd centroid = Eigen::VectorXd::Zero(means.cols());
  for (ClassIndex k : cfg.degraded_classes) {
    centroid += means.row(static_cast<Eigen::Index>(k)).transpose();
  }
  return centroid / static_cast<double>(cfg.degraded_classes.size());
}

Eigen::MatrixXd class_means_at(const SynthConfig& cfg, double severity) {
  if (!(severity >= 0.0 && severity <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "severity must lie in [0, 1]");
  }
  Eigen::MatrixXd means = base_means(cfg);
  const Eigen::RowVectorXd centroid = degraded_centroid(cfg).transpose();
  for (ClassIndex k : cfg.degraded_classes) {
    const auto row = static_cast<Eigen::Index>(k);
    if (severity == 1.0) {
      means.row(row) = centroid;
    } else {
      means.row(row) = (1.0 - severity) * means.row(row) + severity * centroid;
    }
  }
  return means;
}

Eigen::VectorXd confounder_shift(const SynthConfig& cfg) {
  const auto d = static_cast<Eigen::Index>(cfg.input_dim);
  Eigen::VectorXd shift = Eigen::VectorXd::Zero(d);
  if (!cfg.confounder) return shift;
  if (cfg.confounder->direction.empty()) {
    shift(d - 1) = 1.0;
  } else {
    shift = Eigen::Map<const Eigen::VectorXd>(cfg.confounder->direction.data(), d);
    const double norm = shift.norm();
    if (!(norm > 0.0)) throw Error(ErrorCode::InvalidArgument, "confounder direction is zero");
    shift /= norm;
  }
  return cfg.confounder->shift_magnitude * shift;
}

SynthSubject generate_subject(const SynthConfig& cfg, double severity, bool confounded,
                              std::uint64_t seed, std::string subject_id) {
  cfg.validate();
  const Eigen::MatrixXd means = class_means_at(cfg, severity);
  const Eigen::VectorXd shift =
      confounded ? confounder_shift(cfg) : Eigen::VectorXd::Zero(means.cols());

  SynthSubject subject{std::move(subject_id), severity, confounded, {}};
  subject.rows.reserve(cfg.points_per_subject);
  auto rng = derive_stream(seed, 0);
  std::uniform_int_distribution<std::size_t> pick_class(0, cfg.num_classes - 1);
  std::uniform_int_distribution<std::size_t> pick_group(
      0, cfg.groups.empty() ? 0 : cfg.groups.size() - 1);
  std::normal_distribution<double> noise(0.0, cfg.spread);
  for (std::size_t p = 0; p < cfg.points_per_subject; ++p) {
    VectorRow row;
    row.subject_id = subject.subject_id;
    row.point_id = make_id("p", p);
    const ClassIndex label = pick_class(rng);
    row.label = label;
    if (!cfg.groups.empty()) row.group = cfg.groups[pick_group(rng)];
    row.values.resize(cfg.input_dim);
    for (std::size_t j = 0; j < cfg.input_dim; ++j) {
      const auto col = static_cast<Eigen::Index>(j);
      row.values[j] = means(static_cast<Eigen::Index>(label), col) + noise(rng) + shift(col);
    }
    subject.rows.push_back(std::move(row));
  }
  return subject;
}

VectorTable generate_healthy(const SynthConfig& cfg) {
  cfg.validate();
  VectorTable table;
  table.dim = cfg.input_dim;
  for (std::size_t i = 0; i < cfg.healthy_subjects; ++i) {
    auto s = generate_subject(cfg, 0.0, false, subject_seed(cfg.seed, kHealthyStreams + i),
                              make_id("H", i));
    table.rows.insert(table.rows.end(), std::make_move_iterator(s.rows.begin()),
                      std::make_move_iterator(s.rows.end()));
  }
  return table;
}

VectorTable SynthCohort::test_table(std::size_t dim) const {
  VectorTable table;
  table.dim = dim;
  for (const auto& s : test) table.rows.insert(table.rows.end(), s.rows.begin(), s.rows.end());
  return table;
}

SynthCohort generate_cohort(const SynthConfig& cfg) {
  cfg.validate();
  SynthCohort cohort;
  cohort.healthy = generate_healthy(cfg);

  cohort.reference.dim = cfg.input_dim;
  for (std::size_t i = 0; i < cfg.reference_subjects; ++i) {
    auto s = generate_subject(cfg, 0.0, false, subject_seed(cfg.seed, kReferenceStreams + i),
                              make_id("R", i));
    VectorTable part{cfg.input_dim, std::move(s.rows)};
    append_rows(part, cohort.reference);
  }

  // Confounded subjects: a seeded choice of round(fraction * n) per level.
  std::vector<bool> confounded(cfg.severity_grid.size() * cfg.subjects_per_level, false);
  if (cfg.confounder) {
    auto rng = derive_stream(cfg.seed, kConfounderStream);
    const auto per_level = static_cast<std::size_t>(
        std::lround(cfg.confounder->fraction * static_cast<double>(cfg.subjects_per_level)));
    std::vector<std::size_t> slots(cfg.subjects_per_level);
    for (std::size_t level = 0; level < cfg.severity_grid.size(); ++level) {
      std::iota(slots.begin(), slots.end(), std::size_t{0});
      std::shuffle(slots.begin(), slots.end(), rng);
      for (std::size_t t = 0; t < per_level; ++t) {
        confounded[level * cfg.subjects_per_level + slots[t]] = true;
      }
    }
  }

  std::size_t index = 0;
  for (double severity : cfg.severity_grid) {
    for (std::size_t j = 0; j < cfg.subjects_per_level; ++j, ++index) {
      auto subject = generate_subject(cfg, severity, confounded[index],
                                      subject_seed(cfg.seed, kTestStreams + index),
                                      make_id("S", index));
      cohort.assessments.add(subject.subject_id, subject.clinical_score());
      const char* stratum = subject.confounded ? "confounded" : "clean";
      cohort.strata.emplace(subject.subject_id, stratum);
      cohort.strata_order.push_back(subject.subject_id);
      cohort.test.push_back(std::move(subject));
    }
  }
  return cohort;
}

}  // namespace cobra
