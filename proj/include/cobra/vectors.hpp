#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cobra/core.hpp"
#include "cobra/fid.hpp"

namespace cobra {

/// One raw or feature vector with its provenance.
struct VectorRow {
  std::string subject_id;
  std::string point_id;
  std::optional<std::string> group;
  std::optional<ClassIndex> label;
  std::optional<ClassIndex> predicted;
  std::vector<double> values;
};

/// Rows of a common dimension, as stored in feature-style CSV files.
struct VectorTable {
  std::size_t dim = 0;
  std::vector<VectorRow> rows;

  bool has_labels() const;
  bool has_predictions() const;
};

/// Splits a table into per-subject feature sets, subjects in first-appearance
/// order.
std::vector<FeatureSet> to_feature_sets(const VectorTable& table);

/// All rows of a table as a single feature set with the given id.
FeatureSet to_feature_set(const VectorTable& table, std::string id);

}  // namespace cobra
