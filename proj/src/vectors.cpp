#include "cobra/vectors.hpp"

#include <algorithm>
#include <unordered_map>

namespace cobra {

namespace {

FeatureSet gather(std::string id, const VectorTable& table,
                  const std::vector<std::size_t>& indices) {
  const bool with_pred = table.has_predictions();
  FeatureSet fs{std::move(id),
                Eigen::MatrixXd(static_cast<Eigen::Index>(indices.size()),
                                static_cast<Eigen::Index>(table.dim)),
                {}};
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const auto& row = table.rows[indices[r]];
    for (std::size_t c = 0; c < table.dim; ++c) {
      fs.rows(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row.values[c];
    }
    if (with_pred) fs.predicted.push_back(*row.predicted);
  }
  return fs;
}

}  // namespace

bool VectorTable::has_labels() const {
  return !rows.empty() &&
         std::all_of(rows.begin(), rows.end(), [](const VectorRow& r) { return r.label.has_value(); });
}

bool VectorTable::has_predictions() const {
  return !rows.empty() && std::all_of(rows.begin(), rows.end(), [](const VectorRow& r) {
    return r.predicted.has_value();
  });
}

std::vector<FeatureSet> to_feature_sets(const VectorTable& table) {
  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    auto [it, inserted] = members.try_emplace(table.rows[i].subject_id);
    if (inserted) order.push_back(table.rows[i].subject_id);
    it->second.push_back(i);
  }
  std::vector<FeatureSet> out;
  out.reserve(order.size());
  for (const auto& id : order) out.push_back(gather(id, table, members[id]));
  return out;
}

FeatureSet to_feature_set(const VectorTable& table, std::string id) {
  std::vector<std::size_t> all(table.rows.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return gather(std::move(id), table, all);
}

}  // namespace cobra
