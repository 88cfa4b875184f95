#include "cobra/config.hpp"

#include <set>

namespace cobra {

namespace {

template <typename T>
void read_key(const Json& j, const char* key, T& target) {
  if (const auto it = j.find(key); it != j.end()) {
    try {
      target = it->get<T>();
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::InvalidArgument,
                  std::string("config key '") + key + "': " + e.what());
    }
  }
}

}  // namespace

SynthConfig synth_config_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "synth config must be a JSON object");
  static const std::set<std::string> known = {
      "num_classes", "input_dim",          "class_means",        "mean_scale",
      "spread",      "degraded_classes",   "class_names",        "groups",
      "points_per_subject", "healthy_subjects", "reference_subjects", "subjects_per_level",
      "severity_grid", "confounder",       "seed"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw Error(ErrorCode::InvalidArgument, "unknown config key '" + key + "'");
  }
  SynthConfig cfg;
  // Custom class counts invalidate the five default names.
  if (j.contains("num_classes") && !j.contains("class_names")) cfg.class_names.clear();
  read_key(j, "num_classes", cfg.num_classes);
  read_key(j, "input_dim", cfg.input_dim);
  read_key(j, "class_means", cfg.class_means);
  read_key(j, "mean_scale", cfg.mean_scale);
  read_key(j, "spread", cfg.spread);
  read_key(j, "degraded_classes", cfg.degraded_classes);
  read_key(j, "class_names", cfg.class_names);
  read_key(j, "groups", cfg.groups);
  read_key(j, "points_per_subject", cfg.points_per_subject);
  read_key(j, "healthy_subjects", cfg.healthy_subjects);
  read_key(j, "reference_subjects", cfg.reference_subjects);
  read_key(j, "subjects_per_level", cfg.subjects_per_level);
  read_key(j, "severity_grid", cfg.severity_grid);
  read_key(j, "seed", cfg.seed);
  if (const auto it = j.find("confounder"); it != j.end() && !it->is_null()) {
    ConfounderConfig c;
    read_key(*it, "shift_magnitude", c.shift_magnitude);
    read_key(*it, "fraction", c.fraction);
    read_key(*it, "direction", c.direction);
    cfg.confounder = c;
  }
  cfg.validate();
  return cfg;
}

Json to_json(const SynthConfig& cfg) {
  Json j;
  j["num_classes"] = cfg.num_classes;
  j["input_dim"] = cfg.input_dim;
  j["class_means"] = cfg.class_means;
  j["mean_scale"] = cfg.mean_scale;
  j["spread"] = cfg.spread;
  j["degraded_classes"] = cfg.degraded_classes;
  j["class_names"] = cfg.class_names;
  j["groups"] = cfg.groups;
  j["points_per_subject"] = cfg.points_per_subject;
  j["healthy_subjects"] = cfg.healthy_subjects;
  j["reference_subjects"] = cfg.reference_subjects;
  j["subjects_per_level"] = cfg.subjects_per_level;
  j["severity_grid"] = cfg.severity_grid;
  if (cfg.confounder) {
    j["confounder"] = {{"shift_magnitude", cfg.confounder->shift_magnitude},
                       {"fraction", cfg.confounder->fraction},
                       {"direction", cfg.confounder->direction}};
  } else {
    j["confounder"] = nullptr;
  }
  j["seed"] = cfg.seed;
  return j;
}

Json to_json(const TrainConfig& cfg) {
  Json j;
  j["learning_rate"] = cfg.learning_rate;
  j["epochs"] = cfg.epochs;
  j["batch_size"] = cfg.batch_size;
  j["seed"] = cfg.seed;
  j["hidden_dim"] = cfg.hidden_dim;
  j["init_scale"] = cfg.init_scale ? Json(*cfg.init_scale) : Json(nullptr);
  return j;
}

}  // namespace cobra
