#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "cobra/fid.hpp"
#include "cobra/stats.hpp"

namespace cobra {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "0.1.0";

/// Provenance block embedded in every report a command emits.
class RunManifest {
 public:
  explicit RunManifest(std::string command);

  void set_config(Json config) { config_ = std::move(config); }
  void set_seed(std::uint64_t seed) { seed_ = seed; }
  /// Records the path and SHA-256 of an input file.
  void add_input(const std::filesystem::path& path);
  void add_output(const std::filesystem::path& path);

  /// Stamps the finish time and serializes.
  Json finish();

 private:
  std::string command_;
  Json config_ = Json::object();
  std::optional<std::uint64_t> seed_;
  Json inputs_ = Json::array();
  Json outputs_ = Json::array();
  std::string started_at_;
};

/// ISO-8601 UTC time; SOURCE_DATE_EPOCH, when set, pins it for
/// reproducible output.
std::string utc_timestamp();

Json to_json(const Interval& ci);
Json to_json(const CorrelationReport& report);
Json to_json(const JoinedCorrelation& joined);
Json to_json(const StratifiedCorrelation& stratified);
Json to_json(const PerformanceReport& report);
Json to_json(const FidReport& report);

/// x,density rows of a curve.
std::string format_density(const DensityCurve& curve);

}  // namespace cobra
