#include "cobra/report.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <sstream>

#include "cobra/io.hpp"
#include "cobra/text.hpp"

namespace cobra {

namespace {

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

std::string utc_timestamp() {
  std::time_t t = 0;
  if (const char* pinned = std::getenv("SOURCE_DATE_EPOCH"); pinned && *pinned) {
    if (const auto v = parse_unsigned(pinned)) t = static_cast<std::time_t>(*v);
  } else {
    t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

RunManifest::RunManifest(std::string command)
    : command_(std::move(command)), started_at_(utc_timestamp()) {}

void RunManifest::add_input(const std::filesystem::path& path) {
  inputs_.push_back({{"path", path.string()}, {"sha256", sha256_file(path)}});
}

void RunManifest::add_output(const std::filesystem::path& path) {
  outputs_.push_back(path.string());
}

Json RunManifest::finish() {
  Json j;
  j["command"] = command_;
  j["tool_version"] = kToolVersion;
  j["seed"] = seed_ ? Json(*seed_) : Json(nullptr);
  j["config"] = config_;
  j["inputs"] = inputs_;
  j["outputs"] = outputs_;
  j["started_at"] = started_at_;
  j["finished_at"] = utc_timestamp();
  return j;
}

Json to_json(const Interval& ci) { return Json::array({ci.low, ci.high}); }

Json to_json(const CorrelationReport& report) {
  return {{"rho", number_or_null(report.rho)},
          {"n", report.n},
          {"ci_low", number_or_null(report.ci_low)},
          {"ci_high", number_or_null(report.ci_high)},
          {"ci_method", std::string(to_string(report.ci_method))},
          {"level", report.level}};
}

Json to_json(const JoinedCorrelation& joined) {
  Json j = to_json(joined.report);
  j["dropped_missing"] = joined.dropped_missing;
  j["dropped_unmatched"] = joined.dropped_unmatched;
  return j;
}

Json to_json(const StratifiedCorrelation& stratified) {
  Json strata = Json::object();
  for (const auto& [name, report] : stratified.strata) strata[name] = to_json(report);
  return {{"pooled", to_json(stratified.pooled)},
          {"strata", std::move(strata)},
          {"skipped", stratified.skipped}};
}

Json to_json(const PerformanceReport& report) {
  return {{"group", report.group},
          {"n", report.n},
          {"accuracy", report.accuracy},
          {"accuracy_ci", to_json(report.accuracy_ci)},
          {"macro_precision", report.macro_precision},
          {"macro_precision_ci", to_json(report.precision_ci)},
          {"never_predicted", report.never_predicted}};
}

Json to_json(const FidReport& report) {
  Json distances = Json::array();
  for (const auto& d : report.distances) {
    distances.push_back(
        {{"subject_id", d.subject_id}, {"distance", d.distance}, {"n_rows", d.n_rows}});
  }
  return {{"distances", std::move(distances)}, {"correlation", to_json(report.correlation)}};
}

std::string format_density(const DensityCurve& curve) {
  std::ostringstream out;
  out << "x,density\n";
  for (std::size_t i = 0; i < curve.grid.size(); ++i) {
    out << format_double(curve.grid[i]) << ',' << format_double(curve.density[i]) << '\n';
  }
  return out.str();
}

}  // namespace cobra
