#include "cobra/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"

#include "cobra/config.hpp"
#include "cobra/fid.hpp"
#include "cobra/io.hpp"
#include "cobra/refmodel.hpp"
#include "cobra/report.hpp"
#include "cobra/scoring.hpp"
#include "cobra/stats.hpp"
#include "cobra/synth.hpp"
#include "cobra/text.hpp"

namespace cobra {

namespace fs = std::filesystem;

int exit_code_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::EmptyRelevantSubset:
      return kExitPolicyError;
    case ErrorCode::LengthMismatch:
    case ErrorCode::DegenerateVariance:
    case ErrorCode::RhoOutOfRange:
    case ErrorCode::TooFewPairs:
    case ErrorCode::TooManyDegenerateResamples:
    case ErrorCode::InsufficientOverlap:
    case ErrorCode::DegenerateData:
    case ErrorCode::TooFewRows:
      return kExitStatisticalError;
    default:
      return kExitInputError;
  }
}

namespace {

constexpr std::uint64_t kFallbackSeed = 42;
constexpr std::size_t kHistogramBins = 20;

std::uint64_t default_seed() {
  if (const char* env = std::getenv("COBRA_SEED"); env && *env) {
    if (const auto v = parse_unsigned(env)) return *v;
  }
  return kFallbackSeed;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto t = trim(item);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

/// Indices are authoritative; names resolve through `names` when given.
std::vector<ClassIndex> parse_class_list(const std::string& text,
                                         const std::vector<std::string>& names) {
  std::vector<ClassIndex> out;
  for (const auto& token : split_list(text)) {
    if (const auto idx = parse_unsigned(token)) {
      out.push_back(static_cast<ClassIndex>(*idx));
      continue;
    }
    const auto it = std::find(names.begin(), names.end(), token);
    if (it == names.end()) {
      throw Error(ErrorCode::InvalidArgument, "unknown class '" + token + "'");
    }
    out.push_back(static_cast<ClassIndex>(it - names.begin()));
  }
  return out;
}

ClassSet make_class_set(const std::string& relevant, const std::string& class_names,
                        std::size_t num_classes) {
  auto names = split_list(class_names);
  if (relevant.empty()) return ClassSet::all(num_classes, std::move(names));
  auto list = parse_class_list(relevant, names);
  return ClassSet(num_classes, std::move(list), std::move(names));
}

MissingPolicy parse_policy(const std::string& text) {
  if (text == "exclude") return MissingPolicy::ExcludeSubject;
  if (text == "error") return MissingPolicy::ErrorOut;
  throw Error(ErrorCode::InvalidArgument, "missing policy must be exclude|error");
}

fs::path sibling(const fs::path& path, const std::string& suffix) {
  fs::path out = path;
  out.replace_filename(path.stem().string() + suffix);
  return out;
}

void write_json(const fs::path& path, const Json& j) {
  write_file_atomic(path, j.dump(2) + "\n");
}

Json class_set_json(const ClassSet& cs) {
  return {{"num_classes", cs.num_classes()},
          {"relevant", cs.relevant()},
          {"class_names", cs.class_names()}};
}

Json scores_summary(std::span<const SubjectScore> scores, std::ostream& err) {
  Json missing = Json::array();
  for (const auto& s : scores) {
    if (s.missing()) {
      missing.push_back(s.subject_id);
      err << "warning: subject " << s.subject_id
          << " has no datapoints predicted in a relevant class; score is MISSING\n";
    }
  }
  return {{"subjects", scores.size()}, {"missing", std::move(missing)}};
}

// ---------------------------------------------------------------------------
// score

struct ScoreArgs {
  fs::path predictions;
  std::string relevant;
  std::string class_names;
  bool by_group = false;
  std::string missing_policy = "exclude";
  fs::path out;
  fs::path report;
};

int cmd_score(const ScoreArgs& a, std::ostream& out, std::ostream& err) {
  RunManifest manifest("score");
  const auto table = read_predictions(a.predictions);
  manifest.add_input(a.predictions);
  ScoreConfig cfg{make_class_set(a.relevant, a.class_names, table.num_classes),
                  parse_policy(a.missing_policy)};
  manifest.set_config({{"classes", class_set_json(cfg.class_set)},
                       {"by_group", a.by_group},
                       {"missing_policy", a.missing_policy}});

  const auto datasets = partition_by_subject(table.records);
  std::vector<ScoreRow> rows;
  std::vector<SubjectScore> flat;
  if (a.by_group) {
    for (auto& [group, scores] : cobra_by_group(datasets, cfg)) {
      for (auto& s : scores) {
        flat.push_back(s);
        rows.push_back({group, std::move(s)});
      }
    }
  } else {
    flat = cohort_scores(datasets, cfg);
    for (const auto& s : flat) rows.push_back({std::nullopt, s});
  }

  write_file_atomic(a.out, format_scores(rows, a.by_group));
  manifest.add_output(a.out);
  const fs::path report_path = a.report.empty() ? sibling(a.out, "_report.json") : a.report;
  Json report;
  report["summary"] = scores_summary(flat, err);
  report["manifest"] = manifest.finish();
  write_json(report_path, report);
  out << "scored " << datasets.size() << " subjects -> " << a.out.string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// correlate

struct CorrelateArgs {
  fs::path scores;
  fs::path assessments;
  fs::path strata;
  std::string ci = "fisher";
  double level = 0.95;
  std::size_t iters = 2000;
  std::uint64_t seed = 0;
  int orientation = +1;
  fs::path out;
  fs::path pairs;
};

int cmd_correlate(const CorrelateArgs& a, std::ostream& out, std::ostream& err) {
  RunManifest manifest("correlate");
  const auto rows = read_scores(a.scores);
  manifest.add_input(a.scores);
  const auto assessments = read_assessments(a.assessments, "", a.orientation);
  manifest.add_input(a.assessments);
  const CiOptions opts{parse_ci_method(a.ci), a.level, a.iters, a.seed};
  manifest.set_seed(a.seed);
  manifest.set_config({{"ci", a.ci},
                       {"level", a.level},
                       {"bootstrap_iters", a.iters},
                       {"orientation", a.orientation}});

  std::map<std::string, std::vector<SubjectScore>> by_group;
  std::vector<SubjectScore> ungrouped;
  for (const auto& r : rows) {
    if (r.group) {
      by_group[*r.group].push_back(r.score);
    } else {
      ungrouped.push_back(r.score);
    }
  }

  Json report;
  const fs::path pairs_path = a.pairs.empty() ? sibling(a.out, "_pairs.csv") : a.pairs;
  if (!ungrouped.empty()) {
    const auto joined = correlate_scores(ungrouped, assessments, opts);
    if (joined.dropped_missing > 0) {
      err << "warning: dropped " << joined.dropped_missing << " subjects with MISSING scores\n";
    }
    report["correlation"] = to_json(joined);
    if (!a.strata.empty()) {
      const auto strata = read_strata(a.strata);
      manifest.add_input(a.strata);
      report["stratified"] = to_json(stratified_correlation(joined.pairs, strata, opts));
    }
    write_file_atomic(pairs_path, format_pairs(joined.pairs, "score", assessments.score_name()));
    manifest.add_output(pairs_path);
    out << "rho = " << joined.report.rho << " [" << joined.report.ci_low << ", "
        << joined.report.ci_high << "], n = " << joined.report.n << "\n";
  }
  if (!by_group.empty()) {
    Json groups = Json::object();
    for (const auto& [group, scores] : by_group) {
      try {
        groups[group] = to_json(correlate_scores(scores, assessments, opts));
      } catch (const Error& e) {
        err << "warning: group " << group << " skipped: " << e.what() << "\n";
        groups[group] = {{"skipped", e.what()}};
      }
    }
    report["groups"] = std::move(groups);
  }
  manifest.add_output(a.out);
  report["manifest"] = manifest.finish();
  write_json(a.out, report);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// fid

struct FidArgs {
  fs::path reference;
  fs::path subjects;
  fs::path assessments;
  std::string relevant;
  std::string class_names;
  std::string ci = "fisher";
  double level = 0.95;
  std::size_t iters = 2000;
  std::uint64_t seed = 0;
  int orientation = +1;
  fs::path out;
  fs::path distances;
};

int cmd_fid(const FidArgs& a, std::ostream& out, std::ostream&) {
  RunManifest manifest("fid");
  const auto ref_table = read_vectors(a.reference);
  manifest.add_input(a.reference);
  const auto subj_table = read_vectors(a.subjects);
  manifest.add_input(a.subjects);
  const auto assessments = read_assessments(a.assessments, "", a.orientation);
  manifest.add_input(a.assessments);
  if (ref_table.dim != subj_table.dim) {
    throw Error(ErrorCode::DimensionMismatch, "reference and subject features differ in dimension");
  }
  const CiOptions opts{parse_ci_method(a.ci), a.level, a.iters, a.seed};
  manifest.set_seed(a.seed);

  FeatureSet reference = to_feature_set(ref_table, kReferenceId);
  std::vector<FeatureSet> subjects = to_feature_sets(subj_table);
  Json config = {{"ci", a.ci}, {"level", a.level}, {"orientation", a.orientation}};
  if (!a.relevant.empty()) {
    std::size_t num_classes = 0;
    for (const auto& r : ref_table.rows) num_classes = std::max(num_classes, r.predicted.value_or(0) + 1);
    for (const auto& r : subj_table.rows) num_classes = std::max(num_classes, r.predicted.value_or(0) + 1);
    const auto names = split_list(a.class_names);
    if (!names.empty()) num_classes = names.size();
    const ClassSet classes = make_class_set(a.relevant, a.class_names, std::max<std::size_t>(num_classes, 2));
    reference = restrict_to_classes(reference, classes);
    for (auto& s : subjects) s = restrict_to_classes(s, classes);
    config["classes"] = class_set_json(classes);
  }
  manifest.set_config(config);

  FidReport fid;
  fid.distances = subject_distances(reference, subjects);
  const fs::path dist_path = a.distances.empty() ? sibling(a.out, "_distances.csv") : a.distances;
  std::ostringstream csv;
  csv << "subject_id,distance,n_rows\n";
  for (const auto& d : fid.distances) {
    csv << csv_escape(d.subject_id) << ',' << format_double(d.distance) << ',' << d.n_rows << '\n';
  }
  write_file_atomic(dist_path, csv.str());
  manifest.add_output(dist_path);
  out << "fid: " << fid.distances.size() << " subjects -> " << dist_path.string() << "\n";

  fid.correlation = correlate_distances(fid.distances, assessments, opts);
  manifest.add_output(a.out);
  Json report = to_json(fid);
  report["manifest"] = manifest.finish();
  write_json(a.out, report);
  out << "rho = " << fid.correlation.report.rho << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  fs::path config;
  fs::path out_dir;
  std::optional<std::uint64_t> seed;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream&) {
  RunManifest manifest("simulate");
  SynthConfig cfg;
  if (!a.config.empty()) {
    Json j;
    try {
      j = Json::parse(read_file(a.config));
    } catch (const Json::parse_error& e) {
      throw Error(ErrorCode::ParseError, a.config.string() + ": " + e.what());
    }
    cfg = synth_config_from_json(j);
    manifest.add_input(a.config);
  } else if (const char* env = std::getenv("COBRA_SEED"); env && *env) {
    cfg.seed = default_seed();
  }
  if (a.seed) cfg.seed = *a.seed;
  manifest.set_seed(cfg.seed);
  manifest.set_config(to_json(cfg));

  const SynthCohort cohort = generate_cohort(cfg);
  const VectorTable test = cohort.test_table(cfg.input_dim);
  const std::vector<std::pair<std::string, std::string>> files = {
      {"healthy.csv", format_vectors(cohort.healthy)},
      {"reference.csv", format_vectors(cohort.reference)},
      {"test.csv", format_vectors(test)},
      {"assessments.csv", format_assessments(cohort.assessments)},
      {"strata.csv", format_strata(cohort.strata, cohort.strata_order)},
      {"config.json", to_json(cfg).dump(2) + "\n"},
  };
  for (const auto& [name, content] : files) {
    write_file_atomic(a.out_dir / name, content);
    manifest.add_output(a.out_dir / name);
  }
  Json m;
  m["counts"] = {{"healthy_rows", cohort.healthy.rows.size()},
                 {"reference_rows", cohort.reference.rows.size()},
                 {"test_subjects", cohort.test.size()},
                 {"test_rows", test.rows.size()}};
  m["manifest"] = manifest.finish();
  write_json(a.out_dir / "manifest.json", m);
  out << "simulated " << cohort.test.size() << " test subjects -> " << a.out_dir.string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// train / predict

struct TrainArgs {
  fs::path data;
  fs::path out;
  fs::path report;
  std::size_t num_classes = 0;
  TrainConfig cfg;
};

int cmd_train(TrainArgs a, std::ostream& out, std::ostream&) {
  RunManifest manifest("train");
  const VectorTable data = read_vectors(a.data);
  manifest.add_input(a.data);
  if (!data.has_labels()) {
    throw Error(ErrorCode::MissingLabels, a.data.string() + ": training data needs a label column");
  }
  if (a.num_classes == 0) {
    for (const auto& r : data.rows) a.num_classes = std::max(a.num_classes, *r.label + 1);
  }
  manifest.set_seed(a.cfg.seed);
  Json config = to_json(a.cfg);
  config["num_classes"] = a.num_classes;
  manifest.set_config(config);

  const TrainResult result = train_with_history(data, a.num_classes, a.cfg);
  std::ostringstream ckpt;
  write_checkpoint(ckpt, result.model);
  write_file_atomic(a.out, ckpt.str());
  manifest.add_output(a.out);

  const Predictions pred = predict_dataset(result.model, data);
  std::size_t correct = 0;
  for (const auto& rec : pred.records) correct += predict_class(rec.probs) == *rec.true_label;
  const double accuracy = static_cast<double>(correct) / static_cast<double>(pred.records.size());

  Json report;
  report["initial_loss"] = result.initial_loss;
  report["final_loss"] = result.final_loss;
  report["steps"] = result.step_losses.size();
  report["training_accuracy"] = accuracy;
  report["manifest"] = manifest.finish();
  write_json(a.report.empty() ? sibling(a.out, "_report.json") : a.report, report);
  out << "trained: loss " << result.initial_loss << " -> " << result.final_loss
      << ", training accuracy " << accuracy << "\n";
  return kExitOk;
}

struct PredictArgs {
  fs::path model;
  fs::path data;
  fs::path out;
  fs::path features;
  fs::path report;
};

int cmd_predict(const PredictArgs& a, std::ostream& out, std::ostream&) {
  RunManifest manifest("predict");
  RefModel model;
  {
    std::ifstream in(a.model, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + a.model.string());
    try {
      model = read_checkpoint(in);
    } catch (const Error& e) {
      throw Error(e.code(), a.model.string() + ": " + e.what());
    }
  }
  manifest.add_input(a.model);
  const VectorTable data = read_vectors(a.data);
  manifest.add_input(a.data);

  const Predictions pred = predict_dataset(model, data);
  write_file_atomic(a.out, format_predictions(pred.records));
  manifest.add_output(a.out);
  if (!a.features.empty()) {
    write_file_atomic(a.features, format_vectors(pred.features));
    manifest.add_output(a.features);
  }
  Json report;
  report["rows"] = pred.records.size();
  if (data.has_labels()) {
    std::size_t correct = 0;
    for (const auto& rec : pred.records) correct += predict_class(rec.probs) == *rec.true_label;
    report["accuracy"] = static_cast<double>(correct) / static_cast<double>(pred.records.size());
  }
  report["manifest"] = manifest.finish();
  write_json(a.report.empty() ? sibling(a.out, "_report.json") : a.report, report);
  out << "predicted " << pred.records.size() << " rows -> " << a.out.string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// report

struct ReportArgs {
  fs::path predictions;
  fs::path assessments;
  fs::path strata;
  std::string relevant;
  std::string class_names;
  std::string ci = "fisher";
  double level = 0.95;
  std::size_t iters = 2000;
  std::uint64_t seed = 0;
  int orientation = +1;
  fs::path out_dir;
};

Json correlation_row(const std::string& label, std::span<const SubjectScore> scores,
                     const AssessmentTable& assessments, const CiOptions& opts,
                     std::ostringstream& csv, std::ostream& err) {
  try {
    const auto joined = correlate_scores(scores, assessments, opts);
    const auto& r = joined.report;
    csv << csv_escape(label) << ',' << format_double(r.rho) << ',' << r.n << ','
        << format_double(r.ci_low) << ',' << format_double(r.ci_high) << '\n';
    return to_json(joined);
  } catch (const Error& e) {
    err << "warning: " << label << ": " << e.what() << "\n";
    csv << csv_escape(label) << ",NA,0,NA,NA\n";
    return {{"skipped", e.what()}};
  }
}

int cmd_report(const ReportArgs& a, std::ostream& out, std::ostream& err) {
  RunManifest manifest("report");
  const auto table = read_predictions(a.predictions);
  manifest.add_input(a.predictions);
  const auto assessments = read_assessments(a.assessments, "", a.orientation);
  manifest.add_input(a.assessments);
  const ClassSet relevant = make_class_set(a.relevant, a.class_names, table.num_classes);
  const CiOptions opts{parse_ci_method(a.ci), a.level, a.iters, a.seed};
  manifest.set_seed(a.seed);
  manifest.set_config({{"classes", class_set_json(relevant)},
                       {"ci", a.ci},
                       {"level", a.level},
                       {"orientation", a.orientation}});

  auto emit = [&](const std::string& name, const std::string& content) {
    write_file_atomic(a.out_dir / name, content);
    manifest.add_output(a.out_dir / name);
  };

  const auto datasets = partition_by_subject(table.records);
  const ScoreConfig cfg{relevant, MissingPolicy::ExcludeSubject};
  const auto scores = cohort_scores(datasets, cfg);
  Json report;
  report["summary"] = scores_summary(scores, err);
  {
    std::vector<ScoreRow> rows;
    for (const auto& s : scores) rows.push_back({std::nullopt, s});
    emit("scores.csv", format_scores(rows, false));
  }

  // Relevant vs non-relevant vs all classes.
  std::ostringstream contrast_csv;
  contrast_csv << "classes,rho,n,ci_low,ci_high\n";
  Json contrast = Json::object();
  contrast["relevant"] = correlation_row("relevant", scores, assessments, opts, contrast_csv, err);
  if (relevant.relevant().size() < relevant.num_classes()) {
    const auto other = cohort_scores(datasets, {relevant.complement()});
    contrast["non_relevant"] =
        correlation_row("non_relevant", other, assessments, opts, contrast_csv, err);
  }
  const auto all_scores = cohort_scores(datasets, {ClassSet::all(table.num_classes)});
  contrast["all"] = correlation_row("all", all_scores, assessments, opts, contrast_csv, err);
  report["relevance_contrast"] = std::move(contrast);
  emit("relevance_contrast.csv", contrast_csv.str());

  // Scatter pairs for the relevant-class score.
  try {
    const auto joined = correlate_scores(scores, assessments, opts);
    emit("scatter.csv", format_pairs(joined.pairs, "score", assessments.score_name()));
    if (!a.strata.empty()) {
      const auto strata = read_strata(a.strata);
      manifest.add_input(a.strata);
      report["stratified"] = to_json(stratified_correlation(joined.pairs, strata, opts));
    }
  } catch (const Error& e) {
    err << "warning: scatter skipped: " << e.what() << "\n";
  }

  // Per-group correlations.
  std::ostringstream group_csv;
  group_csv << "group,rho,n,ci_low,ci_high\n";
  Json groups = Json::object();
  for (const auto& [group, group_scores] : cobra_by_group(datasets, cfg)) {
    groups[group] = correlation_row(group, group_scores, assessments, opts, group_csv, err);
  }
  report["groups"] = std::move(groups);
  emit("group_correlations.csv", group_csv.str());

  // Confidence distributions per clinical level.
  std::map<double, std::vector<double>> by_level;
  for (const auto& ds : datasets) {
    const auto clinical = assessments.find(ds.subject_id);
    if (!clinical) continue;
    for (const auto& rec : ds.records) {
      if (relevant.is_relevant(predict_class(rec.probs))) {
        by_level[*clinical].push_back(confidence(rec.probs));
      }
    }
  }
  std::ostringstream hist;
  hist << "level,bin_low,bin_high,count\n";
  Json densities = Json::array();
  for (const auto& [level, values] : by_level) {
    std::vector<std::size_t> counts(kHistogramBins, 0);
    for (double v : values) {
      const auto bin = std::min(kHistogramBins - 1,
                                static_cast<std::size_t>(v * static_cast<double>(kHistogramBins)));
      ++counts[bin];
    }
    for (std::size_t b = 0; b < kHistogramBins; ++b) {
      hist << format_double(level) << ',' << format_double(static_cast<double>(b) / kHistogramBins)
           << ',' << format_double(static_cast<double>(b + 1) / kHistogramBins) << ','
           << counts[b] << '\n';
    }
    try {
      const DensityCurve curve = kde(values);
      const std::string name = "density_level_" + format_double(level) + ".csv";
      emit(name, format_density(curve));
      densities.push_back({{"level", level},
                           {"file", name},
                           {"n", values.size()},
                           {"bandwidth", curve.bandwidth},
                           {"integral", trapezoid(curve.grid, curve.density)}});
    } catch (const Error& e) {
      err << "warning: density for level " << level << " skipped: " << e.what() << "\n";
    }
  }
  emit("confidence_histogram.csv", hist.str());
  {
    std::vector<double> present;
    for (const auto& s : scores) {
      if (s.score) present.push_back(*s.score);
    }
    try {
      const DensityCurve curve = kde(present);
      emit("density_scores.csv", format_density(curve));
      densities.push_back({{"level", "subject_scores"},
                           {"file", "density_scores.csv"},
                           {"n", present.size()},
                           {"bandwidth", curve.bandwidth},
                           {"integral", trapezoid(curve.grid, curve.density)}});
    } catch (const Error& e) {
      err << "warning: score density skipped: " << e.what() << "\n";
    }
  }
  report["densities"] = std::move(densities);

  // Classifier performance when labels are present.
  const bool labelled = std::all_of(table.records.begin(), table.records.end(),
                                    [](const ProbabilityRecord& r) { return r.true_label.has_value(); });
  if (labelled && !table.records.empty()) {
    Json perf;
    PerformanceOptions popts;
    popts.seed = a.seed;
    popts.level = a.level;
    auto dump = [](const std::vector<PerformanceReport>& reports) {
      Json arr = Json::array();
      for (const auto& r : reports) arr.push_back(to_json(r));
      return arr;
    };
    perf["overall"] = dump(performance_metrics(table.records, popts));
    popts.grouping = PerformanceGrouping::Group;
    perf["by_group"] = dump(performance_metrics(table.records, popts));
    popts.grouping = PerformanceGrouping::CohortLabel;
    for (const auto& e : assessments.entries()) {
      popts.cohort_labels[e.subject_id] = format_double(e.value);
    }
    perf["by_clinical_level"] = dump(performance_metrics(table.records, popts));
    popts.grouping = PerformanceGrouping::None;
    popts.restrict_to = relevant;
    perf["relevant_predictions"] = dump(performance_metrics(table.records, popts));
    report["performance"] = std::move(perf);
  }

  manifest.add_output(a.out_dir / "report.json");
  report["manifest"] = manifest.finish();
  write_json(a.out_dir / "report.json", report);
  out << "report -> " << (a.out_dir / "report.json").string() << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Confidence-based subject-level anomaly scoring", "cobra"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));
  const std::uint64_t seed = default_seed();

  ScoreArgs score;
  auto* score_cmd = app.add_subcommand("score", "Per-subject scores from a predictions file");
  score_cmd->add_option("predictions", score.predictions, "Predictions CSV")->required();
  score_cmd->add_option("--relevant", score.relevant, "Relevant classes (indices or names)");
  score_cmd->add_option("--class-names", score.class_names, "Comma-separated class names");
  score_cmd->add_flag("--by-group", score.by_group, "Score each group separately");
  score_cmd->add_option("--missing-policy", score.missing_policy, "exclude|error")
      ->check(CLI::IsMember({"exclude", "error"}));
  score_cmd->add_option("-o,--out", score.out, "Scores CSV")->required();
  score_cmd->add_option("--report", score.report, "Report JSON");

  CorrelateArgs corr;
  corr.seed = seed;
  auto* corr_cmd = app.add_subcommand("correlate", "Correlate scores with clinical assessments");
  corr_cmd->add_option("scores", corr.scores, "Scores CSV")->required();
  corr_cmd->add_option("assessments", corr.assessments, "Assessments CSV")->required();
  corr_cmd->add_option("--strata", corr.strata, "Strata CSV");
  corr_cmd->add_option("--ci", corr.ci, "fisher|bootstrap")->check(CLI::IsMember({"fisher", "bootstrap"}));
  corr_cmd->add_option("--level", corr.level, "Confidence level");
  corr_cmd->add_option("--iters", corr.iters, "Bootstrap iterations");
  corr_cmd->add_option("--seed", corr.seed, "Bootstrap seed");
  corr_cmd->add_option("--orientation", corr.orientation, "+1 higher=healthier, -1 higher=severe");
  corr_cmd->add_option("-o,--out", corr.out, "Report JSON")->required();
  corr_cmd->add_option("--pairs", corr.pairs, "Scatter pairs CSV");

  FidArgs fid;
  fid.seed = seed;
  auto* fid_cmd = app.add_subcommand("fid", "Frechet distance of subjects to a reference population");
  fid_cmd->add_option("--reference", fid.reference, "Reference features CSV")->required();
  fid_cmd->add_option("--subjects", fid.subjects, "Subject features CSV")->required();
  fid_cmd->add_option("--assessments", fid.assessments, "Assessments CSV")->required();
  fid_cmd->add_option("--relevant", fid.relevant, "Restrict to rows predicted in these classes");
  fid_cmd->add_option("--class-names", fid.class_names, "Comma-separated class names");
  fid_cmd->add_option("--ci", fid.ci, "fisher|bootstrap")->check(CLI::IsMember({"fisher", "bootstrap"}));
  fid_cmd->add_option("--level", fid.level, "Confidence level");
  fid_cmd->add_option("--iters", fid.iters, "Bootstrap iterations");
  fid_cmd->add_option("--seed", fid.seed, "Bootstrap seed");
  fid_cmd->add_option("--orientation", fid.orientation, "+1 higher=healthier, -1 higher=severe");
  fid_cmd->add_option("-o,--out", fid.out, "Report JSON")->required();
  fid_cmd->add_option("--distances", fid.distances, "Distances CSV");

  SimulateArgs sim;
  std::uint64_t sim_seed = 0;
  auto* sim_cmd = app.add_subcommand("simulate", "Generate a synthetic cohort");
  sim_cmd->add_option("--config", sim.config, "Synth config JSON");
  sim_cmd->add_option("-o,--out-dir", sim.out_dir, "Output directory")->required();
  auto* sim_seed_opt = sim_cmd->add_option("--seed", sim_seed, "Override the config seed");

  TrainArgs tr;
  tr.cfg.seed = seed;
  auto* tr_cmd = app.add_subcommand("train", "Train the reference classifier");
  tr_cmd->add_option("data", tr.data, "Labelled vectors CSV")->required();
  tr_cmd->add_option("-o,--out", tr.out, "Checkpoint path")->required();
  tr_cmd->add_option("--report", tr.report, "Report JSON");
  tr_cmd->add_option("--num-classes", tr.num_classes, "Class count (default: max label + 1)");
  tr_cmd->add_option("--hidden", tr.cfg.hidden_dim, "Hidden units");
  tr_cmd->add_option("--epochs", tr.cfg.epochs, "Epochs");
  tr_cmd->add_option("--lr", tr.cfg.learning_rate, "Learning rate");
  tr_cmd->add_option("--batch-size", tr.cfg.batch_size, "Mini-batch size");
  tr_cmd->add_option("--seed", tr.cfg.seed, "Seed");

  PredictArgs pr;
  auto* pr_cmd = app.add_subcommand("predict", "Apply a trained classifier");
  pr_cmd->add_option("--model", pr.model, "Checkpoint path")->required();
  pr_cmd->add_option("data", pr.data, "Vectors CSV")->required();
  pr_cmd->add_option("-o,--out", pr.out, "Predictions CSV")->required();
  pr_cmd->add_option("--features", pr.features, "Hidden-layer features CSV");
  pr_cmd->add_option("--report", pr.report, "Report JSON");

  ReportArgs rep;
  rep.seed = seed;
  auto* rep_cmd = app.add_subcommand("report", "Consolidated report and plot-data bundle");
  rep_cmd->add_option("predictions", rep.predictions, "Predictions CSV")->required();
  rep_cmd->add_option("assessments", rep.assessments, "Assessments CSV")->required();
  rep_cmd->add_option("--strata", rep.strata, "Strata CSV");
  rep_cmd->add_option("--relevant", rep.relevant, "Relevant classes (indices or names)");
  rep_cmd->add_option("--class-names", rep.class_names, "Comma-separated class names");
  rep_cmd->add_option("--ci", rep.ci, "fisher|bootstrap")->check(CLI::IsMember({"fisher", "bootstrap"}));
  rep_cmd->add_option("--level", rep.level, "Confidence level");
  rep_cmd->add_option("--iters", rep.iters, "Bootstrap iterations");
  rep_cmd->add_option("--seed", rep.seed, "Seed for bootstrap intervals");
  rep_cmd->add_option("--orientation", rep.orientation, "+1 higher=healthier, -1 higher=severe");
  rep_cmd->add_option("-o,--out-dir", rep.out_dir, "Output directory")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (*score_cmd) return cmd_score(score, out, err);
    if (*corr_cmd) return cmd_correlate(corr, out, err);
    if (*fid_cmd) return cmd_fid(fid, out, err);
    if (*sim_cmd) {
      if (*sim_seed_opt) sim.seed = sim_seed;
      return cmd_simulate(sim, out, err);
    }
    if (*tr_cmd) return cmd_train(tr, out, err);
    if (*pr_cmd) return cmd_predict(pr, out, err);
    if (*rep_cmd) return cmd_report(rep, out, err);
  } catch (const Error& e) {
    err << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}

}  // namespace cobra
