#include <pybind11/eigen.h>
#include <pybind11/iostream.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "cobra/cli.hpp"
#include "cobra/fid.hpp"
#include "cobra/scoring.hpp"
#include "cobra/stats.hpp"
#include "cobra/synth.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace cobra;

namespace {

std::vector<ProbabilityRecord> to_records(const std::string& subject_id,
                                          const std::vector<std::vector<double>>& probs) {
  std::vector<ProbabilityRecord> out;
  out.reserve(probs.size());
  for (const auto& p : probs) {
    ProbabilityRecord r;
    r.subject_id = subject_id;
    r.probs = p;
    out.push_back(std::move(r));
  }
  return out;
}

MissingPolicy policy_from(const std::string& name) {
  if (name == "exclude") return MissingPolicy::ExcludeSubject;
  if (name == "error") return MissingPolicy::ErrorOut;
  throw Error(ErrorCode::InvalidArgument, "missing_policy must be 'exclude' or 'error'");
}

py::dict score_dict(const SubjectScore& s) {
  py::dict d;
  d["subject_id"] = s.subject_id;
  d["score"] = s.score ? py::cast(*s.score) : py::none();
  d["n_total"] = s.n_total;
  d["n_relevant"] = s.n_relevant;
  return d;
}

py::dict report_dict(const CorrelationReport& r) {
  return py::dict("rho"_a = r.rho, "n"_a = r.n, "ci_low"_a = r.ci_low, "ci_high"_a = r.ci_high,
                  "ci_method"_a = std::string(to_string(r.ci_method)), "level"_a = r.level);
}

GaussianSummary summary_of(const Eigen::MatrixXd& rows) {
  return summarize(FeatureSet{"", rows, {}});
}

}  // namespace

PYBIND11_MODULE(_cobra, m) {
  m.doc() = "Subject-level confidence-based anomaly scores";

  static py::exception<Error> cobra_error(m, "CobraError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      PyErr_SetString(cobra_error.ptr(), (std::string(to_string(e.code())) + ": " + e.what()).c_str());
    }
  });

  m.def("validate_record", [](const std::vector<double>& p, std::size_t k) {
    return validate_record(p, k);
  }, "probs"_a, "num_classes"_a);
  m.def("predict_class", [](const std::vector<double>& p) { return predict_class(p); }, "probs"_a);
  m.def("confidence", [](const std::vector<double>& p) { return confidence(p); }, "probs"_a);

  m.def(
      "cobra_score",
      [](const std::vector<std::vector<double>>& probs, const std::vector<ClassIndex>& relevant,
         std::size_t num_classes, const std::string& missing_policy, const std::string& subject_id) {
        for (const auto& p : probs) validate_record(p, num_classes);
        SubjectDataset ds{subject_id, to_records(subject_id, probs)};
        return score_dict(cobra_score(ds, {ClassSet(num_classes, relevant), policy_from(missing_policy)}));
      },
      "probs"_a, "relevant"_a, "num_classes"_a, "missing_policy"_a = "exclude",
      "subject_id"_a = "subject");

  m.def(
      "cohort_scores",
      [](const std::vector<std::pair<std::string, std::vector<std::vector<double>>>>& subjects,
         const std::vector<ClassIndex>& relevant, std::size_t num_classes,
         const std::string& missing_policy) {
        std::vector<SubjectDataset> datasets;
        for (const auto& [id, probs] : subjects) {
          for (const auto& p : probs) validate_record(p, num_classes);
          datasets.push_back({id, to_records(id, probs)});
        }
        py::list out;
        for (const auto& s : cohort_scores(datasets, {ClassSet(num_classes, relevant),
                                                      policy_from(missing_policy)})) {
          out.append(score_dict(s));
        }
        return out;
      },
      "subjects"_a, "relevant"_a, "num_classes"_a, "missing_policy"_a = "exclude");

  m.def("pearson", [](const std::vector<double>& x, const std::vector<double>& y) {
    return pearson(x, y);
  }, "x"_a, "y"_a);
  m.def("spearman", [](const std::vector<double>& x, const std::vector<double>& y) {
    return spearman(x, y);
  }, "x"_a, "y"_a);
  m.def("fisher_ci", [](double rho, std::size_t n, double level) {
    const auto ci = fisher_ci(rho, n, level);
    return std::make_pair(ci.low, ci.high);
  }, "rho"_a, "n"_a, "level"_a = 0.95);
  m.def(
      "bootstrap_ci",
      [](const std::vector<double>& x, const std::vector<double>& y, double level,
         std::size_t iters, std::uint64_t seed) {
        if (x.size() != y.size()) throw Error(ErrorCode::LengthMismatch, "x and y differ in length");
        std::vector<ScorePair> pairs;
        for (std::size_t i = 0; i < x.size(); ++i) pairs.push_back({std::to_string(i), x[i], y[i]});
        const auto ci = bootstrap_ci(pairs, level, iters, seed);
        return std::make_pair(ci.low, ci.high);
      },
      "x"_a, "y"_a, "level"_a = 0.95, "iters"_a = 2000, "seed"_a = 42);
  m.def(
      "correlate",
      [](const std::vector<double>& x, const std::vector<double>& y, const std::string& ci,
         double level, std::size_t iters, std::uint64_t seed) {
        if (x.size() != y.size()) throw Error(ErrorCode::LengthMismatch, "x and y differ in length");
        std::vector<ScorePair> pairs;
        for (std::size_t i = 0; i < x.size(); ++i) pairs.push_back({std::to_string(i), x[i], y[i]});
        return report_dict(correlate_pairs(pairs, {parse_ci_method(ci), level, iters, seed}));
      },
      "x"_a, "y"_a, "ci"_a = "fisher", "level"_a = 0.95, "iters"_a = 2000, "seed"_a = 42);

  m.def("silverman_bandwidth", [](const std::vector<double>& v) { return silverman_bandwidth(v); },
        "values"_a);
  m.def(
      "kde",
      [](const std::vector<double>& v, std::optional<double> bandwidth) {
        const auto c = kde(v, bandwidth);
        return py::dict("grid"_a = c.grid, "density"_a = c.density, "bandwidth"_a = c.bandwidth);
      },
      "values"_a, "bandwidth"_a = py::none());

  m.def("matrix_sqrt_psd", &matrix_sqrt_psd, "m"_a);
  m.def(
      "frechet_distance",
      [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
        return frechet_distance(summary_of(a), summary_of(b));
      },
      "features_a"_a, "features_b"_a, "Distance between Gaussians fitted to two (n x D) arrays.");
  m.def(
      "frechet_distance_gaussian",
      [](const Eigen::VectorXd& mu_a, const Eigen::MatrixXd& cov_a, const Eigen::VectorXd& mu_b,
         const Eigen::MatrixXd& cov_b) {
        return frechet_distance({mu_a, cov_a, 0}, {mu_b, cov_b, 0});
      },
      "mu_a"_a, "cov_a"_a, "mu_b"_a, "cov_b"_a);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::vector<std::string> argv{"cobra"};
        argv.insert(argv.end(), args.begin(), args.end());
        std::ostringstream out, err;
        const int code = run_cli(argv, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      "args"_a, "Runs a cobra subcommand; returns (exit_code, stdout, stderr).");
}
