#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "cobra/core.hpp"
#include "cobra/stats.hpp"
#include "cobra/vectors.hpp"

namespace cobra {

/// Header-keyed CSV table. Accepts LF or CRLF and RFC 4180 quoting.
struct CsvTable {
  std::string source;                      // name used in error messages
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;   // 1-based source line of each row

  /// Column index or npos.
  std::size_t column(std::string_view name) const;
};

CsvTable parse_csv(std::istream& in, std::string source);
CsvTable read_csv(const std::filesystem::path& path);

/// Quotes a field only when it needs it.
std::string csv_escape(std::string_view field);

struct PredictionTable {
  std::size_t num_classes = 0;
  std::vector<ProbabilityRecord> records;
};

/// subject_id,point_id,group,true_label,p_0,...,p_{K-1}
PredictionTable parse_predictions(const CsvTable& csv);
PredictionTable read_predictions(const std::filesystem::path& path);
std::string format_predictions(std::span<const ProbabilityRecord> records);

/// subject_id,clinical_score
AssessmentTable read_assessments(const std::filesystem::path& path,
                                 std::string score_name = "clinical_score",
                                 int orientation = +1);
std::string format_assessments(const AssessmentTable& table);

/// subject_id,stratum
std::unordered_map<std::string, std::string> read_strata(const std::filesystem::path& path);
std::string format_strata(const std::unordered_map<std::string, std::string>& strata,
                          std::span<const std::string> order);

/// subject_id[,point_id][,group][,label][,predicted],f_0,...,f_{D-1}
VectorTable parse_vectors(const CsvTable& csv);
VectorTable read_vectors(const std::filesystem::path& path);
std::string format_vectors(const VectorTable& table);

/// subject_id[,group],score,n_total,n_relevant with "NA" for MISSING.
struct ScoreRow {
  std::optional<std::string> group;
  SubjectScore score;
};
std::vector<ScoreRow> read_scores(const std::filesystem::path& path);
std::string format_scores(std::span<const ScoreRow> rows, bool with_group);

/// x,y scatter pairs.
std::string format_pairs(std::span<const ScorePair> pairs, std::string_view x_name,
                         std::string_view y_name);

/// Writes via a sibling temp file and rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

/// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace cobra
