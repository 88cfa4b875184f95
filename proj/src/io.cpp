#include "cobra/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include <openssl/evp.h>

#include "cobra/text.hpp"

namespace cobra {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void parse_fail(const CsvTable& csv, std::size_t row, const std::string& msg,
                             ErrorCode code = ErrorCode::ParseError) {
  std::ostringstream out;
  out << csv.source << ":" << csv.line_numbers[row] << ": " << msg;
  throw Error(code, out.str());
}

[[noreturn]] void header_fail(const CsvTable& csv, const std::string& msg) {
  throw Error(ErrorCode::ParseError, csv.source + ":1: " + msg);
}

std::vector<std::string> split_line(std::string_view line, const std::string& source,
                                    std::size_t line_no) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  if (quoted) {
    throw Error(ErrorCode::ParseError,
                source + ":" + std::to_string(line_no) + ": unterminated quoted field");
  }
  fields.push_back(std::move(field));
  return fields;
}

double require_double(const CsvTable& csv, std::size_t row, std::size_t col) {
  const auto v = parse_double(csv.rows[row][col]);
  if (!v || !std::isfinite(*v)) {
    parse_fail(csv, row, "column '" + csv.header[col] + "': '" + csv.rows[row][col] +
                             "' is not a finite number");
  }
  return *v;
}

std::optional<std::string> optional_field(const CsvTable& csv, std::size_t row, std::size_t col) {
  if (col == std::string::npos || csv.rows[row][col].empty()) return std::nullopt;
  return csv.rows[row][col];
}

std::optional<ClassIndex> optional_index(const CsvTable& csv, std::size_t row, std::size_t col) {
  if (col == std::string::npos || trim(csv.rows[row][col]).empty()) return std::nullopt;
  const auto v = parse_unsigned(csv.rows[row][col]);
  if (!v) {
    parse_fail(csv, row, "column '" + csv.header[col] + "': '" + csv.rows[row][col] +
                             "' is not a class index");
  }
  return static_cast<ClassIndex>(*v);
}

// Collects prefix_0 .. prefix_{n-1}; all must be present and contiguous.
std::vector<std::size_t> indexed_columns(const CsvTable& csv, std::string_view prefix) {
  std::map<std::size_t, std::size_t> found;
  for (std::size_t c = 0; c < csv.header.size(); ++c) {
    std::string_view name = csv.header[c];
    if (name.size() > prefix.size() && name.substr(0, prefix.size()) == prefix) {
      if (auto idx = parse_unsigned(name.substr(prefix.size()))) {
        if (!found.emplace(static_cast<std::size_t>(*idx), c).second) {
          header_fail(csv, "duplicate column " + std::string(name));
        }
      }
    }
  }
  std::vector<std::size_t> cols;
  for (const auto& [idx, col] : found) {
    if (idx != cols.size()) {
      header_fail(csv, "columns " + std::string(prefix) + "* are not numbered 0..n-1");
    }
    cols.push_back(col);
  }
  return cols;
}

std::string format_optional_index(const std::optional<ClassIndex>& v) {
  return v ? std::to_string(*v) : std::string();
}

}  // namespace

std::size_t CsvTable::column(std::string_view name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  return it == header.end() ? std::string::npos : static_cast<std::size_t>(it - header.begin());
}

CsvTable parse_csv(std::istream& in, std::string source) {
  CsvTable csv;
  csv.source = std::move(source);
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    auto fields = split_line(line, csv.source, line_no);
    if (!have_header) {
      for (auto& f : fields) f = std::string(trim(f));
      csv.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != csv.header.size()) {
      std::ostringstream msg;
      msg << csv.source << ":" << line_no << ": expected " << csv.header.size()
          << " fields, found " << fields.size();
      throw Error(ErrorCode::ParseError, msg.str());
    }
    csv.rows.push_back(std::move(fields));
    csv.line_numbers.push_back(line_no);
  }
  if (!have_header) throw Error(ErrorCode::ParseError, csv.source + ": empty file");
  return csv;
}

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return parse_csv(in, path.string());
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

PredictionTable parse_predictions(const CsvTable& csv) {
  static const std::vector<std::string> fixed = {"subject_id", "point_id", "group", "true_label"};
  if (csv.header.size() < fixed.size() + 2 ||
      !std::equal(fixed.begin(), fixed.end(), csv.header.begin())) {
    header_fail(csv, "predictions header must start with subject_id,point_id,group,true_label "
                     "followed by p_0..p_{K-1}");
  }
  const auto prob_cols = indexed_columns(csv, "p_");
  const std::size_t num_classes = csv.header.size() - fixed.size();
  if (prob_cols.size() != num_classes) {
    header_fail(csv, "every column after true_label must be a p_<k> column");
  }
  for (std::size_t k = 0; k < num_classes; ++k) {
    if (prob_cols[k] != fixed.size() + k) header_fail(csv, "p_<k> columns must be in order");
  }

  PredictionTable table;
  table.num_classes = num_classes;
  table.records.reserve(csv.rows.size());
  std::vector<double> raw(num_classes);
  for (std::size_t r = 0; r < csv.rows.size(); ++r) {
    const auto& row = csv.rows[r];
    if (row[0].empty()) parse_fail(csv, r, "empty subject_id");
    for (std::size_t k = 0; k < num_classes; ++k) raw[k] = require_double(csv, r, fixed.size() + k);
    ProbabilityRecord rec;
    rec.subject_id = row[0];
    rec.point_id = row[1];
    rec.group = optional_field(csv, r, 2);
    rec.true_label = optional_index(csv, r, 3);
    if (rec.true_label && *rec.true_label >= num_classes) {
      parse_fail(csv, r, "true_label outside [0, K)", ErrorCode::LabelOutOfRange);
    }
    try {
      rec.probs = validate_record(raw, num_classes);
    } catch (const Error& e) {
      parse_fail(csv, r, e.what(), e.code());
    }
    table.records.push_back(std::move(rec));
  }
  return table;
}

PredictionTable read_predictions(const fs::path& path) {
  return parse_predictions(read_csv(path));
}

std::string format_predictions(std::span<const ProbabilityRecord> records) {
  std::ostringstream out;
  const std::size_t num_classes = records.empty() ? 0 : records.front().probs.size();
  out << "subject_id,point_id,group,true_label";
  for (std::size_t k = 0; k < num_classes; ++k) out << ",p_" << k;
  out << '\n';
  for (const auto& rec : records) {
    out << csv_escape(rec.subject_id) << ',' << csv_escape(rec.point_id) << ','
        << csv_escape(rec.group.value_or("")) << ',' << format_optional_index(rec.true_label);
    for (double p : rec.probs) out << ',' << format_double(p);
    out << '\n';
  }
  return out.str();
}

AssessmentTable read_assessments(const fs::path& path, std::string score_name, int orientation) {
  const CsvTable csv = read_csv(path);
  const auto id_col = csv.column("subject_id");
  if (id_col == std::string::npos || csv.header.size() != 2) {
    header_fail(csv, "assessments header must be subject_id,<score>");
  }
  const std::size_t value_col = 1 - id_col;
  if (score_name.empty()) score_name = csv.header[value_col];
  AssessmentTable table(std::move(score_name), orientation);
  for (std::size_t r = 0; r < csv.rows.size(); ++r) {
    const double v = require_double(csv, r, value_col);
    try {
      table.add(csv.rows[r][id_col], v);
    } catch (const Error& e) {
      parse_fail(csv, r, e.what(), e.code());
    }
  }
  return table;
}

std::string format_assessments(const AssessmentTable& table) {
  std::ostringstream out;
  out << "subject_id,clinical_score\n";
  for (const auto& e : table.entries()) {
    out << csv_escape(e.subject_id) << ',' << format_double(e.value) << '\n';
  }
  return out.str();
}

std::unordered_map<std::string, std::string> read_strata(const fs::path& path) {
  const CsvTable csv = read_csv(path);
  const auto id_col = csv.column("subject_id");
  const auto stratum_col = csv.column("stratum");
  if (id_col == std::string::npos || stratum_col == std::string::npos) {
    header_fail(csv, "strata header must be subject_id,stratum");
  }
  std::unordered_map<std::string, std::string> strata;
  for (std::size_t r = 0; r < csv.rows.size(); ++r) {
    if (!strata.emplace(csv.rows[r][id_col], csv.rows[r][stratum_col]).second) {
      parse_fail(csv, r, "duplicate subject id " + csv.rows[r][id_col]);
    }
  }
  return strata;
}

std::string format_strata(const std::unordered_map<std::string, std::string>& strata,
                          std::span<const std::string> order) {
  std::ostringstream out;
  out << "subject_id,stratum\n";
  for (const auto& id : order) {
    const auto it = strata.find(id);
    if (it != strata.end()) out << csv_escape(id) << ',' << csv_escape(it->second) << '\n';
  }
  return out.str();
}

VectorTable parse_vectors(const CsvTable& csv) {
  const auto id_col = csv.column("subject_id");
  if (id_col == std::string::npos) header_fail(csv, "features file needs a subject_id column");
  const auto feature_cols = indexed_columns(csv, "f_");
  if (feature_cols.empty()) header_fail(csv, "features file needs f_0..f_{D-1} columns");
  const auto point_col = csv.column("point_id");
  const auto group_col = csv.column("group");
  const auto label_col = csv.column("label");
  const auto pred_col = csv.column("predicted");

  VectorTable table;
  table.dim = feature_cols.size();
  table.rows.reserve(csv.rows.size());
  for (std::size_t r = 0; r < csv.rows.size(); ++r) {
    VectorRow row;
    row.subject_id = csv.rows[r][id_col];
    if (row.subject_id.empty()) parse_fail(csv, r, "empty subject_id");
    if (point_col != std::string::npos) row.point_id = csv.rows[r][point_col];
    row.group = optional_field(csv, r, group_col);
    row.label = optional_index(csv, r, label_col);
    row.predicted = optional_index(csv, r, pred_col);
    row.values.reserve(table.dim);
    for (std::size_t c : feature_cols) row.values.push_back(require_double(csv, r, c));
    table.rows.push_back(std::move(row));
  }
  return table;
}

VectorTable read_vectors(const fs::path& path) { return parse_vectors(read_csv(path)); }

std::string format_vectors(const VectorTable& table) {
  const bool with_point = std::any_of(table.rows.begin(), table.rows.end(),
                                      [](const VectorRow& r) { return !r.point_id.empty(); });
  const bool with_group = std::any_of(table.rows.begin(), table.rows.end(),
                                      [](const VectorRow& r) { return r.group.has_value(); });
  const bool with_label = std::any_of(table.rows.begin(), table.rows.end(),
                                      [](const VectorRow& r) { return r.label.has_value(); });
  const bool with_pred = std::any_of(table.rows.begin(), table.rows.end(),
                                     [](const VectorRow& r) { return r.predicted.has_value(); });
  std::ostringstream out;
  out << "subject_id";
  if (with_point) out << ",point_id";
  if (with_group) out << ",group";
  if (with_label) out << ",label";
  if (with_pred) out << ",predicted";
  for (std::size_t j = 0; j < table.dim; ++j) out << ",f_" << j;
  out << '\n';
  for (const auto& row : table.rows) {
    out << csv_escape(row.subject_id);
    if (with_point) out << ',' << csv_escape(row.point_id);
    if (with_group) out << ',' << csv_escape(row.group.value_or(""));
    if (with_label) out << ',' << format_optional_index(row.label);
    if (with_pred) out << ',' << format_optional_index(row.predicted);
    for (double v : row.values) out << ',' << format_double(v);
    out << '\n';
  }
  return out.str();
}

std::vector<ScoreRow> read_scores(const fs::path& path) {
  const CsvTable csv = read_csv(path);
  const auto id_col = csv.column("subject_id");
  const auto score_col = csv.column("score");
  if (id_col == std::string::npos || score_col == std::string::npos) {
    header_fail(csv, "scores header needs subject_id and score columns");
  }
  const auto group_col = csv.column("group");
  const auto total_col = csv.column("n_total");
  const auto relevant_col = csv.column("n_relevant");
  std::vector<ScoreRow> out;
  for (std::size_t r = 0; r < csv.rows.size(); ++r) {
    ScoreRow row;
    row.group = optional_field(csv, r, group_col);
    row.score.subject_id = csv.rows[r][id_col];
    const auto text = trim(csv.rows[r][score_col]);
    if (!text.empty() && text != "NA") row.score.score = require_double(csv, r, score_col);
    if (auto v = optional_index(csv, r, total_col)) row.score.n_total = *v;
    if (auto v = optional_index(csv, r, relevant_col)) row.score.n_relevant = *v;
    out.push_back(std::move(row));
  }
  return out;
}

std::string format_scores(std::span<const ScoreRow> rows, bool with_group) {
  std::ostringstream out;
  out << "subject_id" << (with_group ? ",group" : "") << ",score,n_total,n_relevant\n";
  for (const auto& row : rows) {
    out << csv_escape(row.score.subject_id);
    if (with_group) out << ',' << csv_escape(row.group.value_or(""));
    out << ',' << (row.score.score ? format_double(*row.score.score) : std::string("NA")) << ','
        << row.score.n_total << ',' << row.score.n_relevant << '\n';
  }
  return out.str();
}

std::string format_pairs(std::span<const ScorePair> pairs, std::string_view x_name,
                         std::string_view y_name) {
  std::ostringstream out;
  out << "subject_id," << x_name << ',' << y_name << '\n';
  for (const auto& p : pairs) {
    out << csv_escape(p.subject_id) << ',' << format_double(p.x) << ',' << format_double(p.y)
        << '\n';
  }
  return out.str();
}

void write_file_atomic(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot rename " + tmp.string() + ": " + ec.message());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string sha256_file(const fs::path& path) {
  const std::string bytes = read_file(path);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::IoError, "sha256 failed for " + path.string());
  }
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return hex.str();
}

}  // namespace cobra
