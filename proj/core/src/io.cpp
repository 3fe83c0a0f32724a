#include "flasheval/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "flasheval/errors.hpp"

namespace flasheval {
namespace {

using nlohmann::json;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError("cannot open file: " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// RFC-4180-style field splitting: fields may be double-quoted, quotes are
// escaped by doubling. Keeps prompt ids with embedded commas intact.
std::vector<std::string> split_csv_line(const std::string& line,
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
    } else if (c == '"' && field.empty()) {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  if (quoted) {
    throw ParseError("unterminated quote on line " + std::to_string(line_no));
  }
  fields.push_back(std::move(field));
  return fields;
}

std::vector<std::string> read_csv_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string line;
  std::istringstream in(text);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

double parse_score(const std::string& field, std::size_t line_no) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ParseError("not a number on line " + std::to_string(line_no) + ": '" +
                     field + "'");
  }
  if (!std::isfinite(value)) {
    throw ValidationError("non-finite value on line " + std::to_string(line_no));
  }
  return value;
}

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (const char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

ScoreMatrix load_score_csv(const std::filesystem::path& path) {
  const auto lines = read_csv_lines(read_file(path));
  if (lines.empty()) {
    throw ParseError("empty score file: " + path.string());
  }
  const auto header = split_csv_line(lines[0], 1);
  if (header.size() < 2 || header[0] != "prompt_id") {
    throw ParseError("score CSV header must start with 'prompt_id'");
  }
  std::vector<ModelSetting> models;
  for (std::size_t j = 1; j < header.size(); ++j) {
    models.push_back(ModelSetting::parse(header[j]));
  }
  std::vector<std::string> prompts;
  std::vector<double> scores;
  scores.reserve((lines.size() - 1) * models.size());
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = split_csv_line(lines[i], i + 1);
    if (fields.size() != header.size()) {
      throw ValidationError("ragged row on line " + std::to_string(i + 1));
    }
    prompts.push_back(fields[0]);
    for (std::size_t j = 1; j < fields.size(); ++j) {
      scores.push_back(parse_score(fields[j], i + 1));
    }
  }
  return ScoreMatrix(std::move(prompts), std::move(models), std::move(scores));
}

ScoreMatrix load_score_json(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ParseError("invalid JSON in " + path.string() + ": " + e.what());
  }
  try {
    std::vector<std::string> prompts =
        doc.at("prompt_ids").get<std::vector<std::string>>();
    std::vector<ModelSetting> models;
    for (const auto& id : doc.at("model_ids")) {
      models.push_back(ModelSetting::parse(id.get<std::string>()));
    }
    std::vector<double> scores;
    const auto& rows = doc.at("scores");
    for (const auto& row : rows) {
      for (const auto& v : row) {
        if (!v.is_number()) {
          throw ValidationError("score entries must be numbers");
        }
        scores.push_back(v.get<double>());
      }
    }
    return ScoreMatrix(std::move(prompts), std::move(models), std::move(scores));
  } catch (const json::exception& e) {
    throw ParseError("score JSON missing required field: " +
                     std::string(e.what()));
  }
}

}  // namespace

FileFormat parse_file_format(const std::string& name) {
  if (name == "csv") return FileFormat::csv;
  if (name == "json") return FileFormat::json;
  throw ParseError("unknown file format: " + name);
}

ScoreMatrix load_score_matrix(const std::filesystem::path& path,
                              FileFormat format) {
  return format == FileFormat::csv ? load_score_csv(path)
                                   : load_score_json(path);
}

void save_score_matrix(const ScoreMatrix& matrix,
                       const std::filesystem::path& path, FileFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ParseError("cannot write file: " + path.string());
  }
  if (format == FileFormat::csv) {
    out << "prompt_id";
    for (const auto& m : matrix.model_ids()) out << ',' << csv_quote(m.id());
    out << '\n';
    for (std::size_t i = 0; i < matrix.n_prompts(); ++i) {
      out << csv_quote(matrix.prompt_ids()[i]);
      for (const double v : matrix.row(i)) out << ',' << format_double(v);
      out << '\n';
    }
  } else {
    json doc;
    doc["prompt_ids"] = matrix.prompt_ids();
    std::vector<std::string> model_ids;
    for (const auto& m : matrix.model_ids()) model_ids.push_back(m.id());
    doc["model_ids"] = model_ids;
    json rows = json::array();
    for (std::size_t i = 0; i < matrix.n_prompts(); ++i) {
      const auto row = matrix.row(i);
      rows.push_back(json(std::vector<double>(row.begin(), row.end())));
    }
    doc["scores"] = std::move(rows);
    out << doc.dump(2) << '\n';
  }
  if (!out) {
    throw ParseError("failed writing file: " + path.string());
  }
}

TieThresholds load_tie_thresholds(const std::filesystem::path& path,
                                  const ScoreMatrix& matrix) {
  const auto lines = read_csv_lines(read_file(path));
  if (lines.empty()) {
    throw ParseError("empty threshold file: " + path.string());
  }
  const auto header = split_csv_line(lines[0], 1);
  if (header.size() != 2 || header[0] != "model_id" ||
      header[1] != "threshold") {
    throw ParseError("threshold CSV header must be 'model_id,threshold'");
  }
  std::unordered_map<std::string, double> by_id;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = split_csv_line(lines[i], i + 1);
    if (fields.size() != 2) {
      throw ValidationError("ragged row on line " + std::to_string(i + 1));
    }
    if (!by_id.emplace(fields[0], parse_score(fields[1], i + 1)).second) {
      throw ValidationError("duplicate threshold for model " + fields[0]);
    }
  }
  std::vector<double> aligned;
  aligned.reserve(matrix.n_models());
  for (const auto& m : matrix.model_ids()) {
    const auto it = by_id.find(m.id());
    if (it == by_id.end()) {
      throw ValidationError("missing threshold for model " + m.id());
    }
    aligned.push_back(it->second);
    by_id.erase(it);
  }
  if (!by_id.empty()) {
    throw ValidationError("threshold file names a model not in the matrix: " +
                          by_id.begin()->first);
  }
  return TieThresholds(std::move(aligned));
}

FeatureMatrix load_feature_matrix(const std::filesystem::path& path) {
  const auto lines = read_csv_lines(read_file(path));
  if (lines.empty()) {
    throw ParseError("empty feature file: " + path.string());
  }
  const auto header = split_csv_line(lines[0], 1);
  if (header.size() < 2 || header[0] != "prompt_id") {
    throw ParseError("feature CSV header must start with 'prompt_id'");
  }
  const std::size_t dim = header.size() - 1;
  std::vector<std::string> prompts;
  std::vector<double> features;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = split_csv_line(lines[i], i + 1);
    if (fields.size() != header.size()) {
      throw ValidationError("ragged row on line " + std::to_string(i + 1));
    }
    prompts.push_back(fields[0]);
    for (std::size_t j = 1; j < fields.size(); ++j) {
      features.push_back(parse_score(fields[j], i + 1));
    }
  }
  return FeatureMatrix(std::move(prompts), dim, std::move(features));
}

void save_feature_matrix(const FeatureMatrix& features,
                         const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ParseError("cannot write file: " + path.string());
  }
  out << "prompt_id";
  for (std::size_t j = 0; j < features.dim(); ++j) out << ",f" << j;
  out << '\n';
  for (std::size_t i = 0; i < features.n_prompts(); ++i) {
    out << csv_quote(features.prompt_ids()[i]);
    for (const double v : features.row(i)) out << ',' << format_double(v);
    out << '\n';
  }
}

}  // namespace flasheval
