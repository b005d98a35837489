#include "sgl/experiment/csv.hpp"

#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>

#include "sgl/energy_metrics.hpp"
#include "sgl/errors.hpp"
#include "sgl/gait_equation.hpp"
#include "sgl/rl/ppo.hpp"

namespace sgl::experiment {

namespace {

const std::string kMarker = "# sgl-csv";

}  // namespace

const CsvSchema& grid_schema() {
  static const CsvSchema s{"grid", "index," + GaitParams::csv_header() + ",status," + EvalResult::csv_header()};
  return s;
}

const CsvSchema& bayes_schema() {
  static const CsvSchema s{"bayes",
                           "sample," + GaitParams::csv_header() + ",objective,penalized," + EvalResult::csv_header()};
  return s;
}

const CsvSchema& ppo_eval_schema() {
  static const CsvSchema s{"ppo_eval", "target_velocity,status," + EvalResult::csv_header()};
  return s;
}

const CsvSchema& train_log_schema() {
  static const CsvSchema s{"train_log", rl::EpisodeLog::csv_header()};
  return s;
}

const CsvSchema& scatter_schema() {
  static const CsvSchema s{"scatter", "controller,velocity,power,appv"};
  return s;
}

const CsvSchema& power_profile_schema() {
  static const CsvSchema s{"power_profile", "joint,controller,watts"};
  return s;
}

const CsvSchema& compare_schema() {
  static const CsvSchema s{"compare",
                           "target_velocity,ppo_velocity,ppo_appv,grid_velocity,grid_appv,grid_ratio,"
                           "bayes_velocity,bayes_appv,bayes_ratio,status"};
  return s;
}

std::string csv_document(const CsvSchema& schema, const std::vector<std::string>& rows) {
  std::string out = kMarker + " " + std::to_string(kCsvVersion) + " " + schema.name + "\n" + schema.header + "\n";
  for (const auto& r : rows) out += r + "\n";
  return out;
}

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return static_cast<int>(i);
  throw ValidationError(name, "no such column");
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& field) {
  if (field == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || end != field.data() + field.size()) throw ValidationError("csv", "bad number '" + field + "'");
  return v;
}

CsvTable parse_csv(const std::string& text, const CsvSchema& schema) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind(kMarker, 0) != 0) {
    throw ValidationError("csv", "missing schema line");
  }
  std::istringstream tag(line.substr(kMarker.size()));
  int version = 0;
  std::string name;
  if (!(tag >> version >> name)) throw ValidationError("csv", "malformed schema line");
  if (version != kCsvVersion) {
    throw ValidationError("schema_version", "unsupported CSV schema version " + std::to_string(version));
  }
  if (name != schema.name) throw ValidationError("schema", "expected " + schema.name + ", got " + name);
  if (!std::getline(in, line) || line != schema.header) throw ValidationError("header", "does not match " + schema.name);
  CsvTable t;
  t.columns = split_fields(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = split_fields(line);
    if (fields.size() != t.columns.size()) {
      throw ValidationError("csv", "row has " + std::to_string(fields.size()) + " fields, expected " +
                                       std::to_string(t.columns.size()));
    }
    t.rows.push_back(std::move(fields));
  }
  return t;
}

CsvTable read_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw ValidationError(path, "cannot open");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), schema);
}

}  // namespace sgl::experiment
