#pragma once

// Versioned CSV documents. The first line is "# sgl-csv <version> <schema>",
// the second the column header.

#include <string>
#include <vector>

namespace sgl::experiment {

inline constexpr int kCsvVersion = 1;

struct CsvSchema {
  std::string name;
  std::string header;
};

const CsvSchema& grid_schema();
const CsvSchema& bayes_schema();
const CsvSchema& ppo_eval_schema();
const CsvSchema& train_log_schema();
const CsvSchema& scatter_schema();
const CsvSchema& power_profile_schema();
const CsvSchema& compare_schema();

std::string csv_document(const CsvSchema& schema, const std::vector<std::string>& rows);

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;
};

/// Rejects unknown versions, other schemas, and headers that differ from the schema.
CsvTable parse_csv(const std::string& text, const CsvSchema& schema);
CsvTable read_csv(const std::string& path, const CsvSchema& schema);

std::vector<std::string> split_fields(const std::string& line);
double parse_number(const std::string& field);  // "nan" allowed

}  // namespace sgl::experiment
