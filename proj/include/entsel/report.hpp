// Result tables and their serialization: CSV (RFC 4180), JSON (one object per
// table) and a markdown summary. Numbers carry 12 significant digits.
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace entsel {

using Cell = std::variant<std::monostate, bool, std::int64_t, double, std::string>;

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add_row(std::vector<Cell> row);
  /// Index of a column; throws when absent.
  std::size_t column(const std::string& name) const;
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
};

struct Report {
  std::string experiment;  // file-name prefix of the summary
  std::string hash;
  std::vector<Table> tables;
  std::vector<CriterionResult> criteria;
  std::vector<std::string> notes;

  bool all_passed() const;
};

/// printf("%.12g"); non-finite values print as nan / inf / -inf.
std::string format_number(double v);
/// Round-trips v through format_number.
double round12(double v);

std::string to_csv(const Table& table);
nlohmann::json to_json(const Table& table);
Table table_from_json(const nlohmann::json& j);
std::string to_markdown(const Report& report);

enum class Format { csv, json, markdown };

/// Writes <table>-<hash>.csv / .json per table and <experiment>-<hash>.md;
/// returns the paths written in order. IO failures throw with the path.
std::vector<std::filesystem::path> emit_report(const Report& report,
                                               const std::filesystem::path& dir,
                                               const std::vector<Format>& formats = {
                                                   Format::csv, Format::json, Format::markdown});

/// Reads every table JSON file in dir (sorted by name), skipping other
/// JSON documents.
std::vector<Table> load_tables(const std::filesystem::path& dir);

}  // namespace entsel
