#include "entsel/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "entsel/instances.hpp"

namespace entsel {

using nlohmann::json;

namespace {

std::string cell_text(const Cell& c) {
  struct Visitor {
    std::string operator()(std::monostate) const { return ""; }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(double v) const { return format_number(v); }
    std::string operator()(const std::string& s) const { return s; }
  };
  return std::visit(Visitor{}, c);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

json cell_json(const Cell& c) {
  struct Visitor {
    json operator()(std::monostate) const { return nullptr; }
    json operator()(bool b) const { return b; }
    json operator()(std::int64_t v) const { return v; }
    json operator()(double v) const {
      // JSON has no non-finite numbers.
      if (!std::isfinite(v)) return format_number(v);
      return round12(v);
    }
    json operator()(const std::string& s) const { return s; }
  };
  return std::visit(Visitor{}, c);
}

Cell json_cell(const json& j) {
  if (j.is_null()) return std::monostate{};
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number()) return j.get<double>();
  const auto s = j.get<std::string>();
  if (s == "nan") return std::nan("");
  if (s == "inf") return HUGE_VAL;
  if (s == "-inf") return -HUGE_VAL;
  return s;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << text;
  out.close();
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

}  // namespace

void Table::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size()) {
    throw Error("table " + name + ": row has " + std::to_string(row.size()) + " cells, expected " +
                std::to_string(columns.size()));
  }
  rows.push_back(std::move(row));
}

std::size_t Table::column(const std::string& col) const {
  const auto it = std::find(columns.begin(), columns.end(), col);
  if (it == columns.end()) throw Error("table " + name + ": no column '" + col + "'");
  return static_cast<std::size_t>(it - columns.begin());
}

bool Report::all_passed() const {
  return std::all_of(criteria.begin(), criteria.end(),
                     [](const CriterionResult& c) { return c.passed; });
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

double round12(double v) {
  if (!std::isfinite(v)) return v;
  return std::stod(format_number(v));
}

std::string to_csv(const Table& table) {
  std::ostringstream os;
  for (std::size_t k = 0; k < table.columns.size(); ++k) {
    os << (k ? "," : "") << csv_field(table.columns[k]);
  }
  os << "\r\n";
  for (const auto& row : table.rows) {
    for (std::size_t k = 0; k < row.size(); ++k) os << (k ? "," : "") << csv_field(cell_text(row[k]));
    os << "\r\n";
  }
  return os.str();
}

json to_json(const Table& table) {
  json rows = json::array();
  for (const auto& row : table.rows) {
    json r = json::array();
    for (const auto& c : row) r.push_back(cell_json(c));
    rows.push_back(std::move(r));
  }
  return {{"table", table.name}, {"columns", table.columns}, {"rows", std::move(rows)}};
}

Table table_from_json(const json& j) {
  Table t;
  try {
    t.name = j.at("table").get<std::string>();
    t.columns = j.at("columns").get<std::vector<std::string>>();
    for (const auto& r : j.at("rows")) {
      std::vector<Cell> row;
      for (const auto& c : r) row.push_back(json_cell(c));
      t.add_row(std::move(row));
    }
  } catch (const json::exception& e) {
    throw Error(std::string("malformed table JSON: ") + e.what());
  }
  return t;
}

std::string to_markdown(const Report& report) {
  std::ostringstream os;
  os << "# " << report.experiment << " (" << report.hash << ")\n\n";
  if (!report.criteria.empty()) {
    os << "| # | check | result | detail |\n|---|---|---|---|\n";
    for (const auto& c : report.criteria) {
      os << "| " << c.id << " | " << c.name << " | " << (c.passed ? "PASS" : "FAIL") << " | "
         << c.detail << " |\n";
    }
    os << "\n";
  }
  for (const auto& note : report.notes) os << "- " << note << "\n";
  if (!report.notes.empty()) os << "\n";
  for (const auto& t : report.tables) {
    os << "## " << t.name << "\n\n";
    os << "|";
    for (const auto& c : t.columns) os << " " << c << " |";
    os << "\n|";
    for (std::size_t k = 0; k < t.columns.size(); ++k) os << "---|";
    os << "\n";
    for (const auto& row : t.rows) {
      os << "|";
      for (const auto& c : row) os << " " << cell_text(c) << " |";
      os << "\n";
    }
    os << "\n";
  }
  return os.str();
}

std::vector<std::filesystem::path> emit_report(const Report& report,
                                               const std::filesystem::path& dir,
                                               const std::vector<Format>& formats) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory '" + dir.string() + "': " + ec.message());
  std::vector<std::filesystem::path> written;
  const auto has = [&](Format f) {
    return std::find(formats.begin(), formats.end(), f) != formats.end();
  };
  for (const auto& t : report.tables) {
    if (has(Format::csv)) {
      written.push_back(dir / (t.name + "-" + report.hash + ".csv"));
      write_file(written.back(), to_csv(t));
    }
    if (has(Format::json)) {
      written.push_back(dir / (t.name + "-" + report.hash + ".json"));
      write_file(written.back(), to_json(t).dump(2) + "\n");
    }
  }
  if (has(Format::markdown) || report.tables.empty()) {
    written.push_back(dir / (report.experiment + "-" + report.hash + ".md"));
    write_file(written.back(), to_markdown(report));
  }
  return written;
}

std::vector<Table> load_tables(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Table> out;
  for (const auto& p : files) {
    std::ifstream in(p);
    if (!in) throw Error("cannot read '" + p.string() + "'");
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw Error("'" + p.string() + "': " + e.what());
    }
    // Other JSON documents (ray decompositions, ...) share the directory.
    if (!j.is_object() || !j.contains("table")) continue;
    out.push_back(table_from_json(j));
  }
  return out;
}

}  // namespace entsel
