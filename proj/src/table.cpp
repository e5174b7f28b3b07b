#include "bic/table.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace bic {
namespace {

std::string cell_text(const Cell& c) {
  struct Visitor {
    std::string operator()(std::monostate) const { return ""; }
    std::string operator()(double v) const { return format_double(v); }
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(const std::string& v) const { return v; }
    std::string operator()(bool v) const { return v ? "true" : "false"; }
  };
  return std::visit(Visitor{}, c);
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

nlohmann::json cell_json(const Cell& c) {
  struct Visitor {
    nlohmann::json operator()(std::monostate) const { return nullptr; }
    nlohmann::json operator()(double v) const {
      if (!std::isfinite(v)) return format_double(v);
      return v;
    }
    nlohmann::json operator()(std::int64_t v) const { return v; }
    nlohmann::json operator()(const std::string& v) const { return v; }
    nlohmann::json operator()(bool v) const { return v; }
  };
  return std::visit(Visitor{}, c);
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void Table::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size()) {
    throw std::logic_error("table '" + name + "': row width does not match columns");
  }
  rows.push_back(std::move(row));
}

void write_csv(std::ostream& out, const std::vector<Table>& tables) {
  out << "#schema=" << kCsvSchemaVersion << '\n';
  for (const auto& t : tables) {
    out << "#table=" << t.name << '\n';
    for (std::size_t i = 0; i < t.columns.size(); ++i) {
      out << (i ? "," : "") << csv_escape(t.columns[i]);
    }
    out << '\n';
    for (const auto& row : t.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_escape(cell_text(row[i]));
      out << '\n';
    }
  }
}

nlohmann::json tables_to_json(const std::vector<Table>& tables) {
  nlohmann::json doc = {{"schema", kCsvSchemaVersion}, {"tables", nlohmann::json::object()}};
  for (const auto& t : tables) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : t.rows) {
      nlohmann::json obj = nlohmann::json::object();
      for (std::size_t i = 0; i < row.size(); ++i) obj[t.columns[i]] = cell_json(row[i]);
      rows.push_back(std::move(obj));
    }
    doc["tables"][t.name] = std::move(rows);
  }
  return doc;
}

void write_text(std::ostream& out, const Table& table) {
  std::vector<std::size_t> width(table.columns.size());
  for (std::size_t i = 0; i < width.size(); ++i) width[i] = table.columns[i].size();
  std::vector<std::vector<std::string>> text;
  for (const auto& row : table.rows) {
    auto& r = text.emplace_back();
    for (std::size_t i = 0; i < row.size(); ++i) {
      r.push_back(std::holds_alternative<double>(row[i])
                      ? [&] {
                          char buf[32];
                          std::snprintf(buf, sizeof buf, "%.6g", std::get<double>(row[i]));
                          return std::string(buf);
                        }()
                      : cell_text(row[i]));
      width[i] = std::max(width[i], r.back().size());
    }
  }
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      out << (i ? "  " : "") << cells[i] << std::string(width[i] - cells[i].size(), ' ');
    }
    out << '\n';
  };
  line(table.columns);
  for (const auto& r : text) line(r);
}

}  // namespace bic
