#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace bic {

/// Round-trip exact decimal form (17 significant digits).
std::string format_double(double v);

using Cell = std::variant<std::monostate, double, std::int64_t, std::string, bool>;

/// A named, column-oriented result table; the unit of CLI output.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add_row(std::vector<Cell> row);
};

inline constexpr int kCsvSchemaVersion = 1;

/// `#schema=1`, then for each table a `#table=<name>` line, the header and rows.
void write_csv(std::ostream& out, const std::vector<Table>& tables);
/// {"schema":1,"tables":{"<name>":[{column: value, ...}, ...]}}
nlohmann::json tables_to_json(const std::vector<Table>& tables);
/// Fixed-width text rendering for terminals.
void write_text(std::ostream& out, const Table& table);

}  // namespace bic
