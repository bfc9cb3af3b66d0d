#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace aiqm {

struct Column {
  std::string name;
  std::string unit;  ///< empty for dimensionless or text columns

  /// "name [unit]", or just "name".
  std::string header() const;
};

/// Empty cells mark values that could not be computed for that row.
using Cell = std::variant<std::monostate, double, std::string>;

class ResultTable {
 public:
  ResultTable() = default;
  explicit ResultTable(std::vector<Column> columns);

  const std::vector<Column>& columns() const noexcept { return columns_; }
  const std::vector<std::vector<Cell>>& rows() const noexcept { return rows_; }
  std::map<std::string, std::string>& metadata() noexcept { return metadata_; }
  const std::map<std::string, std::string>& metadata() const noexcept { return metadata_; }

  /// Throws ContractViolation if the row width differs from the column count.
  void add_row(std::vector<Cell> row);
  /// Index of a column by name; throws DomainError naming the column if absent.
  std::size_t column_index(const std::string& name) const;

  /// '#' metadata lines, a header row, then comma-separated rows (17 significant digits).
  void write_csv(std::ostream& os) const;
  std::string to_csv() const;
  /// {"metadata": {...}, "columns": [{name, unit}], "rows": [[...]]}
  std::string to_json() const;

 private:
  std::vector<Column> columns_;
  std::vector<std::vector<Cell>> rows_;
  std::map<std::string, std::string> metadata_;
};

/// Round-trip decimal text: "%.17g", C locale.
std::string format_number(double v);

/// 64-bit FNV-1a, rendered as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace aiqm
