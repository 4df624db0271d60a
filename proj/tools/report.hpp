#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

namespace scatter {

using nlohmann::ordered_json;

/// A CSV cell is either a number or free text (class tags, error messages).
using Cell = std::variant<double, std::string>;

struct Table {
  std::vector<std::string> header;  // "name[unit]"
  std::vector<std::vector<Cell>> rows;
};

/// %.17g, with "nan", "inf", "-inf" for the non-finite values.
std::string format_number(double x);

/// Fields are quoted only when they contain a comma, quote or newline.
void write_csv(std::ostream& out, const Table& table);

/// Inverse of write_csv: unquoted fields that parse completely as numbers
/// come back as doubles, everything else as text. Writing the result again
/// reproduces the input byte for byte.
Table read_csv(std::istream& in);

/// Non-finite values become null.
ordered_json number(double x);

/// Two-space indented dump plus a trailing newline.
void write_json(std::ostream& out, const ordered_json& doc);

ordered_json error_object(const std::string& kind, const std::string& message,
                          const std::vector<std::pair<std::string, double>>& details, int exit_code);

}  // namespace scatter
