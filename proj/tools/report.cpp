#include "report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace scatter {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

bool parse_number(const std::string& s, double& x) {
  if (s.empty()) return false;
  if (s == "nan") {
    x = NAN;
    return true;
  }
  char* end = nullptr;
  x = std::strtod(s.c_str(), &end);
  // strtod also accepts hex floats and "infinity"; only round-trippable spellings count
  return end == s.c_str() + s.size() && format_number(x) == s;
}

}  // namespace

void write_csv(std::ostream& out, const Table& table) {
  for (std::size_t i = 0; i < table.header.size(); ++i) out << (i ? "," : "") << quote(table.header[i]);
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      if (const auto* d = std::get_if<double>(&row[i])) out << format_number(*d);
      else out << quote(std::get<std::string>(row[i]));
    }
    out << '\n';
  }
}

Table read_csv(std::istream& in) {
  std::vector<std::vector<Cell>> records;
  std::vector<Cell> record;
  std::string field;
  bool quoted = false, was_quoted = false, any = false;
  auto finish_field = [&] {
    double x;
    if (!was_quoted && parse_number(field, x)) record.emplace_back(x);
    else record.emplace_back(field);
    field.clear();
    was_quoted = false;
  };
  char c;
  while (in.get(c)) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = was_quoted = true;
    } else if (c == ',') {
      finish_field();
    } else if (c == '\n') {
      finish_field();
      records.push_back(std::move(record));
      record.clear();
      any = false;
    } else {
      field += c;
    }
  }
  if (quoted) throw std::runtime_error("read_csv: unterminated quoted field");
  if (any) {
    finish_field();
    records.push_back(std::move(record));
  }
  Table table;
  if (records.empty()) return table;
  for (const auto& h : records.front()) {
    table.header.push_back(std::holds_alternative<std::string>(h) ? std::get<std::string>(h)
                                                                  : format_number(std::get<double>(h)));
  }
  table.rows.assign(records.begin() + 1, records.end());
  return table;
}

ordered_json number(double x) { return std::isfinite(x) ? ordered_json(x) : ordered_json(nullptr); }

void write_json(std::ostream& out, const ordered_json& doc) { out << doc.dump(2) << '\n'; }

ordered_json error_object(const std::string& kind, const std::string& message,
                          const std::vector<std::pair<std::string, double>>& details, int exit_code) {
  ordered_json d = ordered_json::object();
  for (const auto& [name, value] : details) d[name] = number(value);
  ordered_json err;
  err["error"] = {{"kind", kind}, {"message", message}, {"details", d}};
  err["exit_code"] = exit_code;
  return err;
}

}  // namespace scatter
