// Copyright 2026 The qbc3sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include <nlohmann/json.hpp>

#include "qbc3/errors.hpp"
#include "qbc3/harness.hpp"

namespace qbc3 {

namespace {

bool is_int_text(const std::string& s) {
  if (s.empty()) return false;
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool is_double_text(const std::string& s) {
  if (s.empty() || std::isspace(static_cast<unsigned char>(s.front()))) return false;
  char* end = nullptr;
  errno = 0;
  std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

Cell parse_bare(const std::string& s) {
  if (s.empty()) return std::monostate{};
  if (is_int_text(s)) return std::stoll(s);
  if (is_double_text(s)) return std::strtod(s.c_str(), nullptr);
  return s;
}

std::string csv_field(const Cell& cell) {
  if (std::holds_alternative<std::monostate>(cell)) return "";
  if (const auto* i = std::get_if<std::int64_t>(&cell)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&cell)) return format_double(*d);
  const auto& s = std::get<std::string>(cell);
  const bool plain = !s.empty() && !is_double_text(s) && s.find_first_of(",\"\r\n") == std::string::npos;
  if (plain) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string json_value(const Cell& cell) {
  if (std::holds_alternative<std::monostate>(cell)) return "null";
  if (const auto* i = std::get_if<std::int64_t>(&cell)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&cell)) {
    // JSON has no non-finite numbers.
    if (!std::isfinite(*d)) return nlohmann::json(format_double(*d)).dump();
    return format_double(*d);
  }
  return nlohmann::json(std::get<std::string>(cell)).dump();
}

// Splits one CSV document into records of (text, quoted) fields.
std::vector<std::vector<std::pair<std::string, bool>>> split_csv(const std::string& text) {
  std::vector<std::vector<std::pair<std::string, bool>>> records;
  std::vector<std::pair<std::string, bool>> record;
  std::string field;
  bool quoted = false, in_quotes = false, any = false;
  auto end_field = [&] {
    record.emplace_back(std::move(field), quoted);
    field.clear();
    quoted = false;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    any = true;
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      in_quotes = quoted = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      end_field();
      records.push_back(std::move(record));
      record.clear();
      any = false;
    } else {
      field += c;
    }
  }
  if (in_quotes) throw InvalidArgument("unterminated quoted CSV field");
  if (any) {
    end_field();
    records.push_back(std::move(record));
  }
  return records;
}

}  // namespace

std::string to_string(TableFormat format) { return format == TableFormat::Csv ? "csv" : "json"; }

void Table::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size())
    throw InvalidArgument("row has " + std::to_string(row.size()) + " cells, table has " +
                          std::to_string(columns.size()) + " columns");
  rows.push_back(std::move(row));
}

std::size_t Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return i;
  throw NotFoundError("no column named " + name);
}

const Cell& Table::at(std::size_t row, const std::string& name) const { return rows.at(row).at(column(name)); }

std::string format_double(double value) {
  if (value == 0.0) return "0";  // folds -0
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

std::string write_csv(const Table& table) {
  std::string out;
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) out += ',';
    out += csv_field(table.columns[i]);
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += csv_field(row[i]);
    }
    out += '\n';
  }
  return out;
}

std::string write_json(const Table& table) {
  std::string out = "{\n  \"columns\": [";
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) out += ", ";
    out += nlohmann::json(table.columns[i]).dump();
  }
  out += "],\n  \"rows\": [";
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    out += r ? ",\n    {" : "\n    {";
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
      if (i) out += ", ";
      out += nlohmann::json(table.columns[i]).dump() + ": " + json_value(table.rows[r][i]);
    }
    out += "}";
  }
  out += table.rows.empty() ? "]\n}\n" : "\n  ]\n}\n";
  return out;
}

std::string write_table(const Table& table, TableFormat format) {
  return format == TableFormat::Csv ? write_csv(table) : write_json(table);
}

Table parse_csv(const std::string& text) {
  const auto records = split_csv(text);
  if (records.empty()) throw InvalidArgument("CSV document has no header");
  Table table;
  for (const auto& [name, quoted] : records.front()) table.columns.push_back(name);
  for (std::size_t r = 1; r < records.size(); ++r) {
    std::vector<Cell> row;
    for (const auto& [text_field, quoted] : records[r])
      row.push_back(quoted ? Cell{text_field} : parse_bare(text_field));
    table.add_row(std::move(row));
  }
  return table;
}

Table parse_json(const std::string& text) {
  const auto doc = nlohmann::ordered_json::parse(text);
  Table table;
  for (const auto& c : doc.at("columns")) table.columns.push_back(c.get<std::string>());
  for (const auto& obj : doc.at("rows")) {
    std::vector<Cell> row;
    for (const auto& name : table.columns) {
      const auto& v = obj.at(name);
      if (v.is_null())
        row.emplace_back(std::monostate{});
      else if (v.is_number_integer())
        row.emplace_back(v.get<std::int64_t>());
      else if (v.is_number())
        row.emplace_back(v.get<double>());
      else if (v.is_string())
        row.emplace_back(v.get<std::string>());
      else
        throw InvalidArgument("unsupported JSON cell in column " + name);
    }
    table.add_row(std::move(row));
  }
  return table;
}

Table parse_table(const std::string& text, TableFormat format) {
  return format == TableFormat::Csv ? parse_csv(text) : parse_json(text);
}

}  // namespace qbc3
