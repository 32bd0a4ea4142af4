// Copyright 2026 The wkm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "wkm/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <system_error>

#include "wkm/error.hpp"

namespace wkm {
namespace {

std::string trim(std::string_view s) {
  auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return std::string(s);
}

std::optional<double> parse_number(const std::string& text) {
  if (text.empty()) return std::nullopt;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (*first == '+') ++first;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || !std::isfinite(value)) return std::nullopt;
  return value;
}

[[noreturn]] void parse_error(std::size_t line, const std::string& column,
                              const std::string& what) {
  throw Error(ErrorCode::ParseError,
              "line " + std::to_string(line) + ", column '" + column + "': " + what);
}

std::size_t find_column(const std::vector<std::string>& header, const std::string& name) {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) {
    throw Error(ErrorCode::ParseError, "line 1: missing column '" + name + "'");
  }
  return static_cast<std::size_t>(it - header.begin());
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(std::string_view(line).substr(
        start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

Dataset parse_csv(std::istream& in, const ColumnMap& columns, ValidationOptions options) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, "line 1: missing header row");
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  const auto header = split_csv_line(line);

  const std::size_t time_col = find_column(header, columns.time);
  const std::size_t event_col = find_column(header, columns.event);
  const std::size_t treat_col = find_column(header, columns.treatment);

  std::vector<std::size_t> covariate_cols;
  if (columns.covariates.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c != time_col && c != event_col && c != treat_col) covariate_cols.push_back(c);
    }
  } else {
    for (const auto& name : columns.covariates) covariate_cols.push_back(find_column(header, name));
  }

  std::vector<SubjectRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      parse_error(line_no, header.back(),
                  "expected " + std::to_string(header.size()) + " fields, found " +
                      std::to_string(fields.size()));
    }
    auto number = [&](std::size_t c) {
      auto v = parse_number(fields[c]);
      if (!v) {
        parse_error(line_no, header[c],
                    fields[c].empty() ? "missing value" : "not a number: '" + fields[c] + "'");
      }
      return *v;
    };
    auto indicator = [&](std::size_t c) {
      const double v = number(c);
      if (v != 0.0 && v != 1.0) {
        throw Error(ErrorCode::NonBinaryIndicator, "line " + std::to_string(line_no) +
                                                       ", column '" + header[c] +
                                                       "': value must be 0 or 1");
      }
      return static_cast<int>(v);
    };

    SubjectRecord r;
    r.time = number(time_col);
    r.event = indicator(event_col);
    r.treatment = indicator(treat_col);
    r.covariates.reserve(covariate_cols.size() + 1);
    r.covariates.push_back(1.0);
    for (auto c : covariate_cols) r.covariates.push_back(number(c));
    records.push_back(std::move(r));
  }
  return Dataset::validate(std::move(records), options);
}

Dataset read_csv(const std::filesystem::path& path, const ColumnMap& columns,
                 ValidationOptions options) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileNotFound, "cannot open '" + path.string() + "'");
  return parse_csv(in, columns, options);
}

std::string format_exact(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  return std::string(buf, ptr);
}

std::string format_sig(double value, int digits) {
  char buf[64];
  auto [ptr, ec] =
      std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, digits);
  return std::string(buf, ptr);
}

void write_csv(const Dataset& data, std::ostream& out, const ColumnMap& columns) {
  const std::size_t q = data.p() - 1;
  out << columns.time << ',' << columns.event << ',' << columns.treatment;
  for (std::size_t c = 0; c < q; ++c) {
    out << ','
        << (columns.covariates.size() == q ? columns.covariates[c] : "z" + std::to_string(c + 1));
  }
  out << '\n';
  for (const auto& r : data.records()) {
    out << format_exact(r.time) << ',' << r.event << ',' << r.treatment;
    for (std::size_t c = 1; c < r.covariates.size(); ++c) out << ',' << format_exact(r.covariates[c]);
    out << '\n';
  }
}

void write_csv(const Dataset& data, const std::filesystem::path& path, const ColumnMap& columns) {
  std::ostringstream out;
  write_csv(data, out, columns);
  write_file_atomic(path, out.str());
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::FileNotFound, "cannot write '" + tmp.string() + "'");
    out << contents;
    out.flush();
    if (!out) throw Error(ErrorCode::FileNotFound, "short write to '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace wkm
