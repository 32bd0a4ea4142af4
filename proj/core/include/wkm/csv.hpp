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

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "wkm/data_model.hpp"

namespace wkm {

/// Column bindings for survival CSV files. An empty `covariates` list means
/// every column other than time/event/treatment, in file order. The
/// intercept is never stored in files; it is prepended on read.
struct ColumnMap {
  std::string time = "time";
  std::string event = "event";
  std::string treatment = "treatment";
  std::vector<std::string> covariates;
};

Dataset read_csv(const std::filesystem::path& path, const ColumnMap& columns = {},
                 ValidationOptions options = {});
Dataset parse_csv(std::istream& in, const ColumnMap& columns = {},
                  ValidationOptions options = {});

/// Writes time, event, treatment and the non-intercept covariates with 17
/// significant digits. Covariates are named from `columns.covariates` when it
/// has p - 1 entries, otherwise z1, z2, ...
void write_csv(const Dataset& data, std::ostream& out, const ColumnMap& columns = {});
void write_csv(const Dataset& data, const std::filesystem::path& path,
               const ColumnMap& columns = {});

/// Shortest-round-trip-safe text for a double (17 significant digits).
std::string format_exact(double value);
/// Human-oriented text with `digits` significant digits.
std::string format_sig(double value, int digits);

/// Splits one CSV line on commas, trimming whitespace, CR, and surrounding
/// double quotes from each field.
std::vector<std::string> split_csv_line(const std::string& line);

/// Writes `contents` to `path` atomically (temp file then rename).
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace wkm
