// Copyright 2026 The Wolp Authors.
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

#ifndef WOLP_CSV_HPP_
#define WOLP_CSV_HPP_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace wolp {

// Minimal comma-separated table. No quoting: every file this project writes
// uses plain numeric or identifier fields.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 if absent
  std::vector<double> numeric_column(const std::string& name) const;
};

CsvTable parse_csv(std::istream& in, bool has_header);
CsvTable read_csv_file(const std::filesystem::path& path, bool has_header);
void write_csv(std::ostream& out, const CsvTable& table);
void write_csv_file(const std::filesystem::path& path, const CsvTable& table);

// Shortest representation that parses back to the same double.
std::string format_double(double v);

}  // namespace wolp

#endif  // WOLP_CSV_HPP_
