/*
 * Copyright 2026 The DriftScope Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace driftscope {

// Shortest text that parses back to the same double.
std::string FormatDouble(double v);
// Fixed-point with the given number of decimals ("-0" normalized to "0").
std::string FormatFixed(double v, int decimals);

// Minimal CSV writer: comma separated, LF line endings, no quoting (the
// toolkit never emits commas inside fields).
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);

  CsvWriter& Row(std::vector<std::string> fields);
  const std::string& str() const { return text_; }
  std::size_t rows() const { return rows_; }

 private:
  std::size_t columns_;
  std::size_t rows_ = 0;
  std::string text_;
};

struct CsvTable {
  std::string path;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Column index by name; throws ParseError naming the file.
  std::size_t Column(std::string_view name) const;
  // Parses rows[r][c] as a double; errors name the file and 1-based line.
  double Number(std::size_t r, std::size_t c) const;
  long Integer(std::size_t r, std::size_t c) const;
};

// Reads a CSV written by CsvWriter. Every row must have the header's width.
CsvTable ReadCsv(const std::filesystem::path& path);
CsvTable ParseCsv(std::string_view text, const std::string& origin);

std::string ReadFile(const std::filesystem::path& path);
// Writes atomically enough for our purposes (truncate + write); throws
// StageError on failure.
void WriteFile(const std::filesystem::path& path, std::string_view contents);

}  // namespace driftscope
