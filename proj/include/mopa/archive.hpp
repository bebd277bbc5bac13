// Copyright 2026 The mopa Authors
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

#ifndef MOPA_ARCHIVE_HPP
#define MOPA_ARCHIVE_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mopa/linalg.hpp"

namespace mopa {

// Arrays are stored as row-major little-endian float64 (complex values as
// interleaved re, im) in NAME.bin, described by the sidecar NAME.json.
struct ArrayMeta {
  std::vector<std::string> axes;  // one label per dimension
  std::string units;
  std::string description;
  nlohmann::json coordinates = nlohmann::json::object();  // axis label -> values
};

void write_array(const std::filesystem::path& dir, const std::string& name, const RMatrix& data,
                 const ArrayMeta& meta, const std::string& config_hash);
void write_array(const std::filesystem::path& dir, const std::string& name, const CMatrix& data,
                 const ArrayMeta& meta, const std::string& config_hash);

// Throws IoError when files are missing, sizes disagree with the sidecar,
// the payload checksum fails, or the config hash differs from the
// expected one (when given).
RMatrix read_real_array(const std::filesystem::path& dir, const std::string& name,
                        const std::optional<std::string>& expected_hash = std::nullopt,
                        nlohmann::json* sidecar = nullptr);
CMatrix read_complex_array(const std::filesystem::path& dir, const std::string& name,
                           const std::optional<std::string>& expected_hash = std::nullopt,
                           nlohmann::json* sidecar = nullptr);
bool array_exists(const std::filesystem::path& dir, const std::string& name);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

// CSV with "# key=value" metadata lines above the column header.
struct CsvTable {
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add_row(const std::vector<double>& values);
};

void write_csv(const std::filesystem::path& path, const CsvTable& table);
// Shortest text that reads back to the same double.
std::string format_double(double v);

}  // namespace mopa

#endif  // MOPA_ARCHIVE_HPP
