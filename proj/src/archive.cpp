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

#include "mopa/archive.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "mopa/config.hpp"
#include "mopa/errors.hpp"

namespace mopa {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {


std::string encode(const double* values, std::size_t count) {
  std::string bytes(count * 8, '\0');
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t u;
    std::memcpy(&u, &values[i], 8);
    for (int b = 0; b < 8; ++b) bytes[i * 8 + b] = static_cast<char>((u >> (8 * b)) & 0xff);
  }
  return bytes;
}

std::vector<double> decode(const std::string& bytes) {
  std::vector<double> out(bytes.size() / 8);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint64_t u = 0;
    for (int b = 0; b < 8; ++b) {
      u |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[i * 8 + b])) << (8 * b);
    }
    std::memcpy(&out[i], &u, 8);
  }
  return out;
}

void write_bytes(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path.string());
}

std::string read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("missing file " + path.string() + "; run `mopa simulate` to produce it");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_payload(const fs::path& dir, const std::string& name, const std::vector<double>& flat,
                   Index rows, Index cols, const char* dtype, const ArrayMeta& meta,
                   const std::string& config_hash) {
  fs::create_directories(dir);
  const std::string bytes = encode(flat.data(), flat.size());
  write_bytes(dir / (name + ".bin"), bytes);
  json side;
  side["file"] = name + ".bin";
  side["dtype"] = dtype;
  side["byte_order"] = "little";
  side["layout"] = "row-major";
  side["shape"] = {rows, cols};
  side["axes"] = meta.axes;
  side["units"] = meta.units;
  side["description"] = meta.description;
  side["coordinates"] = meta.coordinates;
  side["config_hash"] = config_hash;
  side["payload_fnv1a64"] = fnv1a64_hex(bytes);
  write_json(dir / (name + ".json"), side);
}

std::vector<double> read_payload(const fs::path& dir, const std::string& name, const char* dtype,
                                 Index& rows, Index& cols,
                                 const std::optional<std::string>& expected_hash, json* sidecar) {
  const json side = read_json(dir / (name + ".json"));
  try {
    if (side.at("dtype").get<std::string>() != dtype) {
      throw IoError(fmt::format("{}: expected dtype {}", name, dtype));
    }
    rows = side.at("shape").at(0).get<Index>();
    cols = side.at("shape").at(1).get<Index>();
    if (expected_hash && side.at("config_hash").get<std::string>() != *expected_hash) {
      throw IoError(fmt::format("{}: config hash mismatch (file {}, config {})", name,
                                side.at("config_hash").get<std::string>(), *expected_hash));
    }
    const std::string bytes = read_bytes(dir / side.at("file").get<std::string>());
    const std::size_t per = std::string(dtype) == "complex128" ? 16 : 8;
    if (rows < 0 || cols < 0 || bytes.size() != static_cast<std::size_t>(rows * cols) * per) {
      throw IoError(name + ": payload size does not match the sidecar shape");
    }
    if (fnv1a64_hex(bytes) != side.at("payload_fnv1a64").get<std::string>()) {
      throw IoError(name + ": payload checksum mismatch");
    }
    if (sidecar) *sidecar = side;
    return decode(bytes);
  } catch (const json::exception& e) {
    throw IoError(name + ": malformed sidecar: " + e.what());
  }
}

}  // namespace

void write_array(const fs::path& dir, const std::string& name, const RMatrix& data,
                 const ArrayMeta& meta, const std::string& config_hash) {
  std::vector<double> flat(static_cast<std::size_t>(data.size()));
  std::size_t k = 0;
  for (Index i = 0; i < data.rows(); ++i) {
    for (Index j = 0; j < data.cols(); ++j) flat[k++] = data(i, j);
  }
  write_payload(dir, name, flat, data.rows(), data.cols(), "float64", meta, config_hash);
}

void write_array(const fs::path& dir, const std::string& name, const CMatrix& data,
                 const ArrayMeta& meta, const std::string& config_hash) {
  std::vector<double> flat(static_cast<std::size_t>(2 * data.size()));
  std::size_t k = 0;
  for (Index i = 0; i < data.rows(); ++i) {
    for (Index j = 0; j < data.cols(); ++j) {
      flat[k++] = data(i, j).real();
      flat[k++] = data(i, j).imag();
    }
  }
  write_payload(dir, name, flat, data.rows(), data.cols(), "complex128", meta, config_hash);
}

RMatrix read_real_array(const fs::path& dir, const std::string& name,
                        const std::optional<std::string>& expected_hash, json* sidecar) {
  Index rows = 0, cols = 0;
  const auto flat = read_payload(dir, name, "float64", rows, cols, expected_hash, sidecar);
  RMatrix out(rows, cols);
  std::size_t k = 0;
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) out(i, j) = flat[k++];
  }
  return out;
}

CMatrix read_complex_array(const fs::path& dir, const std::string& name,
                           const std::optional<std::string>& expected_hash, json* sidecar) {
  Index rows = 0, cols = 0;
  const auto flat = read_payload(dir, name, "complex128", rows, cols, expected_hash, sidecar);
  CMatrix out(rows, cols);
  std::size_t k = 0;
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      out(i, j) = cplx(flat[k], flat[k + 1]);
      k += 2;
    }
  }
  return out;
}

bool array_exists(const fs::path& dir, const std::string& name) {
  return fs::exists(dir / (name + ".json")) && fs::exists(dir / (name + ".bin"));
}

void write_json(const fs::path& path, const json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_bytes(path, j.dump(2) + "\n");
}

json read_json(const fs::path& path) {
  const std::string text = read_bytes(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw IoError(path.string() + ": malformed JSON: " + e.what());
  }
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{}", v);
}

void CsvTable::add_row(const std::vector<double>& values) {
  std::vector<std::string> row;
  row.reserve(values.size());
  for (double v : values) row.push_back(format_double(v));
  rows.push_back(std::move(row));
}

void write_csv(const fs::path& path, const CsvTable& table) {
  std::string text;
  for (const auto& [k, v] : table.metadata) text += "# " + k + "=" + v + "\n";
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    text += (c ? "," : "") + table.columns[c];
  }
  text += "\n";
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) text += (c ? "," : "") + row[c];
    text += "\n";
  }
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_bytes(path, text);
}

}  // namespace mopa
