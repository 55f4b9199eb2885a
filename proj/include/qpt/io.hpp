// Copyright 2026 The qpt Authors
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

// File formats: channel / counts JSON, CSV tables, key = value config files
// and the metadata block stamped on every output.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "qpt/stiefel_opt.hpp"
#include "qpt/tomography.hpp"

namespace qpt {

using Json = nlohmann::json;

// 17 significant digits, '.' decimal point regardless of locale.
std::string format_double(double v);

// Pretty-printed JSON with every double written by format_double. Object
// keys come out sorted, so equal documents serialise to equal bytes.
std::string dump_json(const Json& doc);

std::uint64_t fnv1a64(std::string_view text);
std::string hex64(std::uint64_t v);

using ConfigMap = std::map<std::string, std::string>;

// `key = value` lines, '#' starts a comment, blank lines ignored.
ConfigMap parse_config_text(std::string_view text);
ConfigMap read_config_file(const std::filesystem::path& path);
// Sorted `key=value` lines; the hashed form of a configuration.
std::string canonical_config(const ConfigMap& cfg);

struct RunMetadata {
  std::string command;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string version;

  Json to_json() const;
  // "# command=... config_hash=... seed=... version=..."
  std::string csv_comment() const;
};

RunMetadata make_metadata(const std::string& command, const ConfigMap& cfg, std::uint64_t seed);
const char* artifact_version();

// Writes bytes verbatim (LF line endings); creates parent directories.
void write_text_file(const std::filesystem::path& path, std::string_view content);
std::string read_text_file(const std::filesystem::path& path);

// Comma-separated table with a metadata comment line and header row.
class CsvTable {
 public:
  CsvTable(const RunMetadata* meta, std::vector<std::string> header);

  void add_row(const std::vector<std::string>& cells);
  void add_numeric_row(const std::vector<double>& cells);
  std::string str() const { return text_; }
  std::size_t columns() const { return columns_; }

 private:
  std::string text_;
  std::size_t columns_;
};

// Channel JSON: {"dim", "choi_re", "choi_im"} with row-major nested arrays.
Json channel_to_json(const CMatrix& choi, int dim);
struct ChannelFile {
  int dim = 0;
  CMatrix choi;
};
ChannelFile channel_from_json(const Json& doc);
ChannelFile read_channel_file(const std::filesystem::path& path);

// Counts JSON: {"design", "n_per_setting", "x", "seed"}.
struct CountsFile {
  std::string design;
  double n_per_setting = 0.0;
  std::vector<double> x;
  std::uint64_t seed = 0;

  CountData to_data() const;
};
Json counts_to_json(const CountsFile& counts);
CountsFile counts_from_json(const Json& doc);
CountsFile read_counts_file(const std::filesystem::path& path);

Json report_to_json(const OptReport& report);

Json parse_json(std::string_view text, const std::string& what);

}  // namespace qpt
