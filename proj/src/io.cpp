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

#include "qpt/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace qpt {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

void dump_value(const Json& v, int depth, std::string& out) {
  const std::string pad(2 * (depth + 1), ' ');
  const std::string close(2 * depth, ' ');
  switch (v.type()) {
    case Json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [key, item] : v.items()) {
        if (!first) out += ",\n";
        first = false;
        out += pad + Json(key).dump() + ": ";
        dump_value(item, depth + 1, out);
      }
      out += "\n" + close + "}";
      return;
    }
    case Json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      bool scalar = true;
      for (const auto& item : v) scalar = scalar && !item.is_structured();
      out += scalar ? "[" : "[\n";
      bool first = true;
      for (const auto& item : v) {
        if (!first) out += scalar ? ", " : ",\n";
        first = false;
        if (!scalar) out += pad;
        dump_value(item, depth + 1, out);
      }
      out += scalar ? "]" : "\n" + close + "]";
      return;
    }
    case Json::value_t::number_float: {
      const double d = v.get<double>();
      out += std::isfinite(d) ? format_double(d) : "null";
      return;
    }
    default:
      out += v.dump();
  }
}

RVector json_row(const Json& row, int n, const char* field) {
  if (!row.is_array() || static_cast<int>(row.size()) != n) {
    throw ConfigError(std::string("channel field '") + field + "' has a malformed row");
  }
  RVector out(n);
  for (int j = 0; j < n; ++j) {
    if (!row[j].is_number()) throw ConfigError(std::string("non-numeric entry in '") + field + "'");
    out(j) = row[j].get<double>();
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string dump_json(const Json& doc) {
  std::string out;
  dump_value(doc, 0, out);
  out += "\n";
  return out;
}

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

ConfigMap parse_config_text(std::string_view text) {
  ConfigMap cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    cfg[key] = value;
  }
  return cfg;
}

ConfigMap read_config_file(const std::filesystem::path& path) {
  return parse_config_text(read_text_file(path));
}

std::string canonical_config(const ConfigMap& cfg) {
  std::string out;
  for (const auto& [k, v] : cfg) out += k + "=" + v + "\n";
  return out;
}

const char* artifact_version() {
#ifdef QPT_VERSION
  return QPT_VERSION;
#else
  return "0.0.0";
#endif
}

RunMetadata make_metadata(const std::string& command, const ConfigMap& cfg, std::uint64_t seed) {
  return RunMetadata{command, hex64(fnv1a64(canonical_config(cfg))), seed, artifact_version()};
}

Json RunMetadata::to_json() const {
  return Json{{"command", command}, {"config_hash", config_hash}, {"seed", seed}, {"version", version}};
}

std::string RunMetadata::csv_comment() const {
  return "# command=" + command + " config_hash=" + config_hash + " seed=" + std::to_string(seed) +
         " version=" + version + "\n";
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot open " + path.string() + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw ConfigError("failed writing " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CsvTable::CsvTable(const RunMetadata* meta, std::vector<std::string> header)
    : columns_(header.size()) {
  if (meta != nullptr) text_ += meta->csv_comment();
  add_row(header);
}

void CsvTable::add_row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_) throw DimensionError("CSV row width does not match header");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) text_ += ',';
    text_ += cells[i];
  }
  text_ += '\n';
}

void CsvTable::add_numeric_row(const std::vector<double>& cells) {
  std::vector<std::string> s;
  s.reserve(cells.size());
  for (double v : cells) s.push_back(format_double(v));
  add_row(s);
}

Json channel_to_json(const CMatrix& choi, int dim) {
  const int n2 = dim * dim;
  if (choi.rows() != n2 || choi.cols() != n2) throw DimensionError("Choi size does not match dim");
  Json re = Json::array();
  Json im = Json::array();
  for (int r = 0; r < n2; ++r) {
    Json rr = Json::array();
    Json ri = Json::array();
    for (int c = 0; c < n2; ++c) {
      rr.push_back(choi(r, c).real());
      ri.push_back(choi(r, c).imag());
    }
    re.push_back(std::move(rr));
    im.push_back(std::move(ri));
  }
  return Json{{"dim", dim}, {"choi_re", std::move(re)}, {"choi_im", std::move(im)}};
}

ChannelFile channel_from_json(const Json& doc) {
  if (!doc.is_object() || !doc.contains("dim") || !doc.contains("choi_re") ||
      !doc.contains("choi_im")) {
    throw ConfigError("channel JSON needs dim, choi_re and choi_im");
  }
  if (!doc["dim"].is_number_integer()) throw ConfigError("channel dim must be an integer");
  const int dim = doc["dim"].get<int>();
  if (dim < 2 || dim > 16) throw ConfigError("channel dim out of range");
  const int n2 = dim * dim;
  const Json& re = doc["choi_re"];
  const Json& im = doc["choi_im"];
  if (!re.is_array() || !im.is_array() || static_cast<int>(re.size()) != n2 ||
      static_cast<int>(im.size()) != n2) {
    throw ConfigError("channel arrays must be N^2 x N^2");
  }
  ChannelFile out;
  out.dim = dim;
  out.choi.resize(n2, n2);
  for (int r = 0; r < n2; ++r) {
    const RVector a = json_row(re[r], n2, "choi_re");
    const RVector b = json_row(im[r], n2, "choi_im");
    for (int c = 0; c < n2; ++c) out.choi(r, c) = cplx(a(c), b(c));
  }
  return out;
}

ChannelFile read_channel_file(const std::filesystem::path& path) {
  return channel_from_json(parse_json(read_text_file(path), path.string()));
}

CountData CountsFile::to_data() const {
  CountData d;
  d.successes = x;
  d.trials.assign(x.size(), n_per_setting);
  return d;
}

Json counts_to_json(const CountsFile& counts) {
  Json x = Json::array();
  for (double v : counts.x) {
    if (v == std::floor(v) && std::abs(v) < 9e15) {
      x.push_back(static_cast<std::int64_t>(v));
    } else {
      x.push_back(v);
    }
  }
  Json n = counts.n_per_setting == std::floor(counts.n_per_setting)
               ? Json(static_cast<std::int64_t>(counts.n_per_setting))
               : Json(counts.n_per_setting);
  return Json{{"design", counts.design}, {"n_per_setting", n}, {"x", x}, {"seed", counts.seed}};
}

CountsFile counts_from_json(const Json& doc) {
  if (!doc.is_object()) throw ConfigError("counts JSON must be an object");
  for (const char* key : {"design", "n_per_setting", "x"}) {
    if (!doc.contains(key)) throw ConfigError(std::string("counts JSON lacks '") + key + "'");
  }
  CountsFile c;
  if (!doc["design"].is_string()) throw ConfigError("counts 'design' must be a string");
  c.design = doc["design"].get<std::string>();
  if (!doc["n_per_setting"].is_number()) throw ConfigError("counts 'n_per_setting' must be a number");
  c.n_per_setting = doc["n_per_setting"].get<double>();
  if (!(c.n_per_setting > 0.0)) throw ConfigError("counts 'n_per_setting' must be positive");
  if (!doc["x"].is_array()) throw ConfigError("counts 'x' must be an array");
  for (const auto& v : doc["x"]) {
    if (!v.is_number()) throw ConfigError("counts 'x' has a non-numeric entry");
    c.x.push_back(v.get<double>());
  }
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned() && !doc["seed"].is_number_integer()) {
      throw ConfigError("counts 'seed' must be an integer");
    }
    c.seed = doc["seed"].get<std::uint64_t>();
  }
  return c;
}

CountsFile read_counts_file(const std::filesystem::path& path) {
  return counts_from_json(parse_json(read_text_file(path), path.string()));
}

Json report_to_json(const OptReport& report) {
  return Json{{"iterations", report.iterations},
              {"final_value", report.final_value},
              {"converged", report.converged},
              {"feasibility_max", report.feasibility_max()},
              {"evaluations", report.evaluations},
              {"message", report.message}};
}

Json parse_json(std::string_view text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError("malformed JSON in " + what + ": " + e.what());
  }
}

}  // namespace qpt
