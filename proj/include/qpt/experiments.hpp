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

// Command implementations behind the qpt executable. Each command reads a
// validated RunConfig, writes its files under the output directory and
// returns the summary document it wrote.

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

#include "qpt/io.hpp"

namespace qpt {

class RunConfig {
 public:
  RunConfig(std::string command, ConfigMap values);

  const std::string& command() const { return command_; }
  const ConfigMap& values() const { return values_; }
  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  // Comma-separated numbers.
  std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback) const;

  // Mandatory for stochastic commands.
  std::uint64_t seed() const;
  std::filesystem::path out_dir() const;
  bool full_scale() const { return get_bool("full", false); }

  // Rejects keys outside `allowed` (plus the common out/seed/config/full).
  void require_known(std::initializer_list<const char*> allowed) const;

  // Hash excludes the output location, and input files enter through their
  // content rather than their path, so reruns elsewhere match byte-wise.
  RunMetadata metadata() const;

 private:
  std::string command_;
  ConfigMap values_;
};

// Near-identity truth channel with exact process fidelity `fidelity`:
// (1 - p) U-channel + p Lambda_r with Lambda_r Haar-random (Kraus rank N^2).
// U is the identity when coherent_fraction is 0; otherwise a random unitary
// carrying that fraction of the infidelity.
ChoiMatrix random_channel_with_fidelity(double fidelity, int dim, Rng& rng,
                                        double coherent_fraction = 0.0);

// Least-squares line y = a + b x; returns {slope, r^2}.
std::pair<double, double> linear_fit(const std::vector<double>& x, const std::vector<double>& y);
double median(std::vector<double> v);

Json cmd_sample(const RunConfig& cfg);
Json cmd_simulate(const RunConfig& cfg);
Json cmd_estimate(const RunConfig& cfg);
Json cmd_report(const RunConfig& cfg);
Json cmd_experiment(const std::string& name, const RunConfig& cfg);

Json experiment_fig1(const RunConfig& cfg);
Json experiment_fig3(const RunConfig& cfg);
Json experiment_fig4(const RunConfig& cfg);
Json experiment_fig5(const RunConfig& cfg);

}  // namespace qpt
