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

// Violin plots: Gaussian kernel density estimates drawn as mirrored
// silhouettes with range bars and mean ticks, written as standalone SVG.

#include <span>
#include <string>
#include <vector>

#include "qpt/io.hpp"

namespace qpt {

struct ViolinGroup {
  std::string label;
  std::vector<double> values;
};

struct KdeCurve {
  std::vector<double> grid;
  std::vector<double> density;
  double bandwidth = 0.0;
  // Zero spread: no silhouette, the group is drawn as a bar only.
  bool degenerate = false;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
};

// 0.9 min(sd, IQR / 1.34) n^{-1/5}; falls back to sd when the IQR is zero.
double silverman_bandwidth(std::span<const double> values);

// Evaluated on [min - 5h, max + 5h].
KdeCurve gaussian_kde(std::span<const double> values, int points = 512);

struct ViolinDataset {
  std::vector<ViolinGroup> groups;
  std::vector<KdeCurve> curves;

  // Throws ConfigError on an empty group.
  static ViolinDataset build(std::vector<ViolinGroup> groups, int points = 512);
};

struct ViolinStyle {
  std::string title;
  std::string y_label;
  int width = 0;  // 0: 160 px per group plus margins
  int height = 420;
};

// meta, when given, is embedded as an XML comment after the root element.
std::string render_violin_svg(const ViolinDataset& data, const ViolinStyle& style,
                              const RunMetadata* meta = nullptr);

// label,x,density rows for every non-degenerate group.
std::string kde_csv(const ViolinDataset& data, const RunMetadata* meta);

}  // namespace qpt
