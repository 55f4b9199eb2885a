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

#include "qpt/violin.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>

namespace qpt {

namespace {

double quantile_sorted(const std::vector<double>& s, double q) {
  const double pos = q * (s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (pos - lo) * (s[hi] - s[lo]);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Round step for about `count` ticks over [lo, hi].
double tick_step(double lo, double hi, int count) {
  const double raw = (hi - lo) / count;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) return m * mag;
  }
  return 10.0 * mag;
}

}  // namespace

double silverman_bandwidth(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) return 0.0;
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1));
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  double spread = sd;
  if (iqr > 0.0) spread = std::min(sd, iqr / 1.34);
  return 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
}

KdeCurve gaussian_kde(std::span<const double> values, int points) {
  if (values.empty()) throw ConfigError("KDE of an empty sample");
  if (points < 16) throw ConfigError("KDE needs at least 16 grid points");
  KdeCurve k;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  k.min = *lo;
  k.max = *hi;
  k.mean = std::accumulate(values.begin(), values.end(), 0.0) / values.size();
  k.bandwidth = silverman_bandwidth(values);
  if (!(k.bandwidth > 0.0) || !std::isfinite(k.bandwidth)) {
    k.bandwidth = 0.0;
    k.degenerate = true;
    return k;
  }
  const double h = k.bandwidth;
  const double a = k.min - 5.0 * h;
  const double b = k.max + 5.0 * h;
  const double norm = 1.0 / (values.size() * h * std::sqrt(2.0 * std::numbers::pi));
  k.grid.resize(points);
  k.density.resize(points);
  for (int i = 0; i < points; ++i) {
    const double x = a + (b - a) * i / (points - 1);
    double s = 0.0;
    for (double v : values) {
      const double z = (x - v) / h;
      s += std::exp(-0.5 * z * z);
    }
    k.grid[i] = x;
    k.density[i] = s * norm;
  }
  return k;
}

ViolinDataset ViolinDataset::build(std::vector<ViolinGroup> groups, int points) {
  if (groups.empty()) throw ConfigError("violin plot needs at least one group");
  ViolinDataset d;
  for (auto& g : groups) {
    if (g.values.empty()) throw ConfigError("violin group '" + g.label + "' is empty");
    for (double v : g.values) {
      if (!std::isfinite(v)) throw ConfigError("violin group '" + g.label + "' has a non-finite value");
    }
    d.curves.push_back(gaussian_kde(g.values, points));
  }
  d.groups = std::move(groups);
  return d;
}

std::string render_violin_svg(const ViolinDataset& data, const ViolinStyle& style,
                              const RunMetadata* meta) {
  const int groups = static_cast<int>(data.groups.size());
  const double left = 80.0;
  const double right = 20.0;
  const double top = 40.0;
  const double bottom = 50.0;
  const int width = style.width > 0 ? style.width : static_cast<int>(left + right + 160 * groups);
  const int height = style.height;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;
  const double slot = plot_w / groups;

  // Shared value axis over all silhouettes and bars.
  double lo = data.curves[0].min;
  double hi = data.curves[0].max;
  for (const auto& c : data.curves) {
    lo = std::min(lo, c.grid.empty() ? c.min : c.grid.front());
    hi = std::max(hi, c.grid.empty() ? c.max : c.grid.back());
  }
  if (hi <= lo) {
    const double pad = std::max(1e-12, std::abs(lo) * 1e-3);
    lo -= pad;
    hi += pad;
  }
  auto ypix = [&](double v) { return top + plot_h * (hi - v) / (hi - lo); };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
         "\" height=\"" + std::to_string(height) + "\" viewBox=\"0 0 " + std::to_string(width) +
         " " + std::to_string(height) + "\">\n";
  if (meta != nullptr) {
    std::string line = meta->csv_comment();
    svg += "<!-- " + line.substr(2, line.size() - 3) + " -->\n";
  }
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!style.title.empty()) {
    svg += "<text x=\"" + fmt(width / 2.0) + "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">" +
           escape_xml(style.title) + "</text>\n";
  }
  svg += "<line x1=\"" + fmt(left) + "\" y1=\"" + fmt(top) + "\" x2=\"" + fmt(left) + "\" y2=\"" +
         fmt(top + plot_h) + "\" stroke=\"black\"/>\n";
  const double step = tick_step(lo, hi, 5);
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * step; t += step) {
    const double y = ypix(t);
    char label[32];
    std::snprintf(label, sizeof(label), "%.6g", std::abs(t) < 1e-12 * step ? 0.0 : t);
    svg += "<line x1=\"" + fmt(left - 5) + "\" y1=\"" + fmt(y) + "\" x2=\"" + fmt(left) + "\" y2=\"" +
           fmt(y) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + fmt(left - 8) + "\" y=\"" + fmt(y + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + label + "</text>\n";
  }
  if (!style.y_label.empty()) {
    svg += "<text transform=\"translate(18," + fmt(top + plot_h / 2) +
           ") rotate(-90)\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" +
           escape_xml(style.y_label) + "</text>\n";
  }

  for (int g = 0; g < groups; ++g) {
    const auto& c = data.curves[g];
    const double cx = left + slot * (g + 0.5);
    const double half = 0.4 * slot;
    if (!c.degenerate) {
      const double peak = *std::max_element(c.density.begin(), c.density.end());
      std::string pts;
      for (std::size_t i = 0; i < c.grid.size(); ++i) {
        pts += fmt(cx + half * c.density[i] / peak) + "," + fmt(ypix(c.grid[i])) + " ";
      }
      for (std::size_t i = c.grid.size(); i-- > 0;) {
        pts += fmt(cx - half * c.density[i] / peak) + "," + fmt(ypix(c.grid[i])) + " ";
      }
      pts.pop_back();
      svg += "<polygon points=\"" + pts +
             "\" fill=\"#8fb4d9\" fill-opacity=\"0.7\" stroke=\"#2b5d8a\" stroke-width=\"1\"/>\n";
    }
    svg += "<line x1=\"" + fmt(cx) + "\" y1=\"" + fmt(ypix(c.min)) + "\" x2=\"" + fmt(cx) + "\" y2=\"" +
           fmt(ypix(c.max)) + "\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
    for (double v : {c.min, c.max}) {
      svg += "<line x1=\"" + fmt(cx - 6) + "\" y1=\"" + fmt(ypix(v)) + "\" x2=\"" + fmt(cx + 6) +
             "\" y2=\"" + fmt(ypix(v)) + "\" stroke=\"black\"/>\n";
    }
    svg += "<line x1=\"" + fmt(cx - 12) + "\" y1=\"" + fmt(ypix(c.mean)) + "\" x2=\"" + fmt(cx + 12) +
           "\" y2=\"" + fmt(ypix(c.mean)) + "\" stroke=\"#c0392b\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + fmt(cx) + "\" y=\"" + fmt(top + plot_h + 20) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" +
           escape_xml(data.groups[g].label) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

std::string kde_csv(const ViolinDataset& data, const RunMetadata* meta) {
  CsvTable t(meta, {"label", "x", "density"});
  for (std::size_t g = 0; g < data.groups.size(); ++g) {
    const auto& c = data.curves[g];
    for (std::size_t i = 0; i < c.grid.size(); ++i) {
      t.add_row({data.groups[g].label, format_double(c.grid[i]), format_double(c.density[i])});
    }
  }
  return t.str();
}

}  // namespace qpt
