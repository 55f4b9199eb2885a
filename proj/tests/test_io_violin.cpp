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

#include <cmath>
#include <filesystem>
#include <limits>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "qpt/experiments.hpp"
#include "qpt/io.hpp"
#include "qpt/violin.hpp"
#include "test_support.hpp"

namespace qpt {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("qpt_io_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::size_t count_of(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + 1)) ++n;
  return n;
}

TEST(FormatDouble, RoundTripsExactly) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng) * std::pow(10.0, (i % 40) - 20);
    EXPECT_EQ(std::stod(format_double(x)), x);
  }
  EXPECT_EQ(format_double(0.5), "0.5");
  EXPECT_EQ(format_double(1.0), "1");
}

TEST(DumpJson, DeterministicAndSorted) {
  Json a;
  a["zeta"] = 1;
  a["alpha"] = {1.5, 2.0, 3.25};
  a["mid"]["y"] = "text";
  a["mid"]["x"] = std::numeric_limits<double>::quiet_NaN();
  const std::string s = dump_json(a);
  EXPECT_EQ(s, dump_json(parse_json(s, "test")));
  EXPECT_LT(s.find("\"alpha\""), s.find("\"mid\""));
  EXPECT_LT(s.find("\"mid\""), s.find("\"zeta\""));
  EXPECT_NE(s.find("null"), std::string::npos);
  EXPECT_EQ(s.back(), '\n');
  EXPECT_THROW(parse_json("{bad", "test"), ConfigError);
}

TEST(Fnv1a, KnownVectors) {
  EXPECT_EQ(hex64(fnv1a64("")), "cbf29ce484222325");
  EXPECT_EQ(hex64(fnv1a64("a")), "af63dc4c8601ec8c");
  EXPECT_EQ(hex64(fnv1a64("foobar")), "85944171f73967e8");
}

TEST(Config, ParsesAndCanonicalises) {
  const auto cfg = parse_config_text("# comment\n  b = 2 \n\na=1 # trailing\n");
  ASSERT_EQ(cfg.size(), 2u);
  EXPECT_EQ(cfg.at("a"), "1");
  EXPECT_EQ(cfg.at("b"), "2");
  EXPECT_EQ(canonical_config(cfg), "a=1\nb=2\n");
  EXPECT_THROW(parse_config_text("novalue\n"), ConfigError);
  EXPECT_THROW(parse_config_text(" = 3\n"), ConfigError);
}

TEST(Metadata, HashIgnoresOutputLocation) {
  ConfigMap a{{"seed", "1"}, {"reps", "5"}, {"out", "/tmp/a"}};
  ConfigMap b{{"seed", "1"}, {"reps", "5"}, {"out", "/tmp/b"}};
  const auto ma = RunConfig("sample", a).metadata();
  const auto mb = RunConfig("sample", b).metadata();
  EXPECT_EQ(ma.config_hash, mb.config_hash);
  EXPECT_EQ(ma.seed, 1u);
  b["reps"] = "6";
  EXPECT_NE(ma.config_hash, RunConfig("sample", b).metadata().config_hash);
  EXPECT_EQ(ma.csv_comment().rfind("# command=sample config_hash=", 0), 0u);
}

TEST(Metadata, InputFilesHashedByContent) {
  const fs::path dir = scratch("hash_inputs");
  write_text_file(dir / "x" / "in.csv", "a,b\n1,2\n");
  write_text_file(dir / "y" / "in.csv", "a,b\n1,2\n");
  write_text_file(dir / "z" / "in.csv", "a,b\n1,3\n");
  auto hash = [&](const char* sub) {
    return RunConfig("report", {{"input", (dir / sub / "in.csv").string()}}).metadata().config_hash;
  };
  EXPECT_EQ(hash("x"), hash("y"));
  EXPECT_NE(hash("x"), hash("z"));
}

TEST(CsvTable, HeaderRowsAndWidthCheck) {
  const RunMetadata meta{"x", "00", 3, "v"};
  CsvTable t(&meta, {"a", "b"});
  t.add_numeric_row({1.0, 0.25});
  t.add_row({"p", "q"});
  EXPECT_EQ(t.str(), meta.csv_comment() + "a,b\n1,0.25\np,q\n");
  EXPECT_THROW(t.add_row({"only"}), DimensionError);
}

TEST(ChannelJson, RoundTrip) {
  Rng rng(2);
  const auto choi = testing::random_cptp(2, 3, rng);
  const Json doc = channel_to_json(choi.matrix(), 2);
  const auto back = channel_from_json(parse_json(dump_json(doc), "channel"));
  EXPECT_EQ(back.dim, 2);
  EXPECT_EQ(back.choi, choi.matrix());
  Json bad = doc;
  bad["choi_re"] = Json::array({1, 2});
  EXPECT_THROW(channel_from_json(bad), ConfigError);
  EXPECT_THROW(channel_from_json(Json::object()), ConfigError);
}

TEST(CountsJson, RoundTripThroughFile) {
  const fs::path dir = scratch("counts");
  CountsFile c{"pauli4", 100.0, std::vector<double>(16, 7.0), 9};
  write_text_file(dir / "c.json", dump_json(counts_to_json(c)));
  const auto back = read_counts_file(dir / "c.json");
  EXPECT_EQ(back.design, "pauli4");
  EXPECT_EQ(back.n_per_setting, 100.0);
  EXPECT_EQ(back.x, c.x);
  EXPECT_EQ(back.seed, 9u);
  const auto data = back.to_data();
  EXPECT_EQ(data.trials, std::vector<double>(16, 100.0));
  EXPECT_THROW(counts_from_json(Json::parse(R"({"design": "pauli4"})")), ConfigError);
  EXPECT_THROW(read_counts_file(dir / "missing.json"), Error);
}

TEST(WriteTextFile, CreatesParents) {
  const fs::path dir = scratch("nested");
  write_text_file(dir / "a" / "b" / "c.txt", "hello");
  EXPECT_EQ(read_text_file(dir / "a" / "b" / "c.txt"), "hello");
}

TEST(Kde, IntegratesToOne) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(2.0, 0.5);
  std::vector<double> v;
  for (int i = 0; i < 500; ++i) v.push_back(g(rng));
  const auto k = gaussian_kde(v);
  ASSERT_EQ(k.grid.size(), 512u);
  double s = 0.0;
  for (std::size_t i = 1; i < k.grid.size(); ++i) {
    s += 0.5 * (k.density[i] + k.density[i - 1]) * (k.grid[i] - k.grid[i - 1]);
  }
  EXPECT_NEAR(s, 1.0, 1e-3);
  EXPECT_FALSE(k.degenerate);
  EXPECT_GT(k.bandwidth, 0.0);
  EXPECT_NEAR(k.mean, 2.0, 0.1);
}

TEST(Kde, SilvermanBandwidth) {
  // For {1..5}: sd = 1.5811 and IQR / 1.34 = 2 / 1.34, the smaller one wins.
  const std::vector<double> v{1, 2, 3, 4, 5};
  EXPECT_NEAR(silverman_bandwidth(v), 0.9 * (2.0 / 1.34) * std::pow(5.0, -0.2), 1e-12);
  // Zero IQR falls back to the standard deviation.
  const std::vector<double> w{0, 0, 0, 0, 0, 0, 0, 10};
  double m = 10.0 / 8, s = 0.0;
  for (double x : w) s += (x - m) * (x - m);
  EXPECT_NEAR(silverman_bandwidth(w), 0.9 * std::sqrt(s / 7) * std::pow(8.0, -0.2), 1e-12);
}

TEST(Kde, DegenerateAndInvalidInput) {
  const std::vector<double> same(10, 0.25);
  const auto k = gaussian_kde(same);
  EXPECT_TRUE(k.degenerate);
  EXPECT_EQ(k.min, 0.25);
  EXPECT_EQ(k.max, 0.25);
  EXPECT_THROW(gaussian_kde(std::vector<double>{}), ConfigError);
  EXPECT_THROW(ViolinDataset::build({{"a", {1.0, 2.0}}, {"b", {}}}), ConfigError);
}

TEST(Violin, RendersOneShapePerGroup) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 1.0);
  ViolinGroup a{"first", {}}, b{"second", {}};
  for (int i = 0; i < 100; ++i) {
    a.values.push_back(g(rng));
    b.values.push_back(3.0 + 0.5 * g(rng));
  }
  const auto data = ViolinDataset::build({a, b});
  const RunMetadata meta{"report", "abc", 1, "v"};
  const std::string svg = render_violin_svg(data, {"title", "y", 0, 420}, &meta);
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_EQ(count_of(svg, "<polygon"), 2u);
  EXPECT_NE(svg.find("first"), std::string::npos);
  EXPECT_NE(svg.find("config_hash=abc"), std::string::npos);
  EXPECT_EQ(svg, render_violin_svg(data, {"title", "y", 0, 420}, &meta));
  const std::string csv = kde_csv(data, &meta);
  EXPECT_NE(csv.find("label,x,density"), std::string::npos);
}

TEST(Violin, DegenerateGroupDrawsNoSilhouette) {
  const auto data = ViolinDataset::build({{"flat", std::vector<double>(5, 1.0)},
                                          {"spread", {0.0, 1.0, 2.0, 3.0}}});
  const std::string svg = render_violin_svg(data, {});
  EXPECT_EQ(count_of(svg, "<polygon"), 1u);
}

}  // namespace
}  // namespace qpt
