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

#include "qpt/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <sstream>

#include "qpt/channel_reps.hpp"
#include "qpt/dephasing_bayes.hpp"
#include "qpt/frame_bingham.hpp"
#include "qpt/parallel.hpp"
#include "qpt/tomography.hpp"
#include "qpt/violin.hpp"

namespace qpt {

namespace {

std::string label_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t tag, std::uint64_t a,
                          std::uint64_t b = 0) {
  return derive_seed(derive_seed(derive_seed(seed, tag), a), b);
}

void write_json(const RunConfig& cfg, const std::string& name, const Json& doc) {
  write_text_file(cfg.out_dir() / name, dump_json(doc));
}

Json choi_json(const CMatrix& choi, int dim) { return channel_to_json(choi, dim); }

double max_abs(const Eigen::Matrix4d& m) { return m.cwiseAbs().maxCoeff(); }

std::string ptm_csv(const Eigen::Matrix4d& m, const RunMetadata& meta) {
  static const char* names[4] = {"I", "X", "Y", "Z"};
  CsvTable t(&meta, {"row", "I", "X", "Y", "Z"});
  for (int r = 0; r < 4; ++r) {
    t.add_row({names[r], format_double(m(r, 0)), format_double(m(r, 1)), format_double(m(r, 2)),
               format_double(m(r, 3))});
  }
  return t.str();
}

// Splits one CSV line; no quoting is used by any file this tool writes.
std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

//----------------------------------------------------------------------------
// Frame-Bingham fidelity sweep (sample command, fig3)
//----------------------------------------------------------------------------

Json run_sample_sweep(const RunConfig& cfg, const std::string& prefix, int default_reps) {
  const std::uint64_t seed = cfg.seed();
  const auto thetas = cfg.get_list("thetas", {10.0, 100.0, 1000.0, 10000.0});
  const int reps = static_cast<int>(cfg.get_int("reps", default_reps));
  const int dim = static_cast<int>(cfg.get_int("dim", 2));
  const int k = static_cast<int>(cfg.get_int("kraus_rank", dim * dim));
  const bool emit = cfg.get_bool("emit_channels", false);
  if (thetas.empty()) throw ConfigError("theta grid is empty");
  for (double t : thetas) {
    // Scales past the sampler's conditioning guard surface as numeric failures.
    if (!std::isfinite(t) || t < 0.0) throw ConfigError("invalid theta " + label_number(t));
  }
  if (dim < 2 || dim > 4) throw ConfigError("dim must be 2, 3 or 4");
  if (k < 1 || k > dim * dim) throw ConfigError("kraus_rank must lie in [1, N^2]");
  if (reps < 2) throw ConfigError("reps must be at least 2");

  ChainConfig chain;
  chain.samples = reps;
  chain.burn_in = static_cast<int>(cfg.get_int("burn_in", 500));
  chain.thinning = static_cast<int>(cfg.get_int("thinning", 5));
  chain.joint_moves = static_cast<int>(cfg.get_int("joint_moves", 4));
  chain.validate();

  const std::size_t g = thetas.size();
  std::vector<std::vector<StiefelPoint>> samples(g);
  parallel_for(g, [&](std::size_t i) {
    ChainConfig local = chain;
    local.seed = derive_seed(seed, i);
    samples[i] = sample_chain(depolarizing_parameter(thetas[i], dim), k, local);
  });

  const RunMetadata meta = cfg.metadata();
  CsvTable all(&meta, {"theta", "sample_index", "process_fidelity"});
  Json groups = Json::array();
  std::vector<ViolinGroup> violin;
  std::vector<double> log_theta;
  std::vector<double> log_infid;
  bool monotone = true;
  double prev_mean = -1.0;
  for (std::size_t i = 0; i < g; ++i) {
    const std::vector<double> fid = sample_fidelities(samples[i]);
    const std::string label = label_number(thetas[i]);
    CsvTable one(&meta, {"sample_index", "process_fidelity"});
    double sum = 0.0;
    double sq = 0.0;
    for (std::size_t s = 0; s < fid.size(); ++s) {
      one.add_row({std::to_string(s), format_double(fid[s])});
      all.add_row({format_double(thetas[i]), std::to_string(s), format_double(fid[s])});
      sum += fid[s];
      sq += fid[s] * fid[s];
    }
    write_text_file(cfg.out_dir() / (prefix + "_fidelity_theta_" + label + ".csv"), one.str());
    const double n = static_cast<double>(fid.size());
    const double mean = sum / n;
    const double var = std::max(0.0, (sq - n * mean * mean) / (n - 1.0));
    const auto [mn, mx] = std::minmax_element(fid.begin(), fid.end());
    groups.push_back(Json{{"theta", thetas[i]},
                          {"samples", fid.size()},
                          {"mean", mean},
                          {"min", *mn},
                          {"max", *mx},
                          {"stderr", std::sqrt(var / n)},
                          {"mean_choi", choi_json(mean_choi(samples[i]), dim)}});
    if (i > 0 && !(mean > prev_mean)) monotone = false;
    prev_mean = mean;
    if (thetas[i] > 0.0 && mean < 1.0) {
      log_theta.push_back(std::log10(thetas[i]));
      log_infid.push_back(std::log10(1.0 - mean));
    }
    std::vector<double> infid;
    for (double f : fid) infid.push_back(std::log10(std::max(1.0 - f, 1e-300)));
    violin.push_back({"theta=" + label, std::move(infid)});
    if (emit) {
      for (std::size_t s = 0; s < samples[i].size(); ++s) {
        Json doc = choi_json(stiefel_to_choi(samples[i][s]).matrix(), dim);
        doc["metadata"] = meta.to_json();
        doc["theta"] = thetas[i];
        doc["sample_index"] = s;
        write_json(cfg, "channels/theta_" + label + "_sample_" + std::to_string(s) + ".json", doc);
      }
    }
  }
  write_text_file(cfg.out_dir() / (prefix + "_fidelity.csv"), all.str());

  Json summary{{"metadata", meta.to_json()},
               {"groups", groups},
               {"monotone_mean", monotone},
               {"dim", dim},
               {"kraus_rank", k}};
  if (log_theta.size() >= 2) {
    const auto [slope, r2] = linear_fit(log_theta, log_infid);
    summary["loglog_slope"] = slope;
    summary["loglog_r2"] = r2;
  }
  write_json(cfg, prefix + "_summary.json", summary);

  const ViolinDataset data = ViolinDataset::build(std::move(violin));
  write_text_file(cfg.out_dir() / (prefix + "_violin.svg"),
                  render_violin_svg(data, {"Sampled process infidelity", "log10(1 - F)", 0, 420}, &meta));
  write_text_file(cfg.out_dir() / (prefix + "_kde.csv"), kde_csv(data, &meta));
  return summary;
}

//----------------------------------------------------------------------------
// MLE vs MAP replications (fig4, fig5)
//----------------------------------------------------------------------------

struct Estimate {
  double fidelity = 0.0;
  double diamond = 0.0;
  bool diamond_converged = true;
  CMatrix choi;
};

struct Replication {
  CMatrix truth;
  std::vector<Estimate> mle;  // per n
  std::vector<Estimate> map;
  bool zero_prior_identical = true;
  std::vector<Estimate> sweep;  // pauli6 MLE per sweep n
};

Estimate score(const EstimationResult& r, const ChoiMatrix& truth) {
  Estimate e;
  e.choi = r.estimate.matrix();
  e.fidelity = process_fidelity(r.estimate, CMatrix::Identity(truth.dim(), truth.dim()));
  const DiamondResult d = diamond_distance(r.estimate, truth);
  e.diamond = d.value;
  e.diamond_converged = d.converged;
  return e;
}

struct ComparisonSetup {
  std::string prefix;
  bool random_truth = false;
  std::vector<double> ns;
  std::vector<double> sweep_ns;  // pauli6 MLE-only sweep (fig5)
};

Json run_comparison(const RunConfig& cfg, const ComparisonSetup& setup) {
  const std::uint64_t seed = cfg.seed();
  const int reps = static_cast<int>(cfg.get_int("reps", cfg.full_scale() ? 100 : 20));
  const double f_true = cfg.get_double("truth_fidelity", 0.9999);
  const double theta = cfg.get_double("theta", 1e4);
  const int restarts = static_cast<int>(cfg.get_int("restarts", 5));
  const double coherent = cfg.get_double("coherent_fraction", 0.0);
  const ExperimentDesign design = design_by_name(cfg.get_string("design", "pauli4"));
  const std::vector<double> ns = cfg.get_list("ns", setup.ns);
  const std::vector<double> sweep_ns = cfg.get_list("sweep_ns", setup.sweep_ns);
  if (reps < 1) throw ConfigError("reps must be positive");
  if (!(f_true > 0.0 && f_true <= 1.0)) throw ConfigError("truth_fidelity must lie in (0, 1]");
  if (!(theta >= 0.0 && theta < kMaxThetaScale)) throw ConfigError("theta must lie in [0, 1e6)");
  if (restarts < 1) throw ConfigError("restarts must be positive");
  if (ns.empty()) throw ConfigError("ns is empty");
  for (double n : ns) {
    if (!(n >= 1.0) || n != std::floor(n) || n > 1e9) throw ConfigError("ns must be positive integers");
  }
  for (double n : sweep_ns) {
    if (!(n >= 1.0) || n != std::floor(n) || n > 1e9) throw ConfigError("sweep_ns must be positive integers");
  }
  const int dim = design.dim();
  const NaturalParameter prior = depolarizing_parameter(theta, dim);
  const NaturalParameter zero = NaturalParameter::zero(dim);
  const ExperimentDesign pauli6 = design_pauli6();
  const ChoiMatrix depol = depolarizing_channel(f_true);

  std::vector<Replication> runs(static_cast<std::size_t>(reps));
  parallel_for(runs.size(), [&](std::size_t r) {
    Replication& rep = runs[r];
    Rng truth_rng = make_rng(stream_seed(seed, 1, r), 0);
    const ChoiMatrix truth =
        setup.random_truth ? random_channel_with_fidelity(f_true, dim, truth_rng, coherent) : depol;
    rep.truth = truth.matrix();
    for (std::size_t j = 0; j < ns.size(); ++j) {
      Rng data_rng = make_rng(stream_seed(seed, 2, r, j), 0);
      const CountData data = simulate_counts(truth, design, static_cast<int>(ns[j]), data_rng);
      EstimationOptions opts;
      opts.optimizer.restarts = restarts;
      opts.optimizer.rng_seed = stream_seed(seed, 3, r, j);
      const EstimationResult ml = mle(data, design, opts);
      rep.mle.push_back(score(ml, truth));
      rep.map.push_back(score(map_estimate(data, design, prior, opts), truth));
      if (j + 1 == ns.size()) {
        const EstimationResult m0 = map_estimate(data, design, zero, opts);
        rep.zero_prior_identical = m0.estimate.matrix() == ml.estimate.matrix() &&
                                   m0.objective == ml.objective;
      }
    }
    for (std::size_t j = 0; j < sweep_ns.size(); ++j) {
      Rng data_rng = make_rng(stream_seed(seed, 4, r, j), 0);
      const CountData data = simulate_counts(truth, pauli6, static_cast<int>(sweep_ns[j]), data_rng);
      EstimationOptions opts;
      opts.optimizer.restarts = restarts;
      opts.optimizer.rng_seed = stream_seed(seed, 5, r, j);
      rep.sweep.push_back(score(mle(data, pauli6, opts), truth));
    }
  });

  const RunMetadata meta = cfg.metadata();
  CsvTable table(&meta, {"n", "replication", "method", "process_fidelity", "diamond_error"});
  std::vector<ViolinGroup> violin;
  Json per_n = Json::array();
  int unconverged = 0;
  for (std::size_t j = 0; j < ns.size(); ++j) {
    std::vector<double> fm, fp, dm, dp;
    for (std::size_t r = 0; r < runs.size(); ++r) {
      const Estimate& a = runs[r].mle[j];
      const Estimate& b = runs[r].map[j];
      table.add_row({label_number(ns[j]), std::to_string(r), "mle", format_double(a.fidelity),
                     format_double(a.diamond)});
      table.add_row({label_number(ns[j]), std::to_string(r), "map", format_double(b.fidelity),
                     format_double(b.diamond)});
      fm.push_back(a.fidelity);
      fp.push_back(b.fidelity);
      dm.push_back(a.diamond);
      dp.push_back(b.diamond);
      unconverged += !a.diamond_converged + !b.diamond_converged;
    }
    violin.push_back({"MLE n=" + label_number(ns[j]), fm});
    violin.push_back({"MAP n=" + label_number(ns[j]), fp});
    const double med_fm = median(fm);
    const double med_fp = median(fp);
    per_n.push_back(Json{{"n", ns[j]},
                         {"median_fidelity_mle", med_fm},
                         {"median_fidelity_map", med_fp},
                         {"median_diamond_mle", median(dm)},
                         {"median_diamond_map", median(dp)},
                         {"fidelity_relative_gap", std::abs(med_fm - med_fp) / std::max(med_fm, med_fp)}});
  }
  write_text_file(cfg.out_dir() / (setup.prefix + "_estimates.csv"), table.str());

  bool identical = true;
  for (const auto& r : runs) identical = identical && r.zero_prior_identical;

  Json summary{{"metadata", meta.to_json()},
               {"design", design.name()},
               {"replications", reps},
               {"truth_fidelity", f_true},
               {"prior_theta", theta},
               {"restarts", restarts},
               {"per_n", per_n},
               {"zero_prior_map_identical", identical},
               {"unconverged_diamond", unconverged}};

  // Exemplar at the smallest n: the replication with the median MLE error.
  {
    std::vector<std::pair<double, std::size_t>> order;
    for (std::size_t r = 0; r < runs.size(); ++r) order.emplace_back(runs[r].mle[0].diamond, r);
    std::sort(order.begin(), order.end());
    const std::size_t ex = order[(order.size() - 1) / 2].second;
    const Eigen::Matrix4d truth_ptm = choi_to_ptm(ChoiMatrix::unchecked(runs[ex].truth)).entries;
    const Eigen::Matrix4d d_mle =
        choi_to_ptm(ChoiMatrix::unchecked(runs[ex].mle[0].choi)).entries - truth_ptm;
    const Eigen::Matrix4d d_map =
        choi_to_ptm(ChoiMatrix::unchecked(runs[ex].map[0].choi)).entries - truth_ptm;
    write_text_file(cfg.out_dir() / (setup.prefix + "_ptm_diff_mle.csv"), ptm_csv(d_mle, meta));
    write_text_file(cfg.out_dir() / (setup.prefix + "_ptm_diff_map.csv"), ptm_csv(d_map, meta));
    write_text_file(cfg.out_dir() / (setup.prefix + "_ptm_truth.csv"), ptm_csv(truth_ptm, meta));
    const double e_mle = max_abs(d_mle);
    const double e_map = max_abs(d_map);
    summary["exemplar"] = Json{{"n", ns[0]},
                               {"replication", ex},
                               {"max_abs_ptm_error_mle", e_mle},
                               {"max_abs_ptm_error_map", e_map},
                               {"improvement", e_map > 0.0 ? e_mle / e_map : 0.0},
                               {"truth", choi_json(runs[ex].truth, dim)}};
  }

  if (!sweep_ns.empty()) {
    CsvTable sweep(&meta, {"n", "replication", "process_fidelity", "diamond_error"});
    Json medians = Json::array();
    std::vector<double> med;
    for (std::size_t j = 0; j < sweep_ns.size(); ++j) {
      std::vector<double> d;
      for (std::size_t r = 0; r < runs.size(); ++r) {
        const Estimate& e = runs[r].sweep[j];
        sweep.add_row({label_number(sweep_ns[j]), std::to_string(r), format_double(e.fidelity),
                       format_double(e.diamond)});
        d.push_back(e.diamond);
      }
      med.push_back(median(d));
    }
    // Ratio of each median to the n^{-1/2} law anchored at the first n.
    double worst = 1.0;
    for (std::size_t j = 0; j < sweep_ns.size(); ++j) {
      const double predicted = med[0] * std::sqrt(sweep_ns[0] / sweep_ns[j]);
      const double ratio = med[j] / predicted;
      worst = std::max(worst, std::max(ratio, 1.0 / ratio));
      medians.push_back(Json{{"n", sweep_ns[j]}, {"median_diamond_mle", med[j]}, {"ratio_to_sqrt_law", ratio}});
    }
    std::vector<double> lx, ly;
    for (std::size_t j = 0; j < sweep_ns.size(); ++j) {
      lx.push_back(std::log10(sweep_ns[j]));
      ly.push_back(std::log10(med[j]));
    }
    Json s{{"design", "pauli6"}, {"medians", medians}, {"worst_ratio", worst}};
    if (lx.size() >= 2) s["loglog_slope"] = linear_fit(lx, ly).first;
    summary["sqrt_n_sweep"] = s;
    write_text_file(cfg.out_dir() / (setup.prefix + "_pauli6_mle.csv"), sweep.str());
  }

  write_json(cfg, setup.prefix + "_summary.json", summary);
  const ViolinDataset data = ViolinDataset::build(std::move(violin));
  write_text_file(cfg.out_dir() / (setup.prefix + "_violin.svg"),
                  render_violin_svg(data, {"Estimated process fidelity", "process fidelity", 0, 420}, &meta));
  write_text_file(cfg.out_dir() / (setup.prefix + "_kde.csv"), kde_csv(data, &meta));
  return summary;
}

Json posterior_panel(const RunConfig& cfg, const std::string& name, const LogAngleDensity& prior,
                     int x, int n, int grid_size) {
  const AngleGrid grid = grid_posterior(prior, x, n, grid_size);
  const RunMetadata meta = cfg.metadata();
  CsvTable t(&meta, {"theta", "prior", "likelihood", "posterior"});
  for (std::size_t g = 0; g < grid.theta.size(); ++g) {
    t.add_numeric_row({grid.theta[g], grid.prior[g], grid.likelihood[g], grid.posterior[g]});
  }
  write_text_file(cfg.out_dir() / (name + "_posterior.csv"), t.str());
  const PosteriorSummary ps = summarize_density(grid.theta, grid.prior, grid.spacing);
  const FidelityMoments fp = fidelity_moments(grid.theta, grid.prior, grid.spacing);
  const FidelityMoments fq = fidelity_moments(grid.theta, grid.posterior, grid.spacing);
  const auto& s = grid.summary;
  Json doc{{"metadata", meta.to_json()},
           {"mode", s.mode},
           {"circular_mean_2theta", s.circular_mean_2theta},
           {"ci_low", s.ci_low},
           {"ci_high", s.ci_high},
           {"circular_variance", s.circular_variance},
           {"folded_circular_variance", s.folded_circular_variance},
           {"posterior_fidelity_mean", fq.mean},
           {"posterior_fidelity_sd", fq.stddev},
           {"prior_mode", ps.mode},
           {"prior_circular_variance", ps.circular_variance},
           {"prior_folded_circular_variance", ps.folded_circular_variance},
           {"prior_fidelity_mean", fp.mean},
           {"prior_fidelity_sd", fp.stddev},
           {"likelihood_mode", std::acos(2.0 * x / n - 1.0) / 2.0},
           {"grid_size", grid_size},
           {"grid_spacing", grid.spacing}};
  write_json(cfg, name + "_summary.json", doc);
  return doc;
}

}  // namespace

//----------------------------------------------------------------------------
// RunConfig
//----------------------------------------------------------------------------

RunConfig::RunConfig(std::string command, ConfigMap values)
    : command_(std::move(command)), values_(std::move(values)) {}

std::string RunConfig::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

std::int64_t RunConfig::get_int(const std::string& key, std::int64_t fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string& s = it->second;
  std::int64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    // Accept integral floats such as 1e4.
    const double d = get_double(key, 0.0);
    if (d != std::floor(d) || std::abs(d) > 9e15) throw ConfigError("'" + key + "' must be an integer");
    return static_cast<std::int64_t>(d);
  }
  return v;
}

double RunConfig::get_double(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string& s = it->second;
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ConfigError("'" + key + "' must be a finite number, got '" + s + "'");
  }
  return v;
}

bool RunConfig::get_bool(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string& s = it->second;
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError("'" + key + "' must be true or false");
}

std::vector<double> RunConfig::get_list(const std::string& key,
                                        const std::vector<double>& fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<double> out;
  std::istringstream in(it->second);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto a = item.find_first_not_of(" \t");
    const auto b = item.find_last_not_of(" \t");
    if (a == std::string::npos) continue;
    const std::string cell = item.substr(a, b - a + 1);
    double v = 0.0;
    const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (res.ec != std::errc() || res.ptr != cell.data() + cell.size() || !std::isfinite(v)) {
      throw ConfigError("'" + key + "' has a non-numeric entry '" + cell + "'");
    }
    out.push_back(v);
  }
  return out;
}

std::uint64_t RunConfig::seed() const {
  const auto it = values_.find("seed");
  if (it == values_.end()) throw ConfigError(command_ + " is stochastic: --seed is required");
  const std::string& s = it->second;
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ConfigError("seed must be an unsigned 64-bit integer");
  }
  return v;
}

std::filesystem::path RunConfig::out_dir() const { return get_string("out", "."); }

void RunConfig::require_known(std::initializer_list<const char*> allowed) const {
  std::set<std::string> ok{"out", "seed", "config", "full"};
  for (const char* a : allowed) ok.insert(a);
  for (const auto& [k, v] : values_) {
    if (!ok.count(k)) throw ConfigError("unknown option '" + k + "' for " + command_);
  }
}

RunMetadata RunConfig::metadata() const {
  ConfigMap hashed = values_;
  hashed.erase("out");
  hashed.erase("config");
  for (const char* key : {"counts", "input", "channel", "theta_file"}) {
    const auto it = hashed.find(key);
    if (it == hashed.end()) continue;
    std::error_code ec;
    if (std::filesystem::is_regular_file(it->second, ec)) {
      it->second = "content:" + hex64(fnv1a64(read_text_file(it->second)));
    }
  }
  std::uint64_t s = 0;
  if (has("seed")) s = seed();
  return make_metadata(command_, hashed, s);
}

//----------------------------------------------------------------------------
// Helpers
//----------------------------------------------------------------------------

ChoiMatrix random_channel_with_fidelity(double fidelity, int dim, Rng& rng,
                                        double coherent_fraction) {
  if (!(fidelity > 0.0 && fidelity < 1.0)) throw ConfigError("target fidelity must lie in (0, 1)");
  if (!(coherent_fraction >= 0.0 && coherent_fraction < 1.0)) {
    throw ConfigError("coherent_fraction must lie in [0, 1)");
  }
  const int n2 = dim * dim;
  CMatrix u = CMatrix::Identity(dim, dim);
  if (coherent_fraction > 0.0) {
    // exp(-i eps H), H traceless Hermitian, eps tuned to the unitary's share.
    const double target_u = 1.0 - coherent_fraction * (1.0 - fidelity);
    const CMatrix g = complex_gaussian(dim, dim, rng);
    CMatrix h = 0.5 * (g + g.adjoint());
    h -= (h.trace() / static_cast<double>(dim)) * CMatrix::Identity(dim, dim);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
    const RVector ev = es.eigenvalues();
    const double spread = ev.cwiseAbs().maxCoeff();
    if (!(spread > 0.0)) throw NumericError("degenerate random generator");
    auto unitary_fid = [&](double eps) {
      cplx tr = 0.0;
      for (Eigen::Index i = 0; i < ev.size(); ++i) tr += std::polar(1.0, -eps * ev(i));
      return std::norm(tr) / (n2 * 1.0);
    };
    double lo = 0.0;
    double hi = 0.5 * std::acos(0.0) / spread;  // fidelity still decreasing here
    if (unitary_fid(hi) > target_u) throw NumericError("unitary fidelity bracket failed");
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (unitary_fid(mid) > target_u ? lo : hi) = mid;
    }
    const double eps = 0.5 * (lo + hi);
    CVector phases(dim);
    for (int i = 0; i < dim; ++i) phases(i) = std::polar(1.0, -eps * ev(i));
    u = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
  }
  const CMatrix lam_u = unitary_channel(u).matrix();
  const double a = process_fidelity(ChoiMatrix::unchecked(lam_u), CMatrix::Identity(dim, dim));

  const CMatrix lam_r = stiefel_to_choi(sample_uniform(dim, n2, rng)).matrix();
  const double b = process_fidelity(ChoiMatrix::unchecked(lam_r), CMatrix::Identity(dim, dim));
  if (!(a > fidelity && b < fidelity)) throw NumericError("cannot reach the target fidelity");
  const double p = (a - fidelity) / (a - b);
  CMatrix lam = (1.0 - p) * lam_u + p * lam_r;
  lam = 0.5 * (lam + lam.adjoint()).eval();
  return ChoiMatrix(std::move(lam));
}

std::pair<double, double> linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DimensionError("linear fit needs >= 2 points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw NumericError("linear fit with constant abscissa");
  const double slope = sxy / sxx;
  const double r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return {slope, r2};
}

double median(std::vector<double> v) {
  if (v.empty()) throw DimensionError("median of an empty sample");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

//----------------------------------------------------------------------------
// Commands
//----------------------------------------------------------------------------

Json cmd_sample(const RunConfig& cfg) {
  cfg.require_known({"thetas", "reps", "burn_in", "thinning", "dim", "kraus_rank", "emit_channels",
                     "joint_moves"});
  return run_sample_sweep(cfg, "sample", cfg.full_scale() ? 1000 : 200);
}

Json cmd_simulate(const RunConfig& cfg) {
  cfg.require_known({"design", "n", "truth", "fidelity", "channel", "expected", "coherent_fraction"});
  const std::uint64_t seed = cfg.seed();
  const ExperimentDesign design = design_by_name(cfg.get_string("design", "pauli6"));
  const double n = static_cast<double>(cfg.get_int("n", 1000));
  if (n < 1) throw ConfigError("n must be positive");
  const std::string kind = cfg.get_string("truth", "depolarizing");
  const double f = cfg.get_double("fidelity", 0.9999);
  Rng rng = make_rng(seed, 0);
  const ChoiMatrix truth = [&] {
    if (kind == "identity") return identity_channel(design.dim());
    if (kind == "depolarizing") return depolarizing_channel(f);
    if (kind == "random") {
      return random_channel_with_fidelity(f, design.dim(), rng, cfg.get_double("coherent_fraction", 0.0));
    }
    if (kind == "file") {
      if (!cfg.has("channel")) throw ConfigError("truth=file needs channel=<path>");
      const ChannelFile c = read_channel_file(cfg.get_string("channel", ""));
      return ChoiMatrix(c.choi);
    }
    throw ConfigError("truth must be identity, depolarizing, random or file");
  }();
  if (truth.dim() != design.dim()) throw ConfigError("truth channel does not match design dimension");
  Rng data_rng = make_rng(seed, 1);
  const CountData data = cfg.get_bool("expected", false)
                             ? expected_counts(truth, design, n)
                             : simulate_counts(truth, design, static_cast<int>(n), data_rng);
  const RunMetadata meta = cfg.metadata();
  Json counts = counts_to_json(CountsFile{design.name(), n, data.successes, seed});
  counts["metadata"] = meta.to_json();
  write_json(cfg, "counts.json", counts);
  Json t = channel_to_json(truth.matrix(), truth.dim());
  t["metadata"] = meta.to_json();
  t["process_fidelity"] = process_fidelity(truth, CMatrix::Identity(truth.dim(), truth.dim()));
  write_json(cfg, "truth.json", t);
  return Json{{"metadata", meta.to_json()}, {"design", design.name()}, {"n_per_setting", n},
              {"process_fidelity", t["process_fidelity"]}};
}

Json cmd_estimate(const RunConfig& cfg) {
  cfg.require_known({"counts", "mode", "theta", "theta_file", "kraus_rank", "restarts", "design",
                     "max_iters"});
  const std::uint64_t seed = cfg.seed();
  if (!cfg.has("counts")) throw ConfigError("estimate needs counts=<path>");
  const CountsFile counts = read_counts_file(cfg.get_string("counts", ""));
  const ExperimentDesign design = design_by_name(counts.design);
  if (cfg.has("design") && cfg.get_string("design", "") != counts.design) {
    throw ConfigError("design mismatch: counts were taken with " + counts.design);
  }
  const CountData data = counts.to_data();
  data.validate(design.size());

  EstimationOptions opts;
  opts.kraus_rank = static_cast<int>(cfg.get_int("kraus_rank", 0));
  opts.optimizer.restarts = static_cast<int>(cfg.get_int("restarts", 5));
  opts.optimizer.max_iters = static_cast<int>(cfg.get_int("max_iters", opts.optimizer.max_iters));
  opts.optimizer.rng_seed = seed;
  const std::string mode = cfg.get_string("mode", "mle");
  const int dim = design.dim();
  std::optional<EstimationResult> res;
  if (mode == "mle") {
    res.emplace(mle(data, design, opts));
  } else if (mode == "map") {
    if (cfg.has("theta_file")) {
      const ChannelFile f = read_channel_file(cfg.get_string("theta_file", ""));
      if (f.dim != dim) throw ConfigError("theta_file dimension does not match design");
      res.emplace(map_estimate(data, design, NaturalParameter(f.choi), opts));
    } else if (cfg.has("theta")) {
      const double theta = cfg.get_double("theta", 0.0);
      if (!(theta >= 0.0)) throw ConfigError("theta must be >= 0");
      res.emplace(map_estimate(data, design, depolarizing_parameter(theta, dim), opts));
    } else {
      throw ConfigError("map needs theta=<value> or theta_file=<path>");
    }
  } else {
    throw ConfigError("mode must be mle or map");
  }
  const RunMetadata meta = cfg.metadata();
  Json doc = channel_to_json(res->estimate.matrix(), dim);
  doc["metadata"] = meta.to_json();
  doc["mode"] = mode;
  doc["report"] = report_to_json(res->report);
  doc["process_fidelity"] = process_fidelity(res->estimate, CMatrix::Identity(dim, dim));
  doc["incomplete_design"] = res->incomplete_design;
  doc["clamp_events"] = res->clamp_events;
  doc["objective"] = res->objective;
  write_json(cfg, "estimate.json", doc);
  return doc;
}

Json cmd_report(const RunConfig& cfg) {
  cfg.require_known({"input", "group_column", "value_column", "transform", "title", "y_label",
                     "name"});
  if (!cfg.has("input")) throw ConfigError("report needs input=<csv>");
  const std::string group_col = cfg.get_string("group_column", "theta");
  const std::string value_col = cfg.get_string("value_column", "process_fidelity");
  const std::string transform = cfg.get_string("transform", "none");
  if (transform != "none" && transform != "infidelity" && transform != "log10_infidelity") {
    throw ConfigError("transform must be none, infidelity or log10_infidelity");
  }
  std::istringstream in(read_text_file(cfg.get_string("input", "")));
  std::string line;
  std::vector<std::string> header;
  int gi = -1, vi = -1;
  std::vector<ViolinGroup> groups;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split_csv(line);
    if (header.empty()) {
      header = cells;
      for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == group_col) gi = static_cast<int>(i);
        if (header[i] == value_col) vi = static_cast<int>(i);
      }
      if (vi < 0) throw ConfigError("input has no column '" + value_col + "'");
      continue;
    }
    if (cells.size() != header.size()) throw ConfigError("ragged CSV row in report input");
    const std::string label = gi >= 0 ? group_col + "=" + cells[gi] : value_col;
    double v = 0.0;
    const auto res = std::from_chars(cells[vi].data(), cells[vi].data() + cells[vi].size(), v);
    if (res.ec != std::errc()) throw ConfigError("non-numeric value '" + cells[vi] + "'");
    if (transform == "infidelity") v = 1.0 - v;
    if (transform == "log10_infidelity") v = std::log10(std::max(1.0 - v, 1e-300));
    auto it = std::find_if(groups.begin(), groups.end(), [&](const ViolinGroup& g) { return g.label == label; });
    if (it == groups.end()) {
      groups.push_back({label, {}});
      it = groups.end() - 1;
    }
    it->values.push_back(v);
  }
  if (header.empty()) throw ConfigError("report input is empty");
  if (groups.empty()) throw ConfigError("report input has no rows (empty group)");
  const ViolinDataset data = ViolinDataset::build(std::move(groups));
  const RunMetadata meta = cfg.metadata();
  const std::string name = cfg.get_string("name", "violin");
  const std::string y_label = cfg.get_string("y_label", transform == "none" ? value_col : transform);
  const std::string svg = render_violin_svg(data, {cfg.get_string("title", ""), y_label, 0, 420}, &meta);
  write_text_file(cfg.out_dir() / (name + ".svg"), svg);
  write_text_file(cfg.out_dir() / (name + "_kde.csv"), kde_csv(data, &meta));
  Json doc{{"metadata", meta.to_json()}, {"groups", Json::array()}};
  for (std::size_t g = 0; g < data.groups.size(); ++g) {
    doc["groups"].push_back(Json{{"label", data.groups[g].label},
                                 {"count", data.groups[g].values.size()},
                                 {"bandwidth", data.curves[g].bandwidth},
                                 {"degenerate", data.curves[g].degenerate},
                                 {"mean", data.curves[g].mean}});
  }
  write_json(cfg, name + "_summary.json", doc);
  return doc;
}

Json experiment_fig1(const RunConfig& cfg) {
  cfg.require_known({"prior_fidelity", "x", "n", "grid", "n_rep", "gamma"});
  const double f = cfg.get_double("prior_fidelity", 0.99);
  const int x = static_cast<int>(cfg.get_int("x", 96));
  const int n = static_cast<int>(cfg.get_int("n", 100));
  const int grid = static_cast<int>(cfg.get_int("grid", kDefaultGridSize));
  const int n_rep = static_cast<int>(cfg.get_int("n_rep", n));
  const double kappa = kappa_from_fidelity(f);
  const double gamma = cfg.get_double("gamma", kappa);
  if (n < 1 || x < 0 || x > n) throw ConfigError("need 0 <= x <= n and n >= 1");
  const VonMisesPrior vm{0.0, kappa};
  const Chi2DerivedPrior chi2 = chi2_prior_density(kappa, n_rep, gamma);
  Json a = posterior_panel(cfg, "fig1a", vm.as_theta_density(), x, n, grid);
  Json b = posterior_panel(cfg, "fig1b", chi2.as_theta_density(), x, n, grid);
  Json doc{{"metadata", cfg.metadata().to_json()},
           {"kappa", kappa},
           {"gamma", gamma},
           {"n_rep", n_rep},
           {"von_mises", a},
           {"chi2", b}};
  write_json(cfg, "fig1_summary.json", doc);
  return doc;
}

Json experiment_fig3(const RunConfig& cfg) {
  cfg.require_known({"thetas", "reps", "burn_in", "thinning", "emit_channels", "joint_moves"});
  return run_sample_sweep(cfg, "fig3", cfg.full_scale() ? 1000 : 200);
}

Json experiment_fig4(const RunConfig& cfg) {
  cfg.require_known({"reps", "ns", "truth_fidelity", "theta", "restarts", "design"});
  return run_comparison(cfg, {"fig4", false, {10.0, 100.0, 1000.0, 10000.0}, {}});
}

Json experiment_fig5(const RunConfig& cfg) {
  cfg.require_known({"reps", "ns", "truth_fidelity", "theta", "restarts", "design", "sweep_ns",
                     "coherent_fraction"});
  return run_comparison(cfg, {"fig5", true, {10.0, 100.0, 1000.0, 10000.0}, {100.0, 1000.0, 10000.0}});
}

Json cmd_experiment(const std::string& name, const RunConfig& cfg) {
  if (name == "fig1") return experiment_fig1(cfg);
  if (name == "fig3") return experiment_fig3(cfg);
  if (name == "fig4") return experiment_fig4(cfg);
  if (name == "fig5") return experiment_fig5(cfg);
  throw ConfigError("unknown experiment '" + name + "' (fig1, fig3, fig4, fig5)");
}

}  // namespace qpt
