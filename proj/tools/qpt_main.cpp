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

// qpt: sampling, simulation, estimation and experiment runs for qubit
// process tomography with frame-Bingham priors.
//
// Exit codes: 0 success, 2 configuration error, 3 numeric failure (a
// diagnostic JSON is written to <out>/diagnostic.json).

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qpt/experiments.hpp"
#include "qpt/io.hpp"

namespace {

struct CommonFlags {
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  std::string config;
  bool full = false;
  std::string design;
  std::string theta;
  std::string n;
  std::optional<int> reps;
  bool emit_channels = false;
  std::vector<std::string> sets;
};

void add_common(CLI::App* app, CommonFlags& f) {
  app->add_option("--seed", f.seed, "Master seed (required for stochastic commands)");
  app->add_option("--out", f.out, "Output directory")->capture_default_str();
  app->add_option("--config", f.config, "key = value configuration file");
  app->add_flag("--full", f.full, "Full-scale replication counts (1000 samples, 100 replications)");
  app->add_option("--design", f.design, "Measurement design")->check(CLI::IsMember({"pauli4", "pauli6"}));
  app->add_option("--theta", f.theta, "Prior scale (comma list for sweeps)");
  app->add_option("--n", f.n, "Shots per setting (comma list for experiments)");
  app->add_option("--reps", f.reps, "Replications / samples per group");
  app->add_flag("--emit-channels", f.emit_channels, "Write every sampled channel as JSON");
  app->add_option("--set", f.sets, "Extra key=value option (repeatable)");
}

// Config file first, flags on top.
qpt::ConfigMap merge(const CommonFlags& f, const std::string& theta_key, const std::string& n_key) {
  qpt::ConfigMap cfg;
  if (!f.config.empty()) cfg = qpt::read_config_file(f.config);
  for (const auto& s : f.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw qpt::ConfigError("--set expects key=value, got '" + s + "'");
    cfg[s.substr(0, eq)] = s.substr(eq + 1);
  }
  if (f.seed) cfg["seed"] = std::to_string(*f.seed);
  cfg["out"] = f.out;
  if (f.full) cfg["full"] = "true";
  if (!f.design.empty()) cfg["design"] = f.design;
  if (!f.theta.empty()) cfg[theta_key] = f.theta;
  if (!f.n.empty()) cfg[n_key] = f.n;
  if (f.reps) cfg["reps"] = std::to_string(*f.reps);
  if (f.emit_channels) cfg["emit_channels"] = "true";
  return cfg;
}

void write_diagnostic(const std::string& out, const std::string& command, const char* kind,
                      const std::string& what) {
  const qpt::Json doc{{"command", command}, {"error", kind}, {"message", what},
                      {"version", qpt::artifact_version()}};
  try {
    qpt::write_text_file(std::filesystem::path(out) / "diagnostic.json", qpt::dump_json(doc));
  } catch (const std::exception&) {
  }
  std::cerr << qpt::dump_json(doc);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Process tomography with frame-Bingham priors"};
  app.require_subcommand(1);
  app.set_version_flag("--version", qpt::artifact_version());

  CommonFlags flags;
  std::string experiment_name;
  std::string report_kind = "violin";
  std::string counts_path, mode, theta_file, input, value_column, group_column, transform;

  auto* sample = app.add_subcommand("sample", "Sample channels from the depolarizing-prior family");
  auto* simulate = app.add_subcommand("simulate", "Simulate binomial tomography counts");
  auto* estimate = app.add_subcommand("estimate", "MLE or MAP estimate from a counts file");
  auto* experiment = app.add_subcommand("experiment", "Run a named experiment: fig1, fig3, fig4, fig5");
  auto* report = app.add_subcommand("report", "Violin plot (SVG + KDE CSV) from a CSV column");
  for (auto* sub : {sample, simulate, estimate, experiment, report}) add_common(sub, flags);
  experiment->add_option("name", experiment_name, "Experiment")->required()->check(
      CLI::IsMember({"fig1", "fig3", "fig4", "fig5"}));
  estimate->add_option("--counts", counts_path, "Counts JSON");
  estimate->add_option("--mode", mode, "mle or map")->check(CLI::IsMember({"mle", "map"}));
  estimate->add_option("--theta-file", theta_file, "Natural parameter as channel-format JSON");
  report->add_option("kind", report_kind, "Report kind")->check(CLI::IsMember({"violin"}));
  report->add_option("--input", input, "Input CSV");
  report->add_option("--value-column", value_column, "Column holding the values");
  report->add_option("--group-column", group_column, "Column defining the groups");
  report->add_option("--transform", transform, "none, infidelity or log10_infidelity");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  std::string command;
  try {
    qpt::Json summary;
    if (sample->parsed()) {
      command = "sample";
      summary = qpt::cmd_sample(qpt::RunConfig(command, merge(flags, "thetas", "n")));
    } else if (simulate->parsed()) {
      command = "simulate";
      summary = qpt::cmd_simulate(qpt::RunConfig(command, merge(flags, "theta", "n")));
    } else if (estimate->parsed()) {
      command = "estimate";
      auto cfg = merge(flags, "theta", "n");
      if (!counts_path.empty()) cfg["counts"] = counts_path;
      if (!mode.empty()) cfg["mode"] = mode;
      if (!theta_file.empty()) cfg["theta_file"] = theta_file;
      summary = qpt::cmd_estimate(qpt::RunConfig(command, cfg));
    } else if (experiment->parsed()) {
      command = "experiment " + experiment_name;
      const bool sweep = experiment_name == "fig3";
      const bool compare = experiment_name == "fig4" || experiment_name == "fig5";
      auto cfg = merge(flags, sweep ? "thetas" : "theta", compare ? "ns" : "n");
      summary = qpt::cmd_experiment(experiment_name, qpt::RunConfig(command, cfg));
    } else {
      command = "report " + report_kind;
      auto cfg = merge(flags, "theta", "n");
      if (!input.empty()) cfg["input"] = input;
      if (!value_column.empty()) cfg["value_column"] = value_column;
      if (!group_column.empty()) cfg["group_column"] = group_column;
      if (!transform.empty()) cfg["transform"] = transform;
      summary = qpt::cmd_report(qpt::RunConfig(command, cfg));
    }
    std::printf("%s: wrote outputs to %s\n", command.c_str(), flags.out.c_str());
    return 0;
  } catch (const qpt::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const qpt::DimensionError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const qpt::Error& e) {
    write_diagnostic(flags.out, command, "numeric", e.what());
    return 3;
  } catch (const std::exception& e) {
    write_diagnostic(flags.out, command, "internal", e.what());
    return 3;
  }
}
