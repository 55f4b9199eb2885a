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

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qpt/channel_reps.hpp"
#include "qpt/dephasing_bayes.hpp"
#include "qpt/frame_bingham.hpp"
#include "qpt/tomography.hpp"

namespace py = pybind11;

namespace {

qpt::ChoiMatrix as_choi(const qpt::CMatrix& m) { return qpt::ChoiMatrix(m); }

qpt::CountData as_counts(const std::vector<double>& x, double n) {
  return qpt::CountData{x, std::vector<double>(x.size(), n)};
}

py::dict estimation_dict(const qpt::EstimationResult& r) {
  py::dict d;
  d["choi"] = r.estimate.matrix();
  d["objective"] = r.objective;
  d["converged"] = r.report.converged;
  d["iterations"] = r.report.iterations;
  d["incomplete_design"] = r.incomplete_design;
  d["clamp_events"] = r.clamp_events;
  d["start_values"] = r.start_values;
  return d;
}

qpt::EstimationOptions estimation_options(int restarts, std::uint64_t seed) {
  qpt::EstimationOptions o;
  o.optimizer.restarts = restarts;
  o.optimizer.rng_seed = seed;
  return o;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Quantum process tomography on the Stiefel manifold.";

  auto base = py::register_exception<qpt::Error>(m, "QptError");
  py::register_exception<qpt::ConfigError>(m, "ConfigError", base);
  py::register_exception<qpt::DimensionError>(m, "DimensionError", base);
  py::register_exception<qpt::InvariantError>(m, "InvariantError", base);
  py::register_exception<qpt::NumericError>(m, "NumericError", base);
  py::register_exception<qpt::RankDeficiencyError>(m, "RankDeficiencyError", base);

  // Channels are exchanged as complex Choi matrices (numpy arrays).
  m.def("identity_channel", [](int dim) { return qpt::identity_channel(dim).matrix(); },
        py::arg("dim") = 2);
  m.def("depolarizing_channel", [](double f) { return qpt::depolarizing_channel(f).matrix(); },
        py::arg("fidelity"));
  m.def("unitary_channel", [](const qpt::CMatrix& u) { return qpt::unitary_channel(u).matrix(); });
  m.def("dephasing_channel", [](double t) { return qpt::dephasing_choi(t).matrix(); },
        py::arg("theta"));
  m.def("validate_choi", [](const qpt::CMatrix& c) { as_choi(c); });
  m.def(
      "process_fidelity",
      [](const qpt::CMatrix& c, std::optional<qpt::CMatrix> u) {
        const auto choi = as_choi(c);
        return qpt::process_fidelity(choi, u ? *u : qpt::CMatrix::Identity(choi.dim(), choi.dim()));
      },
      py::arg("choi"), py::arg("unitary") = py::none());
  m.def("choi_to_ptm", [](const qpt::CMatrix& c) { return qpt::choi_to_ptm(as_choi(c)).entries; });
  m.def(
      "choi_to_kraus",
      [](const qpt::CMatrix& c, int k) { return qpt::choi_to_kraus(as_choi(c), k).operators; },
      py::arg("choi"), py::arg("kraus_rank"));
  m.def("kraus_to_choi", [](std::vector<qpt::CMatrix> ops) {
    const int dim = ops.empty() ? 0 : static_cast<int>(ops.front().rows());
    return qpt::kraus_to_choi(qpt::KrausSet{dim, std::move(ops)}).matrix();
  });
  m.def(
      "diamond_distance",
      [](const qpt::CMatrix& a, const qpt::CMatrix& b) {
        return qpt::diamond_distance(as_choi(a), as_choi(b)).value;
      },
      py::arg("a"), py::arg("b"));

  m.def(
      "sample_fidelities",
      [](double theta, int dim, int kraus_rank, int samples, std::uint64_t seed) {
        qpt::ChainConfig cfg;
        cfg.samples = samples;
        cfg.seed = seed;
        py::gil_scoped_release release;
        const auto chain = qpt::sample_chain(qpt::depolarizing_parameter(theta, dim), kraus_rank, cfg);
        return qpt::sample_fidelities(chain);
      },
      py::arg("theta"), py::arg("dim") = 2, py::arg("kraus_rank") = 4, py::arg("samples") = 200,
      py::arg("seed") = 0);

  m.def(
      "design_probabilities",
      [](const std::string& design, const qpt::CMatrix& c) {
        return qpt::design_by_name(design).probabilities(as_choi(c).matrix());
      },
      py::arg("design"), py::arg("choi"));
  m.def(
      "simulate_counts",
      [](const qpt::CMatrix& c, const std::string& design, int n, std::uint64_t seed) {
        qpt::Rng rng(seed);
        return qpt::simulate_counts(as_choi(c), qpt::design_by_name(design), n, rng).successes;
      },
      py::arg("choi"), py::arg("design"), py::arg("n"), py::arg("seed") = 0);
  m.def(
      "mle",
      [](const std::vector<double>& x, double n, const std::string& design, int restarts,
         std::uint64_t seed) {
        const auto d = qpt::design_by_name(design);
        const auto data = as_counts(x, n);
        py::gil_scoped_release release;
        const auto r = qpt::mle(data, d, estimation_options(restarts, seed));
        py::gil_scoped_acquire acquire;
        return estimation_dict(r);
      },
      py::arg("x"), py::arg("n"), py::arg("design") = "pauli6", py::arg("restarts") = 5,
      py::arg("seed") = 0);
  m.def(
      "map_estimate",
      [](const std::vector<double>& x, double n, double theta, const std::string& design,
         int restarts, std::uint64_t seed) {
        const auto d = qpt::design_by_name(design);
        const auto data = as_counts(x, n);
        const auto prior = qpt::depolarizing_parameter(theta, d.dim());
        py::gil_scoped_release release;
        const auto r = qpt::map_estimate(data, d, prior, estimation_options(restarts, seed));
        py::gil_scoped_acquire acquire;
        return estimation_dict(r);
      },
      py::arg("x"), py::arg("n"), py::arg("theta"), py::arg("design") = "pauli4",
      py::arg("restarts") = 5, py::arg("seed") = 0);

  m.def("kappa_from_fidelity", &qpt::kappa_from_fidelity, py::arg("fidelity"));
  m.def(
      "dephasing_posterior",
      [](double prior_fidelity, int x, int n, int grid) {
        const qpt::VonMisesPrior prior{0.0, qpt::kappa_from_fidelity(prior_fidelity)};
        const auto g = qpt::grid_posterior(prior.as_theta_density(), x, n, grid);
        py::dict d;
        d["theta"] = g.theta;
        d["prior"] = g.prior;
        d["likelihood"] = g.likelihood;
        d["posterior"] = g.posterior;
        d["mode"] = g.summary.mode;
        d["ci"] = py::make_tuple(g.summary.ci_low, g.summary.ci_high);
        d["circular_variance"] = g.summary.circular_variance;
        d["folded_circular_variance"] = g.summary.folded_circular_variance;
        return d;
      },
      py::arg("prior_fidelity") = 0.99, py::arg("x") = 96, py::arg("n") = 100,
      py::arg("grid") = qpt::kDefaultGridSize);

  m.attr("__version__") = QPT_VERSION;
}
