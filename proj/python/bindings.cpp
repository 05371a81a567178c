// Copyright 2026 The edgeprune Authors
//
//  Licensed under the Apache License, Version 2.0 (the "License");
//  you may not use this file except in compliance with the License.
//  You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
//  Unless required by applicable law or agreed to in writing, software
//  distributed under the License is distributed on an "AS IS" BASIS,
//  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//  See the License for the specific language governing permissions and
//  limitations under the License.

#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "edgeprune/controller.hpp"
#include "edgeprune/curvefit.hpp"
#include "edgeprune/errors.hpp"
#include "edgeprune/model.hpp"
#include "edgeprune/partitioner.hpp"
#include "edgeprune/scenario.hpp"
#include "edgeprune/simulator.hpp"
#include "edgeprune/workload.hpp"

namespace py = pybind11;
using namespace edgeprune;

namespace {

py::dict plan_dict(const PipelinePlan& plan) {
  py::list stages;
  for (const Stage& s : plan.stages) {
    py::dict d;
    d["device"] = s.device_id;
    d["layers"] = py::make_tuple(s.layers.begin, s.layers.end);
    d["predicted_latency"] = s.predicted_latency;
    d["params"] = s.param_count;
    stages.append(d);
  }
  py::dict out;
  out["stages"] = stages;
  out["makespan"] = plan.makespan;
  return out;
}

py::dict decision_dict(const PruneDecision& d) {
  py::dict out;
  out["kind"] = to_string(d.kind);
  out["ratios"] = d.ratios;
  out["predicted_bottleneck"] = d.predicted_bottleneck;
  out["predicted_accuracy"] = d.predicted_accuracy;
  return out;
}

std::string simulate_json(const std::string& config_json, std::optional<std::uint64_t> seed,
                          std::optional<bool> controller, const std::string& base_dir) {
  const Config config = Config::from_json(Json::parse(config_json), base_dir, seed);
  Scenario scenario = load_scenario(config);
  if (controller) scenario.options.controller_enabled = *controller;
  RunResult result;
  {
    py::gil_scoped_release release;
    result = run(scenario);
  }
  Json out = metrics_to_json(result.metrics);
  out["config_hash"] = config.hash;
  return out.dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "edgeprune core: pruning control plane and pipeline simulator";

  py::register_exception<Error>(m, "Error");

  py::class_<ModelGraph>(m, "ModelGraph")
      .def_property_readonly("num_layers", &ModelGraph::size)
      .def_property_readonly("widths",
                             [](const ModelGraph& g) {
                               std::vector<int> w{g.input_channels};
                               for (const auto& l : g.layers) w.push_back(l.out_channels);
                               return w;
                             })
      .def("__eq__", [](const ModelGraph& a, const ModelGraph& b) { return a == b; });

  py::class_<PruneMask>(m, "PruneMask")
      .def_readonly("ratio", &PruneMask::ratio)
      .def_property_readonly("removed", [](const PruneMask& mask) {
        py::dict d;
        for (const auto& l : mask.layers) d[py::int_(l.layer)] = l.removed_out;
        return d;
      });

  m.def("make_chain", [](const std::vector<int>& widths, int kernel_params, double work_coeff, std::uint64_t seed) {
    return make_chain(widths, kernel_params, work_coeff, seed);
  }, py::arg("widths"), py::arg("kernel_params") = 1, py::arg("work_coeff") = 1.0, py::arg("seed") = 0);

  m.def("l1_channel_ranking", [](const std::vector<std::vector<double>>& rows) {
    Layer layer;
    layer.out_channels = static_cast<int>(rows.size());
    layer.in_channels = rows.empty() ? 0 : static_cast<int>(rows.front().size());
    for (const auto& r : rows) {
      if (static_cast<int>(r.size()) != layer.in_channels) throw Error(ErrorCode::kDimensionMismatch, "ragged rows");
      layer.weights.insert(layer.weights.end(), r.begin(), r.end());
    }
    return l1_channel_ranking(layer);
  }, py::arg("rows"));

  m.def("apply_prune", [](const ModelGraph& g, std::size_t begin, std::size_t end, double ratio) {
    auto r = apply_prune(g, {begin, end}, ratio);
    return std::make_pair(std::move(r.model), std::move(r.mask));
  }, py::arg("model"), py::arg("begin"), py::arg("end"), py::arg("ratio"));

  m.def("restore", &restore, py::arg("pruned"), py::arg("mask"), py::arg("full"));

  m.def("cost_metrics", [](const ModelGraph& g, std::size_t begin, std::size_t end) {
    const auto c = cost_metrics(g, {begin, end});
    return std::make_pair(c.param_count, c.work_units);
  }, py::arg("model"), py::arg("begin"), py::arg("end"));

  m.def("partition", [](const ModelGraph& g, const std::vector<std::string>& presets) -> std::optional<py::dict> {
    std::vector<DeviceProfile> devices;
    for (const auto& p : presets) devices.push_back(device_preset(p));
    for (std::size_t i = 0; i < devices.size(); ++i) devices[i].id = presets[i] + "-" + std::to_string(i);
    auto plan = partition(g, devices);
    if (!plan) return std::nullopt;
    return plan_dict(*plan);
  }, py::arg("model"), py::arg("device_presets"));

  m.def("fit_latency", [](const std::vector<std::pair<double, double>>& samples) {
    std::vector<LatencySample> s;
    for (auto [r, t] : samples) s.push_back({r, t});
    const auto c = fit_latency(s);
    return std::make_pair(c.alpha, c.beta);
  }, py::arg("samples"));

  m.def("fit_accuracy", [](const std::vector<std::pair<std::vector<double>, double>>& samples) {
    std::vector<AccuracySample> s;
    for (const auto& [p, a] : samples) s.push_back({p, a});
    const auto fit = fit_accuracy(s);
    return std::make_pair(fit.gamma, fit.delta);
  }, py::arg("samples"));

  m.def("predict_accuracy", [](const std::vector<double>& gamma, double delta, const std::vector<double>& ratios) {
    return predict_accuracy(AccuracyModel{gamma, delta}, ratios);
  }, py::arg("gamma"), py::arg("delta"), py::arg("ratios"));

  m.def("solve_ratios", [](const std::vector<std::pair<double, double>>& curves, const std::vector<double>& gamma,
                           double delta, double a_min, double target, std::optional<std::vector<double>> grid) {
    std::vector<LatencyCurve> c;
    for (auto [a, b] : curves) c.push_back({a, b});
    ControllerConfig cfg;
    cfg.a_min = a_min;
    if (grid) cfg.grid = *grid;
    cfg.validate();
    return decision_dict(solve_ratios(c, AccuracyModel{gamma, delta}, cfg, target));
  }, py::arg("curves"), py::arg("gamma"), py::arg("delta"), py::arg("a_min"), py::arg("target"),
        py::arg("grid") = py::none());

  m.def("generate_poisson_arrivals", &generate_poisson_arrivals, py::arg("rate_hz"), py::arg("duration_s"),
        py::arg("seed"));

  m.def("device_slope", [](const std::string& preset) { return device_preset(preset).latency_slope; },
        py::arg("preset"));

  m.def("_simulate_json", &simulate_json, py::arg("config_json"), py::arg("seed") = py::none(),
        py::arg("controller") = py::none(), py::arg("base_dir") = ".");
}
