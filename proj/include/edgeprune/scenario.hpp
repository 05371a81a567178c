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

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "edgeprune/curvefit.hpp"
#include "edgeprune/partitioner.hpp"
#include "edgeprune/simulator.hpp"

namespace edgeprune {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

// A scenario document plus provenance. The hash covers the document as
// written; a seed override does not change it.
struct Config {
  Json doc;
  std::filesystem::path base_dir;
  std::string hash;
  std::optional<std::uint64_t> seed;           // override, else top-level "seed"
  std::optional<std::uint64_t> seed_override;

  static Config load(const std::filesystem::path& path, std::optional<std::uint64_t> seed_override = {});
  static Config from_json(Json doc, std::filesystem::path base_dir = ".",
                          std::optional<std::uint64_t> seed_override = {});

  const Json& section(std::string_view name) const;  // ConfigError when missing
  bool has(std::string_view name) const { return doc.contains(name); }
  std::filesystem::path resolve_path(const std::string& p) const;
  // Seed for a stochastic section: override, then the section's "seed", then top-level "seed".
  std::uint64_t seed_for(const Json& section, std::string_view what) const;
};

std::string fnv1a_hex(std::string_view bytes);

// Calibrated presets: single-stage speedup at ratio 0.3 of 1.5x, 1.17x, 1.14x.
DeviceProfile device_preset(std::string_view name);
double slope_for_speedup(double speedup, double ratio);

ModelGraph parse_model(const Json& j);
std::vector<DeviceProfile> parse_devices(const Json& j);
ControllerConfig parse_controller(const Json& j);
AccuracyModel parse_accuracy(const Json& j);

// Curves the controller works from, one latency curve per stage.
struct CurveSet {
  std::vector<LatencyCurve> latency;
  AccuracyModel accuracy;
};

// Throws Error(kInfeasible) when "auto" placement has no feasible plan.
PipelinePlan resolve_plan(const Config& config, const ModelGraph& model, const std::vector<DeviceProfile>& devices);

// Benchmark samples from the "benchmark" section, or synthesized from the
// devices' latency slopes and the ground-truth accuracy when absent.
struct BenchmarkData {
  std::vector<std::vector<LatencySample>> latency;  // per stage
  std::vector<AccuracySample> accuracy;
};
BenchmarkData collect_benchmarks(const Config& config, const ModelGraph& model,
                                 const std::vector<DeviceProfile>& devices, const PipelinePlan& plan);
// DegenerateFit errors name the failing slice.
CurveSet fit_benchmarks(const BenchmarkData& data);
CurveSet resolve_curves(const Config& config, const ModelGraph& model, const std::vector<DeviceProfile>& devices,
                        const PipelinePlan& plan);

std::vector<double> resolve_arrivals(const Config& config);
// Without arrivals the workload section is optional (used by sweeps).
Scenario load_scenario(const Config& config, bool with_arrivals = true);

Json plan_to_json(const PipelinePlan& plan);
PipelinePlan plan_from_json(const Json& j, const ModelGraph& model, const std::vector<DeviceProfile>& devices);
Json curves_to_json(const CurveSet& curves);
CurveSet curves_from_json(const Json& j);
Json metrics_to_json(const RunMetrics& metrics);
std::string plan_table(const PipelinePlan& plan);
void write_requests_csv(std::ostream& out, const std::vector<RequestRecord>& records);

}  // namespace edgeprune
