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
#include <span>
#include <vector>

#include "edgeprune/controller.hpp"
#include "edgeprune/curvefit.hpp"
#include "edgeprune/model.hpp"
#include "edgeprune/partitioner.hpp"

namespace edgeprune {

struct SimulationOptions {
  double prune_overhead_s = 0.025;
  double bytes_per_channel = 4096.0;
  bool controller_enabled = true;
  std::vector<double> initial_ratios;  // pinned when the controller is off; empty means zeros
};

// Fully resolved simulation input.
struct Scenario {
  ModelGraph model;
  std::vector<DeviceProfile> devices;
  PipelinePlan plan;
  std::vector<LatencyCurve> curves;  // stage service time at full device speed
  AccuracyModel accuracy;            // controller's fitted model
  AccuracyModel ground_truth;        // accuracy the world actually delivers
  std::vector<double> arrivals;
  ControllerConfig controller;
  SimulationOptions options;

  void validate() const;
};

struct RequestRecord {
  std::size_t id = 0;
  double arrival_s = 0.0;
  std::vector<double> stage_start;
  std::vector<double> stage_end;
  double completion_s = 0.0;
  double latency_s = 0.0;
  bool slo_met = false;
  std::vector<double> ratios;  // ratio each stage ran at for this request
  friend bool operator==(const RequestRecord&, const RequestRecord&) = default;
};

struct RatioChange {
  double decision_s = 0.0;
  double applied_s = 0.0;  // decision_s + prune overhead
  DecisionKind kind = DecisionKind::kPrune;
  std::vector<double> old_ratios;
  std::vector<double> new_ratios;
  std::int64_t param_count = 0;  // deployed parameters after the change
  friend bool operator==(const RatioChange&, const RatioChange&) = default;
};

struct AccuracyPoint {
  double time_s = 0.0;
  double accuracy = 0.0;
  friend bool operator==(const AccuracyPoint&, const AccuracyPoint&) = default;
};

struct RunMetrics {
  std::size_t requests = 0;
  double mean_latency = 0.0;
  double p50_latency = 0.0;
  double p95_latency = 0.0;
  double p99_latency = 0.0;
  double slo_attainment = 0.0;
  double throughput = 0.0;
  std::vector<RatioChange> prune_events;
  std::vector<AccuracyPoint> accuracy_timeline;
  friend bool operator==(const RunMetrics&, const RunMetrics&) = default;
};

struct RunResult {
  std::vector<RequestRecord> records;
  RunMetrics metrics;
  std::vector<DecisionRecord> decisions;
};

// Nearest-rank percentile of an ascending sample, q in (0, 1].
double nearest_rank(std::span<const double> sorted, double q);

// Latency statistics; prune events and accuracy timeline are left empty.
// Throws EmptyRun on an empty record set.
RunMetrics summarize(std::span<const RequestRecord> records, double slo);

// Deterministic event-driven run. Throws ConfigError for an inconsistent
// scenario and EmptyRun when there are no arrivals.
RunResult run(const Scenario& scenario);

// Model as deployed with one ratio per stage of `plan`.
ModelGraph deploy(const ModelGraph& model, const PipelinePlan& plan, std::span<const double> ratios);

}  // namespace edgeprune
