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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "edgeprune/model.hpp"

namespace edgeprune {

struct Slowdown {
  double start_s = 0.0;
  double duration_s = 0.0;
  double multiplier = 1.0;  // in (0, 1]; scales device speed while active
  friend bool operator==(const Slowdown&, const Slowdown&) = default;
};

struct DeviceProfile {
  std::string id;
  double speed = 1.0;                // work units per second
  double memory_capacity = 1e18;     // parameter-count units
  double bandwidth_out = 1e9;        // payload bytes per second
  double link_latency = 0.0;         // seconds
  double latency_slope = -1.0;       // relative latency change per unit pruning ratio
  std::vector<Slowdown> slowdowns;

  // Product of every slowdown active at time t.
  double speed_multiplier(double t) const;
  void validate() const;
};

struct Stage {
  std::size_t device = 0;  // index into the device list
  std::string device_id;
  LayerRange layers;
  double predicted_latency = 0.0;  // seconds at ratio 0
  std::int64_t param_count = 0;
  friend bool operator==(const Stage&, const Stage&) = default;
};

struct PipelinePlan {
  std::vector<Stage> stages;
  double makespan = 0.0;
  friend bool operator==(const PipelinePlan&, const PipelinePlan&) = default;
};

double profile_stage(const ModelGraph& model, LayerRange range, const DeviceProfile& device);

// Min-max contiguous placement by dynamic programming. Every device gets a
// non-empty stage, devices keep their given order, and stage parameters must
// fit device memory. Among optimal plans the lexicographically smallest cut
// vector wins. Returns nullopt when no memory-feasible plan exists.
std::optional<PipelinePlan> partition(const ModelGraph& model, std::span<const DeviceProfile> devices);

// Exhaustive enumeration with the same objective and tie-break. Limited to
// 16 layers and 4 devices (SizeGuard otherwise).
std::optional<PipelinePlan> brute_force_partition(const ModelGraph& model,
                                                  std::span<const DeviceProfile> devices);

// Builds a plan from explicit stage boundaries; throws ConfigError when the
// stages are not contiguous, empty, or over memory.
PipelinePlan make_plan(const ModelGraph& model, std::span<const DeviceProfile> devices,
                       std::span<const LayerRange> ranges);

}  // namespace edgeprune
