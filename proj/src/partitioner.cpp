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

#include "edgeprune/partitioner.hpp"

#include <algorithm>
#include <limits>

#include "edgeprune/errors.hpp"

namespace edgeprune {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool fits(const ModelGraph& model, LayerRange range, const DeviceProfile& device) {
  return static_cast<double>(cost_metrics(model, range).param_count) <= device.memory_capacity;
}

Stage make_stage(const ModelGraph& model, std::span<const DeviceProfile> devices, std::size_t k,
                 LayerRange range) {
  return Stage{k, devices[k].id, range, profile_stage(model, range, devices[k]),
               cost_metrics(model, range).param_count};
}

PipelinePlan plan_from_cuts(const ModelGraph& model, std::span<const DeviceProfile> devices,
                            std::span<const std::size_t> cuts) {
  PipelinePlan plan;
  std::size_t begin = 0;
  for (std::size_t k = 0; k < devices.size(); ++k) {
    const std::size_t end = k + 1 < devices.size() ? cuts[k] : model.size();
    plan.stages.push_back(make_stage(model, devices, k, {begin, end}));
    plan.makespan = std::max(plan.makespan, plan.stages.back().predicted_latency);
    begin = end;
  }
  return plan;
}

}  // namespace

double DeviceProfile::speed_multiplier(double t) const {
  double m = 1.0;
  for (const Slowdown& s : slowdowns) {
    if (t >= s.start_s && t < s.start_s + s.duration_s) m *= s.multiplier;
  }
  return m;
}

void DeviceProfile::validate() const {
  if (!(speed > 0)) throw Error(ErrorCode::kConfigError, "device " + id + ": speed must be > 0");
  if (!(memory_capacity > 0)) throw Error(ErrorCode::kConfigError, "device " + id + ": memory must be > 0");
  if (!(bandwidth_out > 0)) throw Error(ErrorCode::kConfigError, "device " + id + ": bandwidth must be > 0");
  if (link_latency < 0) throw Error(ErrorCode::kConfigError, "device " + id + ": negative link latency");
  for (const Slowdown& s : slowdowns) {
    if (!(s.multiplier > 0 && s.multiplier <= 1) || s.duration_s < 0) {
      throw Error(ErrorCode::kConfigError, "device " + id + ": slowdown multiplier must be in (0, 1]");
    }
  }
}

double profile_stage(const ModelGraph& model, LayerRange range, const DeviceProfile& device) {
  return cost_metrics(model, range).work_units / device.speed;
}

std::optional<PipelinePlan> partition(const ModelGraph& model, std::span<const DeviceProfile> devices) {
  const std::size_t n_layers = model.size();
  const std::size_t n_dev = devices.size();
  if (n_dev == 0) throw Error(ErrorCode::kConfigError, "partition needs at least one device");
  if (n_layers < n_dev) return std::nullopt;

  // best[k][i]: optimal makespan placing layers [i, n) on devices [k, n_dev).
  std::vector<std::vector<double>> best(n_dev + 1, std::vector<double>(n_layers + 1, kInf));
  best[n_dev][n_layers] = 0.0;
  auto stage_cost = [&](std::size_t k, std::size_t i, std::size_t j) {
    const LayerRange r{i, j};
    return fits(model, r, devices[k]) ? profile_stage(model, r, devices[k]) : kInf;
  };
  for (std::size_t k = n_dev; k-- > 0;) {
    const std::size_t remaining = n_dev - k - 1;  // devices after k, each needs a layer
    for (std::size_t i = k; i + remaining < n_layers; ++i) {
      const std::size_t j_max = n_layers - remaining;
      for (std::size_t j = i + 1; j <= j_max; ++j) {
        if (best[k + 1][j] == kInf) continue;
        best[k][i] = std::min(best[k][i], std::max(stage_cost(k, i, j), best[k + 1][j]));
      }
    }
  }
  const double optimum = best[0][0];
  if (optimum == kInf) return std::nullopt;

  std::vector<std::size_t> cuts;
  std::size_t i = 0;
  for (std::size_t k = 0; k + 1 < n_dev; ++k) {
    for (std::size_t j = i + 1; j <= n_layers; ++j) {
      if (best[k + 1][j] == kInf) continue;
      if (std::max(stage_cost(k, i, j), best[k + 1][j]) <= optimum) {
        cuts.push_back(j);
        i = j;
        break;
      }
    }
  }
  return plan_from_cuts(model, devices, cuts);
}

std::optional<PipelinePlan> brute_force_partition(const ModelGraph& model,
                                                  std::span<const DeviceProfile> devices) {
  if (model.size() > 16 || devices.size() > 4) {
    throw Error(ErrorCode::kSizeGuard, "brute force limited to 16 layers and 4 devices");
  }
  if (devices.empty()) throw Error(ErrorCode::kConfigError, "partition needs at least one device");
  const std::size_t n_layers = model.size();
  const std::size_t n_cuts = devices.size() - 1;
  if (n_layers < devices.size()) return std::nullopt;

  std::optional<PipelinePlan> best;
  std::vector<std::size_t> cuts(n_cuts);
  // Enumerate strictly increasing cut vectors in lexicographic order.
  auto visit = [&](auto&& self, std::size_t depth, std::size_t lo) -> void {
    if (depth == n_cuts) {
      std::size_t begin = 0;
      for (std::size_t k = 0; k < devices.size(); ++k) {
        const std::size_t end = k < n_cuts ? cuts[k] : n_layers;
        if (!fits(model, {begin, end}, devices[k])) return;
        begin = end;
      }
      PipelinePlan plan = plan_from_cuts(model, devices, cuts);
      if (!best || plan.makespan < best->makespan) best = std::move(plan);
      return;
    }
    for (std::size_t c = lo; c + (n_cuts - depth) <= n_layers; ++c) {
      cuts[depth] = c;
      self(self, depth + 1, c + 1);
    }
  };
  visit(visit, 0, 1);
  return best;
}

PipelinePlan make_plan(const ModelGraph& model, std::span<const DeviceProfile> devices,
                       std::span<const LayerRange> ranges) {
  if (ranges.empty() || ranges.size() > devices.size()) {
    throw Error(ErrorCode::kConfigError, "plan must have between 1 and device-count stages");
  }
  PipelinePlan plan;
  std::size_t expect = 0;
  for (std::size_t k = 0; k < ranges.size(); ++k) {
    const LayerRange r = ranges[k];
    if (r.begin != expect || r.empty() || r.end > model.size()) {
      throw Error(ErrorCode::kConfigError, "plan stage " + std::to_string(k) + " is not contiguous");
    }
    if (!fits(model, r, devices[k])) {
      throw Error(ErrorCode::kConfigError, "plan stage " + std::to_string(k) + " exceeds device memory");
    }
    plan.stages.push_back(make_stage(model, devices, k, r));
    plan.makespan = std::max(plan.makespan, plan.stages.back().predicted_latency);
    expect = r.end;
  }
  if (expect != model.size()) throw Error(ErrorCode::kConfigError, "plan does not cover every layer");
  return plan;
}

}  // namespace edgeprune
