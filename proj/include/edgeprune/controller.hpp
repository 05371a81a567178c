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

#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "edgeprune/curvefit.hpp"

namespace edgeprune {

struct ControllerConfig {
  double slo = 1.0;                 // seconds, end-to-end
  double trigger_margin = 0.10;     // trigger threshold = slo * (1 + margin)
  double violation_fraction = 0.5;
  double window = 5.0;              // seconds
  std::size_t min_samples = 10;
  double sustain = 0.0;             // seconds the violations must span; 0 disables
  double cooldown = 30.0;           // seconds between ratio changes
  double a_min = 0.8;
  std::vector<double> grid = {0.0, 0.25, 0.5, 0.75, 0.9, 1.0};
  double unprune_idle = 60.0;
  double unprune_deadband = 0.10;
  // Ceiling on the bottleneck utilization an unprune may predict.
  double unprune_max_utilization = 0.5;
  // Apply the accuracy-limited frontier when the latency target is out of reach.
  bool best_effort_on_infeasible = true;

  double trigger_latency() const { return slo * (1.0 + trigger_margin); }
  double latency_target() const { return slo * (1.0 - trigger_margin); }
  double unprune_latency() const { return slo * (1.0 - unprune_deadband); }
  void validate() const;
};

enum class TriggerState { kQuiet, kOverloaded, kCoolingDown };

struct LatencyObservation {
  double time = 0.0;
  double latency = 0.0;
};

struct ControllerState {
  std::deque<LatencyObservation> window;
  std::optional<double> last_prune_time;
  std::optional<double> last_change_time;
  std::vector<double> current_ratios;
  TriggerState phase = TriggerState::kQuiet;
  // Unprune bookkeeping: start of the current calm stretch, plus the samples
  // of the last unprune_idle seconds and their peak.
  std::optional<double> calm_since;
  std::deque<LatencyObservation> calm_window;
  double calm_peak = 0.0;
  std::size_t calm_samples = 0;
  double last_time = 0.0;
};

enum class DecisionKind { kNoAction, kPrune, kUnprune, kInfeasible };

struct PruneDecision {
  DecisionKind kind = DecisionKind::kNoAction;
  std::vector<double> ratios;  // target vector; for kInfeasible the accuracy-limited frontier
  double predicted_bottleneck = 0.0;
  double predicted_accuracy = 0.0;
};

const char* to_string(TriggerState s);
const char* to_string(DecisionKind k);

// Appends a sample and evicts entries older than the window.
// Throws NonMonotonicTime if time regresses by more than 1 ms.
void record_latency(ControllerState& state, const ControllerConfig& config, double completion_time,
                    double latency);

TriggerState evaluate_trigger(ControllerState& state, const ControllerConfig& config, double now);

double predicted_bottleneck(std::span<const LatencyCurve> curves, std::span<const double> ratios);

// One-pass grid solve: raise over-target slices one grid step at a time in
// order of |alpha_i| / |gamma_i| while sum_i gamma_i p_i stays above the
// accuracy budget, then back off any step the target does not need.
PruneDecision solve_ratios(std::span<const LatencyCurve> curves, const AccuracyModel& acc,
                           const ControllerConfig& config, double latency_target);

// `target` is the nominal bottleneck latency the lowered ratios must respect.
PruneDecision evaluate_unprune(ControllerState& state, std::span<const LatencyCurve> curves,
                               const AccuracyModel& acc, const ControllerConfig& config, double now,
                               double target);

struct DecisionRecord {
  double time = 0.0;
  TriggerState phase = TriggerState::kQuiet;
  DecisionKind kind = DecisionKind::kNoAction;
  std::vector<double> ratios;
  double predicted_latency = 0.0;
  double predicted_accuracy = 0.0;
  double observed_latency = 0.0;
};

std::string to_json_line(const DecisionRecord& record);

// Closed-loop driver owning the state. Observed latencies calibrate the
// nominal curves: the bottleneck target handed to the solver is scaled by
// predicted / observed latency at the current ratios.
class PruningController {
 public:
  PruningController(ControllerConfig config, std::vector<LatencyCurve> curves, AccuracyModel accuracy,
                    std::vector<double> initial_ratios = {});

  // Records one completion and returns the resulting decision. Prune and
  // Unprune decisions are committed immediately.
  PruneDecision observe(double completion_time, double latency);

  // Optional extra confirmation before acting on an overload (resource probe).
  void set_overload_probe(std::function<bool(double)> probe) { probe_ = std::move(probe); }

  const ControllerState& state() const { return state_; }
  const ControllerConfig& config() const { return config_; }
  const std::vector<DecisionRecord>& log() const { return log_; }
  std::span<const LatencyCurve> curves() const { return curves_; }
  const AccuracyModel& accuracy() const { return accuracy_; }

 private:
  void commit(const PruneDecision& decision, double now);
  double observed_mean() const;

  ControllerConfig config_;
  std::vector<LatencyCurve> curves_;
  AccuracyModel accuracy_;
  ControllerState state_;
  std::function<bool(double)> probe_;
  std::vector<DecisionRecord> log_;
  std::optional<double> last_infeasible_log_;
};

}  // namespace edgeprune
