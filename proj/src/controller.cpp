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

#include "edgeprune/controller.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>

#include "edgeprune/errors.hpp"

namespace edgeprune {

namespace {

constexpr double kTimeTolerance = 1e-3;

double budget_tolerance(double budget) { return 1e-12 * std::max(1.0, std::abs(budget)); }

// Slices ordered by latency reduction per unit accuracy cost, best first.
std::vector<std::size_t> priority_order(std::span<const LatencyCurve> curves, const AccuracyModel& acc) {
  std::vector<double> key(curves.size());
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const double g = std::abs(acc.gamma[i]);
    key[i] = g > 0 ? std::abs(curves[i].alpha) / g : std::numeric_limits<double>::infinity();
  }
  std::vector<std::size_t> order(curves.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key[a] > key[b]; });
  return order;
}

std::size_t grid_index(std::span<const double> grid, double ratio) {
  std::size_t best = 0;
  for (std::size_t g = 1; g < grid.size(); ++g) {
    if (std::abs(grid[g] - ratio) < std::abs(grid[best] - ratio)) best = g;
  }
  return best;
}

std::vector<double> to_ratios(std::span<const double> grid, std::span<const std::size_t> idx) {
  std::vector<double> p(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) p[i] = grid[idx[i]];
  return p;
}

void check_dims(std::span<const LatencyCurve> curves, const AccuracyModel& acc) {
  if (curves.size() != acc.slices()) {
    throw Error(ErrorCode::kDimensionMismatch, std::to_string(curves.size()) + " latency curves vs " +
                                                   std::to_string(acc.slices()) + " accuracy weights");
  }
}

PruneDecision make_decision(DecisionKind kind, std::vector<double> ratios, std::span<const LatencyCurve> curves,
                            const AccuracyModel& acc) {
  PruneDecision d;
  d.kind = kind;
  d.predicted_bottleneck = predicted_bottleneck(curves, ratios);
  d.predicted_accuracy = predict_accuracy(acc, ratios);
  d.ratios = std::move(ratios);
  return d;
}

// Lowest bottleneck reachable within the accuracy budget: keep pruning the
// slowest stage while its next grid step stays admissible.
std::vector<double> frontier(std::span<const LatencyCurve> curves, const AccuracyModel& acc,
                             std::span<const double> grid, double floor) {
  std::vector<std::size_t> idx(curves.size(), 0);
  for (;;) {
    std::size_t worst = 0;
    for (std::size_t i = 1; i < idx.size(); ++i) {
      if (predict_latency(curves[i], grid[idx[i]]) > predict_latency(curves[worst], grid[idx[worst]])) worst = i;
    }
    if (curves[worst].alpha >= 0 || idx[worst] + 1 >= grid.size()) break;
    auto trial = idx;
    ++trial[worst];
    if (accuracy_score(acc, to_ratios(grid, trial)) < floor) break;
    idx = std::move(trial);
  }
  return to_ratios(grid, idx);
}

}  // namespace

const char* to_string(TriggerState s) {
  switch (s) {
    case TriggerState::kQuiet: return "Quiet";
    case TriggerState::kOverloaded: return "Overloaded";
    case TriggerState::kCoolingDown: return "CoolingDown";
  }
  return "?";
}

const char* to_string(DecisionKind k) {
  switch (k) {
    case DecisionKind::kNoAction: return "NoAction";
    case DecisionKind::kPrune: return "Prune";
    case DecisionKind::kUnprune: return "Unprune";
    case DecisionKind::kInfeasible: return "Infeasible";
  }
  return "?";
}

void ControllerConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kConfigError, "controller: " + what); };
  if (!(slo > 0)) fail("slo must be > 0");
  if (!(trigger_margin > 0)) fail("trigger_margin must be > 0");
  if (!(violation_fraction > 0 && violation_fraction <= 1)) fail("violation_fraction must be in (0, 1]");
  if (!(window > 0)) fail("window must be > 0");
  if (!(cooldown > 0)) fail("cooldown must be > 0");
  if (!(sustain >= 0 && sustain <= window)) fail("sustain must be in [0, window]");
  if (!(a_min > 0 && a_min < 1)) fail("a_min must be in (0, 1)");
  if (!(unprune_deadband > 0 && unprune_deadband < 1)) fail("unprune_deadband must be in (0, 1)");
  if (!(unprune_idle >= 0)) fail("unprune_idle must be >= 0");
  if (!(unprune_max_utilization > 0 && unprune_max_utilization <= 1)) fail("unprune_max_utilization must be in (0, 1]");
  if (grid.empty() || grid.front() != 0.0) fail("grid must start at 0");
  if (!std::is_sorted(grid.begin(), grid.end()) || std::adjacent_find(grid.begin(), grid.end()) != grid.end()) {
    fail("grid must be strictly increasing");
  }
  if (grid.back() > 1.0) fail("grid ratios must lie in [0, 1]");
}

void record_latency(ControllerState& state, const ControllerConfig& config, double completion_time,
                    double latency) {
  if (!state.window.empty() && completion_time < state.last_time - kTimeTolerance) {
    throw Error(ErrorCode::kNonMonotonicTime, "completion at " + std::to_string(completion_time) +
                                                  " after " + std::to_string(state.last_time));
  }
  state.last_time = std::max(state.last_time, completion_time);
  state.window.push_back({completion_time, latency});
  while (!state.window.empty() && state.window.front().time < state.last_time - config.window) {
    state.window.pop_front();
  }
}

TriggerState evaluate_trigger(ControllerState& state, const ControllerConfig& config, double now) {
  while (!state.window.empty() && state.window.front().time < now - config.window) state.window.pop_front();
  const double threshold = config.trigger_latency();
  std::size_t over = 0;
  double first = 0.0, last = 0.0;
  for (const auto& o : state.window) {
    if (o.latency <= threshold) continue;
    if (over++ == 0) first = o.time;
    last = o.time;
  }
  const bool overloaded = state.window.size() >= config.min_samples &&
                          static_cast<double>(over) >= config.violation_fraction * static_cast<double>(state.window.size()) &&
                          (config.sustain <= 0 || (over > 0 && last - first >= config.sustain));
  if (!overloaded) return TriggerState::kQuiet;
  if (state.last_change_time && now - *state.last_change_time < config.cooldown) return TriggerState::kCoolingDown;
  return TriggerState::kOverloaded;
}

double predicted_bottleneck(std::span<const LatencyCurve> curves, std::span<const double> ratios) {
  if (curves.size() != ratios.size()) throw Error(ErrorCode::kDimensionMismatch, "ratio vector length");
  double worst = 0.0;
  for (std::size_t i = 0; i < curves.size(); ++i) worst = std::max(worst, predict_latency(curves[i], ratios[i]));
  return worst;
}

PruneDecision solve_ratios(std::span<const LatencyCurve> curves, const AccuracyModel& acc,
                           const ControllerConfig& config, double latency_target) {
  check_dims(curves, acc);
  const std::span<const double> grid = config.grid;
  const std::size_t n = curves.size();
  // a(p) >= A_min  <=>  sum_i gamma_i p_i >= delta + logit(A_min)
  const double budget = acc.delta + logit(config.a_min);
  const double tol = budget_tolerance(budget);
  std::vector<std::size_t> idx(n, 0);
  auto admissible = [&](std::span<const std::size_t> trial) {
    return accuracy_score(acc, to_ratios(grid, trial)) >= budget - tol;
  };
  auto stage = [&](std::size_t i, std::size_t g) { return predict_latency(curves[i], grid[g]); };

  if (!admissible(idx)) return make_decision(DecisionKind::kInfeasible, to_ratios(grid, idx), curves, acc);

  const auto order = priority_order(curves, acc);
  for (;;) {
    std::optional<std::size_t> chosen;
    for (std::size_t i : order) {
      if (stage(i, idx[i]) <= latency_target || curves[i].alpha >= 0 || idx[i] + 1 >= grid.size()) continue;
      auto trial = idx;
      ++trial[i];
      if (!admissible(trial)) continue;
      chosen = i;
      break;
    }
    if (!chosen) break;
    ++idx[*chosen];
  }
  auto ratios = to_ratios(grid, idx);
  if (predicted_bottleneck(curves, ratios) > latency_target) {
    return make_decision(DecisionKind::kInfeasible, frontier(curves, acc, grid, budget - tol), curves, acc);
  }

  // Back off in reverse priority while the target still holds.
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const std::size_t i = *it;
    while (idx[i] > 0) {
      auto trial = idx;
      --trial[i];
      if (stage(i, trial[i]) > latency_target || !admissible(trial)) break;
      idx = std::move(trial);
    }
  }
  ratios = to_ratios(grid, idx);
  const bool any = std::any_of(ratios.begin(), ratios.end(), [](double r) { return r > 0; });
  return make_decision(any ? DecisionKind::kPrune : DecisionKind::kNoAction, std::move(ratios), curves, acc);
}

PruneDecision evaluate_unprune(ControllerState& state, std::span<const LatencyCurve> curves,
                               const AccuracyModel& acc, const ControllerConfig& config, double now,
                               double target) {
  check_dims(curves, acc);
  PruneDecision none;
  none.ratios = state.current_ratios;
  const auto& cur = state.current_ratios;
  if (std::all_of(cur.begin(), cur.end(), [](double r) { return r == 0.0; })) return none;
  if (!state.calm_since || now - *state.calm_since < config.unprune_idle) return none;
  if (state.last_change_time && now - *state.last_change_time < config.unprune_idle) return none;
  if (state.calm_samples < config.min_samples || state.calm_peak > config.unprune_latency()) return none;

  const std::span<const double> grid = config.grid;
  const double budget = acc.delta + logit(config.a_min);
  const double tol = budget_tolerance(budget);
  std::vector<std::size_t> idx(cur.size());
  for (std::size_t i = 0; i < cur.size(); ++i) idx[i] = grid_index(grid, cur[i]);

  // Completion rate (two-sigma upper bound) and service stretch seen over the
  // calm stretch; the fastest request approximates an unqueued pass.
  double load = 0.0;
  if (!state.calm_window.empty() && config.unprune_idle > 0) {
    double fastest = state.calm_window.front().latency;
    for (const auto& o : state.calm_window) fastest = std::min(fastest, o.latency);
    double nominal = 0.0;
    for (std::size_t i = 0; i < cur.size(); ++i) nominal += predict_latency(curves[i], cur[i]);
    const auto n = static_cast<double>(state.calm_window.size());
    if (nominal > 0) load = (n + 2.0 * std::sqrt(n)) / config.unprune_idle * fastest / nominal;
  }

  const auto order = priority_order(curves, acc);
  bool changed = false;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const std::size_t i = *it;
    while (idx[i] > 0) {
      auto trial = idx;
      --trial[i];
      const auto p = to_ratios(grid, trial);
      const double bottleneck = predicted_bottleneck(curves, p);
      if (bottleneck > target || accuracy_score(acc, p) < budget - tol) break;
      if (load * bottleneck > config.unprune_max_utilization) break;
      idx = std::move(trial);
      changed = true;
    }
  }
  if (!changed) return none;
  return make_decision(DecisionKind::kUnprune, to_ratios(grid, idx), curves, acc);
}

std::string to_json_line(const DecisionRecord& r) {
  nlohmann::json j;
  j["time"] = r.time;
  j["phase"] = to_string(r.phase);
  j["decision"] = to_string(r.kind);
  j["ratios"] = r.ratios;
  j["predicted_latency"] = r.predicted_latency;
  j["predicted_accuracy"] = r.predicted_accuracy;
  j["observed_latency"] = r.observed_latency;
  return j.dump();
}

PruningController::PruningController(ControllerConfig config, std::vector<LatencyCurve> curves,
                                     AccuracyModel accuracy, std::vector<double> initial_ratios)
    : config_(std::move(config)), curves_(std::move(curves)), accuracy_(std::move(accuracy)) {
  config_.validate();
  check_dims(curves_, accuracy_);
  if (initial_ratios.empty()) initial_ratios.assign(curves_.size(), 0.0);
  if (initial_ratios.size() != curves_.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "initial ratio vector length");
  }
  for (double& r : initial_ratios) r = config_.grid[grid_index(config_.grid, r)];
  state_.current_ratios = std::move(initial_ratios);
}

double PruningController::observed_mean() const {
  if (state_.window.empty()) return 0.0;
  double s = 0.0;
  for (const auto& o : state_.window) s += o.latency;
  return s / static_cast<double>(state_.window.size());
}

void PruningController::commit(const PruneDecision& decision, double now) {
  state_.current_ratios = decision.ratios;
  state_.last_change_time = now;
  if (decision.kind == DecisionKind::kPrune) state_.last_prune_time = now;
  state_.calm_since = now;
  state_.calm_window.clear();
  state_.calm_peak = 0.0;
  state_.calm_samples = 0;
}

PruneDecision PruningController::observe(double completion_time, double latency) {
  record_latency(state_, config_, completion_time, latency);
  const double now = state_.last_time;
  auto& calm = state_.calm_window;
  if (latency > config_.unprune_latency()) {
    state_.calm_since = now;
    calm.clear();
  } else {
    if (!state_.calm_since) state_.calm_since = now;
    calm.push_back({now, latency});
    while (calm.front().time < now - config_.unprune_idle) calm.pop_front();
  }
  state_.calm_samples = calm.size();
  state_.calm_peak = 0.0;
  for (const auto& o : calm) state_.calm_peak = std::max(state_.calm_peak, o.latency);

  const TriggerState phase = evaluate_trigger(state_, config_, now);
  const double current_bottleneck = predicted_bottleneck(curves_, state_.current_ratios);
  auto record = [&](const PruneDecision& d, double observed) {
    log_.push_back({now, phase, d.kind, d.ratios, d.predicted_bottleneck, d.predicted_accuracy, observed});
  };
  if (phase != state_.phase) {
    state_.phase = phase;
    record(make_decision(DecisionKind::kNoAction, state_.current_ratios, curves_, accuracy_), observed_mean());
  }

  PruneDecision none;
  none.ratios = state_.current_ratios;
  if (phase == TriggerState::kOverloaded) {
    if (probe_ && !probe_(now)) return none;
    const double observed = observed_mean();
    const double target = observed > 0 ? config_.latency_target() * current_bottleneck / observed
                                       : config_.latency_target();
    PruneDecision d = solve_ratios(curves_, accuracy_, config_, target);
    if (d.kind == DecisionKind::kInfeasible) {
      if (!last_infeasible_log_ || now - *last_infeasible_log_ >= config_.window) {
        record(d, observed);
        last_infeasible_log_ = now;
      }
      if (!config_.best_effort_on_infeasible) return d;
    }
    if (d.predicted_bottleneck >= current_bottleneck) return none;
    d.kind = DecisionKind::kPrune;
    commit(d, now);
    record(d, observed);
    return d;
  }
  if (phase == TriggerState::kQuiet && state_.calm_peak > 0) {
    const double target = config_.unprune_latency() * current_bottleneck / state_.calm_peak;
    PruneDecision d = evaluate_unprune(state_, curves_, accuracy_, config_, now, target);
    if (d.kind == DecisionKind::kUnprune) {
      commit(d, now);
      record(d, state_.calm_peak);
    }
    return d;
  }
  return none;
}

}  // namespace edgeprune
