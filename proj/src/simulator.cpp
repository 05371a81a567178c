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

#include "edgeprune/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <optional>
#include <queue>

#include "edgeprune/errors.hpp"

namespace edgeprune {

namespace {

enum class EventKind { kArrival, kServiceDone, kTransferDone, kApplyRatios };

struct Event {
  double time = 0.0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::kArrival;
  std::size_t request = 0;
  std::size_t stage = 0;
  std::size_t change = 0;  // index into prune events for kApplyRatios
  std::uint64_t token = 0;  // kServiceDone: must match the stage's current token
};

struct Later {
  bool operator()(const Event& a, const Event& b) const {
    return a.time != b.time ? a.time > b.time : a.seq > b.seq;
  }
};

struct StageState {
  std::deque<std::size_t> queue;
  bool busy = false;
  std::size_t serving = 0;
  double done_at = 0.0;
  std::uint64_t token = 0;
  double blocked_until = 0.0;
};

class Simulation {
 public:
  explicit Simulation(const Scenario& s)
      : s_(s), stages_(s.plan.stages.size()), ratios_(initial_ratios(s)) {
    if (s.options.controller_enabled) {
      controller_.emplace(s.controller, s.curves, s.accuracy, ratios_);
      ratios_ = controller_->state().current_ratios;
    }
    deployed_ = deploy(s.model, s.plan, ratios_);
  }

  RunResult run() {
    result_.records.resize(s_.arrivals.size());
    for (std::size_t r = 0; r < s_.arrivals.size(); ++r) {
      auto& rec = result_.records[r];
      rec.id = r;
      rec.arrival_s = s_.arrivals[r];
      rec.stage_start.assign(stages_.size(), 0.0);
      rec.stage_end.assign(stages_.size(), 0.0);
      rec.ratios.assign(stages_.size(), 0.0);
      push({s_.arrivals[r], 0, EventKind::kArrival, r, 0, 0});
    }
    result_.metrics.accuracy_timeline.push_back({0.0, predict_accuracy(s_.ground_truth, ratios_)});

    while (!events_.empty()) {
      const Event e = events_.top();
      events_.pop();
      switch (e.kind) {
        case EventKind::kArrival: enqueue(0, e.request, e.time); break;
        case EventKind::kTransferDone: enqueue(e.stage, e.request, e.time); break;
        case EventKind::kServiceDone:
          if (e.token == stages_[e.stage].token) service_done(e);
          break;
        case EventKind::kApplyRatios: apply(e); break;
      }
    }

    auto prune_events = std::move(result_.metrics.prune_events);
    auto timeline = std::move(result_.metrics.accuracy_timeline);
    result_.metrics = summarize(result_.records, s_.controller.slo);
    result_.metrics.prune_events = std::move(prune_events);
    result_.metrics.accuracy_timeline = std::move(timeline);
    if (controller_) result_.decisions = controller_->log();
    return std::move(result_);
  }

 private:
  static std::vector<double> initial_ratios(const Scenario& s) {
    if (s.options.initial_ratios.empty()) return std::vector<double>(s.plan.stages.size(), 0.0);
    return s.options.initial_ratios;
  }

  void push(Event e) {
    e.seq = next_seq_++;
    events_.push(e);
  }

  void enqueue(std::size_t stage, std::size_t request, double now) {
    stages_[stage].queue.push_back(request);
    try_start(stage, now);
  }

  void try_start(std::size_t i, double now) {
    StageState& st = stages_[i];
    if (st.busy || st.queue.empty() || now < st.blocked_until) return;
    const std::size_t r = st.queue.front();
    st.queue.pop_front();
    st.busy = true;
    auto& rec = result_.records[r];
    rec.stage_start[i] = now;
    rec.ratios[i] = ratios_[i];
    const DeviceProfile& dev = s_.devices[s_.plan.stages[i].device];
    const double service = predict_latency(s_.curves[i], ratios_[i]) / dev.speed_multiplier(now);
    st.serving = r;
    st.done_at = now + service;
    push({st.done_at, 0, EventKind::kServiceDone, r, i, 0, ++st.token});
  }

  double transfer_time(std::size_t i, double ratio) const {
    const Stage& stage = s_.plan.stages[i];
    const DeviceProfile& dev = s_.devices[stage.device];
    const int channels = s_.model.layers[stage.layers.end - 1].out_channels;
    const double payload = surviving_channel_count(channels, ratio) * s_.options.bytes_per_channel;
    return dev.link_latency + payload / dev.bandwidth_out;
  }

  void service_done(const Event& e) {
    const std::size_t i = e.stage;
    auto& rec = result_.records[e.request];
    rec.stage_end[i] = e.time;
    stages_[i].busy = false;
    if (i + 1 < stages_.size()) {
      push({e.time + transfer_time(i, rec.ratios[i]), 0, EventKind::kTransferDone, e.request, i + 1, 0});
    } else {
      rec.completion_s = e.time;
      rec.latency_s = rec.completion_s - rec.arrival_s;
      rec.slo_met = rec.latency_s <= s_.controller.slo;
      if (controller_) observe(e.time, rec.latency_s);
    }
    try_start(i, e.time);
  }

  void observe(double now, double latency) {
    const PruneDecision d = controller_->observe(now, latency);
    if (d.kind != DecisionKind::kPrune && d.kind != DecisionKind::kUnprune) return;
    const double overhead = s_.options.prune_overhead_s;
    const double applied = now + overhead;
    // Every stage halts for the swap; work in flight finishes late.
    for (std::size_t i = 0; i < stages_.size(); ++i) {
      StageState& st = stages_[i];
      st.blocked_until = std::max(st.blocked_until, applied);
      if (st.busy && overhead > 0) {
        st.done_at += overhead;
        push({st.done_at, 0, EventKind::kServiceDone, st.serving, i, 0, ++st.token});
      }
    }
    result_.metrics.prune_events.push_back({now, applied, d.kind, pending_ratios(), d.ratios, 0});
    push({applied, 0, EventKind::kApplyRatios, 0, 0, result_.metrics.prune_events.size() - 1});
  }

  // Ratios that will be in force once every scheduled change has landed.
  std::vector<double> pending_ratios() const {
    const auto& events = result_.metrics.prune_events;
    return events.empty() ? ratios_ : events.back().new_ratios;
  }

  void apply(const Event& e) {
    RatioChange& change = result_.metrics.prune_events[e.change];
    ratios_ = change.new_ratios;
    deployed_ = deploy(s_.model, s_.plan, ratios_);
    change.param_count = cost_metrics(deployed_, deployed_.all()).param_count;
    result_.metrics.accuracy_timeline.push_back({e.time, predict_accuracy(s_.ground_truth, ratios_)});
    for (std::size_t i = 0; i < stages_.size(); ++i) try_start(i, e.time);
  }

  const Scenario& s_;
  std::vector<StageState> stages_;
  std::vector<double> ratios_;
  std::optional<PruningController> controller_;
  ModelGraph deployed_;
  std::priority_queue<Event, std::vector<Event>, Later> events_;
  std::uint64_t next_seq_ = 0;
  RunResult result_;
};

}  // namespace

void Scenario::validate() const {
  model.validate();
  if (devices.empty()) throw Error(ErrorCode::kConfigError, "scenario has no devices");
  for (const auto& d : devices) d.validate();
  controller.validate();
  const std::size_t n = plan.stages.size();
  if (n == 0 || n > devices.size()) throw Error(ErrorCode::kConfigError, "plan stage count must be in [1, devices]");
  std::size_t expect = 0;
  for (const Stage& st : plan.stages) {
    if (st.device >= devices.size()) throw Error(ErrorCode::kConfigError, "plan references unknown device");
    if (st.layers.begin != expect || st.layers.empty()) throw Error(ErrorCode::kConfigError, "plan is not contiguous");
    expect = st.layers.end;
  }
  if (expect != model.size()) throw Error(ErrorCode::kConfigError, "plan does not cover the model");
  if (curves.size() != n) throw Error(ErrorCode::kConfigError, "need one latency curve per stage");
  if (accuracy.slices() != n || ground_truth.slices() != n) {
    throw Error(ErrorCode::kConfigError, "accuracy models must have one weight per stage");
  }
  for (const auto& c : curves) {
    if (!(c.beta > 0)) throw Error(ErrorCode::kConfigError, "latency curve beta must be > 0");
  }
  if (!std::is_sorted(arrivals.begin(), arrivals.end())) throw Error(ErrorCode::kConfigError, "arrivals not sorted");
  if (!(options.prune_overhead_s >= 0) || !(options.bytes_per_channel >= 0)) {
    throw Error(ErrorCode::kConfigError, "negative prune overhead or payload size");
  }
  if (!options.initial_ratios.empty()) {
    if (options.initial_ratios.size() != n) throw Error(ErrorCode::kConfigError, "pinned ratios need one value per stage");
    for (double r : options.initial_ratios) {
      if (!(r >= 0 && r <= 1)) throw Error(ErrorCode::kConfigError, "pinned ratio outside [0, 1]");
      if (options.controller_enabled &&
          std::find(controller.grid.begin(), controller.grid.end(), r) == controller.grid.end()) {
        throw Error(ErrorCode::kConfigError, "initial ratios must lie on the controller grid");
      }
    }
  }
}

double nearest_rank(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw Error(ErrorCode::kEmptyRun, "percentile of empty sample");
  const auto n = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil(q * n - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

RunMetrics summarize(std::span<const RequestRecord> records, double slo) {
  if (records.empty()) throw Error(ErrorCode::kEmptyRun, "no requests completed");
  std::vector<double> lat;
  lat.reserve(records.size());
  double sum = 0.0;
  std::size_t met = 0;
  double first_arrival = std::numeric_limits<double>::infinity();
  double last_completion = -std::numeric_limits<double>::infinity();
  for (const auto& r : records) {
    lat.push_back(r.latency_s);
    sum += r.latency_s;
    if (r.latency_s <= slo) ++met;
    first_arrival = std::min(first_arrival, r.arrival_s);
    last_completion = std::max(last_completion, r.completion_s);
  }
  std::sort(lat.begin(), lat.end());
  RunMetrics m;
  m.requests = records.size();
  m.mean_latency = sum / static_cast<double>(records.size());
  m.p50_latency = nearest_rank(lat, 0.50);
  m.p95_latency = nearest_rank(lat, 0.95);
  m.p99_latency = nearest_rank(lat, 0.99);
  m.slo_attainment = static_cast<double>(met) / static_cast<double>(records.size());
  const double span = last_completion - first_arrival;
  m.throughput = span > 0 ? static_cast<double>(records.size()) / span : 0.0;
  return m;
}

ModelGraph deploy(const ModelGraph& model, const PipelinePlan& plan, std::span<const double> ratios) {
  if (ratios.size() != plan.stages.size()) throw Error(ErrorCode::kDimensionMismatch, "one ratio per stage");
  ModelGraph m = model;
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    if (ratios[i] > 0) m = apply_prune(m, plan.stages[i].layers, ratios[i]).model;
  }
  return m;
}

RunResult run(const Scenario& scenario) {
  scenario.validate();
  if (scenario.arrivals.empty()) throw Error(ErrorCode::kEmptyRun, "workload produced no arrivals");
  return Simulation(scenario).run();
}

}  // namespace edgeprune
