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

#include "edgeprune/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include "edgeprune/errors.hpp"
#include "edgeprune/workload.hpp"

namespace edgeprune {

namespace {

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::kConfigError, what); }

template <typename T>
T get_or(const Json& j, std::string_view key, T fallback) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const Json::exception& e) {
    config_error("field '" + std::string(key) + "': " + e.what());
  }
}

template <typename T>
T require(const Json& j, std::string_view key, std::string_view where) {
  const auto it = j.find(key);
  if (it == j.end()) config_error(std::string(where) + ": missing '" + std::string(key) + "'");
  try {
    return it->get<T>();
  } catch (const Json::exception& e) {
    config_error(std::string(where) + "." + std::string(key) + ": " + e.what());
  }
}

std::vector<double> stage_ratios_or(const Json& j, std::string_view key) {
  return get_or<std::vector<double>>(j, key, {});
}

}  // namespace

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Config Config::load(const std::filesystem::path& path, std::optional<std::uint64_t> seed_override) {
  std::ifstream in(path);
  if (!in) config_error("cannot open config " + path.string());
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    config_error(path.string() + ": " + e.what());
  }
  return from_json(std::move(doc), path.parent_path().empty() ? "." : path.parent_path(), seed_override);
}

Config Config::from_json(Json doc, std::filesystem::path base_dir, std::optional<std::uint64_t> seed_override) {
  if (!doc.is_object()) config_error("config root must be an object");
  const int version = get_or<int>(doc, "schema_version", -1);
  if (version != kSchemaVersion) {
    config_error("unsupported schema_version " + std::to_string(version) + " (expected " +
                 std::to_string(kSchemaVersion) + ")");
  }
  Config c;
  c.hash = fnv1a_hex(doc.dump());
  c.doc = std::move(doc);
  c.base_dir = std::move(base_dir);
  c.seed_override = seed_override;
  c.seed = seed_override;
  if (!c.seed && c.doc.contains("seed")) c.seed = get_or<std::uint64_t>(c.doc, "seed", 0);
  return c;
}

const Json& Config::section(std::string_view name) const {
  const auto it = doc.find(name);
  if (it == doc.end()) config_error("missing '" + std::string(name) + "' section");
  return *it;
}

std::filesystem::path Config::resolve_path(const std::string& p) const {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base_dir / path;
}

std::uint64_t Config::seed_for(const Json& sec, std::string_view what) const {
  if (seed_override) return *seed_override;
  if (sec.is_object() && sec.contains("seed")) return get_or<std::uint64_t>(sec, "seed", 0);
  if (seed) return *seed;
  config_error(std::string(what) + " is stochastic and needs a seed");
}

double slope_for_speedup(double speedup, double ratio) { return (1.0 / speedup - 1.0) / ratio; }

DeviceProfile device_preset(std::string_view name) {
  DeviceProfile d;
  d.id = std::string(name);
  if (name == "pi4b") {
    d.speed = 100.0;
    d.memory_capacity = 2.0e9;
    d.bandwidth_out = 12.5e6;
    d.link_latency = 0.0005;
    d.latency_slope = slope_for_speedup(1.5, 0.3);
  } else if (name == "ryzen5950x") {
    d.speed = 1500.0;
    d.memory_capacity = 3.2e10;
    d.bandwidth_out = 125e6;
    d.link_latency = 0.0002;
    d.latency_slope = slope_for_speedup(1.17, 0.3);
  } else if (name == "rtx4070") {
    d.speed = 5000.0;
    d.memory_capacity = 8.0e9;
    d.bandwidth_out = 125e6;
    d.link_latency = 0.0002;
    d.latency_slope = slope_for_speedup(1.14, 0.3);
  } else {
    config_error("unknown device preset '" + std::string(name) + "'");
  }
  return d;
}

ModelGraph parse_model(const Json& j) {
  if (!j.is_object()) config_error("model must be an object");
  const auto seed = get_or<std::uint64_t>(j, "seed", 0);
  std::vector<LayerShape> shapes;
  std::vector<const Json*> explicit_weights;
  if (j.contains("widths")) {
    const auto widths = require<std::vector<int>>(j, "widths", "model");
    if (widths.size() < 2) config_error("model.widths needs at least two entries");
    const int kp = get_or<int>(j, "kernel_params", 1);
    const double wc = get_or<double>(j, "work_coeff", 1.0);
    for (std::size_t i = 1; i < widths.size(); ++i) shapes.push_back({widths[i - 1], widths[i], kp, wc});
    explicit_weights.assign(shapes.size(), nullptr);
  } else if (j.contains("layers")) {
    for (const Json& l : j.at("layers")) {
      shapes.push_back({require<int>(l, "in", "model.layers[]"), require<int>(l, "out", "model.layers[]"),
                        get_or<int>(l, "kernel_params", 1), get_or<double>(l, "work_coeff", 1.0)});
      explicit_weights.push_back(l.contains("weights") ? &l.at("weights") : nullptr);
    }
  } else {
    config_error("model needs 'widths' or 'layers'");
  }
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    const auto& s = shapes[i];
    if (s.in_channels <= 0 || s.out_channels <= 0 || s.kernel_params <= 0 || !(s.work_coeff > 0)) {
      config_error("model layer " + std::to_string(i) + " has non-positive size");
    }
    if (i > 0 && s.in_channels != shapes[i - 1].out_channels) {
      config_error("model layer " + std::to_string(i) + " breaks the channel chain");
    }
  }
  ModelGraph model = make_model(shapes, seed);
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    if (!explicit_weights[i]) continue;
    Layer& layer = model.layers[i];
    const auto rows = explicit_weights[i]->get<std::vector<std::vector<double>>>();
    if (rows.size() != static_cast<std::size_t>(layer.out_channels)) {
      config_error("model layer " + std::to_string(i) + ": weights need one row per output channel");
    }
    layer.weights.clear();
    for (const auto& row : rows) {
      if (row.size() != layer.row_width()) {
        config_error("model layer " + std::to_string(i) + ": weight row length must be in * kernel_params");
      }
      layer.weights.insert(layer.weights.end(), row.begin(), row.end());
    }
  }
  return model;
}

std::vector<DeviceProfile> parse_devices(const Json& j) {
  if (!j.is_array() || j.empty()) config_error("devices must be a non-empty list");
  std::vector<DeviceProfile> out;
  for (const Json& d : j) {
    DeviceProfile p = d.contains("preset") ? device_preset(require<std::string>(d, "preset", "device")) : DeviceProfile{};
    p.id = get_or<std::string>(d, "id", d.contains("preset") ? p.id : "device" + std::to_string(out.size()));
    p.speed = get_or<double>(d, "speed", p.speed);
    p.memory_capacity = get_or<double>(d, "memory", p.memory_capacity);
    p.bandwidth_out = get_or<double>(d, "bandwidth", p.bandwidth_out);
    p.link_latency = get_or<double>(d, "link_latency", p.link_latency);
    p.latency_slope = get_or<double>(d, "latency_slope", p.latency_slope);
    if (d.contains("slowdowns")) {
      for (const Json& s : d.at("slowdowns")) {
        p.slowdowns.push_back({require<double>(s, "start_s", "slowdown"), require<double>(s, "duration_s", "slowdown"),
                               require<double>(s, "multiplier", "slowdown")});
      }
    }
    p.validate();
    out.push_back(std::move(p));
  }
  return out;
}

ControllerConfig parse_controller(const Json& j) {
  ControllerConfig c;
  if (j.is_null()) return c;
  if (!j.is_object()) config_error("controller must be an object");
  c.slo = require<double>(j, "slo", "controller");
  c.trigger_margin = get_or(j, "trigger_margin", c.trigger_margin);
  c.violation_fraction = get_or(j, "violation_fraction", c.violation_fraction);
  c.window = get_or(j, "window", c.window);
  c.min_samples = get_or(j, "min_samples", c.min_samples);
  c.sustain = get_or(j, "sustain", c.sustain);
  c.cooldown = get_or(j, "cooldown", c.cooldown);
  c.a_min = get_or(j, "a_min", c.a_min);
  c.grid = get_or(j, "grid", c.grid);
  c.unprune_idle = get_or(j, "unprune_idle", c.unprune_idle);
  c.unprune_deadband = get_or(j, "unprune_deadband", c.unprune_deadband);
  c.unprune_max_utilization = get_or(j, "unprune_max_utilization", c.unprune_max_utilization);
  c.best_effort_on_infeasible = get_or(j, "best_effort_on_infeasible", c.best_effort_on_infeasible);
  c.validate();
  return c;
}

AccuracyModel parse_accuracy(const Json& j) {
  return {require<std::vector<double>>(j, "gamma", "accuracy"), require<double>(j, "delta", "accuracy")};
}

PipelinePlan resolve_plan(const Config& config, const ModelGraph& model, const std::vector<DeviceProfile>& devices) {
  const Json plan = config.doc.value("plan", Json("auto"));
  if (plan.is_string() && plan.get<std::string>() == "auto") {
    auto p = partition(model, devices);
    if (!p) {
      throw Error(ErrorCode::kInfeasible, "no memory-feasible placement of " + std::to_string(model.size()) +
                                              " layers on " + std::to_string(devices.size()) + " devices");
    }
    return *p;
  }
  if (plan.is_object() && plan.contains("file")) {
    const auto path = config.resolve_path(require<std::string>(plan, "file", "plan"));
    std::ifstream in(path);
    if (!in) config_error("cannot open plan file " + path.string());
    return plan_from_json(Json::parse(in), model, devices);
  }
  if (plan.is_object()) return plan_from_json(plan, model, devices);
  config_error("plan must be \"auto\", {\"file\": ...} or {\"stages\": [...]}");
}

BenchmarkData collect_benchmarks(const Config& config, const ModelGraph& model,
                                 const std::vector<DeviceProfile>& devices, const PipelinePlan& plan) {
  const Json bench = config.doc.value("benchmark", Json::object());
  const auto grid = get_or<std::vector<double>>(bench, "grid", default_benchmark_grid());
  const double latency_noise = get_or<double>(bench, "latency_noise", 0.0);
  const double accuracy_noise = get_or<double>(bench, "accuracy_noise", 0.0);
  const std::size_t n = plan.stages.size();
  std::mt19937_64 rng(latency_noise > 0 || accuracy_noise > 0 ? config.seed_for(bench, "benchmark noise") : 0);
  std::normal_distribution<double> normal(0.0, 1.0);
  BenchmarkData data;

  if (bench.contains("latency")) {
    const auto per_stage = bench.at("latency").get<std::vector<std::vector<std::array<double, 2>>>>();
    if (per_stage.size() != n) config_error("benchmark.latency needs one sample list per stage");
    for (const auto& samples : per_stage) {
      auto& out = data.latency.emplace_back();
      for (const auto& [r, t] : samples) out.push_back({r, t});
    }
  } else {
    for (const Stage& st : plan.stages) {
      const DeviceProfile& d = devices[st.device];
      auto& out = data.latency.emplace_back();
      for (double r : grid) {
        double t = st.predicted_latency * std::max(0.0, 1.0 + d.latency_slope * r);
        if (latency_noise > 0) t *= 1.0 + latency_noise * normal(rng);
        out.push_back({r, t});
      }
    }
  }

  if (bench.contains("accuracy")) {
    for (const Json& s : bench.at("accuracy")) {
      data.accuracy.push_back({require<std::vector<double>>(s, "ratios", "benchmark.accuracy[]"),
                               require<double>(s, "accuracy", "benchmark.accuracy[]")});
    }
  } else {
    const AccuracyModel truth = parse_accuracy(config.section("ground_truth"));
    if (truth.slices() != n) config_error("ground_truth needs one gamma per stage");
    for (auto& p : accuracy_sample_plan(n, grid)) {
      double a = predict_accuracy(truth, p);
      if (accuracy_noise > 0) a = std::clamp(a + accuracy_noise * normal(rng), 1e-6, 1.0 - 1e-6);
      data.accuracy.push_back({std::move(p), a});
    }
  }
  (void)model;
  return data;
}

CurveSet fit_benchmarks(const BenchmarkData& data) {
  CurveSet out;
  for (std::size_t i = 0; i < data.latency.size(); ++i) {
    try {
      out.latency.push_back(fit_latency(data.latency[i]));
    } catch (const Error& e) {
      throw Error(e.code(), "slice " + std::to_string(i) + ": " + e.what());
    }
  }
  try {
    out.accuracy = fit_accuracy(data.accuracy);
  } catch (const Error& e) {
    throw Error(e.code(), "accuracy model: " + std::string(e.what()));
  }
  if (out.accuracy.slices() != out.latency.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "accuracy samples do not match the stage count");
  }
  return out;
}

CurveSet resolve_curves(const Config& config, const ModelGraph& model, const std::vector<DeviceProfile>& devices,
                        const PipelinePlan& plan) {
  const Json curves = config.doc.value("curves", Json("auto"));
  if (curves.is_string() && curves.get<std::string>() == "auto") {
    return fit_benchmarks(collect_benchmarks(config, model, devices, plan));
  }
  if (curves.is_object() && curves.contains("file")) {
    const auto path = config.resolve_path(require<std::string>(curves, "file", "curves"));
    std::ifstream in(path);
    if (!in) config_error("cannot open curve cache " + path.string());
    return curves_from_json(Json::parse(in));
  }
  if (curves.is_object()) return curves_from_json(curves);
  config_error("curves must be \"auto\", {\"file\": ...} or inline parameters");
}

std::vector<double> resolve_arrivals(const Config& config) {
  const Json& w = config.section("workload");
  const auto kind = require<std::string>(w, "kind", "workload");
  if (kind == "poisson") {
    return generate_poisson_arrivals(require<double>(w, "rate_hz", "workload"), require<double>(w, "duration_s", "workload"),
                                     config.seed_for(w, "poisson workload"));
  }
  if (kind == "constant") {
    return generate_constant_arrivals(require<double>(w, "interval_s", "workload"),
                                      require<double>(w, "duration_s", "workload"), get_or<double>(w, "start_s", 0.0));
  }
  if (kind == "phases") {
    std::vector<RatePhase> phases;
    for (const Json& p : w.at("phases")) {
      phases.push_back({require<double>(p, "duration_s", "phase"), require<double>(p, "rate_hz", "phase")});
    }
    return generate_phased_arrivals(phases, config.seed_for(w, "phased workload"));
  }
  if (kind == "bursty") {
    BurstyTraceConfig b;
    b.duration_s = require<double>(w, "duration_s", "workload");
    b.base_rate_hz = get_or(w, "base_rate_hz", b.base_rate_hz);
    b.random_bursts = get_or(w, "random_bursts", b.random_bursts);
    b.random_burst_duration_s = get_or(w, "random_burst_duration_s", b.random_burst_duration_s);
    b.random_burst_rate_hz = get_or(w, "random_burst_rate_hz", b.random_burst_rate_hz);
    if (w.contains("bursts")) {
      for (const Json& x : w.at("bursts")) {
        b.bursts.push_back({require<double>(x, "start_s", "burst"), require<double>(x, "duration_s", "burst"),
                            require<double>(x, "rate_hz", "burst")});
      }
    }
    b.seed = config.seed_for(w, "bursty workload");
    return generate_bursty_trace(b);
  }
  if (kind == "trace") return read_trace(config.resolve_path(require<std::string>(w, "path", "workload")));
  config_error("unknown workload kind '" + kind + "'");
}

Scenario load_scenario(const Config& config, bool with_arrivals) {
  Scenario s;
  s.model = parse_model(config.section("model"));
  s.devices = parse_devices(config.section("devices"));
  s.plan = resolve_plan(config, s.model, s.devices);
  const CurveSet curves = resolve_curves(config, s.model, s.devices, s.plan);
  s.curves = curves.latency;
  s.accuracy = curves.accuracy;
  s.ground_truth = config.has("ground_truth") ? parse_accuracy(config.section("ground_truth")) : curves.accuracy;
  s.controller = parse_controller(config.section("controller"));
  const Json sim = config.doc.value("simulation", Json::object());
  s.options.prune_overhead_s = get_or(sim, "prune_overhead_s", s.options.prune_overhead_s);
  s.options.bytes_per_channel = get_or(sim, "bytes_per_channel", s.options.bytes_per_channel);
  s.options.initial_ratios = stage_ratios_or(sim, "initial_ratios");
  s.options.controller_enabled = get_or(config.section("controller"), "enabled", true);
  if (with_arrivals) s.arrivals = resolve_arrivals(config);
  s.validate();
  return s;
}

Json plan_to_json(const PipelinePlan& plan) {
  Json stages = Json::array();
  for (const Stage& s : plan.stages) {
    stages.push_back({{"device", s.device_id},
                      {"layers", {s.layers.begin, s.layers.end}},
                      {"predicted_latency", s.predicted_latency},
                      {"params", s.param_count}});
  }
  return {{"stages", stages}, {"makespan", plan.makespan}};
}

PipelinePlan plan_from_json(const Json& j, const ModelGraph& model, const std::vector<DeviceProfile>& devices) {
  if (!j.contains("stages")) config_error("plan needs 'stages'");
  std::vector<LayerRange> ranges;
  std::size_t k = 0;
  for (const Json& s : j.at("stages")) {
    const auto layers = require<std::array<std::size_t, 2>>(s, "layers", "plan.stages[]");
    if (s.contains("device")) {
      const auto id = s.at("device").get<std::string>();
      if (k >= devices.size() || devices[k].id != id) {
        config_error("plan stage " + std::to_string(k) + " names device '" + id + "' out of pipeline order");
      }
    }
    ranges.push_back({layers[0], layers[1]});
    ++k;
  }
  return make_plan(model, devices, ranges);
}

Json curves_to_json(const CurveSet& curves) {
  Json latency = Json::array();
  for (const auto& c : curves.latency) latency.push_back({{"alpha", c.alpha}, {"beta", c.beta}});
  return {{"latency", latency}, {"accuracy", {{"gamma", curves.accuracy.gamma}, {"delta", curves.accuracy.delta}}}};
}

CurveSet curves_from_json(const Json& j) {
  CurveSet out;
  for (const Json& c : require<Json>(j, "latency", "curves")) {
    out.latency.push_back({require<double>(c, "alpha", "curves.latency[]"), require<double>(c, "beta", "curves.latency[]")});
  }
  out.accuracy = parse_accuracy(require<Json>(j, "accuracy", "curves"));
  return out;
}

Json metrics_to_json(const RunMetrics& m) {
  Json events = Json::array();
  for (const auto& e : m.prune_events) {
    events.push_back({{"decision_s", e.decision_s},
                      {"applied_s", e.applied_s},
                      {"kind", to_string(e.kind)},
                      {"old", e.old_ratios},
                      {"new", e.new_ratios},
                      {"params", e.param_count}});
  }
  Json timeline = Json::array();
  for (const auto& a : m.accuracy_timeline) timeline.push_back({a.time_s, a.accuracy});
  return {{"requests", m.requests},
          {"mean_latency", m.mean_latency},
          {"p50_latency", m.p50_latency},
          {"p95_latency", m.p95_latency},
          {"p99_latency", m.p99_latency},
          {"slo_attainment", m.slo_attainment},
          {"throughput", m.throughput},
          {"prune_events", events},
          {"accuracy_timeline", timeline}};
}

std::string plan_table(const PipelinePlan& plan) {
  std::ostringstream out;
  out << std::left << std::setw(6) << "stage" << std::setw(16) << "device" << std::setw(12) << "layers"
      << std::setw(16) << "latency_s" << "params\n";
  for (std::size_t k = 0; k < plan.stages.size(); ++k) {
    const Stage& s = plan.stages[k];
    std::ostringstream range;
    range << '[' << s.layers.begin << ", " << s.layers.end << ')';
    out << std::setw(6) << k << std::setw(16) << s.device_id << std::setw(12) << range.str() << std::setw(16)
        << s.predicted_latency << s.param_count << '\n';
  }
  out << "makespan " << plan.makespan << " s\n";
  return out.str();
}

void write_requests_csv(std::ostream& out, const std::vector<RequestRecord>& records) {
  out << "id,arrival_s,completion_s,latency_s,slo_met,ratios\n";
  out << std::setprecision(17);
  for (const auto& r : records) {
    out << r.id << ',' << r.arrival_s << ',' << r.completion_s << ',' << r.latency_s << ',' << (r.slo_met ? 1 : 0) << ',';
    for (std::size_t i = 0; i < r.ratios.size(); ++i) out << (i ? ";" : "") << r.ratios[i];
    out << '\n';
  }
}

}  // namespace edgeprune
