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

#include "edgeprune/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "edgeprune/errors.hpp"
#include "edgeprune/scenario.hpp"
#include "edgeprune/workload.hpp"

namespace edgeprune::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  bool force = false;
  bool quiet = false;
  bool no_controller = false;
};

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInfeasible: return kInfeasible;
    case ErrorCode::kDegenerateFit: return kDegenerateFit;
    case ErrorCode::kEmptyRun: return kEmptyRun;
    default: return kConfigError;
  }
}

class OutputExists : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Creates the output directory and refuses to clobber files unless forced.
fs::path prepare_outputs(const Options& o, std::initializer_list<const char*> names) {
  const fs::path dir(o.out_dir);
  fs::create_directories(dir);
  if (!o.force) {
    for (const char* n : names) {
      if (fs::exists(dir / n)) throw OutputExists((dir / n).string() + " exists (use --force to overwrite)");
    }
  }
  return dir;
}

Json provenance(const Config& c) {
  return {{"schema_version", kSchemaVersion}, {"config_hash", c.hash}, {"seed", c.seed ? Json(*c.seed) : Json()}};
}

std::string provenance_comment(const Config& c) {
  return "config_hash=" + c.hash + " seed=" + (c.seed ? std::to_string(*c.seed) : std::string("none"));
}

void write_json(const fs::path& path, const Json& j) {
  std::ofstream f(path);
  f << j.dump(2) << '\n';
}

int cmd_partition(const Options& o, std::ostream& out) {
  const Config config = Config::load(o.config, o.seed);
  const ModelGraph model = parse_model(config.section("model"));
  const auto devices = parse_devices(config.section("devices"));
  const auto plan = partition(model, devices);
  if (!plan) {
    throw Error(ErrorCode::kInfeasible, "no feasible placement of " + std::to_string(model.size()) + " layers on " +
                                            std::to_string(devices.size()) + " devices");
  }
  const fs::path dir = prepare_outputs(o, {"plan.json"});
  Json doc = provenance(config);
  doc.update(plan_to_json(*plan));
  write_json(dir / "plan.json", doc);
  if (!o.quiet) out << plan_table(*plan);
  return kOk;
}

int cmd_fit(const Options& o, std::ostream& out) {
  const Config config = Config::load(o.config, o.seed);
  const ModelGraph model = parse_model(config.section("model"));
  const auto devices = parse_devices(config.section("devices"));
  const PipelinePlan plan = resolve_plan(config, model, devices);
  const CurveSet curves = fit_benchmarks(collect_benchmarks(config, model, devices, plan));
  const fs::path dir = prepare_outputs(o, {"curves.json"});
  Json doc = provenance(config);
  doc.update(curves_to_json(curves));
  write_json(dir / "curves.json", doc);
  if (!o.quiet) {
    for (std::size_t i = 0; i < curves.latency.size(); ++i) {
      out << "slice " << i << ": alpha=" << curves.latency[i].alpha << " beta=" << curves.latency[i].beta
          << " gamma=" << curves.accuracy.gamma[i] << '\n';
    }
    out << "delta=" << curves.accuracy.delta << '\n';
  }
  return kOk;
}

int cmd_simulate(const Options& o, std::ostream& out) {
  const Config config = Config::load(o.config, o.seed);
  Scenario scenario = load_scenario(config);
  if (o.no_controller) scenario.options.controller_enabled = false;
  const RunResult result = run(scenario);
  const fs::path dir = prepare_outputs(o, {"requests.csv", "summary.json", "decisions.jsonl"});
  {
    std::ofstream csv(dir / "requests.csv");
    csv << "# " << provenance_comment(config) << '\n';
    write_requests_csv(csv, result.records);
  }
  Json summary = provenance(config);
  summary["controller_enabled"] = scenario.options.controller_enabled;
  summary["metrics"] = metrics_to_json(result.metrics);
  write_json(dir / "summary.json", summary);
  {
    std::ofstream log(dir / "decisions.jsonl");
    Json header = provenance(config);
    header["type"] = "header";
    log << header.dump() << '\n';
    for (const auto& d : result.decisions) log << to_json_line(d) << '\n';
  }
  const auto& m = result.metrics;
  const auto prunes = std::count_if(m.prune_events.begin(), m.prune_events.end(),
                                    [](const RatioChange& e) { return e.kind == DecisionKind::kPrune; });
  if (!o.quiet) {
    out << "p99=" << m.p99_latency << "s attainment=" << m.slo_attainment << " prunes=" << prunes
        << " requests=" << m.requests << '\n';
  }
  return kOk;
}

std::vector<std::vector<double>> sweep_ratio_vectors(const Json& ratios, std::size_t stages) {
  std::vector<std::vector<double>> out;
  for (const Json& r : ratios) {
    if (r.is_number()) {
      out.emplace_back(stages, r.get<double>());
    } else {
      auto v = r.get<std::vector<double>>();
      if (v.size() != stages) throw Error(ErrorCode::kConfigError, "sweep ratio vector needs one entry per stage");
      out.push_back(std::move(v));
    }
  }
  return out;
}

int cmd_sweep(const Options& o, std::ostream& out) {
  const Config config = Config::load(o.config, o.seed);
  const Json& sweep = config.section("sweep");
  const Scenario base = load_scenario(config, /*with_arrivals=*/false);
  const auto rates = sweep.at("rates").get<std::vector<double>>();
  const auto vectors = sweep_ratio_vectors(sweep.at("ratios"), base.plan.stages.size());
  const double duration = sweep.at("duration_s").get<double>();
  const std::uint64_t seed = config.seed_for(sweep, "sweep workload");
  const fs::path dir = prepare_outputs(o, {"sweep.csv"});

  std::ofstream csv(dir / "sweep.csv");
  csv << "# " << provenance_comment(config) << '\n';
  csv << "rate_hz,ratios,requests,mean_s,p95_s,p99_s,slo_attainment,status\n";
  csv << std::setprecision(10);
  std::size_t failed = 0;
  for (double rate : rates) {
    for (const auto& ratios : vectors) {
      std::ostringstream rs;
      for (std::size_t i = 0; i < ratios.size(); ++i) rs << (i ? ";" : "") << ratios[i];
      csv << rate << ',' << rs.str() << ',';
      try {
        Scenario cell = base;
        cell.options.controller_enabled = false;
        cell.options.initial_ratios = ratios;
        cell.arrivals = generate_poisson_arrivals(rate, duration, seed);
        const RunMetrics m = run(cell).metrics;
        csv << m.requests << ',' << m.mean_latency << ',' << m.p95_latency << ',' << m.p99_latency << ','
            << m.slo_attainment << ",ok\n";
      } catch (const Error& e) {
        ++failed;
        csv << ",,,,," << to_string(e.code()) << '\n';
      }
    }
  }
  if (!o.quiet) {
    out << rates.size() * vectors.size() << " cells, " << failed << " failed -> " << (dir / "sweep.csv").string()
        << '\n';
  }
  return kOk;
}

int cmd_gen_trace(const Options& o, std::ostream& out) {
  const Config config = Config::load(o.config, o.seed);
  const auto arrivals = resolve_arrivals(config);
  const fs::path dir = prepare_outputs(o, {"trace.txt"});
  write_trace(dir / "trace.txt", arrivals, provenance_comment(config));
  if (!o.quiet) out << arrivals.size() << " arrivals -> " << (dir / "trace.txt").string() << '\n';
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"edgeprune: SLO-driven dynamic pruning for pipelined edge inference"};
  app.require_subcommand(1);
  Options o;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "Scenario config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", o.out_dir, "Output directory");
    sub->add_option("--seed", o.seed, "Override the workload/benchmark seed");
    sub->add_flag("--force", o.force, "Overwrite existing outputs");
    sub->add_flag("--quiet", o.quiet, "Suppress the console summary");
  };
  auto* partition_cmd = app.add_subcommand("partition", "Place model slices on devices");
  auto* fit_cmd = app.add_subcommand("fit", "Fit latency/accuracy curves and write the cache");
  auto* simulate_cmd = app.add_subcommand("simulate", "Run the closed-loop pipeline simulation");
  auto* sweep_cmd = app.add_subcommand("sweep", "Pinned-ratio x arrival-rate sweep");
  auto* trace_cmd = app.add_subcommand("gen-trace", "Write the configured workload as a trace file");
  for (auto* sub : {partition_cmd, fit_cmd, simulate_cmd, sweep_cmd, trace_cmd}) add_common(sub);
  simulate_cmd->add_flag("--no-controller", o.no_controller, "Disable the pruning controller");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return e.get_name() == "ValidationError" ? kConfigError : kUsage;
  }

  try {
    if (*partition_cmd) return cmd_partition(o, out);
    if (*fit_cmd) return cmd_fit(o, out);
    if (*simulate_cmd) return cmd_simulate(o, out);
    if (*sweep_cmd) return cmd_sweep(o, out);
    if (*trace_cmd) return cmd_gen_trace(o, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const OutputExists& e) {
    err << "error: " << e.what() << '\n';
    return kOutputExists;
  } catch (const Json::exception& e) {
    err << "error: ConfigError: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInternal;
  }
  return kUsage;
}

}  // namespace edgeprune::cli
