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

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "edgeprune/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kScenarios{EDGEPRUNE_SCENARIO_DIR};

struct Invocation {
  int code = -1;
  std::string out;
  std::string err;
};

Invocation invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  Invocation r;
  r.code = edgeprune::cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("edgeprune_cli_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str(const std::string& sub = "") const { return (sub.empty() ? path : path / sub).string(); }
};

json read_json(const fs::path& p) {
  std::ifstream f(p);
  return json::parse(f);
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path write_config(const TempDir& dir, const std::string& name, const json& doc) {
  const fs::path p = dir.path / name;
  std::ofstream f(p);
  f << doc.dump(2);
  return p;
}

json small_config() { return read_json(kScenarios / "two_stage_small.json"); }

// Reads sweep.csv rows (skipping the comment and header lines).
std::vector<std::vector<std::string>> csv_rows(const fs::path& p) {
  std::ifstream f(p);
  std::string line;
  std::vector<std::vector<std::string>> rows;
  bool header = false;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("partition writes the optimal plan") {
  TempDir dir("partition");
  const auto r = invoke({"partition", "--config", (kScenarios / "partition_4x2.json").string(), "--out", dir.str()});
  REQUIRE(r.code == 0);
  const auto plan = read_json(dir.path / "plan.json");
  CHECK(plan.at("makespan").get<double>() == doctest::Approx(5.0));
  CHECK(plan.at("stages").size() == 2);
  CHECK(plan.at("stages")[0].at("layers") == json::array({0, 2}));
  CHECK(plan.contains("config_hash"));
}

TEST_CASE("partition error exits") {
  TempDir dir("partition_err");
  auto doc = read_json(kScenarios / "partition_4x2.json");
  doc.erase("devices");
  const auto missing = write_config(dir, "missing.json", doc);
  CHECK(invoke({"partition", "--config", missing.string(), "--out", dir.str("o1")}).code == 2);

  doc = read_json(kScenarios / "partition_4x2.json");
  doc["model"]["layers"] = json::array({json{{"in", 1}, {"out", 1}}});
  const auto tiny = write_config(dir, "tiny.json", doc);
  const auto r = invoke({"partition", "--config", tiny.string(), "--out", dir.str("o2")});
  CHECK(r.code == 3);
  CHECK(r.err.find("Infeasible") != std::string::npos);

  CHECK(invoke({"partition", "--config", dir.str("nope.json")}).code == 2);
  CHECK(invoke({"bogus"}).code == 64);
  CHECK(invoke({}).code == 64);

  doc = read_json(kScenarios / "partition_4x2.json");
  doc["schema_version"] = 7;
  const auto wrong = write_config(dir, "wrong.json", doc);
  CHECK(invoke({"partition", "--config", wrong.string(), "--out", dir.str("o3")}).code == 2);
}

TEST_CASE("fit recovers the configured curves") {
  TempDir dir("fit");
  const auto cfg = (kScenarios / "two_stage_small.json").string();
  REQUIRE(invoke({"fit", "--config", cfg, "--out", dir.str("a"), "--quiet"}).code == 0);
  const auto curves = read_json(dir.path / "a" / "curves.json");
  for (const auto& c : curves.at("latency")) {
    CHECK(c.at("beta").get<double>() == doctest::Approx(0.512).epsilon(1e-6));
    CHECK(c.at("alpha").get<double>() == doctest::Approx(-0.512).epsilon(1e-6));
  }
  for (const auto& g : curves.at("accuracy").at("gamma")) CHECK(g.get<double>() == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK(curves.at("accuracy").at("delta").get<double>() == doctest::Approx(-3.0).epsilon(1e-6));

  REQUIRE(invoke({"fit", "--config", cfg, "--out", dir.str("b"), "--quiet"}).code == 0);
  CHECK(slurp(dir.path / "a" / "curves.json") == slurp(dir.path / "b" / "curves.json"));
}

TEST_CASE("fit reports a degenerate slice") {
  TempDir dir("fit_degenerate");
  auto doc = small_config();
  doc["benchmark"] = {{"latency", json::array({json::array({json::array({0.0, 0.5}), json::array({0.5, 0.3})}),
                                               json::array({json::array({0.5, 0.4}), json::array({0.5, 0.41})})})}};
  const auto cfg = write_config(dir, "degenerate.json", doc);
  const auto r = invoke({"fit", "--config", cfg.string(), "--out", dir.str("o")});
  CHECK(r.code == 4);
  CHECK(r.err.find("slice 1") != std::string::npos);
}

TEST_CASE("simulate with and without the controller") {
  TempDir dir("simulate");
  const auto cfg = (kScenarios / "two_stage_small.json").string();
  REQUIRE(invoke({"simulate", "--config", cfg, "--out", dir.str("on"), "--quiet"}).code == 0);
  REQUIRE(invoke({"simulate", "--config", cfg, "--out", dir.str("off"), "--quiet", "--no-controller"}).code == 0);
  const auto on = read_json(dir.path / "on" / "summary.json");
  const auto off = read_json(dir.path / "off" / "summary.json");
  CHECK(on.at("controller_enabled") == true);
  CHECK(off.at("controller_enabled") == false);
  CHECK(on.at("metrics").at("requests") == off.at("metrics").at("requests"));
  CHECK_FALSE(on.at("metrics").at("prune_events").empty());
  CHECK(off.at("metrics").at("prune_events").empty());
  CHECK(on.at("metrics").at("p99_latency").get<double>() < off.at("metrics").at("p99_latency").get<double>());
  CHECK(fs::exists(dir.path / "on" / "requests.csv"));
  CHECK(fs::exists(dir.path / "on" / "decisions.jsonl"));

  // Rerun is byte-identical.
  REQUIRE(invoke({"simulate", "--config", cfg, "--out", dir.str("on2"), "--quiet"}).code == 0);
  CHECK(slurp(dir.path / "on" / "summary.json") == slurp(dir.path / "on2" / "summary.json"));
  CHECK(slurp(dir.path / "on" / "requests.csv") == slurp(dir.path / "on2" / "requests.csv"));
}

TEST_CASE("simulate refuses to overwrite without --force") {
  TempDir dir("force");
  const auto cfg = (kScenarios / "two_stage_small.json").string();
  REQUIRE(invoke({"simulate", "--config", cfg, "--out", dir.str(), "--quiet"}).code == 0);
  CHECK(invoke({"simulate", "--config", cfg, "--out", dir.str(), "--quiet"}).code == 6);
  CHECK(invoke({"simulate", "--config", cfg, "--out", dir.str(), "--quiet", "--force"}).code == 0);
}

TEST_CASE("seed override keeps the config hash") {
  TempDir dir("seed");
  auto doc = small_config();
  doc["workload"] = {{"kind", "poisson"}, {"rate_hz", 1.0}, {"duration_s", 60}};
  const auto cfg = write_config(dir, "poisson.json", doc).string();
  REQUIRE(invoke({"simulate", "--config", cfg, "--out", dir.str("a"), "--quiet"}).code == 0);
  REQUIRE(invoke({"simulate", "--config", cfg, "--out", dir.str("b"), "--quiet", "--seed", "99"}).code == 0);
  const auto a = read_json(dir.path / "a" / "summary.json");
  const auto b = read_json(dir.path / "b" / "summary.json");
  CHECK(a.at("config_hash") == b.at("config_hash"));
  CHECK(a.at("seed") == 5);
  CHECK(b.at("seed") == 99);
  CHECK(a.at("metrics") != b.at("metrics"));
}

TEST_CASE("empty workload exits with EmptyRun") {
  TempDir dir("empty");
  auto doc = small_config();
  doc["workload"] = {{"kind", "poisson"}, {"rate_hz", 1.0}, {"duration_s", 0}};
  const auto cfg = write_config(dir, "empty.json", doc);
  const auto r = invoke({"simulate", "--config", cfg.string(), "--out", dir.str("o")});
  CHECK(r.code == 5);
  CHECK_FALSE(fs::exists(dir.path / "o" / "summary.json"));
}

TEST_CASE("sweep grid") {
  TempDir dir("sweep");
  const auto cfg = (kScenarios / "two_stage_small.json").string();
  REQUIRE(invoke({"sweep", "--config", cfg, "--out", dir.str(), "--quiet"}).code == 0);
  const auto rows = csv_rows(dir.path / "sweep.csv");
  REQUIRE(rows.size() == 6);
  for (std::size_t rate = 0; rate < 2; ++rate) {
    for (std::size_t k = 1; k < 3; ++k) {
      const auto& prev = rows[rate * 3 + k - 1];
      const auto& cur = rows[rate * 3 + k];
      CHECK(cur.back() == "ok");
      CHECK(std::stod(cur[3]) < std::stod(prev[3]));
      CHECK(std::stod(cur[6]) >= std::stod(prev[6]));
    }
  }
}

TEST_CASE("gen-trace writes a replayable trace") {
  TempDir dir("trace");
  const auto cfg = (kScenarios / "two_stage_small.json").string();
  REQUIRE(invoke({"gen-trace", "--config", cfg, "--out", dir.str(), "--quiet"}).code == 0);
  auto doc = small_config();
  doc["workload"] = {{"kind", "trace"}, {"path", (dir.path / "trace.txt").string()}};
  const auto replay = write_config(dir, "replay.json", doc);
  REQUIRE(invoke({"simulate", "--config", replay.string(), "--out", dir.str("r"), "--quiet"}).code == 0);
  REQUIRE(invoke({"simulate", "--config", cfg, "--out", dir.str("d"), "--quiet"}).code == 0);
  CHECK(read_json(dir.path / "r" / "summary.json").at("metrics") ==
        read_json(dir.path / "d" / "summary.json").at("metrics"));
}
