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

#include <algorithm>
#include <random>
#include <vector>

#include "edgeprune/errors.hpp"
#include "edgeprune/partitioner.hpp"

using namespace edgeprune;

namespace {

// Unit-channel layers whose work equals the given coefficients.
ModelGraph works_model(const std::vector<double>& works) {
  std::vector<LayerShape> shapes;
  for (double w : works) shapes.push_back({1, 1, 1, w});
  return make_model(shapes, 0);
}

DeviceProfile device(double speed, double memory = 1e18) {
  DeviceProfile d;
  d.id = "d" + std::to_string(speed);
  d.speed = speed;
  d.memory_capacity = memory;
  return d;
}

}  // namespace

TEST_CASE("profile_stage is work over speed") {
  const ModelGraph m = make_chain(std::vector<int>{4, 8}, 1, 2.0, 0);  // work 64
  CHECK(profile_stage(m, m.all(), device(32)) == 2.0);
  CHECK(profile_stage(m, {0, 0}, device(32)) == 0.0);
  CHECK(profile_stage(m, m.all(), device(64)) == 1.0);
  CHECK_THROWS_AS(profile_stage(m, {0, 3}, device(1)), Error);
}

TEST_CASE("partition examples") {
  SUBCASE("balanced cut") {
    const ModelGraph m = works_model({3, 2, 4, 1});
    const std::vector<DeviceProfile> devs{device(1), device(1)};
    const auto plan = partition(m, devs);
    REQUIRE(plan);
    CHECK(plan->makespan == 5.0);
    CHECK(plan->stages[0].layers == LayerRange{0, 2});
    CHECK(plan->stages[1].layers == LayerRange{2, 4});
    CHECK(plan->stages[0].predicted_latency == 5.0);
    CHECK(plan->stages[1].predicted_latency == 5.0);
    const auto brute = brute_force_partition(m, devs);
    REQUIRE(brute);
    CHECK(*brute == *plan);
  }
  SUBCASE("single device takes everything") {
    const ModelGraph m = works_model({3, 2, 4, 1});
    const std::vector<DeviceProfile> devs{device(2)};
    const auto plan = partition(m, devs);
    REQUIRE(plan);
    REQUIRE(plan->stages.size() == 1);
    CHECK(plan->stages[0].layers == LayerRange{0, 4});
    CHECK(plan->makespan == 5.0);
  }
  SUBCASE("first device must hold a non-empty prefix") {
    const ModelGraph m = works_model({4, 4});
    const std::vector<DeviceProfile> devs{device(1), device(2)};
    const auto plan = partition(m, devs);
    REQUIRE(plan);
    CHECK(plan->makespan == 4.0);
    CHECK(plan->stages[0].layers == LayerRange{0, 1});
  }
  SUBCASE("fewer layers than devices is infeasible") {
    const ModelGraph m = works_model({5});
    const std::vector<DeviceProfile> devs{device(1), device(1), device(1)};
    CHECK_FALSE(partition(m, devs));
    CHECK_FALSE(brute_force_partition(m, devs));
  }
  SUBCASE("memory forces a worse cut") {
    // Params are 1 per layer; device 0 can hold a single layer.
    const ModelGraph m = works_model({1, 1, 10});
    const std::vector<DeviceProfile> devs{device(1, 1), device(1)};
    const auto plan = partition(m, devs);
    REQUIRE(plan);
    CHECK(plan->stages[0].layers == LayerRange{0, 1});
    CHECK(plan->makespan == 11.0);
  }
  SUBCASE("no memory-feasible plan") {
    const ModelGraph m = works_model({1, 1, 1});
    const std::vector<DeviceProfile> devs{device(1, 1), device(1, 1)};
    CHECK_FALSE(partition(m, devs));
  }
}

TEST_CASE("brute force size guard") {
  const ModelGraph m = works_model(std::vector<double>(17, 1.0));
  const std::vector<DeviceProfile> devs{device(1)};
  CHECK_THROWS_AS(brute_force_partition(m, devs), Error);
  const ModelGraph small = works_model({1, 1, 1, 1, 1});
  const std::vector<DeviceProfile> five(5, device(1));
  CHECK_THROWS_AS(brute_force_partition(small, five), Error);
}

TEST_CASE("DP matches brute force on random instances") {
  std::mt19937_64 rng(500);
  std::uniform_int_distribution<int> n_layers(1, 12), n_dev(1, 4), width(1, 6);
  std::uniform_real_distribution<double> speed(0.5, 8.0), coeff(0.1, 5.0);
  int feasible = 0;
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<LayerShape> shapes;
    int prev = width(rng);
    const int layers = n_layers(rng);
    for (int j = 0; j < layers; ++j) {
      const int out = width(rng);
      shapes.push_back({prev, out, 1, coeff(rng)});
      prev = out;
    }
    const ModelGraph m = make_model(shapes, rng());
    const double total_params = static_cast<double>(cost_metrics(m, m.all()).param_count);
    std::uniform_real_distribution<double> memory(0.2 * total_params, 1.2 * total_params);
    std::vector<DeviceProfile> devs(static_cast<std::size_t>(n_dev(rng)));
    for (auto& d : devs) d = device(speed(rng), memory(rng));

    const auto dp = partition(m, devs);
    const auto bf = brute_force_partition(m, devs);
    REQUIRE(dp.has_value() == bf.has_value());
    if (!dp) continue;
    ++feasible;
    REQUIRE(dp->makespan == bf->makespan);
    CHECK(*dp == *bf);
    CHECK(*partition(m, devs) == *dp);

    double max_speed = 0;
    for (const auto& d : devs) max_speed = std::max(max_speed, d.speed);
    for (const auto& l : m.layers) CHECK(dp->makespan >= l.work_units() / max_speed);
    std::size_t expect = 0;
    for (const Stage& s : dp->stages) {
      CHECK(s.layers.begin == expect);
      CHECK_FALSE(s.layers.empty());
      CHECK(static_cast<double>(s.param_count) <= devs[s.device].memory_capacity);
      expect = s.layers.end;
    }
    CHECK(expect == m.size());
  }
  CHECK(feasible > 100);
}

TEST_CASE("make_plan validates explicit stages") {
  const ModelGraph m = works_model({3, 2, 4, 1});
  const std::vector<DeviceProfile> devs{device(1), device(1)};
  const std::vector<LayerRange> good{{0, 2}, {2, 4}};
  CHECK(make_plan(m, devs, good).makespan == 5.0);
  const std::vector<LayerRange> gap{{0, 1}, {2, 4}};
  CHECK_THROWS_AS(make_plan(m, devs, gap), Error);
  const std::vector<LayerRange> short_cover{{0, 1}, {1, 3}};
  CHECK_THROWS_AS(make_plan(m, devs, short_cover), Error);
}

TEST_CASE("slowdown multipliers compose") {
  DeviceProfile d = device(1);
  d.slowdowns = {{10, 5, 0.5}, {12, 10, 0.5}};
  CHECK(d.speed_multiplier(9.9) == 1.0);
  CHECK(d.speed_multiplier(10) == 0.5);
  CHECK(d.speed_multiplier(13) == 0.25);
  CHECK(d.speed_multiplier(16) == 0.5);
  CHECK(d.speed_multiplier(22) == 1.0);
}
