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
#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include "edgeprune/errors.hpp"
#include "edgeprune/workload.hpp"

using namespace edgeprune;
namespace fs = std::filesystem;

TEST_CASE("poisson arrivals") {
  const auto a = generate_poisson_arrivals(10.0, 100.0, 7);
  CHECK(std::abs(static_cast<double>(a.size()) - 1000.0) <= 4.0 * std::sqrt(1000.0));
  CHECK(std::is_sorted(a.begin(), a.end()));
  CHECK(std::all_of(a.begin(), a.end(), [](double t) { return t >= 0 && t < 100.0; }));
  CHECK(a == generate_poisson_arrivals(10.0, 100.0, 7));
  CHECK(a != generate_poisson_arrivals(10.0, 100.0, 8));
  CHECK(generate_poisson_arrivals(10.0, 0.0, 7).empty());
  CHECK_THROWS_AS(generate_poisson_arrivals(0.0, 10.0, 1), Error);
}

TEST_CASE("poisson count stays within four sigma over many seeds") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto a = generate_poisson_arrivals(5.0, 200.0, seed);
    CHECK(std::abs(static_cast<double>(a.size()) - 1000.0) <= 4.0 * std::sqrt(1000.0));
  }
}

TEST_CASE("constant arrivals") {
  const auto a = generate_constant_arrivals(0.5, 2.0);
  CHECK(a == std::vector<double>{0.0, 0.5, 1.0, 1.5});
  const auto b = generate_constant_arrivals(1.0, 3.0, 0.25);
  CHECK(b == std::vector<double>{0.25, 1.25, 2.25});
}

TEST_CASE("phased arrivals follow each phase rate") {
  const std::vector<RatePhase> phases{{100.0, 1.0}, {100.0, 20.0}};
  const auto a = generate_phased_arrivals(phases, 3);
  CHECK(std::is_sorted(a.begin(), a.end()));
  const auto first = std::count_if(a.begin(), a.end(), [](double t) { return t < 100.0; });
  const auto second = static_cast<long>(a.size()) - first;
  CHECK(std::abs(first - 100.0) <= 4.0 * std::sqrt(100.0));
  CHECK(std::abs(second - 2000.0) <= 4.0 * std::sqrt(2000.0));
  CHECK(a.back() < 200.0);
}

TEST_CASE("bursty trace") {
  BurstyTraceConfig cfg;
  cfg.duration_s = 600.0;
  cfg.base_rate_hz = 0.1;
  cfg.bursts = {{100.0, 20.0, 5.0}};
  cfg.random_bursts = 3;
  cfg.seed = 11;
  const auto a = generate_bursty_trace(cfg);
  CHECK(std::is_sorted(a.begin(), a.end()));
  CHECK(std::all_of(a.begin(), a.end(), [&](double t) { return t >= 0 && t < cfg.duration_s; }));
  CHECK(a == generate_bursty_trace(cfg));
  const auto in_burst = std::count_if(a.begin(), a.end(), [](double t) { return t >= 100.0 && t < 120.0; });
  CHECK(in_burst >= 60);
}

TEST_CASE("trace round trip") {
  const auto dir = fs::temp_directory_path() / "edgeprune_trace_test";
  fs::create_directories(dir);
  const auto path = dir / "trace.txt";
  const std::vector<double> arrivals{0.0, 0.125, 1.0 / 3.0, 7.5, 1234.0625};
  write_trace(path, arrivals, "seed 3");
  const auto back = read_trace(path);
  CHECK(back == arrivals);

  const auto bad = dir / "bad.txt";
  {
    std::ofstream f(bad);
    f << "# unsorted\n1.0\n0.5\n";
  }
  CHECK_THROWS_AS(read_trace(bad), Error);
  CHECK_THROWS_AS(read_trace(dir / "missing.txt"), Error);
  fs::remove_all(dir);
}
