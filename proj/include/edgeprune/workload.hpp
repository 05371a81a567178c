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
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace edgeprune {

// Exponential inter-arrival gaps from a seeded generator; every time < duration.
std::vector<double> generate_poisson_arrivals(double rate_hz, double duration_s, std::uint64_t seed);

std::vector<double> generate_constant_arrivals(double interval_s, double duration_s, double start_s = 0.0);

struct RatePhase {
  double duration_s = 0.0;
  double rate_hz = 0.0;
};

// Piecewise-stationary Poisson process, phases laid end to end from t = 0.
std::vector<double> generate_phased_arrivals(std::span<const RatePhase> phases, std::uint64_t seed);

struct Burst {
  double start_s = 0.0;
  double duration_s = 0.0;
  double rate_hz = 0.0;
};

// Camera-trap style traffic: a low background rate with dense bursts layered
// on top. Bursts are taken from `bursts`, plus `random_bursts` extra ones
// placed uniformly over the run.
struct BurstyTraceConfig {
  double duration_s = 3600.0;
  double base_rate_hz = 0.05;
  std::vector<Burst> bursts;
  std::size_t random_bursts = 0;
  double random_burst_duration_s = 20.0;
  double random_burst_rate_hz = 2.0;
  std::uint64_t seed = 0;
};

std::vector<double> generate_bursty_trace(const BurstyTraceConfig& config);

// One decimal timestamp per line; lines starting with '#' are comments.
std::vector<double> read_trace(const std::filesystem::path& path);
void write_trace(const std::filesystem::path& path, std::span<const double> arrivals,
                 const std::string& header_comment);

}  // namespace edgeprune
