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

#include "edgeprune/workload.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include "edgeprune/errors.hpp"

namespace edgeprune {

namespace {

void append_poisson(std::vector<double>& out, double rate_hz, double start_s, double end_s,
                    std::mt19937_64& rng) {
  if (!(rate_hz > 0) || end_s <= start_s) return;
  std::exponential_distribution<double> gap(rate_hz);
  for (double t = start_s + gap(rng); t < end_s; t += gap(rng)) out.push_back(t);
}

}  // namespace

std::vector<double> generate_poisson_arrivals(double rate_hz, double duration_s, std::uint64_t seed) {
  if (!(rate_hz > 0)) throw Error(ErrorCode::kConfigError, "poisson rate must be > 0");
  std::mt19937_64 rng(seed);
  std::vector<double> out;
  append_poisson(out, rate_hz, 0.0, duration_s, rng);
  return out;
}

std::vector<double> generate_constant_arrivals(double interval_s, double duration_s, double start_s) {
  if (!(interval_s > 0)) throw Error(ErrorCode::kConfigError, "arrival interval must be > 0");
  std::vector<double> out;
  for (std::size_t k = 0;; ++k) {
    const double t = start_s + static_cast<double>(k) * interval_s;
    if (t >= duration_s) break;
    out.push_back(t);
  }
  return out;
}

std::vector<double> generate_phased_arrivals(std::span<const RatePhase> phases, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> out;
  double start = 0.0;
  for (const RatePhase& p : phases) {
    if (p.rate_hz < 0 || p.duration_s < 0) throw Error(ErrorCode::kConfigError, "negative phase rate or duration");
    append_poisson(out, p.rate_hz, start, start + p.duration_s, rng);
    start += p.duration_s;
  }
  return out;
}

std::vector<double> generate_bursty_trace(const BurstyTraceConfig& config) {
  std::mt19937_64 rng(config.seed);
  std::vector<Burst> bursts = config.bursts;
  std::uniform_real_distribution<double> where(0.0, std::max(0.0, config.duration_s - config.random_burst_duration_s));
  for (std::size_t b = 0; b < config.random_bursts; ++b) {
    bursts.push_back({where(rng), config.random_burst_duration_s, config.random_burst_rate_hz});
  }
  std::vector<double> out;
  append_poisson(out, config.base_rate_hz, 0.0, config.duration_s, rng);
  // Superposed Poisson streams: background plus every burst.
  for (const Burst& b : bursts) {
    append_poisson(out, b.rate_hz, b.start_s, std::min(config.duration_s, b.start_s + b.duration_s), rng);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> read_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfigError, "cannot open trace file " + path.string());
  std::vector<double> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ss(line);
    double t = 0.0;
    if (!(ss >> t) || t < 0) {
      throw Error(ErrorCode::kConfigError, path.string() + ":" + std::to_string(lineno) + ": bad timestamp");
    }
    out.push_back(t);
  }
  if (!std::is_sorted(out.begin(), out.end())) {
    throw Error(ErrorCode::kConfigError, "trace timestamps in " + path.string() + " are not sorted");
  }
  return out;
}

void write_trace(const std::filesystem::path& path, std::span<const double> arrivals,
                 const std::string& header_comment) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kConfigError, "cannot write trace file " + path.string());
  if (!header_comment.empty()) out << "# " << header_comment << '\n';
  out << std::setprecision(17);
  for (double t : arrivals) out << t << '\n';
}

}  // namespace edgeprune
