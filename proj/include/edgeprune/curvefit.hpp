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

#include <span>
#include <utility>
#include <vector>

namespace edgeprune {

// Stage latency as a linear function of the pruning ratio: t(p) = alpha p + beta.
struct LatencyCurve {
  double alpha = 0.0;
  double beta = 1.0;
  friend bool operator==(const LatencyCurve&, const LatencyCurve&) = default;
};

// Global accuracy surface a(p) = 1 / (1 + exp(-(sum_i gamma_i p_i - delta))).
struct AccuracyModel {
  std::vector<double> gamma;
  double delta = 0.0;

  std::size_t slices() const { return gamma.size(); }
  friend bool operator==(const AccuracyModel&, const AccuracyModel&) = default;
};

struct LatencySample {
  double ratio = 0.0;
  double latency = 0.0;
};

struct AccuracySample {
  std::vector<double> ratios;
  double accuracy = 0.5;
};

// Ratio grid used for short benchmarks.
std::vector<double> default_benchmark_grid();

// Ordinary least squares. Throws DegenerateFit when all ratios coincide.
LatencyCurve fit_latency(std::span<const LatencySample> samples);

// Least squares on logit-transformed accuracies (clamped to [1e-6, 1 - 1e-6]).
// Throws DegenerateFit when the ratio vectors do not span the model.
AccuracyModel fit_accuracy(std::span<const AccuracySample> samples);

double predict_latency(const LatencyCurve& curve, double ratio);
double predict_accuracy(const AccuracyModel& model, std::span<const double> ratios);

// sum_i gamma_i p_i; the accuracy constraint is linear in this quantity.
double accuracy_score(const AccuracyModel& model, std::span<const double> ratios);

double logit(double a);
double logistic(double x);

// Ratio vectors for accuracy benchmarking: the all-equal vector at every grid
// point plus each single-slice vector at every non-zero grid point.
std::vector<std::vector<double>> accuracy_sample_plan(std::size_t slices, std::span<const double> grid);

}  // namespace edgeprune
