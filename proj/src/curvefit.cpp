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

#include "edgeprune/curvefit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "edgeprune/errors.hpp"

namespace edgeprune {

std::vector<double> default_benchmark_grid() { return {0.0, 0.25, 0.50, 0.75, 0.90}; }

double logit(double a) { return std::log(a / (1.0 - a)); }

double logistic(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

LatencyCurve fit_latency(std::span<const LatencySample> samples) {
  if (samples.size() < 2) throw Error(ErrorCode::kDegenerateFit, "latency fit needs at least two samples");
  const double n = static_cast<double>(samples.size());
  double mean_r = 0.0, mean_t = 0.0;
  for (const auto& s : samples) {
    mean_r += s.ratio;
    mean_t += s.latency;
  }
  mean_r /= n;
  mean_t /= n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& s : samples) {
    sxx += (s.ratio - mean_r) * (s.ratio - mean_r);
    sxy += (s.ratio - mean_r) * (s.latency - mean_t);
  }
  if (sxx <= 1e-15) throw Error(ErrorCode::kDegenerateFit, "all latency samples share one ratio");
  const double alpha = sxy / sxx;
  return {alpha, mean_t - alpha * mean_r};
}

AccuracyModel fit_accuracy(std::span<const AccuracySample> samples) {
  if (samples.empty()) throw Error(ErrorCode::kDegenerateFit, "no accuracy samples");
  const std::size_t n = samples.front().ratios.size();
  const auto rows = static_cast<Eigen::Index>(samples.size());
  const auto cols = static_cast<Eigen::Index>(n + 1);
  if (samples.size() < n + 1) {
    throw Error(ErrorCode::kDegenerateFit, "accuracy fit over " + std::to_string(n) +
                                               " slices needs at least " + std::to_string(n + 1) +
                                               " samples");
  }
  Eigen::MatrixXd design(rows, cols);
  Eigen::VectorXd y(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& s = samples[static_cast<std::size_t>(r)];
    if (s.ratios.size() != n) throw Error(ErrorCode::kDimensionMismatch, "ratio vectors differ in length");
    for (std::size_t i = 0; i < n; ++i) design(r, static_cast<Eigen::Index>(i)) = s.ratios[i];
    design(r, cols - 1) = -1.0;
    y(r) = logit(std::clamp(s.accuracy, 1e-6, 1.0 - 1e-6));
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < cols) {
    throw Error(ErrorCode::kDegenerateFit, "accuracy ratio vectors are not affinely independent");
  }
  const Eigen::VectorXd x = qr.solve(y);
  AccuracyModel model;
  model.gamma.assign(x.data(), x.data() + n);
  model.delta = x(cols - 1);
  return model;
}

double predict_latency(const LatencyCurve& curve, double ratio) {
  return std::max(0.0, curve.alpha * ratio + curve.beta);
}

double accuracy_score(const AccuracyModel& model, std::span<const double> ratios) {
  if (ratios.size() != model.gamma.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "expected " + std::to_string(model.gamma.size()) +
                                                   " ratios, got " + std::to_string(ratios.size()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < ratios.size(); ++i) s += model.gamma[i] * ratios[i];
  return s;
}

double predict_accuracy(const AccuracyModel& model, std::span<const double> ratios) {
  // Keep the result strictly inside (0, 1) even when the logistic saturates.
  return std::clamp(logistic(accuracy_score(model, ratios) - model.delta), 1e-300, std::nextafter(1.0, 0.0));
}

std::vector<std::vector<double>> accuracy_sample_plan(std::size_t slices, std::span<const double> grid) {
  std::vector<std::vector<double>> plan;
  for (double g : grid) plan.emplace_back(slices, g);
  for (std::size_t i = 0; i < slices; ++i) {
    for (double g : grid) {
      if (g == 0.0) continue;
      std::vector<double> p(slices, 0.0);
      p[i] = g;
      if (std::find(plan.begin(), plan.end(), p) == plan.end()) plan.push_back(std::move(p));
    }
  }
  return plan;
}

}  // namespace edgeprune
