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

#include "edgeprune/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "edgeprune/errors.hpp"

namespace edgeprune {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidRange: return "InvalidRange";
    case ErrorCode::kMaskMismatch: return "MaskMismatch";
    case ErrorCode::kSizeGuard: return "SizeGuard";
    case ErrorCode::kDegenerateFit: return "DegenerateFit";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNonMonotonicTime: return "NonMonotonicTime";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kEmptyRun: return "EmptyRun";
    case ErrorCode::kInfeasible: return "Infeasible";
  }
  return "Unknown";
}

namespace {

void check_range(const ModelGraph& model, LayerRange range) {
  if (range.begin > range.end || range.end > model.layers.size()) {
    throw Error(ErrorCode::kInvalidRange, "layer range [" + std::to_string(range.begin) + ", " +
                                              std::to_string(range.end) + ") outside model of " +
                                              std::to_string(model.layers.size()) + " layers");
  }
}

std::vector<int> complement(int n, const std::vector<int>& removed_sorted) {
  std::vector<int> kept;
  kept.reserve(static_cast<std::size_t>(n) - removed_sorted.size());
  auto it = removed_sorted.begin();
  for (int c = 0; c < n; ++c) {
    if (it != removed_sorted.end() && *it == c) {
      ++it;
    } else {
      kept.push_back(c);
    }
  }
  return kept;
}

// Keeps the listed rows and input-channel groups of a layer.
Layer select(const Layer& layer, const std::vector<int>& rows, const std::vector<int>& in_groups) {
  Layer out = layer;
  out.out_channels = static_cast<int>(rows.size());
  out.in_channels = static_cast<int>(in_groups.size());
  out.weights.clear();
  out.weights.reserve(rows.size() * in_groups.size() * static_cast<std::size_t>(layer.kernel_params));
  const auto kp = static_cast<std::size_t>(layer.kernel_params);
  for (int r : rows) {
    auto src = layer.row(r);
    for (int g : in_groups) {
      auto first = src.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(g) * kp);
      out.weights.insert(out.weights.end(), first, first + static_cast<std::ptrdiff_t>(kp));
    }
  }
  return out;
}

}  // namespace

void ModelGraph::validate() const {
  if (layers.empty()) throw Error(ErrorCode::kConfigError, "model has no layers");
  if (layers.front().in_channels != input_channels) {
    throw Error(ErrorCode::kConfigError, "first layer in_channels != model input_channels");
  }
  if (layers.back().out_channels != output_channels) {
    throw Error(ErrorCode::kConfigError, "last layer out_channels != model output_channels");
  }
  for (std::size_t j = 0; j < layers.size(); ++j) {
    const Layer& l = layers[j];
    if (l.in_channels <= 0 || l.out_channels <= 0 || l.kernel_params <= 0 || !(l.work_coeff > 0)) {
      throw Error(ErrorCode::kConfigError, "layer " + std::to_string(j) + " has non-positive size");
    }
    if (j > 0 && l.in_channels != layers[j - 1].out_channels) {
      throw Error(ErrorCode::kConfigError, "chain break at layer " + std::to_string(j));
    }
    if (l.weights.size() != static_cast<std::size_t>(l.out_channels) * l.row_width()) {
      throw Error(ErrorCode::kConfigError, "weight shape mismatch at layer " + std::to_string(j));
    }
  }
}

ModelGraph make_model(std::span<const LayerShape> shapes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  ModelGraph model;
  for (std::size_t j = 0; j < shapes.size(); ++j) {
    const LayerShape& s = shapes[j];
    Layer layer{static_cast<int>(j), s.in_channels, s.out_channels, s.kernel_params, s.work_coeff, {}};
    layer.weights.resize(static_cast<std::size_t>(s.out_channels) * layer.row_width());
    for (double& w : layer.weights) w = dist(rng);
    model.layers.push_back(std::move(layer));
  }
  if (!model.layers.empty()) {
    model.input_channels = model.layers.front().in_channels;
    model.output_channels = model.layers.back().out_channels;
  }
  model.validate();
  return model;
}

ModelGraph make_chain(std::span<const int> widths, int kernel_params, double work_coeff,
                      std::uint64_t seed) {
  std::vector<LayerShape> shapes;
  for (std::size_t i = 1; i < widths.size(); ++i) {
    shapes.push_back({widths[i - 1], widths[i], kernel_params, work_coeff});
  }
  return make_model(shapes, seed);
}

int removed_channel_count(int channels, double ratio) {
  if (channels <= 1 || ratio <= 0.0) return 0;
  // Absorb representation error such as 0.29 * 100 = 28.999999999999996.
  const auto k = static_cast<long long>(std::floor(ratio * channels + 1e-9));
  return static_cast<int>(std::clamp<long long>(k, 0, channels - 1));
}

int surviving_channel_count(int channels, double ratio) {
  return channels - removed_channel_count(channels, ratio);
}

std::vector<int> l1_channel_ranking(const Layer& layer) {
  std::vector<double> norms(static_cast<std::size_t>(layer.out_channels));
  for (int c = 0; c < layer.out_channels; ++c) {
    double sum = 0.0;
    for (double w : layer.row(c)) sum += std::abs(w);
    norms[static_cast<std::size_t>(c)] = sum;
  }
  std::vector<int> order(norms.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return norms[static_cast<std::size_t>(a)] < norms[static_cast<std::size_t>(b)];
  });
  return order;
}

PruneResult apply_prune(const ModelGraph& model, LayerRange range, double ratio) {
  check_range(model, range);
  if (!(ratio >= 0.0 && ratio <= 1.0)) {
    throw Error(ErrorCode::kInvalidRange, "ratio " + std::to_string(ratio) + " outside [0, 1]");
  }
  const std::size_t n = model.layers.size();
  std::vector<std::vector<int>> removed_out(n), removed_in(n);
  // Rank every layer on the incoming weights before any surgery.
  for (std::size_t j = range.begin; j < range.end; ++j) {
    if (j + 1 == n) break;  // model output shape is preserved
    const Layer& layer = model.layers[j];
    const int k = removed_channel_count(layer.out_channels, ratio);
    if (k == 0) continue;
    auto ranking = l1_channel_ranking(layer);
    std::vector<int> removed(ranking.begin(), ranking.begin() + k);
    std::sort(removed.begin(), removed.end());
    removed_out[j] = removed;
    removed_in[j + 1] = std::move(removed);
  }

  PruneResult result{model, PruneMask{ratio, range, {}}};
  for (std::size_t j = 0; j < n; ++j) {
    if (removed_out[j].empty() && removed_in[j].empty()) continue;
    const Layer& layer = model.layers[j];
    result.model.layers[j] = select(layer, complement(layer.out_channels, removed_out[j]),
                                    complement(layer.in_channels, removed_in[j]));
    result.mask.layers.push_back({j, std::move(removed_out[j]), std::move(removed_in[j])});
  }
  return result;
}

ModelGraph restore(const ModelGraph& pruned, const PruneMask& mask, const ModelGraph& full) {
  if (pruned.layers.size() != full.layers.size()) {
    throw Error(ErrorCode::kMaskMismatch, "pruned and full models differ in layer count");
  }
  ModelGraph out = pruned;
  for (const LayerMask& lm : mask.layers) {
    if (lm.layer >= full.layers.size()) {
      throw Error(ErrorCode::kMaskMismatch, "mask layer " + std::to_string(lm.layer) + " out of range");
    }
    const Layer& f = full.layers[lm.layer];
    const Layer& p = pruned.layers[lm.layer];
    auto in_bounds = [](const std::vector<int>& idx, int limit) {
      return std::all_of(idx.begin(), idx.end(), [&](int c) { return c >= 0 && c < limit; }) &&
             std::is_sorted(idx.begin(), idx.end()) &&
             std::adjacent_find(idx.begin(), idx.end()) == idx.end();
    };
    if (!in_bounds(lm.removed_out, f.out_channels) || !in_bounds(lm.removed_in, f.in_channels)) {
      throw Error(ErrorCode::kMaskMismatch,
                  "mask indices exceed original channel counts at layer " + std::to_string(lm.layer));
    }
    const auto rows = complement(f.out_channels, lm.removed_out);
    const auto groups = complement(f.in_channels, lm.removed_in);
    if (static_cast<int>(rows.size()) != p.out_channels ||
        static_cast<int>(groups.size()) != p.in_channels || p.kernel_params != f.kernel_params) {
      throw Error(ErrorCode::kMaskMismatch,
                  "pruned shape does not match mask at layer " + std::to_string(lm.layer));
    }
    Layer merged = f;
    const auto kp = static_cast<std::size_t>(f.kernel_params);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      auto src = p.row(static_cast<int>(r));
      const std::size_t dst_row = static_cast<std::size_t>(rows[r]) * f.row_width();
      for (std::size_t g = 0; g < groups.size(); ++g) {
        std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(g * kp), kp,
                    merged.weights.begin() +
                        static_cast<std::ptrdiff_t>(dst_row + static_cast<std::size_t>(groups[g]) * kp));
      }
    }
    out.layers[lm.layer] = std::move(merged);
  }
  return out;
}

CostMetrics cost_metrics(const ModelGraph& model, LayerRange range) {
  check_range(model, range);
  CostMetrics m;
  for (std::size_t j = range.begin; j < range.end; ++j) {
    m.param_count += model.layers[j].param_count();
    m.work_units += model.layers[j].work_units();
  }
  return m;
}

}  // namespace edgeprune
