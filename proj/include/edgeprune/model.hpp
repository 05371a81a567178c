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

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace edgeprune {

// Half-open interval [begin, end) of layer indices.
struct LayerRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end > begin ? end - begin : 0; }
  bool empty() const { return end <= begin; }
  bool contains(std::size_t i) const { return i >= begin && i < end; }
  friend bool operator==(const LayerRange&, const LayerRange&) = default;
};

// A channel-structured layer. Weights are row-major with one row per output
// channel; each row holds in_channels groups of kernel_params values.
struct Layer {
  int id = 0;
  int in_channels = 0;
  int out_channels = 0;
  int kernel_params = 1;
  double work_coeff = 1.0;
  std::vector<double> weights;

  std::size_t row_width() const {
    return static_cast<std::size_t>(in_channels) * static_cast<std::size_t>(kernel_params);
  }
  std::span<const double> row(int channel) const {
    return {weights.data() + static_cast<std::size_t>(channel) * row_width(), row_width()};
  }
  std::int64_t param_count() const {
    return std::int64_t{kernel_params} * in_channels * out_channels;
  }
  double work_units() const {
    return work_coeff * static_cast<double>(in_channels) * static_cast<double>(out_channels);
  }
  friend bool operator==(const Layer&, const Layer&) = default;
};

struct ModelGraph {
  std::vector<Layer> layers;
  int input_channels = 0;
  int output_channels = 0;

  std::size_t size() const { return layers.size(); }
  LayerRange all() const { return {0, layers.size()}; }

  // Throws ConfigError when chain consistency or weight shapes are violated.
  void validate() const;

  friend bool operator==(const ModelGraph&, const ModelGraph&) = default;
};

// Shape of a layer before weights are attached.
struct LayerShape {
  int in_channels = 1;
  int out_channels = 1;
  int kernel_params = 1;
  double work_coeff = 1.0;
};

// Builds a chain with weights drawn uniformly from [-1, 1] using `seed`.
ModelGraph make_model(std::span<const LayerShape> shapes, std::uint64_t seed);

// Convenience: widths {4, 8, 8, 4} gives three layers 4->8, 8->8, 8->4.
ModelGraph make_chain(std::span<const int> widths, int kernel_params, double work_coeff,
                      std::uint64_t seed);

// Removed channels of one layer, in the indexing of the model that was pruned.
struct LayerMask {
  std::size_t layer = 0;
  std::vector<int> removed_out;
  std::vector<int> removed_in;
  friend bool operator==(const LayerMask&, const LayerMask&) = default;
};

struct PruneMask {
  double ratio = 0.0;
  LayerRange range;
  std::vector<LayerMask> layers;  // only layers whose shape changed, ascending

  bool empty() const { return layers.empty(); }
  friend bool operator==(const PruneMask&, const PruneMask&) = default;
};

struct PruneResult {
  ModelGraph model;
  PruneMask mask;
};

struct CostMetrics {
  std::int64_t param_count = 0;
  double work_units = 0.0;
};

// Number of output channels removed from a layer of `channels` at `ratio`:
// floor(ratio * channels), never removing the last channel.
int removed_channel_count(int channels, double ratio);
int surviving_channel_count(int channels, double ratio);

// Channel indices ordered by increasing l1 norm; ties go to the lower index.
std::vector<int> l1_channel_ranking(const Layer& layer);

// Structured prune of every layer in `range`. The model's final output layer
// keeps its channels. Removing an output channel of layer j drops the matching
// input columns of layer j+1, which may lie outside `range`.
PruneResult apply_prune(const ModelGraph& model, LayerRange range, double ratio);

// Inverse of apply_prune: `full` is the model apply_prune was called on.
ModelGraph restore(const ModelGraph& pruned, const PruneMask& mask, const ModelGraph& full);

CostMetrics cost_metrics(const ModelGraph& model, LayerRange range);

}  // namespace edgeprune
