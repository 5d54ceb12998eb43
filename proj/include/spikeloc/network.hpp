// Copyright 2026 The spikeloc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "spikeloc/neuron.hpp"
#include "spikeloc/rng.hpp"
#include "spikeloc/tensor.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace spikeloc {

enum class Resample { none, pool2, up2 };

std::string to_string(Resample r);
Resample resample_from_string(const std::string& s);

struct LayerSpec {
  Index in_channels = 1;
  Index out_channels = 1;
  Index kernel = 3;
  Resample resample = Resample::none;
  /// Index of an earlier layer whose output spikes are added after resampling.
  std::optional<int> residual_from;
};

/// Encoder-decoder plan: three conv-LIF + pool2 stages, then three
/// conv-LIF + up2 stages with spike additions from the matching encoder
/// resolution.
std::vector<LayerSpec> default_channel_plan(std::array<Index, 3> encoder_channels = {16, 32, 64}, Index kernel = 3);

struct ConvLifLayer {
  LayerSpec spec;
  Tensor weight;  // [Cout, Cin, k, k]
  Tensor bias;    // [Cout]
  LifConfig lif;
  Shape input_shape;   // presynaptic map [Cin, H, W]
  Shape neuron_shape;  // LIF map [Cout, H, W]
  Shape output_shape;  // after resample / residual
};

struct Network {
  std::vector<ConvLifLayer> layers;
  /// Fixed random readouts G_l, [4, flatten(output_l)].
  std::vector<Tensor> readouts;
  Index height = 0;
  Index width = 0;
  std::uint64_t seed = 0;

  std::size_t num_layers() const { return layers.size(); }
};

using NetworkState = std::vector<LifLayerState>;

/// Builds and initializes a network. Conv weights ~ U(+-1/sqrt(fan_in)),
/// biases zero, readouts ~ U(+-1/sqrt(flatten_dim)). Deterministic in seed.
Network build_network(Index height, Index width, const std::vector<LayerSpec>& plan, const LifConfig& lif,
                      std::uint64_t seed);

/// Checks shapes and residual wiring; fills the layers' shape fields.
void resolve_shapes(Network& net);

NetworkState init_states(const Network& net);

struct TimestepOutput {
  /// Raw LIF spikes per layer ({0,1}, pre-resample).
  std::vector<Tensor> lif_spikes;
  /// Layer outputs after resample and residual addition (counts).
  std::vector<Tensor> outputs;
  /// [L, 4] readout predictions.
  Tensor readouts;
};

/// Advances every layer by one timestep. Also advances each layer's
/// eligibility trace with its presynaptic input.
TimestepOutput forward_timestep(const Network& net, NetworkState& states, const Tensor& input_spikes);

struct SpikeStats {
  /// Total LIF spikes per layer over the sequence.
  std::vector<double> counts;
  /// Neurons per layer.
  std::vector<Index> neurons;
  Index timesteps = 0;

  double rate(std::size_t layer) const {
    return counts[layer] / (static_cast<double>(neurons[layer]) * static_cast<double>(timesteps));
  }
  double total() const;
};

struct SequenceResult {
  Tensor readout_history;  // [T, L, 4]
  SpikeStats stats;
};

/// Runs a full encoded sequence [T,1,H,W] from fresh zero states.
SequenceResult forward_sequence(const Network& net, const SpikeTensor& spike_input);

}  // namespace spikeloc
