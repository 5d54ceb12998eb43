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

#include "spikeloc/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace spikeloc {

std::string to_string(Resample r) {
  switch (r) {
    case Resample::pool2: return "pool2";
    case Resample::up2: return "up2";
    case Resample::none: break;
  }
  return "none";
}

Resample resample_from_string(const std::string& s) {
  if (s == "pool2") return Resample::pool2;
  if (s == "up2") return Resample::up2;
  if (s == "none") return Resample::none;
  throw std::invalid_argument("unknown resample mode '" + s + "'");
}

std::vector<LayerSpec> default_channel_plan(std::array<Index, 3> c, Index kernel) {
  return {
      {1, c[0], kernel, Resample::pool2, std::nullopt},
      {c[0], c[1], kernel, Resample::pool2, std::nullopt},
      {c[1], c[2], kernel, Resample::pool2, std::nullopt},
      {c[2], c[1], kernel, Resample::up2, 1},
      {c[1], c[0], kernel, Resample::up2, 0},
      {c[0], c[0], kernel, Resample::up2, std::nullopt},
  };
}

void resolve_shapes(Network& net) {
  if (net.height < 1 || net.width < 1) throw std::invalid_argument("network input must be non-empty");
  Shape in{1, net.height, net.width};
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    auto& layer = net.layers[l];
    const auto& spec = layer.spec;
    const std::string where = "layer " + std::to_string(l) + ": ";
    if (spec.in_channels != in[0]) {
      throw std::invalid_argument(where + "expects " + std::to_string(spec.in_channels) +
                                  " input channels, previous output is " + shape_to_string(in));
    }
    if (spec.kernel < 1 || spec.kernel % 2 == 0) throw std::invalid_argument(where + "kernel must be odd");
    layer.input_shape = in;
    layer.neuron_shape = {spec.out_channels, in[1], in[2]};
    Shape out = layer.neuron_shape;
    if (spec.resample == Resample::pool2) {
      if (in[1] % 2 != 0 || in[2] % 2 != 0) {
        throw std::invalid_argument(where + "map " + shape_to_string(in) + " is not divisible by 2 for pooling");
      }
      out = {spec.out_channels, in[1] / 2, in[2] / 2};
    } else if (spec.resample == Resample::up2) {
      out = {spec.out_channels, in[1] * 2, in[2] * 2};
    }
    if (spec.residual_from) {
      const int src = *spec.residual_from;
      if (src < 0 || static_cast<std::size_t>(src) >= l) {
        throw std::invalid_argument(where + "residual source must be an earlier layer");
      }
      if (net.layers[src].spec.resample != Resample::pool2 || spec.resample == Resample::pool2) {
        throw std::invalid_argument(where + "residual connections run from encoder to decoder layers only");
      }
      if (net.layers[src].output_shape != out) {
        throw std::invalid_argument(where + "residual source output " + shape_to_string(net.layers[src].output_shape) +
                                    " does not match this layer's output " + shape_to_string(out));
      }
    }
    layer.output_shape = out;
    in = out;
  }
}

Network build_network(Index height, Index width, const std::vector<LayerSpec>& plan, const LifConfig& lif,
                      std::uint64_t seed) {
  lif.validate();
  const Index pools = static_cast<Index>(
      std::count_if(plan.begin(), plan.end(), [](const LayerSpec& s) { return s.resample == Resample::pool2; }));
  const Index divisor = Index{1} << pools;
  if (height % divisor != 0 || width % divisor != 0) {
    throw std::invalid_argument("input " + std::to_string(height) + "x" + std::to_string(width) +
                                " must be divisible by " + std::to_string(divisor));
  }
  Network net;
  net.height = height;
  net.width = width;
  net.seed = seed;
  for (const auto& spec : plan) net.layers.push_back({spec, {}, {}, lif, {}, {}, {}});
  resolve_shapes(net);

  Rng rng(seed);
  for (auto& layer : net.layers) {
    const auto& s = layer.spec;
    const float bound = 1.0f / std::sqrt(static_cast<float>(s.in_channels * s.kernel * s.kernel));
    layer.weight = rng_uniform(rng, -bound, bound, {s.out_channels, s.in_channels, s.kernel, s.kernel});
    layer.bias = Tensor({s.out_channels});
  }
  for (const auto& layer : net.layers) {
    const Index n = shape_size(layer.output_shape);
    const float bound = 1.0f / std::sqrt(static_cast<float>(n));
    net.readouts.push_back(rng_uniform(rng, -bound, bound, {4, n}));
  }
  return net;
}

NetworkState init_states(const Network& net) {
  NetworkState states;
  states.reserve(net.layers.size());
  for (const auto& layer : net.layers) states.push_back(LifLayerState::zeros(layer.neuron_shape, layer.input_shape));
  return states;
}

TimestepOutput forward_timestep(const Network& net, NetworkState& states, const Tensor& input_spikes) {
  const std::size_t L = net.layers.size();
  if (states.size() != L) throw std::invalid_argument("forward_timestep: expected one state per layer");
  TimestepOutput out;
  out.lif_spikes.reserve(L);
  out.outputs.reserve(L);
  out.readouts = Tensor({static_cast<Index>(L), 4});

  Tensor presyn = input_spikes;
  if (presyn.rank() == 2) presyn = presyn.reshaped({1, presyn.dim(0), presyn.dim(1)});
  for (std::size_t l = 0; l < L; ++l) {
    const auto& layer = net.layers[l];
    auto& state = states[l];
    if (presyn.shape() != layer.input_shape || state.v.shape() != layer.neuron_shape) {
      throw std::invalid_argument("forward_timestep: layer " + std::to_string(l) + " got input " +
                                  shape_to_string(presyn.shape()) + ", expected " +
                                  shape_to_string(layer.input_shape));
    }
    trace_step(state, presyn, layer.lif);
    const Tensor current = accumulate_current(layer.weight, layer.bias, presyn);
    const Tensor& spikes = lif_step(state, current, layer.lif);

    Tensor output;
    switch (layer.spec.resample) {
      case Resample::pool2: output = maxpool2d(spikes, 2, 2); break;
      case Resample::up2: output = upsample_nearest(spikes, 2); break;
      case Resample::none: output = spikes; break;
    }
    if (layer.spec.residual_from) output.array() += out.outputs[*layer.spec.residual_from].array();

    const auto& g = net.readouts[l];
    out.readouts.array().segment(static_cast<Index>(l) * 4, 4).matrix().noalias() =
        g.matrix(4) * output.array().matrix();
    out.lif_spikes.push_back(spikes);
    out.outputs.push_back(output);
    presyn = out.outputs.back();
  }
  return out;
}

double SpikeStats::total() const { return std::accumulate(counts.begin(), counts.end(), 0.0); }

SequenceResult forward_sequence(const Network& net, const SpikeTensor& spike_input) {
  if (spike_input.rank() != 4 || spike_input.dim(0) < 1) {
    throw std::invalid_argument("forward_sequence: expected [T,1,H,W] spikes with T >= 1, got " +
                                shape_to_string(spike_input.shape()));
  }
  const Index T = spike_input.dim(0);
  const auto L = static_cast<Index>(net.layers.size());
  SequenceResult result{Tensor({T, L, 4}), {}};
  result.stats.counts.assign(net.layers.size(), 0.0);
  for (const auto& layer : net.layers) result.stats.neurons.push_back(shape_size(layer.neuron_shape));
  result.stats.timesteps = T;

  NetworkState states = init_states(net);
  for (Index t = 0; t < T; ++t) {
    const Tensor input = spike_input.slice(t).cast<float>();
    const TimestepOutput step = forward_timestep(net, states, input);
    result.readout_history.set_slice(t, step.readouts);
    for (std::size_t l = 0; l < net.layers.size(); ++l) result.stats.counts[l] += step.lif_spikes[l].array().sum();
  }
  return result;
}

}  // namespace spikeloc
