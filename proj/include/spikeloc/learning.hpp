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

#include "spikeloc/coding.hpp"
#include "spikeloc/network.hpp"
#include "spikeloc/rng.hpp"

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace spikeloc {

struct Sample;

struct TrainConfig {
  double lr = 1e-3;
  double beta1 = 0.0;
  double beta2 = 0.95;
  double eps = 1e-8;
  int batch_size = 16;
  int epochs = 30;
  /// Leading timesteps excluded from the loss; negative means T/4.
  int burn_in = -1;
  double loss_delta = 1.0;
  int T = 32;
  double p_max = 0.5;
  bool augment = true;
  bool trainable_readout = false;

  int effective_burn_in() const { return burn_in < 0 ? T / 4 : burn_in; }
  void validate() const;
};

/// Smooth L1 averaged over coordinates; also returns d(loss)/d(pred).
template <typename Scalar>
struct LossAndGrad {
  Scalar loss;
  BasicTensor<Scalar> grad;
};

template <typename Scalar>
LossAndGrad<Scalar> smooth_l1(const BasicTensor<Scalar>& pred, const BasicTensor<Scalar>& target, Scalar delta) {
  if (pred.shape() != target.shape()) throw std::invalid_argument("smooth_l1: shape mismatch");
  if (!(delta > 0)) throw std::invalid_argument("smooth_l1: delta must be positive");
  const auto n = static_cast<Scalar>(pred.size());
  LossAndGrad<Scalar> out{Scalar(0), BasicTensor<Scalar>(pred.shape())};
  for (Index i = 0; i < pred.size(); ++i) {
    const Scalar d = pred[i] - target[i];
    const Scalar ad = std::abs(d);
    out.loss += ad < delta ? Scalar(0.5) * d * d / delta : ad - Scalar(0.5) * delta;
    out.grad[i] = std::clamp(d / delta, Scalar(-1), Scalar(1)) / n;
  }
  out.loss /= n;
  return out;
}

struct AdamaxMoments {
  Tensor m;
  Tensor u;

  static AdamaxMoments zeros(const Shape& shape) { return {Tensor(shape), Tensor(shape)}; }
};

/// One in-place AdaMax update for step number `step` (1-based):
/// m <- b1 m + (1-b1) g; u <- max(b2 u, |g|); p <- p - lr/(1-b1^t) m/(u+eps).
void adamax_update(Tensor& param, const Tensor& grad, AdamaxMoments& moments, std::int64_t step,
                   const TrainConfig& cfg);

struct OptimState {
  AdamaxMoments weight;
  AdamaxMoments bias;
  AdamaxMoments readout;
  std::int64_t step = 0;
};

std::vector<OptimState> init_optim_states(const Network& net);

struct LayerGradients {
  Tensor weight;   // [Cout, Cin, k, k]
  Tensor bias;     // [Cout]
  Tensor readout;  // [4, N]; only filled when readouts train

  static LayerGradients zeros(const ConvLifLayer& layer, const Tensor& readout, bool with_readout);
  void accumulate(const LayerGradients& other);
  void scale(float factor);
};

/// Advances the step counter and applies AdaMax to the layer's conv weight
/// and bias (and readout when `cfg.trainable_readout`).
void adamax_step(ConvLifLayer& layer, Tensor& readout, const LayerGradients& grads, OptimState& opt,
                 const TrainConfig& cfg);

/// Projects an output-side error back onto the layer's LIF map through the
/// resampling stage: pooled windows send it to every max-attaining site,
/// upsampled blocks are summed.
Tensor route_to_neurons(const ConvLifLayer& layer, const LifLayerState& state, const Tensor& output_error);

/// Three-factor local gradient for one layer at one timestep.
///
/// error = route(G^T dloss_dpred); delta = error * surrogate(V_pre_reset);
/// dW[o,i,ky,kx] = sum_pos delta[o,pos] * trace[i, pos + (ky,kx) - pad];
/// db[o] = (dt/tau) sum_pos delta[o,pos].
LayerGradients local_gradients(const ConvLifLayer& layer, const LifLayerState& state, const Tensor& dloss_dpred,
                               const Tensor& readout);

/// Readout gradient dG = dloss_dpred (outer) flatten(output).
Tensor readout_gradient(const Tensor& dloss_dpred, const Tensor& layer_output);

struct TimestepLosses {
  std::vector<double> per_layer;  // mean over the batch
  bool active = false;
};

/// One online update over a batch of sequences advanced in lockstep.
/// Each sample is stepped forward; when t >= burn_in every layer's local
/// gradients are averaged over the batch and applied once.
TimestepLosses train_timestep(Network& net, std::span<NetworkState> states, std::span<const Tensor> input_slices,
                              std::span<const Tensor> targets, std::vector<OptimState>& opt, const TrainConfig& cfg,
                              int t, std::vector<double>* spike_counts = nullptr);

struct EpochSummary {
  int epoch = 0;
  std::vector<double> mean_loss;   // per layer, over samples x active timesteps
  std::vector<double> spike_rate;  // per layer, spikes per neuron per timestep
  double last_layer_loss() const { return mean_loss.empty() ? 0.0 : mean_loss.back(); }
};

/// Shuffles, augments, encodes and trains on every sample once.
EpochSummary train_epoch(Network& net, std::span<const Sample> dataset, const TrainConfig& cfg, Rng& rng,
                         std::vector<OptimState>& opt, int epoch = 1);

}  // namespace spikeloc
