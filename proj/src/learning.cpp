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

#include "spikeloc/learning.hpp"

#include "spikeloc/data.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace spikeloc {

void TrainConfig::validate() const {
  if (!(lr >= 0.0)) throw std::invalid_argument("train.lr must be non-negative");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw std::invalid_argument("train.beta1 must lie in [0,1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw std::invalid_argument("train.beta2 must lie in [0,1)");
  if (!(eps > 0.0)) throw std::invalid_argument("train.eps must be positive");
  if (batch_size < 1) throw std::invalid_argument("train.batch_size must be >= 1");
  if (epochs < 0) throw std::invalid_argument("train.epochs must be >= 0");
  if (T < 1) throw std::invalid_argument("train.T must be >= 1");
  const int b = effective_burn_in();
  if (b < 0 || b >= T) throw std::invalid_argument("train.burn_in must satisfy 0 <= burn_in < T");
  if (!(loss_delta > 0.0)) throw std::invalid_argument("train.loss_delta must be positive");
  if (!(p_max > 0.0 && p_max <= 1.0)) throw std::invalid_argument("train.p_max must lie in (0,1]");
}

void adamax_update(Tensor& param, const Tensor& grad, AdamaxMoments& mo, std::int64_t step, const TrainConfig& cfg) {
  if (grad.shape() != param.shape() || mo.m.shape() != param.shape() || mo.u.shape() != param.shape()) {
    throw std::invalid_argument("adamax_update: shape mismatch for parameter " + shape_to_string(param.shape()));
  }
  const auto b1 = static_cast<float>(cfg.beta1);
  const auto b2 = static_cast<float>(cfg.beta2);
  const auto eps = static_cast<float>(cfg.eps);
  const auto rate = static_cast<float>(cfg.lr / (1.0 - std::pow(cfg.beta1, static_cast<double>(step))));
  mo.m.array() = b1 * mo.m.array() + (1.0f - b1) * grad.array();
  mo.u.array() = (b2 * mo.u.array()).max(grad.array().abs());
  param.array() -= rate * mo.m.array() / (mo.u.array() + eps);
}

std::vector<OptimState> init_optim_states(const Network& net) {
  std::vector<OptimState> opt;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    opt.push_back({AdamaxMoments::zeros(net.layers[l].weight.shape()), AdamaxMoments::zeros(net.layers[l].bias.shape()),
                   AdamaxMoments::zeros(net.readouts[l].shape()), 0});
  }
  return opt;
}

LayerGradients LayerGradients::zeros(const ConvLifLayer& layer, const Tensor& readout, bool with_readout) {
  return {Tensor(layer.weight.shape()), Tensor(layer.bias.shape()), with_readout ? Tensor(readout.shape()) : Tensor{}};
}

void LayerGradients::accumulate(const LayerGradients& other) {
  weight.array() += other.weight.array();
  bias.array() += other.bias.array();
  if (!other.readout.empty()) readout.array() += other.readout.array();
}

void LayerGradients::scale(float factor) {
  weight.array() *= factor;
  bias.array() *= factor;
  readout.array() *= factor;
}

void adamax_step(ConvLifLayer& layer, Tensor& readout, const LayerGradients& grads, OptimState& opt,
                 const TrainConfig& cfg) {
  ++opt.step;
  adamax_update(layer.weight, grads.weight, opt.weight, opt.step, cfg);
  adamax_update(layer.bias, grads.bias, opt.bias, opt.step, cfg);
  if (cfg.trainable_readout) adamax_update(readout, grads.readout, opt.readout, opt.step, cfg);
}

Tensor route_to_neurons(const ConvLifLayer& layer, const LifLayerState& state, const Tensor& output_error) {
  const Tensor err = output_error.reshaped(layer.output_shape);
  switch (layer.spec.resample) {
    case Resample::pool2: return maxpool2d_route(state.last_spikes, err, 2);
    case Resample::up2: return upsample_nearest_adjoint(err, 2);
    case Resample::none: break;
  }
  return err;
}

LayerGradients local_gradients(const ConvLifLayer& layer, const LifLayerState& state, const Tensor& dloss_dpred,
                               const Tensor& readout) {
  if (dloss_dpred.size() != 4) throw std::invalid_argument("local_gradients: readout error must have 4 entries");
  const Index n_out = shape_size(layer.output_shape);
  if (readout.rank() != 2 || readout.dim(0) != 4 || readout.dim(1) != n_out) {
    throw std::invalid_argument("local_gradients: readout " + shape_to_string(readout.shape()) +
                                " does not match layer output " + shape_to_string(layer.output_shape));
  }
  if (state.v_pre_reset.shape() != layer.neuron_shape || state.trace.shape() != layer.input_shape) {
    throw std::invalid_argument("local_gradients: state does not match layer shapes");
  }

  Tensor output_error({n_out});
  output_error.array().matrix().noalias() = readout.matrix(4).transpose() * dloss_dpred.array().matrix();
  Tensor delta = route_to_neurons(layer, state, output_error);
  delta.array() *= surrogate_derivative(state.v_pre_reset, layer.lif).array();

  const Index cout = layer.spec.out_channels, k = layer.spec.kernel;
  LayerGradients g{Tensor(layer.weight.shape()), Tensor(layer.bias.shape()), Tensor{}};
  const auto d = delta.matrix(cout);
  g.weight.matrix(cout).noalias() = d * im2col(state.trace, k, 1, k / 2).transpose();
  g.bias.array().matrix() = d.rowwise().sum() * static_cast<float>(layer.lif.gain());
  return g;
}

Tensor readout_gradient(const Tensor& dloss_dpred, const Tensor& layer_output) {
  Tensor g({4, layer_output.size()});
  g.matrix(4).noalias() = dloss_dpred.array().matrix() * layer_output.array().matrix().transpose();
  return g;
}

TimestepLosses train_timestep(Network& net, std::span<NetworkState> states, std::span<const Tensor> inputs,
                              std::span<const Tensor> targets, std::vector<OptimState>& opt, const TrainConfig& cfg,
                              int t, std::vector<double>* spike_counts) {
  const std::size_t L = net.layers.size();
  const std::size_t batch = states.size();
  if (inputs.size() != batch || targets.size() != batch || batch == 0) {
    throw std::invalid_argument("train_timestep: states, inputs and targets must be non-empty and equal in number");
  }
  if (opt.size() != L) throw std::invalid_argument("train_timestep: expected one optimizer state per layer");

  TimestepLosses losses{std::vector<double>(L, 0.0), t >= cfg.effective_burn_in()};
  std::vector<LayerGradients> grads;
  if (losses.active) {
    for (std::size_t l = 0; l < L; ++l) grads.push_back(LayerGradients::zeros(net.layers[l], net.readouts[l], cfg.trainable_readout));
  }
  const auto delta = static_cast<float>(cfg.loss_delta);
  for (std::size_t b = 0; b < batch; ++b) {
    const TimestepOutput step = forward_timestep(net, states[b], inputs[b]);
    if (spike_counts) {
      for (std::size_t l = 0; l < L; ++l) (*spike_counts)[l] += step.lif_spikes[l].array().sum();
    }
    if (!losses.active) continue;
    for (std::size_t l = 0; l < L; ++l) {
      const Tensor pred = step.readouts.slice(static_cast<Index>(l));
      const auto [loss, dloss] = smooth_l1(pred, targets[b], delta);
      losses.per_layer[l] += loss;
      grads[l].accumulate(local_gradients(net.layers[l], states[b][l], dloss, net.readouts[l]));
      if (cfg.trainable_readout) grads[l].readout.array() += readout_gradient(dloss, step.outputs[l]).array();
    }
  }
  if (!losses.active) return losses;

  const float inv = 1.0f / static_cast<float>(batch);
  for (std::size_t l = 0; l < L; ++l) {
    losses.per_layer[l] /= static_cast<double>(batch);
    grads[l].scale(inv);
    adamax_step(net.layers[l], net.readouts[l], grads[l], opt[l], cfg);
  }
  return losses;
}

EpochSummary train_epoch(Network& net, std::span<const Sample> dataset, const TrainConfig& cfg, Rng& rng,
                         std::vector<OptimState>& opt, int epoch) {
  if (dataset.empty()) throw std::invalid_argument("train_epoch: dataset is empty");
  cfg.validate();
  const std::size_t L = net.layers.size();

  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

  EpochSummary summary{epoch, std::vector<double>(L, 0.0), std::vector<double>(L, 0.0)};
  std::vector<double> spike_counts(L, 0.0);
  std::size_t active_terms = 0;
  const auto bs = static_cast<std::size_t>(cfg.batch_size);

  for (std::size_t start = 0; start < order.size(); start += bs) {
    const std::size_t batch = std::min(bs, order.size() - start);
    std::vector<EncodedInput> encoded;
    std::vector<Tensor> targets;
    for (std::size_t b = 0; b < batch; ++b) {
      Sample s = prepare_sample(dataset[order[start + b]], net.height, net.width);
      if (cfg.augment) s = augment(s, rng);
      const BBox target = normalize_bbox(s.bbox, static_cast<double>(net.width), static_cast<double>(net.height));
      targets.push_back(Tensor({4}, {static_cast<float>(target.x_min), static_cast<float>(target.y_min),
                                     static_cast<float>(target.x_max), static_cast<float>(target.y_max)}));
      Rng coder(derive_seed(rng.next_u64(), start + b));
      encoded.push_back(rate_encode(s.image, cfg.T, cfg.p_max, coder));
    }
    std::vector<NetworkState> states(batch);
    for (auto& st : states) st = init_states(net);
    std::vector<Tensor> inputs(batch);
    for (int t = 0; t < cfg.T; ++t) {
      for (std::size_t b = 0; b < batch; ++b) inputs[b] = encoded[b].spikes.slice(t).cast<float>();
      const TimestepLosses step = train_timestep(net, states, inputs, targets, opt, cfg, t, &spike_counts);
      if (!step.active) continue;
      for (std::size_t l = 0; l < L; ++l) summary.mean_loss[l] += step.per_layer[l] * static_cast<double>(batch);
      active_terms += batch;
    }
  }
  for (std::size_t l = 0; l < L; ++l) {
    if (active_terms) summary.mean_loss[l] /= static_cast<double>(active_terms);
    const double neurons = static_cast<double>(shape_size(net.layers[l].neuron_shape));
    summary.spike_rate[l] = spike_counts[l] / (neurons * cfg.T * static_cast<double>(dataset.size()));
  }
  return summary;
}

}  // namespace spikeloc
