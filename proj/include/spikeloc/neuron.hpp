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

#include "spikeloc/ops.hpp"
#include "spikeloc/tensor.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace spikeloc {

/// Discrete-time leaky integrate-and-fire constants. Times are in ms.
struct LifConfig {
  double tau_leak = 10.0;
  double theta = 0.3;
  double dt = 1.0;
  /// Half-support of the triangular surrogate derivative.
  double surrogate_width = 0.5;

  /// Per-step membrane decay, 1 - dt/tau.
  double decay() const { return 1.0 - dt / tau_leak; }
  /// Input gain of the forward Euler step, dt/tau.
  double gain() const { return dt / tau_leak; }

  void validate() const {
    if (!(dt > 0.0) || !(tau_leak > dt)) throw std::invalid_argument("LifConfig: require tau_leak > dt > 0");
    if (!(theta > 0.0)) throw std::invalid_argument("LifConfig: theta must be positive");
    if (!(surrogate_width > 0.0)) throw std::invalid_argument("LifConfig: surrogate_width must be positive");
  }
};

/// Mutable per-layer simulation state.
///
/// `v` holds potentials after the reset of the current step; `v_pre_reset`
/// keeps the value that was compared against theta (the surrogate is
/// evaluated there). `trace` lives on the layer's presynaptic map: with
/// shared convolution weights, dV/dW is the presynaptic trace read through
/// the kernel window, so one trace per presynaptic site covers every synapse.
template <typename Scalar>
struct BasicLifLayerState {
  BasicTensor<Scalar> v;
  BasicTensor<Scalar> v_pre_reset;
  BasicTensor<Scalar> trace;
  BasicTensor<Scalar> last_spikes;

  static BasicLifLayerState zeros(const Shape& neurons, const Shape& presyn) {
    return {BasicTensor<Scalar>(neurons), BasicTensor<Scalar>(neurons), BasicTensor<Scalar>(presyn),
            BasicTensor<Scalar>(neurons)};
  }

  void reset() {
    v.array().setZero();
    v_pre_reset.array().setZero();
    trace.array().setZero();
    last_spikes.array().setZero();
  }
};

using LifLayerState = BasicLifLayerState<float>;

/// One forward Euler step of tau dV/dt = -V + I followed by threshold and
/// hard reset: V <- a V + (dt/tau) I; where V >= theta, spike 1 and V <- 0.
template <typename Scalar>
const BasicTensor<Scalar>& lif_step(BasicLifLayerState<Scalar>& state, const BasicTensor<Scalar>& current,
                                    const LifConfig& cfg) {
  if (current.shape() != state.v.shape()) {
    throw std::invalid_argument("lif_step: current " + shape_to_string(current.shape()) + " does not match state " +
                                shape_to_string(state.v.shape()));
  }
  const auto decay = static_cast<Scalar>(cfg.decay());
  const auto gain = static_cast<Scalar>(cfg.gain());
  const auto theta = static_cast<Scalar>(cfg.theta);
  state.v_pre_reset.array() = decay * state.v.array() + gain * current.array();
  const auto fired = state.v_pre_reset.array() >= theta;
  state.last_spikes.array() = fired.template cast<Scalar>();
  state.v.array() = fired.select(Scalar(0), state.v_pre_reset.array());
  return state.last_spikes;
}

/// Synaptic input current: presynaptic spike counts weighted through the
/// shared convolution kernel, plus bias ("same" padding).
template <typename Scalar>
BasicTensor<Scalar> accumulate_current(const BasicTensor<Scalar>& weight, const BasicTensor<Scalar>& bias,
                                       const BasicTensor<Scalar>& presyn_spikes) {
  return conv2d(presyn_spikes, weight, bias, 1, weight.dim(2) / 2);
}

/// Triangular surrogate for dS/dV: max(0, 1 - |v - theta|/w)/w.
template <typename Scalar>
BasicTensor<Scalar> surrogate_derivative(const BasicTensor<Scalar>& v, const LifConfig& cfg) {
  const auto theta = static_cast<Scalar>(cfg.theta);
  const auto width = static_cast<Scalar>(cfg.surrogate_width);
  BasicTensor<Scalar> out(v.shape());
  out.array() = (Scalar(1) - (v.array() - theta).abs() / width).max(Scalar(0)) / width;
  return out;
}

/// Eligibility trace recursion, trace <- a trace + (dt/tau) S_pre.
///
/// Equals dV[t]/dw for a unit synapse from each presynaptic site when the
/// reset path is excluded from the derivative.
template <typename Scalar>
const BasicTensor<Scalar>& trace_step(BasicLifLayerState<Scalar>& state, const BasicTensor<Scalar>& presyn,
                                      const LifConfig& cfg) {
  if (presyn.shape() != state.trace.shape()) {
    throw std::invalid_argument("trace_step: presynaptic map " + shape_to_string(presyn.shape()) +
                                " does not match trace " + shape_to_string(state.trace.shape()));
  }
  const auto decay = static_cast<Scalar>(cfg.decay());
  const auto gain = static_cast<Scalar>(cfg.gain());
  state.trace.array() = decay * state.trace.array() + gain * presyn.array();
  return state.trace;
}

}  // namespace spikeloc
