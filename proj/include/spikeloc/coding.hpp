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

#include "spikeloc/rng.hpp"
#include "spikeloc/tensor.hpp"

#include <cstdint>

namespace spikeloc {

/// Box corners (x_min, y_min) upper-left and (x_max, y_max) lower-right.
/// Pixel boxes use an exclusive max, so width = x_max - x_min.
struct BBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;
  bool normalized = false;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }

  friend bool operator==(const BBox&, const BBox&) = default;
};

/// Swaps inverted corners; normalized boxes are also clamped to [0,1].
BBox canonicalize(BBox box);

BBox normalize_bbox(const BBox& box, double width, double height);
BBox denormalize_bbox(const BBox& box, double width, double height);

struct EncodedInput {
  SpikeTensor spikes;  // [T,1,H,W], binary
  Index height = 0;
  Index width = 0;
  double p_max = 0.5;
  std::uint64_t seed = 0;
};

/// Poisson rate coding: an independent Bernoulli(pixel * p_max) draw per
/// pixel per timestep.
EncodedInput rate_encode(const Tensor& image, Index timesteps, double p_max, Rng& rng);

/// Final prediction: the last layer's readout at the last timestep,
/// canonicalized. history is [T, L, 4].
BBox decode_prediction(const Tensor& readout_history);

}  // namespace spikeloc
