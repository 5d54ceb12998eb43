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

#include "spikeloc/coding.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <utility>

namespace spikeloc {

BBox canonicalize(BBox box) {
  if (box.x_min > box.x_max) std::swap(box.x_min, box.x_max);
  if (box.y_min > box.y_max) std::swap(box.y_min, box.y_max);
  if (box.normalized) {
    for (double* c : {&box.x_min, &box.y_min, &box.x_max, &box.y_max}) *c = std::clamp(*c, 0.0, 1.0);
  }
  return box;
}

BBox normalize_bbox(const BBox& box, double width, double height) {
  if (!(width > 0.0) || !(height > 0.0)) throw std::invalid_argument("normalize_bbox: dimensions must be positive");
  if (box.normalized) throw std::invalid_argument("normalize_bbox: box is already normalized");
  return {box.x_min / width, box.y_min / height, box.x_max / width, box.y_max / height, true};
}

BBox denormalize_bbox(const BBox& box, double width, double height) {
  if (!(width > 0.0) || !(height > 0.0)) throw std::invalid_argument("denormalize_bbox: dimensions must be positive");
  if (!box.normalized) throw std::invalid_argument("denormalize_bbox: box is in pixel space");
  return {box.x_min * width, box.y_min * height, box.x_max * width, box.y_max * height, false};
}

EncodedInput rate_encode(const Tensor& image, Index timesteps, double p_max, Rng& rng) {
  if (image.rank() != 2) throw std::invalid_argument("rate_encode: expected [H,W] image, got " + shape_to_string(image.shape()));
  if (timesteps < 1) throw std::invalid_argument("rate_encode: T must be >= 1");
  if (!(p_max > 0.0 && p_max <= 1.0)) throw std::invalid_argument("rate_encode: p_max must lie in (0,1]");
  if ((image.array() < 0.0f).any() || (image.array() > 1.0f).any()) {
    throw std::invalid_argument("rate_encode: pixel values must lie in [0,1]");
  }
  const Index h = image.dim(0), w = image.dim(1);
  EncodedInput enc{SpikeTensor({timesteps, 1, h, w}), h, w, p_max, rng.seed()};
  const Tensor::Array prob = image.array() * static_cast<float>(p_max);
  const Index n = h * w;
  for (Index t = 0; t < timesteps; ++t) {
    std::uint8_t* frame = enc.spikes.data() + t * n;
    for (Index i = 0; i < n; ++i) frame[i] = rng.bernoulli(prob[i]) ? 1 : 0;
  }
  return enc;
}

BBox decode_prediction(const Tensor& history) {
  if (history.rank() != 3 || history.dim(2) != 4) {
    throw std::invalid_argument("decode_prediction: expected [T,L,4] history, got " +
                                (history.empty() ? std::string("empty") : shape_to_string(history.shape())));
  }
  const Index t = history.dim(0) - 1, l = history.dim(1) - 1;
  BBox raw{history(t, l, 0), history(t, l, 1), history(t, l, 2), history(t, l, 3), true};
  return canonicalize(raw);
}

}  // namespace spikeloc
