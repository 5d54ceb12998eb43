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

#include "spikeloc/tensor.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <stdexcept>
#include <string>

namespace spikeloc {

namespace detail {

inline void require_rank(const Shape& shape, std::size_t rank, const char* what) {
  if (shape.size() != rank) {
    throw std::invalid_argument(std::string(what) + ": expected rank " + std::to_string(rank) + ", got " +
                                shape_to_string(shape));
  }
}

inline Index conv_extent(Index in, Index k, Index stride, Index padding) {
  return (in + 2 * padding - k) / stride + 1;
}

}  // namespace detail

/// Unfolds the k x k receptive fields of a [C,H,W] map into a
/// (C*k*k) x (H'*W') matrix, zero outside the padded border.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> im2col(const BasicTensor<Scalar>& input,
                                                                               Index k, Index stride,
                                                                               Index padding) {
  detail::require_rank(input.shape(), 3, "im2col");
  const Index channels = input.dim(0), h = input.dim(1), w = input.dim(2);
  const Index ho = detail::conv_extent(h, k, stride, padding);
  const Index wo = detail::conv_extent(w, k, stride, padding);
  if (ho < 1 || wo < 1) {
    throw std::invalid_argument("im2col: kernel " + std::to_string(k) + " does not fit input " +
                                shape_to_string(input.shape()));
  }
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> cols(channels * k * k, ho * wo);
  const Scalar* src = input.data();
  for (Index c = 0; c < channels; ++c) {
    for (Index ky = 0; ky < k; ++ky) {
      for (Index kx = 0; kx < k; ++kx) {
        Scalar* row = cols.row((c * k + ky) * k + kx).data();
        for (Index oy = 0; oy < ho; ++oy) {
          const Index iy = oy * stride + ky - padding;
          Scalar* dst = row + oy * wo;
          if (iy < 0 || iy >= h) {
            std::fill(dst, dst + wo, Scalar(0));
            continue;
          }
          const Scalar* line = src + (c * h + iy) * w;
          for (Index ox = 0; ox < wo; ++ox) {
            const Index ix = ox * stride + kx - padding;
            dst[ox] = (ix >= 0 && ix < w) ? line[ix] : Scalar(0);
          }
        }
      }
    }
  }
  return cols;
}

/// 2-D cross-correlation (no kernel flip) with zero padding.
///
/// input [Cin,H,W], weight [Cout,Cin,k,k], bias [Cout] -> [Cout,H',W'] with
/// H' = (H + 2*padding - k)/stride + 1.
template <typename Scalar>
BasicTensor<Scalar> conv2d(const BasicTensor<Scalar>& input, const BasicTensor<Scalar>& weight,
                           const BasicTensor<Scalar>& bias, Index stride = 1, Index padding = 0) {
  detail::require_rank(input.shape(), 3, "conv2d input");
  detail::require_rank(weight.shape(), 4, "conv2d weight");
  const Index cout = weight.dim(0), k = weight.dim(2);
  if (weight.dim(1) != input.dim(0)) {
    throw std::invalid_argument("conv2d: weight " + shape_to_string(weight.shape()) + " expects " +
                                std::to_string(weight.dim(1)) + " input channels but input is " +
                                shape_to_string(input.shape()));
  }
  if (weight.dim(3) != k || k % 2 == 0) {
    throw std::invalid_argument("conv2d: kernel must be square with odd size, got " +
                                shape_to_string(weight.shape()));
  }
  if (bias.size() != cout) {
    throw std::invalid_argument("conv2d: bias " + shape_to_string(bias.shape()) + " does not match weight " +
                                shape_to_string(weight.shape()));
  }
  if (stride < 1 || padding < 0) throw std::invalid_argument("conv2d: stride must be >= 1 and padding >= 0");

  const Index ho = detail::conv_extent(input.dim(1), k, stride, padding);
  const Index wo = detail::conv_extent(input.dim(2), k, stride, padding);
  const auto cols = im2col(input, k, stride, padding);
  BasicTensor<Scalar> out({cout, ho, wo});
  out.matrix(cout).noalias() = weight.matrix(cout) * cols;
  out.matrix(cout).colwise() += bias.array().matrix();
  return out;
}

/// Max over non-overlapping k x k windows; H and W must be divisible by k.
template <typename Scalar>
BasicTensor<Scalar> maxpool2d(const BasicTensor<Scalar>& input, Index k = 2, Index stride = 2) {
  detail::require_rank(input.shape(), 3, "maxpool2d");
  if (k < 1 || stride < 1) throw std::invalid_argument("maxpool2d: k and stride must be >= 1");
  const Index c = input.dim(0), h = input.dim(1), w = input.dim(2);
  if (h % k != 0) throw std::invalid_argument("maxpool2d: height " + std::to_string(h) + " not divisible by " + std::to_string(k));
  if (w % k != 0) throw std::invalid_argument("maxpool2d: width " + std::to_string(w) + " not divisible by " + std::to_string(k));
  const Index ho = (h - k) / stride + 1, wo = (w - k) / stride + 1;
  BasicTensor<Scalar> out({c, ho, wo});
  for (Index ch = 0; ch < c; ++ch) {
    for (Index oy = 0; oy < ho; ++oy) {
      for (Index ox = 0; ox < wo; ++ox) {
        Scalar m = input(ch, oy * stride, ox * stride);
        for (Index dy = 0; dy < k; ++dy)
          for (Index dx = 0; dx < k; ++dx) m = std::max(m, input(ch, oy * stride + dy, ox * stride + dx));
        out(ch, oy, ox) = m;
      }
    }
  }
  return out;
}

/// Routes an output-side gradient back through maxpool2d(input, k, k).
/// Every window element attaining the maximum receives the full gradient,
/// so ties (common on binary spike maps) are not resolved arbitrarily.
template <typename Scalar>
BasicTensor<Scalar> maxpool2d_route(const BasicTensor<Scalar>& input, const BasicTensor<Scalar>& grad_out,
                                    Index k = 2) {
  const auto pooled = maxpool2d(input, k, k);
  if (grad_out.shape() != pooled.shape()) {
    throw std::invalid_argument("maxpool2d_route: gradient " + shape_to_string(grad_out.shape()) +
                                " does not match pooled " + shape_to_string(pooled.shape()));
  }
  BasicTensor<Scalar> out(input.shape());
  const Index c = input.dim(0), h = input.dim(1), w = input.dim(2);
  for (Index ch = 0; ch < c; ++ch)
    for (Index y = 0; y < h; ++y)
      for (Index x = 0; x < w; ++x)
        if (input(ch, y, x) == pooled(ch, y / k, x / k)) out(ch, y, x) = grad_out(ch, y / k, x / k);
  return out;
}

/// Nearest-neighbour upsampling: every cell becomes a factor x factor block.
template <typename Scalar>
BasicTensor<Scalar> upsample_nearest(const BasicTensor<Scalar>& input, Index factor = 2) {
  detail::require_rank(input.shape(), 3, "upsample_nearest");
  if (factor < 1) throw std::invalid_argument("upsample_nearest: factor must be >= 1");
  const Index c = input.dim(0), h = input.dim(1), w = input.dim(2);
  BasicTensor<Scalar> out({c, h * factor, w * factor});
  for (Index ch = 0; ch < c; ++ch)
    for (Index y = 0; y < h * factor; ++y)
      for (Index x = 0; x < w * factor; ++x) out(ch, y, x) = input(ch, y / factor, x / factor);
  return out;
}

/// Adjoint of upsample_nearest: sums each factor x factor block.
template <typename Scalar>
BasicTensor<Scalar> upsample_nearest_adjoint(const BasicTensor<Scalar>& grad_out, Index factor = 2) {
  detail::require_rank(grad_out.shape(), 3, "upsample_nearest_adjoint");
  const Index c = grad_out.dim(0), h = grad_out.dim(1) / factor, w = grad_out.dim(2) / factor;
  BasicTensor<Scalar> out({c, h, w});
  for (Index ch = 0; ch < c; ++ch)
    for (Index y = 0; y < h * factor; ++y)
      for (Index x = 0; x < w * factor; ++x) out(ch, y / factor, x / factor) += grad_out(ch, y, x);
  return out;
}

/// y = W x for W [M,N], x [N].
template <typename Scalar>
BasicTensor<Scalar> matvec(const BasicTensor<Scalar>& weight, const BasicTensor<Scalar>& x) {
  detail::require_rank(weight.shape(), 2, "matvec weight");
  if (weight.dim(1) != x.size()) {
    throw std::invalid_argument("matvec: weight " + shape_to_string(weight.shape()) + " cannot multiply vector of " +
                                std::to_string(x.size()) + " elements");
  }
  BasicTensor<Scalar> y({weight.dim(0)});
  y.array().matrix().noalias() = weight.matrix(weight.dim(0)) * x.array().matrix();
  return y;
}

}  // namespace spikeloc
