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
#include "spikeloc/data.hpp"
#include "spikeloc/network.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace spikeloc {

/// Intersection over union in continuous coordinates. Boxes with zero area
/// union score 0. Both boxes must share a coordinate space.
double iou(const BBox& a, const BBox& b);

struct EvalConfig {
  Index timesteps = 32;
  double p_max = 0.5;
  std::uint64_t seed = 0;
  /// Grid resolution of the constant-box baseline search.
  double baseline_step = 0.05;
};

struct EvalReport {
  double miou = 0.0;
  std::vector<std::pair<std::string, double>> per_sample;
  double baseline_miou = 0.0;
  BBox baseline_box{0, 0, 0, 0, true};
  std::array<int, 10> histogram{};
};

/// Maps a sample to a pixel-space box prediction at the sample's resolution.
using Predictor = std::function<BBox(const Sample&)>;

/// Encodes, simulates and decodes one sample; returns a pixel box in the
/// sample's own resolution.
BBox predict(const Network& net, const Sample& sample, const EvalConfig& cfg);

/// Per-sample encoding seed, stable across runs and decorrelated by id.
std::uint64_t sample_seed(std::uint64_t global_seed, const std::string& id);

/// Single fixed normalized box maximizing mean IoU against the targets,
/// searched over a grid with the given step.
std::pair<BBox, double> best_constant_box(std::span<const BBox> normalized_targets, double step);

EvalReport evaluate_with(std::span<const Sample> test, const Predictor& predictor, double baseline_step = 0.05);
EvalReport evaluate(const Network& net, std::span<const Sample> test, const EvalConfig& cfg);

void write_report_csv(const std::filesystem::path& path, const EvalReport& report);

/// Image with predicted (1.0) and ground-truth (0.5) box outlines burned in.
Tensor render_overlay(const Tensor& image, const BBox& predicted, const BBox& truth);

}  // namespace spikeloc
