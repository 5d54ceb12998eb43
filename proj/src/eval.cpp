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

#include "spikeloc/eval.hpp"

#include "spikeloc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <stdexcept>

namespace spikeloc {

double iou(const BBox& a, const BBox& b) {
  if (a.normalized != b.normalized) throw std::invalid_argument("iou: boxes are in different coordinate spaces");
  const double iw = std::max(0.0, std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min));
  const double ih = std::max(0.0, std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min));
  const double inter = iw * ih;
  const double uni = std::max(0.0, a.area()) + std::max(0.0, b.area()) - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

std::uint64_t sample_seed(std::uint64_t global_seed, const std::string& id) {
  return derive_seed(global_seed, hash_string(id));
}

BBox predict(const Network& net, const Sample& sample, const EvalConfig& cfg) {
  const Sample s = prepare_sample(sample, net.height, net.width);
  Rng rng(sample_seed(cfg.seed, sample.id));
  const EncodedInput enc = rate_encode(s.image, cfg.timesteps, cfg.p_max, rng);
  const SequenceResult seq = forward_sequence(net, enc.spikes);
  const BBox norm = decode_prediction(seq.readout_history);
  return denormalize_bbox(norm, static_cast<double>(sample.image.dim(1)), static_cast<double>(sample.image.dim(0)));
}

std::pair<BBox, double> best_constant_box(std::span<const BBox> targets, double step) {
  if (targets.empty()) throw std::invalid_argument("best_constant_box: no targets");
  const int n = static_cast<int>(std::lround(1.0 / step));
  std::vector<double> grid(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) grid[static_cast<std::size_t>(i)] = std::min(1.0, i * step);

  BBox best{0, 0, 0, 0, true};
  double best_score = -1.0;
  for (std::size_t x0 = 0; x0 < grid.size(); ++x0)
    for (std::size_t x1 = x0 + 1; x1 < grid.size(); ++x1)
      for (std::size_t y0 = 0; y0 < grid.size(); ++y0)
        for (std::size_t y1 = y0 + 1; y1 < grid.size(); ++y1) {
          const BBox cand{grid[x0], grid[y0], grid[x1], grid[y1], true};
          double sum = 0.0;
          for (const auto& t : targets) sum += iou(cand, t);
          if (sum > best_score) {
            best_score = sum;
            best = cand;
          }
        }
  return {best, best_score / static_cast<double>(targets.size())};
}

EvalReport evaluate_with(std::span<const Sample> test, const Predictor& predictor, double baseline_step) {
  if (test.empty()) throw std::invalid_argument("evaluate: test set is empty");
  EvalReport report;
  std::vector<BBox> targets;
  double sum = 0.0;
  for (const auto& s : test) {
    const BBox pred = canonicalize(predictor(s));
    const double score = iou(pred, s.bbox);
    report.per_sample.emplace_back(s.id, score);
    sum += score;
    report.histogram[static_cast<std::size_t>(std::min(9, static_cast<int>(score * 10.0)))]++;
    targets.push_back(normalize_bbox(s.bbox, static_cast<double>(s.image.dim(1)), static_cast<double>(s.image.dim(0))));
  }
  report.miou = sum / static_cast<double>(test.size());
  std::tie(report.baseline_box, report.baseline_miou) = best_constant_box(targets, baseline_step);
  return report;
}

EvalReport evaluate(const Network& net, std::span<const Sample> test, const EvalConfig& cfg) {
  return evaluate_with(test, [&](const Sample& s) { return predict(net, s, cfg); }, cfg.baseline_step);
}

void write_report_csv(const std::filesystem::path& path, const EvalReport& report) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "id,iou\n" << std::setprecision(9);
  for (const auto& [id, score] : report.per_sample) out << id << "," << score << "\n";
}

Tensor render_overlay(const Tensor& image, const BBox& predicted, const BBox& truth) {
  Tensor out = image;
  const Index h = image.dim(0), w = image.dim(1);
  auto draw = [&](const BBox& b, float value) {
    const auto clampi = [](double v, Index hi) { return std::clamp<Index>(static_cast<Index>(std::floor(v)), 0, hi); };
    const Index x0 = clampi(b.x_min, w - 1), x1 = clampi(std::ceil(b.x_max) - 1, w - 1);
    const Index y0 = clampi(b.y_min, h - 1), y1 = clampi(std::ceil(b.y_max) - 1, h - 1);
    for (Index x = x0; x <= x1; ++x) out(y0, x) = out(y1, x) = value;
    for (Index y = y0; y <= y1; ++y) out(y, x0) = out(y, x1) = value;
  };
  draw(truth, 0.5f);
  draw(predicted, 1.0f);
  return out;
}

}  // namespace spikeloc
