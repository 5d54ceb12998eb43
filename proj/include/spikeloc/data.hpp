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
#include "spikeloc/rng.hpp"
#include "spikeloc/tensor.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace spikeloc {

/// Raised for unreadable or inconsistent dataset content.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Sample {
  Tensor image;  // [H,W], values in [0,1]
  BBox bbox;     // pixels, exclusive max
  std::string id;
};

struct ManifestEntry {
  std::string id;
  std::filesystem::path image;
  BBox bbox;
};

enum class Split { train, test };

struct DatasetManifest {
  std::filesystem::path root;
  std::vector<ManifestEntry> entries;
  Split split = Split::train;
  std::uint64_t seed = 0;
};

// --- PGM (binary P5, 8-bit) ---

/// Raw 8-bit samples [H,W].
BasicTensor<std::uint8_t> read_pgm_bytes(const std::filesystem::path& path);
/// Image scaled to [0,1].
Tensor read_pgm(const std::filesystem::path& path);
void write_pgm_bytes(const std::filesystem::path& path, const BasicTensor<std::uint8_t>& pixels);
/// Writes a [0,1] image, rounding to 8 bits.
void write_pgm(const std::filesystem::path& path, const Tensor& image);

// --- synthetic shapes ---

enum class ShapeKind { rectangle, ellipse, triangle };

struct SyntheticShape {
  ShapeKind kind = ShapeKind::rectangle;
  Index top = 0;
  Index left = 0;
  Index height = 1;
  Index width = 1;
  float intensity = 1.0f;
};

struct SynthConfig {
  float noise_amplitude = 0.1f;
  float min_size = 0.15f;  // fraction of min(H, W)
  float max_size = 0.60f;
  float min_intensity = 0.7f;
  float max_intensity = 1.0f;
};

/// Binary mask [H,W] of the shape's pixels (pixel-centre test).
Tensor shape_mask(const SyntheticShape& shape, Index height, Index width);
/// Renders a shape over a dark background with uniform noise in [0, amplitude).
Sample render_synthetic(const SyntheticShape& shape, Index height, Index width, float noise_amplitude, Rng& rng,
                        std::string id = {});
std::vector<Sample> generate_synthetic(Index n, Index height, Index width, Rng& rng, const SynthConfig& cfg = {});

/// Parsed `synth://n=<train>,test=<test>,size=<H>x<W>,seed=<s>` source.
/// Omitted keys keep their defaults.
struct SynthSource {
  Index train = 200;
  Index test = 50;
  Index height = 32;
  Index width = 32;
  std::uint64_t seed = 0;
};

bool is_synth_source(const std::string& source);
SynthSource parse_synth_source(const std::string& source);

struct SampleSplit {
  std::vector<Sample> train;
  std::vector<Sample> test;
};

/// Train samples first, then test samples, from one generator seeded by src.seed.
SampleSplit generate_split(const SynthSource& src);

// --- conversions ---

/// Tight box around trimap foreground (label 1, optionally also label 3).
BBox trimap_to_bbox(const BasicTensor<std::uint8_t>& trimap, bool include_boundary = false,
                    const std::string& source = "trimap");
/// Same, for a mask of mask-valued reals.
BBox mask_to_bbox(const Tensor& mask);

Tensor to_grayscale(const Tensor& rgb);

/// Bilinear resize with corner-aligned sampling: output pixel (i, j) samples
/// input at (i*(H-1)/(H'-1), j*(W-1)/(W'-1)). The box is scaled by
/// (W'/W, H'/H).
std::pair<Tensor, BBox> resize_bilinear(const Tensor& image, const BBox& bbox, Index out_height, Index out_width);

/// Resizes to the network resolution when needed.
Sample prepare_sample(const Sample& sample, Index height, Index width);

// --- augmentation ---

struct AugmentConfig {
  double flip_probability = 0.5;
  float brightness_min = 0.7f;
  float brightness_max = 1.3f;
};

Sample flip_horizontal(const Sample& sample);
Sample scale_brightness(const Sample& sample, float factor);
Sample augment(const Sample& sample, Rng& rng, const AugmentConfig& cfg = {});

// --- directory datasets ---

/// Validates a pixel box against image dimensions; throws DataError naming id.
void validate_bbox(const BBox& box, Index height, Index width, const std::string& id);

/// Parses `id,x_min,y_min,x_max,y_max` rows (header required).
std::vector<ManifestEntry> read_annotations(const std::filesystem::path& root);
void write_annotations(const std::filesystem::path& csv, const std::vector<ManifestEntry>& entries);

/// Seeded shuffle; the first train_count entries form the train split.
/// train_count < 0 selects 80% of the data.
std::pair<DatasetManifest, DatasetManifest> load_dataset(const std::filesystem::path& root, std::uint64_t split_seed,
                                                         long train_count);

Sample load_sample(const ManifestEntry& entry);
std::vector<Sample> load_samples(const DatasetManifest& manifest);

/// Resolves a `synth://` source or a dataset directory into in-memory splits.
SampleSplit load_split(const std::string& source, std::uint64_t split_seed, long train_count);

struct PrepareReport {
  std::vector<ManifestEntry> entries;
  /// (id, reason) for samples that had both files but could not be converted.
  std::vector<std::pair<std::string, std::string>> skipped;
  /// Ids present in only one of images/ and trimaps/.
  std::vector<std::string> missing_trimap;
  std::vector<std::string> missing_image;
};

/// Converts `raw/images/<id>.pgm` + `raw/trimaps/<id>.pgm` pairs into a
/// dataset directory (`out/images/`, `out/annotations.csv`). Throws
/// DataError when no sample survives.
PrepareReport prepare_dataset(const std::filesystem::path& raw, const std::filesystem::path& out,
                              bool include_boundary);

/// Writes samples as `root/images/<id>.pgm` plus `root/annotations.csv`.
void materialize(const std::filesystem::path& root, const std::vector<Sample>& samples);

}  // namespace spikeloc
