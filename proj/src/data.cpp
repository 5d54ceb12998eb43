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

#include "spikeloc/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace spikeloc {

namespace fs = std::filesystem;

namespace {

std::string next_pgm_token(std::istream& in) {
  std::string token;
  while (in) {
    const int c = in.peek();
    if (c == '#') {
      std::string comment;
      std::getline(in, comment);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
  }
  in >> token;
  return token;
}

Index parse_extent(const std::string& token, const fs::path& path) {
  try {
    std::size_t used = 0;
    const long v = std::stol(token, &used);
    if (used != token.size() || v < 1) throw std::invalid_argument(token);
    return v;
  } catch (const std::exception&) {
    throw DataError(path.string() + ": malformed PGM header field '" + token + "'");
  }
}

double parse_coord(const std::string& field, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(field, &used);
    if (used != field.size()) throw std::invalid_argument(field);
    return v;
  } catch (const std::exception&) {
    throw DataError(where + ": malformed coordinate '" + field + "'");
  }
}

}  // namespace

BasicTensor<std::uint8_t> read_pgm_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open image " + path.string());
  if (next_pgm_token(in) != "P5") throw DataError(path.string() + ": not a binary PGM (P5) file");
  const Index w = parse_extent(next_pgm_token(in), path);
  const Index h = parse_extent(next_pgm_token(in), path);
  const Index maxval = parse_extent(next_pgm_token(in), path);
  if (maxval > 255) throw DataError(path.string() + ": only 8-bit PGM is supported");
  in.get();  // single whitespace before raster
  BasicTensor<std::uint8_t> px({h, w});
  in.read(reinterpret_cast<char*>(px.data()), static_cast<std::streamsize>(h * w));
  if (in.gcount() != h * w) throw DataError(path.string() + ": truncated PGM raster");
  if (maxval != 255) {
    for (Index i = 0; i < px.size(); ++i) px[i] = static_cast<std::uint8_t>(std::lround(px[i] * 255.0 / maxval));
  }
  return px;
}

Tensor read_pgm(const fs::path& path) {
  Tensor img = read_pgm_bytes(path).cast<float>();
  img.array() /= 255.0f;
  return img;
}

void write_pgm_bytes(const fs::path& path, const BasicTensor<std::uint8_t>& px) {
  if (px.rank() != 2) throw std::invalid_argument("write_pgm: expected [H,W] image");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << "P5\n" << px.dim(1) << " " << px.dim(0) << "\n255\n";
  out.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
}

void write_pgm(const fs::path& path, const Tensor& image) {
  BasicTensor<std::uint8_t> px(image.shape());
  for (Index i = 0; i < image.size(); ++i) {
    px[i] = static_cast<std::uint8_t>(std::lround(std::clamp(image[i], 0.0f, 1.0f) * 255.0f));
  }
  write_pgm_bytes(path, px);
}

Tensor shape_mask(const SyntheticShape& s, Index height, Index width) {
  Tensor mask({height, width});
  const double cx = s.width / 2.0, cy = s.height / 2.0;
  for (Index r = 0; r < s.height; ++r) {
    double half = 0.0;  // half-width of the shape on this row, about cx
    switch (s.kind) {
      case ShapeKind::rectangle: half = cx; break;
      case ShapeKind::ellipse: {
        const double dy = (r + 0.5 - cy) / cy;
        half = cx * std::sqrt(std::max(0.0, 1.0 - dy * dy));
        break;
      }
      case ShapeKind::triangle: half = cx * (r + 1.0) / static_cast<double>(s.height); break;
    }
    // keep every row of the box occupied so the box stays tight
    half = std::max(half, 0.5);
    for (Index c = 0; c < s.width; ++c) {
      const Index y = s.top + r, x = s.left + c;
      if (y < 0 || y >= height || x < 0 || x >= width) continue;
      if (std::abs(c + 0.5 - cx) <= half) mask(y, x) = 1.0f;
    }
  }
  return mask;
}

Sample render_synthetic(const SyntheticShape& shape, Index height, Index width, float noise_amplitude, Rng& rng,
                        std::string id) {
  const Tensor mask = shape_mask(shape, height, width);
  Tensor img({height, width});
  for (Index i = 0; i < img.size(); ++i) {
    const float noise = noise_amplitude > 0.0f ? rng.uniform(0.0f, noise_amplitude) : 0.0f;
    img[i] = std::min(1.0f, mask[i] * shape.intensity + noise);
  }
  return {std::move(img), mask_to_bbox(mask), std::move(id)};
}

std::vector<Sample> generate_synthetic(Index n, Index height, Index width, Rng& rng, const SynthConfig& cfg) {
  if (n < 1) throw std::invalid_argument("generate_synthetic: n must be >= 1");
  if (height % 8 != 0 || width % 8 != 0) {
    throw std::invalid_argument("generate_synthetic: image size must be divisible by 8");
  }
  const double min_dim = static_cast<double>(std::min(height, width));
  const auto lo = static_cast<Index>(std::ceil(cfg.min_size * min_dim));
  const auto hi = static_cast<Index>(std::floor(cfg.max_size * min_dim));
  if (lo < 1 || hi < lo) throw std::invalid_argument("generate_synthetic: degenerate shape size range");

  std::vector<Sample> out;
  out.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    SyntheticShape s;
    s.kind = static_cast<ShapeKind>(rng.below(3));
    s.height = lo + static_cast<Index>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)));
    s.width = lo + static_cast<Index>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)));
    s.top = static_cast<Index>(rng.below(static_cast<std::uint64_t>(height - s.height + 1)));
    s.left = static_cast<Index>(rng.below(static_cast<std::uint64_t>(width - s.width + 1)));
    s.intensity = rng.uniform(cfg.min_intensity, cfg.max_intensity);
    out.push_back(render_synthetic(s, height, width, cfg.noise_amplitude, rng, "synth_" + std::to_string(i)));
  }
  return out;
}

bool is_synth_source(const std::string& source) { return source.rfind("synth://", 0) == 0; }

SynthSource parse_synth_source(const std::string& source) {
  if (!is_synth_source(source)) throw DataError("not a synth:// source: '" + source + "'");
  SynthSource src;
  auto number = [&](const std::string& key, const std::string& v) {
    try {
      std::size_t used = 0;
      const long long n = std::stoll(v, &used);
      if (used != v.size() || n < 0) throw std::invalid_argument(v);
      return n;
    } catch (const std::exception&) {
      throw DataError("synth source '" + source + "': bad value for " + key + ": '" + v + "'");
    }
  };
  std::stringstream ss(source.substr(8));
  for (std::string item; std::getline(ss, item, ',');) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw DataError("synth source '" + source + "': expected key=value, got '" + item + "'");
    const std::string key = item.substr(0, eq), value = item.substr(eq + 1);
    if (key == "n") {
      src.train = number(key, value);
    } else if (key == "test") {
      src.test = number(key, value);
    } else if (key == "seed") {
      src.seed = static_cast<std::uint64_t>(number(key, value));
    } else if (key == "size") {
      const auto x = value.find('x');
      if (x == std::string::npos) throw DataError("synth source '" + source + "': size must be HxW");
      src.height = number(key, value.substr(0, x));
      src.width = number(key, value.substr(x + 1));
    } else {
      throw DataError("synth source '" + source + "': unknown key '" + key + "'");
    }
  }
  if (src.train < 1) throw DataError("synth source '" + source + "': n must be >= 1");
  return src;
}

SampleSplit generate_split(const SynthSource& src) {
  Rng rng(src.seed);
  SampleSplit out;
  out.train = generate_synthetic(src.train, src.height, src.width, rng);
  if (src.test > 0) {
    out.test = generate_synthetic(src.test, src.height, src.width, rng);
    for (std::size_t i = 0; i < out.test.size(); ++i) {
      out.test[i].id = "synth_" + std::to_string(static_cast<std::size_t>(src.train) + i);
    }
  }
  return out;
}

BBox mask_to_bbox(const Tensor& mask) {
  Index x0 = mask.dim(1), y0 = mask.dim(0), x1 = -1, y1 = -1;
  for (Index y = 0; y < mask.dim(0); ++y) {
    for (Index x = 0; x < mask.dim(1); ++x) {
      if (mask(y, x) == 0.0f) continue;
      x0 = std::min(x0, x);
      y0 = std::min(y0, y);
      x1 = std::max(x1, x);
      y1 = std::max(y1, y);
    }
  }
  if (x1 < 0) throw DataError("mask has no foreground pixels");
  return {static_cast<double>(x0), static_cast<double>(y0), static_cast<double>(x1 + 1), static_cast<double>(y1 + 1),
          false};
}

BBox trimap_to_bbox(const BasicTensor<std::uint8_t>& trimap, bool include_boundary, const std::string& source) {
  if (trimap.rank() != 2) throw DataError(source + ": trimap must be a 2-D label map");
  Tensor fg(trimap.shape());
  for (Index i = 0; i < trimap.size(); ++i) {
    fg[i] = (trimap[i] == 1 || (include_boundary && trimap[i] == 3)) ? 1.0f : 0.0f;
  }
  if ((fg.array() == 0.0f).all()) throw DataError(source + ": trimap has no foreground pixels");
  return mask_to_bbox(fg);
}

Tensor to_grayscale(const Tensor& rgb) {
  if (rgb.rank() != 3 || rgb.dim(0) != 3) {
    throw std::invalid_argument("to_grayscale: expected [3,H,W], got " + shape_to_string(rgb.shape()));
  }
  const Index n = rgb.dim(1) * rgb.dim(2);
  Tensor gray({rgb.dim(1), rgb.dim(2)});
  gray.array() = 0.299f * rgb.array().segment(0, n) + 0.587f * rgb.array().segment(n, n) +
                 0.114f * rgb.array().segment(2 * n, n);
  return gray;
}

std::pair<Tensor, BBox> resize_bilinear(const Tensor& image, const BBox& bbox, Index oh, Index ow) {
  if (image.rank() != 2) throw std::invalid_argument("resize_bilinear: expected [H,W] image");
  if (oh < 2 || ow < 2) throw std::invalid_argument("resize_bilinear: target dimensions must be >= 2");
  const Index h = image.dim(0), w = image.dim(1);
  BBox box = bbox;
  const double sx = static_cast<double>(ow) / w, sy = static_cast<double>(oh) / h;
  if (!box.normalized) box = {bbox.x_min * sx, bbox.y_min * sy, bbox.x_max * sx, bbox.y_max * sy, false};
  if (oh == h && ow == w) return {image, box};

  Tensor out({oh, ow});
  const double ry = h > 1 ? static_cast<double>(h - 1) / (oh - 1) : 0.0;
  const double rx = w > 1 ? static_cast<double>(w - 1) / (ow - 1) : 0.0;
  for (Index i = 0; i < oh; ++i) {
    const double fy = i * ry;
    const auto y0 = std::min(static_cast<Index>(fy), h - 1);
    const Index y1 = std::min(y0 + 1, h - 1);
    const double ay = fy - y0;
    for (Index j = 0; j < ow; ++j) {
      const double fx = j * rx;
      const auto x0 = std::min(static_cast<Index>(fx), w - 1);
      const Index x1 = std::min(x0 + 1, w - 1);
      const double ax = fx - x0;
      const double top = (1 - ax) * image(y0, x0) + ax * image(y0, x1);
      const double bot = (1 - ax) * image(y1, x0) + ax * image(y1, x1);
      out(i, j) = static_cast<float>((1 - ay) * top + ay * bot);
    }
  }
  return {std::move(out), box};
}

Sample prepare_sample(const Sample& sample, Index height, Index width) {
  if (sample.image.dim(0) == height && sample.image.dim(1) == width) return sample;
  auto [img, box] = resize_bilinear(sample.image, sample.bbox, height, width);
  return {std::move(img), box, sample.id};
}

Sample flip_horizontal(const Sample& s) {
  const Index h = s.image.dim(0), w = s.image.dim(1);
  Sample out{Tensor(s.image.shape()), s.bbox, s.id};
  for (Index y = 0; y < h; ++y)
    for (Index x = 0; x < w; ++x) out.image(y, x) = s.image(y, w - 1 - x);
  const double W = static_cast<double>(w);
  out.bbox.x_min = W - s.bbox.x_max;
  out.bbox.x_max = W - s.bbox.x_min;
  return out;
}

Sample scale_brightness(const Sample& s, float factor) {
  Sample out = s;
  if (factor != 1.0f) out.image.array() = (out.image.array() * factor).min(1.0f).max(0.0f);
  return out;
}

Sample augment(const Sample& sample, Rng& rng, const AugmentConfig& cfg) {
  const bool flip = rng.next_double() < cfg.flip_probability;
  const float factor = rng.uniform(cfg.brightness_min, cfg.brightness_max);
  return scale_brightness(flip ? flip_horizontal(sample) : sample, factor);
}

void validate_bbox(const BBox& b, Index height, Index width, const std::string& id) {
  const bool inside = b.x_min >= 0 && b.y_min >= 0 && b.x_max <= static_cast<double>(width) &&
                      b.y_max <= static_cast<double>(height);
  if (!inside) {
    std::ostringstream msg;
    msg << "sample '" << id << "': bbox (" << b.x_min << "," << b.y_min << "," << b.x_max << "," << b.y_max
        << ") exceeds image " << width << "x" << height;
    throw DataError(msg.str());
  }
  if (!(b.x_max > b.x_min && b.y_max > b.y_min)) throw DataError("sample '" + id + "': bbox has non-positive area");
}

std::vector<ManifestEntry> read_annotations(const fs::path& root) {
  const fs::path csv = root / "annotations.csv";
  std::ifstream in(csv);
  if (!in) throw DataError("missing annotation file " + csv.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError(csv.string() + ": empty file, header row required");
  std::vector<ManifestEntry> entries;
  std::set<std::string> seen;
  for (long lineno = 2; std::getline(in, line); ++lineno) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = csv.string() + ":" + std::to_string(lineno);
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
    if (fields.size() != 5 || fields[0].empty()) throw DataError(where + ": expected 5 fields id,x_min,y_min,x_max,y_max");
    if (!seen.insert(fields[0]).second) throw DataError(where + ": duplicate id '" + fields[0] + "'");
    ManifestEntry e{fields[0], root / "images" / (fields[0] + ".pgm"),
                    {parse_coord(fields[1], where), parse_coord(fields[2], where), parse_coord(fields[3], where),
                     parse_coord(fields[4], where), false}};
    entries.push_back(std::move(e));
  }
  return entries;
}

void write_annotations(const fs::path& csv, const std::vector<ManifestEntry>& entries) {
  std::ofstream out(csv);
  if (!out) throw DataError("cannot write " + csv.string());
  out << "id,x_min,y_min,x_max,y_max\n";
  for (const auto& e : entries) {
    out << e.id << "," << e.bbox.x_min << "," << e.bbox.y_min << "," << e.bbox.x_max << "," << e.bbox.y_max << "\n";
  }
}

std::pair<DatasetManifest, DatasetManifest> load_dataset(const fs::path& root, std::uint64_t split_seed,
                                                         long train_count) {
  auto entries = read_annotations(root);
  if (entries.empty()) throw DataError(root.string() + ": annotations.csv lists no samples");
  for (const auto& e : entries) {
    if (!fs::exists(e.image)) throw DataError("sample '" + e.id + "': missing image " + e.image.string());
    const auto px = read_pgm_bytes(e.image);
    validate_bbox(e.bbox, px.dim(0), px.dim(1), e.id);
  }
  const auto total = static_cast<long>(entries.size());
  if (train_count < 0) train_count = (total * 4) / 5;
  if (train_count > total) {
    throw DataError("train_count " + std::to_string(train_count) + " exceeds dataset size " + std::to_string(total));
  }
  Rng rng(split_seed);
  for (std::size_t i = entries.size(); i > 1; --i) std::swap(entries[i - 1], entries[rng.below(i)]);

  DatasetManifest train{root, {}, Split::train, split_seed};
  DatasetManifest test{root, {}, Split::test, split_seed};
  train.entries.assign(entries.begin(), entries.begin() + train_count);
  test.entries.assign(entries.begin() + train_count, entries.end());
  return {std::move(train), std::move(test)};
}

Sample load_sample(const ManifestEntry& entry) { return {read_pgm(entry.image), entry.bbox, entry.id}; }

std::vector<Sample> load_samples(const DatasetManifest& manifest) {
  std::vector<Sample> out;
  out.reserve(manifest.entries.size());
  for (const auto& e : manifest.entries) out.push_back(load_sample(e));
  return out;
}

SampleSplit load_split(const std::string& source, std::uint64_t split_seed, long train_count) {
  if (is_synth_source(source)) {
    try {
      return generate_split(parse_synth_source(source));
    } catch (const std::invalid_argument& e) {
      throw DataError(e.what());
    }
  }
  if (source.empty()) throw DataError("no dataset given");
  const auto [train, test] = load_dataset(source, split_seed, train_count);
  return {load_samples(train), load_samples(test)};
}

namespace {

std::set<std::string> pgm_ids(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError("missing directory " + dir.string());
  std::set<std::string> ids;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".pgm") ids.insert(e.path().stem().string());
  }
  return ids;
}

}  // namespace

PrepareReport prepare_dataset(const fs::path& raw, const fs::path& out, bool include_boundary) {
  const auto images = pgm_ids(raw / "images");
  const auto trimaps = pgm_ids(raw / "trimaps");
  PrepareReport report;
  for (const auto& id : trimaps) {
    if (!images.count(id)) report.missing_image.push_back(id);
  }
  fs::create_directories(out / "images");
  for (const auto& id : images) {
    if (!trimaps.count(id)) {
      report.missing_trimap.push_back(id);
      continue;
    }
    const fs::path image = raw / "images" / (id + ".pgm"), trimap = raw / "trimaps" / (id + ".pgm");
    try {
      const auto px = read_pgm_bytes(image);
      const auto labels = read_pgm_bytes(trimap);
      if (labels.shape() != px.shape()) throw DataError(trimap.string() + ": trimap size differs from its image");
      const BBox box = trimap_to_bbox(labels, include_boundary, trimap.string());
      const fs::path dest = out / "images" / (id + ".pgm");
      fs::copy_file(image, dest, fs::copy_options::overwrite_existing);
      report.entries.push_back({id, dest, box});
    } catch (const DataError& e) {
      report.skipped.emplace_back(id, e.what());
    }
  }
  if (report.entries.empty()) throw DataError("no usable samples in " + raw.string());
  write_annotations(out / "annotations.csv", report.entries);
  return report;
}

void materialize(const fs::path& root, const std::vector<Sample>& samples) {
  fs::create_directories(root / "images");
  std::vector<ManifestEntry> entries;
  entries.reserve(samples.size());
  for (const auto& s : samples) {
    const fs::path image = root / "images" / (s.id + ".pgm");
    write_pgm(image, s.image);
    entries.push_back({s.id, image, s.bbox});
  }
  write_annotations(root / "annotations.csv", entries);
}

}  // namespace spikeloc
