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

#include "oracles.hpp"
#include "spikeloc/data.hpp"
#include "tempdir.hpp"

#include <doctest.h>

#include <fstream>
#include <set>

using namespace spikeloc;
using spikeloc::testing::TempDir;

namespace {

/// Brute-force tight box: scans for extreme rows and columns independently.
BBox scan_box(const BasicTensor<std::uint8_t>& m, bool boundary) {
  auto fg = [&](Index y, Index x) { return m(y, x) == 1 || (boundary && m(y, x) == 3); };
  Index top = -1, bottom = -1, left = -1, right = -1;
  for (Index y = 0; y < m.dim(0) && top < 0; ++y)
    for (Index x = 0; x < m.dim(1); ++x)
      if (fg(y, x)) top = y;
  for (Index y = m.dim(0) - 1; y >= 0 && bottom < 0; --y)
    for (Index x = 0; x < m.dim(1); ++x)
      if (fg(y, x)) bottom = y;
  for (Index x = 0; x < m.dim(1) && left < 0; ++x)
    for (Index y = 0; y < m.dim(0); ++y)
      if (fg(y, x)) left = x;
  for (Index x = m.dim(1) - 1; x >= 0 && right < 0; --x)
    for (Index y = 0; y < m.dim(0); ++y)
      if (fg(y, x)) right = x;
  return {double(left), double(top), double(right + 1), double(bottom + 1), false};
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

void make_dataset(const std::filesystem::path& root, int n) {
  Rng rng(42);
  materialize(root, generate_synthetic(n, 16, 16, rng));
}

}  // namespace

TEST_CASE("pgm round trip") {
  TempDir dir("pgm");
  BasicTensor<std::uint8_t> px({3, 5});
  for (Index i = 0; i < px.size(); ++i) px[i] = static_cast<std::uint8_t>(i * 17);
  write_pgm_bytes(dir / "a.pgm", px);
  CHECK(read_pgm_bytes(dir / "a.pgm") == px);
  const Tensor img = read_pgm(dir / "a.pgm");
  CHECK(img(0, 1) == doctest::Approx(17.0 / 255.0));

  write_text(dir / "comment.pgm", std::string("P5\n# note\n2 1\n255\n") + "\x01\x02");
  CHECK(read_pgm_bytes(dir / "comment.pgm") == BasicTensor<std::uint8_t>({1, 2}, {1, 2}));

  write_text(dir / "p2.pgm", "P2\n1 1\n255\n0\n");
  CHECK_THROWS_AS(read_pgm(dir / "p2.pgm"), DataError);
  write_text(dir / "short.pgm", "P5\n4 4\n255\nab");
  CHECK_THROWS_AS(read_pgm(dir / "short.pgm"), DataError);
  CHECK_THROWS_AS(read_pgm(dir / "missing.pgm"), DataError);
}

TEST_CASE("synthetic rectangle bbox by construction") {
  const SyntheticShape rect{ShapeKind::rectangle, 8, 4, 8, 16, 1.0f};
  Rng rng(0);
  const Sample s = render_synthetic(rect, 32, 32, 0.0f, rng);
  CHECK(s.bbox == BBox{4, 8, 20, 16, false});
  CHECK(s.image(8, 4) == 1.0f);
  CHECK(s.image(7, 4) == 0.0f);
  CHECK(s.image.array().sum() == doctest::Approx(128.0));
}

TEST_CASE("generate_synthetic properties") {
  Rng a(11), b(11);
  const auto sa = generate_synthetic(60, 32, 32, a);
  const auto sb = generate_synthetic(60, 32, 32, b);
  const double min_side = 0.15 * 32;
  for (std::size_t i = 0; i < sa.size(); ++i) {
    CHECK(sa[i].image == sb[i].image);
    CHECK(sa[i].bbox == sb[i].bbox);
    CHECK(sa[i].bbox.area() >= min_side * min_side);
    CHECK_NOTHROW(validate_bbox(sa[i].bbox, 32, 32, sa[i].id));
    CHECK((sa[i].image.array() >= 0.0f).all());
    CHECK((sa[i].image.array() <= 1.0f).all());
  }
  CHECK_THROWS_AS(generate_synthetic(0, 32, 32, a), std::invalid_argument);
  CHECK_THROWS_AS(generate_synthetic(4, 30, 32, a), std::invalid_argument);
}

TEST_CASE("synthetic ground truth equals the noiseless mask bbox") {
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    SyntheticShape s;
    s.kind = static_cast<ShapeKind>(rng.below(3));
    s.height = 5 + static_cast<Index>(rng.below(15));
    s.width = 5 + static_cast<Index>(rng.below(15));
    s.top = static_cast<Index>(rng.below(static_cast<std::uint64_t>(32 - s.height + 1)));
    s.left = static_cast<Index>(rng.below(static_cast<std::uint64_t>(32 - s.width + 1)));
    const Sample noisy = render_synthetic(s, 32, 32, 0.1f, rng);
    const BBox tight{double(s.left), double(s.top), double(s.left + s.width), double(s.top + s.height), false};
    CHECK(noisy.bbox == mask_to_bbox(shape_mask(s, 32, 32)));
    CHECK(noisy.bbox == tight);
  }
}

TEST_CASE("synth source parsing") {
  const SynthSource d = parse_synth_source("synth://n=200,size=32x32");
  CHECK(d.train == 200);
  CHECK(d.test == 50);
  CHECK(d.height == 32);
  const SynthSource s = parse_synth_source("synth://n=10,test=3,size=16x24,seed=9");
  CHECK(s.test == 3);
  CHECK(s.width == 24);
  CHECK(s.seed == 9);
  CHECK_FALSE(is_synth_source("data/pets"));
  CHECK_THROWS_AS(parse_synth_source("synth://n=abc"), DataError);
  CHECK_THROWS_AS(parse_synth_source("synth://colour=red"), DataError);
  CHECK_THROWS_AS(parse_synth_source("synth://size=32"), DataError);

  const SampleSplit split = generate_split(s);
  CHECK(split.train.size() == 10);
  CHECK(split.test.size() == 3);
  CHECK(split.test[0].id == "synth_10");
  CHECK(split.test[0].image.shape() == Shape{16, 24});
}

TEST_CASE("trimap_to_bbox") {
  SUBCASE("single pixel") {
    BasicTensor<std::uint8_t> m = BasicTensor<std::uint8_t>::Constant({3, 3}, 2);
    m(1, 1) = 1;
    CHECK(trimap_to_bbox(m) == BBox{1, 1, 2, 2, false});
  }
  SUBCASE("full foreground and corners") {
    CHECK(trimap_to_bbox(BasicTensor<std::uint8_t>::Constant({4, 6}, 1)) == BBox{0, 0, 6, 4, false});
    BasicTensor<std::uint8_t> m = BasicTensor<std::uint8_t>::Constant({4, 6}, 2);
    m(0, 0) = 1;
    m(3, 5) = 1;
    CHECK(trimap_to_bbox(m) == BBox{0, 0, 6, 4, false});
  }
  SUBCASE("boundary label only counts when asked") {
    BasicTensor<std::uint8_t> m = BasicTensor<std::uint8_t>::Constant({5, 5}, 2);
    m(2, 2) = 1;
    m(0, 4) = 3;
    CHECK(trimap_to_bbox(m) == BBox{2, 2, 3, 3, false});
    CHECK(trimap_to_bbox(m, true) == BBox{2, 0, 5, 3, false});
  }
  SUBCASE("no foreground names the source") {
    CHECK_THROWS_WITH_AS(trimap_to_bbox(BasicTensor<std::uint8_t>::Constant({3, 3}, 2), false, "cat_01.pgm"),
                         doctest::Contains("cat_01.pgm"), DataError);
  }
  SUBCASE("matches a brute-force scan") {
    Rng rng(8);
    for (int trial = 0; trial < 100; ++trial) {
      BasicTensor<std::uint8_t> m({1 + static_cast<Index>(rng.below(12)), 1 + static_cast<Index>(rng.below(12))});
      for (Index i = 0; i < m.size(); ++i) m[i] = static_cast<std::uint8_t>(1 + rng.below(3));
      m[static_cast<Index>(rng.below(static_cast<std::uint64_t>(m.size())))] = 1;
      const bool boundary = rng.bernoulli(0.5f);
      const BBox b = trimap_to_bbox(m, boundary);
      CHECK(b == scan_box(m, boundary));
    }
  }
}

TEST_CASE("to_grayscale") {
  Tensor grey({3, 1, 2});
  for (Index c = 0; c < 3; ++c) {
    grey(c, 0, 0) = 0.4f;
    grey(c, 0, 1) = c == 0 ? 1.0f : 0.0f;
  }
  const Tensor g = to_grayscale(grey);
  CHECK(g(0, 0) == doctest::Approx(0.4));
  CHECK(g(0, 1) == doctest::Approx(0.299));
  CHECK_THROWS_AS(to_grayscale(Tensor({2, 2, 2})), std::invalid_argument);

  Rng rng(1);
  const Tensor r = to_grayscale(oracle::random_tensor(rng, {3, 8, 8}, 0.0f, 1.0f));
  CHECK((r.array() >= 0.0f).all());
  CHECK((r.array() <= 1.0f).all());
}

TEST_CASE("resize_bilinear") {
  Rng rng(2);
  const Tensor img = oracle::random_tensor(rng, {6, 9}, 0.0f, 1.0f);
  const BBox box{1, 2, 5, 6, false};
  SUBCASE("identity size") {
    const auto [out, b] = resize_bilinear(img, box, 6, 9);
    CHECK(oracle::max_rel_error(out, img) < 1e-6);
    CHECK(b == box);
  }
  SUBCASE("constant image") {
    const auto [out, b] = resize_bilinear(Tensor::Constant({5, 7}, 0.3f), box, 11, 4);
    CHECK(((out.array() - 0.3f).abs() < 1e-6f).all());
  }
  SUBCASE("2x upscale of a ramp") {
    const auto [out, b] = resize_bilinear(Tensor({2, 2}, {0, 1, 0, 1}), BBox{0, 0, 2, 2, false}, 4, 4);
    CHECK(b == BBox{0, 0, 4, 4, false});
    for (Index y = 0; y < 4; ++y) {
      CHECK(out(y, 0) == 0.0f);
      CHECK(out(y, 3) == 1.0f);
      for (Index x = 1; x < 4; ++x) CHECK(out(y, x) > out(y, x - 1));
      CHECK(out(y, 1) == doctest::Approx(1.0 / 3.0));
    }
  }
  SUBCASE("corners are preserved") {
    const auto [out, b] = resize_bilinear(img, box, 13, 5);
    CHECK(out(0, 0) == img(0, 0));
    CHECK(out(12, 4) == doctest::Approx(img(5, 8)));
    CHECK(b.x_max == doctest::Approx(5.0 * 5 / 9));
    CHECK(b.y_max == doctest::Approx(6.0 * 13 / 6));
  }
  CHECK_THROWS_AS(resize_bilinear(img, box, 1, 4), std::invalid_argument);
}

TEST_CASE("augmentation") {
  Rng rng(5);
  const auto samples = generate_synthetic(20, 16, 16, rng);
  SUBCASE("flip formula") {
    Sample s{Tensor({100, 100}), BBox{10, 20, 40, 50, false}, "x"};
    CHECK(flip_horizontal(s).bbox == BBox{60, 20, 90, 50, false});
  }
  SUBCASE("flip is an involution") {
    for (const auto& s : samples) {
      const Sample twice = flip_horizontal(flip_horizontal(s));
      CHECK(twice.image == s.image);
      CHECK(twice.bbox == s.bbox);
    }
  }
  SUBCASE("flip mirrors pixels") {
    const Sample f = flip_horizontal(samples[0]);
    CHECK(f.image(3, 0) == samples[0].image(3, 15));
  }
  SUBCASE("unit brightness is the identity; others clamp") {
    CHECK(scale_brightness(samples[1], 1.0f).image == samples[1].image);
    const Sample bright = scale_brightness(samples[1], 1.3f);
    CHECK((bright.image.array() <= 1.0f).all());
    CHECK(bright.bbox == samples[1].bbox);
  }
  SUBCASE("random augmentation keeps boxes valid") {
    for (int round = 0; round < 10; ++round)
      for (const auto& s : samples) {
        const Sample a = augment(s, rng);
        CHECK_NOTHROW(validate_bbox(a.bbox, 16, 16, a.id));
        CHECK(a.bbox.area() == s.bbox.area());
      }
  }
}

TEST_CASE("directory datasets") {
  TempDir dir("dataset");
  make_dataset(dir.path(), 10);

  SUBCASE("split sizes, disjointness and determinism") {
    const auto [train, test] = load_dataset(dir.path(), 3, 6);
    CHECK(train.entries.size() == 6);
    CHECK(test.entries.size() == 4);
    std::set<std::string> ids;
    for (const auto& e : train.entries) ids.insert(e.id);
    for (const auto& e : test.entries) CHECK(ids.insert(e.id).second);
    CHECK(ids.size() == 10);
    const auto [train2, test2] = load_dataset(dir.path(), 3, 6);
    for (std::size_t i = 0; i < 6; ++i) CHECK(train.entries[i].id == train2.entries[i].id);
    const auto [dflt, rest] = load_dataset(dir.path(), 3, -1);
    CHECK(dflt.entries.size() == 8);
  }
  SUBCASE("materialized samples reload exactly up to 8-bit quantization") {
    Rng rng(42);
    const auto original = generate_synthetic(10, 16, 16, rng);
    const auto loaded = load_samples(load_dataset(dir.path(), 0, 10).first);
    for (const auto& s : loaded) {
      const auto it = std::find_if(original.begin(), original.end(), [&](const Sample& o) { return o.id == s.id; });
      REQUIRE(it != original.end());
      CHECK(s.bbox == it->bbox);
      CHECK(((s.image.array() - it->image.array()).abs() <= 0.5f / 255.0f + 1e-6f).all());
    }
  }
  SUBCASE("out-of-bounds box names the sample") {
    write_text(dir / "annotations.csv", "id,x_min,y_min,x_max,y_max\nsynth_0,0,0,17,4\n");
    CHECK_THROWS_WITH_AS(load_dataset(dir.path(), 0, 1), doctest::Contains("synth_0"), DataError);
  }
  SUBCASE("malformed rows report the line number") {
    write_text(dir / "annotations.csv", "id,x_min,y_min,x_max,y_max\nsynth_0,0,0,4,4\nsynth_1,0,zero,4,4\n");
    CHECK_THROWS_WITH_AS(load_dataset(dir.path(), 0, 1), doctest::Contains(":3"), DataError);
    write_text(dir / "annotations.csv", "id,x_min,y_min,x_max,y_max\nsynth_0,0,0,4\n");
    CHECK_THROWS_WITH_AS(load_dataset(dir.path(), 0, 1), doctest::Contains(":2"), DataError);
  }
  SUBCASE("missing files") {
    write_text(dir / "annotations.csv", "id,x_min,y_min,x_max,y_max\nghost,0,0,4,4");
    CHECK_THROWS_WITH_AS(load_dataset(dir.path(), 0, 1), doctest::Contains("ghost"), DataError);
    CHECK_THROWS_AS(load_dataset(dir / "nowhere", 0, 1), DataError);
  }
  SUBCASE("train_count larger than the dataset") {
    CHECK_THROWS_AS(load_dataset(dir.path(), 0, 11), DataError);
  }
}

TEST_CASE("load_split dispatches on the source") {
  const SampleSplit s = load_split("synth://n=4,test=2,size=16x16", 0, -1);
  CHECK(s.train.size() == 4);
  CHECK(s.test.size() == 2);
  TempDir dir("split");
  make_dataset(dir.path(), 5);
  const SampleSplit d = load_split(dir.path().string(), 0, 3);
  CHECK(d.train.size() == 3);
  CHECK(d.test.size() == 2);
  CHECK_THROWS_AS(load_split("", 0, -1), DataError);
}
