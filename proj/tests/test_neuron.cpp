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
#include "spikeloc/neuron.hpp"

#include <doctest.h>

using namespace spikeloc;

namespace {

LifConfig cfg10() { return LifConfig{10.0, 1.0, 1.0, 0.5}; }

std::vector<int> run_constant(float current, int steps, const LifConfig& cfg, std::vector<float>* v = nullptr) {
  auto st = LifLayerState::zeros({1, 1, 1}, {1, 1, 1});
  const Tensor i = Tensor::Constant({1, 1, 1}, current);
  std::vector<int> spikes;
  for (int t = 0; t < steps; ++t) {
    spikes.push_back(static_cast<int>(lif_step(st, i, cfg)[0]));
    if (v) v->push_back(st.v_pre_reset[0]);
  }
  return spikes;
}

}  // namespace

TEST_CASE("LifConfig validation") {
  CHECK_NOTHROW(cfg10().validate());
  CHECK_THROWS(LifConfig{1.0, 1.0, 1.0, 0.5}.validate());
  CHECK_THROWS(LifConfig{10.0, 0.0, 1.0, 0.5}.validate());
  CHECK_THROWS(LifConfig{10.0, 1.0, 1.0, 0.0}.validate());
  CHECK(cfg10().decay() == doctest::Approx(0.9));
}

TEST_CASE("lif_step: zero input stays at rest") {
  const auto spikes = run_constant(0.0f, 100, cfg10());
  CHECK(std::count(spikes.begin(), spikes.end(), 1) == 0);
}

TEST_CASE("lif_step: constant drive 2.0 fires first at step 7") {
  std::vector<float> v;
  const auto spikes = run_constant(2.0f, 7, cfg10(), &v);
  for (int t = 0; t < 6; ++t) {
    CHECK(spikes[static_cast<std::size_t>(t)] == 0);
    CHECK(v[static_cast<std::size_t>(t)] == doctest::Approx(2.0 * (1.0 - std::pow(0.9, t + 1))).epsilon(1e-6));
  }
  CHECK(spikes[6] == 1);
  CHECK(v[6] == doctest::Approx(1.0434).epsilon(1e-4));

  auto st = LifLayerState::zeros({1, 1, 1}, {1, 1, 1});
  const Tensor i = Tensor::Constant({1, 1, 1}, 2.0f);
  for (int t = 0; t < 7; ++t) lif_step(st, i, cfg10());
  CHECK(st.v[0] == 0.0f);
}

TEST_CASE("lif_step: subthreshold drive converges without firing") {
  std::vector<float> v;
  const auto spikes = run_constant(0.2f, 500, cfg10(), &v);
  CHECK(std::count(spikes.begin(), spikes.end(), 1) == 0);
  CHECK(v.back() == doctest::Approx(0.2).epsilon(1e-4));
}

TEST_CASE("lif_step: shape mismatch") {
  auto st = LifLayerState::zeros({1, 2, 2}, {1, 2, 2});
  CHECK_THROWS_AS(lif_step(st, Tensor({1, 3, 2}), cfg10()), std::invalid_argument);
}

TEST_CASE("lif_step matches the scalar recursion and keeps invariants") {
  Rng rng(17);
  const LifConfig cfg{7.0, 0.8, 1.0, 0.5};
  auto st = LifLayerState::zeros({2, 3, 4}, {1, 1, 1});
  const Index n = 24;
  std::vector<std::vector<float>> currents(static_cast<std::size_t>(n));
  for (int t = 0; t < 150; ++t) {
    const Tensor i = oracle::random_tensor(rng, {2, 3, 4}, -0.5f, 2.0f);
    for (Index k = 0; k < n; ++k) currents[static_cast<std::size_t>(k)].push_back(i[k]);
    const Tensor& s = lif_step(st, i, cfg);
    CHECK(((s.array() == 0.0f) || (s.array() == 1.0f)).all());
    CHECK((st.v.array() < static_cast<float>(cfg.theta)).all());
    CHECK((st.v.array() <= 2.0f).all());
  }
  for (Index k = 0; k < n; ++k) {
    const auto ref = oracle::lif_scalar(currents[static_cast<std::size_t>(k)], cfg.tau_leak, cfg.theta, cfg.dt);
    CHECK(ref.v.back() == st.v[k]);
  }
}

TEST_CASE("spike count is monotone in constant drive") {
  const LifConfig cfg = cfg10();
  int previous = 0;
  for (float i = 1.05f; i < 6.0f; i += 0.25f) {
    const auto s = run_constant(i, 200, cfg);
    const int count = static_cast<int>(std::count(s.begin(), s.end(), 1));
    CHECK(count >= previous);
    previous = count;
  }
  CHECK(previous > 0);
}

TEST_CASE("accumulate_current") {
  Rng rng(8);
  const Tensor w = oracle::random_tensor(rng, {2, 1, 3, 3});
  const Tensor b({2}, {0.25f, -0.5f});
  SUBCASE("no spikes gives the bias") {
    const Tensor c = accumulate_current(w, b, Tensor({1, 5, 5}));
    CHECK((c.matrix(2).col(0).array() == b.array()).all());
    CHECK((c.matrix(2).rowwise().maxCoeff().array() == b.array()).all());
  }
  SUBCASE("impulse response stamps the kernel") {
    Tensor s({1, 5, 5});
    s(0, 2, 2) = 1.0f;
    const Tensor c = accumulate_current(w, Tensor({2}), s);
    for (Index o = 0; o < 2; ++o)
      for (Index y = 0; y < 5; ++y)
        for (Index x = 0; x < 5; ++x) {
          const Index ky = 2 - y + 1, kx = 2 - x + 1;
          const bool inside = ky >= 0 && ky < 3 && kx >= 0 && kx < 3;
          CHECK(c(o, y, x) == (inside ? w(o, 0, ky, kx) : 0.0f));
        }
  }
  SUBCASE("a count of two doubles the current") {
    Tensor s1({1, 5, 5}), s2({1, 5, 5});
    s1(0, 1, 3) = 1.0f;
    s2(0, 1, 3) = 2.0f;
    Tensor twice = accumulate_current(w, Tensor({2}), s1);
    twice.array() *= 2.0f;
    CHECK(accumulate_current(w, Tensor({2}), s2) == twice);
  }
}

TEST_CASE("surrogate_derivative") {
  const LifConfig cfg = cfg10();
  const Tensor v({3}, {1.0f, 0.5f, 1.5f});
  const Tensor d = surrogate_derivative(v, cfg);
  CHECK(d[0] == 2.0f);
  CHECK(d[1] == 0.0f);
  CHECK(d[2] == 0.0f);

  // Riemann sum of the triangle over a range covering its support.
  const Index n = 40001;
  TensorD grid({n});
  for (Index i = 0; i < n; ++i) grid[i] = -1.0 + 4.0 * static_cast<double>(i) / (n - 1);
  const double h = 4.0 / (n - 1);
  const double area = surrogate_derivative(grid, cfg).array().sum() * h;
  CHECK(std::abs(area - 1.0) < 1e-3);
}

TEST_CASE("trace_step") {
  const LifConfig cfg = cfg10();
  SUBCASE("single presynaptic spike decays geometrically") {
    auto st = LifLayerState::zeros({1, 1, 1}, {1, 1, 1});
    const Tensor one = Tensor::Constant({1, 1, 1}, 1.0f), zero({1, 1, 1});
    CHECK(trace_step(st, one, cfg)[0] == doctest::Approx(0.1));
    CHECK(trace_step(st, zero, cfg)[0] == doctest::Approx(0.09));
    CHECK(trace_step(st, zero, cfg)[0] == doctest::Approx(0.081));
  }
  SUBCASE("silence keeps the trace at zero") {
    auto st = LifLayerState::zeros({1, 1, 1}, {2, 2, 2});
    for (int t = 0; t < 20; ++t) trace_step(st, Tensor({2, 2, 2}), cfg);
    CHECK((st.trace.array() == 0.0f).all());
  }
  SUBCASE("matches the unrolled sum and stays in [0,1] for binary input") {
    Rng rng(21);
    auto st = BasicLifLayerState<double>::zeros({1, 1, 1}, {1, 1, 8});
    std::vector<std::vector<double>> trains(8);
    for (int t = 0; t < 120; ++t) {
      TensorD s({1, 1, 8});
      for (Index k = 0; k < 8; ++k) {
        s[k] = rng.bernoulli(0.3f) ? 1.0 : 0.0;
        trains[static_cast<std::size_t>(k)].push_back(s[k]);
      }
      trace_step(st, s, cfg);
      CHECK((st.trace.array() >= 0.0).all());
      CHECK((st.trace.array() <= 1.0).all());
    }
    for (Index k = 0; k < 8; ++k) {
      CHECK(std::abs(oracle::trace_unrolled(trains[static_cast<std::size_t>(k)], 10.0, 1.0).back() - st.trace[k]) < 1e-6);
    }
  }
  SUBCASE("shape mismatch") {
    auto st = LifLayerState::zeros({1, 1, 1}, {1, 2, 2});
    CHECK_THROWS_AS(trace_step(st, Tensor({1, 1, 1}), cfg), std::invalid_argument);
  }
}

TEST_CASE("trace equals dV/dw by finite differences in a spike-free regime") {
  const LifConfig cfg{10.0, 100.0, 1.0, 0.5};  // threshold out of reach
  Rng rng(31);
  const Index T = 40;
  std::vector<TensorD> inputs;
  for (Index t = 0; t < T; ++t) {
    TensorD s({2, 4, 4});
    for (Index i = 0; i < s.size(); ++i) s[i] = rng.bernoulli(0.4f) ? 1.0 : 0.0;
    inputs.push_back(s);
  }
  TensorD w({1, 2, 3, 3});
  for (Index i = 0; i < w.size(); ++i) w[i] = rng.uniform(-0.5f, 0.5f);
  const TensorD b({1});

  auto run = [&](const TensorD& weight, BasicLifLayerState<double>& st) {
    for (const auto& s : inputs) {
      trace_step(st, s, cfg);
      lif_step(st, accumulate_current(weight, b, s), cfg);
    }
  };
  auto st = BasicLifLayerState<double>::zeros({1, 4, 4}, {2, 4, 4});
  run(w, st);
  REQUIRE((st.last_spikes.array() == 0.0).all());

  const double eps = 1e-4;
  for (Index i = 0; i < 2; ++i)
    for (Index ky = 0; ky < 3; ++ky)
      for (Index kx = 0; kx < 3; ++kx) {
        TensorD wp = w, wm = w;
        wp(0, i, ky, kx) += eps;
        wm(0, i, ky, kx) -= eps;
        auto sp = BasicLifLayerState<double>::zeros({1, 4, 4}, {2, 4, 4});
        auto sm = sp;
        run(wp, sp);
        run(wm, sm);
        for (Index y = 0; y < 4; ++y)
          for (Index x = 0; x < 4; ++x) {
            const double fd = (sp.v(0, y, x) - sm.v(0, y, x)) / (2 * eps);
            const Index iy = y + ky - 1, ix = x + kx - 1;
            const double analytic = (iy < 0 || iy >= 4 || ix < 0 || ix >= 4) ? 0.0 : st.trace(i, iy, ix);
            CHECK(std::abs(fd - analytic) <= 1e-4 * std::max(std::abs(analytic), 1e-3));
          }
      }
}
