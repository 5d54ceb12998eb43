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

#include "spikeloc/checkpoint.hpp"

#include <array>
#include <bit>
#include <fstream>
#include <string>
#include <vector>

namespace spikeloc {

using nlohmann::json;

namespace {

constexpr std::array<char, 4> kMagic{'S', 'P', 'K', 'L'};

void put_u32(std::ostream& out, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                         static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
  out.write(bytes, 4);
}

std::uint32_t get_u32(std::istream& in, const std::filesystem::path& path) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw CheckpointError(path.string() + ": truncated checkpoint");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_tensor(std::ostream& out, const Tensor& t) {
  put_u32(out, static_cast<std::uint32_t>(t.rank()));
  for (Index e : t.shape()) put_u32(out, static_cast<std::uint32_t>(e));
  for (Index i = 0; i < t.size(); ++i) put_u32(out, std::bit_cast<std::uint32_t>(t[i]));
}

/// Reads one tensor, rejecting it before allocation unless its shape is `expected`.
Tensor get_tensor(std::istream& in, const std::filesystem::path& path, const Shape& expected, const std::string& what) {
  const std::uint32_t rank = get_u32(in, path);
  Shape shape;
  if (rank >= 1 && rank <= 4) {
    for (std::uint32_t a = 0; a < rank; ++a) shape.push_back(get_u32(in, path));
  }
  if (shape != expected) {
    throw CheckpointError(path.string() + ": " + what + " shape does not match topology (expected " +
                          shape_to_string(expected) + ")");
  }
  Tensor t(shape);
  for (Index i = 0; i < t.size(); ++i) t[i] = std::bit_cast<float>(get_u32(in, path));
  return t;
}

json topology_json(const Network& net) {
  json layers = json::array();
  for (const auto& l : net.layers) {
    layers.push_back({{"in_channels", l.spec.in_channels},
                      {"out_channels", l.spec.out_channels},
                      {"kernel", l.spec.kernel},
                      {"resample", to_string(l.spec.resample)},
                      {"residual_from", l.spec.residual_from ? json(*l.spec.residual_from) : json(nullptr)}});
  }
  return {{"height", net.height}, {"width", net.width}, {"layers", layers}};
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Network& net, const RunConfig& cfg, int epoch) {
  const json header = {{"format", "spikeloc-checkpoint"},
                       {"epoch", epoch},
                       {"config", to_json(cfg)},
                       {"topology", topology_json(net)},
                       {"seeds", {{"network", net.seed}, {"run", cfg.seed}}}};
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot write checkpoint " + path.string());
  out.write(kMagic.data(), kMagic.size());
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  put_u32(out, static_cast<std::uint32_t>(2 * net.layers.size() + net.readouts.size()));
  for (const auto& l : net.layers) {
    put_tensor(out, l.weight);
    put_tensor(out, l.bias);
  }
  for (const auto& g : net.readouts) put_tensor(out, g);
  if (!out) throw CheckpointError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw CheckpointError(path.string() + ": bad magic bytes, not a spikeloc checkpoint");
  }
  const std::uint32_t version = get_u32(in, path);
  if (version != kCheckpointVersion) {
    throw CheckpointError(path.string() + ": checkpoint format version mismatch (expected " +
                          std::to_string(kCheckpointVersion) + ", found " + std::to_string(version) + ")");
  }
  const std::uint32_t len = get_u32(in, path);
  if (len > (1u << 24)) throw CheckpointError(path.string() + ": implausible header length " + std::to_string(len));
  std::string text(len, '\0');
  if (!in.read(text.data(), len)) throw CheckpointError(path.string() + ": truncated header");

  Checkpoint ck;
  try {
    const json header = json::parse(text);
    ck.epoch = header.at("epoch").get<int>();
    ck.config = from_json(header.at("config"), profile_defaults(header.at("config").at("profile").get<std::string>()));
    const json& topo = header.at("topology");
    ck.net.height = topo.at("height").get<Index>();
    ck.net.width = topo.at("width").get<Index>();
    ck.net.seed = header.at("seeds").at("network").get<std::uint64_t>();
    for (const auto& lj : topo.at("layers")) {
      LayerSpec spec{lj.at("in_channels").get<Index>(), lj.at("out_channels").get<Index>(), lj.at("kernel").get<Index>(),
                     resample_from_string(lj.at("resample").get<std::string>()), std::nullopt};
      if (!lj.at("residual_from").is_null()) spec.residual_from = lj.at("residual_from").get<int>();
      ck.net.layers.push_back({spec, {}, {}, ck.config.lif, {}, {}, {}});
    }
    resolve_shapes(ck.net);
  } catch (const CheckpointError&) {
    throw;
  } catch (const std::exception& e) {
    throw CheckpointError(path.string() + ": invalid checkpoint header: " + e.what());
  }

  const std::uint32_t count = get_u32(in, path);
  if (count != 3 * ck.net.layers.size()) {
    throw CheckpointError(path.string() + ": expected " + std::to_string(3 * ck.net.layers.size()) +
                          " tensors, found " + std::to_string(count));
  }
  for (auto& l : ck.net.layers) {
    l.weight = get_tensor(in, path, {l.spec.out_channels, l.spec.in_channels, l.spec.kernel, l.spec.kernel}, "weight");
    l.bias = get_tensor(in, path, {l.spec.out_channels}, "bias");
  }
  for (const auto& l : ck.net.layers) {
    ck.net.readouts.push_back(get_tensor(in, path, {4, shape_size(l.output_shape)}, "readout"));
  }
  if (in.peek() != std::char_traits<char>::eof()) throw CheckpointError(path.string() + ": trailing bytes");
  return ck;
}

}  // namespace spikeloc
