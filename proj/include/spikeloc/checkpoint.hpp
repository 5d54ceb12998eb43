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

#include "spikeloc/config.hpp"
#include "spikeloc/network.hpp"

#include <cstdint>
#include <filesystem>
#include <stdexcept>

namespace spikeloc {

/// Raised for unreadable, corrupted or version-mismatched checkpoints.
class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Single-file checkpoint layout (all integers little-endian):
///
///   "SPKL"  magic, 4 bytes
///   u32     format version
///   u32     header length n, then n bytes of UTF-8 JSON
///           (topology, run config, epoch, seeds)
///   u32     tensor count
///   per tensor: u32 rank, rank x u32 extents, f32 data (little-endian)
///
/// Tensors are stored layer by layer (weight, bias), then every readout.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  Network net;
  RunConfig config;
  int epoch = 0;
};

void save_checkpoint(const std::filesystem::path& path, const Network& net, const RunConfig& cfg, int epoch);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace spikeloc
