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

#include "spikeloc/learning.hpp"
#include "spikeloc/network.hpp"
#include "spikeloc/neuron.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

namespace spikeloc {

/// Raised for unreadable or invalid configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ArchConfig {
  Index height = 32;
  Index width = 32;
  std::array<Index, 3> encoder_channels{16, 32, 64};
  Index kernel = 3;
};

struct DataConfig {
  /// Directory root or `synth://` pseudo-URL.
  std::string source = "synth://n=200,test=50,size=32x32";
  std::uint64_t split_seed = 0;
  long train_count = -1;
  bool include_boundary = false;
};

/// Everything a run depends on besides the dataset itself.
struct RunConfig {
  std::string profile = "desk";
  std::uint64_t seed = 0;
  LifConfig lif;
  TrainConfig train;
  ArchConfig arch;
  DataConfig data;
  int checkpoint_every = 5;

  void validate() const;
};

/// Built-in defaults: "desk" (32x32, T=32, lr 1e-3) or "oxford"
/// (176x240, T=100, lr 1e-9).
RunConfig profile_defaults(const std::string& profile);

nlohmann::json to_json(const RunConfig& cfg);
/// Overlays the keys present in `j` onto `base`; unknown keys are errors.
RunConfig from_json(const nlohmann::json& j, RunConfig base);

RunConfig load_config(const std::filesystem::path& path, const std::string& fallback_profile = "desk");
void save_config(const std::filesystem::path& path, const RunConfig& cfg);

Network build_network(const RunConfig& cfg);

}  // namespace spikeloc
