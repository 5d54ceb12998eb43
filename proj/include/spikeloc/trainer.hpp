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
#include "spikeloc/data.hpp"
#include "spikeloc/eval.hpp"
#include "spikeloc/learning.hpp"

#include <functional>
#include <span>
#include <vector>

namespace spikeloc {

/// Called after every epoch with the epoch summary and the current network.
using EpochCallback = std::function<void(const EpochSummary&, const Network&)>;

struct TrainingRun {
  Network net;
  std::vector<EpochSummary> history;
};

/// Builds the network from `cfg` and trains it for cfg.train.epochs epochs.
/// Everything random derives from cfg.seed.
TrainingRun run_training(const RunConfig& cfg, std::span<const Sample> train, const EpochCallback& on_epoch = {});

/// Evaluation settings matching a run configuration.
EvalConfig eval_config(const RunConfig& cfg);

}  // namespace spikeloc
