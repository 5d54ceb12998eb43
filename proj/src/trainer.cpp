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

#include "spikeloc/trainer.hpp"

namespace spikeloc {

TrainingRun run_training(const RunConfig& cfg, std::span<const Sample> train, const EpochCallback& on_epoch) {
  cfg.validate();
  TrainingRun run{build_network(cfg), {}};
  auto opt = init_optim_states(run.net);
  Rng rng(derive_seed(cfg.seed, 1));
  for (int e = 1; e <= cfg.train.epochs; ++e) {
    run.history.push_back(train_epoch(run.net, train, cfg.train, rng, opt, e));
    if (on_epoch) on_epoch(run.history.back(), run.net);
  }
  return run;
}

EvalConfig eval_config(const RunConfig& cfg) { return {cfg.train.T, cfg.train.p_max, cfg.seed, 0.05}; }

}  // namespace spikeloc
