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

#include "spikeloc/config.hpp"

#include <fstream>
#include <set>

namespace spikeloc {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw ConfigError("unknown config key '" + where + "." + key + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

void RunConfig::validate() const {
  try {
    lif.validate();
    train.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (profile != "desk" && profile != "oxford") throw ConfigError("profile must be 'desk' or 'oxford'");
  if (arch.height % 8 != 0 || arch.width % 8 != 0 || arch.height < 8 || arch.width < 8) {
    throw ConfigError("arch.height and arch.width must be positive multiples of 8");
  }
  if (arch.kernel < 1 || arch.kernel % 2 == 0) throw ConfigError("arch.kernel must be odd");
  for (Index c : arch.encoder_channels) {
    if (c < 1) throw ConfigError("arch.encoder_channels must be positive");
  }
  if (checkpoint_every < 1) throw ConfigError("checkpoint_every must be >= 1");
}

RunConfig profile_defaults(const std::string& profile) {
  RunConfig cfg;
  cfg.profile = profile;
  if (profile == "desk") return cfg;
  if (profile == "oxford") {
    cfg.arch.height = 176;
    cfg.arch.width = 240;
    cfg.train.T = 100;
    cfg.train.lr = 1e-9;
    cfg.train.epochs = 100;
    cfg.data.source = "";
    cfg.data.train_count = 6000;
    cfg.checkpoint_every = 10;
    return cfg;
  }
  throw ConfigError("unknown profile '" + profile + "' (expected desk or oxford)");
}

json to_json(const RunConfig& c) {
  return {
      {"profile", c.profile},
      {"seed", c.seed},
      {"checkpoint_every", c.checkpoint_every},
      {"lif",
       {{"tau_leak", c.lif.tau_leak},
        {"theta", c.lif.theta},
        {"dt", c.lif.dt},
        {"surrogate_width", c.lif.surrogate_width}}},
      {"train",
       {{"lr", c.train.lr},
        {"beta1", c.train.beta1},
        {"beta2", c.train.beta2},
        {"eps", c.train.eps},
        {"batch_size", c.train.batch_size},
        {"epochs", c.train.epochs},
        {"burn_in", c.train.burn_in},
        {"loss_delta", c.train.loss_delta},
        {"T", c.train.T},
        {"p_max", c.train.p_max},
        {"augment", c.train.augment},
        {"trainable_readout", c.train.trainable_readout}}},
      {"arch",
       {{"height", c.arch.height},
        {"width", c.arch.width},
        {"encoder_channels", c.arch.encoder_channels},
        {"kernel", c.arch.kernel}}},
      {"data",
       {{"source", c.data.source},
        {"split_seed", c.data.split_seed},
        {"train_count", c.data.train_count},
        {"include_boundary", c.data.include_boundary}}},
  };
}

RunConfig from_json(const json& j, RunConfig c) {
  try {
    reject_unknown(j, {"profile", "seed", "checkpoint_every", "lif", "train", "arch", "data"}, "config");
    read(j, "profile", c.profile);
    read(j, "seed", c.seed);
    read(j, "checkpoint_every", c.checkpoint_every);
    if (j.contains("lif")) {
      const auto& l = j.at("lif");
      reject_unknown(l, {"tau_leak", "theta", "dt", "surrogate_width"}, "lif");
      read(l, "tau_leak", c.lif.tau_leak);
      read(l, "theta", c.lif.theta);
      read(l, "dt", c.lif.dt);
      read(l, "surrogate_width", c.lif.surrogate_width);
    }
    if (j.contains("train")) {
      const auto& t = j.at("train");
      reject_unknown(t,
                     {"lr", "beta1", "beta2", "eps", "batch_size", "epochs", "burn_in", "loss_delta", "T", "p_max",
                      "augment", "trainable_readout"},
                     "train");
      read(t, "lr", c.train.lr);
      read(t, "beta1", c.train.beta1);
      read(t, "beta2", c.train.beta2);
      read(t, "eps", c.train.eps);
      read(t, "batch_size", c.train.batch_size);
      read(t, "epochs", c.train.epochs);
      read(t, "burn_in", c.train.burn_in);
      read(t, "loss_delta", c.train.loss_delta);
      read(t, "T", c.train.T);
      read(t, "p_max", c.train.p_max);
      read(t, "augment", c.train.augment);
      read(t, "trainable_readout", c.train.trainable_readout);
    }
    if (j.contains("arch")) {
      const auto& a = j.at("arch");
      reject_unknown(a, {"height", "width", "encoder_channels", "kernel"}, "arch");
      read(a, "height", c.arch.height);
      read(a, "width", c.arch.width);
      read(a, "encoder_channels", c.arch.encoder_channels);
      read(a, "kernel", c.arch.kernel);
    }
    if (j.contains("data")) {
      const auto& d = j.at("data");
      reject_unknown(d, {"source", "split_seed", "train_count", "include_boundary"}, "data");
      read(d, "source", c.data.source);
      read(d, "split_seed", c.data.split_seed);
      read(d, "train_count", c.data.train_count);
      read(d, "include_boundary", c.data.include_boundary);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid config value: ") + e.what());
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path, const std::string& fallback_profile) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  const std::string profile = j.is_object() && j.contains("profile") && j["profile"].is_string()
                                  ? j["profile"].get<std::string>()
                                  : fallback_profile;
  return from_json(j, profile_defaults(profile));
}

void save_config(const std::filesystem::path& path, const RunConfig& cfg) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write config file " + path.string());
  out << to_json(cfg).dump(2) << "\n";
}

Network build_network(const RunConfig& cfg) {
  return build_network(cfg.arch.height, cfg.arch.width, default_channel_plan(cfg.arch.encoder_channels, cfg.arch.kernel),
                       cfg.lif, cfg.seed);
}

}  // namespace spikeloc
