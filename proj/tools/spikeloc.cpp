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
#include "spikeloc/config.hpp"
#include "spikeloc/data.hpp"
#include "spikeloc/eval.hpp"
#include "spikeloc/trainer.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using namespace spikeloc;

namespace {

enum ExitCode { kOk = 0, kConfig = 1, kData = 2, kCheckpoint = 3 };

/// Exclusive ownership of an output directory for the life of a run.
class DirLock {
 public:
  explicit DirLock(const fs::path& dir) : path_(dir / ".lock") {
    std::FILE* f = std::fopen(path_.c_str(), "wx");
    if (!f) throw ConfigError("output directory " + dir.string() + " is locked by another run (" + path_.string() + ")");
    std::fclose(f);
  }
  ~DirLock() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;

 private:
  fs::path path_;
};

std::optional<std::uint64_t> env_seed() {
  const char* v = std::getenv("SPIKELOC_SEED");
  if (!v || !*v) return std::nullopt;
  try {
    std::size_t used = 0;
    const unsigned long long s = std::stoull(v, &used);
    if (used != std::string(v).size()) throw std::invalid_argument(v);
    return s;
  } catch (const std::exception&) {
    throw ConfigError(std::string("SPIKELOC_SEED is not an unsigned integer: '") + v + "'");
  }
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(6) << v;
  return s.str();
}

void print_eval(const EvalReport& r) {
  std::cout << "miou=" << fmt(r.miou) << " baseline=" << fmt(r.baseline_miou) << " n=" << r.per_sample.size() << "\n";
}

// --- train ---

struct TrainArgs {
  std::string config;
  std::string profile = "desk";
  std::string data;
  std::optional<int> epochs;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string materialize;
};

int cmd_train(const TrainArgs& a) {
  RunConfig cfg = a.config.empty() ? profile_defaults(a.profile) : load_config(a.config, a.profile);
  if (auto s = env_seed()) cfg.seed = *s;
  if (a.seed) cfg.seed = *a.seed;
  if (a.epochs) cfg.train.epochs = *a.epochs;
  if (!a.data.empty()) cfg.data.source = a.data;
  cfg.validate();

  fs::create_directories(a.out);
  DirLock lock(a.out);
  save_config(fs::path(a.out) / "config.json", cfg);

  const SampleSplit split = load_split(cfg.data.source, cfg.data.split_seed, cfg.data.train_count);
  if (!a.materialize.empty()) {
    std::vector<Sample> all = split.train;
    all.insert(all.end(), split.test.begin(), split.test.end());
    materialize(a.materialize, all);
    std::cerr << "wrote " << all.size() << " samples to " << a.materialize << "\n";
  }
  if (split.train.empty()) throw DataError("training split is empty");

  std::ofstream log(fs::path(a.out) / "log.csv");
  if (!log) throw DataError("cannot write " + (fs::path(a.out) / "log.csv").string());
  const std::size_t L = 2 * cfg.arch.encoder_channels.size();
  log << "epoch";
  for (std::size_t l = 1; l <= L; ++l) log << ",loss_l" << l;
  for (std::size_t l = 1; l <= L; ++l) log << ",spike_rate_l" << l;
  log << "\n" << std::setprecision(9);

  auto on_epoch = [&](const EpochSummary& s, const Network& net) {
    log << s.epoch;
    for (double v : s.mean_loss) log << "," << v;
    for (double v : s.spike_rate) log << "," << v;
    log << "\n" << std::flush;
    std::cout << "epoch=" << s.epoch << " loss=" << fmt(s.last_layer_loss()) << " spike_rate=[";
    for (std::size_t l = 0; l < s.spike_rate.size(); ++l) std::cout << (l ? "," : "") << fmt(s.spike_rate[l]);
    std::cout << "] lr=" << fmt(cfg.train.lr) << std::endl;
    if (s.epoch % cfg.checkpoint_every == 0) {
      save_checkpoint(fs::path(a.out) / ("ckpt_epoch_" + std::to_string(s.epoch) + ".spkl"), net, cfg, s.epoch);
    }
  };
  const TrainingRun run = run_training(cfg, split.train, on_epoch);
  save_checkpoint(fs::path(a.out) / "final.spkl", run.net, cfg, cfg.train.epochs);

  if (!split.test.empty()) {
    const EvalReport report = evaluate(run.net, split.test, eval_config(cfg));
    write_report_csv(fs::path(a.out) / "report.csv", report);
    print_eval(report);
  }
  return kOk;
}

// --- eval ---

struct EvalArgs {
  std::string checkpoint;
  std::string data;
  std::string out = ".";
  bool overlays = false;
};

int cmd_eval(const EvalArgs& a) {
  const Checkpoint ck = load_checkpoint(a.checkpoint);
  const std::string source = a.data.empty() ? ck.config.data.source : a.data;
  const SampleSplit split = load_split(source, ck.config.data.split_seed, ck.config.data.train_count);
  if (split.test.empty()) throw DataError("dataset '" + source + "' has no test samples");

  const EvalConfig ecfg = eval_config(ck.config);
  fs::create_directories(a.out);
  std::map<std::string, BBox> predictions;
  const EvalReport report = evaluate_with(
      split.test,
      [&](const Sample& s) {
        const BBox p = predict(ck.net, s, ecfg);
        predictions[s.id] = p;
        return p;
      },
      ecfg.baseline_step);
  write_report_csv(fs::path(a.out) / "report.csv", report);
  if (a.overlays) {
    fs::create_directories(fs::path(a.out) / "overlays");
    for (const auto& s : split.test) {
      write_pgm(fs::path(a.out) / "overlays" / (s.id + ".pgm"), render_overlay(s.image, predictions.at(s.id), s.bbox));
    }
  }
  print_eval(report);
  return kOk;
}

// --- prepare-dataset ---

struct PrepareArgs {
  std::string raw;
  std::string out;
  bool include_boundary = false;
};

int cmd_prepare(const PrepareArgs& a) {
  const PrepareReport r = prepare_dataset(a.raw, a.out, a.include_boundary);
  for (const auto& id : r.missing_trimap) std::cerr << "mismatch: image '" << id << "' has no trimap\n";
  for (const auto& id : r.missing_image) std::cerr << "mismatch: trimap '" << id << "' has no image\n";
  const std::size_t mismatched = r.missing_trimap.size() + r.missing_image.size();
  if (mismatched) std::cerr << mismatched << " mismatched id(s)\n";
  for (const auto& [id, why] : r.skipped) std::cerr << "warning: skipping '" << id << "': " << why << "\n";
  std::cout << "prepared=" << r.entries.size() << " skipped=" << r.skipped.size() << " mismatched=" << mismatched
            << "\n";
  return kOk;
}

// --- encode-preview ---

struct PreviewArgs {
  std::string image;
  Index T = 32;
  double p_max = 0.5;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_preview(const PreviewArgs& a) {
  const Tensor img = read_pgm(a.image);
  Rng rng(a.seed);
  EncodedInput enc;
  try {
    enc = rate_encode(img, a.T, a.p_max, rng);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const Index n = img.size();
  BasicTensor<std::uint8_t> counts(img.shape());
  for (Index i = 0; i < n; ++i) {
    long c = 0;
    for (Index t = 0; t < a.T; ++t) c += enc.spikes.data()[t * n + i];
    counts[i] = static_cast<std::uint8_t>(std::lround(255.0 * static_cast<double>(c) / static_cast<double>(a.T)));
  }
  write_pgm_bytes(a.out, counts);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spiking encoder-decoder network for single-object localization"};
  app.require_subcommand(1);
  app.footer("Exit codes: 0 ok, 1 configuration error, 2 dataset error, 3 checkpoint error.");

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "Train a network and write logs and checkpoints");
  train->add_option("--config", ta.config, "JSON run configuration");
  train->add_option("--profile", ta.profile, "Built-in defaults")->check(CLI::IsMember({"desk", "oxford"}));
  train->add_option("--data", ta.data, "Dataset directory or synth://n=..,test=..,size=HxW,seed=..");
  train->add_option("--epochs", ta.epochs, "Override the number of epochs")->check(CLI::NonNegativeNumber);
  train->add_option("--seed", ta.seed, "Global seed (overrides SPIKELOC_SEED)");
  train->add_option("--out", ta.out, "Output directory")->required();
  train->add_option("--materialize", ta.materialize, "Also write the resolved dataset to this directory");

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on the test split");
  eval->add_option("--checkpoint", ea.checkpoint, "Checkpoint file")->required();
  eval->add_option("--data", ea.data, "Dataset (defaults to the checkpoint's configured source)");
  eval->add_option("--out", ea.out, "Directory for report.csv and overlays");
  eval->add_flag("--overlays", ea.overlays, "Write one overlay PGM per test sample");

  PrepareArgs pa;
  auto* prep = app.add_subcommand("prepare-dataset", "Build annotations.csv from images/ and trimaps/");
  prep->add_option("--raw", pa.raw, "Directory with images/ and trimaps/")->required();
  prep->add_option("--out", pa.out, "Output dataset directory")->required();
  prep->add_flag("--include-boundary", pa.include_boundary, "Count trimap label 3 as foreground");

  PreviewArgs va;
  auto* preview = app.add_subcommand("encode-preview", "Write the summed spike-count map of an image");
  preview->add_option("--image", va.image, "Input PGM")->required();
  preview->add_option("--T", va.T, "Timesteps");
  preview->add_option("--p-max", va.p_max, "Peak spike probability");
  preview->add_option("--seed", va.seed, "Encoder seed");
  preview->add_option("--out", va.out, "Output PGM")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*train) return cmd_train(ta);
    if (*eval) return cmd_eval(ea);
    if (*prep) return cmd_prepare(pa);
    if (*preview) return cmd_preview(va);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const CheckpointError& e) {
    std::cerr << "checkpoint error: " << e.what() << "\n";
    return kCheckpoint;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  }
  return kOk;
}
