// Copyright 2026 The scenemix Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: fixture generation, bank building, placeability
// labelling/training/inference, augmentation, statistics and scoring.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "scenemix/analytics.hpp"
#include "scenemix/config.hpp"
#include "scenemix/dataset.hpp"
#include "scenemix/error.hpp"
#include "scenemix/execution.hpp"
#include "scenemix/fixture.hpp"
#include "scenemix/pipeline.hpp"
#include "scenemix/placeability.hpp"

namespace fs = std::filesystem;
using namespace scenemix;

namespace
{

struct CommonFlags
{
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::string out;
  std::vector<std::string> overrides;
  std::string dataset;
};

void add_common(CLI::App * cmd, CommonFlags & f, bool out_required)
{
  cmd->add_option("--config", f.config, "Key-value configuration file");
  cmd->add_option("--seed", f.seed, "Global seed");
  cmd->add_option("--workers", f.workers, "Worker threads")->check(CLI::PositiveNumber);
  auto * out = cmd->add_option("--out", f.out, "Output path");
  if (out_required) {
    out->required();
  }
  cmd->add_option("--set", f.overrides, "Config override key=value (repeatable)");
}

RunConfig make_config(const CommonFlags & f, const std::vector<std::pair<std::string, std::string>> & extra = {})
{
  KeyValueConfig kv;
  if (!f.config.empty()) {
    kv = KeyValueConfig::load(f.config);
  }
  if (!f.dataset.empty()) {
    kv.set("dataset.manifest", f.dataset);
  }
  for (const auto & [k, v] : extra) {
    if (!v.empty()) {
      kv.set(k, v);
    }
  }
  for (const std::string & a : f.overrides) {
    kv.set_assignment(a);
  }
  if (f.seed) {
    kv.set("seed", std::to_string(*f.seed));
  }
  if (f.workers) {
    kv.set("workers", std::to_string(*f.workers));
  }
  RunConfig cfg = resolve_config(kv);
  set_threads(cfg.workers);
  return cfg;
}

std::vector<SceneFrame> load_frames(const RunConfig & cfg)
{
  if (cfg.manifest.empty()) {
    throw MissingInputError("no dataset manifest given (--dataset or dataset.manifest)");
  }
  return load_dataset(cfg.manifest, cfg.labels, cfg.fields_per_point);
}

void require_file(const fs::path & p, const std::string & what)
{
  if (p.empty()) {
    throw MissingInputError("no " + what + " given");
  }
  if (!fs::exists(p)) {
    throw MissingInputError(what + " not found: " + p.string());
  }
}

std::string quoted(const std::string & s)
{
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"' || c == '\\') {
      out += '\\';
    }
    out += (c == '\n' ? ' ' : c);
  }
  return out + "\"";
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"scenemix: reality-conforming LiDAR object insertion toolkit"};
  app.require_subcommand(1);

  // fixture
  CommonFlags fixture_flags;
  int fixture_frames = 10;
  bool fixture_force = false;
  auto * fixture = app.add_subcommand("fixture", "Generate a deterministic synthetic dataset");
  add_common(fixture, fixture_flags, true);
  fixture->add_option("--frames", fixture_frames, "Number of frames")->check(CLI::PositiveNumber);
  fixture->add_flag("--force", fixture_force, "Replace an existing dataset in --out");

  // bank build
  CommonFlags bank_flags;
  std::optional<int> bank_min_points;
  auto * bank = app.add_subcommand("bank", "Object bank commands");
  bank->require_subcommand(1);
  auto * bank_build_cmd = bank->add_subcommand("build", "Extract every labeled object into a bank directory");
  add_common(bank_build_cmd, bank_flags, true);
  bank_build_cmd->add_option("--dataset", bank_flags.dataset, "Dataset manifest.csv");
  bank_build_cmd->add_option("--min-points", bank_min_points, "Minimum enclosed points per object");

  // ground fit
  CommonFlags ground_flags;
  auto * ground = app.add_subcommand("ground", "Plane-fit ground labels");
  ground->require_subcommand(1);
  auto * ground_fit_cmd = ground->add_subcommand("fit", "Write per-frame ground masks");
  add_common(ground_fit_cmd, ground_flags, true);
  ground_fit_cmd->add_option("--dataset", ground_flags.dataset, "Dataset manifest.csv");

  // placeability
  auto * place = app.add_subcommand("placeability", "Placeability estimator");
  place->require_subcommand(1);
  CommonFlags train_flags;
  std::string train_masks;
  std::optional<int> train_epochs;
  auto * train_cmd = place->add_subcommand("train", "Train the estimator and write a model file");
  add_common(train_cmd, train_flags, true);
  train_cmd->add_option("--dataset", train_flags.dataset, "Dataset manifest.csv");
  train_cmd->add_option("--masks", train_masks, "Label masks directory (default: plane fit)");
  train_cmd->add_option("--epochs", train_epochs, "Training epochs");

  CommonFlags infer_flags;
  std::string infer_model;
  std::optional<double> infer_threshold;
  auto * infer_cmd = place->add_subcommand("infer", "Write per-frame placeability masks");
  add_common(infer_cmd, infer_flags, true);
  infer_cmd->add_option("--dataset", infer_flags.dataset, "Dataset manifest.csv");
  infer_cmd->add_option("--model", infer_model, "Model file")->required();
  infer_cmd->add_option("--threshold", infer_threshold, "Placeability threshold");

  // augment
  CommonFlags aug_flags;
  std::string aug_bank, aug_model, aug_masks;
  double aug_progress = 0.0;
  auto * augment = app.add_subcommand("augment", "Insert bank objects into every frame");
  add_common(augment, aug_flags, true);
  augment->add_option("--dataset", aug_flags.dataset, "Dataset manifest.csv");
  augment->add_option("--bank", aug_bank, "Object bank directory");
  augment->add_option("--model", aug_model, "Placeability model file");
  augment->add_option("--masks", aug_masks, "Precomputed placeability masks directory");
  augment->add_option("--progress", aug_progress, "Training progress fraction in [0, 1]");

  // stats
  auto * stats = app.add_subcommand("stats", "Dataset statistics");
  stats->require_subcommand(1);
  CommonFlags obj_flags;
  std::string obj_bank;
  auto * stats_objects = stats->add_subcommand("objects", "Per-category object statistics");
  add_common(stats_objects, obj_flags, false);
  stats_objects->add_option("--dataset", obj_flags.dataset, "Dataset manifest.csv");
  stats_objects->add_option("--bank", obj_bank, "Object bank directory (default: built on the fly)");

  CommonFlags sc_flags;
  auto * stats_scene = stats->add_subcommand("scene-category", "Per-scene category counts");
  add_common(stats_scene, sc_flags, false);
  stats_scene->add_option("--dataset", sc_flags.dataset, "Dataset manifest.csv");

  CommonFlags fg_flags;
  std::string fg_category;
  auto * stats_fgbg = stats->add_subcommand("fgbg", "Foreground/background BEV cell ratio");
  add_common(stats_fgbg, fg_flags, false);
  stats_fgbg->add_option("--dataset", fg_flags.dataset, "Dataset manifest.csv");
  stats_fgbg->add_option("--category", fg_category, "Category")->required();

  // score
  double map_aug = 0.0;
  double map_noaug = 0.0;
  auto * score = app.add_subcommand("score", "Reality-conforming score from two metric values");
  score->add_option("--map-aug", map_aug, "Metric on augmented data")->required();
  score->add_option("--map-noaug", map_noaug, "Metric on real data")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success & e) {
    return app.exit(e);
  } catch (const CLI::RequiredError & e) {
    std::cerr << "error kind=missing_input message=" << quoted(e.what()) << '\n';
    return 2;
  } catch (const CLI::ParseError & e) {
    std::cerr << "error kind=validation message=" << quoted(e.what()) << '\n';
    return 3;
  }

  try {
    if (*fixture) {
      const RunConfig cfg = make_config(fixture_flags);
      write_fixture(cfg.seed, fixture_frames, fixture_flags.out, fixture_force);
      std::cout << "wrote " << fixture_frames << " frames to " << fixture_flags.out << '\n';
    } else if (*bank_build_cmd) {
      std::vector<std::pair<std::string, std::string>> extra;
      if (bank_min_points) {
        extra.emplace_back("bank.min_points", std::to_string(*bank_min_points));
      }
      const RunConfig cfg = make_config(bank_flags, extra);
      const auto frames = load_frames(cfg);
      const BankBuildResult built = bank_build(frames, cfg.bank_min_points);
      save_bank(built.bank, bank_flags.out);
      std::cout << "bank samples=" << built.bank.size() << " skipped=" << built.skipped << '\n';
    } else if (*ground_fit_cmd) {
      const RunConfig cfg = make_config(ground_flags);
      const std::size_t n = run_ground_fit(cfg, ground_flags.out);
      std::cout << "wrote " << n << " ground masks to " << ground_flags.out << '\n';
    } else if (*train_cmd) {
      std::vector<std::pair<std::string, std::string>> extra{{"masks.path", train_masks}};
      if (train_epochs) {
        extra.emplace_back("train.epochs", std::to_string(*train_epochs));
      }
      const RunConfig cfg = make_config(train_flags, extra);
      const TrainResult result = run_train(cfg);
      save_model(result.model, train_flags.out);
      for (std::size_t e = 0; e < result.epoch_loss.size(); ++e) {
        std::printf("epoch=%zu loss=%.6f\n", e, result.epoch_loss[e]);
      }
    } else if (*infer_cmd) {
      std::vector<std::pair<std::string, std::string>> extra;
      if (infer_threshold) {
        extra.emplace_back("composition.placeability_threshold", std::to_string(*infer_threshold));
      }
      const RunConfig cfg = make_config(infer_flags, extra);
      require_file(infer_model, "model file");
      const PlaceabilityModel model = load_model(infer_model);
      const std::size_t n = run_infer(cfg, model, infer_flags.out);
      std::cout << "wrote " << n << " placeability masks to " << infer_flags.out << '\n';
    } else if (*augment) {
      const RunConfig cfg = make_config(
        aug_flags, {{"bank.path", aug_bank}, {"model.path", aug_model}, {"masks.path", aug_masks}});
      require_file(cfg.manifest, "dataset manifest");
      require_file(cfg.bank, "object bank");
      if (!cfg.model.empty()) {
        require_file(cfg.model, "model file");
      }
      if (!cfg.masks.empty()) {
        require_file(cfg.masks, "masks directory");
      }
      const ObjectBank loaded = load_bank(cfg.bank);
      const AugmentSummary summary = run_augment(cfg, loaded, aug_progress, aug_flags.out);
      std::printf("frames=%zu requested=%zu placed=%zu seconds=%.3f\n", summary.reports.size(), summary.requested,
                  summary.placed, summary.seconds);
    } else if (*stats_objects) {
      const RunConfig cfg = make_config(obj_flags, {{"bank.path", obj_bank}});
      const auto frames = load_frames(cfg);
      const ObjectBank b = cfg.bank.empty() ? bank_build(frames, cfg.bank_min_points).bank : load_bank(cfg.bank);
      const CategoryStats s = object_stats(frames, b, cfg.voxel);
      print_object_stats(s, std::cout);
      if (!obj_flags.out.empty()) {
        std::ofstream out(obj_flags.out);
        if (!out) {
          throw IoError("cannot open for writing: " + obj_flags.out);
        }
        write_object_stats_csv(s, out);
      }
    } else if (*stats_scene) {
      const RunConfig cfg = make_config(sc_flags);
      const auto table = scene_category_table(load_frames(cfg));
      print_scene_category(table, std::cout);
      if (!sc_flags.out.empty()) {
        std::ofstream out(sc_flags.out);
        if (!out) {
          throw IoError("cannot open for writing: " + sc_flags.out);
        }
        write_scene_category_csv(table, out);
      }
    } else if (*stats_fgbg) {
      const RunConfig cfg = make_config(fg_flags);
      const double ratio = fg_bg_ratio(load_frames(cfg), cfg.voxel, fg_category);
      std::printf("category=%s fg_bg_ratio=%.6f\n", fg_category.c_str(), ratio);
      if (!fg_flags.out.empty()) {
        std::ofstream out(fg_flags.out);
        if (!out) {
          throw IoError("cannot open for writing: " + fg_flags.out);
        }
        out << "category,fg_bg_ratio\n" << fg_category << ',' << ratio << '\n';
      }
    } else if (*score) {
      std::printf("Re=%.6f\n", reality_score({map_aug, map_noaug}));
    }
  } catch (const Error & e) {
    std::cerr << "error kind=" << to_string(e.kind()) << " message=" << quoted(e.what()) << '\n';
    return e.exit_code();
  } catch (const std::filesystem::filesystem_error & e) {
    std::cerr << "error kind=io message=" << quoted(e.what()) << '\n';
    return 4;
  }
  return 0;
}
