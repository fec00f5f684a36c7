#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "divaug/error.hpp"
#include "divaug/pipeline.hpp"
#include "reference_oracle.hpp"

using namespace divaug;
using divaug::testing::small_synthetic;
namespace fs = std::filesystem;

namespace {

RunConfig small_config(Strategy strategy) {
  RunConfig c;
  c.strategy = strategy;
  c.E = 4;
  c.S = 2;
  c.epochs = 2;
  c.batch_size = 6;
  c.lr = 0.05;
  c.seed = 21;
  c.hidden_units = 8;
  return c;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("parallel_for visits every index once and rethrows") {
  std::vector<int> hits(100, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { ++hits[i]; });
  CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t i) {
                    if (i == 7) throw InvalidArgument("boom");
                  }),
                  InvalidArgument);
}

TEST_CASE("identity training is plain training") {
  const DatasetSplit train = small_synthetic(8, 10, 3, 1);
  RunConfig config = small_config(Strategy::Identity);
  config.epochs = 3;
  const TrainResult result = train_with_divaug(config, train, nullptr, DatasetKind::Synthetic);

  // The plain loop: same initial model and shuffles, originals only.
  OracleModel model = initial_model(config, train);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto order = epoch_permutation(train.size(), config.seed, epoch);
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      std::vector<Image> images;
      std::vector<std::size_t> labels;
      for (std::size_t i = begin; i < std::min(order.size(), begin + config.batch_size); ++i) {
        images.push_back(train.images[order[i]]);
        labels.push_back(train.labels[order[i]]);
      }
      sgd_step(model, images, labels, config.lr, config.weight_decay);
    }
  }
  CHECK(result.model == model);
  CHECK(result.counters.scoring_forwards == 0U);
  CHECK(result.counters.training_images == config.epochs * train.size());
  CHECK(result.subpolicy_stats.empty());
}

TEST_CASE("work accounting: batch x E forwards and batch x S training images per step") {
  const DatasetSplit train = small_synthetic(6, 10, 1, 2);  // 18 images, 3 full batches
  for (Strategy s : {Strategy::DivAug, Strategy::RandomSelect}) {
    const RunConfig config = small_config(s);
    const TrainResult r = train_with_divaug(config, train, nullptr, DatasetKind::Synthetic);
    CHECK(r.counters.optimizer_steps == 6U);
    for (const BatchTrace& b : r.batches) {
      CHECK(b.scoring_forwards == b.source_images * config.E);
      CHECK(b.training_images == b.source_images * config.S);
    }
    CHECK(r.counters.scoring_forwards == 2 * 18 * config.E);
    CHECK(r.counters.training_images == 2 * 18 * config.S);
  }
}

TEST_CASE("the training batch holds only selected candidates") {
  const DatasetSplit train = small_synthetic(4, 10, 3, 3);
  const RunConfig config = small_config(Strategy::DivAug);
  std::size_t checked = 0;
  TrainHooks hooks;
  hooks.on_batch = [&](const BatchEvent& event) {
    std::vector<Image> pool;
    for (std::size_t idx : event.source_indices) pool.push_back(train.images[idx]);
    std::size_t cursor = 0;
    for (std::size_t i = 0; i < event.source_indices.size(); ++i) {
      const std::size_t src = event.source_indices[i];
      const RandomStream stream = image_stream(config.seed, event.epoch, src);
      // Rebuild every candidate tensor independently.
      CandidateSet set = expand(train.images[src], config.E, stream, pool);
      std::vector<Image> tensors;
      for (std::size_t j = 0; j < set.size(); ++j) {
        RandomStream aug = stream.fork(kDefaultAugmentDomain, j);
        tensors.push_back(default_augment(set.candidates[j].image, DatasetKind::Synthetic, aug));
      }
      const AugmentedViews& v = event.views[i];
      REQUIRE(v.images.size() == config.S);
      std::size_t chosen = 0;
      for (const auto& [policy, flag] : v.sampled) chosen += flag;
      CHECK(chosen == config.S);
      for (const Image& img : v.images) {
        CHECK(std::find(tensors.begin(), tensors.end(), img) != tensors.end());
        CHECK(event.training_images[cursor] == img);
        CHECK(event.training_labels[cursor] == train.labels[src]);
        ++cursor;
      }
      ++checked;
    }
    CHECK(cursor == event.training_images.size());
  };
  (void)train_with_divaug(config, train, nullptr, DatasetKind::Synthetic, hooks);
  CHECK(checked == config.epochs * train.size());
}

TEST_CASE("a frozen scorer replaces the live snapshot") {
  const DatasetSplit train = small_synthetic(4, 10, 1, 4);
  const RunConfig config = small_config(Strategy::DivAug);
  const OracleModel frozen = initial_model(small_config(Strategy::Identity), train);
  TrainHooks hooks;
  hooks.frozen_scorer = &frozen;
  hooks.on_batch = [&](const BatchEvent& event) {
    for (const auto& v : event.views) CHECK(v.probs == predict_proba(frozen, v.images));
  };
  (void)train_with_divaug(config, train, nullptr, DatasetKind::Synthetic, hooks);
}

TEST_CASE("records, statistics and outputs") {
  const DatasetSplit train = small_synthetic(4, 10, 3, 5);
  const DatasetSplit test = small_synthetic(2, 10, 3, 6);
  RunConfig config = small_config(Strategy::DivAug);
  const TrainResult r = train_with_divaug(config, train, &test, DatasetKind::Synthetic);
  const auto count = [&](const std::string& name) {
    return std::count_if(r.records.begin(), r.records.end(), [&](const MetricsRecord& m) { return m.metric == name; });
  };
  CHECK(count("loss") == 4);
  CHECK(count("batch_diversity") == 4);
  CHECK(count("epoch_loss") == 2);
  CHECK(count("train_accuracy") == 2);
  CHECK(count("test_accuracy") == 2);
  for (const auto& m : r.records) CHECK(m.context.at("strategy") == "divaug");
  REQUIRE(r.subpolicy_stats.size() == 2U);
  for (const auto& s : r.subpolicy_stats) {
    double total = 0;
    for (double f : s.op_frequency) total += f;
    CHECK(std::abs(total - 1.0) <= 1e-9);
    CHECK(s.chosen_subpolicies == train.size() * config.S);
  }

  const fs::path dir = fs::temp_directory_path() / "divaug_test_outputs";
  fs::remove_all(dir);
  write_outputs(r, dir.string());
  for (const char* name : {"metrics.jsonl", "metrics.csv", "subpolicy_stats.csv", "checkpoint.dvag"}) {
    CHECK(fs::exists(dir / name));
  }
  CHECK(load_checkpoint((dir / "checkpoint.dvag").string()) == r.model);
}

TEST_CASE("training is deterministic across worker counts") {
  const DatasetSplit train = small_synthetic(6, 10, 3, 7);
  RunConfig one = small_config(Strategy::DivAug);
  RunConfig four = one;
  four.workers = 4;
  const TrainResult a = train_with_divaug(one, train, nullptr, DatasetKind::Synthetic);
  const TrainResult b = train_with_divaug(four, train, nullptr, DatasetKind::Synthetic);
  CHECK(a.model == b.model);
  const fs::path da = fs::temp_directory_path() / "divaug_test_det_a";
  const fs::path db = fs::temp_directory_path() / "divaug_test_det_b";
  write_outputs(a, da.string());
  write_outputs(b, db.string());
  for (const char* name : {"metrics.jsonl", "metrics.csv", "subpolicy_stats.csv", "checkpoint.dvag"}) {
    CHECK(slurp(da / name) == slurp(db / name));
  }
}

TEST_CASE("divergence aborts with a diagnostic") {
  const DatasetSplit train = small_synthetic(6, 10, 1, 8);
  RunConfig config = small_config(Strategy::Identity);
  config.lr = 1e200;
  config.epochs = 5;
  try {
    (void)train_with_divaug(config, train, nullptr, DatasetKind::Synthetic);
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(std::string(e.what()).find("epoch") != std::string::npos);
  }
}

TEST_CASE("invalid configurations are rejected before training") {
  const DatasetSplit train = small_synthetic(2, 10, 1, 9);
  RunConfig config = small_config(Strategy::DivAug);
  config.S = 5;
  CHECK_THROWS_AS(train_with_divaug(config, train, nullptr, DatasetKind::Synthetic), ConfigError);
  config = small_config(Strategy::DivAug);
  config.default_augment = "imagenet";
  CHECK_THROWS_AS(train_with_divaug(config, train, nullptr, DatasetKind::Synthetic), ConfigError);
}

TEST_CASE("default augmentation resolution") {
  RunConfig c;
  CHECK(resolve_default_augment(c, DatasetKind::Cifar) == DatasetKind::Cifar);
  c.default_augment = "none";
  CHECK_FALSE(resolve_default_augment(c, DatasetKind::Cifar).has_value());
  c.default_augment = "svhn";
  CHECK(resolve_default_augment(c, DatasetKind::Synthetic) == DatasetKind::Svhn);
}
