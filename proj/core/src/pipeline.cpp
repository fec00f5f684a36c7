#include "divaug/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>

#include "divaug/error.hpp"

namespace divaug {
namespace {

constexpr std::uint64_t kImageDomain = 0x13A6E;

MetricsRecord record(std::size_t epoch, std::size_t step, std::string metric, double value, Strategy strategy) {
  MetricsRecord r;
  r.epoch = epoch;
  r.step = step;
  r.metric = std::move(metric);
  r.value = value;
  r.context["strategy"] = std::string(to_string(strategy));
  return r;
}

}  // namespace

std::uint64_t model_init_seed(std::uint64_t seed) { return RandomStream(seed).fork(kInitDomain).next_u64(); }

std::vector<std::size_t> epoch_permutation(std::size_t n, std::uint64_t seed, std::size_t epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  RandomStream rng = RandomStream(seed).fork(kShuffleDomain, epoch);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.uniform_index(i)]);
  return order;
}

RandomStream image_stream(std::uint64_t seed, std::size_t epoch, std::size_t index) {
  return RandomStream(seed).fork(kEpochDomain, epoch).fork(kImageDomain, index);
}

std::optional<DatasetKind> resolve_default_augment(const RunConfig& config, DatasetKind natural) {
  if (config.default_augment == "none") return std::nullopt;
  if (config.default_augment == "auto") return natural;
  const auto kind = parse_dataset_kind(config.default_augment);
  if (!kind) throw ConfigError("config: bad default_augment '" + config.default_augment + "'");
  return kind;
}

OracleModel initial_model(const RunConfig& config, const DatasetSplit& train) {
  if (train.images.empty()) throw ConfigError("training split is empty");
  Architecture arch;
  arch.kind = config.model;
  arch.height = train.images.front().height;
  arch.width = train.images.front().width;
  arch.channels = train.images.front().channels;
  arch.hidden = config.model == ModelKind::Mlp ? config.hidden_units : 0;
  arch.classes = train.class_count;
  return OracleModel::initialize(arch, InputNormalization::fit(train.images), model_init_seed(config.seed));
}

TrainResult train_with_divaug(const RunConfig& config, const DatasetSplit& train, const DatasetSplit* test,
                              DatasetKind natural_kind, const TrainHooks& hooks) {
  config.validate();
  train.validate();
  if (test != nullptr) test->validate();

  StrategyParams params;
  params.strategy = config.strategy;
  params.expand_count = config.E;
  params.select_count = config.S;
  params.default_augment = resolve_default_augment(config, natural_kind);

  TrainResult result{initial_model(config, train), {}, {}, {}, {}};
  OracleModel& model = result.model;
  const std::size_t n = train.size();

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto order = epoch_permutation(n, config.seed, epoch);
    std::vector<std::pair<SubPolicy, bool>> sampled;
    double epoch_loss = 0.0;
    std::size_t epoch_steps = 0;

    for (std::size_t begin = 0; begin < n; begin += config.batch_size) {
      const std::size_t end = std::min(n, begin + config.batch_size);
      const std::span<const std::size_t> sources(order.data() + begin, end - begin);
      std::vector<Image> pool;
      pool.reserve(sources.size());
      for (std::size_t idx : sources) pool.push_back(train.images[idx]);

      // Every candidate of this batch is scored by the same snapshot.
      std::optional<OracleModel> snapshot;
      if (hooks.frozen_scorer == nullptr) snapshot.emplace(model);
      const OracleModel& scorer = hooks.frozen_scorer != nullptr ? *hooks.frozen_scorer : *snapshot;
      std::vector<AugmentedViews> views(sources.size());
      parallel_for(sources.size(), config.workers, [&](std::size_t i) {
        views[i] = generate_views(params, pool[i], scorer, image_stream(config.seed, epoch, sources[i]), pool);
      });

      std::vector<Image> batch_images;
      std::vector<std::size_t> batch_labels;
      BatchTrace trace;
      trace.epoch = epoch;
      trace.step = result.batches.size();
      trace.source_images = sources.size();
      for (std::size_t i = 0; i < sources.size(); ++i) {
        for (const auto& image : views[i].images) {
          batch_images.push_back(image);
          batch_labels.push_back(train.labels[sources[i]]);
        }
        trace.diversity += views[i].diversity;
        trace.scoring_forwards += views[i].forward_passes;
        sampled.insert(sampled.end(), views[i].sampled.begin(), views[i].sampled.end());
      }
      trace.diversity /= static_cast<double>(sources.size());
      trace.training_images = batch_images.size();

      if (hooks.on_batch) {
        hooks.on_batch(BatchEvent{epoch, trace.step, sources, views, batch_images, batch_labels});
      }

      try {
        trace.loss = sgd_step(model, batch_images, batch_labels, config.lr, config.weight_decay);
      } catch (const DivergenceError& e) {
        throw DivergenceError(std::string(e.what()) + " at epoch " + std::to_string(epoch) + ", step " +
                              std::to_string(trace.step) + " (lr=" + format_number(config.lr) + ")");
      }

      result.counters.scoring_forwards += trace.scoring_forwards;
      result.counters.training_images += trace.training_images;
      ++result.counters.optimizer_steps;
      result.records.push_back(record(epoch, trace.step, "loss", trace.loss, config.strategy));
      result.records.push_back(record(epoch, trace.step, "batch_diversity", trace.diversity, config.strategy));
      epoch_loss += trace.loss;
      ++epoch_steps;
      result.batches.push_back(trace);
    }

    const std::size_t step = result.batches.size();
    result.records.push_back(record(epoch, step, "epoch_loss", epoch_loss / static_cast<double>(epoch_steps), config.strategy));
    result.records.push_back(record(epoch, step, "train_accuracy", accuracy(model, train.images, train.labels), config.strategy));
    if (test != nullptr && test->size() > 0) {
      result.records.push_back(record(epoch, step, "test_accuracy", accuracy(model, test->images, test->labels), config.strategy));
    }
    if (std::any_of(sampled.begin(), sampled.end(), [](const auto& s) { return s.second; })) {
      result.subpolicy_stats.push_back(record_subpolicy_stats(sampled, epoch));
    }
  }
  return result;
}

TrainResult train_with_divaug(const RunConfig& config) {
  config.validate();
  const LoadedDataset train = load_dataset(config.dataset);
  std::optional<LoadedDataset> test;
  if (!config.test_dataset.empty()) test = load_dataset(config.test_dataset);
  if (test && test->split.class_count > train.split.class_count) {
    throw ConfigError("test_dataset has more classes than the training dataset");
  }
  TrainResult result = train_with_divaug(config, train.split, test ? &test->split : nullptr, train.default_kind);
  if (!config.output_dir.empty()) write_outputs(result, config.output_dir);
  return result;
}

void write_outputs(const TrainResult& result, const std::string& directory) {
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  const auto open = [&](const char* name) {
    std::ofstream out(fs::path(directory) / name, std::ios::binary);
    if (!out) throw Error(std::string("cannot write ") + (fs::path(directory) / name).string());
    return out;
  };
  {
    auto out = open("metrics.jsonl");
    write_metrics_jsonl(result.records, out);
  }
  {
    auto out = open("metrics.csv");
    write_metrics_csv(result.records, out);
  }
  {
    auto out = open("subpolicy_stats.csv");
    write_subpolicy_stats_csv(result.subpolicy_stats, out);
  }
  {
    auto out = open("checkpoint.dvag");
    save_checkpoint(result.model, out);
  }
}

}  // namespace divaug
