#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "divaug/config.hpp"
#include "divaug/dataset.hpp"
#include "divaug/metrics.hpp"
#include "divaug/oracle.hpp"
#include "divaug/random.hpp"
#include "divaug/strategy.hpp"

namespace divaug {

/// Runs body(i) for i in [0, n) on up to `workers` threads. Results must be
/// written to per-index slots; the first exception is rethrown.
template <typename Body>
void parallel_for(std::size_t n, std::size_t workers, Body&& body) {
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            body(i);
          } catch (...) {
            const std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

/// Instrumentation for the expand / score / train cost model.
struct WorkCounters {
  std::size_t scoring_forwards = 0;  ///< oracle inferences on candidates
  std::size_t training_images = 0;   ///< images passed to sgd_step
  std::size_t optimizer_steps = 0;
};

struct BatchTrace {
  std::size_t epoch = 0;
  std::size_t step = 0;
  std::size_t source_images = 0;
  double loss = 0.0;
  double diversity = 0.0;  ///< mean Variance Diversity of the selected views
  std::size_t scoring_forwards = 0;
  std::size_t training_images = 0;
};

/// Passed to TrainHooks::on_batch before the optimizer step.
struct BatchEvent {
  std::size_t epoch = 0;
  std::size_t step = 0;
  std::span<const std::size_t> source_indices;
  std::span<const AugmentedViews> views;
  std::span<const Image> training_images;
  std::span<const std::size_t> training_labels;
};

struct TrainHooks {
  std::function<void(const BatchEvent&)> on_batch;
  /// When set, candidates are scored by this fixed model instead of the live
  /// per-batch snapshot. Used to compare strategies on a common measurement.
  const OracleModel* frozen_scorer = nullptr;
};

struct TrainResult {
  OracleModel model;
  std::vector<MetricsRecord> records;
  std::vector<SubPolicyStats> subpolicy_stats;
  std::vector<BatchTrace> batches;
  WorkCounters counters;
};

// Stream domains forked off the master seed.
inline constexpr std::uint64_t kInitDomain = 0x1417;
inline constexpr std::uint64_t kShuffleDomain = 0x5A0F;
inline constexpr std::uint64_t kEpochDomain = 0xE90C;

/// Seed handed to OracleModel::initialize for a run seed.
std::uint64_t model_init_seed(std::uint64_t seed);

/// Per-epoch shuffle of [0, n).
std::vector<std::size_t> epoch_permutation(std::size_t n, std::uint64_t seed, std::size_t epoch);

/// Stream for source image `index` in `epoch`; candidates fork off it.
RandomStream image_stream(std::uint64_t seed, std::size_t epoch, std::size_t index);

/// Resolves config.default_augment against the dataset's natural kind.
std::optional<DatasetKind> resolve_default_augment(const RunConfig& config, DatasetKind natural);

/// Fresh model for a training split: normalisation fitted on the split,
/// parameters from model_init_seed(config.seed).
OracleModel initial_model(const RunConfig& config, const DatasetSplit& train);

/// Expand, score against a per-batch snapshot, select, and train, for every
/// shuffled mini-batch of every epoch. The 1/S weighting of each source image
/// is a plain mean over the enlarged batch.
TrainResult train_with_divaug(const RunConfig& config, const DatasetSplit& train, const DatasetSplit* test,
                              DatasetKind natural_kind, const TrainHooks& hooks = {});

/// Loads the datasets named in the config, trains, and writes outputs when
/// output_dir is set.
TrainResult train_with_divaug(const RunConfig& config);

/// Writes metrics.jsonl, metrics.csv, subpolicy_stats.csv and checkpoint.dvag.
void write_outputs(const TrainResult& result, const std::string& directory);

}  // namespace divaug
