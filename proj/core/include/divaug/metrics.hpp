#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "divaug/image.hpp"
#include "divaug/imageops.hpp"
#include "divaug/oracle.hpp"
#include "divaug/policy.hpp"
#include "divaug/random.hpp"
#include "divaug/strategy.hpp"

namespace divaug {

struct MetricsRecord {
  std::size_t epoch = 0;
  std::size_t step = 0;
  std::string metric;
  double value = 0.0;
  std::map<std::string, std::string> context;
};

/// Operation statistics of the sub-policies chosen during one epoch.
struct SubPolicyStats {
  std::size_t epoch = 0;
  std::array<double, kOpKindCount> op_frequency{};  ///< indexed by OpKind
  double mean_applied_p = 0.0;
  double mean_m = 0.0;
  std::size_t chosen_subpolicies = 0;
};

/// Produces `count` augmented views of an image from a stream.
using ViewGenerator = std::function<std::vector<Image>(const Image&, std::size_t count, const RandomStream&)>;

/// Views from a named strategy scored against `scorer`; S is set to `count`
/// on every call. For Identity the single original is repeated `count` times.
ViewGenerator strategy_generator(StrategyParams params, const OracleModel& scorer,
                                 std::span<const Image> partner_pool);

/// `count` independent applications of one fixed sub-policy.
ViewGenerator subpolicy_generator(SubPolicy policy, std::span<const Image> partner_pool);

/// FNV-1a hash of shape and pixels. Measurement streams are keyed by content
/// so that metrics do not depend on dataset order.
std::uint64_t content_hash(const Image& image);

/// Mean over images of the Variance Diversity of `k` views scored by `model`.
double dataset_variance_diversity(const OracleModel& model, std::span<const Image> images,
                                  const ViewGenerator& augmenter, std::size_t k, const RandomStream& rng);

/// accuracy(augmented once) - accuracy(clean), in [-1, 1].
double affinity(const OracleModel& model, std::span<const Image> images, std::span<const std::size_t> labels,
                const ViewGenerator& augmenter, const RandomStream& rng);

/// Mean cross-entropy of the model over an augmented, labelled set.
double loss_diversity(const OracleModel& model, std::span<const Image> images, std::span<const std::size_t> labels);

/// loss_diversity of the `k` views of each image, averaged over images.
double dataset_loss_diversity(const OracleModel& model, std::span<const Image> images,
                              std::span<const std::size_t> labels, const ViewGenerator& augmenter, std::size_t k,
                              const RandomStream& rng);

/// Frequencies count both operations of every chosen sub-policy.
SubPolicyStats record_subpolicy_stats(std::span<const std::pair<SubPolicy, bool>> selections, std::size_t epoch);

/// Shortest round-trip decimal form.
std::string format_number(double value);

/// One JSON object per line: {"context":{...},"epoch":..,"metric":..,"step":..,"value":..}.
void write_metrics_jsonl(std::span<const MetricsRecord> records, std::ostream& out);
/// Header epoch,step,metric,value,context; context as key=value pairs joined by ';'.
void write_metrics_csv(std::span<const MetricsRecord> records, std::ostream& out);
/// Header epoch,freq_<Op> x16,mean_applied_p,mean_m.
void write_subpolicy_stats_csv(std::span<const SubPolicyStats> stats, std::ostream& out);

}  // namespace divaug
