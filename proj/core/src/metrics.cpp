#include "divaug/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>

#include <json.hpp>

#include "divaug/error.hpp"
#include "divaug/selection.hpp"

namespace divaug {
namespace {

constexpr std::uint64_t kMeasureDomain = 0x3EA5;

// Sorting before summing makes the mean independent of dataset order.
double ordered_mean(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double total = 0.0;
  for (double v : values) total += v;
  return total / static_cast<double>(values.size());
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

ViewGenerator strategy_generator(StrategyParams params, const OracleModel& scorer,
                                 std::span<const Image> partner_pool) {
  return [params, &scorer, partner_pool](const Image& image, std::size_t count, const RandomStream& stream) {
    StrategyParams p = params;
    p.select_count = count;
    if (p.strategy == Strategy::Identity) return std::vector<Image>(count, image);
    if (p.strategy == Strategy::DefaultOnly) p.expand_count = std::max(p.expand_count, count);
    return generate_views(p, image, scorer, stream, partner_pool).images;
  };
}

ViewGenerator subpolicy_generator(SubPolicy policy, std::span<const Image> partner_pool) {
  return [policy, partner_pool](const Image& image, std::size_t count, const RandomStream& stream) {
    std::vector<Image> views;
    views.reserve(count);
    for (std::size_t j = 0; j < count; ++j) {
      RandomStream s = stream.fork(kCandidateDomain, j);
      views.push_back(apply_subpolicy(policy, image, s, partner_pool));
    }
    return views;
  };
}

std::uint64_t content_hash(const Image& image) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto feed = [&h](std::uint64_t byte) {
    h ^= byte;
    h *= 0x100000001b3ULL;
  };
  feed(static_cast<std::uint64_t>(image.height));
  feed(static_cast<std::uint64_t>(image.width));
  feed(static_cast<std::uint64_t>(image.channels));
  for (std::uint8_t v : image.pixels) feed(v);
  return h;
}

double dataset_variance_diversity(const OracleModel& model, std::span<const Image> images,
                                  const ViewGenerator& augmenter, std::size_t k, const RandomStream& rng) {
  if (k < 2) throw InvalidArgument("dataset_variance_diversity: k must be at least 2");
  if (images.empty()) throw InvalidArgument("dataset_variance_diversity: empty dataset");
  std::vector<double> per_image;
  per_image.reserve(images.size());
  for (const auto& image : images) {
    const auto views = augmenter(image, k, rng.fork(kMeasureDomain, content_hash(image)));
    per_image.push_back(variance_diversity(predict_proba(model, views)));
  }
  return ordered_mean(std::move(per_image));
}

double affinity(const OracleModel& model, std::span<const Image> images, std::span<const std::size_t> labels,
                const ViewGenerator& augmenter, const RandomStream& rng) {
  if (images.empty()) throw InvalidArgument("affinity: empty validation set");
  std::vector<Image> augmented;
  augmented.reserve(images.size());
  for (const auto& image : images) {
    auto views = augmenter(image, 1, rng.fork(kMeasureDomain, content_hash(image)));
    augmented.push_back(std::move(views.front()));
  }
  return accuracy(model, augmented, labels) - accuracy(model, images, labels);
}

double loss_diversity(const OracleModel& model, std::span<const Image> images, std::span<const std::size_t> labels) {
  if (images.empty()) throw InvalidArgument("loss_diversity: empty set");
  return mean_loss(model, images, labels);
}

double dataset_loss_diversity(const OracleModel& model, std::span<const Image> images,
                              std::span<const std::size_t> labels, const ViewGenerator& augmenter, std::size_t k,
                              const RandomStream& rng) {
  if (images.empty()) throw InvalidArgument("dataset_loss_diversity: empty set");
  if (images.size() != labels.size()) throw InvalidArgument("dataset_loss_diversity: label count mismatch");
  std::vector<double> per_image;
  per_image.reserve(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) {
    const auto views = augmenter(images[i], k, rng.fork(kMeasureDomain, content_hash(images[i])));
    const std::vector<std::size_t> view_labels(views.size(), labels[i]);
    per_image.push_back(loss_diversity(model, views, view_labels));
  }
  return ordered_mean(std::move(per_image));
}

SubPolicyStats record_subpolicy_stats(std::span<const std::pair<SubPolicy, bool>> selections, std::size_t epoch) {
  SubPolicyStats stats;
  stats.epoch = epoch;
  std::array<std::size_t, kOpKindCount> counts{};
  double p_sum = 0.0;
  double m_sum = 0.0;
  for (const auto& [policy, chosen] : selections) {
    if (!chosen) continue;
    ++stats.chosen_subpolicies;
    for (const Operation* op : {&policy.first, &policy.second}) {
      ++counts[static_cast<std::size_t>(op->kind)];
      p_sum += op->p;
      m_sum += op->m;
    }
  }
  if (stats.chosen_subpolicies == 0) throw InvalidArgument("record_subpolicy_stats: no chosen sub-policies");
  const double ops = 2.0 * static_cast<double>(stats.chosen_subpolicies);
  for (std::size_t k = 0; k < kOpKindCount; ++k) stats.op_frequency[k] = static_cast<double>(counts[k]) / ops;
  stats.mean_applied_p = p_sum / ops;
  stats.mean_m = m_sum / ops;
  return stats;
}

std::string format_number(double value) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, result.ptr);
}

void write_metrics_jsonl(std::span<const MetricsRecord> records, std::ostream& out) {
  for (const auto& r : records) {
    if (!std::isfinite(r.value)) throw InvalidArgument("metrics: non-finite value for " + r.metric);
    nlohmann::json j;
    j["epoch"] = r.epoch;
    j["step"] = r.step;
    j["metric"] = r.metric;
    j["value"] = r.value;
    j["context"] = nlohmann::json::object();
    for (const auto& [key, value] : r.context) j["context"][key] = value;
    out << j.dump() << '\n';
  }
}

void write_metrics_csv(std::span<const MetricsRecord> records, std::ostream& out) {
  out << "epoch,step,metric,value,context\n";
  for (const auto& r : records) {
    if (!std::isfinite(r.value)) throw InvalidArgument("metrics: non-finite value for " + r.metric);
    std::string context;
    for (const auto& [key, value] : r.context) {
      if (!context.empty()) context += ';';
      context += key + "=" + value;
    }
    out << r.epoch << ',' << r.step << ',' << csv_field(r.metric) << ',' << format_number(r.value) << ','
        << csv_field(context) << '\n';
  }
}

void write_subpolicy_stats_csv(std::span<const SubPolicyStats> stats, std::ostream& out) {
  out << "epoch";
  for (OpKind kind : kAllOpKinds) out << ",freq_" << to_string(kind);
  out << ",mean_applied_p,mean_m\n";
  for (const auto& s : stats) {
    out << s.epoch;
    for (double f : s.op_frequency) out << ',' << format_number(f);
    out << ',' << format_number(s.mean_applied_p) << ',' << format_number(s.mean_m) << '\n';
  }
}

}  // namespace divaug
