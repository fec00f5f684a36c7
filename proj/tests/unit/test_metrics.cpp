#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <json.hpp>

#include "divaug/error.hpp"
#include "divaug/metrics.hpp"
#include "reference_oracle.hpp"
#include "test_support.hpp"

using namespace divaug;
using divaug::testing::small_synthetic;
using divaug::testing::train_reference_oracle;

namespace {

StrategyParams params_for(Strategy s) {
  StrategyParams p;
  p.strategy = s;
  p.expand_count = 8;
  p.select_count = 4;
  p.default_augment = DatasetKind::Synthetic;
  return p;
}

OracleModel random_model(const DatasetSplit& split, std::uint64_t seed) {
  Architecture a;
  a.height = split.images.front().height;
  a.width = split.images.front().width;
  a.channels = split.images.front().channels;
  a.hidden = 16;
  a.classes = split.class_count;
  return OracleModel::initialize(a, InputNormalization::fit(split.images), seed);
}

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) r[order[i]] = static_cast<double>(i);
  return r;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  const auto ra = ranks(a), rb = ranks(b);
  const double n = static_cast<double>(a.size());
  double d2 = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d2 += (ra[i] - rb[i]) * (ra[i] - rb[i]);
  return 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
}

}  // namespace

TEST_CASE("identity diversity is exactly zero and augmented diversity is positive") {
  const DatasetSplit split = small_synthetic(10, 12, 3, 1);
  const OracleModel model = random_model(split, 2);
  const RandomStream rng(3);
  const auto identity = strategy_generator(params_for(Strategy::Identity), model, split.images);
  CHECK(dataset_variance_diversity(model, split.images, identity, 4, rng) == 0.0);
  const auto divaug = strategy_generator(params_for(Strategy::DivAug), model, split.images);
  CHECK(dataset_variance_diversity(model, split.images, divaug, 4, rng) > 0.0);
  CHECK_THROWS_AS(dataset_variance_diversity(model, split.images, identity, 1, rng), InvalidArgument);
}

TEST_CASE("dataset diversity ignores dataset order and is deterministic") {
  const DatasetSplit split = small_synthetic(8, 12, 1, 4);
  const OracleModel model = random_model(split, 5);
  const RandomStream rng(6);
  const auto gen = strategy_generator(params_for(Strategy::RandomSelect), model, split.images);
  const double a = dataset_variance_diversity(model, split.images, gen, 4, rng);
  std::vector<Image> shuffled = split.images;
  std::mt19937_64 g(7);
  std::shuffle(shuffled.begin(), shuffled.end(), g);
  CHECK(dataset_variance_diversity(model, shuffled, gen, 4, rng) == a);
  CHECK(dataset_variance_diversity(model, split.images, gen, 4, rng) == a);
}

TEST_CASE("affinity of the identity is zero and any affinity is bounded") {
  const DatasetSplit split = small_synthetic(10, 12, 3, 8);
  const OracleModel model = random_model(split, 9);
  const RandomStream rng(10);
  const auto identity = strategy_generator(params_for(Strategy::Identity), model, split.images);
  CHECK(affinity(model, split.images, split.labels, identity, rng) == 0.0);
  const auto invert = subpolicy_generator({{OpKind::Invert, 1.0, 0.0}, {OpKind::Invert, 0.0, 0.0}}, split.images);
  const double a = affinity(model, split.images, split.labels, invert, rng);
  CHECK(a >= -1.0);
  CHECK(a <= 1.0);
  CHECK_THROWS_AS(affinity(model, std::vector<Image>{}, std::vector<std::size_t>{}, invert, rng), InvalidArgument);
}

TEST_CASE("inverting images hurts a model trained without inversion") {
  const SubPolicy invert{{OpKind::Invert, 1.0, 0.0}, {OpKind::Invert, 0.0, 0.0}};
  int non_positive = 0;
  const int trials = 10;
  for (int trial = 0; trial < trials; ++trial) {
    const DatasetSplit train = small_synthetic(40, 12, 1, 100 + trial);
    const DatasetSplit val = small_synthetic(20, 12, 1, 200 + trial);
    const OracleModel model = train_reference_oracle(train, 8, trial);
    const double a = affinity(model, val.images, val.labels, subpolicy_generator(invert, val.images), RandomStream(trial));
    non_positive += a <= 0.0;
  }
  CHECK(non_positive >= 9);
}

TEST_CASE("loss diversity closed forms") {
  const DatasetSplit split = small_synthetic(6, 10, 3, 11);
  const OracleModel model = random_model(split, 12);
  const std::vector<Image> same(5, split.images.front());
  const std::vector<std::size_t> labels(5, split.labels.front());
  const double l = ce_loss(predict_proba(model, std::span<const Image>(split.images.data(), 1)).front(), labels[0]);
  CHECK(loss_diversity(model, same, labels) == doctest::Approx(l).epsilon(1e-12));

  const auto identity = strategy_generator(params_for(Strategy::Identity), model, split.images);
  CHECK(dataset_loss_diversity(model, split.images, split.labels, identity, 4, RandomStream(1)) ==
        doctest::Approx(mean_loss(model, split.images, split.labels)).epsilon(1e-12));
  const auto divaug = strategy_generator(params_for(Strategy::DivAug), model, split.images);
  CHECK(dataset_loss_diversity(model, split.images, split.labels, divaug, 4, RandomStream(1)) >= 0.0);
  CHECK_THROWS_AS(loss_diversity(model, std::vector<Image>{}, std::vector<std::size_t>{}), InvalidArgument);
}

TEST_CASE("loss diversity and variance diversity rank strategies alike") {
  const DatasetSplit train = small_synthetic(40, 12, 3, 13);
  const OracleModel model = train_reference_oracle(train, 10, 14);
  const std::span<const Image> probe(train.images.data(), 60);
  const std::span<const std::size_t> probe_labels(train.labels.data(), 60);
  std::vector<double> vd, ld;
  for (Strategy s : {Strategy::Identity, Strategy::DefaultOnly, Strategy::RandomSelect, Strategy::DivAug}) {
    const auto gen = strategy_generator(params_for(s), model, train.images);
    vd.push_back(dataset_variance_diversity(model, probe, gen, 4, RandomStream(15)));
    ld.push_back(dataset_loss_diversity(model, probe, probe_labels, gen, 4, RandomStream(15)));
  }
  MESSAGE("variance diversity " << vd[0] << " " << vd[1] << " " << vd[2] << " " << vd[3]);
  MESSAGE("loss diversity " << ld[0] << " " << ld[1] << " " << ld[2] << " " << ld[3]);
  CHECK(spearman(vd, ld) > 0.0);
}

TEST_CASE("sub-policy statistics") {
  const SubPolicy rotate_invert{{OpKind::Rotate, 0.2, 0.4}, {OpKind::Invert, 0.6, 1.0}};
  const std::vector<std::pair<SubPolicy, bool>> one{{rotate_invert, true},
                                                    {{{OpKind::Equalize, 1, 1}, {OpKind::Equalize, 1, 1}}, false}};
  const SubPolicyStats stats = record_subpolicy_stats(one, 3);
  CHECK(stats.epoch == 3U);
  CHECK(stats.chosen_subpolicies == 1U);
  CHECK(stats.op_frequency[static_cast<std::size_t>(OpKind::Rotate)] == 0.5);
  CHECK(stats.op_frequency[static_cast<std::size_t>(OpKind::Invert)] == 0.5);
  CHECK(stats.op_frequency[static_cast<std::size_t>(OpKind::Equalize)] == 0.0);
  CHECK(stats.mean_applied_p == doctest::Approx(0.4));
  CHECK(stats.mean_m == doctest::Approx(0.7));

  const std::vector<std::pair<SubPolicy, bool>> none{{rotate_invert, false}};
  CHECK_THROWS_AS(record_subpolicy_stats(none, 0), InvalidArgument);
}

TEST_CASE("uniformly selected sub-policies give uniform frequencies") {
  RandomStream rng(16);
  std::vector<std::pair<SubPolicy, bool>> selections;
  for (int i = 0; i < 20000; ++i) {
    const SubPolicy t = sample_subpolicy(rng);
    selections.emplace_back(t, rng.bernoulli(0.5));
  }
  const SubPolicyStats stats = record_subpolicy_stats(selections, 0);
  CHECK(stats.chosen_subpolicies >= 10000U);
  double total = 0;
  for (double f : stats.op_frequency) {
    total += f;
    CHECK(std::abs(f - 1.0 / 16.0) <= 0.01);
  }
  CHECK(std::abs(total - 1.0) <= 1e-9);
}

TEST_CASE("metrics writers") {
  std::vector<MetricsRecord> records(2);
  records[0] = {0, 1, "loss", 0.25, {{"strategy", "divaug"}}};
  records[1] = {1, 2, "note", 3.0, {{"a", "x,y"}, {"b", "plain"}}};

  std::ostringstream jsonl;
  write_metrics_jsonl(records, jsonl);
  std::istringstream lines(jsonl.str());
  std::string line;
  std::vector<nlohmann::json> parsed;
  while (std::getline(lines, line)) parsed.push_back(nlohmann::json::parse(line));
  REQUIRE(parsed.size() == 2U);
  CHECK(parsed[0]["metric"] == "loss");
  CHECK(parsed[0]["value"].get<double>() == 0.25);
  CHECK(parsed[0]["context"]["strategy"] == "divaug");
  CHECK(parsed[1]["step"] == 2);

  std::ostringstream csv;
  write_metrics_csv(records, csv);
  CHECK(csv.str() == "epoch,step,metric,value,context\n0,1,loss,0.25,strategy=divaug\n1,2,note,3,\"a=x,y;b=plain\"\n");

  std::vector<MetricsRecord> bad{{0, 0, "loss", std::nan(""), {}}};
  std::ostringstream sink;
  CHECK_THROWS_AS(write_metrics_jsonl(bad, sink), InvalidArgument);

  SubPolicyStats stats;
  stats.op_frequency[0] = 1.0;
  std::ostringstream stats_csv;
  write_subpolicy_stats_csv(std::vector<SubPolicyStats>{stats}, stats_csv);
  std::istringstream stats_lines(stats_csv.str());
  std::string header, row;
  std::getline(stats_lines, header);
  std::getline(stats_lines, row);
  CHECK(header.rfind("epoch,freq_Sharpness,freq_ShearX", 0) == 0);
  CHECK(std::count(header.begin(), header.end(), ',') == 18);
  CHECK(std::count(row.begin(), row.end(), ',') == 18);
}

TEST_CASE("format_number is the shortest round-trip form") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(1.0) == "1");
  CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
}
