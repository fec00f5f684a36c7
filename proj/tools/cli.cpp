#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "divaug/config.hpp"
#include "divaug/dataset.hpp"
#include "divaug/error.hpp"
#include "divaug/metrics.hpp"
#include "divaug/oracle.hpp"
#include "divaug/pipeline.hpp"
#include "divaug/policy.hpp"
#include "divaug/selection.hpp"

namespace divaug::cli {
namespace {

namespace fs = std::filesystem;

std::string join_indices(const std::vector<std::size_t>& indices) {
  std::string out;
  for (std::size_t i : indices) {
    if (!out.empty()) out += ',';
    out += std::to_string(i);
  }
  return out;
}

/// Rows of comma-separated reals; blank lines, '#' comments and a
/// non-numeric header row are skipped.
std::vector<ProbVector> read_vectors_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("select-demo: cannot open " + path);
  std::vector<ProbVector> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    std::string cell;
    ProbVector row;
    bool numeric = true;
    while (std::getline(fields, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t\r", used) != std::string::npos) numeric = false;
      } catch (const std::logic_error&) {
        numeric = false;
      }
    }
    if (!numeric) {
      if (rows.empty() && line_no == 1) continue;
      throw FormatError("select-demo: non-numeric value on line " + std::to_string(line_no));
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw FormatError("select-demo: line " + std::to_string(line_no) + " has a different dimension");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw FormatError("select-demo: no vectors in " + path);
  return rows;
}

struct TrainFlags {
  std::string config_path;
  RunConfig overrides;
};

int run_train(const TrainFlags& flags, CLI::App& cmd, std::ostream& out) {
  RunConfig config;
  if (!flags.config_path.empty()) config = load_config_file(flags.config_path);
  const auto given = [&cmd](const char* name) { return cmd.count(name) > 0; };
  const RunConfig& o = flags.overrides;
  if (given("--seed")) config.seed = o.seed;
  if (given("--output-dir")) config.output_dir = o.output_dir;
  if (given("--epochs")) config.epochs = o.epochs;
  if (given("--E")) config.E = o.E;
  if (given("--S")) config.S = o.S;
  if (given("--batch-size")) config.batch_size = o.batch_size;
  if (given("--lr")) config.lr = o.lr;
  if (given("--weight-decay")) config.weight_decay = o.weight_decay;
  if (given("--workers")) config.workers = o.workers;
  if (given("--dataset")) config.dataset = o.dataset;
  if (given("--test-dataset")) config.test_dataset = o.test_dataset;
  if (given("--strategy")) config.strategy = o.strategy;
  config.validate();

  const TrainResult result = train_with_divaug(config);
  out << "strategy " << to_string(config.strategy) << ", " << config.epochs << " epochs, "
      << result.counters.optimizer_steps << " steps\n";
  for (const auto& r : result.records) {
    if (r.epoch + 1 == config.epochs && (r.metric == "epoch_loss" || r.metric == "train_accuracy" ||
                                         r.metric == "test_accuracy")) {
      out << r.metric << " " << format_number(r.value) << "\n";
    }
  }
  if (!config.output_dir.empty()) out << "outputs written to " << config.output_dir << "\n";
  return kExitOk;
}

struct AugmentFlags {
  std::string dataset = "synthetic";
  std::string output_dir;
  std::size_t E = 8;
  std::uint64_t seed = 0;
  std::size_t limit = 16;
  std::string default_augment = "none";
};

int run_augment(const AugmentFlags& flags, std::ostream& out) {
  if (flags.output_dir.empty()) throw ConfigError("augment: --output-dir is required");
  if (flags.E < 1) throw ConfigError("augment: --E must be at least 1");
  RunConfig probe;
  probe.default_augment = flags.default_augment;
  probe.validate();
  const LoadedDataset data = load_dataset(flags.dataset);
  const auto kind = resolve_default_augment(probe, data.default_kind);

  fs::create_directories(flags.output_dir);
  std::ofstream manifest(fs::path(flags.output_dir) / "manifest.tsv");
  if (!manifest) throw Error("augment: cannot write manifest in " + flags.output_dir);
  manifest << "file\tsource\tlabel\tcandidate\tsubpolicy\n";
  const std::size_t count = std::min(flags.limit, data.split.size());
  const std::span<const Image> pool(data.split.images.data(), count);
  for (std::size_t i = 0; i < count; ++i) {
    const RandomStream stream = image_stream(flags.seed, 0, i);
    CandidateSet set = expand(data.split.images[i], flags.E, stream, pool, i);
    for (std::size_t j = 0; j < set.size(); ++j) {
      Image image = set.candidates[j].image;
      if (kind) {
        RandomStream aug = stream.fork(kDefaultAugmentDomain, j);
        image = default_augment(image, *kind, aug);
      }
      const std::string name = "img" + std::to_string(i) + "_cand" + std::to_string(j) +
                               (image.channels == 1 ? ".pgm" : ".ppm");
      write_pnm(image, (fs::path(flags.output_dir) / name).string());
      manifest << name << '\t' << i << '\t' << data.split.labels[i] << '\t' << j << '\t'
               << describe(set.candidates[j].policy) << '\n';
    }
  }
  out << "wrote " << count * flags.E << " images for " << count << " inputs to " << flags.output_dir << "\n";
  return kExitOk;
}

struct MeasureFlags {
  std::string checkpoint;
  std::string dataset = "synthetic";
  Strategy strategy = Strategy::DivAug;
  std::size_t k = 4;
  std::size_t E = 8;
  std::uint64_t seed = 0;
  std::size_t limit = 0;
  std::string default_augment = "auto";
  std::string output_dir;
};

int run_measure(const MeasureFlags& flags, std::ostream& out) {
  if (flags.checkpoint.empty()) throw ConfigError("measure: --checkpoint is required");
  if (flags.k < 2) throw ConfigError("measure: --k must be at least 2");
  if (flags.E < flags.k) throw ConfigError("measure: --E must be at least --k");
  RunConfig probe;
  probe.default_augment = flags.default_augment;
  probe.validate();

  const OracleModel model = load_checkpoint(flags.checkpoint);
  LoadedDataset data = load_dataset(flags.dataset);
  if (flags.limit > 0 && flags.limit < data.split.size()) {
    data.split.images.resize(flags.limit);
    data.split.labels.resize(flags.limit);
  }
  StrategyParams params;
  params.strategy = flags.strategy;
  params.expand_count = flags.E;
  params.select_count = flags.k;
  params.default_augment = resolve_default_augment(probe, data.default_kind);

  const auto& images = data.split.images;
  const auto& labels = data.split.labels;
  const ViewGenerator generator = strategy_generator(params, model, images);
  const RandomStream rng(flags.seed);
  const double vd = dataset_variance_diversity(model, images, generator, flags.k, rng);
  const double aff = affinity(model, images, labels, generator, rng);
  const double ld = dataset_loss_diversity(model, images, labels, generator, flags.k, rng);

  out << "strategy " << to_string(flags.strategy) << "\n"
      << "variance_diversity " << format_number(vd) << "\n"
      << "affinity " << format_number(aff) << "\n"
      << "loss_diversity " << format_number(ld) << "\n";

  if (!flags.output_dir.empty()) {
    fs::create_directories(flags.output_dir);
    std::vector<MetricsRecord> records;
    for (const auto& [name, value] : {std::pair{"variance_diversity", vd}, {"affinity", aff}, {"loss_diversity", ld}}) {
      MetricsRecord r;
      r.metric = name;
      r.value = value;
      r.context["strategy"] = std::string(to_string(flags.strategy));
      r.context["k"] = std::to_string(flags.k);
      records.push_back(r);
    }
    std::ofstream file(fs::path(flags.output_dir) / "measure.jsonl");
    write_metrics_jsonl(records, file);
  }
  return kExitOk;
}

struct SelectDemoFlags {
  std::string input;
  std::size_t S = 4;
  std::uint64_t seed = 0;
};

int run_select_demo(const SelectDemoFlags& flags, std::ostream& out) {
  if (flags.input.empty()) throw ConfigError("select-demo: --input is required");
  const std::vector<ProbVector> vectors = read_vectors_csv(flags.input);
  if (flags.S < 1 || flags.S > vectors.size()) {
    throw ConfigError("select-demo: need 1 <= S <= " + std::to_string(vectors.size()));
  }
  const RandomStream root(flags.seed);
  RandomStream kpp = root.fork(1);
  RandomStream uni = root.fork(2);
  const SelectionResult kmeans = kmeanspp_select(vectors, flags.S, kpp);
  const SelectionResult random = uniform_select(vectors, flags.S, uni);
  out << "vectors " << vectors.size() << ", S " << flags.S << "\n";
  out << "kmeans++    indices=" << join_indices(kmeans.chosen_indices)
      << " diversity=" << format_number(kmeans.diversity) << "\n";
  try {
    const SelectionResult brute = brute_force_max_variance(vectors, flags.S);
    out << "brute-force indices=" << join_indices(brute.chosen_indices)
        << " diversity=" << format_number(brute.diversity) << "\n";
  } catch (const InvalidArgument&) {
    out << "brute-force skipped (too many subsets)\n";
  }
  out << "random      indices=" << join_indices(random.chosen_indices)
      << " diversity=" << format_number(random.diversity) << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"divaug: diversity-maximising data augmentation"};
  app.require_subcommand(1);

  TrainFlags train;
  auto* train_cmd = app.add_subcommand("train", "train the oracle with the selected strategy");
  train_cmd->add_option("--config", train.config_path, "key = value run configuration");
  train_cmd->add_option("--seed", train.overrides.seed, "master seed");
  train_cmd->add_option("--output-dir", train.overrides.output_dir, "where metrics and checkpoint go");
  train_cmd->add_option("--epochs", train.overrides.epochs);
  train_cmd->add_option("--E", train.overrides.E, "candidates per image");
  train_cmd->add_option("--S", train.overrides.S, "selected candidates per image");
  train_cmd->add_option("--batch-size", train.overrides.batch_size);
  train_cmd->add_option("--lr", train.overrides.lr);
  train_cmd->add_option("--weight-decay", train.overrides.weight_decay);
  train_cmd->add_option("--workers", train.overrides.workers, "threads for expand/score");
  train_cmd->add_option("--dataset", train.overrides.dataset);
  train_cmd->add_option("--test-dataset", train.overrides.test_dataset);
  std::string train_strategy;
  train_cmd->add_option("--strategy", train_strategy, "divaug | random-select | default-only | identity");

  AugmentFlags augment;
  auto* augment_cmd = app.add_subcommand("augment", "write E augmented candidates per input image");
  augment_cmd->add_option("--dataset", augment.dataset);
  augment_cmd->add_option("--output-dir", augment.output_dir)->required();
  augment_cmd->add_option("--E", augment.E);
  augment_cmd->add_option("--seed", augment.seed);
  augment_cmd->add_option("--limit", augment.limit, "number of input images");
  augment_cmd->add_option("--default-augment", augment.default_augment, "none | auto | cifar | svhn | synthetic");

  MeasureFlags measure;
  std::string measure_strategy = "divaug";
  auto* measure_cmd = app.add_subcommand("measure", "variance diversity, affinity and loss diversity");
  measure_cmd->add_option("--checkpoint", measure.checkpoint)->required();
  measure_cmd->add_option("--dataset", measure.dataset);
  measure_cmd->add_option("--strategy", measure_strategy);
  measure_cmd->add_option("--k", measure.k, "views per image");
  measure_cmd->add_option("--E", measure.E, "candidates per image for expanding strategies");
  measure_cmd->add_option("--seed", measure.seed);
  measure_cmd->add_option("--limit", measure.limit, "use only the first N images");
  measure_cmd->add_option("--default-augment", measure.default_augment);
  measure_cmd->add_option("--output-dir", measure.output_dir);

  SelectDemoFlags demo;
  auto* demo_cmd = app.add_subcommand("select-demo", "compare k-means++, brute-force and random selection");
  demo_cmd->add_option("--input", demo.input, "CSV of probability vectors, one per row")->required();
  demo_cmd->add_option("--S", demo.S);
  demo_cmd->add_option("--seed", demo.seed);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitConfig;
  }

  try {
    if (*train_cmd) {
      if (train_cmd->count("--strategy") > 0) {
        const auto s = parse_strategy(train_strategy);
        if (!s) throw ConfigError("unknown strategy '" + train_strategy + "'");
        train.overrides.strategy = *s;
      }
      return run_train(train, *train_cmd, out);
    }
    if (*augment_cmd) return run_augment(augment, out);
    if (*measure_cmd) {
      const auto s = parse_strategy(measure_strategy);
      if (!s) throw ConfigError("unknown strategy '" + measure_strategy + "'");
      measure.strategy = *s;
      return run_measure(measure, out);
    }
    if (*demo_cmd) return run_select_demo(demo, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  err << app.help();
  return kExitConfig;
}

}  // namespace divaug::cli
