#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>

#include "divaug/oracle.hpp"
#include "divaug/strategy.hpp"

namespace divaug {

/// Training run settings. The config file is flat `key = value` text whose
/// keys are exactly the field names below; '#' starts a comment and unknown
/// keys are errors.
struct RunConfig {
  std::string dataset = "synthetic";  ///< see load_dataset
  std::string test_dataset;           ///< optional held-out split
  std::size_t E = 8;
  std::size_t S = 4;
  std::size_t epochs = 10;
  std::size_t batch_size = 32;
  double lr = 0.05;
  double weight_decay = 5e-4;
  std::uint64_t seed = 0;
  Strategy strategy = Strategy::DivAug;
  std::string output_dir;
  ModelKind model = ModelKind::Mlp;
  int hidden_units = 64;
  std::string default_augment = "auto";  ///< auto | none | cifar | svhn | synthetic
  std::size_t workers = 1;

  /// Throws ConfigError.
  void validate() const;
};

/// Sets one field from its textual value; throws ConfigError for unknown keys
/// or unparsable values.
void set_config_value(RunConfig& config, const std::string& key, const std::string& value);

/// Reads key = value lines on top of `base`.
RunConfig parse_config(std::istream& in, RunConfig base = {});
RunConfig load_config_file(const std::string& path, RunConfig base = {});

/// Canonical key = value rendering, one key per line.
std::string to_config_text(const RunConfig& config);

}  // namespace divaug
