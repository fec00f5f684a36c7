#include "divaug/config.hpp"

#include <fstream>
#include <istream>
#include <sstream>

#include "divaug/error.hpp"
#include "divaug/imageops.hpp"
#include "divaug/metrics.hpp"

namespace divaug {
namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& value) {
  if (value.empty() || value.find_first_not_of("0123456789") != std::string::npos) {
    throw ConfigError("config: " + key + " must be a non-negative integer, got '" + value + "'");
  }
  try {
    return std::stoull(value);
  } catch (const std::out_of_range&) {
    throw ConfigError("config: " + key + " is out of range");
  }
}

double parse_real(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used == value.size()) return v;
  } catch (const std::logic_error&) {
  }
  throw ConfigError("config: " + key + " must be a number, got '" + value + "'");
}

}  // namespace

void RunConfig::validate() const {
  if (S < 1 || S > E) throw ConfigError("config: need 1 <= S <= E (S=" + std::to_string(S) + ", E=" + std::to_string(E) + ")");
  if (batch_size < 1) throw ConfigError("config: batch_size must be at least 1");
  if (epochs < 1) throw ConfigError("config: epochs must be at least 1");
  if (!(lr >= 0.0)) throw ConfigError("config: lr must be non-negative");
  if (!(weight_decay >= 0.0)) throw ConfigError("config: weight_decay must be non-negative");
  if (model == ModelKind::Mlp && hidden_units < 1) throw ConfigError("config: hidden_units must be positive");
  if (workers < 1) throw ConfigError("config: workers must be at least 1");
  if (dataset.empty()) throw ConfigError("config: dataset is required");
  if (default_augment != "auto" && default_augment != "none" && !parse_dataset_kind(default_augment)) {
    throw ConfigError("config: default_augment must be auto, none, cifar, svhn or synthetic");
  }
}

void set_config_value(RunConfig& c, const std::string& key, const std::string& value) {
  if (key == "dataset") {
    c.dataset = value;
  } else if (key == "test_dataset") {
    c.test_dataset = value;
  } else if (key == "E") {
    c.E = parse_unsigned(key, value);
  } else if (key == "S") {
    c.S = parse_unsigned(key, value);
  } else if (key == "epochs") {
    c.epochs = parse_unsigned(key, value);
  } else if (key == "batch_size") {
    c.batch_size = parse_unsigned(key, value);
  } else if (key == "lr") {
    c.lr = parse_real(key, value);
  } else if (key == "weight_decay") {
    c.weight_decay = parse_real(key, value);
  } else if (key == "seed") {
    c.seed = parse_unsigned(key, value);
  } else if (key == "strategy") {
    const auto s = parse_strategy(value);
    if (!s) throw ConfigError("config: unknown strategy '" + value + "'");
    c.strategy = *s;
  } else if (key == "output_dir") {
    c.output_dir = value;
  } else if (key == "model") {
    if (value == "mlp") {
      c.model = ModelKind::Mlp;
    } else if (value == "linear") {
      c.model = ModelKind::Linear;
    } else {
      throw ConfigError("config: model must be mlp or linear");
    }
  } else if (key == "hidden_units") {
    c.hidden_units = static_cast<int>(parse_unsigned(key, value));
  } else if (key == "default_augment") {
    c.default_augment = value;
  } else if (key == "workers") {
    c.workers = parse_unsigned(key, value);
  } else {
    throw ConfigError("config: unknown key '" + key + "'");
  }
}

RunConfig parse_config(std::istream& in, RunConfig base) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config: line " + std::to_string(line_no) + " is not key = value");
    set_config_value(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return base;
}

RunConfig load_config_file(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  return parse_config(in, std::move(base));
}

std::string to_config_text(const RunConfig& c) {
  std::ostringstream out;
  out << "dataset = " << c.dataset << '\n'
      << "test_dataset = " << c.test_dataset << '\n'
      << "E = " << c.E << '\n'
      << "S = " << c.S << '\n'
      << "epochs = " << c.epochs << '\n'
      << "batch_size = " << c.batch_size << '\n'
      << "lr = " << format_number(c.lr) << '\n'
      << "weight_decay = " << format_number(c.weight_decay) << '\n'
      << "seed = " << c.seed << '\n'
      << "strategy = " << to_string(c.strategy) << '\n'
      << "output_dir = " << c.output_dir << '\n'
      << "model = " << to_string(c.model) << '\n'
      << "hidden_units = " << c.hidden_units << '\n'
      << "default_augment = " << c.default_augment << '\n';
  return out.str();
}

}  // namespace divaug
