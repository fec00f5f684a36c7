#include "divaug/dataset.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "divaug/error.hpp"
#include "divaug/random.hpp"

namespace divaug {
namespace {

constexpr int kCifarSide = 32;
// Shape centre jitter as a fraction of the side.
constexpr double kJitter = 0.25;
constexpr int kCifarPlane = kCifarSide * kCifarSide;

std::string next_pnm_token(std::istream& in) {
  std::string token;
  int c = in.get();
  for (;;) {
    while (c != EOF && std::isspace(c)) c = in.get();
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
      continue;
    }
    break;
  }
  while (c != EOF && !std::isspace(c)) {
    token += static_cast<char>(c);
    c = in.get();
  }
  if (token.empty()) throw FormatError("pnm: truncated header");
  return token;
}

int parse_positive(const std::string& token, const char* what) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(token, &used);
    if (used == token.size() && v > 0) return v;
  } catch (const std::exception&) {
  }
  throw FormatError(std::string("invalid ") + what + ": " + token);
}

// Shape membership tests in coordinates relative to the centre, scaled by r.
bool inside_shape(int shape, double dx, double dy, double r) {
  const double u = dx / r;
  const double v = dy / r;
  switch (shape) {
    case 0:  // disk
      return u * u + v * v <= 1.0;
    case 1:  // square
      return std::abs(u) <= 0.8 && std::abs(v) <= 0.8;
    case 2:  // upward triangle
      return v <= 0.75 && v >= -1.0 && std::abs(u) <= (v + 1.0) * 0.6;
    case 3:  // plus
      return (std::abs(u) <= 0.3 && std::abs(v) <= 1.0) || (std::abs(v) <= 0.3 && std::abs(u) <= 1.0);
    case 4: {  // ring
      const double rr = u * u + v * v;
      return rr <= 1.0 && rr >= 0.45;
    }
    case 5:  // horizontal bar
      return std::abs(u) <= 1.0 && std::abs(v) <= 0.35;
    default:
      return false;
  }
}

}  // namespace

void DatasetSplit::validate() const {
  if (images.size() != labels.size()) throw InvalidArgument("DatasetSplit: image and label counts differ");
  for (std::size_t y : labels) {
    if (y >= static_cast<std::size_t>(class_count)) throw InvalidArgument("DatasetSplit: label out of range");
  }
}

DatasetSplit read_cifar10_binary(std::istream& in) {
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() % kCifarRecordBytes != 0) {
    throw FormatError("cifar10: truncated record (" + std::to_string(bytes.size()) + " bytes is not a multiple of " +
                      std::to_string(kCifarRecordBytes) + ")");
  }
  DatasetSplit split;
  split.class_count = 10;
  const std::size_t records = bytes.size() / kCifarRecordBytes;
  split.images.reserve(records);
  split.labels.reserve(records);
  for (std::size_t r = 0; r < records; ++r) {
    const unsigned char* rec = bytes.data() + r * kCifarRecordBytes;
    if (rec[0] > 9) throw FormatError("cifar10: label byte " + std::to_string(rec[0]) + " in record " + std::to_string(r));
    Image image(kCifarSide, kCifarSide, 3);
    for (int c = 0; c < 3; ++c) {
      for (int i = 0; i < kCifarPlane; ++i) image.pixels[static_cast<std::size_t>(i) * 3 + c] = rec[1 + c * kCifarPlane + i];
    }
    split.labels.push_back(rec[0]);
    split.images.push_back(std::move(image));
  }
  return split;
}

DatasetSplit load_cifar10_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cifar10: cannot open " + path);
  return read_cifar10_binary(in);
}

void write_cifar10_binary(const DatasetSplit& split, std::ostream& out) {
  split.validate();
  for (std::size_t r = 0; r < split.size(); ++r) {
    const Image& image = split.images[r];
    if (image.height != kCifarSide || image.width != kCifarSide || image.channels != 3 || split.labels[r] > 9) {
      throw InvalidArgument("cifar10: only 32x32x3 images with labels 0-9 can be written");
    }
    out.put(static_cast<char>(split.labels[r]));
    for (int c = 0; c < 3; ++c) {
      for (int i = 0; i < kCifarPlane; ++i) out.put(static_cast<char>(image.pixels[static_cast<std::size_t>(i) * 3 + c]));
    }
  }
}

Image read_pnm(std::istream& in) {
  const std::string magic = next_pnm_token(in);
  int channels = 0;
  if (magic == "P5") {
    channels = 1;
  } else if (magic == "P6") {
    channels = 3;
  } else {
    throw FormatError("pnm: unsupported magic " + magic + " (need P5 or P6)");
  }
  const int width = parse_positive(next_pnm_token(in), "width");
  const int height = parse_positive(next_pnm_token(in), "height");
  const int maxval = parse_positive(next_pnm_token(in), "maxval");
  if (maxval != 255) throw FormatError("pnm: only maxval 255 is supported");
  Image image(height, width, channels);
  if (!in.read(reinterpret_cast<char*>(image.pixels.data()), static_cast<std::streamsize>(image.size()))) {
    throw FormatError("pnm: truncated pixel data");
  }
  return image;
}

Image read_pnm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("pnm: cannot open " + path);
  return read_pnm(in);
}

void write_pnm(const Image& image, std::ostream& out) {
  image.validate();
  out << (image.channels == 1 ? "P5" : "P6") << '\n' << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()), static_cast<std::streamsize>(image.size()));
}

void write_pnm(const Image& image, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("pnm: cannot open " + path + " for writing");
  write_pnm(image, out);
}

DatasetSplit load_image_directory(const std::string& directory) {
  namespace fs = std::filesystem;
  const fs::path manifest = fs::path(directory) / "manifest.txt";
  std::ifstream in(manifest);
  if (!in) throw Error("imagedir: cannot open " + manifest.string());
  DatasetSplit split;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string name;
    long long label = -1;
    if (!(fields >> name)) continue;
    if (!(fields >> label) || label < 0) {
      throw FormatError("imagedir: manifest line " + std::to_string(line_no) + " needs 'filename label'");
    }
    split.images.push_back(read_pnm((fs::path(directory) / name).string()));
    split.labels.push_back(static_cast<std::size_t>(label));
    split.class_count = std::max(split.class_count, static_cast<int>(label) + 1);
  }
  for (const auto& image : split.images) {
    if (!image.same_shape(split.images.front())) throw FormatError("imagedir: images differ in shape");
  }
  split.class_count = std::max(split.class_count, 2);
  return split;
}

DatasetSplit generate_synthetic(const SyntheticSpec& spec) {
  if (spec.classes < 2 || spec.classes > kSyntheticShapeCount) {
    throw InvalidArgument("synthetic: classes must be in [2, " + std::to_string(kSyntheticShapeCount) + "]");
  }
  if (spec.size < 8) throw InvalidArgument("synthetic: image size must be at least 8");
  if (spec.samples_per_class < 1) throw InvalidArgument("synthetic: samples_per_class must be positive");
  if (spec.channels != 1 && spec.channels != 3) throw InvalidArgument("synthetic: channels must be 1 or 3");

  const RandomStream root(spec.seed);
  DatasetSplit split;
  split.class_count = spec.classes;
  const double size = spec.size;
  // Interleave classes so that prefixes of the dataset stay balanced.
  for (int i = 0; i < spec.samples_per_class; ++i) {
    for (int k = 0; k < spec.classes; ++k) {
      RandomStream rng = root.fork(static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(i));
      const double radius = size * (0.22 + 0.10 * rng.uniform());
      const double cy = size / 2.0 + (rng.uniform() - 0.5) * size * kJitter;
      const double cx = size / 2.0 + (rng.uniform() - 0.5) * size * kJitter;
      const double gray = 150.0 + 105.0 * rng.uniform();
      const double background = 10.0 + 60.0 * rng.uniform();
      std::array<double, 3> tint{};
      for (auto& t : tint) t = 0.85 + 0.15 * rng.uniform();

      Image image(spec.size, spec.size, spec.channels);
      for (int y = 0; y < spec.size; ++y) {
        for (int x = 0; x < spec.size; ++x) {
          const double dx = x - cx + 0.5, dy = y - cy + 0.5;
          const bool fg = inside_shape(k, dx, dy, radius);
          for (int c = 0; c < spec.channels; ++c) {
            const double base = fg ? gray * tint[c] : background;
            const double noisy = base + (rng.uniform() - 0.5) * 20.0;
            image.at(y, x, c) = static_cast<std::uint8_t>(std::clamp(std::floor(noisy + 0.5), 0.0, 255.0));
          }
        }
      }
      split.images.push_back(std::move(image));
      split.labels.push_back(static_cast<std::size_t>(k));
    }
  }
  return split;
}

SyntheticSpec parse_synthetic_spec(const std::string& options) {
  SyntheticSpec spec;
  std::istringstream in(options);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("synthetic: expected key=value, got '" + item + "'");
    const std::string key = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    try {
      if (key == "classes") {
        spec.classes = std::stoi(value);
      } else if (key == "per_class") {
        spec.samples_per_class = std::stoi(value);
      } else if (key == "size") {
        spec.size = std::stoi(value);
      } else if (key == "channels") {
        spec.channels = std::stoi(value);
      } else if (key == "seed") {
        spec.seed = std::stoull(value);
      } else {
        throw ConfigError("synthetic: unknown option '" + key + "'");
      }
    } catch (const std::logic_error&) {
      throw ConfigError("synthetic: bad value for '" + key + "': " + value);
    }
  }
  return spec;
}

LoadedDataset load_dataset(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string scheme = spec.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (scheme == "synthetic") {
    return {generate_synthetic(parse_synthetic_spec(rest)), DatasetKind::Synthetic};
  }
  if (scheme == "cifar10") {
    if (rest.empty()) throw ConfigError("dataset: cifar10 needs a file path");
    return {load_cifar10_binary(rest), DatasetKind::Cifar};
  }
  if (scheme == "imagedir") {
    if (rest.empty()) throw ConfigError("dataset: imagedir needs a directory");
    return {load_image_directory(rest), DatasetKind::Synthetic};
  }
  throw ConfigError("dataset: unknown source '" + spec + "' (expected cifar10:, imagedir: or synthetic)");
}

}  // namespace divaug
