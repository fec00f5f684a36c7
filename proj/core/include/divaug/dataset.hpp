#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "divaug/image.hpp"
#include "divaug/imageops.hpp"

namespace divaug {

/// Labelled images; labels lie in [0, class_count).
struct DatasetSplit {
  std::vector<Image> images;
  std::vector<std::size_t> labels;
  int class_count = 0;

  [[nodiscard]] std::size_t size() const { return images.size(); }
  void validate() const;
};

// CIFAR-10 binary batches: records of 1 label byte followed by 3072 pixel
// bytes, the full 32x32 red plane, then green, then blue.
inline constexpr std::size_t kCifarRecordBytes = 3073;

DatasetSplit load_cifar10_binary(const std::string& path);
DatasetSplit read_cifar10_binary(std::istream& in);
void write_cifar10_binary(const DatasetSplit& split, std::ostream& out);

/// Binary PGM (P5, 1 channel) or PPM (P6, 3 channels) with maxval 255.
Image read_pnm(std::istream& in);
Image read_pnm(const std::string& path);
void write_pnm(const Image& image, std::ostream& out);
void write_pnm(const Image& image, const std::string& path);

/// Directory holding PNM files plus `manifest.txt` with one "filename label"
/// pair per line ('#' starts a comment).
DatasetSplit load_image_directory(const std::string& directory);

struct SyntheticSpec {
  int classes = 3;
  int samples_per_class = 200;
  int size = 32;
  int channels = 3;
  std::uint64_t seed = 1;
};

/// Maximum number of shape classes generate_synthetic knows how to draw.
inline constexpr int kSyntheticShapeCount = 6;

/// Deterministic labelled shapes: class k draws shape k (disk, square,
/// triangle, plus, ring, bar) at a random centre and scale in a random
/// foreground colour on a dark, noisy background.
DatasetSplit generate_synthetic(const SyntheticSpec& spec);

/// Dataset plus the default augmentation that suits it.
struct LoadedDataset {
  DatasetSplit split;
  DatasetKind default_kind = DatasetKind::Synthetic;
};

/// Parses "cifar10:<file>", "imagedir:<dir>" or
/// "synthetic[:classes=3,per_class=200,size=32,channels=3,seed=1]".
LoadedDataset load_dataset(const std::string& spec);
SyntheticSpec parse_synthetic_spec(const std::string& options);

}  // namespace divaug
