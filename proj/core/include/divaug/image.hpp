#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace divaug {

/// Fixed-shape H x W x C raster, 8 bits per channel, row-major with
/// interleaved channels: index = (y * width + x) * channels + c.
struct Image {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<std::uint8_t> pixels;

  Image() = default;
  /// channels must be 1 or 3; height and width positive.
  Image(int height, int width, int channels, std::uint8_t fill = 0);

  [[nodiscard]] std::size_t size() const { return pixels.size(); }

  [[nodiscard]] std::size_t index(int y, int x, int c) const {
    return (static_cast<std::size_t>(y) * width + x) * channels + c;
  }
  std::uint8_t& at(int y, int x, int c) { return pixels[index(y, x, c)]; }
  [[nodiscard]] std::uint8_t at(int y, int x, int c) const { return pixels[index(y, x, c)]; }

  [[nodiscard]] bool same_shape(const Image& other) const {
    return height == other.height && width == other.width && channels == other.channels;
  }

  /// Throws InvalidArgument when the buffer length disagrees with the shape.
  void validate() const;

  friend bool operator==(const Image&, const Image&) = default;
};

}  // namespace divaug
