#include "divaug/image.hpp"

#include <string>

#include "divaug/error.hpp"

namespace divaug {

Image::Image(int h, int w, int c, std::uint8_t fill) : height(h), width(w), channels(c) {
  if (h <= 0 || w <= 0) throw InvalidArgument("Image: non-positive dimensions");
  if (c != 1 && c != 3) throw InvalidArgument("Image: channels must be 1 or 3, got " + std::to_string(c));
  pixels.assign(static_cast<std::size_t>(h) * w * c, fill);
}

void Image::validate() const {
  if (height <= 0 || width <= 0 || (channels != 1 && channels != 3)) {
    throw InvalidArgument("Image: invalid shape " + std::to_string(height) + "x" +
                          std::to_string(width) + "x" + std::to_string(channels));
  }
  if (pixels.size() != static_cast<std::size_t>(height) * width * channels) {
    throw InvalidArgument("Image: pixel buffer length does not match shape");
  }
}

}  // namespace divaug
