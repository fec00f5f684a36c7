#include "divaug/imageops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "divaug/error.hpp"

namespace divaug {
namespace {

constexpr std::array<std::string_view, kOpKindCount> kOpNames = {
    "Sharpness",  "ShearX",     "ShearY",   "TranslateX", "TranslateY",    "Rotate",
    "AutoContrast", "Invert",   "Equalize", "Solarize",   "Posterize",     "Color",
    "Brightness", "Cutout",     "SamplePairing", "Contrast",
};

std::uint8_t to_u8(double v) {
  const double r = std::floor(v + 0.5);
  return static_cast<std::uint8_t>(std::clamp(r, 0.0, 255.0));
}

int round_to_int(double v) { return static_cast<int>(std::floor(v + 0.5)); }

// Nearest-neighbour resampling. `source` maps output (y, x) to input
// coordinates; samples outside the raster take kGeometricFill.
template <typename Map>
Image resample(const Image& image, Map source) {
  Image out(image.height, image.width, image.channels);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      const auto [sy, sx] = source(static_cast<double>(y), static_cast<double>(x));
      const int iy = round_to_int(sy);
      const int ix = round_to_int(sx);
      const bool inside = iy >= 0 && iy < image.height && ix >= 0 && ix < image.width;
      for (int c = 0; c < image.channels; ++c) {
        out.at(y, x, c) = inside ? image.at(iy, ix, c) : kGeometricFill;
      }
    }
  }
  return out;
}

Image rotate(const Image& image, double degrees) {
  const double theta = degrees * std::numbers::pi / 180.0;
  const double cs = std::cos(theta);
  const double sn = std::sin(theta);
  const double cy = (image.height - 1) / 2.0;
  const double cx = (image.width - 1) / 2.0;
  // Positive angles turn content counter-clockwise on screen (y grows down).
  return resample(image, [&](double y, double x) {
    const double dy = y - cy;
    const double dx = x - cx;
    return std::pair{cy + sn * dx + cs * dy, cx + cs * dx - sn * dy};
  });
}

Image shear_x(const Image& image, double factor) {
  const double cy = (image.height - 1) / 2.0;
  return resample(image, [&](double y, double x) { return std::pair{y, x + factor * (y - cy)}; });
}

Image shear_y(const Image& image, double factor) {
  const double cx = (image.width - 1) / 2.0;
  return resample(image, [&](double y, double x) { return std::pair{y + factor * (x - cx), x}; });
}

Image translate(const Image& image, int dy, int dx) {
  return resample(image, [&](double y, double x) { return std::pair{y - dy, x - dx}; });
}

template <typename F>
Image map_values(const Image& image, F f) {
  Image out = image;
  for (auto& v : out.pixels) v = f(v);
  return out;
}

Image posterize(const Image& image, int bits) {
  const auto mask = static_cast<std::uint8_t>((0xFF << (8 - bits)) & 0xFF);
  return map_values(image, [mask](std::uint8_t v) { return static_cast<std::uint8_t>(v & mask); });
}

Image solarize(const Image& image, double threshold) {
  return map_values(image, [threshold](std::uint8_t v) {
    return static_cast<double>(v) >= threshold ? static_cast<std::uint8_t>(255 - v) : v;
  });
}

Image auto_contrast(const Image& image) {
  Image out = image;
  const std::size_t count = static_cast<std::size_t>(image.height) * image.width;
  for (int c = 0; c < image.channels; ++c) {
    int lo = 255;
    int hi = 0;
    for (std::size_t i = 0; i < count; ++i) {
      const int v = image.pixels[i * image.channels + c];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (hi <= lo || (lo == 0 && hi == 255)) continue;
    // Exact round-half-up of 255 (v - lo) / (hi - lo).
    const int range = hi - lo;
    for (std::size_t i = 0; i < count; ++i) {
      auto& v = out.pixels[i * image.channels + c];
      v = static_cast<std::uint8_t>((2 * 255 * (v - lo) + range) / (2 * range));
    }
  }
  return out;
}

// Per-channel CDF lookup: a level maps to floor(256 * below / n), where `below`
// counts pixels strictly darker. Merged levels keep their lower neighbours'
// counts, so a second pass reproduces the first exactly.
Image equalize(const Image& image) {
  Image out = image;
  const std::size_t count = static_cast<std::size_t>(image.height) * image.width;
  for (int c = 0; c < image.channels; ++c) {
    std::array<std::size_t, 256> hist{};
    for (std::size_t i = 0; i < count; ++i) ++hist[image.pixels[i * image.channels + c]];
    if (std::count_if(hist.begin(), hist.end(), [](std::size_t h) { return h != 0; }) <= 1) continue;
    std::array<std::uint8_t, 256> lut{};
    std::size_t below = 0;
    for (int level = 0; level < 256; ++level) {
      lut[level] = static_cast<std::uint8_t>((256 * below) / count);
      below += hist[level];
    }
    for (std::size_t i = 0; i < count; ++i) {
      auto& v = out.pixels[i * image.channels + c];
      v = lut[v];
    }
  }
  return out;
}

int gray_level(const Image& image, int y, int x) {
  if (image.channels == 1) return image.at(y, x, 0);
  return (299 * image.at(y, x, 0) + 587 * image.at(y, x, 1) + 114 * image.at(y, x, 2) + 500) / 1000;
}

// out = degenerate + factor * (image - degenerate), clamped.
Image blend(const Image& degenerate, const Image& image, double factor) {
  Image out(image.height, image.width, image.channels);
  for (std::size_t i = 0; i < image.size(); ++i) {
    const double d = degenerate.pixels[i];
    out.pixels[i] = to_u8(d + factor * (image.pixels[i] - d));
  }
  return out;
}

Image enhance_color(const Image& image, double factor) {
  if (image.channels == 1) return image;
  Image gray(image.height, image.width, image.channels);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      const auto l = static_cast<std::uint8_t>(gray_level(image, y, x));
      for (int c = 0; c < image.channels; ++c) gray.at(y, x, c) = l;
    }
  }
  return blend(gray, image, factor);
}

Image enhance_contrast(const Image& image, double factor) {
  double sum = 0.0;
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) sum += gray_level(image, y, x);
  }
  const auto mean = to_u8(sum / (static_cast<double>(image.height) * image.width));
  return blend(Image(image.height, image.width, image.channels, mean), image, factor);
}

Image enhance_brightness(const Image& image, double factor) {
  return blend(Image(image.height, image.width, image.channels, 0), image, factor);
}

// Degenerate image is the 3x3 smooth (centre weight 5, total 13); border
// pixels are left as they are.
Image enhance_sharpness(const Image& image, double factor) {
  Image smooth = image;
  for (int y = 1; y + 1 < image.height; ++y) {
    for (int x = 1; x + 1 < image.width; ++x) {
      for (int c = 0; c < image.channels; ++c) {
        int acc = 0;
        for (int ky = -1; ky <= 1; ++ky) {
          for (int kx = -1; kx <= 1; ++kx) {
            acc += image.at(y + ky, x + kx, c) * ((ky == 0 && kx == 0) ? 5 : 1);
          }
        }
        smooth.at(y, x, c) = to_u8(acc / 13.0);
      }
    }
  }
  return blend(smooth, image, factor);
}

Image sample_pairing(const Image& image, const Image& partner, double weight) {
  Image out(image.height, image.width, image.channels);
  for (std::size_t i = 0; i < image.size(); ++i) {
    out.pixels[i] = to_u8((1.0 - weight) * image.pixels[i] + weight * partner.pixels[i]);
  }
  return out;
}

}  // namespace

std::string_view to_string(OpKind kind) { return kOpNames[static_cast<std::size_t>(kind)]; }

std::optional<OpKind> parse_op_kind(std::string_view name) {
  for (std::size_t i = 0; i < kOpKindCount; ++i) {
    if (kOpNames[i] == name) return kAllOpKinds[i];
  }
  return std::nullopt;
}

bool is_signed(OpKind kind) {
  switch (kind) {
    case OpKind::Rotate:
    case OpKind::ShearX:
    case OpKind::ShearY:
    case OpKind::TranslateX:
    case OpKind::TranslateY:
    case OpKind::Color:
    case OpKind::Contrast:
    case OpKind::Brightness:
    case OpKind::Sharpness:
      return true;
    default:
      return false;
  }
}

bool ignores_magnitude(OpKind kind) {
  return kind == OpKind::AutoContrast || kind == OpKind::Invert || kind == OpKind::Equalize;
}

Image apply_transform(OpKind kind, const Image& image, double signed_magnitude, const Image* partner,
                      Placement placement) {
  image.validate();
  if (!(std::abs(signed_magnitude) <= 1.0)) {
    throw InvalidArgument("apply_transform: magnitude " + std::to_string(signed_magnitude) +
                          " outside [-1, 1]");
  }
  const double s = signed_magnitude;
  const double m = std::abs(s);

  switch (kind) {
    case OpKind::Rotate:
      if (s == 0.0) return image;
      return rotate(image, magnitude::kMaxRotateDegrees * s);
    case OpKind::ShearX:
      if (s == 0.0) return image;
      return shear_x(image, magnitude::kMaxShear * s);
    case OpKind::ShearY:
      if (s == 0.0) return image;
      return shear_y(image, magnitude::kMaxShear * s);
    case OpKind::TranslateX:
      return translate(image, 0, round_to_int(magnitude::kMaxTranslateFraction * image.width * s));
    case OpKind::TranslateY:
      return translate(image, round_to_int(magnitude::kMaxTranslateFraction * image.height * s), 0);
    case OpKind::AutoContrast:
      return auto_contrast(image);
    case OpKind::Invert:
      return map_values(image, [](std::uint8_t v) { return static_cast<std::uint8_t>(255 - v); });
    case OpKind::Equalize:
      return equalize(image);
    case OpKind::Solarize:
      return solarize(image, 256.0 * (1.0 - m));
    case OpKind::Posterize:
      return posterize(image, 8 - round_to_int(magnitude::kMaxPosterizeBitsRemoved * m));
    case OpKind::Color:
    case OpKind::Contrast:
    case OpKind::Brightness:
    case OpKind::Sharpness: {
      const double factor = 1.0 + magnitude::kMaxEnhance * s;
      if (factor == 1.0) return image;
      if (kind == OpKind::Color) return enhance_color(image, factor);
      if (kind == OpKind::Contrast) return enhance_contrast(image, factor);
      if (kind == OpKind::Brightness) return enhance_brightness(image, factor);
      return enhance_sharpness(image, factor);
    }
    case OpKind::Cutout: {
      const int side =
          round_to_int(magnitude::kMaxCutoutFraction * m * std::min(image.height, image.width));
      if (side == 0) return image;
      const int cy = std::clamp(static_cast<int>(placement.center_y * image.height), 0, image.height - 1);
      const int cx = std::clamp(static_cast<int>(placement.center_x * image.width), 0, image.width - 1);
      return erase_patch(image, cy, cx, side, kCutoutOpFill);
    }
    case OpKind::SamplePairing:
      if (partner == nullptr) throw InvalidArgument("SamplePairing requires a partner image");
      if (!partner->same_shape(image) || partner->size() != image.size()) {
        throw InvalidArgument("SamplePairing partner shape differs from the image");
      }
      return sample_pairing(image, *partner, magnitude::kMaxSamplePairingWeight * m);
  }
  throw InvalidArgument("apply_transform: unknown operation kind");
}

Image apply_op(const Operation& op, const Image& image, RandomStream& rng, const Image* partner) {
  if (!op.valid()) throw InvalidArgument("apply_op: p and m must lie in [0, 1]");
  if (!rng.bernoulli(op.p)) return image;
  double s = op.m;
  if (is_signed(op.kind)) s *= rng.sign();
  Placement placement;
  if (op.kind == OpKind::Cutout) {
    placement.center_y = rng.uniform();
    placement.center_x = rng.uniform();
  }
  return apply_transform(op.kind, image, s, partner, placement);
}

Image pad_and_crop(const Image& image, int pad, int offset_y, int offset_x) {
  image.validate();
  if (pad < 0 || offset_y < 0 || offset_x < 0 || offset_y > 2 * pad || offset_x > 2 * pad) {
    throw InvalidArgument("pad_and_crop: crop window outside the padded image");
  }
  Image out(image.height, image.width, image.channels, 0);
  for (int y = 0; y < image.height; ++y) {
    const int sy = y + offset_y - pad;
    if (sy < 0 || sy >= image.height) continue;
    for (int x = 0; x < image.width; ++x) {
      const int sx = x + offset_x - pad;
      if (sx < 0 || sx >= image.width) continue;
      for (int c = 0; c < image.channels; ++c) out.at(y, x, c) = image.at(sy, sx, c);
    }
  }
  return out;
}

Image flip_horizontal(const Image& image) {
  Image out(image.height, image.width, image.channels);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      for (int c = 0; c < image.channels; ++c) out.at(y, x, c) = image.at(y, image.width - 1 - x, c);
    }
  }
  return out;
}

Image erase_patch(const Image& image, int center_y, int center_x, int side, std::uint8_t fill) {
  Image out = image;
  const int y0 = std::max(0, center_y - side / 2);
  const int y1 = std::min(image.height, center_y - side / 2 + side);
  const int x0 = std::max(0, center_x - side / 2);
  const int x1 = std::min(image.width, center_x - side / 2 + side);
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) {
      for (int c = 0; c < image.channels; ++c) out.at(y, x, c) = fill;
    }
  }
  return out;
}

std::string_view to_string(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::Cifar:
      return "cifar";
    case DatasetKind::Svhn:
      return "svhn";
    case DatasetKind::Synthetic:
      return "synthetic";
  }
  return "unknown";
}

std::optional<DatasetKind> parse_dataset_kind(std::string_view name) {
  if (name == "cifar") return DatasetKind::Cifar;
  if (name == "svhn") return DatasetKind::Svhn;
  if (name == "synthetic") return DatasetKind::Synthetic;
  return std::nullopt;
}

Image default_augment(const Image& image, DatasetKind kind, RandomStream& rng, DefaultAugmentDraw* draw) {
  image.validate();
  int pad = 4;
  int side = 16;
  if (kind == DatasetKind::Synthetic) {
    const int extent = std::min(image.height, image.width);
    if (extent < 4) throw InvalidArgument("default_augment: synthetic images must be at least 4x4");
    pad = round_to_int(extent / 8.0);
    side = round_to_int(extent / 2.0);
  } else if (image.height != 32 || image.width != 32 || image.channels != 3) {
    throw InvalidArgument("default_augment: " + std::string(to_string(kind)) + " expects 32x32x3 images");
  }

  DefaultAugmentDraw d;
  d.pad = pad;
  d.cutout_side = side;
  d.offset_y = static_cast<int>(rng.uniform_index(2 * pad + 1));
  d.offset_x = static_cast<int>(rng.uniform_index(2 * pad + 1));
  if (kind != DatasetKind::Svhn) d.flipped = rng.bernoulli(0.5);
  d.cutout_center_y = static_cast<int>(rng.uniform_index(image.height));
  d.cutout_center_x = static_cast<int>(rng.uniform_index(image.width));

  Image out = pad_and_crop(image, pad, d.offset_y, d.offset_x);
  if (d.flipped) out = flip_horizontal(out);
  out = erase_patch(out, d.cutout_center_y, d.cutout_center_x, side, 0);
  if (draw != nullptr) *draw = d;
  return out;
}

}  // namespace divaug
