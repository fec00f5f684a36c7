#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

#include "divaug/image.hpp"
#include "divaug/random.hpp"

namespace divaug {

/// The 16 operations of the augmentation search space.
enum class OpKind : std::uint8_t {
  Sharpness,
  ShearX,
  ShearY,
  TranslateX,
  TranslateY,
  Rotate,
  AutoContrast,
  Invert,
  Equalize,
  Solarize,
  Posterize,
  Color,
  Brightness,
  Cutout,
  SamplePairing,
  Contrast,
};

inline constexpr std::size_t kOpKindCount = 16;

inline constexpr std::array<OpKind, kOpKindCount> kAllOpKinds = {
    OpKind::Sharpness,  OpKind::ShearX,       OpKind::ShearY,   OpKind::TranslateX,
    OpKind::TranslateY, OpKind::Rotate,       OpKind::AutoContrast, OpKind::Invert,
    OpKind::Equalize,   OpKind::Solarize,     OpKind::Posterize, OpKind::Color,
    OpKind::Brightness, OpKind::Cutout,       OpKind::SamplePairing, OpKind::Contrast,
};

std::string_view to_string(OpKind kind);
std::optional<OpKind> parse_op_kind(std::string_view name);

/// Kinds whose magnitude carries a direction; apply_op draws the sign.
bool is_signed(OpKind kind);

/// Kinds that ignore the magnitude altogether.
bool ignores_magnitude(OpKind kind);

// Magnitude ranges at m = 1.
namespace magnitude {
inline constexpr double kMaxRotateDegrees = 30.0;
inline constexpr double kMaxShear = 0.3;
inline constexpr double kMaxTranslateFraction = 10.0 / 32.0;
inline constexpr double kMaxPosterizeBitsRemoved = 4.0;
inline constexpr double kMaxEnhance = 0.9;
inline constexpr double kMaxCutoutFraction = 0.625;
inline constexpr double kMaxSamplePairingWeight = 0.4;
}  // namespace magnitude

/// Fill value for pixels sampled from outside the source raster.
inline constexpr std::uint8_t kGeometricFill = 128;
/// Fill value inside a Cutout operation patch.
inline constexpr std::uint8_t kCutoutOpFill = 128;

/// One search-space atom: kind plus probability p and magnitude m, both in
/// [0, 1].
struct Operation {
  OpKind kind = OpKind::Invert;
  double p = 0.0;
  double m = 0.0;

  [[nodiscard]] bool valid() const { return p >= 0.0 && p <= 1.0 && m >= 0.0 && m <= 1.0; }
  friend bool operator==(const Operation&, const Operation&) = default;
};

/// Patch centre for Cutout, as fractions of height and width. apply_op draws
/// it; direct callers get the image centre.
struct Placement {
  double center_y = 0.5;
  double center_x = 0.5;
};

/// Deterministic transform for `kind` at `signed_magnitude` in [-1, 1].
/// Unsigned kinds use |signed_magnitude|. `partner` is required for
/// SamplePairing and ignored otherwise.
Image apply_transform(OpKind kind, const Image& image, double signed_magnitude,
                      const Image* partner = nullptr, Placement placement = {});

/// Stochastic gate: with probability op.p applies the transform, otherwise
/// returns the input. Draw order on `rng`: one Bernoulli gate; if applied, one
/// sign draw for signed kinds, then two placement draws for Cutout. Nothing
/// else is consumed.
Image apply_op(const Operation& op, const Image& image, RandomStream& rng,
               const Image* partner = nullptr);

// Kernels exposed for the default augmentation and for tests.

/// Zero-pads by `pad` on every side and crops an image of the original size
/// whose top-left corner sits at (offset_y, offset_x) in padded coordinates.
Image pad_and_crop(const Image& image, int pad, int offset_y, int offset_x);

Image flip_horizontal(const Image& image);

/// Fills the side x side square centred at (center_y, center_x), clipped to the
/// raster.
Image erase_patch(const Image& image, int center_y, int center_x, int side, std::uint8_t fill);

enum class DatasetKind { Cifar, Svhn, Synthetic };

std::string_view to_string(DatasetKind kind);
std::optional<DatasetKind> parse_dataset_kind(std::string_view name);

/// Random draws made by one default_augment call.
struct DefaultAugmentDraw {
  int offset_y = 0;
  int offset_x = 0;
  bool flipped = false;
  int cutout_center_y = 0;
  int cutout_center_x = 0;
  int cutout_side = 0;
  int pad = 0;
};

/// Pad-and-crop, optional horizontal flip, then a zeroed Cutout patch. CIFAR
/// and SVHN expect 32x32x3 (pad 4, patch 16); synthetic images of any size use
/// pad = round(side / 8) and patch = round(side / 2).
Image default_augment(const Image& image, DatasetKind kind, RandomStream& rng,
                      DefaultAugmentDraw* draw = nullptr);

}  // namespace divaug
