#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "divaug/image.hpp"
#include "divaug/imageops.hpp"
#include "divaug/oracle.hpp"
#include "divaug/policy.hpp"
#include "divaug/random.hpp"

namespace divaug {

enum class Strategy {
  DivAug,        ///< expand E, score, k-means++ select S
  RandomSelect,  ///< expand E, score, uniform select S
  DefaultOnly,   ///< S default augmentations, no sub-policy
  Identity,      ///< the original image, once
};

std::string_view to_string(Strategy s);
std::optional<Strategy> parse_strategy(std::string_view name);

struct StrategyParams {
  Strategy strategy = Strategy::DivAug;
  std::size_t expand_count = 8;  ///< E
  std::size_t select_count = 4;  ///< S
  /// Default augmentation composed after the sub-policy; nullopt disables it.
  std::optional<DatasetKind> default_augment = DatasetKind::Synthetic;

  void validate() const;
};

/// Views produced for one source image.
struct AugmentedViews {
  std::vector<Image> images;
  /// Sub-policy per view; nullopt for views made without one.
  std::vector<std::optional<SubPolicy>> policies;
  /// Scores of the chosen views (empty for Identity).
  std::vector<ProbVector> probs;
  /// Every sampled sub-policy with its selected flag (expanding strategies).
  std::vector<std::pair<SubPolicy, bool>> sampled;
  double diversity = 0.0;
  std::size_t forward_passes = 0;
};

// Stream domains forked off the per-image stream.
inline constexpr std::uint64_t kDefaultAugmentDomain = 0xDEFA;
inline constexpr std::uint64_t kSelectDomain = 0x5E1EC7;

/// Runs one strategy on one image. The candidate tensor that is scored is the
/// tensor returned (sub-policy first, then default augmentation). `scorer` is
/// the frozen snapshot used for every candidate of this image.
AugmentedViews generate_views(const StrategyParams& params, const Image& image, const OracleModel& scorer,
                              const RandomStream& stream, std::span<const Image> partner_pool);

}  // namespace divaug
