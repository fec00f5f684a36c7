#include "divaug/strategy.hpp"

#include "divaug/error.hpp"
#include "divaug/selection.hpp"

namespace divaug {

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::DivAug:
      return "divaug";
    case Strategy::RandomSelect:
      return "random-select";
    case Strategy::DefaultOnly:
      return "default-only";
    case Strategy::Identity:
      return "identity";
  }
  return "unknown";
}

std::optional<Strategy> parse_strategy(std::string_view name) {
  for (Strategy s : {Strategy::DivAug, Strategy::RandomSelect, Strategy::DefaultOnly, Strategy::Identity}) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

void StrategyParams::validate() const {
  if (select_count < 1 || expand_count < select_count) {
    throw InvalidArgument("strategy: need 1 <= S <= E");
  }
}

AugmentedViews generate_views(const StrategyParams& params, const Image& image, const OracleModel& scorer,
                              const RandomStream& stream, std::span<const Image> partner_pool) {
  params.validate();
  AugmentedViews views;

  if (params.strategy == Strategy::Identity) {
    views.images.push_back(image);
    views.policies.emplace_back(std::nullopt);
    return views;
  }

  if (params.strategy == Strategy::DefaultOnly) {
    for (std::size_t j = 0; j < params.select_count; ++j) {
      RandomStream aug = stream.fork(kDefaultAugmentDomain, j);
      views.images.push_back(params.default_augment ? default_augment(image, *params.default_augment, aug) : image);
      views.policies.emplace_back(std::nullopt);
    }
    views.probs = predict_proba(scorer, views.images);
    views.forward_passes = views.images.size();
    views.diversity = variance_diversity(views.probs);
    return views;
  }

  CandidateSet candidates = expand(image, params.expand_count, stream, partner_pool);
  if (params.default_augment) {
    for (std::size_t j = 0; j < candidates.size(); ++j) {
      RandomStream aug = stream.fork(kDefaultAugmentDomain, j);
      candidates.candidates[j].image = default_augment(candidates.candidates[j].image, *params.default_augment, aug);
    }
  }
  std::vector<Image> tensors;
  tensors.reserve(candidates.size());
  for (const auto& c : candidates.candidates) tensors.push_back(c.image);
  candidates.prob_vectors = predict_proba(scorer, tensors);
  views.forward_passes = tensors.size();

  RandomStream pick = stream.fork(kSelectDomain);
  const SelectionResult chosen = params.strategy == Strategy::DivAug
                                     ? select(candidates, params.select_count, pick)
                                     : uniform_select(*candidates.prob_vectors, params.select_count, pick);

  std::vector<bool> flag(candidates.size(), false);
  for (std::size_t i : chosen.chosen_indices) {
    flag[i] = true;
    views.images.push_back(std::move(tensors[i]));
    views.policies.emplace_back(candidates.candidates[i].policy);
    views.probs.push_back((*candidates.prob_vectors)[i]);
  }
  for (std::size_t j = 0; j < candidates.size(); ++j) views.sampled.emplace_back(candidates.candidates[j].policy, flag[j]);
  views.diversity = chosen.diversity;
  return views;
}

}  // namespace divaug
