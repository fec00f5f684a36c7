#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "divaug/policy.hpp"
#include "divaug/prob_vector.hpp"
#include "divaug/random.hpp"

namespace divaug {

struct SelectionResult {
  std::vector<std::size_t> chosen_indices;
  double diversity = 0.0;  ///< variance_diversity of the chosen vectors
};

/// Mean squared Euclidean distance of the vectors from their centroid
/// (population normaliser). Identical inputs give exactly 0.
double variance_diversity(std::span<const ProbVector> vectors);

/// variance_diversity of vectors[indices].
double subset_diversity(std::span<const ProbVector> vectors, std::span<const std::size_t> indices);

/// k-means++ seeding used as a sampler: first index uniform, each next index
/// drawn with probability proportional to the squared distance to the nearest
/// chosen vector. When every remaining weight is zero the draw falls back to
/// uniform over the unchosen indices.
SelectionResult kmeanspp_select(std::span<const ProbVector> vectors, std::size_t count, RandomStream& rng);

/// `count` distinct indices uniformly at random (the random-select baseline).
SelectionResult uniform_select(std::span<const ProbVector> vectors, std::size_t count, RandomStream& rng);

/// Largest enumeration brute_force_max_variance accepts.
inline constexpr std::size_t kMaxBruteForceSubsets = 1'000'000;

/// Exact max-variance subset by enumeration; ties go to the lexicographically
/// smallest index tuple.
SelectionResult brute_force_max_variance(std::span<const ProbVector> vectors, std::size_t count);

/// k-means++ selection over a scored candidate set.
SelectionResult select(const CandidateSet& candidates, std::size_t count, RandomStream& rng);

}  // namespace divaug
