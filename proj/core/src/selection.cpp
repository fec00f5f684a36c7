#include "divaug/selection.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "divaug/error.hpp"

namespace divaug {
namespace {

void check_vectors(std::span<const ProbVector> vectors) {
  if (vectors.empty()) throw InvalidArgument("variance_diversity: empty set");
  const std::size_t d = vectors.front().size();
  for (const auto& v : vectors) {
    if (v.size() != d) throw InvalidArgument("variance_diversity: dimension mismatch");
  }
}

void check_count(std::span<const ProbVector> vectors, std::size_t count) {
  if (count == 0) throw InvalidArgument("selection: count must be at least 1");
  if (count > vectors.size()) {
    throw InvalidArgument("selection: cannot choose " + std::to_string(count) + " of " +
                          std::to_string(vectors.size()) + " candidates");
  }
}

double squared_distance(const ProbVector& a, const ProbVector& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double diff = a[k] - b[k];
    s += diff * diff;
  }
  return s;
}

// C(n, k) saturating at limit + 1.
std::size_t binomial_capped(std::size_t n, std::size_t k, std::size_t limit) {
  k = std::min(k, n - k);
  double value = 1.0;
  for (std::size_t i = 1; i <= k; ++i) {
    value = value * static_cast<double>(n - k + i) / static_cast<double>(i);
    if (value > static_cast<double>(limit)) return limit + 1;
  }
  return static_cast<std::size_t>(value + 0.5);
}

}  // namespace

double variance_diversity(std::span<const ProbVector> vectors) {
  check_vectors(vectors);
  const std::size_t d = vectors.front().size();
  const auto n = static_cast<double>(vectors.size());
  // Offsets from the first vector: identical inputs give exact zeros.
  const ProbVector& origin = vectors.front();
  std::vector<double> centre(d, 0.0);
  for (const auto& v : vectors) {
    for (std::size_t k = 0; k < d; ++k) centre[k] += v[k] - origin[k];
  }
  for (double& c : centre) c /= n;
  double total = 0.0;
  for (const auto& v : vectors) {
    for (std::size_t k = 0; k < d; ++k) {
      const double delta = (v[k] - origin[k]) - centre[k];
      total += delta * delta;
    }
  }
  return total / n;
}

double subset_diversity(std::span<const ProbVector> vectors, std::span<const std::size_t> indices) {
  std::vector<ProbVector> chosen;
  chosen.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= vectors.size()) throw InvalidArgument("subset_diversity: index out of range");
    chosen.push_back(vectors[i]);
  }
  return variance_diversity(chosen);
}

SelectionResult kmeanspp_select(std::span<const ProbVector> vectors, std::size_t count, RandomStream& rng) {
  check_vectors(vectors);
  check_count(vectors, count);
  const std::size_t n = vectors.size();
  std::vector<bool> taken(n, false);
  std::vector<double> nearest(n, 0.0);

  SelectionResult result;
  std::size_t pick = rng.uniform_index(n);
  for (;;) {
    taken[pick] = true;
    result.chosen_indices.push_back(pick);
    if (result.chosen_indices.size() == count) break;

    const bool first = result.chosen_indices.size() == 1;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (taken[i]) {
        nearest[i] = 0.0;
        continue;
      }
      const double dist = squared_distance(vectors[i], vectors[pick]);
      nearest[i] = first ? dist : std::min(nearest[i], dist);
      total += nearest[i];
    }

    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      std::size_t last_positive = n;
      pick = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (taken[i] || nearest[i] <= 0.0) continue;
        last_positive = i;
        acc += nearest[i];
        if (target < acc) {
          pick = i;
          break;
        }
      }
      if (pick == n) pick = last_positive;  // rounding at the top of the range
    } else {
      std::vector<std::size_t> open;
      for (std::size_t i = 0; i < n; ++i) {
        if (!taken[i]) open.push_back(i);
      }
      pick = open[rng.uniform_index(open.size())];
    }
  }
  result.diversity = subset_diversity(vectors, result.chosen_indices);
  return result;
}

SelectionResult uniform_select(std::span<const ProbVector> vectors, std::size_t count, RandomStream& rng) {
  check_vectors(vectors);
  check_count(vectors, count);
  std::vector<std::size_t> order(vectors.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Partial Fisher-Yates.
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + rng.uniform_index(order.size() - i);
    std::swap(order[i], order[j]);
  }
  SelectionResult result;
  result.chosen_indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count));
  result.diversity = subset_diversity(vectors, result.chosen_indices);
  return result;
}

SelectionResult brute_force_max_variance(std::span<const ProbVector> vectors, std::size_t count) {
  check_vectors(vectors);
  check_count(vectors, count);
  const std::size_t n = vectors.size();
  if (binomial_capped(n, count, kMaxBruteForceSubsets) > kMaxBruteForceSubsets) {
    throw InvalidArgument("brute_force_max_variance: more than 1e6 subsets to enumerate");
  }
  std::vector<std::size_t> combo(count);
  std::iota(combo.begin(), combo.end(), std::size_t{0});
  SelectionResult best;
  best.diversity = -1.0;
  for (;;) {
    const double value = subset_diversity(vectors, combo);
    if (value > best.diversity) {
      best.diversity = value;
      best.chosen_indices = combo;
    }
    // Next combination in lexicographic order.
    std::size_t i = count;
    while (i > 0 && combo[i - 1] == n - count + (i - 1)) --i;
    if (i == 0) break;
    ++combo[i - 1];
    for (std::size_t j = i; j < count; ++j) combo[j] = combo[j - 1] + 1;
  }
  return best;
}

SelectionResult select(const CandidateSet& candidates, std::size_t count, RandomStream& rng) {
  if (!candidates.prob_vectors || candidates.prob_vectors->size() != candidates.size()) {
    throw InvalidArgument("select: candidates have not been scored");
  }
  return kmeanspp_select(*candidates.prob_vectors, count, rng);
}

}  // namespace divaug
