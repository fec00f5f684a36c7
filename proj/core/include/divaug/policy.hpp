#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "divaug/image.hpp"
#include "divaug/imageops.hpp"
#include "divaug/prob_vector.hpp"
#include "divaug/random.hpp"

namespace divaug {

/// Two operations applied in sequence: first, then second.
struct SubPolicy {
  Operation first;
  Operation second;

  [[nodiscard]] bool valid() const { return first.valid() && second.valid(); }
  friend bool operator==(const SubPolicy&, const SubPolicy&) = default;
};

/// e.g. "Rotate(p=0.700,m=1.000)>Invert(p=0.200,m=0.500)".
std::string describe(const SubPolicy& policy);

/// Kinds uniform with replacement; p and m uniform on [0, 1]. Draw order:
/// kind1, kind2, p1, p2, m1, m2.
SubPolicy sample_subpolicy(RandomStream& rng);

/// Applies first then second through apply_op. For each SamplePairing op a
/// partner index is drawn from `partner_pool` before that op's gate.
Image apply_subpolicy(const SubPolicy& policy, const Image& image, RandomStream& rng,
                      std::span<const Image> partner_pool);

struct Candidate {
  SubPolicy policy;
  Image image;
};

/// E augmented versions of one source image, optionally scored.
struct CandidateSet {
  std::size_t source_index = 0;
  std::vector<Candidate> candidates;
  std::optional<std::vector<ProbVector>> prob_vectors;

  [[nodiscard]] std::size_t size() const { return candidates.size(); }
};

/// Stream domain for per-candidate streams forked off the image stream.
inline constexpr std::uint64_t kCandidateDomain = 0xCA11D;

/// Generates `count` candidates. Candidate j samples and applies its
/// sub-policy on rng.fork(kCandidateDomain, j), so candidates are independent
/// of evaluation order.
CandidateSet expand(const Image& image, std::size_t count, const RandomStream& rng,
                    std::span<const Image> partner_pool, std::size_t source_index = 0);

}  // namespace divaug
