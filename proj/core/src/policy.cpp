#include "divaug/policy.hpp"

#include <cstdio>

#include "divaug/error.hpp"

namespace divaug {

namespace {

std::string describe(const Operation& op) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%s(p=%.3f,m=%.3f)", std::string(to_string(op.kind)).c_str(), op.p, op.m);
  return buf;
}

const Image* pick_partner(const Operation& op, RandomStream& rng, std::span<const Image> pool) {
  if (op.kind != OpKind::SamplePairing) return nullptr;
  if (pool.empty()) throw InvalidArgument("SamplePairing needs a non-empty partner pool");
  return &pool[rng.uniform_index(pool.size())];
}

}  // namespace

std::string describe(const SubPolicy& policy) {
  return describe(policy.first) + ">" + describe(policy.second);
}

SubPolicy sample_subpolicy(RandomStream& rng) {
  SubPolicy t;
  t.first.kind = kAllOpKinds[rng.uniform_index(kOpKindCount)];
  t.second.kind = kAllOpKinds[rng.uniform_index(kOpKindCount)];
  t.first.p = rng.uniform();
  t.second.p = rng.uniform();
  t.first.m = rng.uniform();
  t.second.m = rng.uniform();
  return t;
}

Image apply_subpolicy(const SubPolicy& policy, const Image& image, RandomStream& rng,
                      std::span<const Image> partner_pool) {
  const Image* partner = pick_partner(policy.first, rng, partner_pool);
  Image out = apply_op(policy.first, image, rng, partner);
  partner = pick_partner(policy.second, rng, partner_pool);
  return apply_op(policy.second, out, rng, partner);
}

CandidateSet expand(const Image& image, std::size_t count, const RandomStream& rng,
                    std::span<const Image> partner_pool, std::size_t source_index) {
  if (count == 0) throw InvalidArgument("expand: candidate count must be at least 1");
  CandidateSet set;
  set.source_index = source_index;
  set.candidates.reserve(count);
  for (std::size_t j = 0; j < count; ++j) {
    RandomStream stream = rng.fork(kCandidateDomain, j);
    SubPolicy policy = sample_subpolicy(stream);
    Image augmented = apply_subpolicy(policy, image, stream, partner_pool);
    set.candidates.push_back({policy, std::move(augmented)});
  }
  return set;
}

}  // namespace divaug
