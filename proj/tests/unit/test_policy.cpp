#include <doctest.h>

#include <array>
#include <cmath>
#include <random>

#include <boost/math/distributions/chi_squared.hpp>

#include "divaug/error.hpp"
#include "divaug/policy.hpp"
#include "test_support.hpp"

using namespace divaug;
using divaug::testing::random_image;

TEST_CASE("first operation kinds are uniform over the 16 kinds") {
  RandomStream rng(77);
  std::array<std::size_t, kOpKindCount> counts{};
  const std::size_t n = 160000;
  for (std::size_t i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(sample_subpolicy(rng).first.kind)];
  for (std::size_t k = 0; k < kOpKindCount; ++k) {
    CHECK(std::abs(counts[k] / double(n) - 1.0 / 16.0) <= 0.005);
  }
}

TEST_CASE("kind sampling passes a chi-squared uniformity test at 0.001") {
  RandomStream rng(78);
  std::array<double, kOpKindCount> first{}, second{};
  const std::size_t n = 100000;
  for (std::size_t i = 0; i < n; ++i) {
    const SubPolicy t = sample_subpolicy(rng);
    ++first[static_cast<std::size_t>(t.first.kind)];
    ++second[static_cast<std::size_t>(t.second.kind)];
  }
  const double expected = n / 16.0;
  const auto statistic = [&](const std::array<double, kOpKindCount>& c) {
    double s = 0.0;
    for (double v : c) s += (v - expected) * (v - expected) / expected;
    return s;
  };
  const double critical = boost::math::quantile(boost::math::chi_squared(15.0), 0.999);
  CHECK(statistic(first) < critical);
  CHECK(statistic(second) < critical);
}

TEST_CASE("probabilities and magnitudes lie in [0, 1]") {
  RandomStream rng(1);
  for (int i = 0; i < 10000; ++i) {
    const SubPolicy t = sample_subpolicy(rng);
    REQUIRE(t.valid());
  }
}

TEST_CASE("identical seeds give identical sub-policy sequences") {
  RandomStream a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const SubPolicy ta = sample_subpolicy(a);
    CHECK(ta == sample_subpolicy(b));
    differs |= !(ta == sample_subpolicy(c));
  }
  CHECK(differs);
}

TEST_CASE("apply_subpolicy with both gates closed is the identity") {
  std::mt19937_64 gen(2);
  const Image image = random_image(gen, 10, 10, 3);
  RandomStream rng(3);
  const SubPolicy t{{OpKind::Rotate, 0.0, 0.9}, {OpKind::SamplePairing, 0.0, 0.9}};
  const std::vector<Image> pool{image};
  CHECK(apply_subpolicy(t, image, rng, pool) == image);
}

TEST_CASE("Invert then Invert is the identity") {
  std::mt19937_64 gen(4);
  const Image image = random_image(gen, 7, 5, 1);
  RandomStream rng(5);
  const SubPolicy t{{OpKind::Invert, 1.0, 0.2}, {OpKind::Invert, 1.0, 0.7}};
  CHECK(apply_subpolicy(t, image, rng, {}) == image);
}

TEST_CASE("Rotate at m = 0.5 alone is a 15 degree rotation") {
  std::mt19937_64 gen(6);
  const Image image = random_image(gen, 20, 20, 3);
  const SubPolicy t{{OpKind::Rotate, 1.0, 0.5}, {OpKind::Invert, 0.0, 0.0}};
  const Image plus = apply_transform(OpKind::Rotate, image, 0.5);
  const Image minus = apply_transform(OpKind::Rotate, image, -0.5);
  bool found_plus = false;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    RandomStream rng(seed);
    const Image out = apply_subpolicy(t, image, rng, {});
    CHECK((out == plus || out == minus));
    found_plus |= out == plus;
  }
  CHECK(found_plus);
  // The +15 degree transform moves a dot 8 px right of centre on a 17 px grid
  // to (8 - 8 sin 15, 8 + 8 cos 15) = (5.93, 15.73).
  Image dot(17, 17, 1, 0);
  dot.at(8, 16, 0) = 255;
  CHECK(apply_transform(OpKind::Rotate, dot, 0.5).at(6, 16, 0) == 255);
}

TEST_CASE("SamplePairing needs a partner pool") {
  const Image image(4, 4, 1, 1);
  RandomStream rng(7);
  const SubPolicy t{{OpKind::SamplePairing, 1.0, 0.5}, {OpKind::Invert, 0.0, 0.0}};
  CHECK_THROWS_AS(apply_subpolicy(t, image, rng, {}), InvalidArgument);
  const std::vector<Image> pool{Image(4, 4, 1, 101)};
  RandomStream rng2(7);
  CHECK(apply_subpolicy(t, image, rng2, pool) == Image(4, 4, 1, 21));
}

TEST_CASE("expand produces E candidates of the source shape") {
  std::mt19937_64 gen(8);
  const Image image = random_image(gen, 12, 9, 3);
  const Image copy = image;
  const std::vector<Image> pool{image, random_image(gen, 12, 9, 3)};
  const RandomStream rng(9);
  for (std::size_t e : {std::size_t{1}, std::size_t{4}, std::size_t{8}}) {
    const CandidateSet set = expand(image, e, rng, pool, 3);
    CHECK(set.size() == e);
    CHECK(set.source_index == 3U);
    CHECK_FALSE(set.prob_vectors.has_value());
    for (const auto& c : set.candidates) {
      CHECK(c.image.same_shape(image));
      CHECK(c.policy.valid());
    }
  }
  CHECK(image == copy);
  CHECK_THROWS_AS(expand(image, 0, rng, pool), InvalidArgument);
}

TEST_CASE("expand is bit-identical for a fixed seed and candidates are prefix-stable") {
  std::mt19937_64 gen(10);
  const Image image = random_image(gen, 16, 16, 3);
  const std::vector<Image> pool{image};
  const CandidateSet a = expand(image, 8, RandomStream(5), pool);
  const CandidateSet b = expand(image, 8, RandomStream(5), pool);
  const CandidateSet c = expand(image, 3, RandomStream(5), pool);
  for (std::size_t j = 0; j < 8; ++j) {
    CHECK(a.candidates[j].image == b.candidates[j].image);
    CHECK(a.candidates[j].policy == b.candidates[j].policy);
  }
  for (std::size_t j = 0; j < 3; ++j) CHECK(a.candidates[j].image == c.candidates[j].image);
}

TEST_CASE("describe names both operations") {
  const SubPolicy t{{OpKind::Rotate, 0.7, 1.0}, {OpKind::Invert, 0.2, 0.5}};
  CHECK(describe(t) == "Rotate(p=0.700,m=1.000)>Invert(p=0.200,m=0.500)");
}
