#include <doctest.h>

#include <algorithm>
#include <random>

#include "tess/error.hpp"
#include "tess/reference.hpp"

using namespace tess;

TEST_CASE("upper p-value ranges count controls above and tied") {
  const ReferenceDistribution ref({4.0, 2.0, 1.0, 3.0});
  CHECK(p_value_range(ref, 3.5, Sidedness::upper) == PValueRange{1.0 / 5, 2.0 / 5});
  CHECK(p_value_range(ref, 5.0, Sidedness::upper) == PValueRange{0.0, 1.0 / 5});
  CHECK(p_value_range(ref, 2.0, Sidedness::upper) == PValueRange{2.0 / 5, 4.0 / 5});
  CHECK(p_value_range(ref, 0.0, Sidedness::upper) == PValueRange{4.0 / 5, 1.0});
}

TEST_CASE("lower ranges mirror upper ranges") {
  const ReferenceDistribution ref({1.0, 2.0, 3.0, 4.0});
  CHECK(p_value_range(ref, 0.0, Sidedness::lower) == PValueRange{0.0, 1.0 / 5});
  CHECK(p_value_range(ref, 2.0, Sidedness::lower) == PValueRange{1.0 / 5, 3.0 / 5});
}

TEST_CASE("two-sided ranges fold both tails") {
  const ReferenceDistribution ref({1.0, 2.0, 3.0, 4.0});
  // Upper (0, 1/5] doubles to (0, 2/5].
  CHECK(p_value_range(ref, 5.0, Sidedness::two) == PValueRange{0.0, 2.0 / 5});
  // Lower tail: upper (4/5, 1] folds to (0, 2/5].
  CHECK(p_value_range(ref, 0.0, Sidedness::two) == PValueRange{0.0, 2.0 / 5});
  // Symmetric straddle of 1/2 gives the whole unit interval.
  const ReferenceDistribution odd({1.0, 2.0, 3.0});
  const auto mid = p_value_range(odd, 2.0, Sidedness::two);
  CHECK(mid.p_max == 1.0);
}

TEST_CASE("negating outcomes swaps upper and lower ranges exactly") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> pick(-5, 5);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> c(1 + rep % 9);
    for (auto& v : c) v = pick(rng);
    std::vector<double> neg(c.size());
    std::transform(c.begin(), c.end(), neg.begin(), [](double v) { return -v; });
    const double y = pick(rng);
    const ReferenceDistribution a(c);
    const ReferenceDistribution b(neg);
    CHECK(p_value_range(a, y, Sidedness::upper) == p_value_range(b, -y, Sidedness::lower));
    CHECK(p_value_range(a, y, Sidedness::two) == p_value_range(b, -y, Sidedness::two));
  }
}

TEST_CASE("reference distribution needs controls") {
  CHECK_THROWS_AS(ReferenceDistribution({}), Error);
  const ReferenceDistribution ref({3.0, 1.0, 2.0});
  CHECK(ref.cdf(2.0) == doctest::Approx(2.0 / 3));
  CHECK(ref.outcomes().front() == 1.0);
}

TEST_CASE("significance mass is linear inside the range") {
  const PValueRange r{0.2, 0.4};
  CHECK(significance_mass(r, 0.3) == doctest::Approx(0.5));
  CHECK(significance_mass(r, 0.5) == 1.0);
  CHECK(significance_mass(r, 0.1) == 0.0);
  CHECK(significance_mass(r, 0.4) == 1.0);
  CHECK(significance_mass(r, 0.2) == 0.0);
}

TEST_CASE("candidate alphas collect endpoints inside the window") {
  const std::vector<PValueRange> ranges{{0.0, 0.05}, {0.05, 0.10}};
  CHECK(candidate_alphas(ranges, 0.01, 0.2) == std::vector<double>{0.01, 0.05, 0.10, 0.2});
  CHECK(candidate_alphas({}, 0.01, 0.2) == std::vector<double>{0.01, 0.2});
  const std::vector<PValueRange> far{{0.6, 0.7}, {0.8, 0.9}};
  CHECK(candidate_alphas(far, 0.01, 0.2) == std::vector<double>{0.01, 0.2});
  CHECK_THROWS_AS((void)candidate_alphas(ranges, 0.2, 0.1), Error);
  CHECK_THROWS_AS((void)candidate_alphas(ranges, 0.0, 0.1), Error);
}

TEST_CASE("sidedness names round trip") {
  for (auto s : {Sidedness::upper, Sidedness::lower, Sidedness::two}) {
    CHECK(parse_sidedness(to_string(s)) == s);
  }
  CHECK_THROWS_AS((void)parse_sidedness("both"), Error);
}
