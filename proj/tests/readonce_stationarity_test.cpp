#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "digitforge/readonce.hpp"

using namespace digitforge;

namespace {

// Frequencies of the s-window starting j*s digits after position K, for j = 0, 1, 2.
std::vector<std::vector<double>> window_frequencies(const Density& density, const ResidualChain& chain, std::size_t t,
                                                    std::size_t draws, std::uint64_t seed) {
  const std::size_t s = chain.order();
  UniformStream rng(seed);
  PerfectOptions options;
  std::vector<std::vector<double>> freq(3, std::vector<double>(chain.size(), 0.0));
  for (std::size_t i = 0; i < draws; ++i) {
    options.min_digits = 0;
    PerfectDraw d = perfect_remainder_sample(density, chain, t, rng, options);
    while (d.digits.size() < d.k + 3 * s) {
      // The stream continues past the last read-once block.
      const std::size_t last = chain.index_of(DigitSeq(d.digits.end() - static_cast<std::ptrdiff_t>(s), d.digits.end()));
      d.digits.push_back(chain.omega()[srs_update(chain, last, rng.next())].back());
    }
    for (std::size_t j = 0; j < 3; ++j) {
      const auto from = d.digits.begin() + static_cast<std::ptrdiff_t>(d.k + j * s);
      const std::size_t z = chain.index_of(DigitSeq(from, from + static_cast<std::ptrdiff_t>(s)));
      EXPECT_NE(z, ResidualChain::npos);
      freq[j][z] += 1.0 / static_cast<double>(draws);
    }
  }
  return freq;
}

double tv(const std::vector<double>& a, const StatePmf& b) {
  double out = 0;
  for (std::size_t z = 0; z < a.size(); ++z) out += 0.5 * std::abs(a[z] - b[z]);
  return out;
}

void check(const Density& density, const ResidualChain& chain, std::size_t t, std::uint64_t seed) {
  const StatePmf pi = invariant_pmf(chain);
  const auto freq = window_frequencies(density, chain, t, 100'000, seed);
  for (std::size_t j = 0; j < 3; ++j) {
    const double d = tv(freq[j], pi);
    ::testing::Test::RecordProperty("tv_offset_" + std::to_string(j), std::to_string(d));
    EXPECT_LE(d, 0.02) << "offset " << j;
  }
}

}  // namespace

TEST(ReadOnceStationarity, BaseQ) {
  const Scheme s = Scheme::base_q(3);
  check(Density::uniform(s), build_chain(s, 1), 1, 31);
}

TEST(ReadOnceStationarity, GoldenMean) {
  const Scheme s = Scheme::pseudo_golden(2);
  check(Density::uniform(s), build_chain(s, 1), 1, 32);
}

TEST(ReadOnceStationarity, PseudoGoldenOrderThree) {
  const Scheme s = Scheme::pseudo_golden(3);
  check(Density::uniform(s), build_chain(s, 2), 3, 33);
}
