#include <gtest/gtest.h>

#include <cmath>

#include "digitforge/readonce.hpp"
#include "digitforge/verify.hpp"

using namespace digitforge;

namespace {

const double kInvBeta = 2 / (1 + std::sqrt(5.0));

ResidualChain golden() { return build_chain(Scheme::pseudo_golden(2), 1); }

ResidualChain identical_rows() {
  Eigen::MatrixXd p(2, 2);
  p << 0.4, 0.6, 0.4, 0.6;
  return ResidualChain::from_matrix({{0}, {1}}, p);
}

ResidualChain flip() {
  Eigen::MatrixXd p(2, 2);
  p << 0, 1, 1, 0;
  return ResidualChain::from_matrix({{0}, {1}}, p);
}

std::vector<double> geometric_pmf(double p, std::size_t max_k) {
  std::vector<double> out;
  for (std::size_t k = 1; k < max_k; ++k) out.push_back(p * std::pow(1 - p, static_cast<double>(k - 1)));
  out.push_back(std::pow(1 - p, static_cast<double>(max_k - 1)));
  return out;
}

}  // namespace

TEST(SrsUpdate, GoldenMean) {
  const ResidualChain c = golden();
  const std::size_t zero = c.index_of({0}), one = c.index_of({1});
  EXPECT_EQ(srs_update(c, zero, 0.5), zero);
  EXPECT_EQ(srs_update(c, zero, 0.99), one);
  for (double v : {0.01, 0.5, 0.7, 0.99}) EXPECT_EQ(srs_update(c, one, v), zero);
  EXPECT_EQ(srs_update(c, zero, kInvBeta - 1e-12), zero);
  EXPECT_EQ(srs_update(c, zero, kInvBeta + 1e-12), one);
}

TEST(GenBlock, Examples) {
  const ResidualChain c = golden();
  const BlockRecord open = run_block(c, 1, {0.7});
  EXPECT_FALSE(open.coalesced);
  EXPECT_EQ(open.outputs[c.index_of({0})], c.index_of({1}));
  EXPECT_EQ(open.outputs[c.index_of({1})], c.index_of({0}));
  const BlockRecord shut = run_block(c, 1, {0.3});
  EXPECT_TRUE(shut.coalesced);
  EXPECT_EQ(shut.common_output, c.index_of({0}));

  UniformStream rng(5);
  for (int i = 0; i < 1000; ++i) {
    const BlockRecord rec = gen_block(c, 1, rng);
    EXPECT_EQ(rec.coalesced, rec.uniforms[0] <= kInvBeta);
    EXPECT_EQ(rec.b, 1u);
  }
  for (int i = 0; i < 200; ++i) EXPECT_TRUE(gen_block(identical_rows(), 3, rng).coalesced);
}

TEST(GenBlock, BlockLengthAndParameterCheck) {
  const ResidualChain c = build_chain(Scheme::pseudo_golden(3), 2);
  UniformStream rng(6);
  EXPECT_EQ(gen_block(c, 2, rng).b, 3u);
  EXPECT_EQ(gen_block(c, 5, rng).uniforms.size(), 6u);
  EXPECT_THROW(gen_block(c, 1, rng), domain_error);
  EXPECT_THROW(run_block(golden(), 1, {0.1, 0.2}), domain_error);
}

TEST(Epsilon, Examples) {
  EXPECT_NEAR(epsilon_exact(golden(), 1), kInvBeta, 1e-15);
  EXPECT_NEAR(epsilon_exact(identical_rows(), 1), 1.0, 1e-15);
  EXPECT_NEAR(epsilon_exact(flip(), 3), 0.0, 1e-15);
  UniformStream rng(7);
  const Estimate mc = epsilon_monte_carlo(golden(), 1, 100'000, rng);
  EXPECT_NEAR(mc.value, 0.6180, 0.01);
  EXPECT_GT(mc.half_width, 0.0);
}

TEST(Epsilon, ExactMatchesMonteCarlo) {
  UniformStream rng(8);
  for (const auto& [c, t] : std::vector<std::pair<ResidualChain, std::size_t>>{
           {golden(), 2}, {golden(), 3}, {build_chain(Scheme::pseudo_golden(3), 2), 2},
           {build_chain(Scheme::pseudo_golden(3), 2), 4}, {build_chain(Scheme::base_q(3), 1), 1}}) {
    const double exact = epsilon_exact(c, t);
    const Estimate mc = epsilon_monte_carlo(c, t, 50'000, rng);
    EXPECT_NEAR(mc.value, exact, 3 * std::max(mc.half_width, 1e-3)) << "t = " << t;
  }
}

// With two states and the golden chain, a t=2 block coalesces unless V1 > 1/beta and V2 > 1/beta:
// starting from (0) or (1) the second update then still differs.
TEST(Epsilon, GoldenTwoStepClosedForm) {
  const double q = 1 - kInvBeta;
  EXPECT_NEAR(epsilon_exact(golden(), 2), 1 - q * q, 1e-14);
}

TEST(Epsilon, NonDecreasingInT) {
  for (const auto& c : {golden(), build_chain(Scheme::pseudo_golden(3), 2)}) {
    double previous = 0;
    for (std::size_t t = c.order(); t <= c.order() + 4; ++t) {
      const double e = epsilon_exact(c, t);
      EXPECT_GE(e, previous - 1e-14) << "t = " << t;
      previous = e;
    }
    EXPECT_GT(previous, 0.0);
  }
}

TEST(Epsilon, InfeasibleExactIsReported) {
  EXPECT_THROW(epsilon_exact(build_chain(Scheme::pseudo_golden(4), 3), 8, 4), infeasible_exact_error);
}

TEST(ReadOnce, OutputIsInvariantLaw) {
  for (const auto& c : {golden(), build_chain(Scheme::pseudo_golden(3), 2)}) {
    UniformStream rng(9);
    const StatePmf pi = invariant_pmf(c);
    std::vector<double> freq(c.size(), 0.0);
    const std::size_t runs = 100'000;
    const std::size_t t = c.order();
    for (std::size_t i = 0; i < runs; ++i) freq[read_once(c, t, rng).output] += 1.0 / runs;
    double tv = 0;
    for (std::size_t z = 0; z < c.size(); ++z) tv += 0.5 * std::abs(freq[z] - pi[z]);
    EXPECT_LE(tv, 0.01);
  }
}

TEST(ReadOnce, GoldenMeanRunLength) {
  UniformStream rng(10);
  const ResidualChain c = golden();
  double total = 0;
  const std::size_t runs = 100'000;
  for (std::size_t i = 0; i < runs; ++i) {
    const ReadOnceResult r = read_once(c, 1, rng);
    total += static_cast<double>(r.m1 + r.m2);
  }
  EXPECT_NEAR(total / runs, std::sqrt(5.0) + 1, 0.05);
}

TEST(ReadOnce, IdenticalRowsTakeOneBlockEach) {
  UniformStream rng(11);
  for (int i = 0; i < 1000; ++i) {
    const ReadOnceResult r = read_once(identical_rows(), 1, rng);
    EXPECT_EQ(r.m1, 1u);
    EXPECT_EQ(r.m2, 1u);
  }
}

TEST(ReadOnce, BudgetError) {
  UniformStream rng(12);
  EXPECT_THROW(read_once(flip(), 1, rng, ReadOnceOptions{50}), budget_error);
}

TEST(ReadOnce, ConsumesBlocksLeftToRight) {
  UniformStream rng(13), replay(13);
  std::vector<double> seen;
  const ReadOnceResult r = read_once(golden(), 2, rng, {}, [&](double v) { seen.push_back(v); });
  ASSERT_EQ(seen.size(), 2 * (r.m1 + r.m2));
  for (double v : seen) EXPECT_EQ(v, replay.next());
  EXPECT_EQ(rng.consumed(), seen.size());
}

TEST(ReadOnce, CountsAreGeometric) {
  for (const auto& [c, t] : std::vector<std::pair<ResidualChain, std::size_t>>{
           {golden(), 1}, {build_chain(Scheme::pseudo_golden(3), 2), 2}}) {
    const double eps = epsilon_exact(c, t);
    UniformStream rng(14);
    const std::size_t max_k = 30;
    std::vector<double> c1(max_k, 0.0), c2(max_k, 0.0);
    for (int i = 0; i < 100'000; ++i) {
      const ReadOnceResult r = read_once(c, t, rng);
      c1[std::min(r.m1, max_k) - 1] += 1;
      c2[std::min(r.m2, max_k) - 1] += 1;
    }
    const std::vector<double> expected = geometric_pmf(eps, max_k);
    EXPECT_GT(chi_square(expected, c1).p_value, 0.01);
    EXPECT_GT(chi_square(expected, c2).p_value, 0.01);
  }
}

// Paths driven by one uniform sequence never separate once they meet.
TEST(ReadOnce, GrandCoupling) {
  const ResidualChain c = build_chain(Scheme::pseudo_golden(3), 2);
  UniformStream rng(15);
  for (int run = 0; run < 2000; ++run) {
    std::vector<std::size_t> states(c.size());
    for (std::size_t z = 0; z < c.size(); ++z) states[z] = z;
    std::vector<std::vector<bool>> met(c.size(), std::vector<bool>(c.size(), false));
    for (int step = 0; step < 20; ++step) {
      const double v = rng.next();
      for (auto& st : states) st = srs_update(c, st, v);
      for (std::size_t a = 0; a < c.size(); ++a)
        for (std::size_t b = 0; b < c.size(); ++b) {
          if (met[a][b]) {
            ASSERT_EQ(states[a], states[b]);
          }
          if (states[a] == states[b]) met[a][b] = true;
        }
    }
  }
}

TEST(PerfectSample, Identities) {
  const Scheme g = Scheme::pseudo_golden(2);
  const ResidualChain c = build_chain(g, 1);
  UniformStream rng(16);
  const Density uniform = Density::uniform(g);
  for (int i = 0; i < 5000; ++i) {
    const PerfectDraw d = perfect_remainder_sample(uniform, c, 1, rng);
    const std::size_t h = std::max<std::size_t>(d.coupling.n, 1);
    ASSERT_GE(d.m1, 1u);
    ASSERT_GE(d.m2, 1u);
    ASSERT_EQ(d.m, d.m1 + d.m2 - 1);
    ASSERT_EQ(d.k, h + d.m - 1);
    ASSERT_GE(d.k, h);
    ASSERT_GE(d.digits.size(), d.k + 1);
    ASSERT_EQ(c.omega()[d.window], DigitSeq{d.digits[d.k]});
    ASSERT_EQ(digits_of(g, d.coupling.x, d.digits.size()), d.digits);
  }
}

TEST(PerfectSample, BlockLengthEntersM) {
  const Scheme g = Scheme::pseudo_golden(3);
  const ResidualChain c = build_chain(g, 2);
  UniformStream rng(17);
  const Density uniform = Density::uniform(g);
  for (int i = 0; i < 2000; ++i) {
    const PerfectDraw d = perfect_remainder_sample(uniform, c, 3, rng, PerfectOptions{40, {}, {}});
    ASSERT_EQ(d.m, 4 * (d.m1 + d.m2 - 1));
    ASSERT_EQ(d.k, std::max<std::size_t>(d.coupling.n, 2) + d.m - 2);
    ASSERT_GE(d.digits.size(), 40u);
    ASSERT_EQ(DigitSeq(d.digits.begin() + static_cast<std::ptrdiff_t>(d.k),
                       d.digits.begin() + static_cast<std::ptrdiff_t>(d.k + 2)),
              c.omega()[d.window]);
  }
}

TEST(PerfectSample, WindowIsInvariantLaw) {
  const Scheme g = Scheme::pseudo_golden(2);
  const ResidualChain c = build_chain(g, 1);
  const StatePmf pi = invariant_pmf(c);
  UniformStream rng(18);
  const Density uniform = Density::uniform(g);
  std::vector<double> freq(c.size(), 0.0);
  const std::size_t draws = 100'000;
  for (std::size_t i = 0; i < draws; ++i) freq[perfect_remainder_sample(uniform, c, 1, rng).window] += 1.0 / draws;
  double tv = 0;
  for (std::size_t z = 0; z < c.size(); ++z) tv += 0.5 * std::abs(freq[z] - pi[z]);
  EXPECT_LE(tv, 0.01);
}

// Contingency table of N against (M1, M2) bucketed.
TEST(PerfectSample, CountsIndependentOfN) {
  const Scheme g = Scheme::pseudo_golden(2);
  const ResidualChain c = build_chain(g, 1);
  const Density f = PiecewiseDensity::from_masses(g, 2, {Number::approx(0.5), Number::approx(0.2), Number::approx(0.3)});
  UniformStream rng(19);
  std::vector<std::vector<double>> by_m1(3, std::vector<double>(4, 0.0)), by_m2 = by_m1;
  for (int i = 0; i < 50'000; ++i) {
    const PerfectDraw d = perfect_remainder_sample(f, c, 1, rng);
    const std::size_t row = std::min<std::size_t>(d.coupling.n, 2);
    by_m1[row][std::min<std::size_t>(d.m1, 4) - 1] += 1;
    by_m2[row][std::min<std::size_t>(d.m2, 4) - 1] += 1;
  }
  EXPECT_GT(independence_test(by_m1).p_value, 0.01);
  EXPECT_GT(independence_test(by_m2).p_value, 0.01);
}

TEST(PerfectSample, SchemeMismatch) {
  UniformStream rng(20);
  EXPECT_THROW(perfect_remainder_sample(Density::uniform(Scheme::base_q(2)), golden(), 1, rng), domain_error);
}
