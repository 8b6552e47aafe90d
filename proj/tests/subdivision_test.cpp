#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "digitforge/oracles.hpp"
#include "digitforge/rng.hpp"
#include "digitforge/subdivision.hpp"

using namespace digitforge;

namespace {

Scheme sample_gls() {
  return Scheme::gls({Rational(1, 2), Rational(1, 3), Rational(1, 6)}, {1, -1, 1});
}

std::vector<Scheme> all_schemes() {
  return {Scheme::base_q(2), Scheme::base_q(10), sample_gls(), Scheme::luroth(), Scheme::pseudo_golden(2),
          Scheme::pseudo_golden(3), Scheme::continued_fraction()};
}

bool within(const Interval& inner, const Interval& outer, const Number& slack) {
  return outer.left - slack <= inner.left && inner.right() <= outer.right() + slack;
}

}  // namespace

TEST(Cell, DecimalPrefix) {
  const Interval iv = cell(Scheme::base_q(10), {1, 2, 5});
  EXPECT_EQ(iv.left, Number::ratio(1, 8));
  EXPECT_EQ(iv.length, Number::ratio(1, 1000));
}

TEST(Cell, ContinuedFractionPrefix) {
  const Interval iv = cell(Scheme::continued_fraction(), {2, 2});
  EXPECT_EQ(iv.left, Number::ratio(2, 5));
  EXPECT_EQ(iv.length, Number::ratio(1, 35));
}

TEST(Cell, GoldenMeanForbidsTwoOnes) {
  EXPECT_TRUE(cell_length(Scheme::pseudo_golden(2), {1, 1}).is_zero());
  EXPECT_FALSE(cell_length(Scheme::pseudo_golden(2), {1, 0}).is_zero());
  EXPECT_TRUE(cell_length(Scheme::pseudo_golden(3), {1, 1, 1}).is_zero());
  EXPECT_FALSE(cell_length(Scheme::pseudo_golden(3), {1, 1, 0}).is_zero());
}

TEST(Cell, RootIsUnitInterval) {
  for (const auto& s : all_schemes()) {
    const Interval iv = cell(s, {});
    EXPECT_EQ(iv.left.to_double(), 0.0) << s.name();
    EXPECT_EQ(iv.length.to_double(), 1.0) << s.name();
  }
}

TEST(Cell, UnknownDigitIsADomainError) {
  EXPECT_THROW(cell(Scheme::base_q(10), {10}), domain_error);
  EXPECT_THROW(cell(Scheme::luroth(), {1}), domain_error);
  EXPECT_THROW(cell(Scheme::continued_fraction(), {0}), domain_error);
  EXPECT_THROW(cell(Scheme::pseudo_golden(2), {2}), domain_error);
}

TEST(Children, BinaryFirstLevel) {
  const Children ch = children(Scheme::base_q(2), {}, 10);
  ASSERT_EQ(ch.cells.size(), 2u);
  EXPECT_EQ(ch.cells[0].first, 0u);
  EXPECT_EQ(ch.cells[0].second.left, Number(0));
  EXPECT_EQ(ch.cells[0].second.length, Number::ratio(1, 2));
  EXPECT_EQ(ch.cells[1].second.left, Number::ratio(1, 2));
  EXPECT_TRUE(ch.tail_length.is_zero());
}

TEST(Children, LurothTruncated) {
  const Children ch = children(Scheme::luroth(), {}, 3);
  ASSERT_EQ(ch.cells.size(), 3u);
  EXPECT_EQ(ch.cells[0].first, 2u);
  EXPECT_EQ(ch.cells[0].second.length, Number::ratio(1, 2));
  EXPECT_EQ(ch.cells[1].second.length, Number::ratio(1, 6));
  EXPECT_EQ(ch.cells[2].second.length, Number::ratio(1, 12));
  EXPECT_EQ(ch.tail_length, Number::ratio(1, 4));
}

TEST(Children, GoldenMeanAfterAOne) {
  const Children ch = children(Scheme::pseudo_golden(2), {1}, 10);
  ASSERT_EQ(ch.cells.size(), 1u);
  EXPECT_EQ(ch.cells[0].first, 0u);
}

TEST(Children, ZeroLengthParentThrows) {
  EXPECT_THROW(children(Scheme::pseudo_golden(2), {1, 1}, 10), empty_cell_error);
}

// Children are disjoint, inside the parent, and their lengths add up to the parent length.
TEST(Children, PartitionProperty) {
  for (const auto& s : all_schemes()) {
    const std::size_t max_digits = s.finite_alphabet() ? 0 : 200;
    std::function<void(DigitSeq&, int)> walk = [&](DigitSeq& prefix, int depth) {
      const Interval parent = cell(s, prefix);
      if (parent.length.is_zero()) return;
      const Children ch = children(s, prefix, max_digits);
      Number sum = s.exact() ? Number(0) : Number(Real(0));
      std::vector<Interval> ivs;
      for (const auto& [k, iv] : ch.cells) {
        sum += iv.length;
        EXPECT_TRUE(within(iv, parent, s.exact() ? Number(0) : Number::approx(1e-30))) << s.name();
        ivs.push_back(iv);
      }
      std::sort(ivs.begin(), ivs.end(), [](const Interval& a, const Interval& b) { return a.left < b.left; });
      for (std::size_t i = 1; i < ivs.size(); ++i)
        EXPECT_LE((ivs[i - 1].right() - ivs[i].left).to_double(), 1e-30) << s.name();
      if (s.finite_alphabet()) {
        if (s.exact()) EXPECT_EQ(sum, parent.length) << s.name();
        else EXPECT_NEAR((sum / parent.length).to_double(), 1.0, 1e-12) << s.name();
      } else {
        EXPECT_LE(sum, parent.length);
        EXPECT_EQ(sum + ch.tail_length, parent.length);
      }
      if (depth == 0) return;
      for (Digit k : s.alphabet(3)) {
        prefix.push_back(k);
        walk(prefix, depth - 1);
        prefix.pop_back();
      }
    };
    DigitSeq prefix;
    walk(prefix, 3);
  }
}

// Countable alphabets: the uncovered tail shrinks towards zero as the cutoff grows.
TEST(Children, CountableTailVanishes) {
  for (const auto& s : {Scheme::luroth(), Scheme::continued_fraction()}) {
    Number previous(1);
    for (std::uint64_t cut : {10u, 100u, 1000u}) {
      const Number tail = children(s, {1 + s.min_digit()}, cut).tail_length;
      EXPECT_LT(tail, previous);
      previous = tail;
    }
    EXPECT_LT(previous.to_double(), 1e-3);
  }
}

TEST(Children, GlsReversesUnderNegativeOrientation) {
  const Scheme g = sample_gls();
  const Children pos = children(g, {0}, 0);
  const Children neg = children(g, {1}, 0);
  for (std::size_t i = 1; i < pos.cells.size(); ++i) EXPECT_LT(pos.cells[i - 1].second.left, pos.cells[i].second.left);
  for (std::size_t i = 1; i < neg.cells.size(); ++i) EXPECT_GT(neg.cells[i - 1].second.left, neg.cells[i].second.left);
  // Two negative branches in a row restore the order.
  const Children twice = children(g, {1, 1}, 0);
  for (std::size_t i = 1; i < twice.cells.size(); ++i)
    EXPECT_LT(twice.cells[i - 1].second.left, twice.cells[i].second.left);
}

TEST(DigitsOf, Examples) {
  EXPECT_EQ(digits_of(Scheme::base_q(10), Number::parse("0.125"), 3), (DigitSeq{1, 2, 5}));
  EXPECT_EQ(digits_of(Scheme::luroth(), Number::ratio(7, 10), 2), (DigitSeq{2, 3}));
  EXPECT_EQ(digits_of(Scheme::continued_fraction(), Number::parse("sqrt2-1"), 3), (DigitSeq{2, 2, 2}));
}

TEST(DigitsOf, ContinuedFractionMatchesExactGaussMap) {
  // Quadratic irrationals (P + sqrt D) / Q in (0,1).
  const std::vector<oracle::Surd> xs = {{-1, 1, 2}, {-1, 2, 5}, {-2, 1, 7}, {-3, 2, 13}, {-4, 3, 19}};
  for (const auto& x : xs) {
    const auto [expected, rest] = oracle::gauss_map_digits(x, 8);
    const DigitSeq got = digits_of(Scheme::continued_fraction(), Number(x.value()), 8);
    ASSERT_EQ(got.size(), expected.size());
    for (std::size_t i = 0; i < got.size(); ++i) EXPECT_EQ(got[i], expected[i]);
  }
}

TEST(DigitsOf, EndpointsAreDetected) {
  EXPECT_THROW(digits_of(Scheme::base_q(10), Number::ratio(1, 2), 2), endpoint_error);
  EXPECT_THROW(digits_of(Scheme::base_q(10), Number::parse("0.125"), 4), endpoint_error);
  EXPECT_THROW(digits_of(Scheme::continued_fraction(), Number::ratio(1, 3), 2), endpoint_error);
  EXPECT_THROW(digits_of(Scheme::luroth(), Number::ratio(1, 2), 2), endpoint_error);
  EXPECT_THROW(digits_of(Scheme::base_q(2), Number(0), 1), endpoint_error);
  EXPECT_THROW(digits_of(Scheme::base_q(2), Number::ratio(3, 2), 1), domain_error);
}

TEST(DigitsOf, GoldenMeanHasNoAdjacentOnes) {
  UniformStream rng(5);
  const Scheme g = Scheme::pseudo_golden(2);
  for (int trial = 0; trial < 200; ++trial) {
    const DigitSeq d = digits_of(g, Number::approx(rng.next()), 30);
    for (std::size_t i = 1; i < d.size(); ++i) ASSERT_FALSE(d[i - 1] == 1 && d[i] == 1);
  }
}

TEST(DigitsOf, AgreesWithGreedyBetaExpansion) {
  UniformStream rng(6);
  for (unsigned m : {2u, 3u}) {
    const Scheme g = Scheme::pseudo_golden(m);
    for (int trial = 0; trial < 50; ++trial) {
      const Number x = Number::approx(rng.next());
      EXPECT_EQ(digits_of(g, x, 25), greedy_beta_digits(oracle::pseudo_golden_beta(m), x, 25));
    }
  }
}

// a_n < x < a_n + l_n, and lengths shrink along the path. A double has a short continued
// fraction and so is an endpoint at a shallow level; that scheme gets points with more bits.
TEST(DigitsOf, RoundtripAndShrinkage) {
  UniformStream rng(7);
  for (const auto& s : all_schemes()) {
    for (int trial = 0; trial < 40; ++trial) {
      const double u = rng.next();
      Number x = s.exact() ? Number::exact(u) : Number::approx(u);
      if (s.kind() == SchemeKind::continued_fraction) x = Number(Real(Real(u) + mp::sqrt(Real(2)) * Real(1e-25)));
      const DigitSeq d = digits_of(s, x, 20);
      CellCursor cursor(s);
      Number first_length;
      Number previous(2);
      for (std::size_t n = 0; n < d.size(); ++n) {
        cursor.push(d[n]);
        const Interval iv = cursor.interval();
        ASSERT_LT(iv.left, x) << s.name();
        ASSERT_LT(x, iv.right()) << s.name();
        ASSERT_LE(iv.length, previous) << s.name();
        previous = iv.length;
        if (n == 0) first_length = iv.length;
      }
      EXPECT_LT(previous, first_length) << s.name();
    }
  }
}

TEST(Remainder, Examples) {
  const Number x = Number::ratio(3, 7);
  for (const auto& s : all_schemes()) EXPECT_EQ(remainder(s, x, 0), x);
  EXPECT_EQ(remainder(Scheme::base_q(2), Number::ratio(1, 3), 1), Number::ratio(2, 3));
  const Number r = Number::parse("sqrt2-1");
  EXPECT_NEAR(remainder(Scheme::continued_fraction(), r, 1).to_double(), r.to_double(), 1e-30);
  EXPECT_THROW(remainder(Scheme::base_q(10), Number::parse("0.125"), 3), endpoint_error);
}

TEST(Remainder, MatchesRescaledCellPosition) {
  UniformStream rng(8);
  for (const auto& s : {Scheme::base_q(3), sample_gls(), Scheme::luroth()}) {
    for (int trial = 0; trial < 20; ++trial) {
      const Number x = Number::exact(rng.next());
      CellCursor cursor(s);
      cursor.push(digits_of(s, x, 4));
      const Interval iv = cursor.interval();
      const Number u = (x - iv.left) / iv.length;
      const Number expected = cursor.orientation() > 0 ? u : Number(1) - u;
      EXPECT_EQ(remainder(s, x, 4), expected) << s.name();
    }
  }
}

TEST(ApproximationErrors, Examples) {
  const ApproximationErrors a = approximation_errors(Scheme::base_q(10), Number::parse("0.1251"), 3);
  EXPECT_EQ(a.error, Number::ratio(1, 10000));
  EXPECT_EQ(a.relative_error, Number::ratio(1, 10));

  const Number r = Number::parse("sqrt2-1");
  const ApproximationErrors c = approximation_errors(Scheme::continued_fraction(), r, 2);
  EXPECT_NEAR(c.error.to_double(), std::sqrt(2.0) - 1 - 0.4, 1e-15);
  EXPECT_NEAR(c.relative_error.to_double(), 35 * (std::sqrt(2.0) - 1 - 0.4), 1e-13);
  EXPECT_THROW(approximation_errors(Scheme::base_q(10), Number::parse("0.125"), 3), endpoint_error);
}

TEST(ApproximationErrors, ErrorsShrinkWithDepth) {
  const Number x = Number::exact(0.318309886183);
  for (const auto& s : {Scheme::base_q(2), Scheme::luroth(), Scheme::continued_fraction(), sample_gls()}) {
    double worst_tail = 0;
    for (std::size_t n = 1; n <= 20; ++n) {
      const ApproximationErrors a = approximation_errors(s, x, n);
      ASSERT_GT(a.relative_error, Number(0));
      ASSERT_LT(a.relative_error, Number(1));
      if (n == 20) worst_tail = a.error.to_double();
    }
    EXPECT_LT(worst_tail, 1e-5) << s.name();
  }
}

TEST(PmfFirstLevel, Examples) {
  const DigitPmf dec = pmf_first_level(Scheme::base_q(10));
  ASSERT_EQ(dec.probabilities.size(), 10u);
  for (const auto& [k, p] : dec.probabilities) EXPECT_EQ(p, Number::ratio(1, 10));

  const DigitPmf lur = pmf_first_level(Scheme::luroth(), 50);
  for (const auto& [k, p] : lur.probabilities) {
    const long long kk = static_cast<long long>(k);
    EXPECT_EQ(p, Number::ratio(1, kk * (kk - 1)));
  }
  EXPECT_EQ(lur.tail_mass, Number::ratio(1, 51));

  const DigitPmf cf = pmf_first_level(Scheme::continued_fraction(), 50);
  for (const auto& [k, p] : cf.probabilities) {
    const long long kk = static_cast<long long>(k);
    EXPECT_EQ(p, Number::ratio(1, kk * (kk + 1)));
  }
}

TEST(Oracles, ContinuedFractionLengthsAreExact) {
  std::function<void(std::vector<unsigned long>&)> walk = [&](std::vector<unsigned long>& path) {
    if (!path.empty()) {
      const DigitSeq d(path.begin(), path.end());
      CellCursor cursor(Scheme::continued_fraction());
      cursor.push(d);
      // l^{-1} = q_n (q_n + q_{n-1})
      const Integer inv = cursor.q() * (cursor.q() + cursor.q_prev());
      EXPECT_EQ(cell_length(Scheme::continued_fraction(), d).rational(), Rational(Integer(1), inv));
      EXPECT_EQ(Rational(Integer(1), inv), oracle::continued_fraction_cell_width(path));
    }
    if (path.size() == 4) return;
    for (unsigned long k = 1; k <= 4; ++k) {
      path.push_back(k);
      walk(path);
      path.pop_back();
    }
  };
  std::vector<unsigned long> path;
  walk(path);
}

TEST(Oracles, PseudoGoldenLengthsMatchPreimages) {
  for (unsigned m : {2u, 3u}) {
    const Scheme s = Scheme::pseudo_golden(m);
    const Real beta = oracle::pseudo_golden_beta(m);
    EXPECT_LT(mp::abs(Real(s.beta() - beta)), Real(1e-40));
    for (std::size_t n = 1; n <= 12; ++n) {
      for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << n); ++bits) {
        DigitSeq d(n);
        std::vector<unsigned> od(n);
        for (std::size_t i = 0; i < n; ++i) od[i] = static_cast<unsigned>(d[i] = (bits >> (n - 1 - i)) & 1u);
        ASSERT_NEAR(cell_length(s, d).to_double(), static_cast<double>(oracle::beta_cylinder_length(beta, od)), 1e-10);
      }
    }
  }
}

TEST(InverseBranch, MapsBackIntoTheCell) {
  UniformStream rng(9);
  for (const auto& s : {Scheme::base_q(3), sample_gls(), Scheme::luroth(), Scheme::continued_fraction(),
                        Scheme::pseudo_golden(2)}) {
    for (int trial = 0; trial < 30; ++trial) {
      const Number x = s.exact() ? Number::exact(rng.next()) : Number::approx(rng.next());
      const DigitSeq d = digits_of(s, x, 3);
      const Number y = remainder(s, x, 3);
      const auto inv = inverse_branch(s, d, y);
      ASSERT_TRUE(inv.has_value()) << s.name();
      EXPECT_NEAR(inv->point.to_double(), x.to_double(), 1e-14) << s.name();
      EXPECT_GT(inv->jacobian, Number(0));
    }
  }
}

TEST(InverseBranch, GoldenMeanRejectsInadmissibleConcatenation) {
  const Scheme g = Scheme::pseudo_golden(2);
  // After digit 1 the remainder lives in (0, 1/beta), so y above 1/beta has no preimage.
  EXPECT_FALSE(inverse_branch(g, {1}, Number::approx(0.9)).has_value());
  EXPECT_TRUE(inverse_branch(g, {1}, Number::approx(0.3)).has_value());
  EXPECT_TRUE(inverse_branch(g, {0}, Number::approx(0.9)).has_value());
}

TEST(Scheme, Validation) {
  EXPECT_THROW(Scheme::base_q(1), domain_error);
  EXPECT_THROW(Scheme::pseudo_golden(1), domain_error);
  EXPECT_THROW(Scheme::gls({Rational(1, 2), Rational(1, 3)}, {1, 1}), domain_error);
  EXPECT_THROW(Scheme::gls({Rational(1, 2), Rational(1, 2)}, {1, 0}), domain_error);
  EXPECT_NO_THROW(Scheme::gls({Rational(1, 2), Rational(1, 2)}, {1, -1}));
  EXPECT_THROW(greedy_beta_digits(Real(1), Number::ratio(1, 2), 3), domain_error);
}
