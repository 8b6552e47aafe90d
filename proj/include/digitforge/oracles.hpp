#ifndef DIGITFORGE_ORACLES_HPP
#define DIGITFORGE_ORACLES_HPP

// Reference computations that share no code path with the library proper. Tests and the
// acceptance suite compare library output against these.

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "digitforge/errors.hpp"
#include "digitforge/number.hpp"

namespace digitforge::oracle {

/// Root of z^m - z^(m-1) - ... - 1 by Newton iteration from 2.
inline Real pseudo_golden_beta(unsigned m) {
  Real z = 2;
  for (int it = 0; it < 200; ++it) {
    Real f = 0, df = 0;
    // f = z^m - sum_{j<m} z^j, evaluated term by term
    Real power = 1;
    for (unsigned j = 0; j < m; ++j) {
      f -= power;
      if (j > 0) df -= Real(j) * mp::pow(z, j - 1);
      power *= z;
    }
    f += power;
    df += Real(m) * mp::pow(z, m - 1);
    z -= f / df;
  }
  return z;
}

/// Length of {x in [0,1) : floor(beta T^{i-1} x) = digits_i, i = 1..n} for T(x) = beta x mod 1,
/// by pulling the target set back one digit at a time.
inline Real beta_cylinder_length(const Real& beta, const std::vector<unsigned>& digits) {
  // Intervals [lo, hi) of the pulled-back set, starting from the whole of [0,1).
  std::vector<std::pair<Real, Real>> set{{Real(0), Real(1)}};
  for (auto it = digits.rbegin(); it != digits.rend(); ++it) {
    const Real k = *it;
    const Real branch_lo = k / beta;
    const Real branch_hi = std::min(Real((k + 1) / beta), Real(1));
    std::vector<std::pair<Real, Real>> next;
    for (const auto& [lo, hi] : set) {
      // x in branch k maps to beta x - k; preimage of [lo, hi) is [(lo + k)/beta, (hi + k)/beta).
      Real a = std::max(Real((lo + k) / beta), branch_lo);
      Real b = std::min(Real((hi + k) / beta), branch_hi);
      if (a < b) next.emplace_back(a, b);
    }
    set = std::move(next);
  }
  Real total = 0;
  for (const auto& [lo, hi] : set) total += hi - lo;
  return total;
}

/// [0; a_1, ..., a_n] by evaluating from the innermost term outwards.
inline Rational continued_fraction_value(const std::vector<unsigned long>& digits) {
  if (digits.empty()) return Rational(0);
  Rational value = Rational(Integer(digits.back()));
  for (auto it = digits.rbegin() + 1; it != digits.rend(); ++it) value = Rational(Integer(*it)) + Rational(1) / value;
  return Rational(1) / value;
}

/// |[0; a_1..a_n] - [0; a_1..a_n + 1]|, the width of the continued-fraction cell.
inline Rational continued_fraction_cell_width(const std::vector<unsigned long>& digits) {
  std::vector<unsigned long> bumped = digits;
  bumped.back() += 1;
  const Rational d = continued_fraction_value(digits) - continued_fraction_value(bumped);
  return d < 0 ? Rational(-d) : d;
}

/// Quadratic irrational (P + sqrt(D)) / Q with D not a square and Q | D - P^2.
struct Surd {
  Integer p, q, d;

  Real value() const { return (Real(p) + mp::sqrt(Real(d))) / Real(q); }
};

inline Integer floor_surd(const Surd& x) {
  const Integer r = mp::sqrt(x.d);
  auto floor_div = [](const Integer& a, const Integer& b) {
    Integer quotient = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) quotient -= 1;
    return quotient;
  };
  return x.q > 0 ? floor_div(x.p + r, x.q) : floor_div(x.p + r + 1, x.q);
}

/// Gauss-map digits floor(1/T^{i-1}(x)) in exact integer arithmetic; returns the digits and T^n(x).
inline std::pair<std::vector<unsigned long>, Surd> gauss_map_digits(Surd x, std::size_t n) {
  if ((x.d - x.p * x.p) % x.q != 0) throw domain_error("surd needs Q | D - P^2");
  std::vector<unsigned long> digits;
  for (std::size_t i = 0; i < n; ++i) {
    // 1/x = (-P + sqrt D) / ((D - P^2)/Q)
    Surd inv{-x.p, (x.d - x.p * x.p) / x.q, x.d};
    const Integer a = floor_surd(inv);
    digits.push_back(static_cast<unsigned long>(a));
    x = Surd{inv.p - a * inv.q, inv.q, inv.d};
  }
  return {digits, x};
}

/// Row vector times matrix, repeated.
inline std::vector<double> power_iteration(const std::vector<std::vector<double>>& p, std::size_t steps) {
  const std::size_t n = p.size();
  std::vector<double> pi(n, 1.0 / static_cast<double>(n));
  for (std::size_t it = 0; it < steps; ++it) {
    std::vector<double> next(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) next[j] += pi[i] * p[i][j];
    pi = std::move(next);
  }
  return pi;
}

}  // namespace digitforge::oracle

#endif  // DIGITFORGE_ORACLES_HPP
