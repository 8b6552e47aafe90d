#ifndef DIGITFORGE_COUPLING_HPP
#define DIGITFORGE_COUPLING_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "digitforge/density.hpp"
#include "digitforge/errors.hpp"
#include "digitforge/number.hpp"
#include "digitforge/rng.hpp"
#include "digitforge/subdivision.hpp"

namespace digitforge {

struct CellInfimum {
  DigitSeq prefix;
  Number i;  ///< infimum of f over H and the cell
  Number c;  ///< i(prefix) - i(parent); i(root) for the empty prefix
};

/// For zero-length cells c is reported as 0: the joint density lives on a null set there.
inline CellInfimum cell_infimum(const Density& density, const DigitSeq& prefix) {
  CellInfimum out{prefix, density.infimum(prefix), Number(0)};
  if (prefix.empty()) {
    out.c = out.i;
    return out;
  }
  if (cell_length(density.scheme(), prefix).is_zero()) {
    out.c = out.i - out.i;
    return out;
  }
  const DigitSeq parent(prefix.begin(), prefix.end() - 1);
  out.c = out.i - density.infimum(parent);
  return out;
}

/// P(S = prefix) = c * l.
inline Number pmf_s(const Density& density, const DigitSeq& prefix) {
  return cell_infimum(density, prefix).c * cell_length(density.scheme(), prefix);
}

/// A probability known to lie in [value, value + tail_bound].
struct BoundedProbability {
  Number value;
  Number tail_bound;
};

namespace detail {

// Visits every positive-length prefix of length n (countable alphabets cut at max_digits).
inline void for_each_prefix(const Scheme& scheme, std::size_t n, std::uint64_t max_digits,
                            const std::function<void(const DigitSeq&, const Interval&)>& visit) {
  DigitSeq path;
  const auto alphabet = scheme.alphabet(max_digits);
  std::function<void(const CellCursor&)> walk = [&](const CellCursor& cursor) {
    if (path.size() == n) {
      visit(path, cursor.interval());
      return;
    }
    for (Digit k : alphabet) {
      CellCursor next = cursor;
      next.push(k);
      if (next.length().is_zero()) continue;
      path.push_back(k);
      walk(next);
      path.pop_back();
    }
  };
  walk(CellCursor(scheme));
}

inline Number density_supremum(const Density& density) {
  if (density.is_piecewise()) return density.piecewise().supremum();
  return Number::approx(density.monotone().supremum());
}

}  // namespace detail

/// P(N <= n) as the sum of i * l over level-n cells. For countable alphabets the uncovered
/// length times sup f bounds the omitted part.
inline BoundedProbability cdf_n(const Density& density, std::size_t n, std::uint64_t max_digits = 64) {
  const Scheme& scheme = density.scheme();
  Number total = density.is_piecewise() && scheme.exact() ? Number(0) : Number(Real(0));
  Number covered = scheme.exact() ? Number(0) : Number(Real(0));
  detail::for_each_prefix(scheme, n, max_digits, [&](const DigitSeq& prefix, const Interval& iv) {
    total += density.infimum(prefix) * iv.length;
    covered += iv.length;
  });
  const Number uncovered = scheme.root().length - covered;
  return {total, detail::density_supremum(density) * uncovered};
}

/// P(N <= n | X = x) = i_{x_1..x_n} / f(x).
inline Number cdf_n_given_x(const Density& density, const Number& x, std::size_t n) {
  const Number fx = density.pdf(x);
  if (fx.sign() <= 0) throw conditioning_error("f(x) = 0: the conditional law of N given X = x is undefined");
  return density.infimum(digits_of(density.scheme(), x, n)) / fx;
}

/// One realization of the coupling (X, N) together with S, U, E, L.
struct CouplingDraw {
  Number x;
  std::size_t n = 0;
  DigitSeq s;
  Number u;
  Number e;
  Number l;
};

struct CouplingOptions {
  std::size_t depth_cap = 1'000'000;
};

namespace detail {

inline CouplingDraw assemble(const Scheme& scheme, Number x, DigitSeq s) {
  const Interval iv = cell(scheme, s);
  CouplingDraw d;
  d.n = s.size();
  d.e = x - iv.left;
  d.l = iv.length;
  d.u = d.e / d.l;
  d.x = std::move(x);
  d.s = std::move(s);
  return d;
}

}  // namespace detail

/// X ~ f by inverse CDF over cells, W ~ Unif(0, f(X)), N = min{n : i_{X_1..X_n} >= W}.
/// Consumes three uniforms (piecewise densities) or two (monotone densities).
inline CouplingDraw sample_coupled(const Density& density, UniformStream& rng, const CouplingOptions& options = {}) {
  const Scheme& scheme = density.scheme();
  if (density.is_piecewise()) {
    const PiecewiseDensity& pw = density.piecewise();
    const std::size_t j = pw.pick_cell(rng.next());
    const Interval& iv = pw.cells()[j];
    const Number u = scheme.exact() ? Number::exact(rng.next()) : Number::approx(rng.next());
    Number x = iv.left + u * iv.length;
    const Number w = Number::exact(rng.next()) * pw.values()[j];
    const auto& path = pw.path_infima(j);
    std::size_t n = 0;
    while (n < pw.depth() && path[n] < w) ++n;
    const DigitSeq& full = pw.prefixes()[j];
    return detail::assemble(scheme, std::move(x), DigitSeq(full.begin(), full.begin() + static_cast<std::ptrdiff_t>(n)));
  }

  const MonotoneDensity& md = density.monotone();
  const double xd = md.quantile(rng.next());
  Number x = Number::exact(xd);
  const double w = rng.next() * md.pdf(xd);
  DigitSeq s;
  CellCursor cursor(scheme);
  Number y = x;
  double i_n = md.infimum({}).to_double();
  while (i_n < w) {
    if (s.size() >= options.depth_cap)
      throw budget_error("N search exceeded the depth cap of " + std::to_string(options.depth_cap));
    Step st = step(scheme, y);
    s.push_back(st.digit);
    cursor.push(st.digit);
    y = std::move(st.image);
    i_n = md.infimum_on(cursor.interval(), s.front());
  }
  return detail::assemble(scheme, std::move(x), std::move(s));
}

/// Law of a block of digits, truncated for countable alphabets with the omitted mass reported.
struct BlockPmf {
  std::vector<std::pair<DigitSeq, Number>> probabilities;
  Number tail_mass;
};

/// P(R_1..R_m = w | S = prefix) = l_{prefix w} / l_{prefix}; depends on the scheme only.
inline BlockPmf residual_law(const Scheme& scheme, const DigitSeq& prefix, std::size_t m, std::uint64_t max_digits = 64) {
  CellCursor base(scheme);
  base.push(prefix);
  const Number parent = base.length();
  if (parent.is_zero()) throw conditioning_error("conditioning on a zero-length cell");
  BlockPmf out;
  Number total = scheme.exact() ? Number(0) : Number(Real(0));
  DigitSeq suffix;
  const auto alphabet = scheme.alphabet(max_digits);
  std::function<void(const CellCursor&)> walk = [&](const CellCursor& cursor) {
    if (suffix.size() == m) {
      const Number p = cursor.length() / parent;
      total += p;
      out.probabilities.emplace_back(suffix, p);
      return;
    }
    for (Digit k : alphabet) {
      CellCursor next = cursor;
      next.push(k);
      if (next.length().is_zero()) continue;
      suffix.push_back(k);
      walk(next);
      suffix.pop_back();
    }
  };
  walk(base);
  out.tail_mass = Number(1) - total;
  return out;
}

}  // namespace digitforge

#endif  // DIGITFORGE_COUPLING_HPP
