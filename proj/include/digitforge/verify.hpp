#ifndef DIGITFORGE_VERIFY_HPP
#define DIGITFORGE_VERIFY_HPP

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "digitforge/coupling.hpp"
#include "digitforge/density.hpp"
#include "digitforge/errors.hpp"
#include "digitforge/markov.hpp"
#include "digitforge/readonce.hpp"
#include "digitforge/rng.hpp"
#include "digitforge/subdivision.hpp"

namespace digitforge {

struct PushforwardValue {
  Number value;
  Number tail_bound;     ///< bound on |value - f^[n](x)| from truncating countable alphabets
  bool warning = false;  ///< tail_bound above the tolerance passed in
};

namespace detail {

// Gauss-map pushforward of a closed-form density, in double precision. The omitted last-digit
// terms k > K are replaced by the integral over k > K + 1/2 (midpoint rule), which the cdf gives in
// closed form because u = 1/(k + x) turns the sum into an integral of f against the inverse branch.
inline void cf_pushforward(const MonotoneDensity& md, std::size_t n, double x, std::uint64_t cutoff, double& value,
                           double& tail, double& uncovered) {
  struct Conv {
    double p, pp, q, qp;
  };
  std::function<void(const Conv&, std::size_t)> walk = [&](const Conv& c, std::size_t level) {
    const bool last = level + 1 == n;
    for (std::uint64_t k = 1; k <= cutoff; ++k) {
      const double kd = static_cast<double>(k);
      const Conv nc{kd * c.p + c.pp, c.p, kd * c.q + c.qp, c.q};
      if (last) {
        const double den = nc.q + x * nc.qp;
        const double point = (nc.p + x * nc.pp) / den;
        value += md.pdf(point) / (den * den);
      } else {
        walk(nc, level + 1);
      }
    }
    if (last) {
      // Continuous last digit kappa >= cutoff + 1/2: point = (kappa p + pp + x p) / (kappa q + qp + x q).
      auto at = [&](double kappa) { return ((kappa + x) * c.p + c.pp) / ((kappa + x) * c.q + c.qp); };
      const double lim = c.q == 0 ? 0.0 : c.p / c.q;
      value += std::abs(md.cdf(at(static_cast<double>(cutoff) + 0.5)) - md.cdf(lim));
      const double kk = static_cast<double>(cutoff);
      tail += md.supremum() / (12.0 * kk * kk * kk);
    } else {
      // Cell lengths beyond the cutoff at this level: 1/(q (q + q')) summed, i.e. the gap to the endpoint.
      const double kk = static_cast<double>(cutoff) + 1.0;
      const double a = c.q == 0 ? 0.0 : c.p / c.q;
      const double bnd = (kk * c.p + c.pp) / (kk * c.q + c.qp);
      uncovered += std::abs(bnd - a);
    }
  };
  walk(Conv{0.0, 1.0, 1.0, 0.0}, 0);
}

}  // namespace detail

/// f^[n](x) = sum over positive-length prefixes of f(inverse branch at x) times its Jacobian.
///
/// Piecewise densities are evaluated exactly on finite alphabets. Countable alphabets are cut at
/// floor(max_terms^(1/n)) per digit. Closed-form densities use double precision; on the
/// continued-fraction scheme the last digit also gets a closed-form tail correction.
inline PushforwardValue pushforward_density(const Density& density, std::size_t n, const Number& x,
                                            std::uint64_t max_terms = 10'000, double tolerance = 1e-6) {
  if (n == 0) throw domain_error("pushforward needs n >= 1");
  if (!(Number(0) < x && x < Number(1))) throw domain_error("x must lie in (0,1)");
  const Scheme& scheme = density.scheme();
  const auto per_digit = static_cast<std::uint64_t>(
      std::max(1.0, std::floor(std::pow(static_cast<double>(max_terms), 1.0 / static_cast<double>(n)) + 1e-9)));
  if (density.is_piecewise()) {
    const PiecewiseDensity& pw = density.piecewise();
    const bool countable = !scheme.finite_alphabet();
    Number total = scheme.exact() && x.is_exact() ? Number(0) : Number(Real(0));
    Number covered(0);
    detail::for_each_prefix(scheme, n, countable ? per_digit : 0, [&](const DigitSeq& prefix, const Interval& iv) {
      covered += iv.length;
      const auto br = inverse_branch(scheme, prefix, x);
      if (!br) return;
      total += pw.pdf(br->point) * br->jacobian;
    });
    if (!countable) return {total, Number(0), false};
    // Linear branches have Jacobian equal to the cell length; Gauss-map branches at most twice it.
    const double factor = scheme.kind() == SchemeKind::continued_fraction ? 2.0 : 1.0;
    const double tail = factor * pw.supremum().to_double() * (Number(1) - covered).to_double();
    return {total, Number::approx(tail), tail > tolerance};
  }

  const MonotoneDensity& md = density.monotone();
  double value = 0, tail = 0, uncovered = 0;
  if (scheme.kind() == SchemeKind::continued_fraction) {
    detail::cf_pushforward(md, n, x.to_double(), per_digit, value, tail, uncovered);
    tail += 2.0 * md.supremum() * uncovered;
  } else {
    Number covered(0);
    detail::for_each_prefix(scheme, n, per_digit, [&](const DigitSeq& prefix, const Interval& iv) {
      covered += iv.length;
      const auto br = inverse_branch(scheme, prefix, x);
      if (br) value += md.pdf(br->point.to_double()) * br->jacobian.to_double();
    });
    tail = md.supremum() * (Number(1) - covered).to_double();
  }
  return {Number::approx(value), Number::approx(tail), tail > tolerance};
}

/// Frequencies of depth-d cells, keyed by digit prefix.
using CellFrequencies = std::map<DigitSeq, double>;

inline CellFrequencies cell_frequencies(const std::vector<DigitSeq>& samples, std::size_t depth) {
  if (samples.empty()) throw domain_error("empty sample");
  CellFrequencies out;
  const double w = 1.0 / static_cast<double>(samples.size());
  for (const auto& s : samples) {
    if (s.size() < depth) throw domain_error("sample has fewer digits than the requested depth");
    out[DigitSeq(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(depth))] += w;
  }
  return out;
}

/// Half-L1 distance between empirical depth-d cell frequencies and a reference cell-mass function.
/// Reference mass on cells never observed enters through 1 - (reference mass of observed cells).
inline double empirical_tv_cells(const std::vector<DigitSeq>& samples,
                                 const std::function<double(const DigitSeq&)>& reference_mass, std::size_t depth) {
  const CellFrequencies emp = cell_frequencies(samples, depth);
  double l1 = 0, seen = 0;
  for (const auto& [prefix, freq] : emp) {
    const double ref = reference_mass(prefix);
    seen += ref;
    l1 += std::abs(freq - ref);
  }
  l1 += std::max(0.0, 1.0 - seen);
  return std::min(1.0, 0.5 * l1);
}

/// Reference masses of depth-d cells under a piecewise density of depth <= d.
inline std::function<double(const DigitSeq&)> cell_masses(const PiecewiseDensity& reference, std::size_t depth) {
  if (reference.depth() > depth) throw domain_error("reference density is finer than the TV partition");
  return [&reference](const DigitSeq& prefix) {
    const DigitSeq head(prefix.begin(), prefix.begin() + static_cast<std::ptrdiff_t>(reference.depth()));
    const std::size_t j = reference.index_of(head);
    if (j == reference.size()) return 0.0;
    return (reference.values()[j] * cell_length(reference.scheme(), prefix)).to_double();
  };
}

inline double empirical_tv_cells(const std::vector<DigitSeq>& samples, const PiecewiseDensity& reference,
                                 std::size_t depth) {
  return empirical_tv_cells(samples, cell_masses(reference, depth), depth);
}

inline double empirical_tv_cells(const std::vector<Number>& samples, const PiecewiseDensity& reference,
                                 std::size_t depth) {
  std::vector<DigitSeq> digits;
  digits.reserve(samples.size());
  for (const auto& x : samples) digits.push_back(digits_of(reference.scheme(), x, depth));
  return empirical_tv_cells(digits, reference, depth);
}

/// Half-L1 distance between two empirical laws.
inline double tv_between(const CellFrequencies& a, const CellFrequencies& b) {
  double l1 = 0;
  for (const auto& [k, v] : a) {
    auto it = b.find(k);
    l1 += std::abs(v - (it == b.end() ? 0.0 : it->second));
  }
  for (const auto& [k, v] : b)
    if (!a.count(k)) l1 += v;
  return 0.5 * l1;
}

struct TvReport {
  std::size_t n = 0;
  double tv_empirical = 0;
  double bound = 0;       ///< empirical P(N > n) or P(K > n)
  double half_width = 0;  ///< Monte Carlo slack of tv and bound combined
  std::size_t sample_size = 0;
  std::size_t depth = 0;
  bool holds() const { return tv_empirical <= bound + 3.0 * half_width; }
};

enum class CouplingMode { coupled, perfect };

struct CouplingCheckOptions {
  std::size_t depth = 4;
  std::size_t block_parameter = 0;  ///< 0 selects the default probe
};

namespace detail {

inline double tv_half_width(const std::function<double(const DigitSeq&)>& ref, const CellFrequencies& emp,
                            double bound, std::size_t draws) {
  const double n = static_cast<double>(draws);
  double acc = 0;
  for (const auto& [prefix, freq] : emp) {
    const double p = std::max(ref(prefix), freq);
    acc += std::sqrt(p * (1 - p) / n);
  }
  return 0.5 * acc + std::sqrt(bound * (1 - bound) / n);
}

}  // namespace detail

/// Empirical TV(Q^[n], mu_inv) over depth-d cells against the empirical P(N > n) (coupled mode,
/// schemes with s = 0) or P(K > n) (perfect mode, order-s chain `chain`).
inline std::vector<TvReport> check_coupling_inequality(const Density& density, CouplingMode mode,
                                                       const std::vector<std::size_t>& n_values, std::size_t draws,
                                                       UniformStream& rng, const ResidualChain* chain = nullptr,
                                                       const CouplingCheckOptions& options = {}) {
  const Scheme& scheme = density.scheme();
  if (draws == 0) throw domain_error("need at least one draw");
  const std::size_t n_max = n_values.empty() ? 0 : *std::max_element(n_values.begin(), n_values.end());
  const std::size_t d = options.depth;
  std::vector<std::vector<DigitSeq>> windows(n_values.size());
  std::vector<std::size_t> exceed(n_values.size(), 0);
  std::function<double(const DigitSeq&)> reference;
  std::optional<PiecewiseDensity> f_inv;

  if (mode == CouplingMode::coupled) {
    if (!scheme.linear_branches())
      throw domain_error("coupled mode needs a scheme with Markov order s = 0 (" + scheme.name() + " is not)");
    reference = [&scheme](const DigitSeq& prefix) { return cell_length(scheme, prefix).to_double(); };
    for (std::size_t i = 0; i < draws; ++i) {
      const CouplingDraw draw = sample_coupled(density, rng);
      const DigitSeq digits = digits_of(scheme, draw.x, n_max + d);
      for (std::size_t j = 0; j < n_values.size(); ++j) {
        const auto from = digits.begin() + static_cast<std::ptrdiff_t>(n_values[j]);
        windows[j].emplace_back(from, from + static_cast<std::ptrdiff_t>(d));
        if (draw.n > n_values[j]) ++exceed[j];
      }
    }
  } else {
    if (chain == nullptr) throw domain_error("perfect mode needs a residual chain");
    f_inv = f_inv_density(*chain, invariant_pmf(*chain));
    reference = cell_masses(*f_inv, d);
    std::size_t t = options.block_parameter;
    if (t == 0) t = default_block_parameter(*chain, rng);
    PerfectOptions po;
    po.min_digits = n_max + d;
    for (std::size_t i = 0; i < draws; ++i) {
      const PerfectDraw draw = perfect_remainder_sample(density, *chain, t, rng, po);
      for (std::size_t j = 0; j < n_values.size(); ++j) {
        const auto from = draw.digits.begin() + static_cast<std::ptrdiff_t>(n_values[j]);
        windows[j].emplace_back(from, from + static_cast<std::ptrdiff_t>(d));
        if (draw.k > n_values[j]) ++exceed[j];
      }
    }
  }

  std::vector<TvReport> out;
  for (std::size_t j = 0; j < n_values.size(); ++j) {
    TvReport r;
    r.n = n_values[j];
    r.depth = d;
    r.sample_size = draws;
    r.tv_empirical = empirical_tv_cells(windows[j], reference, d);
    r.bound = static_cast<double>(exceed[j]) / static_cast<double>(draws);
    r.half_width = detail::tv_half_width(reference, cell_frequencies(windows[j], d), r.bound, draws);
    out.push_back(r);
  }
  return out;
}

/// One-sample Kolmogorov-Smirnov statistic against Unif(0,1).
inline double ks_uniform(std::vector<double> samples) {
  if (samples.empty()) throw domain_error("empty sample");
  for (double v : samples)
    if (!(v > 0.0 && v < 1.0)) throw domain_error("KS sample value outside (0,1)");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double lo = static_cast<double>(i) / n;
    const double hi = static_cast<double>(i + 1) / n;
    d = std::max({d, hi - samples[i], samples[i] - lo});
  }
  return d;
}

/// Asymptotic 1% critical value of the KS statistic.
inline double ks_critical_1pct(std::size_t n) { return 1.63 / std::sqrt(static_cast<double>(n)); }

struct ChiSquareResult {
  double statistic = 0;
  std::size_t dof = 0;
  double p_value = 1;
};

inline double chi_square_p_value(double statistic, std::size_t dof) {
  if (dof == 0) return 1.0;
  boost::math::chi_squared dist(static_cast<double>(dof));
  return boost::math::cdf(boost::math::complement(dist, statistic));
}

/// Pearson goodness of fit. Categories with expected count below `min_expected` are pooled into one.
inline ChiSquareResult chi_square(const std::vector<double>& expected, const std::vector<double>& counts,
                                  double min_expected = 5.0) {
  if (expected.size() != counts.size()) throw domain_error("expected and observed supports differ");
  double total = 0, mass = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (expected[i] < 0 || counts[i] < 0) throw domain_error("negative probability or count");
    if (expected[i] == 0 && counts[i] > 0) throw domain_error("observation outside the expected support");
    total += counts[i];
    mass += expected[i];
  }
  if (total <= 0) throw domain_error("no observations");
  std::vector<std::pair<double, double>> cells;  // (expected count, observed)
  double pooled_e = 0, pooled_o = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (expected[i] == 0) continue;
    const double e = expected[i] / mass * total;
    if (e < min_expected) {
      pooled_e += e;
      pooled_o += counts[i];
    } else {
      cells.emplace_back(e, counts[i]);
    }
  }
  if (pooled_e > 0) {
    if (pooled_e < min_expected && !cells.empty()) {
      auto smallest = std::min_element(cells.begin(), cells.end());
      smallest->first += pooled_e;
      smallest->second += pooled_o;
    } else {
      cells.emplace_back(pooled_e, pooled_o);
    }
  }
  ChiSquareResult r;
  for (const auto& [e, o] : cells) r.statistic += (o - e) * (o - e) / e;
  r.dof = cells.empty() ? 0 : cells.size() - 1;
  r.p_value = chi_square_p_value(r.statistic, r.dof);
  return r;
}

/// Pearson test of independence for a contingency table; empty rows and columns are dropped.
inline ChiSquareResult independence_test(const std::vector<std::vector<double>>& table) {
  std::vector<double> rows, cols;
  double total = 0;
  for (const auto& row : table) {
    double r = 0;
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (cols.size() <= j) cols.resize(j + 1, 0.0);
      cols[j] += row[j];
      r += row[j];
    }
    rows.push_back(r);
    total += r;
  }
  if (total <= 0) throw domain_error("empty contingency table");
  ChiSquareResult out;
  std::size_t live_rows = 0, live_cols = 0;
  for (double r : rows) live_rows += r > 0 ? 1 : 0;
  for (double c : cols) live_cols += c > 0 ? 1 : 0;
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (rows[i] == 0) continue;
    for (std::size_t j = 0; j < cols.size(); ++j) {
      if (cols[j] == 0) continue;
      const double e = rows[i] * cols[j] / total;
      const double o = j < table[i].size() ? table[i][j] : 0.0;
      out.statistic += (o - e) * (o - e) / e;
    }
  }
  out.dof = live_rows > 1 && live_cols > 1 ? (live_rows - 1) * (live_cols - 1) : 0;
  out.p_value = chi_square_p_value(out.statistic, out.dof);
  return out;
}

}  // namespace digitforge

#endif  // DIGITFORGE_VERIFY_HPP
