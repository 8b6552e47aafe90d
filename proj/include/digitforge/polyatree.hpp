#ifndef DIGITFORGE_POLYATREE_HPP
#define DIGITFORGE_POLYATREE_HPP

#include <boost/random/beta_distribution.hpp>

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "digitforge/density.hpp"
#include "digitforge/errors.hpp"
#include "digitforge/number.hpp"
#include "digitforge/rng.hpp"
#include "digitforge/subdivision.hpp"

namespace digitforge {

/// Shape parameters (alpha_{prefix,0}, alpha_{prefix,1}) of the Beta law of Y_{prefix,0}.
using AlphaPair = std::pair<double, double>;

/// Mixture of finite Pólya trees over a binary scheme, with random depth N on {0, ..., D}.
class PolyaParams {
 public:
  PolyaParams(Scheme scheme, std::size_t depth, std::vector<double> pmf_n, AlphaPair default_alpha = {1.0, 1.0},
              std::map<DigitSeq, AlphaPair> alphas = {})
      : scheme_(std::move(scheme)),
        depth_(depth),
        pmf_n_(std::move(pmf_n)),
        default_alpha_(default_alpha),
        alphas_(std::move(alphas)) {
    if (scheme_.alphabet_size() != 2) throw domain_error("Pólya trees need a binary scheme");
    if (pmf_n_.size() != depth_ + 1) throw domain_error("pmf of N must have D + 1 entries");
    double total = 0;
    for (double p : pmf_n_) {
      if (p < 0) throw domain_error("negative probability in the pmf of N");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) throw domain_error("pmf of N does not sum to 1");
    auto check = [](const AlphaPair& a) {
      if (a.first < 0 || a.second < 0 || a.first + a.second <= 0)
        throw domain_error("alphas must be non-negative with a positive sum");
    };
    check(default_alpha_);
    for (const auto& [prefix, a] : alphas_) check(a);
  }

  const Scheme& scheme() const { return scheme_; }
  std::size_t depth() const { return depth_; }
  const std::vector<double>& pmf_n() const { return pmf_n_; }
  const AlphaPair& default_alpha() const { return default_alpha_; }
  const std::map<DigitSeq, AlphaPair>& alphas() const { return alphas_; }

  /// Alphas at a parent prefix after zero-forcing: alpha_k = 0 when child k has zero length.
  AlphaPair alpha(const DigitSeq& parent) const {
    auto it = alphas_.find(parent);
    AlphaPair a = it == alphas_.end() ? default_alpha_ : it->second;
    CellCursor cursor(scheme_);
    cursor.push(parent);
    CellCursor c0 = cursor, c1 = cursor;
    c0.push(0);
    c1.push(1);
    if (c0.length().is_zero()) a.first = 0;
    if (c1.length().is_zero()) a.second = 0;
    if (a.first + a.second <= 0) throw domain_error("both children of a cell are forced to zero");
    return a;
  }

 private:
  Scheme scheme_;
  std::size_t depth_;
  std::vector<double> pmf_n_;
  AlphaPair default_alpha_;
  std::map<DigitSeq, AlphaPair> alphas_;
};

/// Y_{prefix,0} for every positive-length prefix above depth D.
struct PolyaRealization {
  std::map<DigitSeq, double> y;

  double y0(const DigitSeq& parent) const {
    auto it = y.find(parent);
    if (it == y.end()) throw domain_error("realization has no splitting variable at this prefix");
    return it->second;
  }
};

inline PolyaRealization sample_realization(const PolyaParams& params, UniformStream& rng) {
  PolyaRealization out;
  std::vector<DigitSeq> level{DigitSeq{}};
  for (std::size_t n = 0; n < params.depth(); ++n) {
    std::vector<DigitSeq> next;
    for (const auto& parent : level) {
      const AlphaPair a = params.alpha(parent);
      double y;
      if (a.first == 0) y = 0.0;
      else if (a.second == 0) y = 1.0;
      else y = boost::random::beta_distribution<double>(a.first, a.second)(rng.engine());
      out.y.emplace(parent, y);
      for (Digit k : {Digit{0}, Digit{1}}) {
        DigitSeq child = parent;
        child.push_back(k);
        if (!cell_length(params.scheme(), child).is_zero()) next.push_back(std::move(child));
      }
    }
    level = std::move(next);
  }
  return out;
}

namespace detail {

inline Number as_number(const Scheme& scheme, double v) {
  return scheme.exact() ? Number::exact(v) : Number::approx(v);
}

// P(X_1..X_n = prefix | Y) for every leading part of a depth-D prefix.
inline std::vector<Number> prefix_probabilities(const PolyaParams& params, const PolyaRealization& real,
                                                const DigitSeq& prefix) {
  std::vector<Number> out{as_number(params.scheme(), 1.0)};
  DigitSeq parent;
  for (Digit k : prefix) {
    const Number y0 = as_number(params.scheme(), real.y0(parent));
    out.push_back(out.back() * (k == 0 ? y0 : Number(1) - y0));
    parent.push_back(k);
  }
  return out;
}

}  // namespace detail

/// f(x | Y) = sum_n P(N = n) P(X_1..X_n = prefix | Y) / l_prefix, as a depth-D piecewise density.
inline PiecewiseDensity random_density(const PolyaParams& params, const PolyaRealization& real) {
  const Scheme& scheme = params.scheme();
  const auto prefixes = admissible_prefixes(scheme, params.depth());
  std::vector<Number> values;
  values.reserve(prefixes.size());
  for (const auto& prefix : prefixes) {
    const auto probs = detail::prefix_probabilities(params, real, prefix);
    CellCursor cursor(scheme);
    Number v = scheme.exact() ? Number(0) : Number(Real(0));
    for (std::size_t n = 0; n <= params.depth(); ++n) {
      if (n > 0) cursor.push(prefix[n - 1]);
      if (params.pmf_n()[n] == 0) continue;
      v += detail::as_number(scheme, params.pmf_n()[n]) * probs[n] / cursor.length();
    }
    values.push_back(std::move(v));
  }
  return PiecewiseDensity::from_values(scheme, params.depth(), std::move(values));
}

struct PolyaDraw {
  Number x;
  std::size_t n = 0;
  DigitSeq s;
};

/// N ~ pmf_N, then digits with P(X_i = 0) = Y_{X_1..X_{i-1},0}, then X uniform on the cell of S.
inline PolyaDraw sample_x(const PolyaParams& params, const PolyaRealization& real, UniformStream& rng) {
  const Scheme& scheme = params.scheme();
  PolyaDraw out;
  const double u = rng.next();
  double acc = 0;
  out.n = params.depth();
  for (std::size_t n = 0; n <= params.depth(); ++n) {
    acc += params.pmf_n()[n];
    if (u <= acc && params.pmf_n()[n] > 0) {
      out.n = n;
      break;
    }
  }
  CellCursor cursor(scheme);
  for (std::size_t i = 0; i < out.n; ++i) {
    const Digit k = rng.next() < real.y0(out.s) ? 0 : 1;
    out.s.push_back(k);
    cursor.push(k);
    if (cursor.length().is_zero()) throw error("Pólya draw reached a zero-length cell");
  }
  const Interval iv = cursor.interval();
  out.x = iv.left + detail::as_number(scheme, rng.next()) * iv.length;
  return out;
}

/// Cell-wise Monte Carlo average of random_density over independent realizations.
inline PiecewiseDensity prior_predictive_mean_density(const PolyaParams& params, std::size_t draws, UniformStream& rng) {
  if (draws == 0) throw domain_error("need at least one realization");
  std::vector<Real> sums;
  for (std::size_t i = 0; i < draws; ++i) {
    const PiecewiseDensity d = random_density(params, sample_realization(params, rng));
    if (sums.empty()) sums.assign(d.size(), Real(0));
    for (std::size_t j = 0; j < d.size(); ++j) sums[j] += d.values()[j].real();
  }
  std::vector<Number> values;
  for (auto& v : sums) values.emplace_back(Real(v / static_cast<double>(draws)));
  return PiecewiseDensity::from_values(params.scheme(), params.depth(), std::move(values));
}

}  // namespace digitforge

#endif  // DIGITFORGE_POLYATREE_HPP
