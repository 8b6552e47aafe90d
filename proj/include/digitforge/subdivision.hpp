#ifndef DIGITFORGE_SUBDIVISION_HPP
#define DIGITFORGE_SUBDIVISION_HPP

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "digitforge/errors.hpp"
#include "digitforge/number.hpp"

namespace digitforge {

/// A symbol of the alphabet. For Lüroth and continued fractions this is the digit value itself.
using Digit = std::uint64_t;
/// A finite prefix (x_1, ..., x_n); the empty sequence is the root prefix.
using DigitSeq = std::vector<Digit>;

/// Open interval (left, left + length).
struct Interval {
  Number left;
  Number length;

  Number right() const { return left + length; }
  bool empty() const { return length.is_zero(); }
  bool contains(const Number& x) const { return left < x && x < right(); }
};

enum class SchemeKind { base_q, gls, luroth, pseudo_golden, continued_fraction };

/// A nested-subdivision generator of the unit interval.
///
/// Five families are supported: base-q expansions, generalized Lüroth series
/// (piecewise linear branches with slopes +-1/l_k), the original Lüroth series,
/// beta-expansions for the pseudo golden mean of order m, and regular continued
/// fractions. All cells are open; endpoints form the null set D and are
/// reported through endpoint_error.
class Scheme {
 public:
  /// First-level geometry of a linear-branch scheme.
  struct Branch {
    Number left;
    Number length;
    int sign = 1;
  };

  static Scheme base_q(unsigned q) {
    if (q < 2) throw domain_error("base_q requires q >= 2");
    Scheme s(SchemeKind::base_q);
    s.q_ = q;
    return s;
  }

  /// Generalized Lüroth series with first-level lengths (in digit order, summing to 1) and slope signs.
  static Scheme gls(std::vector<Rational> lengths, std::vector<int> signs) {
    if (lengths.size() < 2) throw domain_error("gls needs at least two branches");
    if (lengths.size() != signs.size()) throw domain_error("gls lengths and signs differ in size");
    Rational total = 0;
    for (const auto& l : lengths) {
      if (l.sign() <= 0) throw domain_error("gls lengths must be positive");
      total += l;
    }
    if (total != 1) throw domain_error("gls lengths must sum to the root length 1");
    for (int t : signs)
      if (t != 1 && t != -1) throw domain_error("gls signs must be +1 or -1");
    Scheme s(SchemeKind::gls);
    Rational left = 0;
    for (std::size_t k = 0; k < lengths.size(); ++k) {
      s.branches_.push_back({Number(left), Number(lengths[k]), signs[k]});
      left += lengths[k];
    }
    return s;
  }

  static Scheme luroth() { return Scheme(SchemeKind::luroth); }

  /// Beta-expansion with beta the positive root of z^m - z^(m-1) - ... - z - 1.
  static Scheme pseudo_golden(unsigned order) {
    if (order < 2) throw domain_error("pseudo_golden requires order m >= 2");
    Scheme s(SchemeKind::pseudo_golden);
    s.order_ = order;
    s.beta_ = pseudo_golden_root(order);
    s.inv_beta_ = Real(1) / s.beta_;
    // run_factor_[r] = beta^r - sum_{j<r} beta^j, the cell length scale after r trailing ones.
    s.run_factor_.push_back(Real(1));
    for (unsigned r = 1; r < order; ++r) s.run_factor_.push_back(Real(s.beta_ * s.run_factor_.back() - 1));
    return s;
  }

  static Scheme continued_fraction() { return Scheme(SchemeKind::continued_fraction); }

  SchemeKind kind() const { return kind_; }

  std::string name() const {
    switch (kind_) {
      case SchemeKind::base_q: return "base_q:" + std::to_string(q_);
      case SchemeKind::gls: return "gls:" + std::to_string(branches_.size());
      case SchemeKind::luroth: return "luroth";
      case SchemeKind::pseudo_golden: return "pseudo_golden:" + std::to_string(order_);
      case SchemeKind::continued_fraction: return "continued_fraction";
    }
    return "unknown";
  }

  /// True when cells are computed in exact rational arithmetic.
  bool exact() const { return kind_ != SchemeKind::pseudo_golden; }

  bool finite_alphabet() const { return kind_ != SchemeKind::luroth && kind_ != SchemeKind::continued_fraction; }

  /// Number of symbols, 0 for countable alphabets.
  std::size_t alphabet_size() const {
    switch (kind_) {
      case SchemeKind::base_q: return q_;
      case SchemeKind::gls: return branches_.size();
      case SchemeKind::pseudo_golden: return 2;
      default: return 0;
    }
  }

  Digit min_digit() const {
    if (kind_ == SchemeKind::luroth) return 2;
    if (kind_ == SchemeKind::continued_fraction) return 1;
    return 0;
  }

  bool in_alphabet(Digit k) const {
    if (finite_alphabet()) return k < alphabet_size();
    return k >= min_digit();
  }

  /// The alphabet in ascending order; countable alphabets are cut after `max_digits` symbols.
  std::vector<Digit> alphabet(std::uint64_t max_digits) const {
    const std::uint64_t count = finite_alphabet() ? alphabet_size() : max_digits;
    std::vector<Digit> out(count);
    for (std::uint64_t i = 0; i < count; ++i) out[i] = min_digit() + i;
    return out;
  }

  Interval root() const { return {Number(0), Number(1)}; }

  /// Each cylinder is mapped affinely onto (0,1) by T^n (base-q, GLS, Lüroth).
  bool linear_branches() const {
    return kind_ == SchemeKind::base_q || kind_ == SchemeKind::gls || kind_ == SchemeKind::luroth;
  }

  Branch branch(Digit k) const {
    require_digit(k);
    switch (kind_) {
      case SchemeKind::base_q: return {Number::ratio(static_cast<long long>(k), q_), Number::ratio(1, q_), 1};
      case SchemeKind::gls: return branches_[k];
      case SchemeKind::luroth: {
        const Integer kk(k);
        return {Number(Rational(Integer(1), kk)), Number(Rational(Integer(1), kk * (kk - 1))), 1};
      }
      default: throw unsupported_error(name() + " has no linear branches");
    }
  }

  unsigned q() const { return q_; }
  unsigned order() const { return order_; }
  const Real& beta() const { return beta_; }
  const Real& inv_beta() const { return inv_beta_; }
  const std::vector<Real>& run_factors() const { return run_factor_; }
  const std::vector<Branch>& gls_branches() const { return branches_; }

  void require_digit(Digit k) const {
    if (!in_alphabet(k)) throw domain_error("digit " + std::to_string(k) + " is not in the alphabet of " + name());
  }

  friend bool operator==(const Scheme& a, const Scheme& b) {
    if (a.kind_ != b.kind_ || a.q_ != b.q_ || a.order_ != b.order_) return false;
    if (a.branches_.size() != b.branches_.size()) return false;
    for (std::size_t i = 0; i < a.branches_.size(); ++i)
      if (a.branches_[i].length != b.branches_[i].length || a.branches_[i].sign != b.branches_[i].sign) return false;
    return true;
  }

 private:
  explicit Scheme(SchemeKind kind) : kind_(kind) {}

  static Real pseudo_golden_root(unsigned m) {
    auto poly = [m](const Real& z) {
      Real acc = 1;  // Horner for z^m - z^(m-1) - ... - 1
      for (unsigned i = 0; i < m; ++i) acc = acc * z - 1;
      return acc;
    };
    Real lo = 1, hi = 2;
    if (poly(lo).sign() >= 0 || poly(hi).sign() <= 0) throw error("pseudo golden root not bracketed in (1,2)");
    for (int i = 0; i < 200; ++i) {
      Real mid = (lo + hi) / 2;
      if (poly(mid).sign() < 0) lo = mid;
      else hi = mid;
    }
    return (lo + hi) / 2;
  }

  SchemeKind kind_;
  unsigned q_ = 0;
  unsigned order_ = 0;
  std::vector<Branch> branches_;
  Real beta_ = 0;
  Real inv_beta_ = 0;
  std::vector<Real> run_factor_;
};

/// Incremental cell computation along a digit path; `push` is O(1) for every scheme.
///
/// Holds a pointer to the scheme, which must outlive the cursor.
class CellCursor {
 public:
  explicit CellCursor(const Scheme& scheme) : scheme_(&scheme) {
    if (scheme.kind() == SchemeKind::pseudo_golden) {
      left_ = Number(Real(0));
      scale_ = 1;
    }
  }

  void push(Digit k) {
    const Scheme& s = *scheme_;
    s.require_digit(k);
    switch (s.kind()) {
      case SchemeKind::base_q:
      case SchemeKind::gls:
      case SchemeKind::luroth: {
        const Scheme::Branch b = s.branch(k);
        if (sign_ > 0) left_ += length_ * b.left;
        else left_ += length_ * (Number(1) - b.left - b.length);
        length_ *= b.length;
        sign_ *= b.sign;
        break;
      }
      case SchemeKind::pseudo_golden: {
        // A 0 after m-1 ones is the only admissible child, so it inherits the parent length.
        const bool forced = k == 0 && run_ + 1 == s.order();
        scale_ *= s.inv_beta();
        if (k == 1) {
          left_ += Number(scale_);
          if (++run_ >= s.order()) dead_ = true;
        } else {
          run_ = 0;
        }
        if (dead_) length_ = Number(Real(0));
        else if (!forced) length_ = Number(Real(scale_ * s.run_factors()[run_]));
        break;
      }
      case SchemeKind::continued_fraction: {
        const Integer kk(k);
        Integer p = kk * p_ + p_prev_;
        Integer q = kk * q_ + q_prev_;
        p_prev_ = std::move(p_);
        q_prev_ = std::move(q_);
        p_ = std::move(p);
        q_ = std::move(q);
        break;
      }
    }
    ++depth_;
  }

  void push(const DigitSeq& digits) {
    for (Digit k : digits) push(k);
  }

  Interval interval() const {
    if (scheme_->kind() == SchemeKind::continued_fraction) {
      if (depth_ == 0) return scheme_->root();
      const Rational a(p_, q_);
      const Rational b(p_ + p_prev_, q_ + q_prev_);
      const Rational len(Integer(1), q_ * (q_ + q_prev_));
      return {Number(depth_ % 2 == 0 ? a : b), Number(len)};
    }
    return {left_, length_};
  }

  Number length() const {
    if (scheme_->kind() == SchemeKind::continued_fraction) {
      if (depth_ == 0) return Number(1);
      return Number(Rational(Integer(1), q_ * (q_ + q_prev_)));
    }
    return length_;
  }

  std::size_t depth() const { return depth_; }

  /// Product of branch signs along the path (linear-branch schemes).
  int orientation() const { return sign_; }

  /// beta^-n for the pseudo golden scheme.
  const Real& scale() const { return scale_; }

  /// Convergent numerators and denominators p_n, p_{n-1}, q_n, q_{n-1}.
  const Integer& p() const { return p_; }
  const Integer& p_prev() const { return p_prev_; }
  const Integer& q() const { return q_; }
  const Integer& q_prev() const { return q_prev_; }

 private:
  const Scheme* scheme_;
  std::size_t depth_ = 0;
  Number left_ = Number(0);
  Number length_ = Number(1);
  int sign_ = 1;
  Real scale_ = 1;
  unsigned run_ = 0;
  bool dead_ = false;
  Integer p_ = 0, p_prev_ = 1, q_ = 1, q_prev_ = 0;
};

/// (a_{x1..xn}, l_{x1..xn}); zero length for inadmissible prefixes, the root for the empty prefix.
inline Interval cell(const Scheme& scheme, const DigitSeq& prefix) {
  CellCursor cursor(scheme);
  cursor.push(prefix);
  return cursor.interval();
}

inline Number cell_length(const Scheme& scheme, const DigitSeq& prefix) {
  CellCursor cursor(scheme);
  cursor.push(prefix);
  return cursor.length();
}

/// Positive-length children of a cell, in digit order, plus the parent length not covered
/// (non-zero only when a countable alphabet is truncated).
struct Children {
  std::vector<std::pair<Digit, Interval>> cells;
  Number tail_length;
};

inline Children children(const Scheme& scheme, const DigitSeq& prefix, std::uint64_t max_digits) {
  CellCursor parent(scheme);
  parent.push(prefix);
  const Number parent_length = parent.length();
  if (parent_length.is_zero()) throw empty_cell_error("cannot subdivide a zero-length cell");
  Children out;
  Number covered = scheme.exact() ? Number(0) : Number(Real(0));
  for (Digit k : scheme.alphabet(max_digits)) {
    CellCursor child = parent;
    child.push(k);
    Interval iv = child.interval();
    if (iv.empty()) continue;
    covered += iv.length;
    out.cells.emplace_back(k, std::move(iv));
  }
  out.tail_length = parent_length - covered;
  return out;
}

/// One application of the digit map: the digit of y and T(y).
struct Step {
  Digit digit;
  Number image;
};

namespace detail {

inline Digit to_digit(const Integer& k) {
  if (k < 0 || k > Integer(std::uint64_t{1} << 62)) throw domain_error("digit out of representable range");
  return static_cast<Digit>(k);
}

}  // namespace detail

/// Digits follow the floor convention, so a point on the left end of a cell gets that cell's digit
/// and an image of 0 (or 1 for a decreasing branch). Reading a digit from such an image raises
/// endpoint_error.
inline Step step(const Scheme& scheme, const Number& y) {
  if (y.is_zero() || y == Number(1)) throw endpoint_error("remainder " + y.str() + " is a subdivision endpoint");
  if (!(Number(0) < y && y < Number(1))) throw domain_error("point " + y.str() + " is outside (0,1)");
  switch (scheme.kind()) {
    case SchemeKind::base_q: {
      const Number v = Number(static_cast<int>(scheme.q())) * y;
      const Integer k = v.floor();
      return {detail::to_digit(k), v - Number(Rational(k))};
    }
    case SchemeKind::gls: {
      const auto& branches = scheme.gls_branches();
      for (std::size_t k = 0; k < branches.size(); ++k) {
        const auto& b = branches[k];
        if (y < b.left + b.length) {
          const Number image = b.sign > 0 ? (y - b.left) / b.length : (b.left + b.length - y) / b.length;
          return {static_cast<Digit>(k), image};
        }
      }
      throw domain_error("point outside the gls partition");
    }
    case SchemeKind::luroth: {
      // Digit k covers [1/k, 1/(k-1)).
      const Number v = Number(1) / y;
      const Integer k = v.is_integer() ? v.floor() : v.floor() + 1;
      const Number kk{Rational(k)};
      return {detail::to_digit(k), (kk - 1) * kk * y - kk + 1};
    }
    case SchemeKind::pseudo_golden: {
      const Number v = Number(scheme.beta()) * y;
      const Integer k = v.floor();
      return {detail::to_digit(k), v - Number(Real(k.str()))};
    }
    case SchemeKind::continued_fraction: {
      const Number v = Number(1) / y;
      const Integer k = v.floor();
      return {detail::to_digit(k), v - Number(Rational(k))};
    }
  }
  throw domain_error("unknown scheme");
}

/// First n digits of x; x must lie in the interior of the root and avoid D up to level n.
inline DigitSeq digits_of(const Scheme& scheme, const Number& x, std::size_t n) {
  DigitSeq out;
  out.reserve(n);
  Number y = x;
  for (std::size_t i = 0; i < n; ++i) {
    Step st = step(scheme, y);
    out.push_back(st.digit);
    y = std::move(st.image);
  }
  return out;
}

/// The n-th scaled remainder x^[n] = T^n(x) = .x_{n+1} x_{n+2} ...
inline Number remainder(const Scheme& scheme, const Number& x, std::size_t n) {
  if (n == 0) return x;
  Number y = x;
  for (std::size_t i = 0; i < n; ++i) y = step(scheme, y).image;
  if (y.is_zero() || y == Number(1)) throw endpoint_error("remainder " + y.str() + " is a subdivision endpoint");
  return y;
}

struct ApproximationErrors {
  Number error;           ///< e_n = x - a_{x1..xn}
  Number relative_error;  ///< u_n = e_n / l_{x1..xn}, in (0,1)
};

inline ApproximationErrors approximation_errors(const Scheme& scheme, const Number& x, std::size_t n) {
  const Interval iv = cell(scheme, digits_of(scheme, x, n));
  const Number e = x - iv.left;
  const Number u = e / iv.length;
  if (!(Number(0) < u && u < Number(1))) throw endpoint_error("point " + x.str() + " is a cell endpoint at level " + std::to_string(n));
  return {e, u};
}

/// Probabilities over a (possibly truncated) set of digits plus the omitted mass.
struct DigitPmf {
  std::vector<std::pair<Digit, Number>> probabilities;
  Number tail_mass;
};

/// k -> l_k / l_root.
inline DigitPmf pmf_first_level(const Scheme& scheme, std::uint64_t max_digits = 64) {
  const Children ch = children(scheme, {}, max_digits);
  const Number root_length = scheme.root().length;
  DigitPmf out;
  for (const auto& [k, iv] : ch.cells) out.probabilities.emplace_back(k, iv.length / root_length);
  out.tail_mass = ch.tail_length / root_length;
  return out;
}

/// Image of y under T_{k1}^{-1} o ... o T_{kn}^{-1} and the absolute derivative of that map at y.
struct InverseBranch {
  Number point;
  Number jacobian;
};

/// Empty when the composite inverse branch is undefined at y (inadmissible concatenation).
inline std::optional<InverseBranch> inverse_branch(const Scheme& scheme, const DigitSeq& prefix, const Number& y) {
  CellCursor cursor(scheme);
  cursor.push(prefix);
  switch (scheme.kind()) {
    case SchemeKind::base_q:
    case SchemeKind::gls:
    case SchemeKind::luroth: {
      const Interval iv = cursor.interval();
      const Number point = cursor.orientation() > 0 ? iv.left + iv.length * y : iv.left + iv.length * (Number(1) - y);
      return InverseBranch{point, iv.length};
    }
    case SchemeKind::pseudo_golden: {
      const Interval iv = cursor.interval();
      if (iv.empty()) return std::nullopt;
      const Number scale(cursor.scale());
      const Number point = iv.left + scale * y;
      if (!(point < iv.right())) return std::nullopt;
      return InverseBranch{point, scale};
    }
    case SchemeKind::continued_fraction: {
      const Number p(Rational(cursor.p())), pp(Rational(cursor.p_prev()));
      const Number q(Rational(cursor.q())), qp(Rational(cursor.q_prev()));
      const Number den = q + y * qp;
      return InverseBranch{(p + y * pp) / den, Number(1) / (den * den)};
    }
  }
  return std::nullopt;
}

/// Greedy beta-expansion digits floor(beta T^{i-1}(x)) for an arbitrary beta > 1.
/// Only digit extraction is offered for general beta; cylinder lengths are not.
inline DigitSeq greedy_beta_digits(const Real& beta, const Number& x, std::size_t n) {
  if (beta <= 1) throw domain_error("beta must exceed 1");
  if (!(Number(0) <= x && x < Number(1))) throw domain_error("point outside [0,1)");
  DigitSeq out;
  Real y = x.real();
  for (std::size_t i = 0; i < n; ++i) {
    const Real v = beta * y;
    const Real k = mp::floor(v);
    out.push_back(detail::to_digit(floor_of(k)));
    y = v - k;
  }
  return out;
}

}  // namespace digitforge

#endif  // DIGITFORGE_SUBDIVISION_HPP
