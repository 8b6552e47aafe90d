#ifndef DIGITFORGE_DENSITY_HPP
#define DIGITFORGE_DENSITY_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "digitforge/errors.hpp"
#include "digitforge/number.hpp"
#include "digitforge/rng.hpp"
#include "digitforge/subdivision.hpp"

namespace digitforge {

/// Positive-length depth-d prefixes of a finite-alphabet scheme, in lexicographic digit order.
inline std::vector<DigitSeq> admissible_prefixes(const Scheme& scheme, std::size_t depth) {
  if (depth == 0) return {DigitSeq{}};
  if (!scheme.finite_alphabet()) throw unsupported_error(scheme.name() + " has a countable alphabet");
  std::vector<DigitSeq> out;
  DigitSeq path;
  const auto alphabet = scheme.alphabet(0);
  std::function<void(const CellCursor&)> walk = [&](const CellCursor& cursor) {
    if (path.size() == depth) {
      out.push_back(path);
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
  return out;
}

/// A density that is constant on every depth-d cell of a finite-alphabet scheme.
///
/// H is the union of the open depth-d cells, so the infimum over a cell is the
/// minimum of the values of its positive-length depth-d descendants.
class PiecewiseDensity {
 public:
  /// `values[j]` is the density on the j-th admissible depth-d cell (lexicographic order).
  static PiecewiseDensity from_values(Scheme scheme, std::size_t depth, std::vector<Number> values) {
    PiecewiseDensity d(std::move(scheme), depth);
    if (values.size() != d.cells_.size())
      throw domain_error("expected " + std::to_string(d.cells_.size()) + " density values, got " +
                         std::to_string(values.size()));
    d.values_ = std::move(values);
    d.finish();
    return d;
  }

  /// `masses[j]` is the probability of the j-th admissible depth-d cell.
  static PiecewiseDensity from_masses(Scheme scheme, std::size_t depth, const std::vector<Number>& masses) {
    PiecewiseDensity d(std::move(scheme), depth);
    if (masses.size() != d.cells_.size())
      throw domain_error("expected " + std::to_string(d.cells_.size()) + " cell masses, got " +
                         std::to_string(masses.size()));
    for (std::size_t j = 0; j < masses.size(); ++j) d.values_.push_back(masses[j] / d.cells_[j].length);
    d.finish();
    return d;
  }

  static PiecewiseDensity uniform(Scheme scheme, std::size_t depth = 0) {
    PiecewiseDensity d(std::move(scheme), depth);
    const Number one = d.scheme_.exact() ? Number(1) : Number(Real(1));
    d.values_.assign(d.cells_.size(), one);
    d.finish();
    return d;
  }

  const Scheme& scheme() const { return scheme_; }
  std::size_t depth() const { return depth_; }
  std::size_t size() const { return cells_.size(); }
  const std::vector<DigitSeq>& prefixes() const { return prefixes_; }
  const std::vector<Interval>& cells() const { return cells_; }
  const std::vector<Number>& values() const { return values_; }
  Number mass(std::size_t j) const { return values_[j] * cells_[j].length; }

  /// Index of a depth-d prefix, or size() when it is not an admissible cell.
  std::size_t index_of(const DigitSeq& prefix) const {
    auto it = index_.find(prefix);
    return it == index_.end() ? cells_.size() : it->second;
  }

  /// Exact infimum of f over H intersected with the cell of `prefix`; zero when that set is empty.
  Number infimum(const DigitSeq& prefix) const {
    if (prefix.size() <= depth_) {
      auto it = infima_.find(prefix);
      return it == infima_.end() ? zero() : it->second;
    }
    const DigitSeq head(prefix.begin(), prefix.begin() + static_cast<std::ptrdiff_t>(depth_));
    const std::size_t j = index_of(head);
    if (j == cells_.size()) return zero();
    if (cell_length(scheme_, prefix).is_zero()) return zero();
    return values_[j];
  }

  /// Infima i_0, ..., i_d along the ancestors of cell j.
  const std::vector<Number>& path_infima(std::size_t j) const { return path_infima_[j]; }

  Number pdf(const Number& x) const {
    const std::size_t j = index_of(digits_of(scheme_, x, depth_));
    return j == cells_.size() ? zero() : values_[j];
  }

  Number supremum() const { return *std::max_element(values_.begin(), values_.end()); }

  /// Cell chosen by inverse CDF of u over the cell masses.
  std::size_t pick_cell(double u) const {
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    std::size_t j = static_cast<std::size_t>(it - cumulative_.begin());
    if (j >= cells_.size()) j = cells_.size() - 1;
    while (values_[j].is_zero() && j > 0) --j;  // rounding can land on a massless cell
    return j;
  }

 private:
  PiecewiseDensity(Scheme scheme, std::size_t depth) : scheme_(std::move(scheme)), depth_(depth) {
    prefixes_ = admissible_prefixes(scheme_, depth_);
    for (std::size_t j = 0; j < prefixes_.size(); ++j) {
      cells_.push_back(cell(scheme_, prefixes_[j]));
      index_.emplace(prefixes_[j], j);
    }
  }

  Number zero() const { return scheme_.exact() ? Number(0) : Number(Real(0)); }

  void finish() {
    Number total = zero();
    for (std::size_t j = 0; j < cells_.size(); ++j) {
      if (values_[j].sign() < 0) throw domain_error("density values must be non-negative");
      total += mass(j);
    }
    if (abs(total - Number(1)) > Number::ratio(1, 1000000000000LL))
      throw domain_error("density does not integrate to 1 (integral " + total.str() + ")");
    for (std::size_t j = 0; j < cells_.size(); ++j) {
      for (std::size_t n = 0; n <= depth_; ++n) {
        DigitSeq head(prefixes_[j].begin(), prefixes_[j].begin() + static_cast<std::ptrdiff_t>(n));
        auto [it, inserted] = infima_.emplace(std::move(head), values_[j]);
        if (!inserted && values_[j] < it->second) it->second = values_[j];
      }
    }
    for (std::size_t j = 0; j < cells_.size(); ++j) {
      std::vector<Number> path;
      for (std::size_t n = 0; n <= depth_; ++n)
        path.push_back(infima_.at(DigitSeq(prefixes_[j].begin(), prefixes_[j].begin() + static_cast<std::ptrdiff_t>(n))));
      path_infima_.push_back(std::move(path));
    }
    double acc = 0;
    const double denom = total.to_double();
    for (std::size_t j = 0; j < cells_.size(); ++j) {
      acc += mass(j).to_double() / denom;
      cumulative_.push_back(acc);
    }
  }

  Scheme scheme_;
  std::size_t depth_;
  std::vector<DigitSeq> prefixes_;
  std::vector<Interval> cells_;
  std::map<DigitSeq, std::size_t> index_;
  std::vector<Number> values_;
  std::map<DigitSeq, Number> infima_;
  std::vector<std::vector<Number>> path_infima_;
  std::vector<double> cumulative_;
};

enum class Monotonicity { increasing, decreasing };

/// A continuous density with closed-form pdf and cdf that is monotone on every level-1 cell.
///
/// H is all of J, so cell infima are the endpoint limits. Evaluation is in double precision.
class MonotoneDensity {
 public:
  MonotoneDensity(std::string name, Scheme scheme, std::function<double(double)> pdf, std::function<double(double)> cdf,
                  std::function<Monotonicity(Digit)> direction, double root_infimum, double supremum)
      : name_(std::move(name)),
        scheme_(std::move(scheme)),
        pdf_(std::move(pdf)),
        cdf_(std::move(cdf)),
        direction_(std::move(direction)),
        root_infimum_(root_infimum),
        supremum_(supremum) {}

  /// f_G(x) = 1 / (ln 2 (1 + x)) on the continued-fraction scheme.
  static MonotoneDensity gauss() {
    return MonotoneDensity(
        "gauss", Scheme::continued_fraction(), [](double x) { return 1.0 / (std::numbers::ln2 * (1.0 + x)); },
        [](double x) { return std::log2(1.0 + x); }, [](Digit) { return Monotonicity::decreasing; },
        1.0 / (2.0 * std::numbers::ln2), 1.0 / std::numbers::ln2);
  }

  const std::string& name() const { return name_; }
  const Scheme& scheme() const { return scheme_; }
  double pdf(double x) const { return pdf_(x); }
  double cdf(double x) const { return cdf_(x); }
  double supremum() const { return supremum_; }

  Number infimum(const DigitSeq& prefix) const {
    if (prefix.empty()) return Number::approx(root_infimum_);
    const Interval iv = cell(scheme_, prefix);
    if (iv.empty()) return Number::approx(0.0);
    return Number::approx(infimum_on(iv, prefix.front()));
  }

  Monotonicity direction(Digit first) const { return direction_(first); }

  /// Endpoint infimum over a nonempty cell lying inside the level-1 cell of `first`.
  double infimum_on(const Interval& iv, Digit first) const {
    const bool decreasing = direction_(first) == Monotonicity::decreasing;
    return pdf_((decreasing ? iv.right() : iv.left).to_double());
  }

  /// Inverse CDF by bisection to 1e-14 absolute tolerance.
  double quantile(double u) const {
    double lo = 0.0, hi = 1.0;
    while (hi - lo > 1e-14) {
      const double mid = 0.5 * (lo + hi);
      if (cdf_(mid) < u) lo = mid;
      else hi = mid;
    }
    return 0.5 * (lo + hi);
  }

 private:
  std::string name_;
  Scheme scheme_;
  std::function<double(double)> pdf_;
  std::function<double(double)> cdf_;
  std::function<Monotonicity(Digit)> direction_;
  double root_infimum_;
  double supremum_;
};

/// A PDF on the root interval together with its cell-infimum oracle.
class Density {
 public:
  Density(PiecewiseDensity d) : impl_(std::make_shared<const Impl>(std::move(d))) {}  // NOLINT(implicit)
  Density(MonotoneDensity d) : impl_(std::make_shared<const Impl>(std::move(d))) {}   // NOLINT(implicit)

  static Density uniform(const Scheme& scheme) { return PiecewiseDensity::uniform(scheme); }
  static Density gauss() { return MonotoneDensity::gauss(); }

  bool is_piecewise() const { return std::holds_alternative<PiecewiseDensity>(*impl_); }
  const PiecewiseDensity& piecewise() const {
    if (!is_piecewise()) throw unsupported_error("density is not piecewise constant");
    return std::get<PiecewiseDensity>(*impl_);
  }
  const MonotoneDensity& monotone() const {
    if (is_piecewise()) throw unsupported_error("density is not a closed-form monotone density");
    return std::get<MonotoneDensity>(*impl_);
  }

  const Scheme& scheme() const {
    return std::visit([](const auto& d) -> const Scheme& { return d.scheme(); }, *impl_);
  }

  std::string name() const {
    if (is_piecewise()) return "piecewise";
    return monotone().name();
  }

  Number infimum(const DigitSeq& prefix) const {
    return std::visit([&](const auto& d) { return d.infimum(prefix); }, *impl_);
  }

  Number pdf(const Number& x) const {
    if (is_piecewise()) return piecewise().pdf(x);
    return Number::approx(monotone().pdf(x.to_double()));
  }

 private:
  using Impl = std::variant<PiecewiseDensity, MonotoneDensity>;
  std::shared_ptr<const Impl> impl_;
};

}  // namespace digitforge

#endif  // DIGITFORGE_DENSITY_HPP
