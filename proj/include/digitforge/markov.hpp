#ifndef DIGITFORGE_MARKOV_HPP
#define DIGITFORGE_MARKOV_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "digitforge/density.hpp"
#include "digitforge/errors.hpp"
#include "digitforge/number.hpp"
#include "digitforge/subdivision.hpp"

namespace digitforge {

/// Probability per state of a chain, in the chain's omega order.
using StatePmf = std::vector<double>;

/// The order-s chain of residual digit windows (R_{i+1}, ..., R_{i+s}).
class ResidualChain {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  /// One admissible next digit of a state and its probability.
  struct Move {
    Digit digit;
    std::size_t next;
    double probability;
    double cumulative;  ///< sum of probabilities up to and including this digit
  };

  /// Transition matrix from length ratios p = l_{x_1..x_{s+1}} / l_{x_1..x_s}.
  static ResidualChain build(const Scheme& scheme, std::size_t s) {
    if (s == 0) throw domain_error("the residual chain needs order s >= 1");
    if (!scheme.finite_alphabet())
      throw unsupported_error(scheme.name() + " has an infinite state space: no finite-order Markov structure");
    ResidualChain chain;
    chain.s_ = s;
    chain.scheme_ = scheme;
    chain.omega_ = admissible_prefixes(scheme, s);
    chain.index_build();
    const std::size_t size = chain.omega_.size();
    chain.p_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(size), static_cast<Eigen::Index>(size));
    chain.moves_.resize(size);
    for (std::size_t z = 0; z < size; ++z) {
      CellCursor cursor(scheme);
      cursor.push(chain.omega_[z]);
      const Number parent = cursor.length();
      for (Digit k : scheme.alphabet(0)) {
        CellCursor child = cursor;
        child.push(k);
        const Number len = child.length();
        if (len.is_zero()) continue;
        const std::size_t next = chain.shift(z, k);
        if (next == npos) throw domain_error("shifted window is not admissible; order s is too small");
        const double p = (len / parent).to_double();
        chain.p_(static_cast<Eigen::Index>(z), static_cast<Eigen::Index>(next)) += p;
        chain.moves_[z].push_back({k, next, p, 0.0});
      }
    }
    chain.finish_moves();
    return chain;
  }

  /// An abstract chain; P[z][w] may be positive only when w is z shifted by one digit.
  static ResidualChain from_matrix(std::vector<DigitSeq> omega, const Eigen::MatrixXd& p) {
    if (omega.empty()) throw domain_error("empty state space");
    const std::size_t s = omega.front().size();
    if (s == 0) throw domain_error("states must be non-empty digit windows");
    for (const auto& z : omega)
      if (z.size() != s) throw domain_error("all states must have the same order");
    if (p.rows() != static_cast<Eigen::Index>(omega.size()) || p.cols() != p.rows())
      throw domain_error("transition matrix does not match the state space");
    ResidualChain chain;
    chain.s_ = s;
    chain.omega_ = std::move(omega);
    chain.index_build();
    chain.p_ = p;
    chain.moves_.resize(chain.omega_.size());
    for (std::size_t z = 0; z < chain.omega_.size(); ++z) {
      for (std::size_t w = 0; w < chain.omega_.size(); ++w) {
        const double pzw = p(static_cast<Eigen::Index>(z), static_cast<Eigen::Index>(w));
        if (pzw < 0) throw domain_error("negative transition probability");
        if (pzw == 0) continue;
        const Digit k = chain.omega_[w].back();
        if (chain.shift(z, k) != w) throw domain_error("transition violates the shift pattern of an order-s chain");
        chain.moves_[z].push_back({k, w, pzw, 0.0});
      }
      std::sort(chain.moves_[z].begin(), chain.moves_[z].end(),
                [](const Move& a, const Move& b) { return a.digit < b.digit; });
    }
    chain.finish_moves();
    return chain;
  }

  std::size_t order() const { return s_; }
  std::size_t size() const { return omega_.size(); }
  const std::vector<DigitSeq>& omega() const { return omega_; }
  const Eigen::MatrixXd& matrix() const { return p_; }
  const std::optional<Scheme>& scheme() const { return scheme_; }

  const Scheme& require_scheme() const {
    if (!scheme_) throw unsupported_error("chain was not built from a scheme");
    return *scheme_;
  }

  std::size_t index_of(const DigitSeq& state) const {
    auto it = index_.find(state);
    return it == index_.end() ? npos : it->second;
  }

  /// Next digits of state z in ascending order with their cumulative probabilities.
  const std::vector<Move>& moves(std::size_t z) const { return moves_[z]; }

  /// Index of (z_2, ..., z_s, k), or npos when that window is not a state.
  std::size_t shift(std::size_t z, Digit k) const {
    DigitSeq next(omega_[z].begin() + 1, omega_[z].end());
    next.push_back(k);
    return index_of(next);
  }

 private:
  ResidualChain() = default;

  void index_build() {
    for (std::size_t z = 0; z < omega_.size(); ++z) index_.emplace(omega_[z], z);
  }

  void finish_moves() {
    for (std::size_t z = 0; z < moves_.size(); ++z) {
      double acc = 0;
      for (auto& m : moves_[z]) {
        acc += m.probability;
        m.cumulative = acc;
      }
      if (moves_[z].empty() || std::abs(acc - 1.0) > 1e-12)
        throw domain_error("row " + std::to_string(z) + " of the transition matrix does not sum to 1");
      moves_[z].back().cumulative = 1.0;
    }
  }

  std::size_t s_ = 0;
  std::optional<Scheme> scheme_;
  std::vector<DigitSeq> omega_;
  std::map<DigitSeq, std::size_t> index_;
  Eigen::MatrixXd p_;
  std::vector<std::vector<Move>> moves_;
};

inline ResidualChain build_chain(const Scheme& scheme, std::size_t s) { return ResidualChain::build(scheme, s); }

/// True iff l_{x_1..x_n} / l_{x_1..x_{n-1}} depends only on (x_{n-s}, ..., x_n) for every
/// positive-length parent up to `depth`. Countable alphabets are cut at `max_digit`.
inline bool verify_markov_order(const Scheme& scheme, std::size_t s, std::size_t depth, Digit max_digit = 4) {
  if (depth < s + 2) throw domain_error("verify_markov_order needs depth >= s + 2");
  const std::uint64_t count = scheme.finite_alphabet() ? scheme.alphabet_size() : max_digit - scheme.min_digit() + 1;
  const auto alphabet = scheme.alphabet(count);
  std::map<DigitSeq, Number> seen;
  bool consistent = true;
  DigitSeq path;
  const Number tolerance = Number(Real("1e-10"));
  std::function<void(const CellCursor&)> walk = [&](const CellCursor& parent) {
    if (!consistent || path.size() == depth) return;
    const Number parent_length = parent.length();
    for (Digit k : alphabet) {
      CellCursor child = parent;
      child.push(k);
      path.push_back(k);
      const Number ratio = child.length() / parent_length;
      if (path.size() >= s + 1) {
        DigitSeq key(path.end() - static_cast<std::ptrdiff_t>(s + 1), path.end());
        auto [it, inserted] = seen.emplace(std::move(key), ratio);
        if (!inserted) {
          const bool same = scheme.exact() ? it->second == ratio : abs(it->second - ratio) <= tolerance * abs(ratio);
          if (!same) consistent = false;
        }
      }
      if (consistent && !child.length().is_zero()) walk(child);
      path.pop_back();
      if (!consistent) return;
    }
  };
  walk(CellCursor(scheme));
  return consistent;
}

/// Smallest s <= max_s passing verify_markov_order; a diagnostic only.
inline std::optional<std::size_t> smallest_markov_order(const Scheme& scheme, std::size_t depth, std::size_t max_s = 4) {
  for (std::size_t s = 0; s <= max_s && s + 2 <= depth; ++s)
    if (verify_markov_order(scheme, s, depth)) return s;
  return std::nullopt;
}

namespace detail {

inline std::vector<std::vector<std::size_t>> adjacency(const Eigen::MatrixXd& p) {
  std::vector<std::vector<std::size_t>> adj(static_cast<std::size_t>(p.rows()));
  for (Eigen::Index i = 0; i < p.rows(); ++i)
    for (Eigen::Index j = 0; j < p.cols(); ++j)
      if (p(i, j) > 0) adj[static_cast<std::size_t>(i)].push_back(static_cast<std::size_t>(j));
  return adj;
}

inline std::vector<long> bfs_levels(const std::vector<std::vector<std::size_t>>& adj, std::size_t start) {
  std::vector<long> level(adj.size(), -1);
  std::queue<std::size_t> queue;
  level[start] = 0;
  queue.push(start);
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop();
    for (std::size_t v : adj[u])
      if (level[v] < 0) {
        level[v] = level[u] + 1;
        queue.push(v);
      }
  }
  return level;
}

}  // namespace detail

struct ChainStructure {
  bool irreducible = false;
  std::size_t period = 0;  ///< 0 when reducible
};

/// Strong connectivity by reachability and the period as the gcd of level differences along edges.
inline ChainStructure chain_structure(const ResidualChain& chain) {
  const auto adj = detail::adjacency(chain.matrix());
  const auto forward = detail::bfs_levels(adj, 0);
  std::vector<std::vector<std::size_t>> reverse(adj.size());
  for (std::size_t u = 0; u < adj.size(); ++u)
    for (std::size_t v : adj[u]) reverse[v].push_back(u);
  const auto backward = detail::bfs_levels(reverse, 0);
  ChainStructure out;
  out.irreducible = std::all_of(forward.begin(), forward.end(), [](long l) { return l >= 0; }) &&
                    std::all_of(backward.begin(), backward.end(), [](long l) { return l >= 0; });
  if (!out.irreducible) return out;
  long g = 0;
  for (std::size_t u = 0; u < adj.size(); ++u)
    for (std::size_t v : adj[u]) g = std::gcd(g, std::abs(forward[u] + 1 - forward[v]));
  out.period = static_cast<std::size_t>(g);
  return out;
}

/// Power iteration from the uniform law.
inline StatePmf power_iteration(const ResidualChain& chain, std::size_t steps) {
  const auto n = static_cast<Eigen::Index>(chain.size());
  Eigen::RowVectorXd pi = Eigen::RowVectorXd::Constant(n, 1.0 / static_cast<double>(n));
  for (std::size_t i = 0; i < steps; ++i) pi = pi * chain.matrix();
  pi /= pi.sum();
  return StatePmf(pi.data(), pi.data() + n);
}

/// Unique pi with pi P = pi: one balance equation is replaced by the normalization row.
inline StatePmf invariant_pmf(const ResidualChain& chain) {
  if (!chain_structure(chain).irreducible)
    throw reducible_error("transition matrix is reducible: no unique invariant law");
  const auto n = static_cast<Eigen::Index>(chain.size());
  Eigen::MatrixXd a = chain.matrix().transpose() - Eigen::MatrixXd::Identity(n, n);
  a.row(n - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(n - 1) = 1.0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  StatePmf pi;
  if (lu.rcond() > 1e-12) {
    const Eigen::VectorXd x = lu.solve(rhs);
    pi.assign(x.data(), x.data() + n);
  } else {
    pi = power_iteration(chain, 100000);
  }
  for (double& v : pi)
    if (v < 0 && v > -1e-15) v = 0;
  return pi;
}

/// Piecewise-constant density pi(z) / l_z at depth s.
inline PiecewiseDensity f_inv_density(const ResidualChain& chain, const StatePmf& pi) {
  const Scheme& scheme = chain.require_scheme();
  if (pi.size() != chain.size()) throw domain_error("pmf does not match the state space");
  std::vector<Number> masses;
  for (double p : pi) masses.push_back(scheme.exact() ? Number::exact(p) : Number::approx(p));
  return PiecewiseDensity::from_masses(scheme, chain.order(), masses);
}

/// Law of (R_1, ..., R_s) given S = prefix.
inline StatePmf initial_distribution(const ResidualChain& chain, const DigitSeq& prefix) {
  const Scheme& scheme = chain.require_scheme();
  CellCursor base(scheme);
  base.push(prefix);
  const Number parent = base.length();
  if (parent.is_zero()) throw conditioning_error("conditioning on a zero-length cell");
  const std::size_t s = chain.order();
  const std::size_t n = prefix.size();
  const auto size = static_cast<Eigen::Index>(chain.size());
  Eigen::RowVectorXd law = Eigen::RowVectorXd::Zero(size);
  std::size_t chain_steps = 0;
  if (n >= s) {
    const std::size_t z = chain.index_of(DigitSeq(prefix.end() - static_cast<std::ptrdiff_t>(s), prefix.end()));
    if (z == ResidualChain::npos) throw conditioning_error("trailing window of the prefix is not a chain state");
    law(static_cast<Eigen::Index>(z)) = 1.0;
    chain_steps = s;
  } else {
    // First s - n residual digits straight from lengths; together with the prefix they form a state.
    const std::size_t free = s - n;
    DigitSeq suffix;
    std::function<void(const CellCursor&)> walk = [&](const CellCursor& cursor) {
      if (suffix.size() == free) {
        DigitSeq state = prefix;
        state.insert(state.end(), suffix.begin(), suffix.end());
        const std::size_t z = chain.index_of(state);
        if (z != ResidualChain::npos) law(static_cast<Eigen::Index>(z)) += (cursor.length() / parent).to_double();
        return;
      }
      for (Digit k : scheme.alphabet(0)) {
        CellCursor next = cursor;
        next.push(k);
        if (next.length().is_zero()) continue;
        suffix.push_back(k);
        walk(next);
        suffix.pop_back();
      }
    };
    walk(base);
    chain_steps = n;
  }
  for (std::size_t i = 0; i < chain_steps; ++i) law = law * chain.matrix();
  return StatePmf(law.data(), law.data() + size);
}

/// max_z (1/2) sum_w |P^i(z, w) - pi(w)|, for i >= 1.
inline double tv_to_invariant(const ResidualChain& chain, const StatePmf& pi, std::size_t i) {
  if (i == 0) throw domain_error("tv_to_invariant needs i >= 1");
  Eigen::MatrixXd power = chain.matrix();
  for (std::size_t k = 1; k < i; ++k) power = power * chain.matrix();
  double worst = 0;
  for (Eigen::Index z = 0; z < power.rows(); ++z) {
    double tv = 0;
    for (Eigen::Index w = 0; w < power.cols(); ++w) tv += std::abs(power(z, w) - pi[static_cast<std::size_t>(w)]);
    worst = std::max(worst, 0.5 * tv);
  }
  return worst;
}

struct ErgodicityReport {
  bool ergodic = false;
  bool irreducible = false;
  std::size_t period = 0;
  double alpha = 0;
  double beta = 0;
  std::vector<double> tv;  ///< tv[i-1] = sup_z TV(P^i(z, .), pi) for i = 1..horizon
};

/// Graph check for irreducibility and aperiodicity, then an empirical (alpha, beta) certificate
/// with tv_i <= alpha beta^i for i = 1..horizon.
inline ErgodicityReport is_uniformly_ergodic(const ResidualChain& chain, std::size_t horizon = 50) {
  ErgodicityReport out;
  const ChainStructure st = chain_structure(chain);
  out.irreducible = st.irreducible;
  out.period = st.period;
  out.ergodic = st.irreducible && st.period == 1;
  if (!out.ergodic) return out;
  const StatePmf pi = invariant_pmf(chain);
  Eigen::MatrixXd power = chain.matrix();
  for (std::size_t i = 1; i <= horizon; ++i) {
    if (i > 1) power = power * chain.matrix();
    double worst = 0;
    for (Eigen::Index z = 0; z < power.rows(); ++z) {
      double tv = 0;
      for (Eigen::Index w = 0; w < power.cols(); ++w) tv += std::abs(power(z, w) - pi[static_cast<std::size_t>(w)]);
      worst = std::max(worst, 0.5 * tv);
    }
    out.tv.push_back(worst);
  }
  const double tv1 = out.tv.front();
  if (tv1 <= 1e-15) return out;  // rank one up to rounding: alpha = beta = 0
  for (std::size_t i = 2; i <= horizon; ++i) {
    const double ratio = out.tv[i - 1] / tv1;
    if (ratio > 0) out.beta = std::max(out.beta, std::pow(ratio, 1.0 / static_cast<double>(i - 1)));
  }
  out.beta = std::min(std::max(out.beta, 1e-300), 1.0 - 1e-12);
  for (std::size_t i = 1; i <= horizon; ++i)
    out.alpha = std::max(out.alpha, out.tv[i - 1] / std::pow(out.beta, static_cast<double>(i)));
  return out;
}

/// Sufficient length condition: every (2s)- and (2s+1)-tuple has a positive-length cell.
inline bool length_condition_aperiodic(const Scheme& scheme, std::size_t s) {
  if (!scheme.finite_alphabet()) throw unsupported_error("length condition needs a finite alphabet");
  const std::size_t a = scheme.alphabet_size();
  auto full = [&](std::size_t n) {
    std::size_t count = 1;
    for (std::size_t i = 0; i < n; ++i) count *= a;
    return admissible_prefixes(scheme, n).size() == count;
  };
  return full(2 * s) && full(2 * s + 1);
}

}  // namespace digitforge

#endif  // DIGITFORGE_MARKOV_HPP
