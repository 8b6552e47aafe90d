#ifndef DIGITFORGE_READONCE_HPP
#define DIGITFORGE_READONCE_HPP

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
#include "digitforge/rng.hpp"
#include "digitforge/subdivision.hpp"

namespace digitforge {

/// Stochastic recursive update: the new last digit is F^-(v | state), digits in ascending order.
inline std::size_t srs_update(const ResidualChain& chain, std::size_t state, double v) {
  const auto& moves = chain.moves(state);
  for (const auto& m : moves)
    if (v <= m.cumulative) return m.next;
  return moves.back().next;
}

/// b = t + s - 1.
inline std::size_t block_length(const ResidualChain& chain, std::size_t t) {
  if (t < chain.order())
    throw domain_error("block parameter t = " + std::to_string(t) + " is below the chain order " +
                       std::to_string(chain.order()));
  return t + chain.order() - 1;
}

struct BlockRecord {
  std::size_t t = 0;
  std::size_t b = 0;
  std::vector<double> uniforms;
  std::vector<std::size_t> outputs;  ///< outputs[z] for every input state z
  bool coalesced = false;
  std::size_t common_output = ResidualChain::npos;
};

inline BlockRecord run_block(const ResidualChain& chain, std::size_t t, std::vector<double> uniforms) {
  BlockRecord rec;
  rec.t = t;
  rec.b = block_length(chain, t);
  if (uniforms.size() != rec.b) throw domain_error("block needs exactly b uniforms");
  rec.uniforms = std::move(uniforms);
  rec.outputs.resize(chain.size());
  for (std::size_t z = 0; z < chain.size(); ++z) {
    std::size_t state = z;
    for (double v : rec.uniforms) state = srs_update(chain, state, v);
    rec.outputs[z] = state;
  }
  rec.coalesced = std::all_of(rec.outputs.begin(), rec.outputs.end(),
                              [&](std::size_t o) { return o == rec.outputs.front(); });
  if (rec.coalesced) rec.common_output = rec.outputs.front();
  return rec;
}

/// Runs every state of the chain through the same b fresh uniforms.
inline BlockRecord gen_block(const ResidualChain& chain, std::size_t t, UniformStream& rng) {
  const std::size_t b = block_length(chain, t);
  std::vector<double> uniforms(b);
  for (double& v : uniforms) v = rng.next();
  return run_block(chain, t, std::move(uniforms));
}

/// Exact probability that a block is coalescent.
///
/// Each update is constant on the intervals cut out by the row CDF thresholds, so the
/// joint map of all states is tracked interval by interval. Throws infeasible_exact_error
/// once more than `max_entries` distinct joint states are alive.
inline double epsilon_exact(const ResidualChain& chain, std::size_t t, std::size_t max_entries = 1'000'000) {
  const std::size_t b = block_length(chain, t);
  std::vector<double> cuts{0.0};
  for (std::size_t z = 0; z < chain.size(); ++z)
    for (const auto& m : chain.moves(z)) cuts.push_back(m.cumulative);
  cuts.push_back(1.0);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::vector<std::size_t> start(chain.size());
  for (std::size_t z = 0; z < chain.size(); ++z) start[z] = z;
  std::map<std::vector<std::size_t>, long double> alive{{start, 1.0L}};
  long double coalesced = 0;
  if (chain.size() == 1) return 1.0;
  for (std::size_t step = 0; step < b; ++step) {
    std::map<std::vector<std::size_t>, long double> next;
    for (const auto& [joint, mass] : alive) {
      for (std::size_t c = 1; c < cuts.size(); ++c) {
        const long double width = static_cast<long double>(cuts[c]) - static_cast<long double>(cuts[c - 1]);
        if (width <= 0) continue;
        const double mid = 0.5 * (cuts[c] + cuts[c - 1]);
        std::vector<std::size_t> moved(joint.size());
        for (std::size_t i = 0; i < joint.size(); ++i) moved[i] = srs_update(chain, joint[i], mid);
        const bool together = std::all_of(moved.begin(), moved.end(), [&](std::size_t o) { return o == moved.front(); });
        if (together) coalesced += mass * width;
        else next[std::move(moved)] += mass * width;
      }
      if (next.size() > max_entries)
        throw infeasible_exact_error("exact epsilon_t enumeration exceeds " + std::to_string(max_entries) +
                                     " joint states; use the Monte Carlo estimate");
    }
    alive = std::move(next);
  }
  return static_cast<double>(coalesced);
}

struct Estimate {
  double value = 0;
  double half_width = 0;  ///< 95% normal-approximation half-width
  std::size_t trials = 0;
};

inline Estimate epsilon_monte_carlo(const ResidualChain& chain, std::size_t t, std::size_t blocks, UniformStream& rng) {
  if (blocks == 0) throw domain_error("need at least one block");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < blocks; ++i) hits += gen_block(chain, t, rng).coalesced ? 1 : 0;
  const double p = static_cast<double>(hits) / static_cast<double>(blocks);
  return {p, 1.96 * std::sqrt(p * (1 - p) / static_cast<double>(blocks)), blocks};
}

struct ReadOnceResult {
  std::size_t output = ResidualChain::npos;
  std::size_t m1 = 0;
  std::size_t m2 = 0;
};

struct ReadOnceOptions {
  std::size_t block_budget = 10'000'000;
};

/// Wilson's read-once sampler. Every uniform consumed is also passed to `observe`, in order.
inline ReadOnceResult read_once(const ResidualChain& chain, std::size_t t, UniformStream& rng,
                                const ReadOnceOptions& options = {},
                                const std::function<void(double)>& observe = nullptr) {
  ReadOnceResult out;
  auto next_block = [&](std::size_t used) {
    if (used >= options.block_budget)
      throw budget_error("read-once exceeded the block budget of " + std::to_string(options.block_budget));
    BlockRecord rec = gen_block(chain, t, rng);
    if (observe)
      for (double v : rec.uniforms) observe(v);
    return rec;
  };
  std::size_t used = 0;
  BlockRecord rec;
  do {
    rec = next_block(used++);
    ++out.m1;
  } while (!rec.coalesced);
  std::size_t state = rec.common_output;
  for (;;) {
    rec = next_block(used++);
    ++out.m2;
    if (rec.coalesced) break;
    state = rec.outputs[state];
  }
  out.output = state;
  return out;
}

/// Smallest t in [s, s + 8] whose Monte Carlo epsilon_t reaches `threshold`.
inline std::size_t default_block_parameter(const ResidualChain& chain, UniformStream& rng, std::size_t probes = 10'000,
                                           double threshold = 0.05) {
  for (std::size_t t = chain.order(); t <= chain.order() + 8; ++t)
    if (epsilon_monte_carlo(chain, t, probes, rng).value >= threshold) return t;
  throw domain_error("no block parameter t <= s + 8 reaches epsilon_t >= " + std::to_string(threshold));
}

struct PerfectDraw {
  CouplingDraw coupling;
  std::size_t m1 = 0;
  std::size_t m2 = 0;
  std::size_t m = 0;  ///< b (m1 + m2 - 1)
  std::size_t k = 0;  ///< max(n, s) + m - s
  std::size_t window = ResidualChain::npos;  ///< read-once output, the state (X_{K+1}, ..., X_{K+s})
  DigitSeq digits;                           ///< X_1, ..., X_D with D >= K + s
};

struct PerfectOptions {
  std::size_t min_digits = 0;  ///< generate at least this many digits of X
  ReadOnceOptions read_once;
  CouplingOptions coupling;
};

/// Coupling of (X, N) with a stationary digit window at K, on a single uniform stream.
///
/// (X, N) comes from the coupled sampler; X_1..X_h with h = max(N, s) are the digits of that X.
/// The read-once blocks then drive the digit chain from (X_{h-s+1}, ..., X_h), so that the window
/// ending at position h + M is the read-once output. Digits after that continue on the same
/// stream, and X is finally redrawn uniformly inside its deepest generated cell, which keeps X ~ f.
inline PerfectDraw perfect_remainder_sample(const Density& density, const ResidualChain& chain, std::size_t t,
                                            UniformStream& rng, const PerfectOptions& options = {}) {
  const Scheme& scheme = density.scheme();
  if (!chain.scheme() || !(*chain.scheme() == scheme)) throw domain_error("density and chain use different schemes");
  const std::size_t s = chain.order();
  const std::size_t b = block_length(chain, t);

  PerfectDraw out;
  out.coupling = sample_coupled(density, rng, options.coupling);
  const std::size_t h = std::max(out.coupling.n, s);
  out.digits = digits_of(scheme, out.coupling.x, h);

  std::size_t state = chain.index_of(DigitSeq(out.digits.end() - static_cast<std::ptrdiff_t>(s), out.digits.end()));
  if (state == ResidualChain::npos) throw error("digit window is not a chain state");
  auto advance = [&](double v) {
    state = srs_update(chain, state, v);
    out.digits.push_back(chain.omega()[state].back());
  };
  const ReadOnceResult ro = read_once(chain, t, rng, options.read_once, advance);
  out.m1 = ro.m1;
  out.m2 = ro.m2;
  out.m = b * (ro.m1 + ro.m2 - 1);
  out.k = h + out.m - s;
  out.window = ro.output;

  const DigitSeq window(out.digits.begin() + static_cast<std::ptrdiff_t>(out.k),
                        out.digits.begin() + static_cast<std::ptrdiff_t>(out.k + s));
  if (chain.index_of(window) != out.window) throw error("digit window at K disagrees with the read-once output");

  while (out.digits.size() < options.min_digits) advance(rng.next());

  const Interval deepest = cell(scheme, out.digits);
  const Number v = scheme.exact() ? Number::exact(rng.next()) : Number::approx(rng.next());
  Number x = deepest.left + v * deepest.length;
  out.coupling = detail::assemble(scheme, std::move(x), std::move(out.coupling.s));
  return out;
}

}  // namespace digitforge

#endif  // DIGITFORGE_READONCE_HPP
