#ifndef DIGITFORGE_ACCEPTANCE_HPP
#define DIGITFORGE_ACCEPTANCE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "digitforge/coupling.hpp"
#include "digitforge/density.hpp"
#include "digitforge/io.hpp"
#include "digitforge/markov.hpp"
#include "digitforge/oracles.hpp"
#include "digitforge/polyatree.hpp"
#include "digitforge/readonce.hpp"
#include "digitforge/rng.hpp"
#include "digitforge/subdivision.hpp"
#include "digitforge/verify.hpp"

namespace digitforge::acceptance {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string detail;
  nlohmann::json metrics = nlohmann::json::object();
};

struct Config {
  std::uint64_t seed = 20240917;
};

namespace detail {

inline std::string fmt(double v, int precision = 6) {
  std::ostringstream ss;
  ss.precision(precision);
  ss << v;
  return ss.str();
}

inline std::string joined(std::string text) {
  while (!text.empty() && (text.back() == ' ' || text.back() == ';')) text.pop_back();
  return text;
}

inline UniformStream stream(const Config& cfg, int criterion, int part = 0) {
  return UniformStream(cfg.seed, static_cast<std::uint64_t>(criterion) * 16 + static_cast<std::uint64_t>(part));
}

inline Scheme golden() { return Scheme::pseudo_golden(2); }

inline Real golden_beta() { return oracle::pseudo_golden_beta(2); }

inline PiecewiseDensity base2_three_halves() {
  return PiecewiseDensity::from_values(Scheme::base_q(2), 1, {Number::ratio(3, 2), Number::ratio(1, 2)});
}

inline PiecewiseDensity base3_depth2() {
  return PiecewiseDensity::from_values(Scheme::base_q(3), 2,
                                       {Number::ratio(1, 2), Number::ratio(3, 2), Number(1), Number(2),
                                        Number::ratio(1, 2), Number::ratio(1, 2), Number(1), Number(1), Number(1)});
}

inline PiecewiseDensity base3_depth1() {
  return PiecewiseDensity::from_values(Scheme::base_q(3), 1, {Number::ratio(1, 2), Number(1), Number::ratio(3, 2)});
}

inline PiecewiseDensity base2_depth3() {
  return PiecewiseDensity::from_values(Scheme::base_q(2), 3,
                                       {Number(2), Number::ratio(1, 2), Number(1), Number::ratio(3, 2),
                                        Number::ratio(1, 4), Number::ratio(3, 4), Number(1), Number(1)});
}

inline PiecewiseDensity golden_depth2() {
  return PiecewiseDensity::from_masses(golden(), 2,
                                       {Number::approx(0.5), Number::approx(0.2), Number::approx(0.3)});
}

}  // namespace detail

/// Golden-mean invariant PMF and shift-invariant density against closed forms.
inline CriterionResult criterion_1(const Config&) {
  CriterionResult r{1, "Golden-mean invariant PMF and f_inv", false, {}, {}};
  const ResidualChain chain = build_chain(detail::golden(), 1);
  const StatePmf pi = invariant_pmf(chain);
  const double beta = static_cast<double>(detail::golden_beta());
  const double b2 = beta * beta;
  const double pi0 = b2 / (1 + b2), pi1 = 1 / (1 + b2);
  const double pi_err = std::max(std::abs(pi[0] - pi0), std::abs(pi[1] - pi1));
  const PiecewiseDensity f = f_inv_density(chain, pi);
  const double f0 = (1 + 2 * beta) / (2 + beta), f1 = (1 + beta) / (2 + beta);
  const double f_err = std::max(std::abs(f.values()[0].to_double() - f0), std::abs(f.values()[1].to_double() - f1));
  r.passed = pi_err <= 1e-12 && f_err <= 1e-12;
  r.metrics = {{"pi_inv", pi}, {"pi_error", pi_err}, {"f_inv", {f.values()[0].to_double(), f.values()[1].to_double()}},
               {"f_error", f_err}};
  r.detail = "pi_inv=(" + detail::fmt(pi[0], 10) + ", " + detail::fmt(pi[1], 10) + ") err " + detail::fmt(pi_err, 3) +
             "; f_inv err " + detail::fmt(f_err, 3);
  return r;
}

/// epsilon_1 = 1/beta exactly and by Monte Carlo; E[M1 + M2] = sqrt(5) + 1.
inline CriterionResult criterion_2(const Config& cfg) {
  CriterionResult r{2, "Read-once constants for the golden mean", false, {}, {}};
  const ResidualChain chain = build_chain(detail::golden(), 1);
  const double inv_beta = static_cast<double>(Real(1 / detail::golden_beta()));
  const double exact = epsilon_exact(chain, 1);
  UniformStream rng_mc = detail::stream(cfg, 2, 0);
  const Estimate mc = epsilon_monte_carlo(chain, 1, 100'000, rng_mc);
  UniformStream rng = detail::stream(cfg, 2, 1);
  const std::size_t runs = 100'000;
  double total = 0;
  for (std::size_t i = 0; i < runs; ++i) {
    const ReadOnceResult ro = read_once(chain, 1, rng);
    total += static_cast<double>(ro.m1 + ro.m2);
  }
  const double mean = total / static_cast<double>(runs);
  const double target = std::sqrt(5.0) + 1.0;
  const bool ok_exact = std::abs(exact - inv_beta) <= 1e-12;
  const bool ok_mc = std::abs(mc.value - inv_beta) <= 0.01;
  const bool ok_mean = std::abs(mean - target) <= 0.05;
  r.passed = ok_exact && ok_mc && ok_mean;
  r.metrics = {{"epsilon_exact", exact}, {"epsilon_mc", mc.value}, {"mean_m1_m2", mean}, {"runs", runs}};
  r.detail = "eps exact " + detail::fmt(exact, 13) + ", MC " + detail::fmt(mc.value) + ", mean(M1+M2) " +
             detail::fmt(mean) + " vs " + detail::fmt(target);
  return r;
}

/// Read-once output frequencies against pi_inv (golden mean, pseudo golden order 3).
inline CriterionResult criterion_3(const Config& cfg) {
  CriterionResult r{3, "Read-once output law", true, {}, {}};
  std::string detail_text;
  int part = 0;
  for (unsigned m : {2u, 3u}) {
    const ResidualChain chain = build_chain(Scheme::pseudo_golden(m), m - 1);
    const StatePmf pi = invariant_pmf(chain);
    UniformStream probe = detail::stream(cfg, 3, part++);
    const std::size_t t = m == 2 ? 1 : default_block_parameter(chain, probe);
    UniformStream rng = detail::stream(cfg, 3, part++);
    std::vector<double> counts(chain.size(), 0.0);
    for (std::size_t i = 0; i < 100'000; ++i) counts[read_once(chain, t, rng).output] += 1;
    const ChiSquareResult chi = chi_square(pi, counts);
    r.passed = r.passed && chi.p_value > 0.01;
    r.metrics["order_" + std::to_string(m)] = {{"t", t}, {"chi2", chi.statistic}, {"p_value", chi.p_value}};
    detail_text += "m=" + std::to_string(m) + " t=" + std::to_string(t) + " p=" + detail::fmt(chi.p_value, 4) + "; ";
  }
  r.detail = detail::joined(detail_text);
  return r;
}

/// Exact law of N for the base-2 density (3/2, 1/2) and its empirical frequencies.
inline CriterionResult criterion_4(const Config& cfg) {
  CriterionResult r{4, "Exact law of N for a base-2 step density", false, {}, {}};
  const Density d = detail::base2_three_halves();
  const BoundedProbability p0 = cdf_n(d, 0), p1 = cdf_n(d, 1);
  const bool exact_ok = p0.value == Number::ratio(1, 2) && p1.value == Number(1) && p0.tail_bound.is_zero() &&
                        pmf_s(d, {}) == Number::ratio(1, 2) && pmf_s(d, {0}) == Number::ratio(1, 2) &&
                        pmf_s(d, {1}) == Number(0);
  UniformStream rng = detail::stream(cfg, 4);
  std::vector<double> freq(3, 0.0);
  const std::size_t draws = 100'000;
  for (std::size_t i = 0; i < draws; ++i) freq[std::min<std::size_t>(sample_coupled(d, rng).n, 2)] += 1;
  for (double& f : freq) f /= static_cast<double>(draws);
  const bool emp_ok = std::abs(freq[0] - 0.5) <= 0.01 && std::abs(freq[1] - 0.5) <= 0.01 && freq[2] == 0;
  r.passed = exact_ok && emp_ok;
  r.metrics = {{"P(N<=0)", p0.value.str()}, {"P(N<=1)", p1.value.str()}, {"empirical", freq}};
  r.detail = "P(N<=0)=" + p0.value.str() + " P(N<=1)=" + p1.value.str() + "; empirical P(N=0)=" +
             detail::fmt(freq[0]) + " P(N=1)=" + detail::fmt(freq[1]);
  return r;
}

/// U ~ Unif(0,1) overall and within the five most frequent S strata.
inline CriterionResult criterion_5(const Config& cfg) {
  CriterionResult r{5, "S independent of uniform U", true, {}, {}};
  const std::vector<std::pair<std::string, Density>> cases = {{"base2 (3/2,1/2)", detail::base2_three_halves()},
                                                              {"base3 depth 2", detail::base3_depth2()},
                                                              {"base2 depth 3", detail::base2_depth3()}};
  int part = 0;
  double worst_ratio = 0;
  for (const auto& [name, density] : cases) {
    UniformStream rng = detail::stream(cfg, 5, part++);
    std::vector<double> all;
    std::map<DigitSeq, std::vector<double>> strata;
    for (std::size_t i = 0; i < 100'000; ++i) {
      const CouplingDraw draw = sample_coupled(density, rng);
      const double u = draw.u.to_double();
      all.push_back(u);
      strata[draw.s].push_back(u);
    }
    std::vector<std::pair<std::size_t, DigitSeq>> by_size;
    for (const auto& [s, us] : strata) by_size.emplace_back(us.size(), s);
    std::sort(by_size.rbegin(), by_size.rend());
    nlohmann::json info = nlohmann::json::array();
    auto test = [&](const std::vector<double>& us, const std::string& label) {
      const double ks = ks_uniform(us);
      const double crit = ks_critical_1pct(us.size());
      worst_ratio = std::max(worst_ratio, ks / crit);
      r.passed = r.passed && ks < crit;
      info.push_back({{"stratum", label}, {"n", us.size()}, {"ks", ks}, {"critical", crit}});
    };
    test(all, "all");
    for (std::size_t k = 0; k < std::min<std::size_t>(5, by_size.size()); ++k)
      test(strata[by_size[k].second], "S=(" + format_digits(by_size[k].second) + ")");
    r.metrics[name] = info;
  }
  r.detail = "largest KS / critical ratio " + detail::fmt(worst_ratio, 4);
  return r;
}

/// Residual digits given S have the same law under two different densities.
inline CriterionResult criterion_6(const Config& cfg) {
  CriterionResult r{6, "Residual law independent of the density", false, {}, {}};
  const Density a = detail::base3_depth2(), b = detail::base3_depth1();
  auto collect = [&](const Density& d, UniformStream& rng) {
    std::map<DigitSeq, std::vector<DigitSeq>> by_s;
    for (std::size_t i = 0; i < 200'000; ++i) {
      const CouplingDraw draw = sample_coupled(d, rng);
      const DigitSeq digits = digits_of(d.scheme(), draw.x, draw.n + 3);
      by_s[draw.s].emplace_back(digits.begin() + static_cast<std::ptrdiff_t>(draw.n), digits.end());
    }
    return by_s;
  };
  UniformStream ra = detail::stream(cfg, 6, 0), rb = detail::stream(cfg, 6, 1);
  const auto sa = collect(a, ra), sb = collect(b, rb);
  DigitSeq best;
  std::size_t best_matched = 0;
  for (const auto& [s, v] : sa) {
    auto it = sb.find(s);
    if (it == sb.end()) continue;
    const std::size_t matched = std::min(v.size(), it->second.size());
    if (matched > best_matched) {
      best_matched = matched;
      best = s;
    }
  }
  const double tv = tv_between(cell_frequencies(sa.at(best), 3), cell_frequencies(sb.at(best), 3));
  r.passed = best_matched >= 10'000 && tv <= 0.02;
  r.metrics = {{"prefix", best}, {"matched_draws", best_matched}, {"tv", tv}};
  r.detail = "S=(" + format_digits(best) + "), " + std::to_string(best_matched) + " matched draws, TV " + detail::fmt(tv);
  return r;
}

/// Base-10 residual digits after N are IID uniform.
inline CriterionResult criterion_7(const Config& cfg) {
  CriterionResult r{7, "IID uniform residual digits for base 10", false, {}, {}};
  const Density d = PiecewiseDensity::from_values(
      Scheme::base_q(10), 1,
      {Number::ratio(1, 2), Number::ratio(1, 2), Number(1), Number(1), Number(1), Number(1), Number(1), Number(1),
       Number::ratio(3, 2), Number::ratio(3, 2)});
  UniformStream rng = detail::stream(cfg, 7);
  std::vector<double> marginal(10, 0.0), pairs(100, 0.0);
  for (std::size_t i = 0; i < 100'000; ++i) {
    const CouplingDraw draw = sample_coupled(d, rng);
    const DigitSeq digits = digits_of(d.scheme(), draw.x, draw.n + 2);
    const Digit r1 = digits[draw.n], r2 = digits[draw.n + 1];
    marginal[r1] += 1;
    pairs[r1 * 10 + r2] += 1;
  }
  const ChiSquareResult m = chi_square(std::vector<double>(10, 0.1), marginal);
  const ChiSquareResult p = chi_square(std::vector<double>(100, 0.01), pairs);
  r.passed = m.p_value > 0.01 && p.p_value > 0.01;
  r.metrics = {{"marginal_p", m.p_value}, {"pairs_p", p.p_value}};
  r.detail = "marginal p=" + detail::fmt(m.p_value, 4) + ", lag-1 pairs p=" + detail::fmt(p.p_value, 4);
  return r;
}

/// Coupling inequalities TV(Q^[n], mu_inv) <= P(N > n) and <= P(K > n).
inline CriterionResult criterion_8(const Config& cfg) {
  CriterionResult r{8, "Coupling inequalities", true, {}, {}};
  std::string text;
  auto record = [&](const std::string& label, const std::vector<TvReport>& reports) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& rep : reports) {
      r.passed = r.passed && rep.holds();
      rows.push_back({{"n", rep.n}, {"tv", rep.tv_empirical}, {"bound", rep.bound}, {"half_width", rep.half_width},
                      {"holds", rep.holds()}});
      text += label + " n=" + std::to_string(rep.n) + ": " + detail::fmt(rep.tv_empirical, 4) + "<=" +
              detail::fmt(rep.bound, 4) + "+3*" + detail::fmt(rep.half_width, 2) + (rep.holds() ? "" : " FAILS") + "; ";
    }
    r.metrics[label] = rows;
  };
  UniformStream rc = detail::stream(cfg, 8, 0);
  record("coupled", check_coupling_inequality(detail::base2_depth3(), CouplingMode::coupled, {0, 1, 2, 4}, 100'000, rc));
  const ResidualChain chain = build_chain(detail::golden(), 1);
  UniformStream rp = detail::stream(cfg, 8, 1);
  CouplingCheckOptions opt;
  opt.block_parameter = 1;
  record("perfect", check_coupling_inequality(detail::golden_depth2(), CouplingMode::perfect, {0, 1, 2, 4, 8, 16},
                                              100'000, rp, &chain, opt));
  r.detail = detail::joined(text);
  return r;
}

/// Closed-form cell lengths against independent exact computations.
inline CriterionResult criterion_9(const Config&) {
  CriterionResult r{9, "Exact-arithmetic cell oracles", true, {}, {}};
  const Scheme cf = Scheme::continued_fraction();
  std::size_t cf_checked = 0, cf_bad = 0;
  std::function<void(std::vector<unsigned long>&)> walk_cf = [&](std::vector<unsigned long>& path) {
    if (!path.empty()) {
      DigitSeq digits(path.begin(), path.end());
      ++cf_checked;
      if (cell_length(cf, digits).rational() != oracle::continued_fraction_cell_width(path)) ++cf_bad;
      if (cell(cf, digits).left.rational() !=
          std::min(oracle::continued_fraction_value(path),
                   oracle::continued_fraction_value([&] { auto b = path; b.back() += 1; return b; }())))
        ++cf_bad;
    }
    if (path.size() == 4) return;
    for (unsigned long k = 1; k <= 4; ++k) {
      path.push_back(k);
      walk_cf(path);
      path.pop_back();
    }
  };
  std::vector<unsigned long> path;
  walk_cf(path);

  double worst = 0;
  std::size_t pg_checked = 0;
  for (unsigned m : {2u, 3u}) {
    const Scheme pg = Scheme::pseudo_golden(m);
    const Real beta = oracle::pseudo_golden_beta(m);
    for (std::size_t n = 1; n <= 12; ++n) {
      for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << n); ++bits) {
        DigitSeq digits(n);
        std::vector<unsigned> od(n);
        for (std::size_t i = 0; i < n; ++i) od[i] = static_cast<unsigned>(digits[i] = (bits >> (n - 1 - i)) & 1u);
        const double lib = cell_length(pg, digits).to_double();
        const double ref = static_cast<double>(oracle::beta_cylinder_length(beta, od));
        worst = std::max(worst, std::abs(lib - ref));
        ++pg_checked;
      }
    }
  }
  r.passed = cf_bad == 0 && worst <= 1e-10;
  r.metrics = {{"cf_prefixes", cf_checked}, {"cf_mismatches", cf_bad}, {"pg_prefixes", pg_checked}, {"pg_max_error", worst}};
  r.detail = std::to_string(cf_checked) + " CF prefixes, " + std::to_string(cf_bad) + " mismatches; " +
             std::to_string(pg_checked) + " pseudo-golden prefixes, max error " + detail::fmt(worst, 3);
  return r;
}

/// Gauss density is invariant under the Gauss map; continued fractions have no finite Markov order.
inline CriterionResult criterion_10(const Config&) {
  CriterionResult r{10, "Gauss invariance and continued-fraction Markov order", false, {}, {}};
  const Density g = Density::gauss();
  const MonotoneDensity& md = g.monotone();
  double worst = 0;
  bool warned = false;
  for (int i = 0; i < 1000; ++i) {
    const double x = (i + 0.5) / 1000.0;
    const PushforwardValue pf = pushforward_density(g, 1, Number::exact(x), 10'000);
    warned = warned || pf.warning;
    worst = std::max(worst, std::abs(pf.value.to_double() - md.pdf(x)));
  }
  bool markov_false = true;
  for (std::size_t s = 0; s <= 3; ++s) markov_false = markov_false && !verify_markov_order(Scheme::continued_fraction(), s, 6);
  r.passed = worst <= 1e-6 && markov_false;
  r.metrics = {{"max_abs_error", worst}, {"tail_warning", warned}, {"markov_order_rejected_s0_to_s3", markov_false}};
  r.detail = "max |f^[1]-f_G| " + detail::fmt(worst, 3) + (warned ? " (tail warning)" : "") +
             "; Markov order rejected for s<=3: " + (markov_false ? "yes" : "no");
  return r;
}

/// X ~ f_inv gives N <= s in every draw.
inline CriterionResult criterion_11(const Config& cfg) {
  CriterionResult r{11, "N <= s under the shift-invariant density", false, {}, {}};
  const ResidualChain chain = build_chain(detail::golden(), 1);
  const Density f = f_inv_density(chain, invariant_pmf(chain));
  UniformStream rng = detail::stream(cfg, 11);
  std::size_t worst = 0;
  for (std::size_t i = 0; i < 100'000; ++i) worst = std::max(worst, sample_coupled(f, rng).n);
  r.passed = worst <= 1;
  r.metrics = {{"max_n", worst}};
  r.detail = "max N over 100000 draws: " + std::to_string(worst);
  return r;
}

/// Pólya-tree mixture: normalization, sampler against density, degenerate depth.
inline CriterionResult criterion_12(const Config& cfg) {
  CriterionResult r{12, "Finite Pólya tree mixture", false, {}, {}};
  const PolyaParams params(Scheme::base_q(2), 3, {0.1, 0.2, 0.3, 0.4}, {2.0, 2.0}, {{{}, {3.0, 1.0}}, {{1}, {0.5, 0.5}}});
  UniformStream rng = detail::stream(cfg, 12, 0);
  const PolyaRealization real = sample_realization(params, rng);
  const PiecewiseDensity dens = random_density(params, real);
  Number total(0);
  for (std::size_t j = 0; j < dens.size(); ++j) total += dens.mass(j);
  const double integral_err = std::abs((total - Number(1)).to_double());
  std::vector<DigitSeq> digits;
  for (std::size_t i = 0; i < 100'000; ++i) digits.push_back(digits_of(params.scheme(), sample_x(params, real, rng).x, 3));
  const double tv = empirical_tv_cells(digits, dens, 3);

  const PolyaParams delta0(Scheme::base_q(2), 3, {1.0, 0.0, 0.0, 0.0});
  UniformStream rng0 = detail::stream(cfg, 12, 1);
  const PolyaRealization real0 = sample_realization(delta0, rng0);
  std::vector<double> xs;
  for (std::size_t i = 0; i < 100'000; ++i) xs.push_back(sample_x(delta0, real0, rng0).x.to_double());
  const double ks = ks_uniform(xs);
  const double crit = ks_critical_1pct(xs.size());
  r.passed = integral_err <= 1e-12 && tv <= 0.01 && ks < crit;
  r.metrics = {{"integral_error", integral_err}, {"tv", tv}, {"ks", ks}, {"ks_critical", crit}};
  r.detail = "integral error " + detail::fmt(integral_err, 3) + ", TV " + detail::fmt(tv) + ", KS " + detail::fmt(ks) +
             " < " + detail::fmt(crit);
  return r;
}

inline const std::vector<std::function<CriterionResult(const Config&)>>& criteria() {
  static const std::vector<std::function<CriterionResult(const Config&)>> all = {
      criterion_1, criterion_2, criterion_3, criterion_4,  criterion_5,  criterion_6,
      criterion_7, criterion_8, criterion_9, criterion_10, criterion_11, criterion_12};
  return all;
}

/// Runs the selected criteria (all when `ids` is empty).
inline std::vector<CriterionResult> run(const Config& cfg, const std::vector<int>& ids = {}) {
  std::vector<CriterionResult> out;
  const auto& all = criteria();
  for (std::size_t i = 0; i < all.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!ids.empty() && std::find(ids.begin(), ids.end(), id) == ids.end()) continue;
    out.push_back(all[i](cfg));
  }
  return out;
}

inline std::string summary_line(const CriterionResult& c) {
  return std::string(c.passed ? "PASS" : "FAIL") + " [" + std::to_string(c.id) + "] " + c.title + ": " + c.detail;
}

inline nlohmann::json to_json(const std::vector<CriterionResult>& results, const Config& cfg) {
  nlohmann::json list = nlohmann::json::array();
  bool all = true;
  for (const auto& c : results) {
    all = all && c.passed;
    list.push_back({{"id", c.id}, {"title", c.title}, {"passed", c.passed}, {"detail", c.detail}, {"metrics", c.metrics}});
  }
  return {{"seed", cfg.seed}, {"all_passed", all}, {"criteria", list}};
}

}  // namespace digitforge::acceptance

#endif  // DIGITFORGE_ACCEPTANCE_HPP
