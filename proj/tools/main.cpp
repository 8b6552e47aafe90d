// digitforge command-line front end.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "digitforge/acceptance.hpp"
#include "digitforge/digitforge.hpp"

namespace df = digitforge;
using nlohmann::json;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_other = 1;
constexpr int exit_domain = 2;
constexpr int exit_budget = 3;
constexpr int exit_acceptance = 4;

// Draws are generated in fixed-size chunks; chunk c reads stream (seed, c). The output is the same
// for every thread count.
constexpr std::size_t chunk_size = 1024;

const char* rng_help =
    "Randomness: every run is determined by --seed. Draws are split into chunks of 1024 and chunk c\n"
    "reads its own mt19937_64 stream seeded from (seed, c), so DIGITFORGE_THREADS only changes speed,\n"
    "never the output.";

struct Common {
  std::uint64_t seed = 1;
  std::string out;
  std::string format = "csv";
};

std::size_t thread_count() {
  const char* env = std::getenv("DIGITFORGE_THREADS");
  if (env == nullptr || *env == '\0') return 1;
  try {
    const long v = std::stol(env);
    return v < 1 ? 1 : static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw df::domain_error(std::string("DIGITFORGE_THREADS is not a number: ") + env);
  }
}

// Runs make(rng) for draws in [0, total), writing row strings in draw order.
template <class Make>
std::vector<std::string> run_chunked(std::uint64_t seed, std::size_t total, Make make) {
  const std::size_t chunks = (total + chunk_size - 1) / chunk_size;
  std::vector<std::vector<std::string>> rows(chunks);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t c = next++; c < chunks; c = next++) {
      try {
        df::UniformStream rng(seed, c);
        const std::size_t n = std::min(chunk_size, total - c * chunk_size);
        rows[c].reserve(n);
        for (std::size_t i = 0; i < n; ++i) rows[c].push_back(make(rng));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = chunks;
      }
    }
  };
  const std::size_t n_threads = std::min(thread_count(), std::max<std::size_t>(chunks, 1));
  std::vector<std::thread> pool;
  for (std::size_t i = 1; i < n_threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  std::vector<std::string> out;
  out.reserve(total);
  for (auto& chunk : rows)
    for (auto& r : chunk) out.push_back(std::move(r));
  return out;
}

void emit(const Common& common, const std::string& text) {
  if (common.out.empty() || common.out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(common.out, std::ios::binary);
  if (!f) throw df::domain_error("cannot write " + common.out);
  f << text;
}

void check_format(const Common& common) {
  if (common.format != "csv" && common.format != "json") throw df::domain_error("--format must be csv or json");
}

std::size_t default_order(const df::Scheme& scheme) {
  return scheme.kind() == df::SchemeKind::pseudo_golden ? scheme.order() - 1 : 1;
}

void add_common(CLI::App* sub, Common& common) {
  sub->add_option("--seed", common.seed, "RNG seed");
  sub->add_option("--out", common.out, "output file (default: stdout)");
  sub->add_option("--format", common.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
}

// ---- expand

struct ExpandArgs {
  Common common;
  std::string scheme = "base_q:10";
  std::string x;
  std::size_t n = 10;
};

void cmd_expand(const ExpandArgs& a) {
  check_format(a.common);
  const df::Scheme scheme = df::parse_scheme(a.scheme);
  const df::Number x = df::Number::parse(a.x);
  const df::DigitSeq digits = df::digits_of(scheme, x, a.n);
  df::CellCursor cursor(scheme);
  std::ostringstream csv;
  json rows = json::array();
  csv << "level,digit,left,right,length,e,u\n";
  for (std::size_t i = 0; i < digits.size(); ++i) {
    cursor.push(digits[i]);
    const df::Interval iv = cursor.interval();
    const df::Number e = x - iv.left;
    const df::Number u = e / iv.length;
    csv << i + 1 << ',' << digits[i] << ',' << iv.left.str() << ',' << iv.right().str() << ',' << iv.length.str()
        << ',' << e.str() << ',' << u.str() << '\n';
    rows.push_back({{"level", i + 1}, {"digit", digits[i]}, {"left", df::number_to_json(iv.left)},
                    {"right", df::number_to_json(iv.right())}, {"length", df::number_to_json(iv.length)},
                    {"e", df::number_to_json(e)}, {"u", df::number_to_json(u)}});
  }
  if (a.common.format == "csv") {
    emit(a.common, csv.str());
  } else {
    emit(a.common, json{{"scheme", df::scheme_to_json(scheme)}, {"x", df::number_to_json(x)}, {"levels", rows}}.dump(2) + "\n");
  }
}

// ---- sample

struct SampleArgs {
  Common common;
  std::string scheme;
  std::string density = "uniform";
  std::string mode = "coupled";
  std::size_t draws = 1000;
  std::size_t order = 0;
  std::size_t block = 0;
  std::size_t min_digits = 0;
  std::uint64_t depth_cap = 1'000'000;
};

void cmd_sample(const SampleArgs& a) {
  check_format(a.common);
  std::optional<df::Scheme> fallback;
  if (!a.scheme.empty()) fallback = df::parse_scheme(a.scheme);
  const df::Density density = df::parse_density(a.density, fallback ? &*fallback : nullptr);
  df::CouplingOptions copt;
  copt.depth_cap = a.depth_cap;
  const bool csv = a.common.format == "csv";
  std::vector<std::string> rows;
  std::string header;
  json meta = {{"seed", a.common.seed}, {"mode", a.mode}, {"density", df::density_to_json(density)}, {"draws", a.draws}};

  if (a.mode == "coupled") {
    header = df::coupling_csv_header();
    rows = run_chunked(a.common.seed, a.draws, [&](df::UniformStream& rng) {
      const df::CouplingDraw d = df::sample_coupled(density, rng, copt);
      return csv ? df::coupling_csv_row(d) : df::coupling_to_json(d).dump();
    });
  } else if (a.mode == "perfect") {
    const std::size_t s = a.order ? a.order : default_order(density.scheme());
    const df::ResidualChain chain = df::build_chain(density.scheme(), s);
    std::size_t t = a.block;
    if (t == 0) {
      // Probe stream lives outside the chunk id range.
      df::UniformStream probe(a.common.seed, std::uint64_t{1} << 62);
      t = df::default_block_parameter(chain, probe);
    }
    df::PerfectOptions popt;
    popt.min_digits = a.min_digits;
    popt.coupling = copt;
    meta["order"] = s;
    meta["block_parameter"] = t;
    header = df::perfect_csv_header();
    rows = run_chunked(a.common.seed, a.draws, [&](df::UniformStream& rng) {
      const df::PerfectDraw d = df::perfect_remainder_sample(density, chain, t, rng, popt);
      return csv ? df::perfect_csv_row(d, chain) : df::perfect_to_json(d, chain).dump();
    });
  } else {
    throw df::domain_error("--mode must be coupled or perfect");
  }

  std::string text;
  if (csv) {
    text = header + "\n";
    for (const auto& r : rows) text += r + "\n";
  } else {
    json draws = json::array();
    for (const auto& r : rows) draws.push_back(json::parse(r));
    meta["samples"] = std::move(draws);
    text = meta.dump(2) + "\n";
  }
  emit(a.common, text);
}

// ---- chain

struct ChainArgs {
  Common common;
  std::string scheme = "pseudo_golden:2";
  std::size_t order = 0;
};

void cmd_chain(const ChainArgs& a) {
  check_format(a.common);
  const df::Scheme scheme = df::parse_scheme(a.scheme);
  const std::size_t s = a.order ? a.order : default_order(scheme);
  const df::ResidualChain chain = df::build_chain(scheme, s);
  const df::StatePmf pi = df::invariant_pmf(chain);
  const df::PiecewiseDensity f = df::f_inv_density(chain, pi);
  const df::ErgodicityReport erg = df::is_uniformly_ergodic(chain);
  if (a.common.format == "json") {
    json out = df::chain_to_json(chain, &pi);
    json fvals = json::array();
    for (const auto& v : f.values()) fvals.push_back(df::number_to_json(v));
    out["f_inv"] = fvals;
    out["ergodicity"] = {{"uniformly_ergodic", erg.ergodic}, {"irreducible", erg.irreducible}, {"period", erg.period},
                         {"alpha", erg.alpha}, {"beta", erg.beta}};
    emit(a.common, out.dump(2) + "\n");
    return;
  }
  std::ostringstream csv;
  csv.precision(17);
  csv << "state,pi_inv,f_inv";
  for (const auto& z : chain.omega()) csv << ",to_" << df::format_digits(z);
  csv << '\n';
  for (std::size_t i = 0; i < chain.size(); ++i) {
    csv << df::format_digits(chain.omega()[i]) << ',' << pi[i] << ',' << f.values()[i].str();
    for (std::size_t k = 0; k < chain.size(); ++k)
      csv << ',' << chain.matrix()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
    csv << '\n';
  }
  emit(a.common, csv.str());
}

// ---- epsilon

struct EpsilonArgs {
  Common common;
  std::string scheme = "pseudo_golden:2";
  std::size_t order = 0;
  std::vector<std::size_t> blocks_t{1};
  std::size_t mc_blocks = 100'000;
};

void cmd_epsilon(const EpsilonArgs& a) {
  check_format(a.common);
  const df::Scheme scheme = df::parse_scheme(a.scheme);
  const std::size_t s = a.order ? a.order : default_order(scheme);
  const df::ResidualChain chain = df::build_chain(scheme, s);
  json rows = json::array();
  std::ostringstream csv;
  csv.precision(17);
  csv << "t,b,epsilon_exact,epsilon_mc,half_width\n";
  for (std::size_t i = 0; i < a.blocks_t.size(); ++i) {
    const std::size_t t = a.blocks_t[i];
    std::optional<double> exact;
    try {
      exact = df::epsilon_exact(chain, t);
    } catch (const df::infeasible_exact_error&) {
    }
    df::UniformStream rng(a.common.seed, i);
    std::optional<df::Estimate> mc;
    if (a.mc_blocks > 0) mc = df::epsilon_monte_carlo(chain, t, a.mc_blocks, rng);
    const std::size_t b = df::block_length(chain, t);
    csv << t << ',' << b << ',';
    if (exact) csv << *exact;
    csv << ',';
    if (mc) csv << mc->value << ',' << mc->half_width;
    else csv << ',';
    csv << '\n';
    json row = {{"t", t}, {"b", b}, {"epsilon_exact", exact ? json(*exact) : json(nullptr)}};
    if (mc) row["epsilon_mc"] = {{"value", mc->value}, {"half_width", mc->half_width}, {"blocks", mc->trials}};
    rows.push_back(row);
  }
  if (a.common.format == "csv") emit(a.common, csv.str());
  else emit(a.common, json{{"scheme", df::scheme_to_json(scheme)}, {"order", s}, {"epsilon", rows}}.dump(2) + "\n");
}

// ---- verify

struct VerifyArgs {
  Common common;
  std::vector<int> criteria;
};

int cmd_verify(const VerifyArgs& a) {
  df::acceptance::Config cfg;
  cfg.seed = a.common.seed;
  for (int id : a.criteria)
    if (id < 1 || id > static_cast<int>(df::acceptance::criteria().size()))
      throw df::domain_error("no acceptance criterion " + std::to_string(id));
  const auto results = df::acceptance::run(cfg, a.criteria);
  bool ok = true;
  for (const auto& r : results) {
    std::cerr << df::acceptance::summary_line(r) << '\n';
    ok = ok && r.passed;
  }
  Common out = a.common;
  emit(out, df::acceptance::to_json(results, cfg).dump(2) + "\n");
  return ok ? exit_ok : exit_acceptance;
}

// ---- polya

struct PolyaArgs {
  Common common;
  std::string params;
  std::size_t draws = 1000;
};

void cmd_polya(const PolyaArgs& a) {
  check_format(a.common);
  const df::PolyaParams params = df::parse_polya(a.params);
  // The realization uses a stream outside the chunk id range.
  df::UniformStream tree_rng(a.common.seed, std::uint64_t{1} << 62);
  const df::PolyaRealization real = df::sample_realization(params, tree_rng);
  const df::PiecewiseDensity dens = df::random_density(params, real);
  const bool csv = a.common.format == "csv";
  const auto rows = run_chunked(a.common.seed, a.draws, [&](df::UniformStream& rng) {
    const df::PolyaDraw d = df::sample_x(params, real, rng);
    if (csv) return d.x.str() + "," + std::to_string(d.n) + "," + df::format_digits(d.s);
    return json{{"x", df::number_to_json(d.x)}, {"n", d.n}, {"s", d.s}}.dump();
  });
  if (csv) {
    std::string text = "x,n,s\n";
    for (const auto& r : rows) text += r + "\n";
    emit(a.common, text);
    return;
  }
  json samples = json::array();
  for (const auto& r : rows) samples.push_back(json::parse(r));
  emit(a.common, json{{"seed", a.common.seed},
                      {"realization", df::realization_to_json(real)},
                      {"density", df::density_to_json(dens)},
                      {"samples", samples}}
                         .dump(2) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"digitforge: digit expansions, sufficient-digit couplings and perfect sampling of residual digits"};
  app.footer(rng_help);
  app.require_subcommand(1);

  ExpandArgs expand;
  auto* c_expand = app.add_subcommand("expand", "digits, cells and approximation errors of x");
  add_common(c_expand, expand.common);
  c_expand->add_option("--scheme", expand.scheme, "scheme: base_q:Q, gls JSON, luroth, pseudo_golden:M, continued_fraction");
  c_expand->add_option("--x", expand.x, "the point: p/q, decimal or sqrtA-r")->required();
  c_expand->add_option("--n", expand.n, "number of digits");

  SampleArgs sample;
  auto* c_sample = app.add_subcommand("sample", "coupled (X, N) draws or perfect remainder draws");
  add_common(c_sample, sample.common);
  c_sample->add_option("--scheme", sample.scheme, "scheme for densities that do not name one");
  c_sample->add_option("--density", sample.density, "gauss, uniform, JSON, @file or path");
  c_sample->add_option("--mode", sample.mode, "coupled or perfect")->check(CLI::IsMember({"coupled", "perfect"}));
  c_sample->add_option("--draws", sample.draws, "number of draws");
  c_sample->add_option("--order", sample.order, "Markov order s of the residual chain (perfect mode)");
  c_sample->add_option("--block", sample.block, "block parameter t (perfect mode, 0 = automatic)");
  c_sample->add_option("--min-digits", sample.min_digits, "digits to generate per perfect draw");
  c_sample->add_option("--depth-cap", sample.depth_cap, "maximum digits revealed per draw");

  ChainArgs chain;
  auto* c_chain = app.add_subcommand("chain", "build and inspect the residual-digit chain");
  add_common(c_chain, chain.common);
  c_chain->add_option("--scheme", chain.scheme, "finite-alphabet scheme");
  c_chain->add_option("--order", chain.order, "Markov order s (0 = scheme default)");

  EpsilonArgs eps;
  auto* c_eps = app.add_subcommand("epsilon", "coalescence probability of a read-once block");
  add_common(c_eps, eps.common);
  c_eps->add_option("--scheme", eps.scheme, "finite-alphabet scheme");
  c_eps->add_option("--order", eps.order, "Markov order s (0 = scheme default)");
  c_eps->add_option("--t", eps.blocks_t, "block parameters t")->expected(1, -1);
  c_eps->add_option("--blocks", eps.mc_blocks, "Monte Carlo blocks (0 = exact only)");

  VerifyArgs verify;
  auto* c_verify = app.add_subcommand("verify", "run the acceptance suite and write a JSON report");
  verify.common.seed = df::acceptance::Config{}.seed;
  add_common(c_verify, verify.common);
  c_verify->add_option("--criteria", verify.criteria, "criterion ids to run (default: all)")->expected(1, -1);

  PolyaArgs polya;
  auto* c_polya = app.add_subcommand("polya", "draw a finite Pólya tree density and samples from it");
  add_common(c_polya, polya.common);
  c_polya->add_option("--params", polya.params, "parameters JSON, @file or path")->required();
  c_polya->add_option("--draws", polya.draws, "number of samples");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_domain;
  }

  try {
    if (*c_expand) cmd_expand(expand);
    else if (*c_sample) cmd_sample(sample);
    else if (*c_chain) cmd_chain(chain);
    else if (*c_eps) cmd_epsilon(eps);
    else if (*c_verify) return cmd_verify(verify);
    else if (*c_polya) cmd_polya(polya);
    return exit_ok;
  } catch (const df::budget_error& e) {
    std::cerr << "budget exceeded: " << e.what() << '\n';
    return exit_budget;
  } catch (const df::domain_error& e) {
    std::cerr << "domain error: " << e.what() << '\n';
    return exit_domain;
  } catch (const df::infeasible_exact_error& e) {
    std::cerr << "resource limit: " << e.what() << '\n';
    return exit_budget;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_other;
  }
}
