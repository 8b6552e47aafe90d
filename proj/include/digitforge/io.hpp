#ifndef DIGITFORGE_IO_HPP
#define DIGITFORGE_IO_HPP

#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "digitforge/coupling.hpp"
#include "digitforge/density.hpp"
#include "digitforge/errors.hpp"
#include "digitforge/markov.hpp"
#include "digitforge/number.hpp"
#include "digitforge/polyatree.hpp"
#include "digitforge/readonce.hpp"
#include "digitforge/subdivision.hpp"

namespace digitforge {

using json = nlohmann::json;

/// Digits joined by ';' ("" for the empty prefix).
inline std::string format_digits(const DigitSeq& digits) {
  std::string out;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i) out += ';';
    out += std::to_string(digits[i]);
  }
  return out;
}

inline Number number_from_json(const json& j) {
  if (j.is_string()) return Number::parse(j.get<std::string>());
  if (j.is_number_integer()) return Number(j.get<long long>());
  if (j.is_number()) return Number::parse(j.dump());
  throw domain_error("expected a number or a \"p/q\" string, got " + j.dump());
}

inline json number_to_json(const Number& v) {
  if (v.is_exact()) return v.str();
  return v.to_double();
}

namespace detail {

inline json parse_json_text(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw domain_error("malformed " + what + " JSON: " + e.what());
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw domain_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// "{...}" is JSON, "@path" or an existing file path is read, anything else is returned as is.
inline std::string resolve_spec(const std::string& spec) {
  if (!spec.empty() && spec.front() == '@') return read_file(spec.substr(1));
  if (!spec.empty() && spec.front() != '{' && spec.find('/') != std::string::npos) {
    std::ifstream probe(spec);
    if (probe) return read_file(spec);
  }
  return spec;
}

inline unsigned parse_unsigned(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const unsigned long v = std::stoul(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return static_cast<unsigned>(v);
  } catch (const std::exception&) {
    throw domain_error("malformed " + what + ": " + text);
  }
}

}  // namespace detail

inline Scheme scheme_from_json(const json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    const auto colon = s.find(':');
    const std::string kind = s.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : s.substr(colon + 1);
    if (kind == "base_q") return Scheme::base_q(detail::parse_unsigned(arg, "base"));
    if (kind == "pseudo_golden") return Scheme::pseudo_golden(detail::parse_unsigned(arg, "order"));
    if (kind == "luroth" && arg.empty()) return Scheme::luroth();
    if (kind == "continued_fraction" && arg.empty()) return Scheme::continued_fraction();
    throw domain_error("unknown scheme: " + s);
  }
  if (!j.is_object() || !j.contains("kind")) throw domain_error("scheme JSON needs a \"kind\"");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "base_q") return Scheme::base_q(j.at("q").get<unsigned>());
  if (kind == "pseudo_golden") return Scheme::pseudo_golden(j.at("m").get<unsigned>());
  if (kind == "luroth") return Scheme::luroth();
  if (kind == "continued_fraction") return Scheme::continued_fraction();
  if (kind == "gls") {
    std::vector<Rational> lengths;
    for (const auto& l : j.at("lengths")) lengths.push_back(number_from_json(l).rational());
    std::vector<int> signs = j.contains("signs") ? j.at("signs").get<std::vector<int>>()
                                                 : std::vector<int>(lengths.size(), 1);
    return Scheme::gls(std::move(lengths), std::move(signs));
  }
  throw domain_error("unknown scheme kind: " + kind);
}

/// Shorthand ("base_q:10", "luroth", ...), inline JSON, "@file" or a path to a JSON file.
inline Scheme parse_scheme(const std::string& spec) {
  const std::string text = detail::resolve_spec(spec);
  if (!text.empty() && text.front() == '{') return scheme_from_json(detail::parse_json_text(text, "scheme"));
  return scheme_from_json(json(text));
}

inline json scheme_to_json(const Scheme& scheme) {
  switch (scheme.kind()) {
    case SchemeKind::base_q: return {{"kind", "base_q"}, {"q", scheme.q()}};
    case SchemeKind::pseudo_golden: return {{"kind", "pseudo_golden"}, {"m", scheme.order()}};
    case SchemeKind::luroth: return {{"kind", "luroth"}};
    case SchemeKind::continued_fraction: return {{"kind", "continued_fraction"}};
    case SchemeKind::gls: {
      json lengths = json::array(), signs = json::array();
      for (const auto& b : scheme.gls_branches()) {
        lengths.push_back(b.length.str());
        signs.push_back(b.sign);
      }
      return {{"kind", "gls"}, {"lengths", lengths}, {"signs", signs}};
    }
  }
  return {};
}

/// `fallback` supplies the scheme for "uniform" and for piecewise densities without one.
inline Density density_from_json(const json& j, const Scheme* fallback = nullptr) {
  auto scheme_of = [&](const json& obj) {
    if (obj.is_object() && obj.contains("scheme")) return scheme_from_json(obj.at("scheme"));
    if (fallback) return *fallback;
    throw domain_error("density needs a scheme");
  };
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "gauss") return Density::gauss();
    if (s == "uniform") return Density::uniform(scheme_of(json()));
    throw domain_error("unknown density: " + s);
  }
  if (!j.is_object() || !j.contains("kind")) throw domain_error("density JSON needs a \"kind\"");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "gauss") return Density::gauss();
  if (kind == "uniform") return Density::uniform(scheme_of(j));
  if (kind == "piecewise") {
    const Scheme scheme = scheme_of(j);
    const std::size_t depth = j.at("depth").get<std::size_t>();
    std::vector<Number> values;
    if (j.contains("values")) {
      for (const auto& v : j.at("values")) values.push_back(number_from_json(v));
      return PiecewiseDensity::from_values(scheme, depth, std::move(values));
    }
    for (const auto& v : j.at("masses")) values.push_back(number_from_json(v));
    return PiecewiseDensity::from_masses(scheme, depth, values);
  }
  throw domain_error("unknown density kind: " + kind);
}

inline Density parse_density(const std::string& spec, const Scheme* fallback = nullptr) {
  const std::string text = detail::resolve_spec(spec);
  if (!text.empty() && text.front() == '{') return density_from_json(detail::parse_json_text(text, "density"), fallback);
  return density_from_json(json(text), fallback);
}

inline json density_to_json(const Density& density) {
  if (!density.is_piecewise()) return {{"kind", density.name()}};
  const PiecewiseDensity& pw = density.piecewise();
  json values = json::array();
  for (const auto& v : pw.values()) values.push_back(number_to_json(v));
  return {{"kind", "piecewise"}, {"scheme", scheme_to_json(pw.scheme())}, {"depth", pw.depth()}, {"values", values}};
}

namespace detail {

inline DigitSeq prefix_from_key(const std::string& key) {
  DigitSeq out;
  for (char c : key) {
    if (c != '0' && c != '1') throw domain_error("Pólya alpha keys are binary prefixes, got \"" + key + "\"");
    out.push_back(static_cast<Digit>(c - '0'));
  }
  return out;
}

inline AlphaPair alpha_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) throw domain_error("alpha entries are [alpha0, alpha1]");
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace detail

/// {"scheme":..., "depth":D, "pmf_n":[...], "default_alpha":[a0,a1], "alphas":{"01":[a0,a1]}}
inline PolyaParams polya_from_json(const json& j, const Scheme* fallback = nullptr) {
  Scheme scheme = j.contains("scheme") ? scheme_from_json(j.at("scheme"))
                                       : (fallback ? *fallback : Scheme::base_q(2));
  const std::size_t depth = j.at("depth").get<std::size_t>();
  std::vector<double> pmf = j.at("pmf_n").get<std::vector<double>>();
  AlphaPair def = j.contains("default_alpha") ? detail::alpha_from_json(j.at("default_alpha")) : AlphaPair{1.0, 1.0};
  std::map<DigitSeq, AlphaPair> alphas;
  if (j.contains("alphas"))
    for (const auto& [key, value] : j.at("alphas").items())
      alphas.emplace(detail::prefix_from_key(key), detail::alpha_from_json(value));
  return PolyaParams(std::move(scheme), depth, std::move(pmf), def, std::move(alphas));
}

inline PolyaParams parse_polya(const std::string& spec, const Scheme* fallback = nullptr) {
  return polya_from_json(detail::parse_json_text(detail::resolve_spec(spec), "Pólya parameters"), fallback);
}

inline json realization_to_json(const PolyaRealization& real) {
  json out = json::object();
  for (const auto& [prefix, y] : real.y) {
    std::string key;
    for (Digit d : prefix) key += static_cast<char>('0' + d);
    out[key] = y;
  }
  return out;
}

inline json chain_to_json(const ResidualChain& chain, const StatePmf* pi = nullptr) {
  json omega = json::array();
  for (const auto& z : chain.omega()) omega.push_back(z);
  json p = json::array();
  for (Eigen::Index i = 0; i < chain.matrix().rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < chain.matrix().cols(); ++k) row.push_back(chain.matrix()(i, k));
    p.push_back(row);
  }
  json out = {{"s", chain.order()}, {"omega", omega}, {"P", p}};
  if (chain.scheme()) out["scheme"] = scheme_to_json(*chain.scheme());
  if (pi) out["pi_inv"] = *pi;
  return out;
}

inline const char* coupling_csv_header() { return "x,n,s,u,e,l"; }

inline std::string coupling_csv_row(const CouplingDraw& d) {
  return d.x.str() + "," + std::to_string(d.n) + "," + format_digits(d.s) + "," + d.u.str() + "," + d.e.str() + "," +
         d.l.str();
}

inline const char* perfect_csv_header() { return "x,n,s,u,e,l,m1,m2,m,k,window"; }

inline std::string perfect_csv_row(const PerfectDraw& d, const ResidualChain& chain) {
  return coupling_csv_row(d.coupling) + "," + std::to_string(d.m1) + "," + std::to_string(d.m2) + "," +
         std::to_string(d.m) + "," + std::to_string(d.k) + "," + format_digits(chain.omega()[d.window]);
}

inline json coupling_to_json(const CouplingDraw& d) {
  return {{"x", number_to_json(d.x)}, {"n", d.n}, {"s", d.s},
          {"u", number_to_json(d.u)}, {"e", number_to_json(d.e)}, {"l", number_to_json(d.l)}};
}

inline json perfect_to_json(const PerfectDraw& d, const ResidualChain& chain) {
  json out = coupling_to_json(d.coupling);
  out["m1"] = d.m1;
  out["m2"] = d.m2;
  out["m"] = d.m;
  out["k"] = d.k;
  out["window"] = chain.omega()[d.window];
  return out;
}

}  // namespace digitforge

#endif  // DIGITFORGE_IO_HPP
