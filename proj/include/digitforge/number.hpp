#ifndef DIGITFORGE_NUMBER_HPP
#define DIGITFORGE_NUMBER_HPP

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/gmp.hpp>

#include <cctype>
#include <compare>
#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <variant>

#include "digitforge/errors.hpp"

namespace digitforge {

namespace mp = boost::multiprecision;

using Integer = mp::number<mp::gmp_int, mp::et_off>;
using Rational = mp::number<mp::gmp_rational, mp::et_off>;
/// 50 decimal digits (168-bit mantissa).
using Real = mp::number<mp::cpp_bin_float<50>, mp::et_off>;

inline Real to_real(const Rational& r) {
  return Real(mp::numerator(r)) / Real(mp::denominator(r));
}

/// Floor of a non-negative-or-negative rational as an Integer.
inline Integer floor_of(const Rational& r) {
  const Integer num = mp::numerator(r);
  const Integer den = mp::denominator(r);
  Integer q = num / den;
  if (num < 0 && q * den != num) q -= 1;
  return q;
}

inline Integer floor_of(const Real& r) {
  std::string text = mp::floor(r).str(0, std::ios_base::fixed);
  if (auto dot = text.find('.'); dot != std::string::npos) text.resize(dot);
  return Integer(text);
}

/// A value that is either an exact rational or a high-precision float.
///
/// Arithmetic between two rationals stays exact; any operation that touches a
/// Real operand produces a Real.
class Number {
 public:
  Number() : value_(Rational(0)) {}
  template <std::integral I>
  Number(I v) : value_(Rational(static_cast<long long>(v))) {}  // NOLINT(implicit)
  Number(Rational v) : value_(std::move(v)) {}                    // NOLINT(implicit)
  Number(Real v) : value_(std::move(v)) {}                        // NOLINT(implicit)

  /// Exact binary value of a double.
  static Number exact(double v) { return Number(Rational(v)); }
  static Number approx(double v) { return Number(Real(v)); }
  static Number ratio(long long p, long long q) { return Number(Rational(p, q)); }

  static Number parse(std::string_view text);

  bool is_exact() const { return std::holds_alternative<Rational>(value_); }

  const Rational& rational() const {
    if (!is_exact()) throw domain_error("number is not an exact rational");
    return std::get<Rational>(value_);
  }

  Real real() const {
    if (is_exact()) return to_real(std::get<Rational>(value_));
    return std::get<Real>(value_);
  }

  double to_double() const {
    if (is_exact()) return static_cast<double>(std::get<Rational>(value_));
    return static_cast<double>(std::get<Real>(value_));
  }

  Integer floor() const {
    if (is_exact()) return floor_of(std::get<Rational>(value_));
    return floor_of(std::get<Real>(value_));
  }

  bool is_integer() const {
    if (is_exact()) return mp::denominator(std::get<Rational>(value_)) == 1;
    const Real& r = std::get<Real>(value_);
    return mp::floor(r) == r;
  }

  int sign() const {
    if (is_exact()) return std::get<Rational>(value_).sign();
    return std::get<Real>(value_).sign();
  }

  bool is_zero() const { return sign() == 0; }

  /// "p/q" (or "p") for rationals; `digits` significant digits for reals.
  std::string str(int digits = 17) const {
    if (is_exact()) {
      const Rational& r = std::get<Rational>(value_);
      if (mp::denominator(r) == 1) return mp::numerator(r).str();
      return mp::numerator(r).str() + "/" + mp::denominator(r).str();
    }
    return std::get<Real>(value_).str(digits);
  }

  Number operator-() const {
    if (is_exact()) return Number(Rational(-std::get<Rational>(value_)));
    return Number(Real(-std::get<Real>(value_)));
  }

  friend Number operator+(const Number& a, const Number& b) {
    if (a.is_exact() && b.is_exact()) return Number(Rational(a.exact_ref() + b.exact_ref()));
    return Number(Real(a.real() + b.real()));
  }
  friend Number operator-(const Number& a, const Number& b) {
    if (a.is_exact() && b.is_exact()) return Number(Rational(a.exact_ref() - b.exact_ref()));
    return Number(Real(a.real() - b.real()));
  }
  friend Number operator*(const Number& a, const Number& b) {
    if (a.is_exact() && b.is_exact()) return Number(Rational(a.exact_ref() * b.exact_ref()));
    return Number(Real(a.real() * b.real()));
  }
  friend Number operator/(const Number& a, const Number& b) {
    if (b.is_zero()) throw domain_error("division by zero");
    if (a.is_exact() && b.is_exact()) return Number(Rational(a.exact_ref() / b.exact_ref()));
    return Number(Real(a.real() / b.real()));
  }
  Number& operator+=(const Number& o) { return *this = *this + o; }
  Number& operator-=(const Number& o) { return *this = *this - o; }
  Number& operator*=(const Number& o) { return *this = *this * o; }
  Number& operator/=(const Number& o) { return *this = *this / o; }

  friend bool operator==(const Number& a, const Number& b) {
    if (a.is_exact() && b.is_exact()) return a.exact_ref() == b.exact_ref();
    return a.real() == b.real();
  }
  friend std::partial_ordering operator<=>(const Number& a, const Number& b) {
    if (a.is_exact() && b.is_exact()) {
      const int c = a.exact_ref().compare(b.exact_ref());
      return c < 0 ? std::partial_ordering::less
                   : (c > 0 ? std::partial_ordering::greater : std::partial_ordering::equivalent);
    }
    const Real x = a.real();
    const Real y = b.real();
    if (x < y) return std::partial_ordering::less;
    if (x > y) return std::partial_ordering::greater;
    return std::partial_ordering::equivalent;
  }

 private:
  const Rational& exact_ref() const { return std::get<Rational>(value_); }

  std::variant<Rational, Real> value_;
};

inline Number abs(const Number& v) { return v.sign() < 0 ? -v : v; }

inline std::ostream& operator<<(std::ostream& os, const Number& v) { return os << v.str(); }

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

// [+-]digits[.digits][(e|E)[+-]digits] parsed exactly.
// GMP reads a leading 0 as an octal prefix.
inline Integer decimal_integer(std::string digits) {
  const auto first = digits.find_first_not_of('0');
  digits.erase(0, first == std::string::npos ? digits.size() - 1 : first);
  return Integer(digits);
}

inline Rational parse_decimal(std::string_view s) {
  const std::string original(s);
  bool negative = false;
  if (!s.empty() && (s.front() == '+' || s.front() == '-')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  long exponent = 0;
  if (auto e = s.find_first_of("eE"); e != std::string_view::npos) {
    std::string_view exp_part = s.substr(e + 1);
    s = s.substr(0, e);
    bool exp_negative = false;
    if (!exp_part.empty() && (exp_part.front() == '+' || exp_part.front() == '-')) {
      exp_negative = exp_part.front() == '-';
      exp_part.remove_prefix(1);
    }
    if (!all_digits(exp_part) || exp_part.size() > 6) throw domain_error("malformed number: " + original);
    exponent = std::stol(std::string(exp_part));
    if (exp_negative) exponent = -exponent;
  }
  std::string mantissa;
  if (auto dot = s.find('.'); dot != std::string_view::npos) {
    std::string_view whole = s.substr(0, dot);
    std::string_view frac = s.substr(dot + 1);
    if ((!whole.empty() && !all_digits(whole)) || (!frac.empty() && !all_digits(frac)) ||
        (whole.empty() && frac.empty()))
      throw domain_error("malformed number: " + original);
    mantissa = std::string(whole) + std::string(frac);
    exponent -= static_cast<long>(frac.size());
  } else {
    if (!all_digits(s)) throw domain_error("malformed number: " + original);
    mantissa = std::string(s);
  }
  if (mantissa.empty()) mantissa = "0";
  Rational value{decimal_integer(mantissa)};
  const Integer scale = mp::pow(Integer(10), static_cast<unsigned>(exponent < 0 ? -exponent : exponent));
  if (exponent < 0) value /= Rational(scale);
  else value *= Rational(scale);
  return negative ? Rational(-value) : value;
}

inline Rational parse_rational(std::string_view s) {
  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    std::string_view p = trim(s.substr(0, slash));
    std::string_view q = trim(s.substr(slash + 1));
    std::string_view p_digits = p;
    if (!p_digits.empty() && (p_digits.front() == '-' || p_digits.front() == '+')) p_digits.remove_prefix(1);
    if (!all_digits(p_digits) || !all_digits(q)) throw domain_error("malformed rational: " + std::string(s));
    Integer den = decimal_integer(std::string{q});
    if (den == 0) throw domain_error("zero denominator: " + std::string(s));
    Integer num = decimal_integer(std::string(p_digits));
    if (!p.empty() && p.front() == '-') num = -num;
    return Rational(num, den);
  }
  return parse_decimal(s);
}

}  // namespace detail

/// Accepts "p/q", decimals ("0.125", "1e-4") and quadratic surds "sqrtA", "sqrt(A)", "sqrtA-r", "sqrtA+r".
/// Surds are evaluated in high precision.
inline Number Number::parse(std::string_view text) {
  std::string_view s = detail::trim(text);
  if (s.empty()) throw domain_error("empty number");
  if (s.substr(0, 4) == "sqrt") {
    s.remove_prefix(4);
    std::string_view radicand;
    if (!s.empty() && s.front() == '(') {
      auto close = s.find(')');
      if (close == std::string_view::npos) throw domain_error("malformed surd: " + std::string(text));
      radicand = s.substr(1, close - 1);
      s.remove_prefix(close + 1);
    } else {
      std::size_t i = 0;
      while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
      radicand = s.substr(0, i);
      s.remove_prefix(i);
    }
    const Rational r = detail::parse_rational(detail::trim(radicand));
    if (r.sign() < 0) throw domain_error("negative radicand: " + std::string(text));
    Real value = mp::sqrt(to_real(r));
    s = detail::trim(s);
    if (!s.empty()) {
      if (s.front() != '+' && s.front() != '-') throw domain_error("malformed surd: " + std::string(text));
      const bool minus = s.front() == '-';
      const Rational offset = detail::parse_rational(detail::trim(s.substr(1)));
      value += minus ? Real(-to_real(offset)) : to_real(offset);
    }
    return Number(value);
  }
  return Number(detail::parse_rational(s));
}

}  // namespace digitforge

#endif  // DIGITFORGE_NUMBER_HPP
