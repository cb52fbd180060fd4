#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace graphck {

using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline Rational make_rational(std::int64_t num, std::int64_t den = 1) {
  if (den == 0) throw std::invalid_argument("rational: zero denominator");
  return Rational(Integer(num), Integer(den));
}

inline Integer rat_num(const Rational& q) { return numerator(q); }
inline Integer rat_den(const Rational& q) { return denominator(q); }

/// Canonical "p/q" form ("p" when q == 1).
inline std::string rat_str(const Rational& q) {
  std::string s = numerator(q).str();
  if (denominator(q) != 1) s += "/" + denominator(q).str();
  return s;
}

/// Parses "p", "-p" or "p/q". Throws std::invalid_argument on malformed input.
inline Rational rat_parse(const std::string& text) {
  auto slash = text.find('/');
  try {
    if (slash == std::string::npos) return Rational(Integer(text));
    Integer num(text.substr(0, slash));
    Integer den(text.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("zero denominator");
    return Rational(num, den);
  } catch (const std::exception&) {
    throw std::invalid_argument("rational: cannot parse '" + text + "'");
  }
}

inline double rat_double(const Rational& q) {
  return static_cast<double>(q);
}

/// Largest s with s^2 | m, for positive m; returns {s, m / s^2} with the
/// cofactor square-free whenever m factors over primes <= 100000 (always the
/// case for the slope products this library produces).
inline std::pair<Integer, Integer> extract_square(Integer m) {
  if (m <= 0) throw std::invalid_argument("extract_square: nonpositive argument");
  Integer square_part = 1;
  for (Integer p = 2; p * p <= m && p <= 100000; ++p) {
    if (m % p != 0) continue;
    int k = 0;
    while (m % p == 0) { m /= p; ++k; }
    for (int i = 0; i < k / 2; ++i) square_part *= p;
    if (k % 2) m *= p;  // odd power: one factor stays under the radical
  }
  // Whatever survives trial division: extract it wholesale if it is a square.
  Integer r = sqrt(m);
  if (r * r == m) { square_part *= r; m = 1; }
  return {square_part, m};
}

}  // namespace graphck
