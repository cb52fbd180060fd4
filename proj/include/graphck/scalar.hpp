#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "graphck/rational.hpp"

namespace graphck {

/// Root of unity e^{2 pi i r}, stored as the exponent r in [0,1).
/// Products and inverses stay in the class, so equality is decidable.
class Phase {
 public:
  Phase() : exp_(0) {}
  explicit Phase(Rational exponent) : exp_(std::move(exponent)) { reduce(); }
  static Phase one() { return Phase(); }
  static Phase minus_one() { return Phase(make_rational(1, 2)); }
  static Phase imaginary() { return Phase(make_rational(1, 4)); }

  const Rational& exponent() const { return exp_; }
  bool is_one() const { return exp_ == 0; }

  Phase operator*(const Phase& o) const { return Phase(exp_ + o.exp_); }
  Phase conj() const { return Phase(-exp_); }
  Phase inverse() const { return conj(); }
  bool operator==(const Phase& o) const { return exp_ == o.exp_; }
  bool operator!=(const Phase& o) const { return !(*this == o); }
  bool operator<(const Phase& o) const { return exp_ < o.exp_; }

  std::complex<double> to_complex() const {
    double a = 2.0 * std::numbers::pi * rat_double(exp_);
    return {std::cos(a), std::sin(a)};
  }

  std::string str() const {
    if (exp_ == 0) return "1";
    if (exp_ == make_rational(1, 2)) return "-1";
    if (exp_ == make_rational(1, 4)) return "i";
    if (exp_ == make_rational(3, 4)) return "-i";
    return "exp(2pi*i*" + rat_str(exp_) + ")";
  }

 private:
  void reduce() {
    Integer n = rat_num(exp_), d = rat_den(exp_);
    Integer r = n % d;
    if (r < 0) r += d;
    exp_ = Rational(r, d);
  }
  Rational exp_;
};

/// Exact scalar phase * c * sqrt(rad) with c a positive rational and rad a
/// square-free positive integer. Closed under product, inverse and
/// conjugation; covers every weight this library produces (roots of unity
/// from basis-map representations, sqrt(slope) factors from bundle systems).
class SqrtScalar {
 public:
  SqrtScalar() : coeff_(1), rad_(1) {}
  SqrtScalar(Phase phase, Rational coeff, Integer rad)
      : phase_(phase), coeff_(std::move(coeff)), rad_(std::move(rad)) {
    normalize();
  }
  static SqrtScalar one() { return SqrtScalar(); }
  static SqrtScalar from_rational(const Rational& c) {
    if (c == 0) throw std::invalid_argument("SqrtScalar: zero");
    if (c > 0) return SqrtScalar(Phase::one(), c, 1);
    return SqrtScalar(Phase::minus_one(), -c, 1);
  }
  static SqrtScalar from_phase(const Phase& p) { return SqrtScalar(p, 1, 1); }
  /// sqrt(q) for positive rational q.
  static SqrtScalar sqrt_of(const Rational& q) {
    if (q <= 0) throw std::invalid_argument("SqrtScalar: sqrt of nonpositive");
    // sqrt(n/d) = sqrt(n d) / d
    return SqrtScalar(Phase::one(), Rational(1, rat_den(q)), rat_num(q) * rat_den(q));
  }

  const Phase& phase() const { return phase_; }
  const Rational& coeff() const { return coeff_; }
  const Integer& radicand() const { return rad_; }

  bool is_one() const { return phase_.is_one() && coeff_ == 1 && rad_ == 1; }
  bool is_unimodular() const { return coeff_ * coeff_ * Rational(rad_) == 1; }

  SqrtScalar operator*(const SqrtScalar& o) const {
    // Both radicands square-free: their gcd is the full square part.
    Integer g = gcd(rad_, o.rad_);
    SqrtScalar r;
    r.phase_ = phase_ * o.phase_;
    r.coeff_ = coeff_ * o.coeff_ * Rational(g);
    r.rad_ = (rad_ / g) * (o.rad_ / g);
    return r;
  }
  SqrtScalar inverse() const {
    // 1/(c sqrt(r)) = (1/(c r)) sqrt(r)
    SqrtScalar r;
    r.phase_ = phase_.inverse();
    r.coeff_ = Rational(1) / (coeff_ * Rational(rad_));
    r.rad_ = rad_;
    return r;
  }
  SqrtScalar conj() const {
    SqrtScalar r = *this;
    r.phase_ = phase_.conj();
    return r;
  }
  bool operator==(const SqrtScalar& o) const {
    return phase_ == o.phase_ && coeff_ == o.coeff_ && rad_ == o.rad_;
  }
  bool operator!=(const SqrtScalar& o) const { return !(*this == o); }

  std::complex<double> to_complex() const {
    return phase_.to_complex() * (rat_double(coeff_) * std::sqrt(static_cast<double>(rad_)));
  }

  std::string str() const {
    std::string s;
    if (!phase_.is_one()) s += phase_.str() + "*";
    s += rat_str(coeff_);
    if (rad_ != 1) s += "*sqrt(" + rad_.str() + ")";
    return s;
  }

 private:
  void normalize() {
    if (coeff_ <= 0) throw std::invalid_argument("SqrtScalar: coefficient must be positive");
    if (rad_ <= 0) throw std::invalid_argument("SqrtScalar: radicand must be positive");
    auto [sq, rest] = extract_square(rad_);
    coeff_ *= Rational(sq);
    rad_ = rest;
  }
  Phase phase_;
  Rational coeff_;
  Integer rad_;
};

/// Weight function coeff * t^exp on an interval piece (exp = 0 for the
/// constant weights of affine pieces).
struct Monomial {
  SqrtScalar coeff;
  Rational exp;  // rational exponent of t

  static Monomial one() { return {SqrtScalar::one(), Rational(0)}; }
  bool is_one() const { return coeff.is_one() && exp == 0; }
  bool is_constant() const { return exp == 0; }

  Monomial operator*(const Monomial& o) const { return {coeff * o.coeff, exp + o.exp}; }
  Monomial inverse() const { return {coeff.inverse(), -exp}; }
  Monomial conj() const { return {coeff.conj(), exp}; }
  /// Square root of a monomial with positive rational coefficient.
  Monomial sqrt() const {
    if (!coeff.phase().is_one() || coeff.radicand() != 1)
      throw std::invalid_argument("Monomial::sqrt: coefficient not a positive rational");
    return {SqrtScalar::sqrt_of(coeff.coeff()), exp / 2};
  }
  /// Substitution t -> t^p (p > 0), i.e. this(t^p).
  Monomial substitute_power(const Rational& p) const { return {coeff, exp * p}; }
  bool operator==(const Monomial& o) const { return coeff == o.coeff && exp == o.exp; }
  bool operator!=(const Monomial& o) const { return !(*this == o); }

  std::complex<double> eval(double t) const {
    return coeff.to_complex() * std::pow(t, rat_double(exp));
  }
  std::string str() const {
    if (exp == 0) return coeff.str();
    std::string s = coeff.is_one() ? "" : coeff.str() + "*";
    return s + "t^(" + rat_str(exp) + ")";
  }
};

}  // namespace graphck
