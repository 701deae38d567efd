#pragma once

#include "selfsim/interval.hpp"

#include <boost/multiprecision/gmp.hpp>

#include <cstddef>
#include <optional>
#include <string>

namespace selfsim {

using Integer = boost::multiprecision::mpz_int;
using Rational = boost::multiprecision::mpq_rational;

//! v_p(x) for a nonzero rational; std::nullopt encodes +infinity (x = 0).
std::optional<long> rational_valuation(const Rational& x, long p);

//! True iff n is prime (deterministic for the ranges used here).
bool is_prime(long long n);

//! Largest s with s*s | n, and the squarefree part n / s^2 (n != 0).
std::pair<Integer, Integer> square_factor(const Integer& n);

//! Rational interval enclosure: the double conversion widened by one ulp.
Interval to_interval(const Rational& x);

//! Element a + b*sqrt(D) of Q or of a real quadratic field Q(sqrt D).
//!
//! D is a squarefree integer > 1; rationals carry D = 0 and b = 0.
//! Arithmetic between elements of two different quadratic fields throws
//! Unsupported. All comparisons are exact.
class QuadraticNumber
{
public:
  QuadraticNumber() = default;
  QuadraticNumber(long long x)
    : a_(x)
  {}
  QuadraticNumber(const Integer& x)
    : a_(x)
  {}
  QuadraticNumber(const Rational& x)
    : a_(x)
  {}
  //! a + b*sqrt(D); D must be squarefree and > 1 unless b == 0.
  QuadraticNumber(const Rational& a, const Rational& b, long long D);

  static QuadraticNumber sqrt_of(long long D) { return { 0, 1, D }; }

  const Rational& a() const { return a_; }
  const Rational& b() const { return b_; }
  //! 0 for rationals.
  long long radicand() const { return d_; }
  bool is_rational() const { return d_ == 0; }
  bool is_zero() const { return d_ == 0 && a_ == 0; }

  QuadraticNumber conjugate() const;
  Rational norm() const { return a_ * a_ - b_ * b_ * d_; }
  Rational trace() const { return 2 * a_; }
  int sign() const;
  QuadraticNumber abs() const { return sign() < 0 ? -*this : *this; }
  QuadraticNumber inverse() const;

  //! Certified enclosure; relative accuracy is kept when a and b*sqrt(D)
  //! nearly cancel.
  Interval to_interval() const;
  double to_double() const { return to_interval().mid(); }

  //! Canonical text: "p/q" for rationals, "(a+b*sqrt(D))/c" otherwise.
  std::string to_string() const;
  std::size_t hash() const;

  friend QuadraticNumber operator+(const QuadraticNumber& x, const QuadraticNumber& y);
  friend QuadraticNumber operator-(const QuadraticNumber& x, const QuadraticNumber& y);
  friend QuadraticNumber operator*(const QuadraticNumber& x, const QuadraticNumber& y);
  friend QuadraticNumber operator/(const QuadraticNumber& x, const QuadraticNumber& y);
  friend QuadraticNumber operator-(const QuadraticNumber& x);
  QuadraticNumber& operator+=(const QuadraticNumber& o) { return *this = *this + o; }
  QuadraticNumber& operator-=(const QuadraticNumber& o) { return *this = *this - o; }
  QuadraticNumber& operator*=(const QuadraticNumber& o) { return *this = *this * o; }

  friend bool operator==(const QuadraticNumber& x, const QuadraticNumber& y)
  {
    return x.d_ == y.d_ && x.a_ == y.a_ && x.b_ == y.b_;
  }
  friend bool operator!=(const QuadraticNumber& x, const QuadraticNumber& y)
  {
    return !(x == y);
  }
  friend bool operator<(const QuadraticNumber& x, const QuadraticNumber& y)
  {
    return (x - y).sign() < 0;
  }
  friend bool operator>(const QuadraticNumber& x, const QuadraticNumber& y) { return y < x; }
  friend bool operator<=(const QuadraticNumber& x, const QuadraticNumber& y) { return !(y < x); }
  friend bool operator>=(const QuadraticNumber& x, const QuadraticNumber& y) { return !(x < y); }

private:
  void normalize();

  Rational a_;
  Rational b_;
  long long d_ = 0;
};

//! Common radicand of two elements (0 if both rational); throws Unsupported
//! when they live in different quadratic fields.
long long common_radicand(long long d1, long long d2);

//! Valuation of x at a prime ideal above p in Q(sqrt D) (or at p in Q when x
//! is rational and D == 0). For split primes, `branch` picks one of the two
//! ideals (sqrt D mapped to +s or -s in Z_p). Valuations are normalized so a
//! uniformizer has valuation 1. Throws Unsupported for p = 2 split.
std::optional<long> quadratic_valuation(const QuadraticNumber& x, long p, long long D,
                                        int branch = 0);

//! Splitting type of p in Q(sqrt D): 0 inert, 1 split, 2 ramified.
int splitting_type(long p, long long D);

} // namespace selfsim
