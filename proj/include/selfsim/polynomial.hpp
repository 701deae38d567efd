#pragma once

#include "selfsim/interval.hpp"
#include "selfsim/quadratic.hpp"

#include <complex>
#include <string>
#include <vector>

namespace selfsim {

//! Polynomial with integer coefficients, stored in ascending degree order.
//! The zero polynomial has no coefficients.
class IntPolynomial
{
public:
  IntPolynomial() = default;
  explicit IntPolynomial(std::vector<Integer> coeffs);
  IntPolynomial(std::initializer_list<long long> coeffs);

  int degree() const { return static_cast<int>(c_.size()) - 1; }
  bool is_zero() const { return c_.empty(); }
  const std::vector<Integer>& coefficients() const { return c_; }
  const Integer& operator[](int i) const { return c_[i]; }
  const Integer& leading() const { return c_.back(); }

  Integer content() const;
  //! Content divided out, leading coefficient made positive.
  IntPolynomial primitive() const;
  IntPolynomial derivative() const;
  //! Sum of absolute values of the coefficients.
  Integer length() const;
  //! x^deg p(1/x).
  IntPolynomial reversed() const;

  Rational eval(const Rational& x) const;
  int sign_at(const Rational& x) const;

  friend IntPolynomial operator+(const IntPolynomial& p, const IntPolynomial& q);
  friend IntPolynomial operator-(const IntPolynomial& p, const IntPolynomial& q);
  friend IntPolynomial operator*(const IntPolynomial& p, const IntPolynomial& q);
  friend bool operator==(const IntPolynomial& p, const IntPolynomial& q) { return p.c_ == q.c_; }

  std::string to_string() const;

private:
  void trim();
  std::vector<Integer> c_;
};

//! True iff d divides p in Z[x] (d nonzero).
bool divides(const IntPolynomial& d, const IntPolynomial& p);
//! Exact quotient p / d, assuming divisibility.
IntPolynomial exact_quotient(const IntPolynomial& p, const IntPolynomial& d);
//! Primitive gcd over Q.
IntPolynomial gcd(const IntPolynomial& p, const IntPolynomial& q);

//! Squarefree decomposition p = c * prod_i f_i^i with primitive f_i
//! (Yun's algorithm); returns the pairs (f_i, i) with nonconstant f_i.
std::vector<std::pair<IntPolynomial, int>> squarefree_decomposition(const IntPolynomial& p);

//! n-th cyclotomic polynomial.
IntPolynomial cyclotomic(int n);

//! Certified enclosure of one complex root: the closed disk |z - center| <=
//! radius contains exactly one root.
struct RootEnclosure
{
  std::complex<double> center;
  double radius = 0.0;
  bool real = false;
  Interval re;      //!< enclosure of the real part
  Interval modulus; //!< enclosure of |z|
};

//! Certified isolation of all complex roots of a squarefree polynomial.
//! Real roots come first in ascending order, then the others ordered by
//! (real part, imaginary part). Throws InvalidInput if p is not squarefree.
std::vector<RootEnclosure> isolate_roots(const IntPolynomial& p);

//! Certified enclosure of the Mahler measure |a| prod max(1, |z_j|).
//! Cyclotomic factors are stripped symbolically, so roots on the unit
//! circle never need a |z| vs 1 decision.
Interval mahler_measure_interval(const IntPolynomial& p);
double mahler_measure(const IntPolynomial& p);

//! Exact irreducibility over Q via rational-root-free factor search over
//! subsets of certified roots (degree <= 16).
bool is_irreducible(const IntPolynomial& p);

//! Primitive minimal polynomial of a quadratic-field element.
IntPolynomial minimal_polynomial(const QuadraticNumber& x);

} // namespace selfsim
