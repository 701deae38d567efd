#pragma once

#include "selfsim/polynomial.hpp"
#include "selfsim/quadratic.hpp"

#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace selfsim {

//! Exact algebraic number: primitive irreducible minimal polynomial plus a
//! certified disk isolating one of its roots.
class AlgebraicNumber
{
public:
  //! The rational 0.
  AlgebraicNumber();
  AlgebraicNumber(const Rational& x);
  AlgebraicNumber(const QuadraticNumber& x);

  //! k-th real root (0-based, ascending) of an irreducible polynomial.
  static AlgebraicNumber real_root(const IntPolynomial& p, int k);
  //! Root of an irreducible polynomial closest to `approx`.
  static AlgebraicNumber nearest_root(const IntPolynomial& p, std::complex<double> approx);

  const IntPolynomial& min_poly() const { return min_poly_; }
  int degree() const { return min_poly_.degree(); }
  bool is_real() const { return root_.real; }
  bool is_rational() const { return degree() == 1; }
  const RootEnclosure& root() const { return root_; }
  std::complex<double> approx() const { return root_.center; }

  //! Exact quadratic-field form when degree <= 2 and the root is real.
  std::optional<QuadraticNumber> to_quadratic() const;

  //! Certified enclosure of the Mahler measure of the minimal polynomial.
  const Interval& mahler() const { return mahler_; }

  //! Multiplicative inverse (nonzero input).
  AlgebraicNumber inverse() const;

  friend bool operator==(const AlgebraicNumber& x, const AlgebraicNumber& y);

  std::string to_string() const;

private:
  AlgebraicNumber(IntPolynomial p, RootEnclosure r);

  IntPolynomial min_poly_;
  RootEnclosure root_;
  Interval mahler_;
};

//! Absolute (multiplicative) height H(alpha) = M(min_poly)^(1/deg).
double absolute_height(const AlgebraicNumber& a);
Interval absolute_height_interval(const AlgebraicNumber& a);
//! h(alpha) = log H(alpha).
double log_height(const AlgebraicNumber& a);
Interval log_height_interval(const AlgebraicNumber& a);

//! Enclosures of all real conjugates, ascending.
std::vector<Interval> real_embeddings(const AlgebraicNumber& a);

//! Interval of width <= tolerance containing a real algebraic number,
//! refined by exact bisection on rational endpoints.
Interval evaluate(const AlgebraicNumber& a, double tolerance);

//! Parse the textual exact-number syntax: integers, "p/q",
//! "(a+b*sqrt(q))/c" (any +,-,*,/ expression over integers and sqrt(n)),
//! "{minpoly: [c0, c1, ...], root: k}" for the k-th real root and
//! "{minpoly: [...], root: complex(re, im)}" for the root nearest re + i im.
AlgebraicNumber parse_algebraic(const std::string& text);

//! Same syntax, restricted to elements of Q or a single Q(sqrt D).
QuadraticNumber parse_quadratic(const std::string& text);

} // namespace selfsim
