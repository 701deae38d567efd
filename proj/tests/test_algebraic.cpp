#include "selfsim/algebraic.hpp"
#include "selfsim/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

using namespace selfsim;

namespace {

// Height of a rational as a product over places: archimedean factor times
// max(1, p^{-v_p}) for every prime dividing numerator or denominator.
double places_height(long num, long den)
{
  double h = std::max(1.0, std::abs(static_cast<double>(num) / den));
  std::map<long, int> v;
  auto factor = [&](long n, int sign) {
    n = std::labs(n);
    for (long p = 2; p * p <= n; ++p)
      while (n % p == 0) {
        v[p] += sign;
        n /= p;
      }
    if (n > 1)
      v[n] += sign;
  };
  factor(num, 1);
  factor(den, -1);
  for (auto [p, e] : v)
    h *= std::max(1.0, std::pow(static_cast<double>(p), -e));
  return h;
}

// H(x)^2 for x in Q(sqrt D) from the trace/norm form: the leading coefficient
// of the primitive minimal polynomial is lcm(den T, den N).
double quadratic_height_sq(const QuadraticNumber& x)
{
  Rational t = x.trace(), n = x.norm();
  Integer a = boost::multiprecision::lcm(denominator(t), denominator(n));
  double s = std::sqrt(static_cast<double>(x.radicand()));
  double s1 = x.a().convert_to<double>() + x.b().convert_to<double>() * s;
  double s2 = x.a().convert_to<double>() - x.b().convert_to<double>() * s;
  return a.convert_to<double>() * std::max(1.0, std::abs(s1)) * std::max(1.0, std::abs(s2));
}

QuadraticNumber random_quadratic(std::mt19937_64& rng, long long D)
{
  std::uniform_int_distribution<int> num(-30, 30), den(1, 20);
  Rational a(num(rng), den(rng));
  Rational b(num(rng), den(rng));
  if (b == 0)
    b = 1;
  return { a, b, D };
}

} // namespace

TEST_CASE("mahler measure examples")
{
  CHECK(mahler_measure(IntPolynomial{ -1, 2 }) == doctest::Approx(2.0));
  CHECK(mahler_measure(IntPolynomial{ -1, 1 }) == doctest::Approx(1.0));
  CHECK(mahler_measure(IntPolynomial{ -1, -1, 1 }) ==
        doctest::Approx((1 + std::sqrt(5.0)) / 2).epsilon(1e-14));
  // cyclotomic factors are stripped exactly
  Interval m = mahler_measure_interval(IntPolynomial{ 1, 1, 1, 1, 1 });
  CHECK(m.lo() == 1.0);
  CHECK(m.hi() == 1.0);
  // Lehmer's polynomial
  IntPolynomial lehmer{ 1, 1, 0, -1, -1, -1, -1, -1, 0, 1, 1 };
  Interval ml = mahler_measure_interval(lehmer);
  CHECK(ml.contains(1.17628081825991750654));
  CHECK(ml.width() < 1e-12);
  CHECK_THROWS_AS(mahler_measure(IntPolynomial{}), InvalidInput);
}

TEST_CASE("mahler measure is multiplicative")
{
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> coef(-5, 5);
  for (int t = 0; t < 40; ++t) {
    std::vector<Integer> a, b;
    int da = 1 + t % 4, db = 1 + (t / 4) % 4;
    for (int i = 0; i <= da; ++i)
      a.emplace_back(coef(rng));
    for (int i = 0; i <= db; ++i)
      b.emplace_back(coef(rng));
    a.back() = a.back() == 0 ? Integer(1) : a.back();
    b.back() = b.back() == 0 ? Integer(2) : b.back();
    IntPolynomial p(a), q(b);
    Interval mp = mahler_measure_interval(p), mq = mahler_measure_interval(q);
    Interval mpq = mahler_measure_interval(p * q);
    Interval prod = mp * mq;
    CHECK(mpq.lo() <= prod.hi() + 1e-9 * prod.hi());
    CHECK(prod.lo() <= mpq.hi() + 1e-9 * prod.hi());
  }
}

TEST_CASE("heights of rationals match the product over places")
{
  CHECK(absolute_height(AlgebraicNumber(Rational(1))) == 1.0);
  CHECK(absolute_height(AlgebraicNumber(Rational(1, 2))) == doctest::Approx(2.0));
  CHECK(log_height(AlgebraicNumber(Rational(1))) == 0.0);
  CHECK(log_height(AlgebraicNumber(Rational(1, 2))) == doctest::Approx(std::log(2.0)));
  CHECK(log_height(AlgebraicNumber(Rational(2))) == doctest::Approx(std::log(2.0)));
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<long> d(-5000, 5000), e(1, 5000);
  for (int t = 0; t < 200; ++t) {
    long num = d(rng), den = e(rng);
    if (num == 0)
      continue;
    CHECK(absolute_height(AlgebraicNumber(Rational(num, den))) ==
          doctest::Approx(places_height(num, den)).epsilon(1e-12));
  }
}

TEST_CASE("heights of quadratic numbers")
{
  AlgebraicNumber s2(QuadraticNumber::sqrt_of(2));
  CHECK(absolute_height(s2) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-13));
  std::mt19937_64 rng(11);
  for (long long D : { 2, 3, 5, 7, 11, 13 }) {
    for (int t = 0; t < 20; ++t) {
      QuadraticNumber x = random_quadratic(rng, D);
      AlgebraicNumber a(x);
      double h2 = quadratic_height_sq(x);
      CHECK(std::pow(absolute_height(a), 2) == doctest::Approx(h2).epsilon(1e-10));
      // H^deg equals the Mahler measure of the minimal polynomial
      Interval m = mahler_measure_interval(a.min_poly());
      CHECK(m.lo() <= h2 * (1 + 1e-12));
      CHECK(h2 <= m.hi() * (1 + 1e-12));
    }
  }
}

TEST_CASE("height is invariant under inversion and bounds the absolute value")
{
  std::mt19937_64 rng(5);
  for (long long D : { 2, 5, 17 }) {
    for (int t = 0; t < 25; ++t) {
      QuadraticNumber x = random_quadratic(rng, D);
      AlgebraicNumber a(x), ai(x.inverse());
      Interval h = absolute_height_interval(a), hi = absolute_height_interval(ai);
      CHECK(h.lo() <= hi.hi() * (1 + 1e-12));
      CHECK(hi.lo() <= h.hi() * (1 + 1e-12));
      double v = std::abs(x.to_double());
      double H = absolute_height(a);
      CHECK(v <= std::pow(H, 2) * (1 + 1e-12));
      CHECK(v >= std::pow(H, -2) * (1 - 1e-12));
    }
  }
  // a general cubic
  AlgebraicNumber c = AlgebraicNumber::real_root(IntPolynomial{ -2, 0, 0, 1 }, 0);
  CHECK(absolute_height(c) == doctest::Approx(std::cbrt(2.0)).epsilon(1e-12));
  CHECK(absolute_height(c.inverse()) == doctest::Approx(std::cbrt(2.0)).epsilon(1e-12));
}

TEST_CASE("height of an integer polynomial in algebraic inputs")
{
  // H(P(x, y)) <= L(P) H(x)^{deg_x} H(y)^{deg_y}
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<int> coef(-3, 3);
  for (int t = 0; t < 60; ++t) {
    QuadraticNumber x = random_quadratic(rng, 5), y = random_quadratic(rng, 5);
    int c00 = coef(rng), c10 = coef(rng), c01 = coef(rng), c11 = coef(rng), c20 = coef(rng);
    QuadraticNumber v = QuadraticNumber(c00) + QuadraticNumber(c10) * x +
                        QuadraticNumber(c01) * y + QuadraticNumber(c11) * x * y +
                        QuadraticNumber(c20) * x * x;
    double len = std::abs(c00) + std::abs(c10) + std::abs(c01) + std::abs(c11) + std::abs(c20);
    if (v.is_zero() || len == 0)
      continue;
    int lx = (c20 != 0) ? 2 : ((c10 != 0 || c11 != 0) ? 1 : 0);
    int ly = (c01 != 0 || c11 != 0) ? 1 : 0;
    double bound = len * std::pow(absolute_height(AlgebraicNumber(x)), lx) *
                   std::pow(absolute_height(AlgebraicNumber(y)), ly);
    CHECK(absolute_height(AlgebraicNumber(v)) <= bound * (1 + 1e-9));
  }
}

TEST_CASE("real embeddings")
{
  auto e = real_embeddings(AlgebraicNumber(Rational(3, 4)));
  REQUIRE(e.size() == 1);
  CHECK(e[0].contains(0.75));
  auto s = real_embeddings(AlgebraicNumber(QuadraticNumber::sqrt_of(2)));
  REQUIRE(s.size() == 2);
  CHECK(s[0].mid() == doctest::Approx(-std::sqrt(2.0)));
  CHECK(s[1].mid() == doctest::Approx(std::sqrt(2.0)));
  AlgebraicNumber q(QuadraticNumber(Rational(1, 3), Rational(2, 3), 5));
  CHECK(q.min_poly() == IntPolynomial{ -19, -6, 9 });
  auto r = real_embeddings(q);
  REQUIRE(r.size() == 2);
  CHECK(r[0].mid() == doctest::Approx((1 - 2 * std::sqrt(5.0)) / 3));
  CHECK(r[1].mid() == doctest::Approx((1 + 2 * std::sqrt(5.0)) / 3));
}

TEST_CASE("rational valuations")
{
  CHECK(*rational_valuation(Rational(9, 2), 3) == 2);
  CHECK(*rational_valuation(Rational(1), 7) == 0);
  CHECK(*rational_valuation(Rational(2, 25), 5) == -2);
  CHECK(!rational_valuation(Rational(0), 3).has_value());
  CHECK_THROWS_AS(rational_valuation(Rational(3), 4), InvalidInput);
}

TEST_CASE("quadratic valuations")
{
  // inert: 2 is a non-residue mod 3
  CHECK(splitting_type(3, 2) == 0);
  CHECK(*quadratic_valuation(QuadraticNumber(3), 3, 2) == 1);
  CHECK(*quadratic_valuation(QuadraticNumber(3, 3, 2), 3, 2) == 1);
  // ramified
  CHECK(splitting_type(5, 5) == 2);
  CHECK(*quadratic_valuation(QuadraticNumber::sqrt_of(5), 5, 5) == 1);
  CHECK(*quadratic_valuation(QuadraticNumber(5), 5, 5) == 2);
  // split: 4^2 = 16 = 5 mod 11; N(4 + sqrt 5) = 11
  CHECK(splitting_type(11, 5) == 1);
  QuadraticNumber x(4, 1, 5);
  long v0 = *quadratic_valuation(x, 11, 5, 0);
  long v1 = *quadratic_valuation(x, 11, 5, 1);
  CHECK(v0 + v1 == 1);
  CHECK(std::min(v0, v1) == 0);
  // valuations of a product add up on each branch
  QuadraticNumber y(Rational(7, 11), 2, 5);
  for (int br = 0; br < 2; ++br)
    CHECK(*quadratic_valuation(x * y, 11, 5, br) ==
          *quadratic_valuation(x, 11, 5, br) + *quadratic_valuation(y, 11, 5, br));
}

TEST_CASE("evaluate")
{
  Interval z = evaluate(AlgebraicNumber(), 1e-6);
  CHECK(z.lo() == 0.0);
  CHECK(z.hi() == 0.0);
  CHECK(evaluate(AlgebraicNumber(Rational(1, 3)), 1e-4).contains(1.0 / 3.0));
  AlgebraicNumber g = AlgebraicNumber::real_root(IntPolynomial{ -1, -1, 1 }, 1);
  Interval gi = evaluate(g, 1e-6);
  CHECK(gi.width() <= 1e-6);
  CHECK(gi.contains(1.6180339887498949));
  Interval tight = evaluate(g, 1e-14);
  CHECK(tight.width() <= 1e-14);
}

TEST_CASE("irreducibility")
{
  CHECK(is_irreducible(IntPolynomial{ -2, 0, 1 }));
  CHECK(is_irreducible(IntPolynomial{ 1, 0, 0, 0, 1 }));
  CHECK_FALSE(is_irreducible(IntPolynomial{ 4, 0, 0, 0, 1 }));
  CHECK_FALSE(is_irreducible(IntPolynomial{ -2, -2, 1, 1 }));
  CHECK_FALSE(is_irreducible(IntPolynomial{ -1, 0, 4 }));
  CHECK(is_irreducible(IntPolynomial{ -1, -1, 1 }));
  CHECK_THROWS_AS(AlgebraicNumber::real_root(IntPolynomial{ -1, 0, 1 }, 0), InvalidInput);
}

TEST_CASE("number syntax")
{
  CHECK(parse_quadratic("7") == QuadraticNumber(7));
  CHECK(parse_quadratic("-3/6") == QuadraticNumber(Rational(-1, 2)));
  QuadraticNumber q = parse_quadratic("(1+2*sqrt(5))/3");
  CHECK(q == QuadraticNumber(Rational(1, 3), Rational(2, 3), 5));
  CHECK(parse_quadratic(q.to_string()) == q);
  CHECK(parse_quadratic("sqrt(12)") == QuadraticNumber(0, 2, 3));
  CHECK(parse_quadratic("sqrt(9/4)") == QuadraticNumber(Rational(3, 2)));
  QuadraticNumber g = parse_quadratic("{minpoly: [-1, 1, 1], root: 1}");
  CHECK(g == QuadraticNumber(Rational(-1, 2), Rational(1, 2), 5));
  CHECK_THROWS_AS(parse_quadratic("sqrt(2)+sqrt(3)"), Unsupported);
  CHECK_THROWS_AS(parse_quadratic("{minpoly: [-2, 0, 0, 1], root: 0}"), Unsupported);
  CHECK_THROWS_AS(parse_quadratic("1/0"), InvalidInput);
  CHECK_THROWS_AS(parse_quadratic("2x"), InvalidInput);
  AlgebraicNumber c = parse_algebraic("{minpoly: [-2, 0, 0, 1], root: 0}");
  CHECK(c.degree() == 3);
  CHECK(parse_algebraic(c.to_string()) == c);
  std::mt19937_64 rng(17);
  for (int t = 0; t < 50; ++t) {
    QuadraticNumber x = random_quadratic(rng, 7);
    CHECK(parse_quadratic(x.to_string()) == x);
  }
}

TEST_CASE("quadratic arithmetic is exact")
{
  QuadraticNumber phi(Rational(-1, 2), Rational(1, 2), 5);
  CHECK(phi * phi + phi == QuadraticNumber(1));
  CHECK(phi.sign() > 0);
  CHECK((phi - QuadraticNumber(Rational(618, 1000))).sign() > 0);
  CHECK((phi - QuadraticNumber(Rational(619, 1000))).sign() < 0);
  // near-cancelling difference keeps relative accuracy
  QuadraticNumber p = phi;
  for (int i = 0; i < 40; ++i)
    p *= phi;
  Interval iv = p.to_interval();
  CHECK(iv.mid() == doctest::Approx(std::pow(0.6180339887498949, 41)).epsilon(1e-12));
  CHECK(iv.width() < 1e-14 * iv.mid());
  CHECK_THROWS_AS(QuadraticNumber::sqrt_of(2) + QuadraticNumber::sqrt_of(3), Unsupported);
  CHECK_THROWS_AS(QuadraticNumber(0, 1, 8), InvalidInput);
}
