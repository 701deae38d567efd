#include "selfsim/criteria.hpp"
#include "selfsim/errors.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>

using namespace selfsim;
using namespace selfsim::testing;

namespace {

SimMeasure bernoulli(const QuadraticNumber& lambda)
{
  return SimMeasure({ { Rational(1, 2), map1d(lambda, q(1)) },
                      { Rational(1, 2), map1d(lambda, q(-1)) } });
}

SimMeasure first_inhom(long long n)
{
  FamilySpec s;
  s.tag = FamilyTag::inhom1d;
  s.n = n;
  return generate_family(s);
}

CriterionOptions quiet()
{
  CriterionOptions o;
  o.diagnostics = false;
  return o;
}

//! |chi| of the first inhomogeneous family, with log1p to avoid cancellation.
double inhom_chi(double n)
{
  return 0.5 * (std::log1p(1 / n) + std::log1p(2 / n));
}

const QuadraticNumber golden_inverse{ Rational(-1, 2), Rational(1, 2), 5 };

} // namespace

TEST_CASE("main criterion on the first inhomogeneous family")
{
  auto r = main_criterion(first_inhom(1000), quiet());
  CHECK(r.gates_ok());
  CHECK(r.entropy.method == EntropyMethod::exact_free);
  REQUIRE(r.entropy.lower);
  CHECK(*r.entropy.lower == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(std::abs(r.chi.value) == doctest::Approx(1.49875e-3).epsilon(1e-5));
  REQUIRE(r.ratio);
  double oracle = std::log(2.0) / inhom_chi(1000);
  CHECK(*r.ratio == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(*r.ratio == doctest::Approx(462.48).epsilon(0.01 / 462.48));
  REQUIRE(r.separation);
  REQUIRE(r.rhs);
  double S = r.separation->value;
  CHECK(*r.rhs == doctest::Approx(std::pow(std::max(1.0, std::log(S / std::log(2.0))), 2)));
  CHECK(*r.margin == doctest::Approx(*r.ratio - *r.rhs));
  CHECK_FALSE(r.well_mixing);
}

TEST_CASE("main criterion gates")
{
  SUBCASE("single atom has a common fixed point")
  {
    SimMeasure mu({ { Rational(1), map1d(q(1, 2), q(1)) } });
    auto r = main_criterion(mu, quiet());
    CHECK(r.common_fixed_point);
    CHECK_FALSE(r.gates_ok());
    CHECK(r.gate_failures.front() == "common fixed point");
  }
  SUBCASE("expanding measure")
  {
    SimMeasure mu({ { Rational(1, 2), map1d(q(2), q(1)) }, { Rational(1, 2), map1d(q(2), q(-1)) } });
    auto r = main_criterion(mu, quiet());
    CHECK(r.chi.kind == Contraction::not_contracting);
    CHECK_FALSE(r.gates_ok());
    CHECK_FALSE(r.ratio);
  }
  SUBCASE("reducible rotation part")
  {
    ExactMatrix I = ExactMatrix::identity(2);
    SimMeasure mu({ { Rational(1, 2), Similarity(q(1, 2), I, { q(1), q(0) }) },
                    { Rational(1, 2), Similarity(q(1, 2), I, { q(-1), q(0) }) } });
    auto r = main_criterion(mu, quiet());
    CHECK_FALSE(r.irreducible);
    CHECK_FALSE(r.gates_ok());
  }
}

TEST_CASE("main criterion on Bernoulli 1/2")
{
  for (double C : { 1.0, 10.0 }) {
    auto o = quiet();
    o.C = C;
    auto r = main_criterion(bernoulli(q(1, 2)), o);
    REQUIRE(r.ratio);
    CHECK(*r.ratio == doctest::Approx(1.0).epsilon(1e-14));
    REQUIRE(r.margin);
    CHECK(*r.margin < 0);
    CHECK(*r.rhs >= C);
  }
}

TEST_CASE("main criterion without algebraic data")
{
  Mat U = Mat::Identity(1, 1);
  SimMeasure mu({ { Rational(1, 2), Similarity::numeric(0.6, U, Vec::Constant(1, 1)) },
                  { Rational(1, 2), Similarity::numeric(0.6, U, Vec::Constant(1, -1)) } });
  auto r = main_criterion(mu, quiet());
  CHECK_FALSE(r.separation);
  CHECK_FALSE(r.separation_note.empty());
  CHECK_FALSE(r.margin);
  CHECK(r.entropy.upper == doctest::Approx(std::log(2.0)));
}

TEST_CASE("main criterion diagnostics are reported with standard errors")
{
  CriterionOptions o;
  o.diagnostic_samples = 500;
  auto r = main_criterion(first_inhom(10), o);
  REQUIRE(r.well_mixing);
  REQUIRE(r.non_degeneracy);
  // In d = 1, |e_1 . U e_1|^2 = 1 always.
  CHECK(r.well_mixing->value == doctest::Approx(1.0));
  CHECK(r.non_degeneracy->value >= 0);
  CHECK(r.non_degeneracy->value <= 1);
  CHECK(r.diagnostics_note.find("heuristic") == 0);
}

TEST_CASE("inhom1d ratio grows and chi shrinks with n")
{
  double prev_ratio = 0, prev_chi = 1;
  for (long long n : { 10, 100, 1000 }) {
    auto r = main_criterion(first_inhom(n), quiet());
    REQUIRE(r.ratio);
    CHECK(*r.ratio > prev_ratio);
    CHECK(std::abs(r.chi.value) < prev_chi);
    CHECK(r.entropy.method == EntropyMethod::exact_free);
    prev_ratio = *r.ratio;
    prev_chi = std::abs(r.chi.value);
  }
}

TEST_CASE("contracting on average criterion")
{
  SUBCASE("uniform contraction gives ratio 0")
  {
    auto r = contracting_avg_criterion(bernoulli(q(3, 5)), 0.1, 0.5);
    CHECK(r.ratio == 0);
    CHECK(r.rho_hat == doctest::Approx(0.6));
    CHECK(r.attained);
    CHECK(r.pass);
  }
  SUBCASE("family ratio matches the closed form and its limit")
  {
    // alpha_2 = p_k = 1/4: ratio 4 q a2 / ((3 - 4 a2) q - 3), limit 4 a2 / (3 - 4 a2) = 1/2.
    for (long long prime : { 101LL, 10007LL, 1000003LL }) {
      FamilySpec s;
      s.tag = FamilyTag::contracting_avg_q;
      s.q = prime;
      s.b = { { q(0) }, { q(1) }, { q(2) }, { q(3) } };
      s.p = { Rational(1, 4), Rational(1, 4), Rational(1, 4), Rational(1, 4) };
      SimMeasure mu = generate_family(s);
      auto r = contracting_avg_criterion(mu, 0.1, 0.5);
      double qd = static_cast<double>(prime);
      CHECK(r.ratio == doctest::Approx(qd / (2 * qd - 3)).epsilon(1e-9));
      CHECK(r.rho_hat == doctest::Approx(qd / (qd + 3)));
      CHECK(r.pass);
      if (prime == 1000003LL)
        CHECK(r.ratio == doctest::Approx(0.5).epsilon(1e-5));
    }
  }
  SUBCASE("minimizer below rho_tilde is not attained")
  {
    auto r = contracting_avg_criterion(bernoulli(q(1, 2)), 0.1, 0.9);
    CHECK_FALSE(r.attained);
    CHECK(r.rho_hat == doctest::Approx(0.9));
    CHECK(r.ratio == doctest::Approx(0.4 / 0.5));
  }
  SUBCASE("E rho >= 1 is undefined")
  {
    SimMeasure mu({ { Rational(1, 2), map1d(q(1, 5), q(0)) }, { Rational(1, 2), map1d(q(2), q(1)) } });
    CHECK(lyapunov_exponent(mu).value < 0);
    CHECK_THROWS_AS(contracting_avg_criterion(mu, 0.1, 0.5), PreconditionFailed);
  }
}

TEST_CASE("dimension estimate")
{
  auto b = dimension_estimate(bernoulli(q(1, 2)));
  CHECK(b.exact);
  CHECK(b.lower == doctest::Approx(1.0));
  CHECK(b.upper == doctest::Approx(1.0));

  auto quarter = dimension_estimate(bernoulli(q(1, 4)));
  CHECK(quarter.exact);
  CHECK(quarter.lower == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(quarter.upper == doctest::Approx(0.5).epsilon(1e-14));

  auto capped = dimension_estimate(first_inhom(1000));
  CHECK(capped.lower == 1.0);
  CHECK(capped.upper == 1.0);

  // Golden ratio Bernoulli: no freeness, only the enumeration upper bound.
  auto g = dimension_estimate(bernoulli(golden_inverse), 8);
  CHECK_FALSE(g.exact);
  CHECK(g.lower == 0);
  CHECK(g.upper <= 1.0);
  CHECK_FALSE(g.assumptions.empty());
}

TEST_CASE("Bernoulli criterion")
{
  SUBCASE("999/1000 passes with C = 1")
  {
    auto r = bernoulli_criterion(AlgebraicNumber(Rational(999, 1000)), 1);
    CHECK(r.log_mahler == doctest::Approx(std::log(1000.0)).epsilon(1e-12));
    CHECK(r.branch_min == doctest::Approx(0.2677).epsilon(1e-3));
    CHECK(r.branch_min == doctest::Approx(std::pow(std::log(std::log(1000.0)), -2)).epsilon(1e-12));
    CHECK(r.threshold == doctest::Approx(0.7323).epsilon(1e-3));
    CHECK(r.pass);
    CHECK(r.split == BernoulliCase::large_mahler);
    CHECK(r.case_threshold == doctest::Approx(r.threshold));
  }
  SUBCASE("1/2 is rejected")
  {
    CHECK_THROWS_AS(bernoulli_criterion(AlgebraicNumber(Rational(1, 2)), 1), InvalidInput);
    CHECK_THROWS_AS(bernoulli_criterion(AlgebraicNumber(Rational(1, 3)), 1), InvalidInput);
  }
  SUBCASE("golden ratio inverse fails for C >= 2")
  {
    AlgebraicNumber g(golden_inverse);
    for (double C : { 2.0, 5.0 }) {
      auto r = bernoulli_criterion(g, C);
      CHECK(r.log_mahler == doctest::Approx(std::log((1 + std::sqrt(5.0)) / 2)));
      CHECK(r.branch_min == doctest::Approx(r.log_mahler));
      CHECK_FALSE(r.pass);
      CHECK(r.split == BernoulliCase::small_mahler);
    }
    CHECK(bernoulli_criterion(g, 2).threshold == doctest::Approx(1 - 0.4812 / 2).epsilon(1e-4));
  }
  SUBCASE("eta prime")
  {
    auto r = bernoulli_criterion(AlgebraicNumber(Rational(3, 4)), 1);
    CHECK(r.eta_prime >= 2);
    CHECK(r.eta_prime <= 2.5);
    CHECK(r.eta_prime == doctest::Approx(std::pow(std::log(r.eta_prime), -2)).epsilon(1e-12));
    // log M = log 4 lies in the band (log 2, 2 eta').
    CHECK(r.split == BernoulliCase::ambiguous);
  }
  SUBCASE("complex lambda")
  {
    // Roots of 3x^2 - 3x + 2: |lambda| = sqrt(2/3), Im = sqrt(15)/6, M = 3.
    auto lambda = AlgebraicNumber::nearest_root(IntPolynomial{ 2, -3, 3 }, { 0.5, 0.6 });
    auto r = bernoulli_criterion(lambda, 1, 0.1);
    CHECK(r.complex);
    CHECK(r.modulus == doctest::Approx(std::sqrt(2.0 / 3)));
    CHECK(r.log_mahler == doctest::Approx(std::log(3.0)));
    CHECK_THROWS_AS(bernoulli_criterion(lambda, 1, 0.7), InvalidInput);
  }
}

TEST_CASE("one-dimensional inhomogeneous criterion")
{
  SUBCASE("(999/1000, 500/501) with c = 0.1")
  {
    auto r = dim1_inhom_criterion(AlgebraicNumber(Rational(999, 1000)),
                                  AlgebraicNumber(Rational(500, 501)), 0.1, 0.5);
    CHECK(r.height == doctest::Approx(std::log(1000.0)));
    CHECK(r.field_degree == 1);
    double chi = 0.5 * (std::log1p(-1e-3) + std::log1p(-1.0 / 501));
    CHECK(r.chi == doctest::Approx(chi).epsilon(1e-12));
    double lhs = std::abs(chi) * std::pow(std::log(std::log(1000.0)), 2);
    CHECK(r.lhs == doctest::Approx(lhs).epsilon(1e-12));
    CHECK(r.margin == doctest::Approx(0.1 - lhs));
    CHECK(r.height_ok);
    CHECK(r.chi_ok);
    REQUIRE(r.rational_form.size() == 2);
    CHECK(r.rational_form[0].p == 1);
    CHECK(r.rational_form[0].q == 1000);
    CHECK(r.rational_form[0].bound ==
          doctest::Approx(0.1 * 1000 / std::pow(std::log(std::log(1000.0)), 2)));
    CHECK(r.rational_form[0].holds);
    CHECK(r.rational_form[1].p == 1);
    CHECK(r.rational_form[1].q == 501);
  }
  SUBCASE("equal parameters are valid")
  {
    AlgebraicNumber l(golden_inverse);
    auto r = dim1_inhom_criterion(l, l, 1);
    CHECK(r.field_degree == 2);
    CHECK(r.height == doctest::Approx(std::log((1 + std::sqrt(5.0)) / 2) / 2));
    CHECK(r.rational_form.empty());
  }
  SUBCASE("rational form fails for large p")
  {
    auto r = dim1_inhom_criterion(AlgebraicNumber(Rational(1, 2)), AlgebraicNumber(Rational(1, 3)),
                                  0.01);
    CHECK_FALSE(r.rational_form[0].holds);
    CHECK_FALSE(r.chi_ok);
  }
  SUBCASE("two quadratic fields give degree 4")
  {
    auto r = dim1_inhom_criterion(AlgebraicNumber(QuadraticNumber(Rational(1, 2), Rational(1, 4), 2)),
                                  AlgebraicNumber(QuadraticNumber(Rational(1, 2), Rational(1, 4), 3)),
                                  1);
    CHECK(r.field_degree == 4);
    CHECK(r.field_degree_exact);
  }
  CHECK_THROWS_AS(dim1_inhom_criterion(AlgebraicNumber(Rational(3, 2)), AlgebraicNumber(Rational(1, 2)), 1),
                  InvalidInput);
}

TEST_CASE("family generation")
{
  SUBCASE("inhom1d n = 5")
  {
    SimMeasure mu = first_inhom(5);
    REQUIRE(mu.size() == 2);
    CHECK(mu[0].p == Rational(1, 2));
    CHECK(mu[0].g == map1d(q(5, 6), q(0)));
    CHECK(mu[1].g == map1d(q(5, 7), q(1)));
  }
  SUBCASE("prime_q")
  {
    FamilySpec s;
    s.tag = FamilyTag::prime_q;
    s.q = 101;
    s.a = { 1, 3 };
    s.b = { { q(0) }, { q(1) } };
    SimMeasure mu = generate_family(s);
    CHECK(mu[0].g.rho() == q(101, 102));
    CHECK(mu[1].g.rho() == q(101, 104));
    CHECK(validate_family(s, mu).empty());
    auto cert = certify_free(mu[0].g, mu[1].g);
    CHECK(cert.certified);
    CHECK(cert.prime == 101);
  }
  SUBCASE("prime_q in d = 2 with rotations")
  {
    FamilySpec s;
    s.tag = FamilyTag::prime_q;
    s.q = 1009;
    s.a = { 2, 5, 7 };
    s.U = { pythagorean(3, 4, 5, false), pythagorean(5, 12, 13, true), ExactMatrix::identity(2) };
    s.b = { { q(0), q(0) }, { q(1), q(0) }, { q(0), q(1) } };
    SimMeasure mu = generate_family(s);
    CHECK(mu.dim() == 2);
    CHECK(validate_family(s, mu).empty());
  }
  SUBCASE("quadratic_sqrtq q = 11")
  {
    FamilySpec s;
    s.tag = FamilyTag::quadratic_sqrtq;
    s.q = 11;
    s.a = { 1, 1 };
    s.b = { { q(0) }, { q(1) } };
    SimMeasure mu = generate_family(s);
    QuadraticNumber rho(Rational(3, 12), Rational(2, 12), 11);
    CHECK(mu[0].g.rho() == rho);
    CHECK(rho.conjugate().to_double() == doctest::Approx(-0.3028).epsilon(1e-3));
    CHECK(validate_family(s, mu).empty());
    auto cert = certify_free(mu[0].g, mu[1].g);
    CHECK(cert.certified);
  }
  SUBCASE("range violations name the clause")
  {
    FamilySpec s;
    s.tag = FamilyTag::prime_q;
    s.q = 101;
    s.a = { 1, 90 };
    s.b = { { q(0) }, { q(1) } };
    CHECK_THROWS_WITH_AS(generate_family(s), doctest::Contains("q^(1-epsilon)"), InvalidInput);
    s.a = { 1, 3 };
    s.q = 100;
    CHECK_THROWS_WITH_AS(generate_family(s), doctest::Contains("q must be prime"), InvalidInput);
    s.q = 101;
    s.a = { 1, 1 };
    s.b = { { q(1) }, { q(1) } };
    CHECK_THROWS_WITH_AS(generate_family(s), doctest::Contains("common fixed point"), InvalidInput);

    FamilySpec c;
    c.tag = FamilyTag::contracting_avg_q;
    c.q = 101;
    c.b = { { q(0) }, { q(1) } };
    CHECK_THROWS_WITH_AS(generate_family(c), doctest::Contains("p_k <= 1/3"), InvalidInput);

    FamilySpec m;
    m.tag = FamilyTag::quadratic_sqrtq;
    m.q = 11;
    m.a = { 1, 3 };
    m.b = { { q(0) }, { q(1) } };
    CHECK_THROWS_WITH_AS(generate_family(m), doctest::Contains("m_(i,q)"), InvalidInput);
  }
  SUBCASE("bernoulli families")
  {
    FamilySpec s;
    s.tag = FamilyTag::bernoulli;
    s.lambda = AlgebraicNumber(golden_inverse);
    SimMeasure mu = generate_family(s);
    CHECK(mu.is_exact());
    s.lambda = parse_algebraic("{minpoly: [-1, 1, 1, 1], root: 0}");
    SimMeasure tribonacci = generate_family(s);
    CHECK_FALSE(tribonacci.is_exact());
    s.lambda = AlgebraicNumber(Rational(2, 5));
    CHECK_THROWS_AS(generate_family(s), InvalidInput);

    FamilySpec c;
    c.tag = FamilyTag::complex_bernoulli;
    c.lambda = AlgebraicNumber::nearest_root(IntPolynomial{ 2, -3, 3 }, { 0.5, 0.6 });
    SimMeasure z = generate_family(c);
    CHECK(z.dim() == 2);
    CHECK(z[0].g.rho_f() == doctest::Approx(std::sqrt(2.0 / 3)));
  }
  CHECK(parse_family_tag("quadratic_sqrtq") == FamilyTag::quadratic_sqrtq);
  CHECK_THROWS_AS(parse_family_tag("nope"), InvalidInput);
}

TEST_CASE("Mahler route never exceeds the height route")
{
  for (const QuadraticNumber& l : { q(999, 1000), q(2, 3), q(5, 8), golden_inverse,
                                    QuadraticNumber(Rational(1, 2), Rational(1, 4), 2),
                                    QuadraticNumber(Rational(0), Rational(1, 2), 3) }) {
    double mahler = bernoulli_mahler_bound(AlgebraicNumber(l)).value;
    double height = height_separation_bound(bernoulli(l)).value;
    CHECK(mahler <= height);
  }
}
