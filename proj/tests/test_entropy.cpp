#include "selfsim/entropy.hpp"
#include "selfsim/errors.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

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
  return SimMeasure({ { Rational(1, 2), map1d(q(n, n + 1), q(0)) },
                      { Rational(1, 2), map1d(q(n, n + 2), q(1)) } });
}

const QuadraticNumber golden_inverse{ Rational(-1, 2), Rational(1, 2), 5 };

//! Brute-force H(mu^{*n}) from all k^n words, grouping exact compositions by
//! their string form.
double brute_force_entropy(const SimMeasure& mu, int n)
{
  std::map<std::string, Rational> mass;
  std::size_t k = mu.size(), total = 1;
  for (int i = 0; i < n; ++i)
    total *= k;
  for (std::size_t w = 0; w < total; ++w) {
    Similarity g = Similarity::identity(mu.dim());
    Rational p = 1;
    std::size_t code = w;
    for (int i = 0; i < n; ++i) {
      g = g * mu[code % k].g;
      p *= mu[code % k].p;
      code /= k;
    }
    mass[g.to_string()] += p;
  }
  double h = 0;
  for (const auto& [key, p] : mass)
    h -= p.convert_to<double>() * std::log(p.convert_to<double>());
  return h;
}

std::vector<Rational> sorted_probs(const WordEnumeration& e)
{
  std::vector<Rational> p;
  for (const auto& x : e.elements)
    p.push_back(x.prob);
  std::sort(p.begin(), p.end());
  return p;
}

} // namespace

TEST_CASE("convolution enumeration")
{
  WordEnumeration e = enumerate_convolution(bernoulli(q(1, 2)), 3);
  CHECK(e.elements.size() == 8);
  CHECK(e.collisions() == 0);
  Rational total = 0;
  for (const auto& x : e.elements)
    total += x.prob;
  CHECK(total == 1);

  SimMeasure dup({ { Rational(1, 3), map1d(q(1, 2), q(0)) },
                   { Rational(2, 3), map1d(q(1, 2), q(0)) } });
  for (int n = 1; n <= 4; ++n)
    CHECK(enumerate_convolution(dup, n).elements.size() == 1);

  WordEnumeration g = enumerate_convolution(bernoulli(golden_inverse), 3);
  CHECK(g.elements.size() == 7);
  CHECK(g.collisions() == 1);
  std::vector<Rational> p = sorted_probs(g);
  CHECK(p.back() == Rational(1, 4));
  CHECK(g.entropy() / 3 == doctest::Approx(2.75 * std::log(2.0) / 3).epsilon(1e-13));
  CHECK(g.entropy() == doctest::Approx(brute_force_entropy(bernoulli(golden_inverse), 3)));

  std::vector<WordEnumeration> levels = enumerate_levels(bernoulli(q(1, 3)), 4);
  REQUIRE(levels.size() == 4);
  for (int i = 0; i < 4; ++i)
    CHECK(levels[i].elements.size() == (1u << (i + 1)));

  CHECK_THROWS_AS(enumerate_convolution(bernoulli(q(1, 2)), 30), BudgetExceeded);
  EnumerationOptions small;
  small.budget = 100;
  CHECK_THROWS_AS(enumerate_convolution(bernoulli(q(1, 2)), 7, small), BudgetExceeded);
  SimMeasure numeric({ { Rational(1), Similarity::numeric(0.5, Mat::Identity(1, 1), Vec::Ones(1)) } });
  CHECK_THROWS_AS(enumerate_convolution(numeric, 2), Unsupported);
}

TEST_CASE("enumeration is independent of the thread count")
{
  CounterRng rng(5, 0);
  SimMeasure mu = random_measure(rng, 2, 3);
  EnumerationOptions one, many;
  one.threads = 1;
  many.threads = 4;
  WordEnumeration a = enumerate_convolution(mu, 5, one), b = enumerate_convolution(mu, 5, many);
  REQUIRE(a.elements.size() == b.elements.size());
  for (std::size_t i = 0; i < a.elements.size(); ++i) {
    CHECK(a.elements[i].g == b.elements[i].g);
    CHECK(a.elements[i].prob == b.elements[i].prob);
  }
}

TEST_CASE("Shannon entropy rate")
{
  for (int n = 1; n <= 8; ++n)
    CHECK(shannon_entropy_rate(bernoulli(q(1, 2)), n) == doctest::Approx(std::log(2.0)));
  SimMeasure single({ { Rational(1), map1d(q(1, 2), q(1)) } });
  CHECK(shannon_entropy_rate(single, 4) == 0.0);

  // the golden-ratio rate is nonincreasing along doubling n
  double prev = INFINITY;
  for (int n : { 1, 2, 4, 8, 16 }) {
    double r = shannon_entropy_rate(bernoulli(golden_inverse), n);
    CHECK(r <= prev + 1e-12);
    prev = r;
  }
  CHECK(prev < std::log(2.0));
}

TEST_CASE("subadditivity of H(mu^{*n})")
{
  CounterRng rng(6, 0);
  std::vector<SimMeasure> cases{ bernoulli(golden_inverse), bernoulli(q(1, 2)),
                                 SimMeasure({ { Rational(1, 3), map1d(q(1, 3), q(0)) },
                                              { Rational(1, 3), map1d(q(1, 3), q(1)) },
                                              { Rational(1, 3), map1d(q(1, 3), q(3, 2)) } }) };
  for (int t = 0; t < 5; ++t)
    cases.push_back(random_measure(rng, 1 + t % 2, 2 + t % 2));
  for (const auto& mu : cases) {
    std::vector<WordEnumeration> lv = enumerate_levels(mu, 6);
    for (int m = 1; m <= 3; ++m)
      for (int n = 1; n <= 3; ++n)
        CHECK(lv[m + n - 1].entropy() <= lv[m - 1].entropy() + lv[n - 1].entropy() + 1e-12);
  }
}

TEST_CASE("p-adic ping-pong")
{
  FreenessCertificate c = padic_pingpong_certify(map1d(q(5, 6), q(0)), map1d(q(5, 6), q(1)), 5);
  CHECK(c.certified);
  CHECK(c.route == FreeRoute::p_adic);
  CHECK(c.prime == 5);
  CHECK_FALSE(c.checks.empty());

  c = padic_pingpong_certify(map1d(q(5, 6), q(1)), map1d(q(5, 12), q(1)), 5);
  CHECK_FALSE(c.certified);
  CHECK_FALSE(c.unsupported);

  SimMeasure mu = first_inhom(1000);
  c = padic_pingpong_certify(mu[0].g, mu[1].g, 2);
  CHECK(c.certified);
  CHECK(padic_pingpong_certify(mu[0].g, mu[1].g, 3).certified == false);
  std::vector<long> primes = candidate_primes(mu[0].g, mu[1].g);
  CHECK(std::find(primes.begin(), primes.end(), 2) != primes.end());

  // rho = 3 sqrt 3 / 5 has positive valuation at the ramified prime above 3
  QuadraticNumber r(Rational(0), Rational(3, 5), 3);
  c = padic_pingpong_certify(map1d(r, q(0)), map1d(r, q(1)), 3);
  CHECK(c.certified);
  // split prime above 2 is not handled
  QuadraticNumber s(Rational(0), Rational(1, 3), 17);
  c = padic_pingpong_certify(map1d(s * q(2), q(0)), map1d(s * q(2), q(1)), 2);
  CHECK(c.unsupported);
  CHECK_FALSE(c.certified);

  SimMeasure numeric({ { Rational(1), Similarity::numeric(0.5, Mat::Identity(1, 1), Vec::Ones(1)) } });
  c = padic_pingpong_certify(numeric[0].g, numeric[0].g, 2);
  CHECK(c.unsupported);
}

TEST_CASE("Galois ping-pong")
{
  FreenessCertificate c = galois_pingpong_certify(map1d(q(1, 4), q(0)), map1d(q(1, 4), q(1)));
  CHECK(c.certified);
  CHECK(c.embedding == 0);

  c = galois_pingpong_certify(map1d(q(1, 4), q(0)), map1d(q(1, 5), q(0)));
  CHECK_FALSE(c.certified);
  CHECK(c.reason.find("common fixed point") != std::string::npos);

  // rho_i = (a_i + b_i sqrt 2) / c_i near 1/2 with conjugates below 1/3
  QuadraticNumber r1(Rational(1, 4), Rational(1, 4), 2), r2(Rational(1, 3), Rational(1, 6), 2);
  c = galois_pingpong_certify(map1d(r1, q(0)), map1d(r2, q(1)));
  CHECK(c.certified);
  CHECK(c.embedding == 1);
  SimMeasure pair({ { Rational(1, 2), map1d(r1, q(0)) }, { Rational(1, 2), map1d(r2, q(1)) } });
  for (int n = 1; n <= 8; ++n)
    CHECK(enumerate_convolution(pair, n).elements.size() == (1u << n));

  c = galois_pingpong_certify(map1d(q(1, 2), q(0)), map1d(q(1, 2), q(1)));
  CHECK_FALSE(c.certified);
}

TEST_CASE("every certificate survives exact enumeration")
{
  CounterRng rng(7, 0);
  int certified = 0;
  for (int t = 0; t < 200; ++t) {
    int d = 1 + t % 2;
    Similarity g1 = random_similarity(rng, d), g2 = random_similarity(rng, d);
    FreenessCertificate c = certify_free(g1, g2);
    if (!c.certified)
      continue;
    ++certified;
    SimMeasure pair({ { Rational(1, 2), g1 }, { Rational(1, 2), g2 } });
    std::vector<WordEnumeration> lv = enumerate_levels(pair, 8);
    for (int n = 1; n <= 8; ++n)
      CHECK(lv[n - 1].elements.size() == (1u << n));
  }
  CHECK(certified > 20);
}

TEST_CASE("entropy bound")
{
  EntropyBound b = entropy_bound(first_inhom(1000), 10);
  CHECK(b.method == EntropyMethod::exact_free);
  REQUIRE(b.lower);
  CHECK(*b.lower == std::log(2.0));
  CHECK(b.upper == std::log(2.0));
  CHECK(b.level == 10);
  CHECK(b.collisions == 0);

  b = entropy_bound(bernoulli(golden_inverse), 3);
  CHECK(b.method == EntropyMethod::enumeration);
  CHECK_FALSE(b.lower);
  // 6 words of mass 1/8 and one merged pair of mass 1/4
  CHECK(b.upper == doctest::Approx((0.75 * std::log(8.0) + 0.25 * std::log(4.0)) / 3).epsilon(1e-12));
  CHECK(entropy_bound(bernoulli(golden_inverse), 6).upper < b.upper);

  SimMeasure single({ { Rational(1), map1d(q(1, 2), q(1)) } });
  b = entropy_bound(single, 5);
  REQUIRE(b.lower);
  CHECK(*b.lower == 0.0);
  CHECK(b.upper == 0.0);

  // two free maps plus a third atom colliding with a word of the first two
  SimMeasure mixed({ { Rational(1, 4), map1d(q(1, 4), q(0)) },
                     { Rational(1, 4), map1d(q(1, 4), q(1)) },
                     { Rational(1, 2), map1d(q(1, 16), q(1)) } });
  b = entropy_bound(mixed, 4);
  CHECK(b.method == EntropyMethod::pair_free);
  CHECK(b.lower_positive_qualitative);
  CHECK_FALSE(b.lower);
  REQUIRE(b.pair);
  CHECK(b.pair_min_prob == 0.25);
  CHECK(b.upper < shannon_entropy({ Rational(1, 4), Rational(1, 4), Rational(1, 2) }));

  EnumerationOptions tight;
  tight.budget = 64;
  b = entropy_bound(first_inhom(1000), 10, tight);
  CHECK(b.level == 6);

  SimMeasure numeric({ { Rational(1, 2), Similarity::numeric(0.5, Mat::Identity(1, 1), Vec::Ones(1)) },
                       { Rational(1, 2), Similarity::numeric(0.5, Mat::Identity(1, 1), -Vec::Ones(1)) } });
  b = entropy_bound(numeric, 4);
  CHECK(b.method == EntropyMethod::enumeration);
  CHECK(b.upper == doctest::Approx(std::log(2.0)));
}

TEST_CASE("height to entropy setup")
{
  CHECK(height_entropy_level(0.8) == 4);
  CHECK(height_entropy_level(std::log(3.0)) == 3);
  CHECK(height_entropy_level(5.0) == 3);

  HeightEntropySetup s = height_to_entropy_setup(AlgebraicNumber(Rational(1, 2)),
                                                 AlgebraicNumber(Rational(1, 2)));
  CHECK(s.n == 4);
  CHECK(s.found);
  CHECK(s.route == FreeRoute::p_adic);
  REQUIRE(s.certificate);
  CHECK(s.certificate->certified);
  CHECK(s.certificate->prime == 2);
  CHECK(s.certificate->inverse);
  CHECK(s.word_f.size() == 4);
  CHECK(s.word_f != s.word_g);
  CHECK(std::count(s.word_g.begin(), s.word_g.end(), 'f') == s.f_count);

  // the words compose to maps with the common contraction lambda
  auto word_map = [](const std::string& w, const Similarity& f, const Similarity& g) {
    Similarity r = Similarity::identity(1);
    for (char c : w)
      r = r * (c == 'f' ? f : g);
    return r;
  };
  Similarity f = map1d(q(1, 2), q(1)), g = map1d(q(1, 2), q(0));
  REQUIRE(s.lambda);
  CHECK(word_map(s.word_f, f, g).rho() == *s.lambda);
  CHECK(word_map(s.word_g, f, g).rho() == *s.lambda);
  CHECK(word_map(s.word_f, f, g) != word_map(s.word_g, f, g));

  // sqrt 2 - 1 is a unit: only the archimedean route is open
  AlgebraicNumber u(QuadraticNumber(Rational(-1), Rational(1), 2));
  s = height_to_entropy_setup(u, u);
  // H(u) = (1 + sqrt 2)^(1/2), so n = ceil(log 3 / 0.4407) + 2
  CHECK(s.n == 5);
  CHECK(s.found);
  CHECK(s.route == FreeRoute::galois);
  REQUIRE(s.certificate);
  CHECK(s.certificate->certified);

  CHECK_THROWS_AS(height_to_entropy_setup(AlgebraicNumber(Rational(3, 2)),
                                          AlgebraicNumber(Rational(1, 2))),
                  InvalidInput);
}

TEST_CASE("conjugation preserves the convolution support structure")
{
  CounterRng rng(8, 0);
  for (int t = 0; t < 10; ++t) {
    int d = 1 + t % 2;
    SimMeasure mu = random_measure(rng, d, 2 + t % 2);
    Similarity h = random_similarity(rng, d);
    SimMeasure conj = conjugate_measure(mu, h, false);
    for (int n = 1; n <= 4; ++n) {
      WordEnumeration a = enumerate_convolution(mu, n), b = enumerate_convolution(conj, n);
      CHECK(a.elements.size() == b.elements.size());
      CHECK(sorted_probs(a) == sorted_probs(b));
    }
  }
}

TEST_CASE("interval ping-pong")
{
  auto c = interval_pingpong_certify(map1d(q(1, 2), q(1)), map1d(q(1, 2), q(-1)));
  CHECK(c.certified);
  CHECK(c.route == FreeRoute::interval);
  CHECK(c.checks.front() == "V = [-2, 2]");
  // Negative slopes: V = [-3/8, 9/8] from the fixed points of g1 g2 and g2 g1.
  auto neg = interval_pingpong_certify(map1d(q(-1, 3), q(0)), map1d(q(-1, 3), q(1)));
  CHECK(neg.certified);
  // Overlapping images: golden ratio Bernoulli has exact overlaps.
  CHECK_FALSE(interval_pingpong_certify(map1d(golden_inverse, q(1)), map1d(golden_inverse, q(-1)))
                .certified);
  CHECK(neg.checks.front() == "V = [-3/8, 9/8]");
  CHECK_FALSE(interval_pingpong_certify(map1d(q(3, 4), q(0)), map1d(q(3, 4), q(1))).certified);
  auto b = entropy_bound(bernoulli(q(1, 2)), 8);
  CHECK(b.method == EntropyMethod::exact_free);
  CHECK(b.certified_pairs.front().certificate.route == FreeRoute::interval);
  // Brute force agrees: the words of length 8 are distinct.
  CHECK(b.collisions == 0);
}
