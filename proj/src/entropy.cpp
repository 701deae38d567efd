#include "selfsim/entropy.hpp"

#include "selfsim/errors.hpp"
#include "selfsim/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <unordered_map>

namespace selfsim {

namespace {

struct SimilarityHash
{
  std::size_t operator()(const Similarity& g) const { return g.hash(); }
};

//! log of a positive integer without overflow.
double log_integer(const Integer& n)
{
  long exp = 0;
  double m = mpz_get_d_2exp(&exp, n.backend().data());
  return std::log(m) + static_cast<double>(exp) * std::log(2.0);
}

double log_rational(const Rational& x)
{
  return log_integer(numerator(x)) - log_integer(denominator(x));
}

std::uint64_t checked_power(std::uint64_t k, int n, std::uint64_t cap)
{
  std::uint64_t r = 1;
  for (int i = 0; i < n; ++i) {
    if (r > cap / std::max<std::uint64_t>(k, 1))
      return cap + 1;
    r *= k;
  }
  return r;
}

WordEnumeration next_level(const WordEnumeration& prev, const SimMeasure& mu, int threads)
{
  const std::size_t k = mu.size();
  const std::size_t m = prev.elements.size();
  std::vector<Similarity> products(m * k, Similarity::identity(mu.dim()));
  parallel_for(m, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      for (std::size_t j = 0; j < k; ++j)
        products[i * k + j] = compose(prev.elements[i].g, mu[j].g);
  });

  WordEnumeration next;
  next.level = prev.level + 1;
  next.word_count = prev.word_count * k;
  std::unordered_map<Similarity, std::size_t, SimilarityHash> index;
  index.reserve(products.size());
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      Similarity& g = products[i * k + j];
      Rational p = prev.elements[i].prob * mu[j].p;
      auto [it, inserted] = index.try_emplace(g, next.elements.size());
      if (inserted)
        next.elements.push_back({ std::move(g), p, prev.elements[i].words });
      else {
        WordElement& e = next.elements[it->second];
        e.prob += p;
        e.words += prev.elements[i].words;
      }
    }
  return next;
}

void check_enumerable(const SimMeasure& mu, int n, const EnumerationOptions& opt)
{
  if (n < 1)
    throw InvalidInput("enumerate_convolution: level must be at least 1");
  if (!mu.is_exact())
    throw Unsupported("enumerate_convolution: exact comparison needs exact maps");
  if (checked_power(mu.size(), n, opt.budget) > opt.budget)
    throw BudgetExceeded("enumerate_convolution: k^n = " + std::to_string(mu.size()) + "^" +
                         std::to_string(n) + " exceeds the budget of " +
                         std::to_string(opt.budget));
}

} // namespace

double shannon_entropy(const std::vector<Rational>& probs)
{
  double h = 0;
  for (const auto& p : probs)
    if (p > 0)
      h -= p.convert_to<double>() * log_rational(p);
  return h;
}

double WordEnumeration::entropy() const
{
  std::vector<Rational> p;
  p.reserve(elements.size());
  for (const auto& e : elements)
    p.push_back(e.prob);
  return shannon_entropy(p);
}

std::vector<WordEnumeration> enumerate_levels(const SimMeasure& mu, int n,
                                              const EnumerationOptions& opt)
{
  check_enumerable(mu, n, opt);
  int threads = opt.threads > 0 ? opt.threads : default_threads();
  WordEnumeration root;
  root.word_count = 1;
  root.elements.push_back({ Similarity::identity(mu.dim()), Rational(1), 1 });
  std::vector<WordEnumeration> levels;
  levels.push_back(next_level(root, mu, threads));
  for (int i = 1; i < n; ++i)
    levels.push_back(next_level(levels.back(), mu, threads));
  return levels;
}

WordEnumeration enumerate_convolution(const SimMeasure& mu, int n, const EnumerationOptions& opt)
{
  check_enumerable(mu, n, opt);
  int threads = opt.threads > 0 ? opt.threads : default_threads();
  WordEnumeration cur;
  cur.word_count = 1;
  cur.elements.push_back({ Similarity::identity(mu.dim()), Rational(1), 1 });
  for (int i = 0; i < n; ++i)
    cur = next_level(cur, mu, threads);
  return cur;
}

double shannon_entropy_rate(const SimMeasure& mu, int n, const EnumerationOptions& opt)
{
  return enumerate_convolution(mu, n, opt).entropy() / n;
}

std::string to_string(FreeRoute r)
{
  switch (r) {
    case FreeRoute::p_adic:
      return "p-adic";
    case FreeRoute::galois:
      return "galois";
    case FreeRoute::interval:
      return "interval";
  }
  return "?";
}

std::string to_string(EntropyMethod m)
{
  switch (m) {
    case EntropyMethod::exact_free:
      return "exact_free";
    case EntropyMethod::pair_free:
      return "pair_free";
    case EntropyMethod::enumeration:
      return "enumeration";
  }
  return "?";
}

namespace {

FreenessCertificate reject(FreenessCertificate c, std::string reason, bool unsupported = false)
{
  c.certified = false;
  c.unsupported = unsupported;
  c.reason = std::move(reason);
  return c;
}

std::string valuation_text(const std::optional<long>& v)
{
  return v ? std::to_string(*v) : "inf";
}

//! Common radicand of two exact maps, or nullopt when the pair is numeric or
//! spans two quadratic fields.
std::optional<long long> pair_field(const Similarity& g1, const Similarity& g2)
{
  if (!g1.is_exact() || !g2.is_exact())
    return std::nullopt;
  try {
    return common_radicand(g1.radicand(), g2.radicand());
  } catch (const Unsupported&) {
    return std::nullopt;
  }
}

FreenessCertificate padic_at_branch(const Similarity& g1, const Similarity& g2, long p,
                                    long long D, int branch)
{
  FreenessCertificate c;
  c.route = FreeRoute::p_adic;
  c.prime = p;
  c.branch = branch;
  c.radicand = D;
  const Similarity* gs[2] = { &g1, &g2 };
  for (int i = 0; i < 2; ++i) {
    ExactMatrix A = gs[i]->rho() * gs[i]->U();
    for (int r = 0; r < A.rows; ++r)
      for (int s = 0; s < A.cols; ++s) {
        auto v = quadratic_valuation(A(r, s), p, D, branch);
        std::ostringstream os;
        os << "v(rho" << i + 1 << "*U" << i + 1 << "[" << r << "," << s << "]) = "
           << valuation_text(v) << " > 0";
        if (v && *v <= 0)
          return reject(c, "failed: " + os.str());
        c.checks.push_back(os.str());
      }
    const ExactVector& b = gs[i]->b();
    for (std::size_t r = 0; r < b.size(); ++r) {
      auto v = quadratic_valuation(b[r], p, D, branch);
      std::ostringstream os;
      os << "v(b" << i + 1 << "[" << r << "]) = " << valuation_text(v) << " >= 0";
      if (v && *v < 0)
        return reject(c, "failed: " + os.str());
      c.checks.push_back(os.str());
    }
  }
  ExactVector diff = g1.b() - g2.b();
  for (std::size_t r = 0; r < diff.size(); ++r) {
    auto v = quadratic_valuation(diff[r], p, D, branch);
    if (v && *v <= 0) {
      std::ostringstream os;
      os << "v(b1[" << r << "] - b2[" << r << "]) = " << *v << " <= 0";
      c.checks.push_back(os.str());
      c.certified = true;
      return c;
    }
  }
  return reject(c, "failed: b1 - b2 lies in the ideal, the translated ideals coincide");
}

void add_prime_factors(Integer n, std::set<long>& out)
{
  if (n < 0)
    n = -n;
  if (n < 2)
    return;
  for (long f = 2; f <= 100000 && Integer(f) * f <= n; ++f) {
    if (n % f == 0) {
      out.insert(f);
      while (n % f == 0)
        n /= f;
    }
  }
  if (n > 1 && n <= std::numeric_limits<long>::max() && is_prime(n.convert_to<long long>()))
    out.insert(n.convert_to<long>());
}

} // namespace

FreenessCertificate padic_pingpong_certify(const Similarity& g1, const Similarity& g2, long p)
{
  FreenessCertificate c;
  c.route = FreeRoute::p_adic;
  c.prime = p;
  if (p < 2 || !is_prime(p))
    throw InvalidInput("padic_pingpong_certify: p must be prime");
  if (g1.dim() != g2.dim())
    throw InvalidInput("padic_pingpong_certify: dimension mismatch");
  auto D = pair_field(g1, g2);
  if (!D)
    return reject(c, "unsupported field: maps must be exact over Q or one Q(sqrt D)", true);
  c.radicand = *D;
  try {
    int branches = (*D != 0 && splitting_type(p, *D) == 1) ? 2 : 1;
    FreenessCertificate last;
    for (int br = 0; br < branches; ++br) {
      last = padic_at_branch(g1, g2, p, *D, br);
      if (last.certified)
        return last;
    }
    return last;
  } catch (const Unsupported& e) {
    return reject(c, std::string("unsupported field: ") + e.what(), true);
  }
}

FreenessCertificate galois_pingpong_certify(const Similarity& g1, const Similarity& g2)
{
  FreenessCertificate c;
  c.route = FreeRoute::galois;
  if (g1.dim() != g2.dim())
    throw InvalidInput("galois_pingpong_certify: dimension mismatch");
  auto D = pair_field(g1, g2);
  if (!D)
    return reject(c, "unsupported field: maps must be exact over Q or one Q(sqrt D)", true);
  c.radicand = *D;
  const QuadraticNumber third(Rational(1, 3));
  std::string reason = "no embedding gives |rho| < 1/3 for both maps";
  for (int emb = 0; emb < (*D != 0 ? 2 : 1); ++emb) {
    QuadraticNumber r1 = emb ? g1.rho().conjugate() : g1.rho();
    QuadraticNumber r2 = emb ? g2.rho().conjugate() : g2.rho();
    if (!(r1.abs() < third && r2.abs() < third))
      continue;
    // |Phi(rho)| < 1 makes rho U - I invertible, so both fixed points exist
    if (fixed_point(g1) == fixed_point(g2))
      return reject(c, "the maps have a common fixed point");
    c.embedding = emb;
    std::string phi = emb ? "Phi(sqrt " + std::to_string(*D) + ") = -sqrt " + std::to_string(*D)
                          : "Phi = identity";
    c.checks.push_back(phi);
    c.checks.push_back("|Phi(rho1)| = " + r1.abs().to_string() + " < 1/3");
    c.checks.push_back("|Phi(rho2)| = " + r2.abs().to_string() + " < 1/3");
    c.checks.push_back("fixed points differ");
    c.certified = true;
    return c;
  }
  return reject(c, reason);
}

FreenessCertificate interval_pingpong_certify(const Similarity& g1, const Similarity& g2)
{
  FreenessCertificate c;
  c.route = FreeRoute::interval;
  if (g1.dim() != 1 || g2.dim() != 1)
    return reject(c, "interval route needs d = 1");
  auto D = pair_field(g1, g2);
  if (!D)
    return reject(c, "unsupported field: maps must be exact over Q or one Q(sqrt D)", true);
  c.radicand = *D;
  const QuadraticNumber one(1);
  if (!(g1.rho() < one && g2.rho() < one))
    return reject(c, "both maps must contract");
  auto slope = [](const Similarity& g) { return g.rho() * g.U()(0, 0); };
  auto apply = [&](const Similarity& g, const QuadraticNumber& x) { return slope(g) * x + g.b()[0]; };

  std::vector<QuadraticNumber> fps;
  for (const Similarity& g : { g1, g2, compose(g1, g2), compose(g2, g1) })
    fps.push_back(fixed_point(g)[0]);
  QuadraticNumber lo = *std::min_element(fps.begin(), fps.end());
  QuadraticNumber hi = *std::max_element(fps.begin(), fps.end());
  if (!(lo < hi))
    return reject(c, "the maps have a common fixed point");

  std::pair<QuadraticNumber, QuadraticNumber> img[2];
  for (int i = 0; i < 2; ++i) {
    const Similarity& g = i ? g2 : g1;
    QuadraticNumber a = apply(g, lo), b = apply(g, hi);
    img[i] = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
    if (img[i].first < lo || img[i].second > hi)
      return reject(c, "hull of the short-word fixed points is not invariant");
  }
  if (!(img[0].second <= img[1].first || img[1].second <= img[0].first))
    return reject(c, "images of V overlap");
  c.checks.push_back("V = [" + lo.to_string() + ", " + hi.to_string() + "]");
  for (int i = 0; i < 2; ++i)
    c.checks.push_back("g" + std::to_string(i + 1) + "(V) = [" + img[i].first.to_string() + ", " +
                       img[i].second.to_string() + "] inside V");
  c.checks.push_back("interiors of g1(V) and g2(V) are disjoint");
  c.certified = true;
  return c;
}

std::vector<long> candidate_primes(const Similarity& g1, const Similarity& g2)
{
  std::set<long> primes;
  if (!g1.is_exact() || !g2.is_exact())
    return {};
  for (const Similarity* g : { &g1, &g2 }) {
    ExactMatrix A = g->rho() * g->U();
    for (const auto& x : A.a) {
      if (x.is_zero())
        continue;
      add_prime_factors(numerator(x.a()), primes);
      add_prime_factors(numerator(x.b()), primes);
      add_prime_factors(numerator(x.norm()), primes);
    }
  }
  return { primes.begin(), primes.end() };
}

FreenessCertificate certify_free(const Similarity& g1, const Similarity& g2)
{
  std::vector<std::string> reasons;
  FreenessCertificate last;
  auto note = [&](const std::string& what, FreenessCertificate c, bool inverse) {
    c.inverse = inverse;
    if (!c.certified)
      reasons.push_back(what + (inverse ? " (inverses)" : "") + ": " + c.reason);
    last = std::move(c);
    return last.certified;
  };
  if (!g1.is_exact() || !g2.is_exact())
    return padic_pingpong_certify(g1, g2, 2);
  Similarity h1 = g1.inverse(), h2 = g2.inverse();
  for (bool inv : { false, true }) {
    const Similarity& a = inv ? h1 : g1;
    const Similarity& b = inv ? h2 : g2;
    for (long p : candidate_primes(a, b))
      if (note("p=" + std::to_string(p), padic_pingpong_certify(a, b, p), inv))
        return last;
  }
  for (bool inv : { false, true })
    if (note("galois", galois_pingpong_certify(inv ? h1 : g1, inv ? h2 : g2), inv))
      return last;
  if (note("interval", interval_pingpong_certify(g1, g2), false))
    return last;
  std::string joined;
  for (const auto& r : reasons)
    joined += (joined.empty() ? "" : "; ") + r;
  last.reason = joined;
  return last;
}

EntropyBound entropy_bound(const SimMeasure& mu, int level, const EnumerationOptions& opt)
{
  EntropyBound out;
  std::vector<Rational> probs;
  for (const auto& a : mu.atoms())
    probs.push_back(a.p);
  double h1 = shannon_entropy(probs);
  if (level < 1)
    throw InvalidInput("entropy_bound: level must be at least 1");

  if (!mu.is_exact()) {
    out.method = EntropyMethod::enumeration;
    out.upper = h1;
    out.level = 0;
    return out;
  }

  const std::size_t k = mu.size();
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) {
      FreenessCertificate c = certify_free(mu[i].g, mu[j].g);
      if (c.certified)
        out.certified_pairs.push_back({ i, j, std::move(c) });
    }

  int n = level;
  while (n > 1 && checked_power(k, n, opt.budget) > opt.budget)
    --n;
  WordEnumeration e = enumerate_convolution(mu, n, opt);
  out.level = n;
  out.collisions = e.collisions();
  out.upper = e.entropy() / n;

  const std::size_t pairs = k * (k - 1) / 2;
  if (out.certified_pairs.size() == pairs && out.collisions == 0) {
    out.method = EntropyMethod::exact_free;
    out.lower = h1;
    out.upper = h1;
    return out;
  }
  if (!out.certified_pairs.empty()) {
    out.method = EntropyMethod::pair_free;
    out.lower_positive_qualitative = true;
    double best = -1;
    for (const auto& pc : out.certified_pairs) {
      double m = std::min(mu[pc.i].p, mu[pc.j].p).convert_to<double>();
      if (m > best) {
        best = m;
        out.pair = std::make_pair(pc.i, pc.j);
      }
    }
    out.pair_min_prob = best;
    return out;
  }
  out.method = EntropyMethod::enumeration;
  return out;
}

int height_entropy_level(double max_log_height)
{
  if (!(max_log_height > 0))
    throw InvalidInput("height_entropy_level: need a positive log-height");
  return static_cast<int>(std::ceil(std::log(3.0) / max_log_height)) + 2;
}

namespace {

QuadraticNumber power(const QuadraticNumber& x, int n)
{
  QuadraticNumber r(1);
  for (int i = 0; i < n; ++i)
    r *= x;
  return r;
}

bool in_unit_interval(const AlgebraicNumber& x)
{
  if (!x.is_real())
    return false;
  Interval v = evaluate(x, 1e-12);
  if (v.lo() > 0 && v.hi() < 1)
    return true;
  if (v.hi() <= 0 || v.lo() >= 1)
    return false;
  // an endpoint of the enclosure touches 0 or 1: only the rationals 0 and 1
  // can sit there, and those are excluded exactly
  auto q = x.to_quadratic();
  return q && *q > QuadraticNumber(0) && *q < QuadraticNumber(1);
}

} // namespace

HeightEntropySetup height_to_entropy_setup(const AlgebraicNumber& lambda1,
                                           const AlgebraicNumber& lambda2)
{
  if (!in_unit_interval(lambda1) || !in_unit_interval(lambda2))
    throw InvalidInput("height_to_entropy_setup: lambda_i must be real and in (0, 1)");
  HeightEntropySetup s;
  double h1 = log_height(lambda1), h2 = log_height(lambda2);
  s.max_log_height = std::max(h1, h2);
  s.n = height_entropy_level(s.max_log_height);
  const int n = s.n;
  const double log3 = std::log(3.0);

  auto q1 = lambda1.to_quadratic(), q2 = lambda2.to_quadratic();
  bool quadratic = false;
  if (q1 && q2) {
    try {
      common_radicand(q1->radicand(), q2->radicand());
      quadratic = true;
    } catch (const Unsupported&) {
    }
  }

  int best_i = -1;
  double best_h = -1;
  std::optional<QuadraticNumber> best_lambda;
  if (quadratic) {
    for (int i = 1; i < n; ++i) {
      QuadraticNumber l = power(*q1, i) * power(*q2, n - i);
      double h = log_height(AlgebraicNumber(l));
      if (h > best_h) {
        best_h = h;
        best_i = i;
        best_lambda = l;
      }
    }
  } else if (lambda1 == lambda2) {
    best_i = 1;
    best_h = n * h1;
  } else {
    throw Unsupported("height_to_entropy_setup: products of distinct algebraic numbers outside "
                      "Q and Q(sqrt D) are not implemented");
  }

  s.f_count = best_i;
  s.word_f = std::string(best_i, 'f') + std::string(n - best_i, 'g');
  s.word_g = "g" + std::string(best_i, 'f') + std::string(n - best_i - 1, 'g');
  s.lambda = best_lambda;
  s.lambda_log_height = best_h;
  s.found = best_h > log3;
  if (!s.found)
    return s;

  if (best_lambda) {
    const QuadraticNumber& l = *best_lambda;
    Similarity a = Similarity::affine1d(l, QuadraticNumber(0));
    Similarity b = Similarity::affine1d(l, QuadraticNumber(1) - l);
    Similarity ai = a.inverse(), bi = b.inverse();
    for (bool inv : { false, true })
      for (long p : candidate_primes(inv ? ai : a, inv ? bi : b)) {
        FreenessCertificate c = padic_pingpong_certify(inv ? ai : a, inv ? bi : b, p);
        if (c.certified) {
          c.inverse = inv;
          s.route = FreeRoute::p_adic;
          s.certificate = c;
          return s;
        }
      }
    s.route = FreeRoute::galois;
    s.certificate = galois_pingpong_certify(a, b);
    return s;
  }

  // higher degree with lambda1 == lambda2: decide the place type from the
  // conjugates of lambda^n; no certificate is built
  bool archimedean = false;
  for (const auto& r : isolate_roots(lambda1.min_poly()))
    if (std::pow(r.modulus.hi(), n) < 1.0 / 3)
      archimedean = true;
  s.route = archimedean ? FreeRoute::galois : FreeRoute::p_adic;
  return s;
}

} // namespace selfsim
