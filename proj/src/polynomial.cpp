#include "selfsim/polynomial.hpp"
#include "selfsim/errors.hpp"

#include <Eigen/Eigenvalues>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_complex.hpp>

#include <algorithm>
#include <functional>
#include <numeric>
#include <sstream>

namespace selfsim {

namespace {

using Real = boost::multiprecision::cpp_bin_float_100;
using Complex = boost::multiprecision::cpp_complex_100;

using RatPoly = std::vector<Rational>;

void trim(RatPoly& p)
{
  while (!p.empty() && p.back() == 0)
    p.pop_back();
}

RatPoly to_rat(const IntPolynomial& p)
{
  return RatPoly(p.coefficients().begin(), p.coefficients().end());
}

IntPolynomial from_rat(const RatPoly& p)
{
  Integer l = 1;
  for (const auto& c : p)
    l = l / boost::multiprecision::gcd(l, denominator(c)) * denominator(c);
  std::vector<Integer> out;
  for (const auto& c : p)
    out.push_back(numerator(c) * (l / denominator(c)));
  return IntPolynomial(out).primitive();
}

//! Quotient and remainder of p / d over Q.
std::pair<RatPoly, RatPoly> divmod(RatPoly p, const RatPoly& d)
{
  trim(p);
  int dd = static_cast<int>(d.size()) - 1;
  if (dd < 0)
    throw InvalidInput("polynomial division by zero");
  RatPoly q(std::max<int>(0, static_cast<int>(p.size()) - dd), Rational(0));
  while (static_cast<int>(p.size()) - 1 >= dd && !p.empty()) {
    int shift = static_cast<int>(p.size()) - 1 - dd;
    Rational f = p.back() / d.back();
    q[shift] = f;
    for (int i = 0; i <= dd; ++i)
      p[shift + i] -= f * d[i];
    p.pop_back();
    trim(p);
  }
  trim(q);
  return { q, p };
}

Real to_real(const Integer& z)
{
  return Real(z.str());
}

Integer round_to_integer(const Real& x)
{
  std::string s = boost::multiprecision::round(x).str(0, std::ios_base::fixed);
  return Integer(s.substr(0, s.find('.')));
}

//! Value and derivative by Horner's scheme, plus a bound on the rounding
//! error of the value.
struct Eval
{
  Complex p, dp;
  Real err;
};

Eval horner(const std::vector<Real>& c, const Complex& z)
{
  Complex p = 0, dp = 0;
  Real mag = 0;
  Real az = abs(z);
  for (int i = static_cast<int>(c.size()) - 1; i >= 0; --i) {
    dp = dp * z + p;
    p = p * z + c[i];
    mag = mag * az + abs(c[i]);
  }
  Real eps = std::numeric_limits<Real>::epsilon();
  return { p, dp, 4 * Real(c.size()) * eps * mag };
}

long long totient(long long n)
{
  long long r = n;
  for (long long p = 2; p * p <= n; ++p) {
    if (n % p == 0) {
      while (n % p == 0)
        n /= p;
      r -= r / p;
    }
  }
  if (n > 1)
    r -= r / n;
  return r;
}

std::vector<Integer> positive_divisors(const Integer& n)
{
  Integer m = boost::multiprecision::abs(n);
  std::vector<std::pair<Integer, int>> f;
  for (long p = 2; Integer(p) * p <= m; ++p) {
    if (p > 1000000)
      throw Unsupported("leading coefficient too large to factor");
    int e = 0;
    while (m % p == 0) {
      m /= p;
      ++e;
    }
    if (e)
      f.emplace_back(p, e);
  }
  if (m > 1)
    f.emplace_back(m, 1);
  std::vector<Integer> divs{ 1 };
  for (auto& [p, e] : f) {
    std::size_t sz = divs.size();
    Integer pk = 1;
    for (int k = 1; k <= e; ++k) {
      pk *= p;
      for (std::size_t i = 0; i < sz; ++i)
        divs.push_back(divs[i] * pk);
    }
  }
  return divs;
}

} // namespace

IntPolynomial::IntPolynomial(std::vector<Integer> coeffs)
  : c_(std::move(coeffs))
{
  trim();
}

IntPolynomial::IntPolynomial(std::initializer_list<long long> coeffs)
{
  for (long long c : coeffs)
    c_.emplace_back(c);
  trim();
}

void IntPolynomial::trim()
{
  while (!c_.empty() && c_.back() == 0)
    c_.pop_back();
}

Integer IntPolynomial::content() const
{
  Integer g = 0;
  for (const auto& c : c_)
    g = boost::multiprecision::gcd(g, c);
  return g;
}

IntPolynomial IntPolynomial::primitive() const
{
  if (is_zero())
    return *this;
  Integer g = content();
  if (leading() < 0)
    g = -g;
  std::vector<Integer> out;
  for (const auto& c : c_)
    out.push_back(c / g);
  return IntPolynomial(out);
}

IntPolynomial IntPolynomial::derivative() const
{
  std::vector<Integer> out;
  for (std::size_t i = 1; i < c_.size(); ++i)
    out.push_back(c_[i] * static_cast<long>(i));
  return IntPolynomial(out);
}

Integer IntPolynomial::length() const
{
  Integer s = 0;
  for (const auto& c : c_)
    s += boost::multiprecision::abs(c);
  return s;
}

IntPolynomial IntPolynomial::reversed() const
{
  std::vector<Integer> out(c_.rbegin(), c_.rend());
  return IntPolynomial(out);
}

Rational IntPolynomial::eval(const Rational& x) const
{
  Rational r = 0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it)
    r = r * x + *it;
  return r;
}

int IntPolynomial::sign_at(const Rational& x) const
{
  Rational v = eval(x);
  return v > 0 ? 1 : (v < 0 ? -1 : 0);
}

IntPolynomial operator+(const IntPolynomial& p, const IntPolynomial& q)
{
  std::vector<Integer> out(std::max(p.c_.size(), q.c_.size()), Integer(0));
  for (std::size_t i = 0; i < p.c_.size(); ++i)
    out[i] += p.c_[i];
  for (std::size_t i = 0; i < q.c_.size(); ++i)
    out[i] += q.c_[i];
  return IntPolynomial(out);
}

IntPolynomial operator-(const IntPolynomial& p, const IntPolynomial& q)
{
  std::vector<Integer> out(std::max(p.c_.size(), q.c_.size()), Integer(0));
  for (std::size_t i = 0; i < p.c_.size(); ++i)
    out[i] += p.c_[i];
  for (std::size_t i = 0; i < q.c_.size(); ++i)
    out[i] -= q.c_[i];
  return IntPolynomial(out);
}

IntPolynomial operator*(const IntPolynomial& p, const IntPolynomial& q)
{
  if (p.is_zero() || q.is_zero())
    return {};
  std::vector<Integer> out(p.c_.size() + q.c_.size() - 1, Integer(0));
  for (std::size_t i = 0; i < p.c_.size(); ++i)
    for (std::size_t j = 0; j < q.c_.size(); ++j)
      out[i + j] += p.c_[i] * q.c_[j];
  return IntPolynomial(out);
}

std::string IntPolynomial::to_string() const
{
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < c_.size(); ++i)
    os << (i ? ", " : "") << c_[i];
  os << "]";
  return os.str();
}

bool divides(const IntPolynomial& d, const IntPolynomial& p)
{
  if (d.is_zero())
    throw InvalidInput("divides: zero divisor");
  auto [q, r] = divmod(to_rat(p), to_rat(d));
  if (!r.empty())
    return false;
  for (const auto& c : q)
    if (denominator(c) != 1)
      return false;
  return true;
}

IntPolynomial exact_quotient(const IntPolynomial& p, const IntPolynomial& d)
{
  auto [q, r] = divmod(to_rat(p), to_rat(d));
  if (!r.empty())
    throw std::logic_error("exact_quotient: not divisible");
  std::vector<Integer> out;
  for (const auto& c : q) {
    if (denominator(c) != 1)
      throw std::logic_error("exact_quotient: non-integral quotient");
    out.push_back(numerator(c));
  }
  return IntPolynomial(out);
}

IntPolynomial gcd(const IntPolynomial& p, const IntPolynomial& q)
{
  RatPoly a = to_rat(p), b = to_rat(q);
  trim(a);
  trim(b);
  while (!b.empty()) {
    RatPoly r = divmod(a, b).second;
    a = std::move(b);
    b = std::move(r);
    // keep coefficient growth in check
    if (!b.empty()) {
      Rational lead = b.back();
      for (auto& c : b)
        c /= lead;
    }
  }
  if (a.empty())
    return {};
  return from_rat(a);
}

std::vector<std::pair<IntPolynomial, int>> squarefree_decomposition(const IntPolynomial& p)
{
  std::vector<std::pair<IntPolynomial, int>> out;
  if (p.degree() < 1)
    return out;
  IntPolynomial f = p.primitive();
  IntPolynomial a = gcd(f, f.derivative());
  IntPolynomial b = exact_quotient(f, a).primitive();
  IntPolynomial c = exact_quotient(f.derivative(), a);
  IntPolynomial d = c - b.derivative();
  int i = 1;
  while (b.degree() >= 1) {
    IntPolynomial g = gcd(b, d);
    if (g.degree() >= 1)
      out.emplace_back(g, i);
    IntPolynomial nb = exact_quotient(b, g);
    c = exact_quotient(d, g);
    b = nb;
    d = c - b.derivative();
    ++i;
  }
  return out;
}

IntPolynomial cyclotomic(int n)
{
  if (n < 1)
    throw InvalidInput("cyclotomic: n >= 1 required");
  // Phi_n = prod_{d | n} (x^d - 1)^{mu(n/d)}
  auto mobius = [](int m) {
    int r = 1;
    for (int p = 2; p * p <= m; ++p) {
      if (m % p == 0) {
        m /= p;
        if (m % p == 0)
          return 0;
        r = -r;
      }
    }
    return m > 1 ? -r : r;
  };
  auto xd1 = [](int d) {
    std::vector<Integer> c(d + 1, Integer(0));
    c[0] = -1;
    c[d] = 1;
    return IntPolynomial(c);
  };
  IntPolynomial num{ 1 }, den{ 1 };
  for (int d = 1; d <= n; ++d) {
    if (n % d)
      continue;
    int mu = mobius(n / d);
    if (mu == 1)
      num = num * xd1(d);
    else if (mu == -1)
      den = den * xd1(d);
  }
  return exact_quotient(num, den);
}

std::vector<RootEnclosure> isolate_roots(const IntPolynomial& p)
{
  int n = p.degree();
  if (n < 1)
    return {};
  if (gcd(p, p.derivative()).degree() > 0)
    throw InvalidInput("isolate_roots: polynomial is not squarefree");

  std::vector<Real> c;
  for (const auto& a : p.coefficients())
    c.push_back(to_real(a));

  std::vector<Complex> z(n);
  if (n == 1) {
    z[0] = Complex(-c[0] / c[1], Real(0));
  } else {
    // double-precision seeds from the companion matrix; Aberth then refines
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i)
      comp(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i)
      comp(i, n - 1) = -(c[i] / c[n]).convert_to<double>();
    Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
    bool seeded = es.info() == Eigen::Success;
    for (int k = 0; k < n && seeded; ++k) {
      auto ev = es.eigenvalues()[k];
      if (!std::isfinite(ev.real()) || !std::isfinite(ev.imag()))
        seeded = false;
      else
        z[k] = Complex(Real(ev.real()), Real(ev.imag()));
    }
    for (int i = 0; i < n && seeded; ++i)
      for (int j = i + 1; j < n; ++j)
        if (z[i] == z[j])
          seeded = false;
    if (!seeded) {
      Real bound = 0;
      for (int i = 0; i < n; ++i)
        bound = std::max<Real>(bound, abs(c[i] / c[n]));
      Real radius = std::max<Real>(Real(0.5), pow(abs(c[0] / c[n]), Real(1) / n));
      radius = std::min<Real>(radius, 1 + bound);
      Real pi = boost::math::constants::pi<Real>();
      for (int k = 0; k < n; ++k) {
        Real t = 2 * pi * k / n + Real(0.4);
        z[k] = Complex(radius * cos(t), radius * sin(t));
      }
    }
    // Aberth-Ehrlich iteration
    Real tol = pow(Real(10), -85);
    for (int iter = 0; iter < 2000; ++iter) {
      Real worst = 0;
      for (int i = 0; i < n; ++i) {
        Eval e = horner(c, z[i]);
        if (abs(e.p) <= e.err)
          continue;
        Complex w = e.p / e.dp;
        Complex s = 0;
        for (int j = 0; j < n; ++j)
          if (j != i)
            s += Complex(1) / (z[i] - z[j]);
        Complex step = w / (Complex(1) - w * s);
        z[i] -= step;
        worst = std::max<Real>(worst, abs(step) / std::max<Real>(Real(1), abs(z[i])));
      }
      if (worst < tol)
        break;
    }
  }

  // candidate real roots are moved onto the axis, then all radii computed
  Real snap = pow(Real(10), -40);
  std::vector<bool> real(n, false);
  for (int i = 0; i < n; ++i) {
    if (abs(z[i].imag()) <= snap * std::max<Real>(Real(1), abs(z[i]))) {
      z[i] = Complex(z[i].real(), Real(0));
      real[i] = true;
    }
  }
  std::vector<Real> rad(n);
  for (int i = 0; i < n; ++i) {
    Eval e = horner(c, z[i]);
    Complex prod = c[n];
    for (int j = 0; j < n; ++j)
      if (j != i)
        prod *= (z[i] - z[j]);
    rad[i] = n * (abs(e.p) + e.err) / abs(prod);
    rad[i] *= Real(1) + pow(Real(10), -50);
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j)
      if (abs(z[i] - z[j]) <= rad[i] + rad[j])
        throw std::runtime_error("isolate_roots: inclusion disks overlap for " +
                                 p.to_string());
    if (!real[i] && abs(z[i].imag()) <= rad[i])
      throw std::runtime_error("isolate_roots: cannot decide whether a root is real");
  }

  std::vector<RootEnclosure> out(n);
  for (int i = 0; i < n; ++i) {
    double cr = z[i].real().convert_to<double>();
    double ci = z[i].imag().convert_to<double>();
    Real shift = abs(z[i] - Complex(Real(cr), Real(ci)));
    double r = (rad[i] + shift).convert_to<double>();
    r = std::nextafter(r * (1 + 1e-15), 1e300) + 1e-300;
    double m = abs(z[i]).convert_to<double>();
    double rm = (rad[i] + std::numeric_limits<double>::epsilon() * abs(z[i]))
                  .convert_to<double>();
    rm = std::nextafter(rm * (1 + 1e-15), 1e300) + 1e-300;
    out[i].center = { cr, ci };
    out[i].radius = r;
    out[i].real = real[i];
    out[i].re = Interval(cr - r, cr + r).widened();
    Interval mod = Interval(m - rm, m + rm).widened();
    out[i].modulus = Interval(std::max(0.0, mod.lo()), mod.hi());
  }
  std::stable_sort(out.begin(), out.end(), [](const RootEnclosure& a, const RootEnclosure& b) {
    if (a.real != b.real)
      return a.real;
    if (a.center.real() != b.center.real())
      return a.center.real() < b.center.real();
    return a.center.imag() < b.center.imag();
  });
  return out;
}

Interval mahler_measure_interval(const IntPolynomial& p)
{
  if (p.is_zero())
    throw InvalidInput("mahler_measure: zero polynomial");
  Interval lead = abs(Interval(to_interval(Rational(p.leading()))));
  if (p.degree() == 0)
    return lead;
  IntPolynomial rest = p.primitive();
  int deg = rest.degree();
  for (int n = 1; n <= 2 * deg * deg && rest.degree() > 0; ++n) {
    if (totient(n) > rest.degree())
      continue;
    IntPolynomial phi = cyclotomic(n);
    while (rest.degree() >= phi.degree() && divides(phi, rest))
      rest = exact_quotient(rest, phi);
  }
  Interval m = lead;
  for (const auto& [f, mult] : squarefree_decomposition(rest)) {
    Interval part(1.0);
    for (const auto& r : isolate_roots(f))
      part *= max(Interval(1.0), r.modulus);
    for (int i = 0; i < mult; ++i)
      m *= part;
  }
  return m;
}

double mahler_measure(const IntPolynomial& p)
{
  return mahler_measure_interval(p).mid();
}

bool is_irreducible(const IntPolynomial& p)
{
  int n = p.degree();
  if (n < 1)
    return false;
  if (n == 1)
    return true;
  if (n > 16)
    throw Unsupported("is_irreducible: degree above 16");
  if (gcd(p, p.derivative()).degree() > 0)
    return false;
  IntPolynomial f = p.primitive();
  auto roots = isolate_roots(f);
  std::vector<Complex> z;
  for (const auto& r : roots)
    z.emplace_back(Real(r.center.real()), Real(r.center.imag()));
  // refine the double centers back to full precision by Newton steps
  std::vector<Real> c;
  for (const auto& a : f.coefficients())
    c.push_back(to_real(a));
  for (auto& zi : z)
    for (int it = 0; it < 60; ++it) {
      Eval e = horner(c, zi);
      if (abs(e.p) <= e.err)
        break;
      zi -= e.p / e.dp;
    }
  auto divs = positive_divisors(f.leading());
  std::vector<int> idx;
  bool found = false;
  std::function<void(int, int)> rec = [&](int start, int m) {
    if (found)
      return;
    if (static_cast<int>(idx.size()) == m) {
      Real im = 0;
      for (int i : idx)
        im += z[i].imag();
      if (abs(im) > Real(1e-30))
        return;
      std::vector<Complex> prod{ Complex(1) };
      for (int i : idx) {
        std::vector<Complex> next(prod.size() + 1, Complex(0));
        for (std::size_t k = 0; k < prod.size(); ++k) {
          next[k + 1] += prod[k];
          next[k] -= prod[k] * z[i];
        }
        prod = next;
      }
      for (const auto& l : divs) {
        Real lr = to_real(l);
        std::vector<Integer> g;
        bool ok = true;
        for (const auto& coef : prod) {
          Real v = coef.real() * lr;
          Real rv = boost::multiprecision::round(v);
          if (abs(v - rv) > Real(1e-20) * std::max<Real>(Real(1), abs(v))) {
            ok = false;
            break;
          }
          g.push_back(round_to_integer(v));
        }
        if (ok && divides(IntPolynomial(g), f)) {
          found = true;
          return;
        }
      }
      return;
    }
    for (int i = start; i < static_cast<int>(z.size()); ++i) {
      idx.push_back(i);
      rec(i + 1, m);
      idx.pop_back();
    }
  };
  for (int m = 1; m <= n / 2 && !found; ++m)
    rec(0, m);
  return !found;
}

IntPolynomial minimal_polynomial(const QuadraticNumber& x)
{
  if (x.is_rational())
    return from_rat({ -x.a(), Rational(1) });
  return from_rat({ x.norm(), -x.trace(), Rational(1) });
}

} // namespace selfsim
