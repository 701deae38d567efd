#include "selfsim/quadratic.hpp"
#include "selfsim/errors.hpp"

#include <boost/functional/hash.hpp>

#include <cstdint>
#include <sstream>

namespace selfsim {

namespace {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

u64 mulmod(u64 a, u64 b, u64 m)
{
  return static_cast<u64>(static_cast<u128>(a) * b % m);
}

u64 powmod(u64 a, u64 e, u64 m)
{
  u64 r = 1 % m;
  a %= m;
  while (e) {
    if (e & 1)
      r = mulmod(r, a, m);
    a = mulmod(a, a, m);
    e >>= 1;
  }
  return r;
}

long integer_valuation(Integer n, long p)
{
  long v = 0;
  n = boost::multiprecision::abs(n);
  while (n != 0 && n % p == 0) {
    n /= p;
    ++v;
  }
  return v;
}

} // namespace

bool is_prime(long long n)
{
  if (n < 2)
    return false;
  for (long long p : { 2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37 }) {
    if (n % p == 0)
      return n == p;
  }
  u64 d = static_cast<u64>(n) - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  for (u64 a : { 2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37 }) {
    u64 x = powmod(a, d, n);
    if (x == 1 || x == static_cast<u64>(n) - 1)
      continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      x = mulmod(x, x, n);
      if (x == static_cast<u64>(n) - 1) {
        composite = false;
        break;
      }
    }
    if (composite)
      return false;
  }
  return true;
}

std::optional<long> rational_valuation(const Rational& x, long p)
{
  if (p < 2 || !is_prime(p))
    throw InvalidInput("rational_valuation: p must be prime");
  if (x == 0)
    return std::nullopt;
  return integer_valuation(numerator(x), p) - integer_valuation(denominator(x), p);
}

std::pair<Integer, Integer> square_factor(const Integer& n)
{
  if (n == 0)
    throw InvalidInput("square_factor: zero");
  constexpr long limit = 1000000;
  Integer m = boost::multiprecision::abs(n);
  Integer s = 1;
  Integer core = 1;
  long p = 2;
  for (; p <= limit && Integer(p) * p <= m; p += (p == 2 ? 1 : 2)) {
    int e = 0;
    while (m % p == 0) {
      m /= p;
      ++e;
    }
    for (int i = 0; i < e / 2; ++i)
      s *= p;
    if (e % 2)
      core *= p;
  }
  if (m > 1) {
    Integer lim = limit;
    Integer r = boost::multiprecision::sqrt(m);
    if (p <= limit || m < lim * lim) {
      core *= m; // m is prime
    } else if (r * r == m) {
      s *= r;
    } else if (m < lim * lim * lim) {
      core *= m; // at most two distinct large primes
    } else {
      throw Unsupported("square_factor: cannot certify squarefree part of " + n.str());
    }
  }
  return { s, n < 0 ? Integer(-core) : core };
}

Interval to_interval(const Rational& x)
{
  if (denominator(x) == 1 && boost::multiprecision::abs(numerator(x)) < Integer(1) << 53)
    return Interval(numerator(x).convert_to<double>());
  return Interval::around(x.convert_to<double>(), 1);
}

long long common_radicand(long long d1, long long d2)
{
  if (d1 == 0)
    return d2;
  if (d2 == 0 || d1 == d2)
    return d1;
  throw Unsupported("elements of Q(sqrt " + std::to_string(d1) + ") and Q(sqrt " +
                    std::to_string(d2) + ") cannot be combined");
}

QuadraticNumber::QuadraticNumber(const Rational& a, const Rational& b, long long D)
  : a_(a)
  , b_(b)
  , d_(D)
{
  if (b_ != 0) {
    if (D < 2)
      throw InvalidInput("quadratic radicand must be > 1");
    auto [s, core] = square_factor(Integer(D));
    if (s != 1)
      throw InvalidInput("quadratic radicand must be squarefree: " + std::to_string(D));
  }
  normalize();
}

void QuadraticNumber::normalize()
{
  if (b_ == 0)
    d_ = 0;
}

QuadraticNumber QuadraticNumber::conjugate() const
{
  QuadraticNumber r = *this;
  r.b_ = -r.b_;
  return r;
}

int QuadraticNumber::sign() const
{
  int sa = a_ > 0 ? 1 : (a_ < 0 ? -1 : 0);
  int sb = b_ > 0 ? 1 : (b_ < 0 ? -1 : 0);
  if (sb == 0)
    return sa;
  if (sa == 0 || sa == sb)
    return sb;
  // opposite signs: compare a^2 with b^2 D
  Rational n = norm();
  if (n == 0)
    return 0; // impossible for squarefree D, kept for safety
  return n > 0 ? sa : sb;
}

QuadraticNumber QuadraticNumber::inverse() const
{
  if (is_zero())
    throw InvalidInput("division by zero");
  Rational n = norm();
  QuadraticNumber r;
  r.a_ = a_ / n;
  r.b_ = -b_ / n;
  r.d_ = d_;
  r.normalize();
  return r;
}

Interval QuadraticNumber::to_interval() const
{
  if (d_ == 0)
    return selfsim::to_interval(a_);
  Interval sq = Interval::around(std::sqrt(static_cast<double>(d_)), 1);
  Interval ia = selfsim::to_interval(a_);
  Interval ib = selfsim::to_interval(b_) * sq;
  bool cancel = (a_ > 0 && b_ < 0) || (a_ < 0 && b_ > 0);
  if (!cancel)
    return ia + ib;
  // a + b sqrt D = N / (a - b sqrt D), the denominator has no cancellation
  return selfsim::to_interval(norm()) / (ia - ib);
}

std::string QuadraticNumber::to_string() const
{
  std::ostringstream os;
  if (d_ == 0) {
    os << a_;
    return os.str();
  }
  Integer c = boost::multiprecision::lcm(denominator(a_), denominator(b_));
  Integer A = numerator(a_) * (c / denominator(a_));
  Integer B = numerator(b_) * (c / denominator(b_));
  os << "(" << A << (B < 0 ? "-" : "+") << boost::multiprecision::abs(B) << "*sqrt(" << d_
     << "))/" << c;
  return os.str();
}

std::size_t QuadraticNumber::hash() const
{
  std::size_t h = boost::hash<Rational>{}(a_);
  boost::hash_combine(h, boost::hash<Rational>{}(b_));
  boost::hash_combine(h, d_);
  return h;
}

QuadraticNumber operator+(const QuadraticNumber& x, const QuadraticNumber& y)
{
  QuadraticNumber r;
  r.d_ = common_radicand(x.d_, y.d_);
  r.a_ = x.a_ + y.a_;
  r.b_ = x.b_ + y.b_;
  r.normalize();
  return r;
}

QuadraticNumber operator-(const QuadraticNumber& x, const QuadraticNumber& y)
{
  QuadraticNumber r;
  r.d_ = common_radicand(x.d_, y.d_);
  r.a_ = x.a_ - y.a_;
  r.b_ = x.b_ - y.b_;
  r.normalize();
  return r;
}

QuadraticNumber operator-(const QuadraticNumber& x)
{
  QuadraticNumber r = x;
  r.a_ = -r.a_;
  r.b_ = -r.b_;
  return r;
}

QuadraticNumber operator*(const QuadraticNumber& x, const QuadraticNumber& y)
{
  QuadraticNumber r;
  r.d_ = common_radicand(x.d_, y.d_);
  if (x.d_ == 0) {
    r.a_ = x.a_ * y.a_;
    r.b_ = x.a_ * y.b_;
  } else if (y.d_ == 0) {
    r.a_ = x.a_ * y.a_;
    r.b_ = x.b_ * y.a_;
  } else {
    r.a_ = x.a_ * y.a_ + x.b_ * y.b_ * r.d_;
    r.b_ = x.a_ * y.b_ + x.b_ * y.a_;
  }
  r.normalize();
  return r;
}

QuadraticNumber operator/(const QuadraticNumber& x, const QuadraticNumber& y)
{
  return x * y.inverse();
}

int splitting_type(long p, long long D)
{
  if (p == 2) {
    long long m8 = ((D % 8) + 8) % 8;
    if (m8 == 1)
      return 1;
    if (m8 == 5)
      return 0;
    return 2;
  }
  long long m = ((D % p) + p) % p;
  if (m == 0)
    return 2;
  return powmod(static_cast<u64>(m), static_cast<u64>(p - 1) / 2, p) == 1 ? 1 : 0;
}

std::optional<long> quadratic_valuation(const QuadraticNumber& x, long p, long long D,
                                        int branch)
{
  if (p < 2 || !is_prime(p))
    throw InvalidInput("valuation: p must be prime");
  D = common_radicand(D, x.radicand());
  if (x.is_zero())
    return std::nullopt;
  if (D == 0)
    return rational_valuation(x.a(), p);
  int type = splitting_type(p, D);
  if (x.is_rational()) {
    long v = *rational_valuation(x.a(), p);
    return type == 2 ? 2 * v : v;
  }
  if (type == 0)
    return *rational_valuation(x.norm(), p) / 2;
  if (type == 2)
    return *rational_valuation(x.norm(), p);
  if (p == 2)
    throw Unsupported("valuation at a split prime above 2 is not implemented");

  // split: embed sqrt(D) into Z_p and read off the p-adic valuation
  Integer c = boost::multiprecision::lcm(denominator(x.a()), denominator(x.b()));
  Integer A = numerator(x.a()) * (c / denominator(x.a()));
  Integer B = numerator(x.b()) * (c / denominator(x.b()));
  long vc = integer_valuation(c, p);
  long k = integer_valuation(A * A - B * B * D, p) + 1;
  constexpr long root_search_limit = 10000000;
  if (p > root_search_limit)
    throw Unsupported("valuation: prime too large for square-root search");
  long long dm = ((D % p) + p) % p;
  long long r = -1;
  for (long long t = 1; t < p; ++t) {
    if (static_cast<long long>(mulmod(t, t, p)) == dm) {
      r = t;
      break;
    }
  }
  if (branch != 0)
    r = p - r;
  Integer pk = 1;
  for (long i = 0; i < k; ++i)
    pk *= p;
  Integer s = r;
  // Newton iteration doubles the p-adic precision each step
  for (long prec = 1; prec < k; prec *= 2) {
    Integer two_s = (2 * s) % pk;
    Integer inv;
    mpz_invert(inv.backend().data(), two_s.backend().data(), pk.backend().data());
    s = (s - (s * s - D) * inv) % pk;
    if (s < 0)
      s += pk;
  }
  Integer val = (A + B * s) % pk;
  if (val < 0)
    val += pk;
  if (val == 0)
    throw std::logic_error("valuation: insufficient p-adic precision");
  return integer_valuation(val, p) - vc;
}

} // namespace selfsim
