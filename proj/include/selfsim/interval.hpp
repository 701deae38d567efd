#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace selfsim {

//! Closed interval of doubles with outward rounding.
//!
//! Every arithmetic result is widened by one ulp on each side, which
//! over-approximates the round-to-nearest error of the underlying operation.
class Interval
{
public:
  Interval() = default;
  Interval(double x)
    : lo_(x)
    , hi_(x)
  {}
  Interval(double lo, double hi)
    : lo_(lo)
    , hi_(hi)
  {}

  //! Interval around a value computed with at most `ulps` rounding errors.
  static Interval around(double x, int ulps = 1)
  {
    Interval r(x);
    for (int i = 0; i < ulps; ++i)
      r = r.widened();
    return r;
  }

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double mid() const { return 0.5 * (lo_ + hi_); }
  double width() const { return hi_ - lo_; }
  bool contains(double x) const { return lo_ <= x && x <= hi_; }
  bool is_empty() const { return !(lo_ <= hi_); }

  Interval widened() const
  {
    return { std::nextafter(lo_, -std::numeric_limits<double>::infinity()),
             std::nextafter(hi_, std::numeric_limits<double>::infinity()) };
  }

  friend Interval operator+(const Interval& a, const Interval& b)
  {
    return Interval(a.lo_ + b.lo_, a.hi_ + b.hi_).widened();
  }
  friend Interval operator-(const Interval& a, const Interval& b)
  {
    return Interval(a.lo_ - b.hi_, a.hi_ - b.lo_).widened();
  }
  friend Interval operator-(const Interval& a) { return { -a.hi_, -a.lo_ }; }
  friend Interval operator*(const Interval& a, const Interval& b)
  {
    double p[4] = { a.lo_ * b.lo_, a.lo_ * b.hi_, a.hi_ * b.lo_, a.hi_ * b.hi_ };
    return Interval(*std::min_element(p, p + 4), *std::max_element(p, p + 4))
      .widened();
  }
  //! Division; the divisor must not contain zero (returns the whole line).
  friend Interval operator/(const Interval& a, const Interval& b)
  {
    if (b.lo_ <= 0.0 && b.hi_ >= 0.0) {
      double inf = std::numeric_limits<double>::infinity();
      return { -inf, inf };
    }
    double p[4] = { a.lo_ / b.lo_, a.lo_ / b.hi_, a.hi_ / b.lo_, a.hi_ / b.hi_ };
    return Interval(*std::min_element(p, p + 4), *std::max_element(p, p + 4))
      .widened();
  }
  Interval& operator+=(const Interval& o) { return *this = *this + o; }
  Interval& operator-=(const Interval& o) { return *this = *this - o; }
  Interval& operator*=(const Interval& o) { return *this = *this * o; }

  friend std::ostream& operator<<(std::ostream& os, const Interval& x)
  {
    return os << "[" << x.lo_ << ", " << x.hi_ << "]";
  }

private:
  double lo_ = 0.0;
  double hi_ = 0.0;
};

inline Interval abs(const Interval& x)
{
  if (x.lo() >= 0.0)
    return x;
  if (x.hi() <= 0.0)
    return -x;
  return { 0.0, std::max(-x.lo(), x.hi()) };
}

inline Interval sqrt(const Interval& x)
{
  double lo = std::max(0.0, x.lo());
  return Interval(std::sqrt(lo), std::sqrt(std::max(0.0, x.hi()))).widened();
}

inline Interval sqr(const Interval& x)
{
  Interval a = abs(x);
  return Interval(a.lo() * a.lo(), a.hi() * a.hi()).widened();
}

//! libm log/exp are faithfully rounded on glibc; two ulps of slack are used.
inline Interval log(const Interval& x)
{
  double inf = std::numeric_limits<double>::infinity();
  double lo = x.lo() > 0.0 ? std::log(x.lo()) : -inf;
  return Interval(lo, std::log(x.hi())).widened().widened();
}

inline Interval exp(const Interval& x)
{
  Interval r(std::exp(x.lo()), std::exp(x.hi()));
  r = r.widened().widened();
  return { std::max(0.0, r.lo()), r.hi() };
}

//! Convex hull.
inline Interval operator|(const Interval& a, const Interval& b)
{
  return { std::min(a.lo(), b.lo()), std::max(a.hi(), b.hi()) };
}

inline Interval max(const Interval& a, const Interval& b)
{
  return { std::max(a.lo(), b.lo()), std::max(a.hi(), b.hi()) };
}

inline Interval min(const Interval& a, const Interval& b)
{
  return { std::min(a.lo(), b.lo()), std::min(a.hi(), b.hi()) };
}

} // namespace selfsim
