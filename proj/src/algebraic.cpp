#include "selfsim/algebraic.hpp"
#include "selfsim/errors.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>

namespace selfsim {

namespace {

RootEnclosure rational_enclosure(const Rational& x)
{
  RootEnclosure r;
  Interval iv = to_interval(x);
  r.center = { iv.mid(), 0.0 };
  r.radius = iv.width();
  r.real = true;
  r.re = iv;
  r.modulus = abs(iv);
  return r;
}

IntPolynomial rational_min_poly(const Rational& x)
{
  return IntPolynomial(std::vector<Integer>{ -numerator(x), denominator(x) });
}

Rational exact_rational(double x)
{
  return Rational(x);
}

} // namespace

AlgebraicNumber::AlgebraicNumber()
  : AlgebraicNumber(Rational(0))
{}

AlgebraicNumber::AlgebraicNumber(const Rational& x)
  : min_poly_(rational_min_poly(x))
  , root_(rational_enclosure(x))
  , mahler_(to_interval(Rational(
      boost::multiprecision::max(boost::multiprecision::abs(numerator(x)), denominator(x)))))
{}

AlgebraicNumber::AlgebraicNumber(const QuadraticNumber& x)
{
  if (x.is_rational()) {
    *this = AlgebraicNumber(x.a());
    return;
  }
  min_poly_ = minimal_polynomial(x);
  auto roots = isolate_roots(min_poly_);
  // both conjugates are real; the larger one carries the positive sqrt
  root_ = roots[x.b() > 0 ? 1 : 0];
  mahler_ = mahler_measure_interval(min_poly_);
}

AlgebraicNumber::AlgebraicNumber(IntPolynomial p, RootEnclosure r)
  : min_poly_(std::move(p))
  , root_(r)
  , mahler_(mahler_measure_interval(min_poly_))
{}

AlgebraicNumber AlgebraicNumber::real_root(const IntPolynomial& p, int k)
{
  if (p.degree() < 1)
    throw InvalidInput("minimal polynomial must have degree >= 1");
  if (!is_irreducible(p))
    throw InvalidInput("polynomial " + p.to_string() + " is not irreducible over Q");
  IntPolynomial f = p.primitive();
  if (f.degree() == 1)
    return AlgebraicNumber(Rational(-f[0], f[1]));
  auto roots = isolate_roots(f);
  int nreal = 0;
  for (const auto& r : roots)
    nreal += r.real;
  if (k < 0 || k >= nreal)
    throw InvalidInput("root index " + std::to_string(k) + " out of range: " +
                       std::to_string(nreal) + " real roots");
  return AlgebraicNumber(f, roots[k]);
}

AlgebraicNumber AlgebraicNumber::nearest_root(const IntPolynomial& p, std::complex<double> approx)
{
  if (p.degree() < 1)
    throw InvalidInput("minimal polynomial must have degree >= 1");
  if (!is_irreducible(p))
    throw InvalidInput("polynomial " + p.to_string() + " is not irreducible over Q");
  IntPolynomial f = p.primitive();
  if (f.degree() == 1)
    return AlgebraicNumber(Rational(-f[0], f[1]));
  auto roots = isolate_roots(f);
  std::size_t best = 0;
  for (std::size_t i = 1; i < roots.size(); ++i)
    if (std::abs(roots[i].center - approx) < std::abs(roots[best].center - approx))
      best = i;
  return AlgebraicNumber(f, roots[best]);
}

std::optional<QuadraticNumber> AlgebraicNumber::to_quadratic() const
{
  if (degree() == 1)
    return QuadraticNumber(Rational(-min_poly_[0], min_poly_[1]));
  if (degree() != 2 || !is_real())
    return std::nullopt;
  const Integer& A = min_poly_[2];
  const Integer& B = min_poly_[1];
  const Integer& C = min_poly_[0];
  auto [s, core] = square_factor(B * B - 4 * A * C);
  long long D = core.convert_to<long long>();
  QuadraticNumber lo(Rational(-B, 2 * A), Rational(-s, 2 * A), D);
  QuadraticNumber hi(Rational(-B, 2 * A), Rational(s, 2 * A), D);
  double dlo = std::abs(lo.to_double() - root_.center.real());
  double dhi = std::abs(hi.to_double() - root_.center.real());
  return dlo < dhi ? lo : hi;
}

AlgebraicNumber AlgebraicNumber::inverse() const
{
  if (degree() == 1) {
    Rational x(-min_poly_[0], min_poly_[1]);
    if (x == 0)
      throw InvalidInput("inverse of zero");
    return AlgebraicNumber(Rational(1) / x);
  }
  return nearest_root(min_poly_.reversed(), 1.0 / root_.center);
}

bool operator==(const AlgebraicNumber& x, const AlgebraicNumber& y)
{
  if (!(x.min_poly_ == y.min_poly_))
    return false;
  return std::abs(x.root_.center - y.root_.center) <= x.root_.radius + y.root_.radius;
}

std::string AlgebraicNumber::to_string() const
{
  if (auto q = to_quadratic())
    return q->to_string();
  std::string s = "{minpoly: " + min_poly_.to_string() + ", root: ";
  if (!is_real())
  {
    char buf[96];
    std::snprintf(buf, sizeof buf, "complex(%.17g, %.17g)}", root_.center.real(),
                  root_.center.imag());
    return s + buf;
  }
  auto roots = isolate_roots(min_poly_);
  int k = 0;
  while (std::abs(roots[k].center - root_.center) > roots[k].radius + root_.radius)
    ++k;
  return s + std::to_string(k) + "}";
}

Interval absolute_height_interval(const AlgebraicNumber& a)
{
  return exp(log_height_interval(a));
}

double absolute_height(const AlgebraicNumber& a)
{
  if (a.degree() == 1)
    return a.mahler().mid();
  return absolute_height_interval(a).mid();
}

Interval log_height_interval(const AlgebraicNumber& a)
{
  Interval m = a.mahler();
  if (m.lo() == 1.0 && m.hi() == 1.0)
    return Interval(0.0);
  Interval lm = log(m);
  // log M >= 0 always; clip the enclosure accordingly
  lm = Interval(std::max(0.0, lm.lo()), std::max(0.0, lm.hi()));
  return lm / Interval(static_cast<double>(a.degree()));
}

double log_height(const AlgebraicNumber& a)
{
  return log_height_interval(a).mid();
}

std::vector<Interval> real_embeddings(const AlgebraicNumber& a)
{
  if (a.degree() == 1)
    return { a.root().re };
  std::vector<Interval> out;
  for (const auto& r : isolate_roots(a.min_poly()))
    if (r.real)
      out.push_back(r.re);
  return out;
}

Interval evaluate(const AlgebraicNumber& a, double tolerance)
{
  if (!(tolerance > 0.0))
    throw InvalidInput("evaluate: tolerance must be positive");
  if (!a.is_real())
    throw InvalidInput("evaluate: number is not real");
  if (a.degree() == 1)
    return to_interval(Rational(-a.min_poly()[0], a.min_poly()[1]));
  const IntPolynomial& p = a.min_poly();
  Rational lo = exact_rational(a.root().re.lo());
  Rational hi = exact_rational(a.root().re.hi());
  int slo = p.sign_at(lo);
  if (slo == 0 || p.sign_at(hi) == 0)
    throw std::logic_error("evaluate: rational root of an irreducible polynomial");
  Rational tol = exact_rational(tolerance);
  for (int it = 0; it < 4000 && hi - lo > tol; ++it) {
    Rational m = (lo + hi) / 2;
    int sm = p.sign_at(m);
    if (sm == slo)
      lo = m;
    else
      hi = m;
    if (to_interval(hi).hi() <= to_interval(lo).lo())
      break;
  }
  return { to_interval(lo).lo(), to_interval(hi).hi() };
}

namespace {

class ExprParser
{
public:
  explicit ExprParser(const std::string& s)
    : s_(s)
  {}

  QuadraticNumber parse()
  {
    QuadraticNumber v = expr();
    skip();
    if (pos_ != s_.size())
      fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return v;
  }

private:
  [[noreturn]] void fail(const std::string& m) const
  {
    throw InvalidInput("cannot parse number \"" + s_ + "\": " + m);
  }

  void skip()
  {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
      ++pos_;
  }

  bool eat(char c)
  {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  QuadraticNumber expr()
  {
    QuadraticNumber v = term();
    for (;;) {
      if (eat('+'))
        v += term();
      else if (eat('-'))
        v -= term();
      else
        return v;
    }
  }

  QuadraticNumber term()
  {
    QuadraticNumber v = factor();
    for (;;) {
      if (eat('*')) {
        v *= factor();
      } else if (eat('/')) {
        QuadraticNumber d = factor();
        if (d.is_zero())
          fail("division by zero");
        v = v / d;
      } else {
        return v;
      }
    }
  }

  QuadraticNumber factor()
  {
    skip();
    if (eat('-'))
      return -factor();
    if (eat('+'))
      return factor();
    if (eat('(')) {
      QuadraticNumber v = expr();
      if (!eat(')'))
        fail("missing ')'");
      return v;
    }
    if (s_.compare(pos_, 4, "sqrt") == 0) {
      pos_ += 4;
      if (!eat('('))
        fail("expected '(' after sqrt");
      QuadraticNumber v = expr();
      if (!eat(')'))
        fail("missing ')'");
      if (!v.is_rational() || v.a() < 0)
        fail("sqrt argument must be a nonnegative rational");
      if (v.a() == 0)
        return QuadraticNumber(0);
      Integer num = numerator(v.a()) * denominator(v.a());
      auto [sq, core] = square_factor(num);
      Rational coef(sq, denominator(v.a()));
      if (core == 1)
        return QuadraticNumber(coef);
      return QuadraticNumber(Rational(0), coef, core.convert_to<long long>());
    }
    std::size_t start = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_])))
      ++pos_;
    if (start == pos_)
      fail(pos_ < s_.size() ? "unexpected '" + std::string(1, s_[pos_]) + "'"
                            : "unexpected end of input");
    return QuadraticNumber(Integer(s_.substr(start, pos_ - start)));
  }

  std::string s_;
  std::size_t pos_ = 0;
};

std::string strip(const std::string& s)
{
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos)
    return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

AlgebraicNumber parse_minpoly_form(const std::string& text)
{
  // {minpoly: [c0, c1, ...], root: k}
  auto bad = [&](const std::string& m) {
    return InvalidInput("cannot parse number \"" + text + "\": " + m);
  };
  std::string body = strip(text);
  if (body.size() < 2 || body.front() != '{' || body.back() != '}')
    throw bad("expected {minpoly: [...], root: k}");
  body = body.substr(1, body.size() - 2);
  std::size_t mp = body.find("minpoly");
  std::size_t lb = body.find('[', mp);
  std::size_t rb = body.find(']', lb);
  std::size_t rt = body.find("root", rb);
  if (mp == std::string::npos || lb == std::string::npos || rb == std::string::npos ||
      rt == std::string::npos)
    throw bad("expected {minpoly: [...], root: k}");
  std::vector<Integer> coeffs;
  std::string list = body.substr(lb + 1, rb - lb - 1);
  std::size_t p = 0;
  while (p <= list.size()) {
    std::size_t q = list.find(',', p);
    std::string item = strip(list.substr(p, q == std::string::npos ? std::string::npos : q - p));
    if (item.empty())
      throw bad("empty coefficient");
    try {
      coeffs.emplace_back(item);
    } catch (const std::exception&) {
      throw bad("coefficient \"" + item + "\" is not an integer");
    }
    if (q == std::string::npos)
      break;
    p = q + 1;
  }
  std::size_t colon = body.find(':', rt);
  if (colon == std::string::npos)
    throw bad("expected ':' after root");
  std::string ks = strip(body.substr(colon + 1));
  if (ks.rfind("complex(", 0) == 0 && ks.back() == ')') {
    std::string inner = ks.substr(8, ks.size() - 9);
    std::size_t comma = inner.find(',');
    if (comma == std::string::npos)
      throw bad("expected complex(re, im)");
    try {
      double re = std::stod(inner.substr(0, comma)), im = std::stod(inner.substr(comma + 1));
      return AlgebraicNumber::nearest_root(IntPolynomial(coeffs), { re, im });
    } catch (const std::invalid_argument&) {
      throw bad("expected complex(re, im)");
    }
  }
  int k = 0;
  try {
    std::size_t used = 0;
    k = std::stoi(ks, &used);
    if (used != ks.size())
      throw bad("root index must be an integer");
  } catch (const std::invalid_argument&) {
    throw bad("root index must be an integer");
  }
  return AlgebraicNumber::real_root(IntPolynomial(coeffs), k);
}

} // namespace

AlgebraicNumber parse_algebraic(const std::string& text)
{
  std::string s = strip(text);
  if (!s.empty() && s.front() == '{')
    return parse_minpoly_form(s);
  return AlgebraicNumber(ExprParser(s).parse());
}

QuadraticNumber parse_quadratic(const std::string& text)
{
  std::string s = strip(text);
  if (!s.empty() && s.front() == '{') {
    auto q = parse_minpoly_form(s).to_quadratic();
    if (!q)
      throw Unsupported("\"" + text + "\" has degree > 2; exact map coefficients must lie in Q "
                        "or Q(sqrt D)");
    return *q;
  }
  return ExprParser(s).parse();
}

} // namespace selfsim
