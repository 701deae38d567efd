#include "selfsim/similarity.hpp"
#include "selfsim/errors.hpp"

#include <boost/functional/hash.hpp>

#include <cstdio>
#include <sstream>

namespace selfsim {

namespace {

std::string fmt_double(double x)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

long long field_of(long long acc, const QuadraticNumber& x)
{
  return common_radicand(acc, x.radicand());
}

} // namespace

bool is_orthogonal(const ExactMatrix& U)
{
  if (U.rows != U.cols)
    return false;
  return U.transpose() * U == ExactMatrix::identity(U.rows);
}

Similarity::Similarity(QuadraticNumber rho, ExactMatrix U, ExactVector b)
{
  int d = static_cast<int>(b.size());
  if (d < 1)
    throw InvalidInput("similarity: dimension must be positive");
  if (U.rows != d || U.cols != d)
    throw InvalidInput("similarity: U must be " + std::to_string(d) + "x" + std::to_string(d));
  if (rho.sign() <= 0)
    throw InvalidInput("similarity: rho must be positive");
  if (!is_orthogonal(U))
    throw InvalidInput("similarity: U is not orthogonal");
  long long D = rho.radicand();
  for (const auto& e : U.a)
    D = field_of(D, e);
  for (const auto& e : b)
    D = field_of(D, e);
  exact_ = Exact{ std::move(rho), std::move(U), std::move(b), D };
  fill_shadow();
}

Similarity Similarity::affine1d(const QuadraticNumber& scale, const QuadraticNumber& b)
{
  if (scale.is_zero())
    throw InvalidInput("similarity: zero scale");
  ExactMatrix U(1, 1);
  U(0, 0) = scale.sign() > 0 ? 1 : -1;
  return Similarity(scale.abs(), U, ExactVector{ b });
}

Similarity Similarity::numeric(double rho, Mat U, Vec b)
{
  int d = static_cast<int>(b.size());
  if (d < 1)
    throw InvalidInput("similarity: dimension must be positive");
  if (U.rows() != d || U.cols() != d)
    throw InvalidInput("similarity: U has the wrong shape");
  if (!(rho > 0) || !std::isfinite(rho))
    throw InvalidInput("similarity: rho must be positive and finite");
  if (!b.allFinite() || !U.allFinite())
    throw InvalidInput("similarity: entries must be finite");
  if ((U.transpose() * U - Mat::Identity(d, d)).norm() > 1e-12 * d)
    throw InvalidInput("similarity: U is not orthogonal to 1e-12");
  Similarity g;
  g.rhof_ = rho;
  g.Uf_ = std::move(U);
  g.bf_ = std::move(b);
  return g;
}

Similarity Similarity::identity(int d)
{
  return Similarity(QuadraticNumber(1), ExactMatrix::identity(d), ExactVector(d));
}

void Similarity::fill_shadow()
{
  const Exact& e = *exact_;
  int d = e.U.rows;
  rhof_ = e.rho.to_double();
  Uf_.resize(d, d);
  bf_.resize(d);
  for (int i = 0; i < d; ++i) {
    bf_(i) = e.b[i].to_double();
    for (int j = 0; j < d; ++j)
      Uf_(i, j) = e.U(i, j).to_double();
  }
}

const QuadraticNumber& Similarity::rho() const
{
  if (!exact_)
    throw Unsupported("similarity has no exact representation");
  return exact_->rho;
}

const ExactMatrix& Similarity::U() const
{
  if (!exact_)
    throw Unsupported("similarity has no exact representation");
  return exact_->U;
}

const ExactVector& Similarity::b() const
{
  if (!exact_)
    throw Unsupported("similarity has no exact representation");
  return exact_->b;
}

long long Similarity::radicand() const
{
  if (!exact_)
    throw Unsupported("similarity has no exact representation");
  return exact_->radicand;
}

Vec Similarity::operator()(const Vec& x) const
{
  return rhof_ * (Uf_ * x) + bf_;
}

ExactVector Similarity::operator()(const ExactVector& x) const
{
  return rho() * (U() * x) + b();
}

Similarity Similarity::inverse() const
{
  if (!exact_) {
    Mat Ut = Uf_.transpose();
    return numeric(1.0 / rhof_, Ut, -(Ut * bf_) / rhof_);
  }
  QuadraticNumber r = exact_->rho.inverse();
  ExactMatrix Ut = exact_->U.transpose();
  ExactVector nb = (-r) * (Ut * exact_->b);
  return Similarity(r, Ut, nb);
}

bool operator==(const Similarity& g, const Similarity& h)
{
  if (g.dim() != h.dim())
    return false;
  if (g.exact_ && h.exact_)
    return g.exact_->rho == h.exact_->rho && g.exact_->U == h.exact_->U &&
           g.exact_->b == h.exact_->b;
  if (g.exact_ || h.exact_)
    return false;
  return g.rhof_ == h.rhof_ && g.Uf_ == h.Uf_ && g.bf_ == h.bf_;
}

std::size_t Similarity::hash() const
{
  std::size_t seed = static_cast<std::size_t>(dim());
  if (exact_) {
    boost::hash_combine(seed, exact_->rho.hash());
    for (const auto& e : exact_->U.a)
      boost::hash_combine(seed, e.hash());
    for (const auto& e : exact_->b)
      boost::hash_combine(seed, e.hash());
  } else {
    boost::hash_combine(seed, rhof_);
    for (Eigen::Index i = 0; i < Uf_.size(); ++i)
      boost::hash_combine(seed, Uf_.data()[i]);
    for (Eigen::Index i = 0; i < bf_.size(); ++i)
      boost::hash_combine(seed, bf_(i));
  }
  return seed;
}

std::string Similarity::to_string() const
{
  int d = dim();
  std::ostringstream os;
  auto entry = [&](int i, int j) {
    return exact_ ? exact_->U(i, j).to_string() : fmt_double(Uf_(i, j));
  };
  os << "rho=" << (exact_ ? exact_->rho.to_string() : fmt_double(rhof_)) << "; U=[";
  for (int i = 0; i < d; ++i) {
    if (i)
      os << ";";
    for (int j = 0; j < d; ++j)
      os << (j ? "," : "") << entry(i, j);
  }
  os << "]; b=[";
  for (int i = 0; i < d; ++i)
    os << (i ? "," : "") << (exact_ ? exact_->b[i].to_string() : fmt_double(bf_(i)));
  os << "]";
  return os.str();
}

Similarity compose(const Similarity& g, const Similarity& h)
{
  if (g.dim() != h.dim())
    throw InvalidInput("compose: dimension mismatch");
  if (g.is_exact() && h.is_exact())
    return Similarity(g.rho() * h.rho(), g.U() * h.U(), g.rho() * (g.U() * h.b()) + g.b());
  return Similarity::numeric(g.rho_f() * h.rho_f(), g.U_f() * h.U_f(),
                             g.rho_f() * (g.U_f() * h.b_f()) + g.b_f());
}

Interval group_metric_interval(const Similarity& g, const Similarity& h)
{
  if (g.dim() != h.dim())
    throw InvalidInput("group_metric: dimension mismatch");
  if (g.is_exact() && h.is_exact()) {
    QuadraticNumber q = g.rho() / h.rho();
    Interval scale = q == QuadraticNumber(1) ? Interval(0.0) : abs(log(q.to_interval()));
    Interval rot = operator_norm_interval(g.U() - h.U());
    QuadraticNumber bb = squared_norm(g.b() - h.b());
    Interval trans = bb.is_zero() ? Interval(0.0) : sqrt(bb.to_interval());
    return scale + rot + trans;
  }
  double v = std::abs(std::log(g.rho_f()) - std::log(h.rho_f())) +
             (g.U_f() - h.U_f()).operatorNorm() + (g.b_f() - h.b_f()).norm();
  double slack = 1e-12 * (1.0 + v);
  return Interval(std::max(0.0, v - slack), v + slack);
}

double group_metric(const Similarity& g, const Similarity& h)
{
  return group_metric_interval(g, h).mid();
}

SimMeasure::SimMeasure(std::vector<Atom> atoms)
  : atoms_(std::move(atoms))
{
  if (atoms_.empty())
    throw InvalidInput("measure: no atoms");
  Rational total = 0;
  int d = atoms_.front().g.dim();
  for (const auto& a : atoms_) {
    if (a.p <= 0)
      throw InvalidInput("measure: probabilities must be positive");
    if (a.g.dim() != d)
      throw InvalidInput("measure: atoms of different dimensions");
    total += a.p;
  }
  if (total != 1)
    throw InvalidInput("measure: probabilities sum to " + total.str() + ", not 1");
}

bool SimMeasure::is_exact() const
{
  for (const auto& a : atoms_)
    if (!a.g.is_exact())
      return false;
  return true;
}

std::string to_string(Contraction c)
{
  switch (c) {
    case Contraction::contracting:
      return "contracting";
    case Contraction::contracting_on_average:
      return "contracting_on_average";
    case Contraction::only_contracting_on_average:
      return "only_contracting_on_average";
    case Contraction::not_contracting:
      return "not_contracting";
  }
  return "unknown";
}

namespace {

QuadraticNumber power(QuadraticNumber x, Integer e)
{
  QuadraticNumber r(1);
  while (e > 0) {
    if ((e & 1) != 0)
      r *= x;
    e >>= 1;
    if (e > 0)
      x *= x;
  }
  return r;
}

//! Sign of sum p_i log rho_i, decided exactly from prod rho_i^(p_i L).
//! Returns 0 when chi = 0 or the exponents are too large to expand.
int exact_lyapunov_sign(const SimMeasure& mu)
{
  Integer L = 1;
  for (const auto& a : mu.atoms())
    L = boost::multiprecision::lcm(L, Integer(denominator(a.p)));
  Integer total = 0;
  for (const auto& a : mu.atoms())
    total += numerator(a.p) * (L / denominator(a.p));
  if (total > 4096)
    return 0;
  QuadraticNumber prod(1);
  for (const auto& a : mu.atoms())
    prod *= power(a.g.rho(), numerator(a.p) * (L / denominator(a.p)));
  return (prod - QuadraticNumber(1)).sign();
}

} // namespace

Lyapunov lyapunov_exponent(const SimMeasure& mu)
{
  Interval chi(0.0);
  double value = 0;
  bool exact = mu.is_exact();
  bool all_below = true;
  bool any_above = false;
  for (const auto& a : mu.atoms()) {
    Interval p = to_interval(a.p);
    Interval r = exact ? a.g.rho().to_interval() : Interval::around(a.g.rho_f());
    chi = chi + p * log(r);
    value += a.p.convert_to<double>() * std::log(a.g.rho_f());
    int cmp = exact ? (a.g.rho() - QuadraticNumber(1)).sign()
                    : (a.g.rho_f() < 1 ? -1 : (a.g.rho_f() > 1 ? 1 : 0));
    all_below = all_below && cmp < 0;
    any_above = any_above || cmp > 0;
  }
  int sign;
  if (chi.hi() < 0)
    sign = -1;
  else if (chi.lo() > 0)
    sign = 1;
  else
    sign = exact ? exact_lyapunov_sign(mu) : 0;
  value = std::clamp(value, chi.lo(), chi.hi());

  Contraction kind;
  if (sign >= 0)
    kind = Contraction::not_contracting;
  else if (all_below)
    kind = Contraction::contracting;
  else if (any_above)
    kind = Contraction::only_contracting_on_average;
  else
    kind = Contraction::contracting_on_average;
  return { value, chi, kind };
}

ExactVector fixed_point(const Similarity& g)
{
  int d = g.dim();
  ExactMatrix m = ExactMatrix::identity(d) - g.rho() * g.U();
  auto x = solve(m, g.b());
  if (!x)
    throw PreconditionFailed("fixed_point: rho U has eigenvalue 1, no unique fixed point");
  return *x;
}

Vec fixed_point_f(const Similarity& g)
{
  int d = g.dim();
  Mat m = Mat::Identity(d, d) - g.rho_f() * g.U_f();
  Eigen::FullPivLU<Mat> lu(m);
  if (lu.rank() < d)
    throw PreconditionFailed("fixed_point: rho U has eigenvalue 1, no unique fixed point");
  return lu.solve(g.b_f());
}

bool has_common_fixed_point(const SimMeasure& mu)
{
  if (mu.is_exact()) {
    ExactVector first = fixed_point(mu[0].g);
    for (std::size_t i = 1; i < mu.size(); ++i)
      if (fixed_point(mu[i].g) != first)
        return false;
    return true;
  }
  Vec first = fixed_point_f(mu[0].g);
  for (std::size_t i = 1; i < mu.size(); ++i)
    if ((fixed_point_f(mu[i].g) - first).norm() > 1e-12 * (1 + first.norm()))
      return false;
  return true;
}

namespace {

//! Position of the unknown s_{min(i,j), max(i,j)} in the symmetric basis.
int sym_index(int i, int j, int d)
{
  if (i > j)
    std::swap(i, j);
  return i * d - i * (i - 1) / 2 + (j - i);
}

template <class Get, class Add>
void commutator_rows(int d, Get U, Add add)
{
  // row (a, b): sum_c S_ac U_cb - U_ac S_cb
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c) {
        add(a * d + b, sym_index(a, c, d), U(c, b), +1);
        add(a * d + b, sym_index(c, b, d), U(a, c), -1);
      }
}

} // namespace

bool is_irreducible(const std::vector<ExactMatrix>& Us)
{
  if (Us.empty())
    throw InvalidInput("is_irreducible: empty family");
  int d = Us.front().rows;
  for (const auto& U : Us)
    if (U.rows != d || !is_orthogonal(U))
      throw InvalidInput("is_irreducible: input matrix is not orthogonal");
  if (d == 1)
    return true;
  int m = d * (d + 1) / 2;
  ExactMatrix sys(static_cast<int>(Us.size()) * d * d, m);
  for (std::size_t k = 0; k < Us.size(); ++k) {
    int base = static_cast<int>(k) * d * d;
    commutator_rows(
      d, [&](int i, int j) { return Us[k](i, j); },
      [&](int row, int col, const QuadraticNumber& v, int s) {
        if (s > 0)
          sys(base + row, col) += v;
        else
          sys(base + row, col) -= v;
      });
  }
  return m - rank(sys) == 1;
}

bool is_irreducible(const std::vector<Mat>& Us)
{
  if (Us.empty())
    throw InvalidInput("is_irreducible: empty family");
  int d = static_cast<int>(Us.front().rows());
  for (const auto& U : Us)
    if (U.rows() != d || U.cols() != d ||
        (U.transpose() * U - Mat::Identity(d, d)).norm() > 1e-9 * d)
      throw InvalidInput("is_irreducible: input matrix is not orthogonal");
  if (d == 1)
    return true;
  int m = d * (d + 1) / 2;
  Mat sys = Mat::Zero(static_cast<Eigen::Index>(Us.size()) * d * d, m);
  for (std::size_t k = 0; k < Us.size(); ++k) {
    int base = static_cast<int>(k) * d * d;
    commutator_rows(
      d, [&](int i, int j) { return Us[k](i, j); },
      [&](int row, int col, double v, int s) { sys(base + row, col) += s * v; });
  }
  Eigen::JacobiSVD<Mat> svd(sys);
  const Vec& sv = svd.singularValues();
  double tol = 1e-9 * std::max(1.0, sv.size() ? sv(0) : 0.0);
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > tol)
      ++r;
  return m - r == 1;
}

bool is_irreducible(const SimMeasure& mu)
{
  if (mu.is_exact()) {
    std::vector<ExactMatrix> Us;
    for (const auto& a : mu.atoms())
      Us.push_back(a.g.U());
    return is_irreducible(Us);
  }
  std::vector<Mat> Us;
  for (const auto& a : mu.atoms())
    Us.push_back(a.g.U_f());
  return is_irreducible(Us);
}

SimMeasure conjugate_measure(const SimMeasure& mu, const Similarity& h, bool lazy)
{
  Similarity hinv = h.inverse();
  std::vector<Atom> atoms;
  for (const auto& a : mu.atoms())
    atoms.push_back({ lazy ? a.p / 2 : a.p, compose(h, compose(a.g, hinv)) });
  if (lazy)
    atoms.push_back({ Rational(1, 2), Similarity::identity(mu.dim()) });
  return SimMeasure(std::move(atoms));
}

} // namespace selfsim
