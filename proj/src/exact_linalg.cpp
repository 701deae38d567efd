#include "selfsim/exact_linalg.hpp"
#include "selfsim/errors.hpp"

#include <Eigen/Eigenvalues>

namespace selfsim {

ExactMatrix::ExactMatrix(int r, int c, std::vector<QuadraticNumber> entries)
  : rows(r)
  , cols(c)
  , a(std::move(entries))
{
  if (a.size() != static_cast<std::size_t>(r) * c)
    throw InvalidInput("ExactMatrix: entry count does not match shape");
}

ExactMatrix ExactMatrix::identity(int n)
{
  ExactMatrix m(n, n);
  for (int i = 0; i < n; ++i)
    m(i, i) = 1;
  return m;
}

ExactMatrix ExactMatrix::transpose() const
{
  ExactMatrix t(cols, rows);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      t(j, i) = (*this)(i, j);
  return t;
}

ExactMatrix operator*(const ExactMatrix& x, const ExactMatrix& y)
{
  if (x.cols != y.rows)
    throw InvalidInput("ExactMatrix: shape mismatch in product");
  ExactMatrix m(x.rows, y.cols);
  for (int i = 0; i < x.rows; ++i)
    for (int k = 0; k < x.cols; ++k) {
      const QuadraticNumber& xik = x(i, k);
      if (xik.is_zero())
        continue;
      for (int j = 0; j < y.cols; ++j)
        if (!y(k, j).is_zero())
          m(i, j) += xik * y(k, j);
    }
  return m;
}

ExactMatrix operator+(const ExactMatrix& x, const ExactMatrix& y)
{
  if (x.rows != y.rows || x.cols != y.cols)
    throw InvalidInput("ExactMatrix: shape mismatch in sum");
  ExactMatrix m = x;
  for (std::size_t i = 0; i < m.a.size(); ++i)
    m.a[i] += y.a[i];
  return m;
}

ExactMatrix operator-(const ExactMatrix& x, const ExactMatrix& y)
{
  if (x.rows != y.rows || x.cols != y.cols)
    throw InvalidInput("ExactMatrix: shape mismatch in difference");
  ExactMatrix m = x;
  for (std::size_t i = 0; i < m.a.size(); ++i)
    m.a[i] -= y.a[i];
  return m;
}

ExactMatrix operator*(const QuadraticNumber& s, const ExactMatrix& x)
{
  ExactMatrix m = x;
  for (auto& e : m.a)
    e *= s;
  return m;
}

ExactVector operator*(const ExactMatrix& m, const ExactVector& v)
{
  if (static_cast<int>(v.size()) != m.cols)
    throw InvalidInput("ExactMatrix: shape mismatch in matrix-vector product");
  ExactVector out(m.rows);
  for (int i = 0; i < m.rows; ++i)
    for (int j = 0; j < m.cols; ++j)
      if (!m(i, j).is_zero() && !v[j].is_zero())
        out[i] += m(i, j) * v[j];
  return out;
}

ExactVector operator+(const ExactVector& x, const ExactVector& y)
{
  if (x.size() != y.size())
    throw InvalidInput("vector length mismatch");
  ExactVector out(x);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] += y[i];
  return out;
}

ExactVector operator-(const ExactVector& x, const ExactVector& y)
{
  if (x.size() != y.size())
    throw InvalidInput("vector length mismatch");
  ExactVector out(x);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] -= y[i];
  return out;
}

ExactVector operator*(const QuadraticNumber& s, const ExactVector& v)
{
  ExactVector out(v);
  for (auto& e : out)
    e *= s;
  return out;
}

namespace {

//! Row echelon form in place; returns the pivot columns.
std::vector<int> eliminate(ExactMatrix& m, ExactVector* rhs)
{
  std::vector<int> pivots;
  int row = 0;
  for (int col = 0; col < m.cols && row < m.rows; ++col) {
    int piv = -1;
    for (int i = row; i < m.rows; ++i)
      if (!m(i, col).is_zero()) {
        piv = i;
        break;
      }
    if (piv < 0)
      continue;
    if (piv != row) {
      for (int j = 0; j < m.cols; ++j)
        std::swap(m(piv, j), m(row, j));
      if (rhs)
        std::swap((*rhs)[piv], (*rhs)[row]);
    }
    QuadraticNumber inv = m(row, col).inverse();
    for (int j = col; j < m.cols; ++j)
      m(row, j) *= inv;
    if (rhs)
      (*rhs)[row] *= inv;
    for (int i = 0; i < m.rows; ++i) {
      if (i == row || m(i, col).is_zero())
        continue;
      QuadraticNumber f = m(i, col);
      for (int j = col; j < m.cols; ++j)
        if (!m(row, j).is_zero())
          m(i, j) -= f * m(row, j);
      if (rhs)
        (*rhs)[i] -= f * (*rhs)[row];
    }
    pivots.push_back(col);
    ++row;
  }
  return pivots;
}

} // namespace

int rank(ExactMatrix m)
{
  return static_cast<int>(eliminate(m, nullptr).size());
}

std::optional<ExactVector> solve(ExactMatrix m, ExactVector rhs)
{
  if (m.rows != m.cols || static_cast<int>(rhs.size()) != m.rows)
    throw InvalidInput("solve: square system expected");
  auto pivots = eliminate(m, &rhs);
  if (static_cast<int>(pivots.size()) < m.cols)
    return std::nullopt;
  return rhs;
}

QuadraticNumber squared_norm(const ExactVector& v)
{
  QuadraticNumber s;
  for (const auto& e : v)
    s += e * e;
  return s;
}

Interval operator_norm_interval(const ExactMatrix& m)
{
  ExactMatrix g = m.transpose() * m;
  int n = g.rows;
  if (n == 0)
    return Interval(0.0);
  Interval lambda;
  if (n == 1) {
    lambda = g(0, 0).to_interval();
  } else if (n == 2) {
    // largest eigenvalue of [[p, q], [q, s]]
    QuadraticNumber half_diff = (g(0, 0) - g(1, 1)) / QuadraticNumber(2);
    QuadraticNumber disc = half_diff * half_diff + g(0, 1) * g(0, 1);
    Interval mean = ((g(0, 0) + g(1, 1)) / QuadraticNumber(2)).to_interval();
    lambda = mean + sqrt(disc.to_interval());
  } else {
    Eigen::MatrixXd gf(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        gf(i, j) = g(i, j).to_double();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gf, Eigen::EigenvaluesOnly);
    double top = es.eigenvalues().maxCoeff();
    double slack = 1e-12 * (1.0 + std::abs(top));
    lambda = Interval(top - slack, top + slack);
  }
  Interval clipped(std::max(0.0, lambda.lo()), std::max(0.0, lambda.hi()));
  return sqrt(clipped);
}

} // namespace selfsim
