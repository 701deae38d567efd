#pragma once

#include "selfsim/quadratic.hpp"

#include <optional>
#include <vector>

namespace selfsim {

//! Dense row-major matrix over Q or a single Q(sqrt D).
struct ExactMatrix
{
  int rows = 0;
  int cols = 0;
  std::vector<QuadraticNumber> a;

  ExactMatrix() = default;
  ExactMatrix(int r, int c)
    : rows(r)
    , cols(c)
    , a(static_cast<std::size_t>(r) * c)
  {}
  ExactMatrix(int r, int c, std::vector<QuadraticNumber> entries);

  static ExactMatrix identity(int n);

  QuadraticNumber& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
  const QuadraticNumber& operator()(int i, int j) const
  {
    return a[static_cast<std::size_t>(i) * cols + j];
  }

  ExactMatrix transpose() const;
  friend ExactMatrix operator*(const ExactMatrix& x, const ExactMatrix& y);
  friend ExactMatrix operator+(const ExactMatrix& x, const ExactMatrix& y);
  friend ExactMatrix operator-(const ExactMatrix& x, const ExactMatrix& y);
  friend ExactMatrix operator*(const QuadraticNumber& s, const ExactMatrix& x);
  friend bool operator==(const ExactMatrix& x, const ExactMatrix& y)
  {
    return x.rows == y.rows && x.cols == y.cols && x.a == y.a;
  }
};

using ExactVector = std::vector<QuadraticNumber>;

ExactVector operator*(const ExactMatrix& m, const ExactVector& v);
ExactVector operator+(const ExactVector& x, const ExactVector& y);
ExactVector operator-(const ExactVector& x, const ExactVector& y);
ExactVector operator*(const QuadraticNumber& s, const ExactVector& v);

//! Rank by Gaussian elimination over the field.
int rank(ExactMatrix m);

//! Unique solution of m x = rhs, or nullopt when m is singular.
std::optional<ExactVector> solve(ExactMatrix m, ExactVector rhs);

//! Exact squared Euclidean norm.
QuadraticNumber squared_norm(const ExactVector& v);

//! Certified enclosure of the operator 2-norm. Exact closed forms are used for
//! sizes up to 2; larger sizes use a floating eigenvalue with a documented
//! relative widening of 1e-12.
Interval operator_norm_interval(const ExactMatrix& m);

} // namespace selfsim
