#pragma once

#include "selfsim/similarity.hpp"

#include <string>
#include <vector>

namespace selfsim {

//! Element u = (alpha, beta) of the Lie algebra of Sim(R^d): alpha is a
//! scalar multiple of I plus an antisymmetric matrix, beta a vector.
struct LieVector
{
  Mat alpha;
  Vec beta;

  //! sqrt(||alpha||_F^2 + |beta|^2).
  double norm() const;
  int dim() const { return static_cast<int>(beta.size()); }

  //! Builds alpha = s I + (W - W^T)/2 from an arbitrary W.
  static LieVector from_parts(double s, const Mat& W, const Vec& beta);
};

//! Dimension of the Lie algebra: d(d+1)/2 + 1.
int lie_dimension(int d);

//! Infinitesimal action psi_x(u) = alpha x + beta.
Vec psi(const Vec& x, const LieVector& u);

//! exp(u) via scaling and squaring on the (d+1)x(d+1) affine embedding.
Similarity lie_exp(const LieVector& u);

struct TaylorCheck
{
  Vec exact_image;      //!< g_1 exp(u_1) ... g_n exp(u_n) v
  Vec linearized_sum;   //!< g_1...g_n v + sum_i zeta_i(u_i)
  double observed_error; //!< |exact_image - linearized_sum|
  double scale;          //!< rho(g_1...g_n)^-1 r^2
  double ratio;          //!< observed_error / scale
};

//! Compares the composite x = g_1 exp(u_1) ... g_n exp(u_n) v with its
//! first-order expansion, where zeta_i is the derivative at u = 0 of
//! u -> g_1...g_i exp(u) g_{i+1}...g_n v.
//!
//! Preconditions (each reported separately through PreconditionFailed):
//! rho(g_i) < 1, |b(g_i)| <= A, |u_i| <= rho(g_1...g_i)^-1 r < 1, |v| <= A.
TaylorCheck taylor_linearization_check(const std::vector<Similarity>& gs,
                                       const std::vector<LieVector>& us, const Vec& v,
                                       double r, double A);

} // namespace selfsim
