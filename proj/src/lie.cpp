#include "selfsim/lie.hpp"
#include "selfsim/errors.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

namespace selfsim {

double LieVector::norm() const
{
  return std::sqrt(alpha.squaredNorm() + beta.squaredNorm());
}

LieVector LieVector::from_parts(double s, const Mat& W, const Vec& beta)
{
  int d = static_cast<int>(beta.size());
  if (W.rows() != d || W.cols() != d)
    throw InvalidInput("LieVector: shape mismatch");
  return { s * Mat::Identity(d, d) + 0.5 * (W - W.transpose()), beta };
}

int lie_dimension(int d)
{
  return d * (d + 1) / 2 + 1;
}

Vec psi(const Vec& x, const LieVector& u)
{
  return u.alpha * x + u.beta;
}

Similarity lie_exp(const LieVector& u)
{
  int d = u.dim();
  if (u.alpha.rows() != d || u.alpha.cols() != d)
    throw InvalidInput("lie_exp: shape mismatch");
  double s = u.alpha.trace() / d;
  Mat sym_rest = 0.5 * (u.alpha + u.alpha.transpose()) - s * Mat::Identity(d, d);
  if (sym_rest.norm() > 1e-12 * (1 + u.alpha.norm()))
    throw InvalidInput("lie_exp: alpha is not scalar plus antisymmetric");
  Mat emb = Mat::Zero(d + 1, d + 1);
  emb.topLeftCorner(d, d) = u.alpha;
  emb.topRightCorner(d, 1) = u.beta;
  Mat e = emb.exp();
  Mat lin = e.topLeftCorner(d, d);
  double rho = std::exp(s);
  Mat U = lin / rho;
  // remove the O(eps) drift from orthogonality before validation
  Eigen::JacobiSVD<Mat> svd(U, Eigen::ComputeFullU | Eigen::ComputeFullV);
  U = svd.matrixU() * svd.matrixV().transpose();
  return Similarity::numeric(rho, U, e.topRightCorner(d, 1));
}

TaylorCheck taylor_linearization_check(const std::vector<Similarity>& gs,
                                       const std::vector<LieVector>& us, const Vec& v,
                                       double r, double A)
{
  std::size_t n = gs.size();
  if (n == 0 || us.size() != n)
    throw InvalidInput("taylor check: need equally many maps and Lie vectors");
  if (!(r > 0 && r < 1))
    throw PreconditionFailed("taylor check: r must lie in (0, 1)");
  int d = static_cast<int>(v.size());
  if (v.norm() > A)
    throw PreconditionFailed("taylor check: |v| exceeds A");

  double prefix_rho = 1;
  for (std::size_t i = 0; i < n; ++i) {
    const Similarity& g = gs[i];
    if (g.dim() != d || us[i].dim() != d)
      throw InvalidInput("taylor check: dimension mismatch");
    if (!(g.rho_f() < 1))
      throw PreconditionFailed("taylor check: rho(g_" + std::to_string(i + 1) + ") >= 1");
    if (g.b_f().norm() > A)
      throw PreconditionFailed("taylor check: |b(g_" + std::to_string(i + 1) + ")| exceeds A");
    prefix_rho *= g.rho_f();
    double cap = r / prefix_rho;
    if (cap >= 1)
      throw PreconditionFailed("taylor check: rho(g_1...g_" + std::to_string(i + 1) +
                               ")^-1 r >= 1");
    if (us[i].norm() > cap * (1 + 1e-12))
      throw PreconditionFailed("taylor check: |u_" + std::to_string(i + 1) + "| too large");
  }

  // exact image, innermost first
  Vec x = v;
  for (std::size_t i = n; i-- > 0;)
    x = gs[i](us[i].norm() == 0 ? x : lie_exp(us[i])(x));

  // suffixes y_i = g_{i+1}...g_n v and prefixes g_1...g_i
  std::vector<Vec> suffix(n);
  Vec y = v;
  for (std::size_t i = n; i-- > 0;) {
    suffix[i] = y;
    y = gs[i](y);
  }
  Vec S = y;
  double rho = 1;
  Mat U = Mat::Identity(d, d);
  for (std::size_t i = 0; i < n; ++i) {
    rho *= gs[i].rho_f();
    U = U * gs[i].U_f();
    S += rho * (U * psi(suffix[i], us[i]));
  }

  TaylorCheck out;
  out.exact_image = x;
  out.linearized_sum = S;
  out.observed_error = (x - S).norm();
  out.scale = r * r / rho;
  out.ratio = out.observed_error / out.scale;
  return out;
}

} // namespace selfsim
