#pragma once

#include "selfsim/exact_linalg.hpp"
#include "selfsim/interval.hpp"
#include "selfsim/quadratic.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace selfsim {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

//! A map x -> rho U x + b on R^d with rho > 0 and U orthogonal.
//!
//! Exact maps store rho, U and b in Q or one Q(sqrt D) and always carry a
//! double shadow. Numeric maps (e.g. rotation by an angle with no exact form)
//! have only the shadow and are rejected by every exact operation.
class Similarity
{
public:
  //! Exact map. Validates rho > 0 and U^T U = I exactly.
  Similarity(QuadraticNumber rho, ExactMatrix U, ExactVector b);
  //! One-dimensional exact map x -> rho x + b (sign of rho encodes U = -1).
  static Similarity affine1d(const QuadraticNumber& scale, const QuadraticNumber& b);
  //! Float-only map. Validates orthogonality to 1e-12.
  static Similarity numeric(double rho, Mat U, Vec b);
  static Similarity identity(int d);

  int dim() const { return static_cast<int>(bf_.size()); }
  bool is_exact() const { return exact_.has_value(); }

  //! Exact data; throw Unsupported on numeric maps.
  const QuadraticNumber& rho() const;
  const ExactMatrix& U() const;
  const ExactVector& b() const;
  //! Radicand of the common field (0 for Q).
  long long radicand() const;

  double rho_f() const { return rhof_; }
  const Mat& U_f() const { return Uf_; }
  const Vec& b_f() const { return bf_; }

  Vec operator()(const Vec& x) const;
  ExactVector operator()(const ExactVector& x) const;

  Similarity inverse() const;

  //! Exact equality for exact maps; bitwise shadow equality otherwise.
  friend bool operator==(const Similarity& g, const Similarity& h);
  friend bool operator!=(const Similarity& g, const Similarity& h) { return !(g == h); }
  std::size_t hash() const;

  //! "rho=...; U=[..;..]; b=[..]" in the exact-number syntax.
  std::string to_string() const;

private:
  struct Exact
  {
    QuadraticNumber rho;
    ExactMatrix U;
    ExactVector b;
    long long radicand = 0;
  };
  Similarity() = default;
  void fill_shadow();

  std::optional<Exact> exact_;
  double rhof_ = 1;
  Mat Uf_;
  Vec bf_;
};

//! (g o h)(x) = g(h(x)).
Similarity compose(const Similarity& g, const Similarity& h);
inline Similarity operator*(const Similarity& g, const Similarity& h) { return compose(g, h); }

//! d(g,h) = |log rho_g - log rho_h| + ||U_g - U_h||_op + |b_g - b_h|.
double group_metric(const Similarity& g, const Similarity& h);
//! Certified enclosure of group_metric; exact pairs get a rigorous interval,
//! numeric pairs a float interval widened by 1e-12 relative.
Interval group_metric_interval(const Similarity& g, const Similarity& h);

struct Atom
{
  Rational p;
  Similarity g;
};

//! Finitely supported probability measure on Sim(R^d).
class SimMeasure
{
public:
  //! Validates positive probabilities summing exactly to 1 and a common d.
  explicit SimMeasure(std::vector<Atom> atoms);

  int dim() const { return atoms_.front().g.dim(); }
  std::size_t size() const { return atoms_.size(); }
  const std::vector<Atom>& atoms() const { return atoms_; }
  const Atom& operator[](std::size_t i) const { return atoms_[i]; }
  bool is_exact() const;

private:
  std::vector<Atom> atoms_;
};

enum class Contraction
{
  contracting,                 //!< every atom has rho < 1
  contracting_on_average,      //!< chi < 0, no atom expands, some has rho = 1
  only_contracting_on_average, //!< chi < 0 and some atom has rho > 1
  not_contracting              //!< chi >= 0
};

std::string to_string(Contraction c);

struct Lyapunov
{
  double value;
  Interval enclosure;
  Contraction kind;
};

//! chi = sum_i p_i log rho_i with an enclosure; the sign of chi is decided
//! exactly when the enclosure straddles 0.
Lyapunov lyapunov_exponent(const SimMeasure& mu);

//! Unique solution of x = rho U x + b; throws PreconditionFailed when
//! rho U has eigenvalue 1.
ExactVector fixed_point(const Similarity& g);
Vec fixed_point_f(const Similarity& g);

//! True iff every atom has the same fixed point (compared exactly).
bool has_common_fixed_point(const SimMeasure& mu);

//! True iff the only symmetric matrices commuting with all Us are scalar.
bool is_irreducible(const std::vector<ExactMatrix>& Us);
//! Float variant with a 1e-9 relative rank tolerance.
bool is_irreducible(const std::vector<Mat>& Us);
//! Irreducibility of the rotation parts of mu's atoms.
bool is_irreducible(const SimMeasure& mu);

//! mu_h = sum p_i delta_{h g_i h^-1}; lazy adds half a unit mass at the
//! identity (and halves the rest).
SimMeasure conjugate_measure(const SimMeasure& mu, const Similarity& h, bool lazy);

//! Exact check that U^T U = I.
bool is_orthogonal(const ExactMatrix& U);

} // namespace selfsim
