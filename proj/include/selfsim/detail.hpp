#pragma once

#include "selfsim/walk.hpp"

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

namespace selfsim {

//! Lattice measure on R^d (d in {1, 2}): mass[i] sits at origin + h * index.
//! Indices are row-major with the last coordinate fastest.
struct GridMeasure
{
  int d = 1;
  Vec origin;
  double h = 0;
  std::vector<std::size_t> shape;
  std::vector<double> mass;

  //! Validates d, shape, nonnegative masses and total 1 within 1e-12.
  GridMeasure(Vec origin, double h, std::vector<std::size_t> shape, std::vector<double> mass);

  //! Samples a density on the lattice and normalizes the masses.
  template <class Density>
  static GridMeasure from_density(Vec origin, double h, std::vector<std::size_t> shape,
                                  Density f);

  std::size_t cells() const { return mass.size(); }
  Vec point(std::size_t flat) const;
};

//! Finite atomic measure: one atom per column of `points`.
struct DiscreteMeasure
{
  Mat points;
  std::vector<double> mass;

  //! Validates positive masses summing to 1 within 1e-12.
  DiscreteMeasure(Mat points, std::vector<double> mass);
  static DiscreteMeasure dirac(const Vec& x);
  static DiscreteMeasure from_samples(const SampleSet& s);

  int dim() const { return static_cast<int>(points.rows()); }
  std::size_t size() const { return mass.size(); }
};

using Measure = std::variant<GridMeasure, DiscreteMeasure>;

int dimension(const Measure& m);

//! nu_n = sum over words w of length n of p_w delta_(g_w(0)), an atomic
//! approximation of the stationary measure nu. Coupling nu = sum p_w g_w nu
//! with nu_n word by word gives
//! W1(nu_n, nu) <= (E rho)^n E|b| / (1 - E rho), infinite when E rho >= 1.
struct LevelMeasure
{
  DiscreteMeasure measure;
  int level = 0;
  double w1_bound = 0;
};

//! Throws BudgetExceeded when k^n > max_atoms.
LevelMeasure level_measure(const SimMeasure& mu, int n, std::size_t max_atoms = std::size_t(1) << 20);

//! Q(d) = Gamma(d/2) (d / 2e)^(-d/2) / 2.
double q_constant(int d);

//! Q'(d) = 4e / Q(d), the constant of the order-k to order-1 reduction.
double q_prime_constant(int d);

//! eta_y^(k)(x) = d^k/dy^k of the centred Gaussian density with covariance
//! y I, in the closed form (-1)^k k! y^-k L_k^(d/2-1)(|x|^2 / 2y) eta_y(x).
double heat_kernel_deriv(double y, int k, const Vec& x);

//! ||eta_1^(k)||_1 on R^d by adaptive radial quadrature between sign changes.
double heat_kernel_deriv_norm(int k, int d);

struct DetailOptions
{
  std::size_t max_cells = std::size_t(1) << 24; //!< evaluation grid budget
  std::size_t direct_budget = 100000000;       //!< atoms x grid points for direct sums
  int threads = 0;
};

struct DetailValue
{
  double raw = 0;           //!< before clipping
  double value = 0;         //!< clipped to [0, 1]
  double error = 0;         //!< discretization or quadrature error estimate
  double sampling_bias = 0; //!< sample sets only: half the spacing-to-r ratio
};

//! s_r^(k)(lambda) = r^(2k) Q(d)^k ||lambda * eta_(k r^2)^(k)||_1.
//!
//! 1D atoms: exact antiderivatives between the sign changes of the density.
//! Grids: FFT on the lattice (cell width must be <= r / 20). 2D atoms: direct
//! kernel sums on a grid of width <= r / 20 (binned to a grid above the
//! direct budget). Throws BudgetExceeded with the required cell count when
//! the padded window does not fit.
DetailValue order_k_detail(const Measure& m, double r, int k, const DetailOptions& opt = {});
DetailValue detail(const Measure& m, double r, const DetailOptions& opt = {});
//! Sample sets are treated as their empirical measure.
DetailValue detail(const SampleSet& s, double r, int k = 1, const DetailOptions& opt = {});

struct DetailScanEntry
{
  double r;
  DetailValue s;
};

//! s_r^(k) on a geometric grid of `count` scales from r_max down to r_min.
std::vector<DetailScanEntry> scan_detail(const Measure& m, double r_max, double r_min, int count,
                                         int k = 1, const DetailOptions& opt = {});

//! Convolution: exact for atoms (merging points closer than 1e-12 relative,
//! budget 10^7 atoms), FFT for grids of equal cell width; atoms against a
//! grid are binned linearly onto that grid first.
Measure convolve(const Measure& a, const Measure& b);
Measure convolve(const std::vector<Measure>& ms);

struct ProductCheck
{
  double lhs;   //!< s_r^(k)(lambda_1 * ... * lambda_k)
  double rhs;   //!< s_r(lambda_1) ... s_r(lambda_k)
  double slack; //!< rhs - lhs
  double error; //!< combined numerical error estimate
  bool holds;   //!< lhs <= rhs + error + 1e-9
};

ProductCheck check_product_bound(const std::vector<Measure>& ms, double r,
                                 const DetailOptions& opt = {});

struct StrongProductCheck
{
  double bound;    //!< Q'(d)^(k-1) (alpha^k + k! k a^2 / b^2)
  double observed; //!< s_(a sqrt k) of the convolution
  bool premise_ok; //!< s_r(lambda_i) <= alpha on the whole r-grid
  struct Failure
  {
    std::size_t index;
    double r;
    double value;
  };
  std::vector<Failure> failures;
  bool holds; //!< premise_ok implies observed <= bound
};

//! Checks the premise s_r(lambda_i) <= alpha on `grid` geometric points of
//! [a, b], then compares the strong product bound with the observed detail.
StrongProductCheck check_strong_product(const std::vector<Measure>& ms, double a, double b,
                                        double alpha, int grid = 8,
                                        const DetailOptions& opt = {});

struct WassersteinCheck
{
  double delta;  //!< |s_r^(k)(lambda_1) - s_r^(k)(lambda_2)|
  double w1;     //!< W1 or an upper bound on it
  bool w1_exact; //!< false when w1 is a coupling upper bound
  double bound;  //!< e d W1 / r
  double error;
  bool holds;
};

//! W1 is exact in d = 1. In d = 2 the index coupling of equally sized,
//! equally weighted atom lists gives an upper bound; anything else throws
//! Unsupported (projections only bound W1 from below).
WassersteinCheck check_wasserstein_lipschitz(const Measure& a, const Measure& b, double r, int k,
                                             const DetailOptions& opt = {});

//! W1 between two measures on R (grids are taken as lattice atoms).
double wasserstein1(const Measure& a, const Measure& b);

struct PsdPartition
{
  std::vector<std::vector<std::size_t>> parts;
  std::vector<Mat> sums;
  std::vector<double> min_eigenvalue; //!< per part
  double objective = 0;               //!< sum_j ||S'_j||_F^2 on whitened matrices
  double C = 0;                       //!< lambda_min(sum A_i) / k
  double c = 0;                       //!< max ||A_i||
  double guarantee = 0;               //!< C - d sqrt(2 c C) - 2 d^(3/2) c
  bool bound_holds = false;           //!< every min eigenvalue >= guarantee
  //! max_j ||S'_j - C I||_F on whitened matrices, and the bound
  //! d sqrt(2 c C) + 2 d^(3/2) c that any single-move local minimum satisfies.
  double deviation = 0;
  double deviation_bound = 0;
  std::size_t moves = 0;              //!< improving moves made
  bool exact = false;                 //!< objective is the global minimum
};

//! Minimizes Sigma_j ||S'_j||_F^2 over partitions of the whitened matrices
//! A'_i = Q A_i Q (Q = sqrt(C k) M^(-1/2), M = sum A_i). When k^n <= 2^20
//! the minimum is found exactly by enumeration up to relabelling of parts.
//! Otherwise: local search from the round-robin start, with first-improvement
//! single moves and pair swaps in a fixed scan order until the objective stops
//! strictly decreasing. A single-move local minimum is all the balancing
//! argument needs.
PsdPartition partition_psd(const std::vector<Mat>& As, int k);

//! Sigma_j ||S_j||_F^2 of a given assignment (part index per matrix) after
//! whitening; used by tests to brute-force small instances.
double partition_objective(const std::vector<Mat>& As, int k,
                           const std::vector<int>& assignment);

struct SmallRvCheck
{
  double observed;               //!< s_r^(k)(X_1 + ... + X_n)
  double target;                 //!< product of the per-part alpha_j
  std::vector<double> alpha;     //!< r^2/(r^2+Var_j) + e W1(S_j, N_j) / r per part
  std::vector<double> variance;  //!< Var of each part
  double gaussian_reference;     //!< (r^2 / (r^2 + Var / k))^k
  std::vector<std::vector<std::size_t>> parts;
  bool exact;                    //!< sums convolved exactly
  bool holds;                    //!< observed <= target + error
  double error;
};

//! Independent real random variables with |X_i| <= r / C and
//! sum Var X_i >= C k r^2. Throws PreconditionFailed otherwise. The variables
//! are split into k parts by partition_psd on their variances.
SmallRvCheck small_rv_detail_check(const std::vector<Law1D>& xs, double r, int k, double C,
                                   std::uint64_t seed = 0, const DetailOptions& opt = {});

template <class Density>
GridMeasure GridMeasure::from_density(Vec origin, double h, std::vector<std::size_t> shape,
                                      Density f)
{
  std::size_t n = 1;
  for (auto s : shape)
    n *= s;
  std::vector<double> m(n);
  double total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    Vec x = origin;
    std::size_t rest = i;
    for (int a = static_cast<int>(shape.size()) - 1; a >= 0; --a) {
      x(a) += h * static_cast<double>(rest % shape[a]);
      rest /= shape[a];
    }
    m[i] = f(x);
    total += m[i];
  }
  for (auto& v : m)
    v /= total;
  return GridMeasure(std::move(origin), h, std::move(shape), std::move(m));
}

} // namespace selfsim
