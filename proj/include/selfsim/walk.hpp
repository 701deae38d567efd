#pragma once

#include "selfsim/rng.hpp"
#include "selfsim/similarity.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace selfsim {

//! Empirical measure on R^d: one point per column, optional weights.
struct SampleSet
{
  Mat points;                 //!< d x N
  std::vector<double> weights; //!< empty means uniform
  std::uint64_t seed = 0;
  long steps = 0;             //!< fixed step count, or 0 when adaptive
  double mean_steps = 0;      //!< average number of atoms drawn per point

  int dim() const { return static_cast<int>(points.rows()); }
  std::size_t size() const { return static_cast<std::size_t>(points.cols()); }
  double weight(std::size_t i) const
  {
    return weights.empty() ? 1.0 / static_cast<double>(size()) : weights[i];
  }
};

SampleSet make_sample_set(Mat points, std::vector<double> weights = {});

//! One point per row, comma separated, 17 significant digits.
void write_csv(std::ostream& os, const SampleSet& s);

//! Draws an atom index with probability p_i.
class AtomSampler
{
public:
  explicit AtomSampler(const SimMeasure& mu);
  std::size_t operator()(CounterRng& rng) const;

private:
  std::vector<double> cumulative_;
};

struct SampleOptions
{
  long steps = 0;         //!< 0: stop each point once rho(q_n) <= 1e-12
  std::uint64_t seed = 0;
  int threads = 0;        //!< 0: default_threads()
};

//! Approximate i.i.d. draws from the stationary measure nu by backward
//! iteration x = g_1 g_2 ... g_N(0). Point i uses RNG stream i.
//! Throws PreconditionFailed when chi >= 0.
SampleSet sample_stationary(const SimMeasure& mu, std::size_t count, const SampleOptions& opt);

struct StoppedWord
{
  std::vector<std::size_t> indices;
  long tau = 0;
  double rho = 1; //!< rho(q_tau)
  Mat U;          //!< U(q_tau)
};

//! First n >= 1 with rho(g_1...g_n) <= kappa. Throws PreconditionFailed when
//! chi >= 0.
StoppedWord stopped_walk(const SimMeasure& mu, double kappa, CounterRng& rng);

struct Estimate
{
  double value;
  double std_error;
  std::size_t samples;
};

struct MixingConfig
{
  double kappa = 1e-3;
  long T = 0;
  std::size_t samples = 10000;
  std::uint64_t seed = 0;
  int threads = 0;
};

//! Monte Carlo estimate of E |x . U(q_{tau_kappa + F}) y|^2 with F uniform
//! on {0, ..., T}.
Estimate well_mixing_estimate(const SimMeasure& mu, const MixingConfig& cfg, const Vec& x,
                              const Vec& y);

//! Affine subspace y + W with W the orthogonal complement of `normals`.
struct Slab
{
  std::vector<Vec> normals;
  Vec offset;
};

struct NonDegConfig
{
  double theta = 0.1;
  double A = 10;
  std::vector<Slab> slabs;
  std::size_t samples = 10000;
  std::uint64_t seed = 0;
  int threads = 0;
};

struct NonDegResult
{
  std::vector<Estimate> per_slab;
  Estimate sup; //!< the slab with the largest mass
};

//! Empirical nu-mass of {x : |x - (y + W)| < theta or |x| >= A}.
NonDegResult non_degeneracy_estimate(const SimMeasure& mu, const NonDegConfig& cfg);
//! Same estimator on an existing sample.
Estimate slab_mass(const SampleSet& s, const Slab& slab, double theta, double A);

struct TailEstimate
{
  double slope = 0;
  bool compact_support = false;
};

//! Least-squares slope of log nu(|x| >= R) against log R over the upper
//! decile. Throws InvalidInput on fewer than 1000 points and
//! PreconditionFailed when all points coincide.
TailEstimate tail_exponent_estimate(const SampleSet& s);

enum class W1Mode
{
  exact1d,
  sliced,
  projection_sup
};

//! 1D W1 of weighted empirical laws: integral of |F_a - F_b|.
double wasserstein1_1d(std::vector<double> a, std::vector<double> wa, std::vector<double> b,
                       std::vector<double> wb);

//! Directions used by the projection modes: 64 quasi-uniform unit vectors
//! plus the coordinate axes.
std::vector<Vec> projection_directions(int d);

//! Empirical W1; projection_sup is a lower bound for the supremum over all
//! one-dimensional projections.
double wasserstein1(const SampleSet& a, const SampleSet& b, W1Mode mode);

//! Finite law on R.
struct Law1D
{
  std::vector<double> values;
  std::vector<double> probs;

  double mean() const;
  double second_moment() const;
  double third_abs_moment() const;
  double bound() const; //!< max |value|
};

//! W1 between a finite law and N(mean, sd^2), by exact integration of
//! |F - Phi| between atoms.
double wasserstein1_to_normal(const Law1D& law, double mean, double sd);

//! Law of X_1 + ... + X_n for independent finite laws: exact convolution
//! (values within 1e-12 relative merged) while the support stays below
//! `max_support`, else the empirical law of `samples` Monte Carlo draws.
Law1D sum_law(const std::vector<Law1D>& laws, std::uint64_t seed, std::size_t samples = 200000,
              std::size_t max_support = 2000000, bool* exact = nullptr);

struct BerryEsseenResult
{
  double w1;          //!< W1(S, N(0, omega^2))
  double delta;       //!< max_i sup |X_i|
  double ratio_delta; //!< w1 / delta
  double lyapunov_ratio; //!< sum gamma_i^3 / sum omega_i^2
  double variance;    //!< omega^2
  bool exact;         //!< true when the law of S was convolved exactly
};

//! W1 between S = X_1 + ... + X_n (X_i distributed as increments[i mod m])
//! and the centred Gaussian of equal variance. The law of S is convolved
//! exactly while its support stays below `max_support`, else estimated from
//! `samples` Monte Carlo draws.
BerryEsseenResult berry_esseen_distance(const std::vector<Law1D>& increments, std::size_t n,
                                        std::uint64_t seed, std::size_t samples = 200000,
                                        std::size_t max_support = 2000000);

} // namespace selfsim
