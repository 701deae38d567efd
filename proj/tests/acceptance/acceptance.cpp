// Acceptance suite: one PASS/FAIL line per criterion.
//
// Usage: acceptance [id ...]   (no ids runs all fourteen)
//
// Every tolerance is a named constant in the criterion's function. Runtime
// limits count toward the verdict.

#include "selfsim/criteria.hpp"
#include "selfsim/detail.hpp"
#include "selfsim/entropy.hpp"
#include "selfsim/lie.hpp"
#include "selfsim/separation.hpp"
#include "selfsim/walk.hpp"

#include "test_support.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/random/normal_distribution.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

using namespace selfsim;
using namespace selfsim::testing;

namespace {

constexpr double pi = 3.14159265358979323846;
constexpr double euler_e = 2.71828182845904523536;

struct Outcome
{
  bool ok;
  std::string detail;
};

struct Criterion
{
  int id;
  const char* name;
  double limit_seconds;
  std::function<Outcome()> run;
};

template <class... T>
std::string fmt(const char* f, T... args)
{
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double gauss(CounterRng& rng)
{
  boost::random::normal_distribution<double> n;
  return n(rng);
}

//! Lattice samples of the Gaussian density with covariance y I on +-10 sqrt(y).
GridMeasure gaussian_grid(int d, double y, double h)
{
  double half = 10 * std::sqrt(y);
  std::size_t n = static_cast<std::size_t>(std::ceil(2 * half / h)) + 1;
  Vec origin = Vec::Constant(d, -h * static_cast<double>(n - 1) / 2);
  return GridMeasure::from_density(origin, h, std::vector<std::size_t>(d, n),
                                   [&](const Vec& x) { return std::exp(-x.squaredNorm() / (2 * y)); });
}

DiscreteMeasure random_atoms(CounterRng& rng, int d, int count, double spread)
{
  Mat p(d, count);
  std::vector<double> m(static_cast<std::size_t>(count));
  double total = 0;
  for (int j = 0; j < count; ++j) {
    for (int i = 0; i < d; ++i)
      p(i, j) = spread * (2 * rng.uniform01() - 1);
    m[static_cast<std::size_t>(j)] = 0.1 + rng.uniform01();
    total += m[static_cast<std::size_t>(j)];
  }
  for (auto& x : m)
    x /= total;
  return DiscreteMeasure(p, m);
}

//! A few Gaussian bumps plus a uniform floor on a lattice of width h.
GridMeasure random_grid(CounterRng& rng, int d, double h, std::size_t n)
{
  int bumps = 1 + static_cast<int>(rng.below(3));
  std::vector<Vec> centers;
  std::vector<double> widths, weights;
  double extent = h * static_cast<double>(n - 1);
  for (int b = 0; b < bumps; ++b) {
    Vec c(d);
    for (int i = 0; i < d; ++i)
      c(i) = extent * (0.2 + 0.6 * rng.uniform01());
    centers.push_back(c);
    widths.push_back(extent * (0.02 + 0.1 * rng.uniform01()));
    weights.push_back(0.2 + rng.uniform01());
  }
  double floor = 0.05 * rng.uniform01();
  return GridMeasure::from_density(Vec::Zero(d), h, std::vector<std::size_t>(d, n),
                                   [&](const Vec& x) {
                                     double v = floor;
                                     for (int b = 0; b < bumps; ++b)
                                       v += weights[b] * std::exp(-(x - centers[b]).squaredNorm() /
                                                                  (2 * widths[b] * widths[b]));
                                     return v;
                                   });
}

SimMeasure bernoulli_measure(const QuadraticNumber& lambda)
{
  return SimMeasure({ { Rational(1, 2), map1d(lambda, q(1)) },
                      { Rational(1, 2), map1d(lambda, q(-1)) } });
}

SimMeasure inhom_family(long long n)
{
  FamilySpec spec;
  spec.tag = FamilyTag::inhom1d;
  spec.n = n;
  return generate_family(spec);
}

// ---------------------------------------------------------------------------

Outcome gaussian_closed_form()
{
  constexpr double tol = 0.02;
  double worst = 0;
  for (int d = 1; d <= 2; ++d)
    for (double r : { 0.05, 0.1, 0.5 })
      for (double f : { 0.25, 1.0, 4.0 }) {
        double y = f * r * r;
        GridMeasure g = gaussian_grid(d, y, std::min(r / 20, std::sqrt(y) / 10));
        double expect = r * r / (r * r + y);
        worst = std::max(worst, std::abs(detail(Measure(g), r).value - expect) / expect);
      }
  return { worst <= tol, fmt("18 cases, max relative error %.3g <= %.3g", worst, tol) };
}

Outcome detail_bounds()
{
  constexpr int instances = 200;
  constexpr double conv_tol = 1e-6;
  constexpr double range_tol = 1e-9; // rounding in the raw value
  CounterRng rng(1002, 0);
  int violations = 0;
  double worst_excess = -std::numeric_limits<double>::infinity();
  double lo = 1, hi = 0;
  for (int t = 0; t < instances; ++t) {
    int d = 1 + t % 2;
    double r = 0.05 + 0.45 * rng.uniform01();
    std::vector<Measure> ab;
    if (t % 4 < 2) {
      for (int i = 0; i < 2; ++i)
        ab.emplace_back(random_atoms(rng, d, 1 + static_cast<int>(rng.below(5)), 1.0));
    } else {
      double h = r / 20;
      std::size_t n = d == 1 ? 200 + rng.below(200) : 40 + rng.below(30);
      for (int i = 0; i < 2; ++i)
        ab.emplace_back(random_grid(rng, d, h, n));
    }
    const Measure &a = ab[0], &b = ab[1];
    DetailValue sa = detail(a, r), sb = detail(b, r), sab = detail(convolve(a, b), r);
    for (const DetailValue* v : { &sa, &sb, &sab }) {
      lo = std::min(lo, v->raw);
      hi = std::max(hi, v->raw);
      if (v->raw < -range_tol || v->raw > 1 + range_tol)
        ++violations;
    }
    double excess = sab.raw - sa.raw;
    worst_excess = std::max(worst_excess, excess);
    if (excess > conv_tol)
      ++violations;
  }
  return { violations == 0,
           fmt("%d measures, s_r in [%.3g, %.3g], max s_r(a*b) - s_r(a) = %.3g <= %.0e, violations %d",
               instances, lo, hi, worst_excess, conv_tol, violations) };
}

Outcome product_bound()
{
  constexpr int instances = 50;
  constexpr double tol = 1e-6;
  CounterRng rng(1003, 0);
  int violations = 0;
  double worst = -std::numeric_limits<double>::infinity();
  for (int t = 0; t < instances; ++t) {
    double r = 0.05 + 0.3 * rng.uniform01();
    std::vector<Measure> ms;
    for (int i = 0; i < 3; ++i) {
      if (t % 5 == 4)
        ms.emplace_back(random_grid(rng, 1, r / 20, 100 + rng.below(100)));
      else
        ms.emplace_back(random_atoms(rng, 1, 2 + static_cast<int>(rng.below(3)), 0.5));
    }
    ProductCheck c = check_product_bound(ms, r);
    worst = std::max(worst, c.lhs - c.rhs);
    if (c.lhs > c.rhs + tol)
      ++violations;
  }
  return { violations == 0, fmt("%d triples (k = 3), max lhs - rhs = %.3g <= %.0e", instances,
                                worst, tol) };
}

Outcome wasserstein_lipschitz()
{
  constexpr int instances = 50;
  constexpr double tol = 1e-6;
  constexpr double w1_tol = 1e-9; // W1 of a shift is the shift
  CounterRng rng(1004, 0);
  int violations = 0;
  double worst = -std::numeric_limits<double>::infinity();
  for (int t = 0; t < instances; ++t) {
    double r = 0.05 + 0.95 * rng.uniform01();
    int k = 1 + t % 3;
    std::vector<Measure> ab;
    double shift;
    if (t % 5 == 4) {
      GridMeasure g = random_grid(rng, 1, r / 40, 150);
      shift = g.h * static_cast<double>(1 + rng.below(20));
      ab.emplace_back(GridMeasure(g.origin.array() + shift, g.h, g.shape, g.mass));
      ab.emplace_back(std::move(g));
      std::swap(ab[0], ab[1]);
    } else {
      DiscreteMeasure m = random_atoms(rng, 1, 2 + static_cast<int>(rng.below(5)), 0.5);
      shift = 0.3 * rng.uniform01();
      ab.emplace_back(DiscreteMeasure(m.points.array() + shift, m.mass));
      ab.emplace_back(std::move(m));
      std::swap(ab[0], ab[1]);
    }
    const Measure &a = ab[0], &b = ab[1];
    WassersteinCheck w = check_wasserstein_lipschitz(a, b, r, k);
    double bound = euler_e * 1 * shift / r;
    worst = std::max(worst, w.delta - bound);
    if (w.delta > bound + tol || std::abs(w.w1 - shift) > w1_tol * std::max(1.0, shift))
      ++violations;
  }
  return { violations == 0, fmt("%d shifted pairs, k in {1,2,3}, max |ds| - e W1 / r = %.3g <= %.0e",
                                instances, worst, tol) };
}

Outcome pingpong_entropy()
{
  SimMeasure mu = inhom_family(1000);
  FreenessCertificate c = padic_pingpong_certify(mu[0].g, mu[1].g, 2);
  WordEnumeration e = enumerate_convolution(mu, 10);
  EntropyBound h = entropy_bound(mu, 10);
  bool exact_h = h.method == EntropyMethod::exact_free && h.lower && *h.lower == std::log(2.0) &&
                 h.upper == std::log(2.0);
  bool ok = c.certified && c.prime == 2 && e.elements.size() == 1024 && exact_h;
  return { ok, fmt("p=2 certificate %s, %zu distinct words at level 10, h = %.17g (%s)",
                   c.certified ? "verified" : "REJECTED", e.elements.size(),
                   h.lower ? *h.lower : NAN, to_string(h.method).c_str()) };
}

Outcome golden_collision()
{
  constexpr double tol = 1e-9;
  constexpr double literal = 0.635420;
  QuadraticNumber lambda(Rational(-1, 2), Rational(1, 2), 5); // (sqrt 5 - 1) / 2
  SimMeasure mu = bernoulli_measure(lambda);
  WordEnumeration e = enumerate_convolution(mu, 3);
  double rate = e.entropy() / 3;

  // brute force: all 8 words, g_a g_b g_c(0) = a + lambda b + lambda^2 c
  std::map<std::string, int> counts;
  for (int w = 0; w < 8; ++w) {
    QuadraticNumber x = q(0), scale = q(1);
    for (int i = 0; i < 3; ++i) {
      x = x + scale * q((w >> i) & 1 ? 1 : -1);
      scale = scale * lambda;
    }
    ++counts[x.to_string()];
  }
  double oracle = 0;
  for (const auto& [key, c] : counts) {
    double p = c / 8.0;
    oracle -= p * std::log(p);
  }
  oracle /= 3;
  double closed = 11.0 / 12.0 * std::log(2.0); // 6 masses 1/8, one mass 1/4
  bool ok = e.elements.size() == 7 && counts.size() == 7 && std::abs(rate - oracle) <= tol &&
            std::abs(rate - closed) <= tol;
  return { ok, fmt("%zu distinct words (brute force %zu), H/3 = %.10f, oracle %.10f, "
                   "11/12 log 2 = %.10f, |diff| <= %.0e; printed literal %.6f differs by %.2e",
                   e.elements.size(), counts.size(), rate, oracle, closed, tol, literal,
                   std::abs(rate - literal)) };
}

Outcome separation_consistency()
{
  constexpr double width_tol = 1e-9;
  SimMeasure mu = bernoulli_measure(q(1, 2));
  SeparationProfile prof = exact_separation(mu, 8);
  SeparationBound bound = height_separation_bound(mu);
  const Interval& M1 = *prof.levels.at(0).M;
  double target = std::log(2.0) + 1;
  bool m1_ok = M1.lo() <= target && target <= M1.hi() && M1.width() <= width_tol;
  int bad = 0;
  double min_slack = std::numeric_limits<double>::infinity();
  for (const auto& l : prof.levels) {
    double slack = bound.at_level(l.n) - l.S->hi();
    min_slack = std::min(min_slack, slack);
    if (slack < 0)
      ++bad;
  }
  return { m1_ok && bad == 0 && prof.levels.size() == 8,
           fmt("M_1 in [%.12f, %.12f] (width %.2g <= %.0e) vs log 2 + 1 = %.12f; "
               "min over n <= 8 of bound - S_n = %.4g",
               M1.lo(), M1.hi(), M1.width(), width_tol, target, min_slack) };
}

Outcome lyapunov_stopping()
{
  constexpr double tol = 0.05;
  constexpr int walks = 10000;
  constexpr double kappa = 1e-6;
  SimMeasure mu = inhom_family(10);
  double chi = 0.5 * (std::log(10.0 / 11) + std::log(10.0 / 12));
  double chi_lib = lyapunov_exponent(mu).value;
  CounterRng rng(1008, 0);
  double total = 0;
  for (int i = 0; i < walks; ++i)
    total += static_cast<double>(stopped_walk(mu, kappa, rng).tau);
  double ratio = total / walks * std::abs(chi) / std::log(1 / kappa);
  bool ok = std::abs(ratio - 1) < tol && std::abs(chi_lib - chi) < 1e-14;
  return { ok, fmt("E[tau] |chi| / log(1/kappa) = %.4f, |ratio - 1| = %.4f < %.2f", ratio,
                   std::abs(ratio - 1), tol) };
}

Outcome well_mixing()
{
  constexpr double tol = 0.02;
  Mat R(2, 2);
  R << std::cos(1.0), -std::sin(1.0), std::sin(1.0), std::cos(1.0);
  SimMeasure rot({ { Rational(1, 2), Similarity::numeric(0.5, R, Vec::Unit(2, 0)) },
                   { Rational(1, 2), Similarity::numeric(0.5, R, -Vec::Unit(2, 0)) } });
  MixingConfig cfg;
  cfg.T = 50;
  cfg.samples = 100000;
  cfg.seed = 1009;
  Estimate e = well_mixing_estimate(rot, cfg, Vec::Unit(2, 0), Vec::Unit(2, 1));
  return { std::abs(e.value - 0.5) < tol,
           fmt("estimate %.4f +- %.4f, |estimate - 1/d| = %.4f < %.2f", e.value, e.std_error,
               std::abs(e.value - 0.5), tol) };
}

Outcome stationary_sampler()
{
  constexpr std::size_t n = 100000;
  constexpr double ks_critical = 1.6276; // Kolmogorov 99% quantile
  constexpr double z = 3;
  SimMeasure mu = bernoulli_measure(q(1, 2));
  SampleOptions so;
  so.seed = 1010;
  SampleSet s = sample_stationary(mu, n, so);
  std::vector<double> x(s.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    x[i] = s.points(0, static_cast<Eigen::Index>(i));
  std::sort(x.begin(), x.end());
  double D = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double F = std::clamp((x[i] + 2) / 4, 0.0, 1.0);
    D = std::max({ D, (i + 1.0) / n - F, F - static_cast<double>(i) / n });
  }
  double crit = ks_critical / std::sqrt(static_cast<double>(n));

  NonDegConfig cfg;
  cfg.theta = 0.2;
  cfg.A = 10;
  cfg.samples = n;
  cfg.seed = 1011;
  cfg.slabs = { Slab{ { Vec::Ones(1) }, Vec::Zero(1) } };
  Estimate slab = non_degeneracy_estimate(mu, cfg).per_slab.at(0);
  double dev = std::abs(slab.value - 0.1);
  bool ok = D < crit && dev <= z * slab.std_error;
  return { ok, fmt("KS D = %.5f < %.5f; slab mass %.4f, |mass - 0.1| = %.4f <= 3 se = %.4f", D,
                   crit, slab.value, dev, z * slab.std_error) };
}

Outcome psd_partition()
{
  constexpr int instances = 100;
  constexpr int brute_instances = 20;
  constexpr double eig_tol = 1e-9;
  constexpr double obj_tol = 1e-9; // relative
  CounterRng rng(1011, 0);
  int bad = 0, local = 0;
  double min_slack = std::numeric_limits<double>::infinity();
  auto random_psd = [&](int d) {
    Mat B(d, d);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        B(a, b) = gauss(rng);
    return Mat(B * B.transpose() / d);
  };
  for (int t = 0; t < instances; ++t) {
    int d = 1 + static_cast<int>(rng.below(3));
    int k = 1 + static_cast<int>(rng.below(5));
    int n = k + static_cast<int>(rng.below(static_cast<std::uint64_t>(61 - k)));
    std::vector<Mat> As;
    for (int i = 0; i < n; ++i)
      As.push_back(random_psd(d));
    PsdPartition p = partition_psd(As, k);
    if (!p.exact)
      ++local;
    // C and c recomputed from the inputs
    Mat total = Mat::Zero(d, d);
    double c = 0;
    for (const Mat& A : As) {
      total += A;
      c = std::max(c, Eigen::SelfAdjointEigenSolver<Mat>(A).eigenvalues().maxCoeff());
    }
    double C = Eigen::SelfAdjointEigenSolver<Mat>(total).eigenvalues().minCoeff() / k;
    double guarantee = C - d * std::sqrt(2 * c * C) - 2 * std::pow(d, 1.5) * c;
    std::vector<int> seen(static_cast<std::size_t>(n), 0);
    for (const auto& part : p.parts) {
      Mat S = Mat::Zero(d, d);
      for (std::size_t i : part) {
        S += As[i];
        ++seen[i];
      }
      double lmin = Eigen::SelfAdjointEigenSolver<Mat>(S).eigenvalues().minCoeff();
      min_slack = std::min(min_slack, lmin - guarantee);
      if (lmin < guarantee - eig_tol)
        ++bad;
    }
    if (p.parts.size() != static_cast<std::size_t>(k) ||
        std::any_of(seen.begin(), seen.end(), [](int s) { return s != 1; }))
      ++bad;
  }

  int mismatches = 0;
  for (int t = 0; t < brute_instances; ++t) {
    int d = 1 + t % 3, k = 2 + t % 2;
    std::vector<Mat> As;
    for (int i = 0; i < 8; ++i)
      As.push_back(random_psd(d) + 0.05 * Mat::Identity(d, d));
    PsdPartition p = partition_psd(As, k);
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> asg(8);
    std::size_t codes = static_cast<std::size_t>(std::pow(k, 8));
    for (std::size_t code = 0; code < codes; ++code) {
      std::size_t c = code;
      for (int i = 0; i < 8; ++i) {
        asg[static_cast<std::size_t>(i)] = static_cast<int>(c % static_cast<std::size_t>(k));
        c /= static_cast<std::size_t>(k);
      }
      best = std::min(best, partition_objective(As, k, asg));
    }
    if (std::abs(p.objective - best) > obj_tol * std::max(1.0, best))
      ++mismatches;
  }
  return { bad == 0 && mismatches == 0,
           fmt("%d instances (%d by local search), min over parts of lambda_min - guarantee = %.4g, "
               "violations %d; n = 8 brute force: %d/%d at the global minimum",
               instances, local, min_slack, bad, brute_instances - mismatches, brute_instances) };
}

struct TaylorInstance
{
  std::vector<Similarity> gs;
  std::vector<LieVector> dirs;
  Vec v;
};

TaylorInstance taylor_instance(CounterRng& rng, int n, int d)
{
  TaylorInstance t;
  for (int i = 0; i < n; ++i) {
    double rho = 0.4 + 0.5 * rng.uniform01();
    double ang = 2 * pi * rng.uniform01();
    Mat U = Mat::Identity(d, d);
    if (d == 2)
      U << std::cos(ang), -std::sin(ang), std::sin(ang), std::cos(ang);
    else if (rng.below(2))
      U(0, 0) = -1;
    Vec b(d);
    for (int k = 0; k < d; ++k)
      b(k) = 2 * rng.uniform01() - 1;
    t.gs.push_back(Similarity::numeric(rho, U, b));
    Mat W = Mat::Zero(d, d);
    if (d == 2)
      W(1, 0) = 2 * rng.uniform01() - 1;
    Vec beta(d);
    for (int k = 0; k < d; ++k)
      beta(k) = 2 * rng.uniform01() - 1;
    LieVector u = LieVector::from_parts(2 * rng.uniform01() - 1, 2 * W, beta);
    double nrm = u.norm();
    t.dirs.push_back({ u.alpha / nrm, u.beta / nrm });
  }
  t.v = Vec(d);
  for (int k = 0; k < d; ++k)
    t.v(k) = 2 * rng.uniform01() - 1;
  return t;
}

Outcome taylor_scaling()
{
  constexpr int instances = 50;
  constexpr double slope_lo = 1.8, slope_hi = 2.2;
  constexpr int scales = 6;
  constexpr double A = 2;
  CounterRng rng(1012, 0);
  double smin = INFINITY, smax = -INFINITY;
  for (int t = 0; t < instances; ++t) {
    int n = 1 + static_cast<int>(rng.below(4)), d = 1 + static_cast<int>(rng.below(2));
    TaylorInstance inst = taylor_instance(rng, n, d);
    double prefix = 1, min_prefix = 1;
    for (const auto& g : inst.gs)
      min_prefix = std::min(min_prefix, prefix *= g.rho_f());
    // |u_i| = 0.9 r / rho(g_1...g_i) stays below 1 on the whole r grid
    double r0 = 0.5 * min_prefix;
    std::vector<double> lx, ly;
    for (int s = 0; s < scales; ++s) {
      double r = r0 * std::pow(0.5, s);
      std::vector<LieVector> us;
      double pre = 1;
      for (std::size_t i = 0; i < inst.gs.size(); ++i) {
        pre *= inst.gs[i].rho_f();
        double len = 0.9 * r / pre;
        us.push_back({ inst.dirs[i].alpha * len, inst.dirs[i].beta * len });
      }
      TaylorCheck c = taylor_linearization_check(inst.gs, us, inst.v, r, A);
      lx.push_back(std::log(r));
      ly.push_back(std::log(c.observed_error));
    }
    double mx = 0, my = 0;
    for (int s = 0; s < scales; ++s) {
      mx += lx[s] / scales;
      my += ly[s] / scales;
    }
    double sxy = 0, sxx = 0;
    for (int s = 0; s < scales; ++s) {
      sxy += (lx[s] - mx) * (ly[s] - my);
      sxx += (lx[s] - mx) * (lx[s] - mx);
    }
    double slope = sxy / sxx;
    smin = std::min(smin, slope);
    smax = std::max(smax, slope);
  }
  return { smin >= slope_lo && smax <= slope_hi,
           fmt("%d instances, regression slopes in [%.4f, %.4f] within [%.1f, %.1f]", instances,
               smin, smax, slope_lo, slope_hi) };
}

Outcome criterion_arithmetic()
{
  namespace mp = boost::multiprecision;
  using big = mp::cpp_bin_float_50;
  constexpr double ratio_target = 462.48, ratio_tol = 0.01;
  constexpr double branch_target = 0.2677, branch_tol = 1e-3;
  constexpr double oracle_tol = 1e-9; // relative agreement with the 50-digit oracle

  CriterionOptions opt;
  opt.diagnostics = false;
  CriterionReport rep = main_criterion(inhom_family(1000), opt);
  big chi = (mp::log(big(1000) / 1001) + mp::log(big(1000) / 1002)) / 2;
  double oracle = static_cast<double>(mp::log(big(2)) / mp::abs(chi));

  BernoulliReport b = bernoulli_criterion(AlgebraicNumber(Rational(999, 1000)));
  big eta = mp::log(big(1000));
  big inverse_square = 1 / mp::pow(mp::log(eta), 2);
  double branch_oracle = static_cast<double>(eta < inverse_square ? eta : inverse_square);

  double ratio = rep.ratio ? *rep.ratio : NAN;
  bool ok = rep.ratio && std::abs(ratio - ratio_target) <= ratio_tol &&
            std::abs(ratio - oracle) <= oracle_tol * oracle &&
            std::abs(b.branch_min - branch_target) <= branch_tol &&
            std::abs(b.branch_min - branch_oracle) <= oracle_tol;
  return { ok, fmt("h/|chi| = %.6f (oracle %.6f, target %.2f +- %.2f); Bernoulli 999/1000 "
                   "min-branch = %.6f (oracle %.6f, target %.4f +- %.0e)",
                   ratio, oracle, ratio_target, ratio_tol, b.branch_min, branch_oracle,
                   branch_target, branch_tol) };
}

Outcome conjugation_invariance()
{
  constexpr int instances = 20;
  constexpr int max_level = 5;
  CounterRng rng(1014, 0);
  int bad = 0;
  for (int t = 0; t < instances; ++t) {
    int d = 1 + t % 2, k = 2 + static_cast<int>(rng.below(2));
    SimMeasure mu = random_measure(rng, d, k);
    Similarity h = random_similarity(rng, d);
    SimMeasure nu = conjugate_measure(mu, h, false);
    if (lyapunov_exponent(mu).value != lyapunov_exponent(nu).value)
      ++bad;
    for (std::size_t i = 0; i < mu.size(); ++i)
      if (!(mu[i].g.rho() == nu[i].g.rho()))
        ++bad;
    std::vector<WordEnumeration> a = enumerate_levels(mu, max_level);
    std::vector<WordEnumeration> b = enumerate_levels(nu, max_level);
    for (int n = 0; n < max_level; ++n)
      if (a[n].elements.size() != b[n].elements.size())
        ++bad;
  }
  return { bad == 0, fmt("%d measures, chi equal bit for bit and |supp mu^{*n}| equal for n <= %d; "
                         "mismatches %d",
                         instances, max_level, bad) };
}

} // namespace

int main(int argc, char** argv)
{
  std::vector<Criterion> all = {
    { 1, "Gaussian detail closed form", 10, gaussian_closed_form },
    { 2, "detail bounds", 60, detail_bounds },
    { 3, "product bound", 120, product_bound },
    { 4, "Wasserstein-Lipschitz", 60, wasserstein_lipschitz },
    { 5, "ping-pong and entropy", 30, pingpong_entropy },
    { 6, "golden-ratio collision", 5, golden_collision },
    { 7, "separation consistency", 60, separation_consistency },
    { 8, "Lyapunov and stopping time", 60, lyapunov_stopping },
    { 9, "well-mixing", 60, well_mixing },
    { 10, "stationary sampler", 60, stationary_sampler },
    { 11, "PSD partition", 120, psd_partition },
    { 12, "Taylor quadratic scaling", 60, taylor_scaling },
    { 13, "criterion arithmetic", 10, criterion_arithmetic },
    { 14, "conjugation invariance", 60, conjugation_invariance },
  };
  std::set<int> chosen;
  for (int i = 1; i < argc; ++i)
    chosen.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const Criterion& c : all) {
    if (!chosen.empty() && !chosen.count(c.id))
      continue;
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = { false, std::string("exception: ") + e.what() };
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool in_time = secs < c.limit_seconds;
    bool ok = o.ok && in_time;
    failed += !ok;
    std::printf("%s %2d %s: %s; %.2f s %s %.0f s\n", ok ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), secs, in_time ? "<" : ">=", c.limit_seconds);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
