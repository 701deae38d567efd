#include "selfsim/walk.hpp"
#include "selfsim/errors.hpp"
#include "selfsim/parallel.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <random>

namespace selfsim {

namespace {

//! Row-major float copy of an atom's linear part rho U and translation b.
struct FlatAtom
{
  double rho;
  double log_rho;
  std::vector<double> A;
  std::vector<double> b;
  std::vector<double> U;
};

std::vector<FlatAtom> flatten(const SimMeasure& mu)
{
  int d = mu.dim();
  std::vector<FlatAtom> out;
  for (const auto& a : mu.atoms()) {
    FlatAtom f;
    f.rho = a.g.rho_f();
    f.log_rho = std::log(f.rho);
    f.A.resize(static_cast<std::size_t>(d) * d);
    f.U.resize(static_cast<std::size_t>(d) * d);
    f.b.resize(d);
    for (int i = 0; i < d; ++i) {
      f.b[i] = a.g.b_f()(i);
      for (int j = 0; j < d; ++j) {
        f.U[i * d + j] = a.g.U_f()(i, j);
        f.A[i * d + j] = f.rho * f.U[i * d + j];
      }
    }
    out.push_back(std::move(f));
  }
  return out;
}

//! out = x * y for row-major d x d matrices.
void matmul(const double* x, const double* y, double* out, int d)
{
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      double s = 0;
      for (int k = 0; k < d; ++k)
        s += x[i * d + k] * y[k * d + j];
      out[i * d + j] = s;
    }
}

double require_contracting(const SimMeasure& mu)
{
  Lyapunov chi = lyapunov_exponent(mu);
  if (chi.kind == Contraction::not_contracting)
    throw PreconditionFailed("random walk: chi >= 0, no stationary measure guaranteed");
  return chi.value;
}

double normal_cdf(double t)
{
  return 0.5 * std::erfc(-t / std::sqrt(2.0));
}

double normal_pdf(double t)
{
  return std::exp(-0.5 * t * t) / std::sqrt(2.0 * M_PI);
}

//! Antiderivative of the standard normal CDF.
double cdf_antiderivative(double t)
{
  return t * normal_cdf(t) + normal_pdf(t);
}

} // namespace

SampleSet make_sample_set(Mat points, std::vector<double> weights)
{
  if (points.cols() == 0 || points.rows() == 0)
    throw InvalidInput("sample set: empty");
  if (!points.allFinite())
    throw InvalidInput("sample set: non-finite point");
  if (!weights.empty()) {
    if (weights.size() != static_cast<std::size_t>(points.cols()))
      throw InvalidInput("sample set: weight count mismatch");
    double total = 0;
    for (double w : weights) {
      if (!(w >= 0))
        throw InvalidInput("sample set: negative weight");
      total += w;
    }
    if (!(total > 0))
      throw InvalidInput("sample set: zero total weight");
    for (double& w : weights)
      w /= total;
  }
  SampleSet s;
  s.points = std::move(points);
  s.weights = std::move(weights);
  return s;
}

void write_csv(std::ostream& os, const SampleSet& s)
{
  char buf[40];
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (int j = 0; j < s.dim(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", s.points(j, static_cast<Eigen::Index>(i)));
      os << (j ? "," : "") << buf;
    }
    os << '\n';
  }
}

AtomSampler::AtomSampler(const SimMeasure& mu)
{
  double acc = 0;
  for (const auto& a : mu.atoms()) {
    acc += a.p.convert_to<double>();
    cumulative_.push_back(acc);
  }
  cumulative_.back() = 1.0;
}

std::size_t AtomSampler::operator()(CounterRng& rng) const
{
  double u = rng.uniform01();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()),
                               cumulative_.size() - 1);
}

SampleSet sample_stationary(const SimMeasure& mu, std::size_t count, const SampleOptions& opt)
{
  if (count == 0)
    throw InvalidInput("sample_stationary: count must be positive");
  double chi = require_contracting(mu);
  int d = mu.dim();
  auto atoms = flatten(mu);
  AtomSampler pick(mu);
  const double log_target = std::log(1e-12);
  const long cap = opt.steps > 0 ? opt.steps
                                 : 1000 + static_cast<long>(100.0 * -log_target / std::abs(chi));

  Mat pts(d, static_cast<Eigen::Index>(count));
  std::vector<long> used(count);
  parallel_for(count, opt.threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> A(static_cast<std::size_t>(d) * d), tmp(A.size()), x(d);
    for (std::size_t i = begin; i < end; ++i) {
      CounterRng rng(opt.seed, i);
      std::fill(A.begin(), A.end(), 0.0);
      for (int k = 0; k < d; ++k)
        A[k * d + k] = 1;
      std::fill(x.begin(), x.end(), 0.0);
      double log_rho = 0;
      long n = 0;
      while (n < cap) {
        const FlatAtom& g = atoms[pick(rng)];
        for (int r = 0; r < d; ++r)
          for (int c = 0; c < d; ++c)
            x[r] += A[r * d + c] * g.b[c];
        matmul(A.data(), g.A.data(), tmp.data(), d);
        A.swap(tmp);
        log_rho += g.log_rho;
        ++n;
        if (opt.steps <= 0 && log_rho <= log_target)
          break;
      }
      for (int r = 0; r < d; ++r)
        pts(r, static_cast<Eigen::Index>(i)) = x[r];
      used[i] = n;
    }
  });
  SampleSet s = make_sample_set(std::move(pts));
  s.seed = opt.seed;
  s.steps = opt.steps > 0 ? opt.steps : 0;
  s.mean_steps = std::accumulate(used.begin(), used.end(), 0.0) / static_cast<double>(count);
  return s;
}

StoppedWord stopped_walk(const SimMeasure& mu, double kappa, CounterRng& rng)
{
  if (!(kappa > 0))
    throw InvalidInput("stopped_walk: kappa must be positive");
  require_contracting(mu);
  int d = mu.dim();
  AtomSampler pick(mu);
  StoppedWord w;
  w.U = Mat::Identity(d, d);
  double log_rho = 0;
  // the relative slack keeps exact crossings such as rho^n = kappa stable
  const double log_kappa = std::log(kappa) + 1e-12 * std::abs(std::log(kappa));
  do {
    std::size_t i = pick(rng);
    w.indices.push_back(i);
    log_rho += std::log(mu[i].g.rho_f());
    w.U = w.U * mu[i].g.U_f();
    ++w.tau;
  } while (log_rho > log_kappa);
  w.rho = std::exp(log_rho);
  return w;
}

Estimate well_mixing_estimate(const SimMeasure& mu, const MixingConfig& cfg, const Vec& x,
                              const Vec& y)
{
  int d = mu.dim();
  if (x.size() != d || y.size() != d)
    throw InvalidInput("well_mixing_estimate: vector dimension mismatch");
  if (std::abs(x.norm() - 1) > 1e-9 || std::abs(y.norm() - 1) > 1e-9)
    throw InvalidInput("well_mixing_estimate: x and y must be unit vectors");
  if (cfg.samples < 2)
    throw InvalidInput("well_mixing_estimate: need at least two samples");
  if (cfg.T < 0)
    throw InvalidInput("well_mixing_estimate: T must be nonnegative");
  if (!(cfg.kappa > 0))
    throw InvalidInput("well_mixing_estimate: kappa must be positive");
  require_contracting(mu);
  auto atoms = flatten(mu);
  AtomSampler pick(mu);
  const double log_kappa = std::log(cfg.kappa) + 1e-12 * std::abs(std::log(cfg.kappa));
  std::vector<double> vals(cfg.samples);
  parallel_for(cfg.samples, cfg.threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> U(static_cast<std::size_t>(d) * d), tmp(U.size());
    for (std::size_t s = begin; s < end; ++s) {
      CounterRng rng(cfg.seed, s);
      std::fill(U.begin(), U.end(), 0.0);
      for (int k = 0; k < d; ++k)
        U[k * d + k] = 1;
      double log_rho = 0;
      auto step = [&] {
        const FlatAtom& g = atoms[pick(rng)];
        matmul(U.data(), g.U.data(), tmp.data(), d);
        U.swap(tmp);
        log_rho += g.log_rho;
      };
      do
        step();
      while (log_rho > log_kappa);
      long extra = static_cast<long>(rng.below(static_cast<std::uint64_t>(cfg.T) + 1));
      for (long k = 0; k < extra; ++k)
        step();
      double dot = 0;
      for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c)
          dot += x(r) * U[r * d + c] * y(c);
      vals[s] = dot * dot;
    }
  });
  double mean = std::accumulate(vals.begin(), vals.end(), 0.0) / vals.size();
  double ss = 0;
  for (double v : vals)
    ss += (v - mean) * (v - mean);
  double sd = std::sqrt(ss / (vals.size() - 1));
  return { mean, sd / std::sqrt(static_cast<double>(vals.size())), vals.size() };
}

namespace {

//! Orthonormal basis of span(normals).
Mat orthonormal_normals(const Slab& slab, int d)
{
  if (slab.normals.empty())
    throw InvalidInput("slab: W must be a proper subspace (give at least one normal)");
  Mat N(d, static_cast<Eigen::Index>(slab.normals.size()));
  for (std::size_t j = 0; j < slab.normals.size(); ++j) {
    if (slab.normals[j].size() != d)
      throw InvalidInput("slab: normal has the wrong dimension");
    N.col(static_cast<Eigen::Index>(j)) = slab.normals[j];
  }
  Eigen::ColPivHouseholderQR<Mat> qr(N);
  int r = static_cast<int>(qr.rank());
  if (r == 0)
    throw InvalidInput("slab: normals are zero");
  Mat Q = qr.householderQ() * Mat::Identity(d, r);
  return Q;
}

} // namespace

Estimate slab_mass(const SampleSet& s, const Slab& slab, double theta, double A)
{
  int d = s.dim();
  Mat Q = orthonormal_normals(slab, d);
  Vec y = slab.offset.size() ? slab.offset : Vec::Zero(d);
  if (y.size() != d)
    throw InvalidInput("slab: offset has the wrong dimension");
  double mass = 0;
  double sumw2 = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    Vec x = s.points.col(static_cast<Eigen::Index>(i));
    double dist = (Q.transpose() * (x - y)).norm();
    double w = s.weight(i);
    sumw2 += w * w;
    if (dist < theta || x.norm() >= A)
      mass += w;
  }
  double se = std::sqrt(std::max(0.0, mass * (1 - mass)) * sumw2);
  return { mass, se, s.size() };
}

NonDegResult non_degeneracy_estimate(const SimMeasure& mu, const NonDegConfig& cfg)
{
  if (!(cfg.theta > 0) || !(cfg.A > 0))
    throw InvalidInput("non_degeneracy_estimate: theta and A must be positive");
  if (cfg.slabs.empty())
    throw InvalidInput("non_degeneracy_estimate: no slabs given");
  SampleOptions opt;
  opt.seed = cfg.seed;
  opt.threads = cfg.threads;
  SampleSet s = sample_stationary(mu, cfg.samples, opt);
  NonDegResult out;
  for (const auto& slab : cfg.slabs)
    out.per_slab.push_back(slab_mass(s, slab, cfg.theta, cfg.A));
  out.sup = *std::max_element(out.per_slab.begin(), out.per_slab.end(),
                              [](const Estimate& a, const Estimate& b) { return a.value < b.value; });
  return out;
}

TailEstimate tail_exponent_estimate(const SampleSet& s)
{
  std::size_t n = s.size();
  if (n < 1000)
    throw InvalidInput("tail_exponent_estimate: need at least 1000 points");
  Vec first = s.points.col(0);
  bool all_equal = true;
  for (std::size_t i = 1; i < n && all_equal; ++i)
    all_equal = s.points.col(static_cast<Eigen::Index>(i)) == first;
  if (all_equal)
    throw PreconditionFailed("tail_exponent_estimate: all points coincide (degenerate)");

  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i)
    r[i] = s.points.col(static_cast<Eigen::Index>(i)).norm();
  std::sort(r.begin(), r.end());
  std::size_t lo = static_cast<std::size_t>(0.9 * static_cast<double>(n));
  std::size_t hi = n - 10; // keep nu(|x| >= R) >= 10/N
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t m = 0;
  for (std::size_t i = lo; i < hi; ++i) {
    if (r[i] <= 0)
      continue;
    double lx = std::log(r[i]);
    double ly = std::log(static_cast<double>(n - i) / static_cast<double>(n));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++m;
  }
  if (m < 2)
    throw PreconditionFailed("tail_exponent_estimate: upper decile is degenerate");
  double den = m * sxx - sx * sx;
  if (!(den > 0))
    throw PreconditionFailed("tail_exponent_estimate: upper decile radii coincide");
  TailEstimate t;
  t.slope = (m * sxy - sx * sy) / den;
  double q90 = r[lo];
  t.compact_support = q90 > 0 && r.back() / q90 < 2 && t.slope < -5;
  return t;
}

double wasserstein1_1d(std::vector<double> a, std::vector<double> wa, std::vector<double> b,
                       std::vector<double> wb)
{
  if (a.empty() || b.empty())
    throw InvalidInput("wasserstein1: empty sample");
  auto normalize = [](std::vector<double>& v, std::vector<double>& w) {
    if (w.empty())
      w.assign(v.size(), 1.0);
    if (w.size() != v.size())
      throw InvalidInput("wasserstein1: weight count mismatch");
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
    double total = std::accumulate(w.begin(), w.end(), 0.0);
    std::vector<double> v2(v.size()), w2(v.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
      v2[k] = v[idx[k]];
      w2[k] = w[idx[k]] / total;
    }
    v.swap(v2);
    w.swap(w2);
  };
  normalize(a, wa);
  normalize(b, wb);
  // sweep over merged breakpoints accumulating |F_a - F_b| * gap
  std::size_t i = 0, j = 0;
  double Fa = 0, Fb = 0, total = 0;
  double x = std::min(a[0], b[0]);
  while (i < a.size() || j < b.size()) {
    double next = std::min(i < a.size() ? a[i] : INFINITY, j < b.size() ? b[j] : INFINITY);
    total += std::abs(Fa - Fb) * (next - x);
    x = next;
    while (i < a.size() && a[i] == x)
      Fa += wa[i++];
    while (j < b.size() && b[j] == x)
      Fb += wb[j++];
  }
  return total;
}

std::vector<Vec> projection_directions(int d)
{
  std::vector<Vec> dirs;
  if (d == 1) {
    dirs.push_back(Vec::Ones(1));
    return dirs;
  }
  if (d == 2) {
    for (int k = 0; k < 64; ++k) {
      double t = M_PI * (k + 0.5) / 64;
      Vec v(2);
      v << std::cos(t), std::sin(t);
      dirs.push_back(v);
    }
  } else if (d == 3) {
    // Fibonacci points on the upper hemisphere
    double golden = M_PI * (3 - std::sqrt(5.0));
    for (int k = 0; k < 64; ++k) {
      double z = (k + 0.5) / 64;
      double rad = std::sqrt(1 - z * z);
      Vec v(3);
      v << rad * std::cos(golden * k), rad * std::sin(golden * k), z;
      dirs.push_back(v);
    }
  } else {
    CounterRng rng(0x5eedULL, static_cast<std::uint64_t>(d));
    std::normal_distribution<double> normal;
    for (int k = 0; k < 64; ++k) {
      Vec v(d);
      for (int i = 0; i < d; ++i)
        v(i) = normal(rng);
      dirs.push_back(v.normalized());
    }
  }
  for (int i = 0; i < d; ++i)
    dirs.push_back(Vec::Unit(d, i));
  return dirs;
}

double wasserstein1(const SampleSet& a, const SampleSet& b, W1Mode mode)
{
  if (a.size() == 0 || b.size() == 0)
    throw InvalidInput("wasserstein1: empty sample");
  if (a.dim() != b.dim())
    throw InvalidInput("wasserstein1: dimension mismatch");
  int d = a.dim();
  auto project = [](const SampleSet& s, const Vec& dir) {
    Vec p = s.points.transpose() * dir;
    return std::vector<double>(p.data(), p.data() + p.size());
  };
  if (mode == W1Mode::exact1d) {
    if (d != 1)
      throw InvalidInput("wasserstein1: exact1d requires d = 1");
    return wasserstein1_1d(project(a, Vec::Ones(1)), a.weights, project(b, Vec::Ones(1)),
                           b.weights);
  }
  auto dirs = projection_directions(d);
  std::size_t quasi = d == 1 ? 1 : 64;
  double sum = 0, best = 0;
  for (std::size_t k = 0; k < dirs.size(); ++k) {
    double w = wasserstein1_1d(project(a, dirs[k]), a.weights, project(b, dirs[k]), b.weights);
    if (k < quasi)
      sum += w;
    best = std::max(best, w);
  }
  return mode == W1Mode::sliced ? sum / static_cast<double>(quasi) : best;
}

double Law1D::mean() const
{
  double m = 0;
  for (std::size_t i = 0; i < values.size(); ++i)
    m += probs[i] * values[i];
  return m;
}

double Law1D::second_moment() const
{
  double m = 0;
  for (std::size_t i = 0; i < values.size(); ++i)
    m += probs[i] * values[i] * values[i];
  return m;
}

double Law1D::third_abs_moment() const
{
  double m = 0;
  for (std::size_t i = 0; i < values.size(); ++i)
    m += probs[i] * std::pow(std::abs(values[i]), 3);
  return m;
}

double Law1D::bound() const
{
  double m = 0;
  for (double v : values)
    m = std::max(m, std::abs(v));
  return m;
}

double wasserstein1_to_normal(const Law1D& law, double mean, double sd)
{
  if (law.values.empty() || law.values.size() != law.probs.size())
    throw InvalidInput("wasserstein1_to_normal: malformed law");
  if (!(sd > 0))
    throw InvalidInput("wasserstein1_to_normal: sd must be positive");
  std::vector<std::size_t> idx(law.values.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t i, std::size_t j) { return law.values[i] < law.values[j]; });
  double total = 0;
  for (double p : law.probs)
    total += p;
  boost::math::normal_distribution<double> std_normal;

  // integral over [a, b] (standardized) of |c - Phi(t)|
  auto piece = [&](double a, double b, double c) {
    if (!(b > a))
      return 0.0;
    double pa = normal_cdf(a), pb = normal_cdf(b);
    auto above = [&](double s, double e) { // integral of Phi - c
      return cdf_antiderivative(e) - cdf_antiderivative(s) - c * (e - s);
    };
    if (c <= pa)
      return above(a, b);
    if (c >= pb)
      return -above(a, b);
    double t = boost::math::quantile(std_normal, c);
    return -above(a, t) + above(t, b);
  };

  double F = 0;
  double first = (law.values[idx[0]] - mean) / sd;
  double acc = cdf_antiderivative(first); // integral of Phi over (-inf, first]
  for (std::size_t k = 0; k < idx.size(); ++k) {
    F += law.probs[idx[k]] / total;
    double a = (law.values[idx[k]] - mean) / sd;
    if (k + 1 < idx.size()) {
      double b = (law.values[idx[k + 1]] - mean) / sd;
      acc += piece(a, b, std::min(F, 1.0));
    } else {
      acc += cdf_antiderivative(-a); // integral of 1 - Phi over [a, inf)
    }
  }
  return acc * sd;
}

namespace {

//! Exact law of X + Y for finite laws given as sorted (value, prob) lists.
Law1D convolve_sorted(const Law1D& x, const Law1D& y)
{
  std::vector<std::pair<double, double>> merged;
  merged.reserve(x.values.size() * y.values.size());
  for (std::size_t j = 0; j < y.values.size(); ++j) {
    std::size_t mid = merged.size();
    for (std::size_t i = 0; i < x.values.size(); ++i)
      merged.emplace_back(x.values[i] + y.values[j], x.probs[i] * y.probs[j]);
    std::inplace_merge(merged.begin(), merged.begin() + static_cast<std::ptrdiff_t>(mid),
                       merged.end());
  }
  Law1D out;
  for (const auto& [v, p] : merged) {
    if (!out.values.empty() &&
        std::abs(v - out.values.back()) <= 1e-12 * (1 + std::abs(v))) {
      out.probs.back() += p;
      continue;
    }
    out.values.push_back(v);
    out.probs.push_back(p);
  }
  return out;
}

Law1D sorted_law(const Law1D& l)
{
  std::vector<std::size_t> idx(l.values.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto i, auto j) { return l.values[i] < l.values[j]; });
  Law1D out;
  for (auto i : idx) {
    out.values.push_back(l.values[i]);
    out.probs.push_back(l.probs[i]);
  }
  return out;
}

} // namespace

Law1D sum_law(const std::vector<Law1D>& laws, std::uint64_t seed, std::size_t samples,
              std::size_t max_support, bool* exact_out)
{
  if (laws.empty())
    throw InvalidInput("sum_law: no summands");
  Law1D sum = sorted_law(laws[0]);
  bool exact = true;
  for (std::size_t i = 1; i < laws.size(); ++i) {
    if (sum.values.size() * laws[i].values.size() > max_support) {
      exact = false;
      break;
    }
    sum = convolve_sorted(sum, sorted_law(laws[i]));
  }
  if (!exact) {
    std::vector<std::vector<double>> cum(laws.size());
    for (std::size_t k = 0; k < laws.size(); ++k) {
      double acc = 0;
      for (double p : laws[k].probs)
        cum[k].push_back(acc += p);
      cum[k].back() = 1.0;
    }
    Law1D emp;
    emp.values.resize(samples);
    emp.probs.assign(samples, 1.0 / static_cast<double>(samples));
    parallel_for(samples, 0, [&](std::size_t begin, std::size_t end) {
      for (std::size_t s = begin; s < end; ++s) {
        CounterRng rng(seed, s);
        double x = 0;
        for (std::size_t k = 0; k < laws.size(); ++k) {
          double u = rng.uniform01();
          auto it = std::upper_bound(cum[k].begin(), cum[k].end(), u);
          std::size_t j = std::min<std::size_t>(static_cast<std::size_t>(it - cum[k].begin()),
                                                cum[k].size() - 1);
          x += laws[k].values[j];
        }
        emp.values[s] = x;
      }
    });
    std::sort(emp.values.begin(), emp.values.end());
    sum = std::move(emp);
  }
  if (exact_out)
    *exact_out = exact;
  return sum;
}

BerryEsseenResult berry_esseen_distance(const std::vector<Law1D>& increments, std::size_t n,
                                        std::uint64_t seed, std::size_t samples,
                                        std::size_t max_support)
{
  if (increments.empty() || n == 0)
    throw InvalidInput("berry_esseen_distance: need increments and n >= 1");
  BerryEsseenResult r{};
  double gamma3 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Law1D& l = increments[i % increments.size()];
    if (l.values.empty() || l.values.size() != l.probs.size())
      throw InvalidInput("berry_esseen_distance: malformed increment law");
    double m = l.mean();
    if (std::abs(m) > 1e-12 * (1 + l.bound()))
      throw InvalidInput("berry_esseen_distance: increments must have mean zero");
    r.variance += l.second_moment();
    gamma3 += l.third_abs_moment();
    r.delta = std::max(r.delta, l.bound());
  }
  if (!(r.variance > 0))
    throw PreconditionFailed("berry_esseen_distance: total variance is zero");
  r.lyapunov_ratio = gamma3 / r.variance;

  std::vector<Law1D> seq;
  for (std::size_t i = 0; i < n; ++i)
    seq.push_back(increments[i % increments.size()]);
  bool exact = true;
  Law1D sum = sum_law(seq, seed, samples, max_support, &exact);
  r.exact = exact;
  r.w1 = wasserstein1_to_normal(sum, 0.0, std::sqrt(r.variance));
  r.ratio_delta = r.w1 / r.delta;
  return r;
}

} // namespace selfsim
