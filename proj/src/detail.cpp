#include "selfsim/detail.hpp"

#include "selfsim/errors.hpp"
#include "selfsim/parallel.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>

namespace selfsim {

namespace {

constexpr double pi = 3.14159265358979323846;
constexpr double euler_e = 2.71828182845904523536;

double mass_tolerance(std::size_t n)
{
  return std::max(1e-12, 4e-16 * static_cast<double>(n));
}

//! Generalized Laguerre polynomial L_k^(alpha)(t) by the three-term recurrence.
double laguerre(int k, double alpha, double t)
{
  if (k == 0)
    return 1;
  double a = 1, b = 1 + alpha - t;
  for (int m = 1; m < k; ++m) {
    double c = ((2 * m + 1 + alpha - t) * b - (m + alpha) * a) / (m + 1);
    a = b;
    b = c;
  }
  return b;
}

//! Probabilists' Hermite polynomial He_n(u).
double hermite_he(int n, double u)
{
  if (n == 0)
    return 1;
  double a = 1, b = u;
  for (int m = 1; m < n; ++m) {
    double c = u * b - m * a;
    a = b;
    b = c;
  }
  return b;
}

double factorial(int k)
{
  return std::tgamma(k + 1.0);
}

//! Truncation radius of eta_y^(k) in units of sqrt(y); the discarded tail is
//! below 1e-12 of the kernel's L1 norm for k <= 20.
double tail_radius(int k)
{
  return 8.0 + k;
}

void check_scale(double r, int k, const char* who)
{
  if (!(r > 0) || !std::isfinite(r))
    throw InvalidInput(std::string(who) + ": r must be positive and finite");
  if (k < 1)
    throw InvalidInput(std::string(who) + ": k must be at least 1");
}

//! Radial profile of eta_y^(k) as a function of |x|^2.
struct RadialKernel
{
  double y, alpha, scale;
  int k;

  RadialKernel(double y_, int k_, int d)
    : y(y_)
    , alpha(d / 2.0 - 1)
    , scale((k_ % 2 ? -1.0 : 1.0) * factorial(k_) * std::pow(y_, -k_) *
            std::pow(2 * pi * y_, -d / 2.0))
    , k(k_)
  {}

  double operator()(double r2) const
  {
    double t = r2 / (2 * y);
    return scale * laguerre(k, alpha, t) * std::exp(-t);
  }
};

// ---------------------------------------------------------------------------
// FFT convolution on lattices (d in {1, 2})

std::mutex& fftw_plan_mutex()
{
  static std::mutex m;
  return m;
}

//! Smallest 2^a 3^b 5^c 7^d >= n.
std::size_t fft_size(std::size_t n)
{
  std::size_t best = std::size_t(1);
  while (best < n)
    best *= 2;
  for (std::size_t p7 = 1; p7 < 2 * n; p7 *= 7)
    for (std::size_t p5 = p7; p5 < 2 * n; p5 *= 5)
      for (std::size_t p3 = p5; p3 < 2 * n; p3 *= 3) {
        std::size_t v = p3;
        while (v < n)
          v *= 2;
        best = std::min(best, v);
      }
  return best;
}

struct FftBuffer
{
  double* real = nullptr;
  fftw_complex* spec = nullptr;
  explicit FftBuffer(std::size_t n_real, std::size_t n_spec)
  {
    real = fftw_alloc_real(n_real);
    spec = fftw_alloc_complex(n_spec);
    if (!real || !spec)
      throw BudgetExceeded("FFT buffer allocation failed");
  }
  ~FftBuffer()
  {
    fftw_free(real);
    fftw_free(spec);
  }
  FftBuffer(const FftBuffer&) = delete;
  FftBuffer& operator=(const FftBuffer&) = delete;
};

//! Linear convolution of two row-major arrays with shapes sa and sb (same
//! rank). Output shape is sa + sb - 1 per axis.
std::vector<double> fft_convolve(const std::vector<double>& a, const std::vector<std::size_t>& sa,
                                 const std::vector<double>& b, const std::vector<std::size_t>& sb,
                                 std::vector<std::size_t>& so, std::size_t max_cells)
{
  const int d = static_cast<int>(sa.size());
  so.resize(d);
  std::vector<int> n(d);
  std::size_t total = 1;
  for (int i = 0; i < d; ++i) {
    so[i] = sa[i] + sb[i] - 1;
    n[i] = static_cast<int>(fft_size(so[i]));
    total *= static_cast<std::size_t>(n[i]);
  }
  if (total > max_cells) {
    std::ostringstream msg;
    msg << "FFT convolution needs " << total << " cells, budget is " << max_cells;
    throw BudgetExceeded(msg.str());
  }
  const std::size_t last = static_cast<std::size_t>(n[d - 1]);
  const std::size_t spec_n = total / last * (last / 2 + 1);

  FftBuffer fa(total, spec_n), fb(total, spec_n);
  fftw_plan pa, pb, inv;
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    pa = fftw_plan_dft_r2c(d, n.data(), fa.real, fa.spec, FFTW_ESTIMATE);
    pb = fftw_plan_dft_r2c(d, n.data(), fb.real, fb.spec, FFTW_ESTIMATE);
    inv = fftw_plan_dft_c2r(d, n.data(), fa.spec, fa.real, FFTW_ESTIMATE);
  }
  auto fill = [&](double* dst, const std::vector<double>& src, const std::vector<std::size_t>& s) {
    std::fill(dst, dst + total, 0.0);
    if (d == 1) {
      std::copy(src.begin(), src.end(), dst);
    } else {
      for (std::size_t i = 0; i < s[0]; ++i)
        std::copy(src.begin() + static_cast<std::ptrdiff_t>(i * s[1]),
                  src.begin() + static_cast<std::ptrdiff_t>((i + 1) * s[1]), dst + i * last);
    }
  };
  fill(fa.real, a, sa);
  fill(fb.real, b, sb);
  fftw_execute(pa);
  fftw_execute(pb);
  for (std::size_t i = 0; i < spec_n; ++i) {
    double re = fa.spec[i][0] * fb.spec[i][0] - fa.spec[i][1] * fb.spec[i][1];
    double im = fa.spec[i][0] * fb.spec[i][1] + fa.spec[i][1] * fb.spec[i][0];
    fa.spec[i][0] = re;
    fa.spec[i][1] = im;
  }
  fftw_execute(inv);
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    fftw_destroy_plan(pa);
    fftw_destroy_plan(pb);
    fftw_destroy_plan(inv);
  }
  const double norm = 1.0 / static_cast<double>(total);
  std::size_t out_n = 1;
  for (auto s : so)
    out_n *= s;
  std::vector<double> out(out_n);
  if (d == 1) {
    for (std::size_t i = 0; i < so[0]; ++i)
      out[i] = fa.real[i] * norm;
  } else {
    for (std::size_t i = 0; i < so[0]; ++i)
      for (std::size_t j = 0; j < so[1]; ++j)
        out[i * so[1] + j] = fa.real[i * last + j] * norm;
  }
  return out;
}

// ---------------------------------------------------------------------------
// L1 norms of lambda * eta_y^(k)

struct L1Value
{
  double fine;
  double coarse;
};

//! Riemann sums of |g| on the lattice and on its even sublattice.
L1Value lattice_l1(const std::vector<double>& g, const std::vector<std::size_t>& shape, double h)
{
  const int d = static_cast<int>(shape.size());
  double fine = 0, coarse = 0;
  if (d == 1) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      fine += std::abs(g[i]);
      if (i % 2 == 0)
        coarse += std::abs(g[i]);
    }
  } else {
    for (std::size_t i = 0; i < shape[0]; ++i)
      for (std::size_t j = 0; j < shape[1]; ++j) {
        double v = std::abs(g[i * shape[1] + j]);
        fine += v;
        if (i % 2 == 0 && j % 2 == 0)
          coarse += v;
      }
  }
  double cell = std::pow(h, d);
  return { fine * cell, coarse * cell * std::pow(2.0, d) };
}

L1Value grid_l1(const GridMeasure& m, double y, int k, const DetailOptions& opt)
{
  const int d = m.d;
  const double W = tail_radius(k) * std::sqrt(y);
  const std::size_t nk = static_cast<std::size_t>(std::ceil(W / m.h));
  const std::size_t side = 2 * nk + 1;
  std::vector<std::size_t> ks(d, side);
  std::size_t kn = d == 1 ? side : side * side;
  std::size_t need = 1;
  for (int i = 0; i < d; ++i)
    need *= m.shape[i] + 2 * nk;
  if (need > opt.max_cells) {
    std::ostringstream msg;
    msg << "detail: the window padded by " << W << " on each side needs " << need
        << " cells, budget is " << opt.max_cells;
    throw BudgetExceeded(msg.str());
  }
  RadialKernel kern(y, k, d);
  std::vector<double> kv(kn);
  const double h = m.h;
  for (std::size_t i = 0; i < kn; ++i) {
    double dx = (static_cast<double>(d == 1 ? i : i / side) - static_cast<double>(nk)) * h;
    double dy = d == 1 ? 0.0 : (static_cast<double>(i % side) - static_cast<double>(nk)) * h;
    kv[i] = kern(dx * dx + dy * dy);
  }
  std::vector<std::size_t> so;
  std::vector<double> g = fft_convolve(m.mass, m.shape, kv, ks, so, opt.max_cells * 4);
  return lattice_l1(g, so, h);
}

//! Atoms on R sorted by position.
struct Atoms1D
{
  std::vector<double> x, m;
};

Atoms1D sorted_atoms(const DiscreteMeasure& dm)
{
  std::vector<std::size_t> idx(dm.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](auto a, auto b) { return dm.points(0, static_cast<Eigen::Index>(a)) <
                                         dm.points(0, static_cast<Eigen::Index>(b)); });
  Atoms1D out;
  for (auto i : idx) {
    out.x.push_back(dm.points(0, static_cast<Eigen::Index>(i)));
    out.m.push_back(dm.mass[i]);
  }
  return out;
}

//! 1D atoms: g = lambda * eta_y^(k) has the closed antiderivative
//! G(x) = -sum_j m_j (2y)^-k He_(2k-1)(u_j) phi(u_j), u_j = (x - x_j)/sqrt(y),
//! so ||g||_1 is exact once the sign changes of g are located.
L1Value atoms1d_l1(const Atoms1D& at, double y, int k, const DetailOptions& opt)
{
  const double sigma = std::sqrt(y);
  const double W = tail_radius(k) * sigma;
  const double pref = std::pow(2 * y, -k) / std::sqrt(2 * pi);
  const double lo = at.x.front() - W, hi = at.x.back() + W;
  const double step = sigma / (8 * (1 + std::sqrt(static_cast<double>(k))));
  const double span = (hi - lo) / step;
  if (!(span < static_cast<double>(opt.max_cells))) {
    std::ostringstream msg;
    msg << "detail: sign-change scan needs " << span << " points, budget is " << opt.max_cells;
    throw BudgetExceeded(msg.str());
  }
  const std::size_t npts = static_cast<std::size_t>(std::ceil(span)) + 1;

  auto window = [&](double x) {
    auto b = std::lower_bound(at.x.begin(), at.x.end(), x - W) - at.x.begin();
    auto e = std::upper_bound(at.x.begin(), at.x.end(), x + W) - at.x.begin();
    return std::pair<std::size_t, std::size_t>(b, e);
  };
  auto g = [&](double x) {
    auto [b, e] = window(x);
    double s = 0;
    for (std::size_t j = b; j < e; ++j) {
      double u = (x - at.x[j]) / sigma;
      s += at.m[j] * hermite_he(2 * k, u) * std::exp(-0.5 * u * u);
    }
    return s * pref / sigma;
  };
  auto G = [&](double x) {
    auto [b, e] = window(x);
    double s = 0;
    for (std::size_t j = b; j < e; ++j) {
      double u = (x - at.x[j]) / sigma;
      s += at.m[j] * hermite_he(2 * k - 1, u) * std::exp(-0.5 * u * u);
    }
    return -s * pref;
  };

  std::vector<double> xs(npts), gs(npts);
  int threads = opt.threads > 0 ? opt.threads : default_threads();
  parallel_for(npts, threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      xs[i] = lo + step * static_cast<double>(i);
      gs[i] = g(xs[i]);
    }
  });

  auto l1_from = [&](std::size_t stride) {
    std::vector<std::pair<std::size_t, std::size_t>> brackets;
    for (std::size_t i = 0; i + stride < npts; i += stride)
      if ((gs[i] < 0) != (gs[i + stride] < 0))
        brackets.emplace_back(i, i + stride);
    std::vector<double> Gr(brackets.size());
    parallel_for(brackets.size(), threads, [&](std::size_t b, std::size_t e) {
      for (std::size_t t = b; t < e; ++t) {
        auto [i, j] = brackets[t];
        std::uintmax_t iters = 100;
        auto root = boost::math::tools::toms748_solve(
          g, xs[i], xs[j], gs[i], gs[j], boost::math::tools::eps_tolerance<double>(50), iters);
        Gr[t] = G(0.5 * (root.first + root.second));
      }
    });
    double total = 0, prev = 0;
    for (double v : Gr) {
      total += std::abs(v - prev);
      prev = v;
    }
    return total + std::abs(prev);
  };
  return { l1_from(1), l1_from(2) };
}

//! 2D atoms by direct kernel sums on a lattice of width h.
L1Value atoms2d_direct_l1(const DiscreteMeasure& dm, double y, int k, double h,
                          const Vec& origin, const std::vector<std::size_t>& shape, int threads)
{
  RadialKernel kern(y, k, 2);
  const double W = tail_radius(k) * std::sqrt(y);
  std::vector<double> g(shape[0] * shape[1], 0.0);
  parallel_for(shape[0], threads, [&](std::size_t rb, std::size_t re) {
    for (std::size_t a = 0; a < dm.size(); ++a) {
      const double px = dm.points(0, static_cast<Eigen::Index>(a));
      const double py = dm.points(1, static_cast<Eigen::Index>(a));
      const double m = dm.mass[a];
      long i0 = std::max<long>(static_cast<long>(rb),
                               static_cast<long>(std::floor((px - W - origin(0)) / h)));
      long i1 = std::min<long>(static_cast<long>(re) - 1,
                               static_cast<long>(std::ceil((px + W - origin(0)) / h)));
      long j0 = std::max<long>(0, static_cast<long>(std::floor((py - W - origin(1)) / h)));
      long j1 = std::min<long>(static_cast<long>(shape[1]) - 1,
                               static_cast<long>(std::ceil((py + W - origin(1)) / h)));
      for (long i = i0; i <= i1; ++i) {
        double dx = origin(0) + h * static_cast<double>(i) - px;
        for (long j = j0; j <= j1; ++j) {
          double dy = origin(1) + h * static_cast<double>(j) - py;
          g[static_cast<std::size_t>(i) * shape[1] + static_cast<std::size_t>(j)] +=
            m * kern(dx * dx + dy * dy);
        }
      }
    }
  });
  return lattice_l1(g, shape, h);
}

//! 2D atoms, row by row. With u = (x1 - a1)/sqrt(y), v = (x2 - a2)/sqrt(y),
//! L_k((u^2 + v^2)/2) = sum_m beta_m(v) u^(2m), so along a row x2 = const the
//! density is a sum of u^(2m) e^(-u^2/2) terms whose antiderivatives
//! I_m(u) = -u^(2m-1) e^(-u^2/2) + (2m-1) I_(m-1)(u), I_0 = sqrt(2 pi) Phi(u),
//! give the row integral of |g| exactly between located sign changes. The
//! row integral is then integrated over x2 by adaptive Gauss-Kronrod on
//! panels of width sqrt(y); coarse - fine carries the quadrature error.
class Rows2D
{
public:
  Rows2D(const DiscreteMeasure& dm, double y, int k)
    : sigma_(std::sqrt(y))
    , k_(k)
    , T_(tail_radius(k))
    , scale_((k % 2 ? -1.0 : 1.0) * factorial(k) * std::pow(y, -k) / (2 * pi * y))
  {
    std::vector<std::size_t> idx(dm.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) {
      return dm.points(0, static_cast<Eigen::Index>(a)) < dm.points(0, static_cast<Eigen::Index>(b));
    });
    for (auto i : idx) {
      x_.push_back(dm.points(0, static_cast<Eigen::Index>(i)));
      z_.push_back(dm.points(1, static_cast<Eigen::Index>(i)));
      m_.push_back(dm.mass[i]);
    }
    // Laguerre L_k^(0) coefficients c_i = (-1)^i C(k, i) / i!, times 2^-i
    std::vector<double> c(static_cast<std::size_t>(k) + 1);
    for (int i = 0; i <= k; ++i)
      c[i] = (i % 2 ? -1.0 : 1.0) * binom(k, i) / factorial(i) * std::pow(0.5, i);
    // beta_m(v) = sum_(i >= m) c_i C(i, m) v^(2(i - m))
    poly_.assign(static_cast<std::size_t>((k + 1) * (k + 1)), 0.0);
    for (int m = 0; m <= k; ++m)
      for (int i = m; i <= k; ++i)
        poly_[m * (k + 1) + (i - m)] = c[i] * binom(i, m);
    moment_.resize(static_cast<std::size_t>(k) + 1);
    double dfact = 1; // (2m - 1)!!
    for (int m = 0; m <= k; ++m) {
      if (m > 0)
        dfact *= 2 * m - 1;
      moment_[m] = dfact * std::sqrt(2 * pi);
    }
  }

  double y_lo() const { return *std::min_element(z_.begin(), z_.end()) - T_ * sigma_; }
  double y_hi() const { return *std::max_element(z_.begin(), z_.end()) + T_ * sigma_; }
  double x_span() const { return x_.back() - x_.front() + 2 * T_ * sigma_; }
  double sigma() const { return sigma_; }

  //! Integral of |g(., x2)| over the line.
  double row(double x2) const
  {
    Row r = make_row(x2);
    if (r.x.empty())
      return 0;
    const double W = T_ * sigma_;
    const double lo = r.x.front() - W, hi = r.x.back() + W;
    const double step = sigma_ / (8 * (1 + std::sqrt(static_cast<double>(k_))));
    const std::size_t npts = static_cast<std::size_t>(std::ceil((hi - lo) / step)) + 1;
    auto g = [&](double x) { return eval(r, x, false); };
    double prev_x = lo, prev_g = g(lo);
    double total = 0, G_prev = 0;
    for (std::size_t i = 1; i < npts; ++i) {
      double xi = lo + step * static_cast<double>(i), gi = g(xi);
      if ((prev_g < 0) != (gi < 0)) {
        std::uintmax_t iters = 100;
        auto root = boost::math::tools::toms748_solve(
          g, prev_x, xi, prev_g, gi, boost::math::tools::eps_tolerance<double>(50), iters);
        double G = eval(r, 0.5 * (root.first + root.second), true);
        total += std::abs(G - G_prev);
        G_prev = G;
      }
      prev_x = xi;
      prev_g = gi;
    }
    return total + std::abs(r.G_inf - G_prev);
  }

private:
  struct Row
  {
    std::vector<double> x;    //!< active atoms, sorted
    std::vector<double> coef; //!< (k + 1) per atom: m_j e^(-v^2/2) beta_m(v)
    double G_inf = 0;
  };

  static double binom(int n, int m) { return factorial(n) / (factorial(m) * factorial(n - m)); }

  Row make_row(double x2) const
  {
    Row r;
    const int K = k_ + 1;
    for (std::size_t j = 0; j < x_.size(); ++j) {
      double v = (x2 - z_[j]) / sigma_;
      if (std::abs(v) > T_)
        continue;
      double w = m_[j] * std::exp(-0.5 * v * v), v2 = v * v;
      r.x.push_back(x_[j]);
      for (int m = 0; m < K; ++m) {
        double b = 0;
        for (int p = K - m - 1; p >= 0; --p)
          b = b * v2 + poly_[m * K + p];
        r.coef.push_back(w * b);
        r.G_inf += w * b * moment_[m];
      }
    }
    r.G_inf *= scale_ * sigma_;
    return r;
  }

  //! g(x) or, with `anti`, its antiderivative from -infinity.
  double eval(const Row& r, double x, bool anti) const
  {
    const double W = T_ * sigma_;
    const int K = k_ + 1;
    auto b = std::lower_bound(r.x.begin(), r.x.end(), x - W) - r.x.begin();
    auto e = anti ? static_cast<std::ptrdiff_t>(r.x.size())
                  : std::upper_bound(r.x.begin(), r.x.end(), x + W) - r.x.begin();
    double s = 0;
    if (anti) {
      // atoms entirely to the left contribute their full row integral
      for (std::ptrdiff_t j = 0; j < b; ++j)
        for (int m = 0; m < K; ++m)
          s += r.coef[j * K + m] * moment_[m];
    }
    for (std::ptrdiff_t j = b; j < e; ++j) {
      double u = (x - r.x[j]) / sigma_;
      double gauss = std::exp(-0.5 * u * u);
      if (!anti) {
        double acc = 0, u2 = u * u, pw = 1;
        for (int m = 0; m < K; ++m, pw *= u2)
          acc += r.coef[j * K + m] * pw;
        s += acc * gauss;
      } else {
        if (u > T_) {
          for (int m = 0; m < K; ++m)
            s += r.coef[j * K + m] * moment_[m];
          continue;
        }
        double I = std::sqrt(2 * pi) * 0.5 * std::erfc(-u / std::sqrt(2.0));
        double upow = u; // u^(2m - 1)
        s += r.coef[j * K] * I;
        for (int m = 1; m < K; ++m) {
          I = -upow * gauss + (2 * m - 1) * I;
          s += r.coef[j * K + m] * I;
          upow *= u * u;
        }
      }
    }
    return anti ? s * scale_ * sigma_ : s * scale_;
  }

  double sigma_;
  int k_;
  double T_, scale_;
  std::vector<double> x_, z_, m_;
  std::vector<double> poly_, moment_;
};

L1Value atoms2d_rows_l1(const Rows2D& rows, int threads)
{
  const double a = rows.y_lo(), b = rows.y_hi();
  const std::size_t panels =
    std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((b - a) / rows.sigma())));
  const double w = (b - a) / static_cast<double>(panels);
  std::vector<double> val(panels), err(panels);
  parallel_for(panels, threads, [&](std::size_t pb, std::size_t pe) {
    for (std::size_t p = pb; p < pe; ++p) {
      double e = 0;
      val[p] = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        [&](double x2) { return rows.row(x2); }, a + w * static_cast<double>(p),
        a + w * static_cast<double>(p + 1), 12, 1e-11, &e);
      err[p] = e;
    }
  });
  double total = std::accumulate(val.begin(), val.end(), 0.0);
  double error = std::accumulate(err.begin(), err.end(), 0.0);
  return { total, total + error };
}

//! Linear (tensor) binning of atoms onto the lattice origin + h * index.
std::vector<double> bin_atoms(const DiscreteMeasure& dm, const Vec& origin, double h,
                              const std::vector<std::size_t>& shape)
{
  const int d = dm.dim();
  std::vector<double> out(d == 1 ? shape[0] : shape[0] * shape[1], 0.0);
  for (std::size_t a = 0; a < dm.size(); ++a) {
    double w[2] = { 0, 0 };
    long i[2] = { 0, 0 };
    for (int c = 0; c < d; ++c) {
      double u = (dm.points(c, static_cast<Eigen::Index>(a)) - origin(c)) / h;
      i[c] = static_cast<long>(std::floor(u));
      w[c] = u - static_cast<double>(i[c]);
      const long n = static_cast<long>(shape[c]);
      if (i[c] < 0 || i[c] >= n || (w[c] > 0 && i[c] + 1 >= n))
        throw InvalidInput("bin_atoms: atom outside the lattice window");
    }
    const double m = dm.mass[a];
    if (d == 1) {
      out[i[0]] += m * (1 - w[0]);
      if (w[0] > 0)
        out[i[0] + 1] += m * w[0];
    } else {
      for (int s0 = 0; s0 < 2; ++s0)
        for (int s1 = 0; s1 < 2; ++s1) {
          double wt = (s0 ? w[0] : 1 - w[0]) * (s1 ? w[1] : 1 - w[1]);
          if (wt > 0)
            out[(i[0] + s0) * shape[1] + i[1] + s1] += m * wt;
        }
    }
  }
  return out;
}

//! Lattice aligned with `ref_origin + h Z^d` that covers the atoms.
GridMeasure binned_grid(const DiscreteMeasure& dm, const Vec& ref_origin, double h)
{
  const int d = dm.dim();
  Vec lo = dm.points.rowwise().minCoeff(), hi = dm.points.rowwise().maxCoeff();
  Vec origin(d);
  std::vector<std::size_t> shape(d);
  for (int c = 0; c < d; ++c) {
    double i0 = std::floor((lo(c) - ref_origin(c)) / h);
    double i1 = std::ceil((hi(c) - ref_origin(c)) / h) + 1;
    origin(c) = ref_origin(c) + i0 * h;
    shape[c] = static_cast<std::size_t>(i1 - i0) + 1;
  }
  std::vector<double> mass = bin_atoms(dm, origin, h, shape);
  return GridMeasure(origin, h, shape, std::move(mass));
}

L1Value measure_l1(const Measure& m, double r, int k, const DetailOptions& opt)
{
  const double y = k * r * r;
  const int threads = opt.threads > 0 ? opt.threads : default_threads();
  if (const auto* g = std::get_if<GridMeasure>(&m)) {
    if (g->h > r / 20 * (1 + 1e-12)) {
      std::ostringstream msg;
      msg << "detail: grid cell width " << g->h << " exceeds r/20 = " << r / 20;
      throw InvalidInput(msg.str());
    }
    return grid_l1(*g, y, k, opt);
  }
  const auto& dm = std::get<DiscreteMeasure>(m);
  if (dm.dim() == 1)
    return atoms1d_l1(sorted_atoms(dm), y, k, opt);
  if (dm.dim() != 2)
    throw Unsupported("detail: only d in {1, 2} is supported");

  const double h = r / 20;
  const double W = tail_radius(k) * std::sqrt(y);
  {
    Rows2D rows(dm, y, k);
    const double sigma = std::sqrt(y);
    const double ny = (rows.y_hi() - rows.y_lo()) / sigma;
    const double nx = rows.x_span() / sigma * 8 * (1 + std::sqrt(static_cast<double>(k)));
    const double window =
      std::min(1.0, 4 * W * W / (rows.x_span() * (rows.y_hi() - rows.y_lo())));
    const double cost = 30 * ny * nx * static_cast<double>(dm.size()) * window;
    if (cost <= static_cast<double>(opt.direct_budget))
      return atoms2d_rows_l1(rows, threads);
  }
  Vec lo = dm.points.rowwise().minCoeff(), hi = dm.points.rowwise().maxCoeff();
  Vec origin = lo.array() - W;
  std::vector<std::size_t> shape(2);
  double cells = 1;
  for (int c = 0; c < 2; ++c) {
    double n = std::ceil((hi(c) - lo(c) + 2 * W) / h) + 1;
    shape[c] = static_cast<std::size_t>(n);
    cells *= n;
  }
  if (cells > static_cast<double>(opt.max_cells)) {
    std::ostringstream msg;
    msg << "detail: the window padded by " << W << " on each side needs " << cells
        << " cells, budget is " << opt.max_cells;
    throw BudgetExceeded(msg.str());
  }
  const double per_atom = std::pow(2 * W / h + 1, 2);
  if (per_atom * static_cast<double>(dm.size()) <= static_cast<double>(opt.direct_budget))
    return atoms2d_direct_l1(dm, y, k, h, origin, shape, threads);
  return grid_l1(binned_grid(dm, lo, h), y, k, opt);
}

DiscreteMeasure lattice_atoms(const GridMeasure& g)
{
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < g.cells(); ++i)
    if (g.mass[i] > 0)
      keep.push_back(i);
  Mat pts(g.d, static_cast<Eigen::Index>(keep.size()));
  std::vector<double> mass;
  for (std::size_t t = 0; t < keep.size(); ++t) {
    pts.col(static_cast<Eigen::Index>(t)) = g.point(keep[t]);
    mass.push_back(g.mass[keep[t]]);
  }
  return DiscreteMeasure(std::move(pts), std::move(mass));
}

DiscreteMeasure as_atoms(const Measure& m)
{
  if (const auto* g = std::get_if<GridMeasure>(&m))
    return lattice_atoms(*g);
  return std::get<DiscreteMeasure>(m);
}

} // namespace

// ---------------------------------------------------------------------------
// measures

GridMeasure::GridMeasure(Vec origin_, double h_, std::vector<std::size_t> shape_,
                         std::vector<double> mass_)
  : d(static_cast<int>(origin_.size()))
  , origin(std::move(origin_))
  , h(h_)
  , shape(std::move(shape_))
  , mass(std::move(mass_))
{
  if (d < 1 || d > 2)
    throw InvalidInput("GridMeasure: d must be 1 or 2");
  if (static_cast<int>(shape.size()) != d)
    throw InvalidInput("GridMeasure: shape rank must equal d");
  if (!(h > 0) || !std::isfinite(h))
    throw InvalidInput("GridMeasure: cell width must be positive");
  std::size_t n = 1;
  for (auto s : shape) {
    if (s == 0)
      throw InvalidInput("GridMeasure: empty axis");
    n *= s;
  }
  if (mass.size() != n)
    throw InvalidInput("GridMeasure: mass count does not match the shape");
  double total = 0;
  for (double v : mass) {
    if (!(v >= 0) || !std::isfinite(v))
      throw InvalidInput("GridMeasure: masses must be finite and nonnegative");
    total += v;
  }
  if (std::abs(total - 1) > mass_tolerance(n))
    throw InvalidInput("GridMeasure: masses must sum to 1");
}

Vec GridMeasure::point(std::size_t flat) const
{
  Vec x = origin;
  for (int a = d - 1; a >= 0; --a) {
    x(a) += h * static_cast<double>(flat % shape[a]);
    flat /= shape[a];
  }
  return x;
}

DiscreteMeasure::DiscreteMeasure(Mat points_, std::vector<double> mass_)
  : points(std::move(points_))
  , mass(std::move(mass_))
{
  if (points.rows() < 1 || points.cols() < 1)
    throw InvalidInput("DiscreteMeasure: need at least one atom");
  if (static_cast<std::size_t>(points.cols()) != mass.size())
    throw InvalidInput("DiscreteMeasure: one mass per atom");
  if (!points.allFinite())
    throw InvalidInput("DiscreteMeasure: atoms must be finite");
  double total = 0;
  for (double v : mass) {
    if (!(v > 0) || !std::isfinite(v))
      throw InvalidInput("DiscreteMeasure: masses must be positive");
    total += v;
  }
  if (std::abs(total - 1) > mass_tolerance(mass.size()))
    throw InvalidInput("DiscreteMeasure: masses must sum to 1");
}

DiscreteMeasure DiscreteMeasure::dirac(const Vec& x)
{
  return DiscreteMeasure(Mat(x), { 1.0 });
}

DiscreteMeasure DiscreteMeasure::from_samples(const SampleSet& s)
{
  std::vector<double> w(s.size());
  double total = 0;
  for (std::size_t i = 0; i < s.size(); ++i)
    total += w[i] = s.weight(i);
  for (auto& v : w)
    v /= total;
  return DiscreteMeasure(s.points, std::move(w));
}

int dimension(const Measure& m)
{
  return std::visit(
    [](const auto& x) {
      if constexpr (std::is_same_v<std::decay_t<decltype(x)>, GridMeasure>)
        return x.d;
      else
        return x.dim();
    },
    m);
}

// ---------------------------------------------------------------------------
// constants and kernels

double q_constant(int d)
{
  if (d < 1)
    throw InvalidInput("q_constant: d must be at least 1");
  return 0.5 * std::tgamma(d / 2.0) * std::pow(d / (2 * euler_e), -d / 2.0);
}

double q_prime_constant(int d)
{
  return 4 * euler_e / q_constant(d);
}

double heat_kernel_deriv(double y, int k, const Vec& x)
{
  if (!(y > 0) || !std::isfinite(y))
    throw InvalidInput("heat_kernel_deriv: y must be positive");
  if (k < 0)
    throw InvalidInput("heat_kernel_deriv: k must be nonnegative");
  if (x.size() < 1)
    throw InvalidInput("heat_kernel_deriv: empty point");
  return RadialKernel(y, k, static_cast<int>(x.size()))(x.squaredNorm());
}

double heat_kernel_deriv_norm(int k, int d)
{
  if (k < 0 || d < 1)
    throw InvalidInput("heat_kernel_deriv_norm: need k >= 0 and d >= 1");
  static std::mutex mu;
  static std::map<std::pair<int, int>, double> cache;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find({ k, d });
    if (it != cache.end())
      return it->second;
  }
  const double alpha = d / 2.0 - 1;
  // sign changes of L_k^(alpha)(t) lie in (0, 4k + 2 alpha + 2)
  std::vector<double> cuts{ 0.0 };
  const double t_max = 4.0 * k + 2 * alpha + 10;
  const double dt = 1e-3;
  double prev = laguerre(k, alpha, 0);
  for (double t = dt; t <= t_max; t += dt) {
    double cur = laguerre(k, alpha, t);
    if ((prev < 0) != (cur < 0)) {
      double a = t - dt, b = t;
      for (int it = 0; it < 80; ++it) {
        double mid = 0.5 * (a + b);
        if ((laguerre(k, alpha, mid) < 0) == (laguerre(k, alpha, a) < 0))
          a = mid;
        else
          b = mid;
      }
      cuts.push_back(std::sqrt(2 * (0.5 * (a + b))));
    }
    prev = cur;
  }
  RadialKernel kern(1.0, k, d);
  auto f = [&](double rho) { return std::abs(kern(rho * rho)) * std::pow(rho, d - 1); };
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  double total = 0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    total += GK::integrate(f, cuts[i], cuts[i + 1], 15, 1e-14);
  total += GK::integrate(f, cuts.back(), std::numeric_limits<double>::infinity(), 15, 1e-14);
  const double sphere = 2 * std::pow(pi, d / 2.0) / std::tgamma(d / 2.0);
  total *= sphere;
  std::lock_guard<std::mutex> lock(mu);
  cache[{ k, d }] = total;
  return total;
}

// ---------------------------------------------------------------------------
// detail

LevelMeasure level_measure(const SimMeasure& mu, int n, std::size_t max_atoms)
{
  if (n < 0)
    throw InvalidInput("level_measure: n must be nonnegative");
  const int d = mu.dim();
  const std::size_t k = mu.size();
  double count = std::pow(static_cast<double>(k), n);
  if (count > static_cast<double>(max_atoms)) {
    std::ostringstream msg;
    msg << "level_measure: " << k << "^" << n << " atoms exceed the budget " << max_atoms;
    throw BudgetExceeded(msg.str());
  }
  Mat pts = Mat::Zero(d, 1);
  std::vector<double> mass{ 1.0 };
  double mean_rho = 0, mean_b = 0;
  for (const auto& a : mu.atoms()) {
    double p = a.p.convert_to<double>();
    mean_rho += p * a.g.rho_f();
    mean_b += p * a.g.b_f().norm();
  }
  for (int step = 0; step < n; ++step) {
    Mat next(d, pts.cols() * static_cast<Eigen::Index>(k));
    std::vector<double> nm(mass.size() * k);
    for (std::size_t i = 0; i < k; ++i) {
      const Similarity& g = mu[i].g;
      double p = mu[i].p.convert_to<double>();
      Mat img = g.rho_f() * (g.U_f() * pts);
      img.colwise() += g.b_f();
      next.middleCols(static_cast<Eigen::Index>(i) * pts.cols(), pts.cols()) = img;
      for (std::size_t j = 0; j < mass.size(); ++j)
        nm[i * mass.size() + j] = p * mass[j];
    }
    pts = std::move(next);
    mass = std::move(nm);
  }
  // Masses below the double range carry no weight at any resolution.
  std::vector<Eigen::Index> keep;
  double total = 0;
  for (std::size_t j = 0; j < mass.size(); ++j)
    if (mass[j] > 0) {
      keep.push_back(static_cast<Eigen::Index>(j));
      total += mass[j];
    }
  Mat kept(d, static_cast<Eigen::Index>(keep.size()));
  std::vector<double> km(keep.size());
  for (std::size_t j = 0; j < keep.size(); ++j) {
    kept.col(static_cast<Eigen::Index>(j)) = pts.col(keep[j]);
    km[j] = mass[static_cast<std::size_t>(keep[j])] / total;
  }
  double bound = mean_rho < 1 ? std::pow(mean_rho, n) * mean_b / (1 - mean_rho)
                              : std::numeric_limits<double>::infinity();
  return { DiscreteMeasure(std::move(kept), std::move(km)), n, bound };
}

DetailValue order_k_detail(const Measure& m, double r, int k, const DetailOptions& opt)
{
  check_scale(r, k, "order_k_detail");
  const int d = dimension(m);
  L1Value l1 = measure_l1(m, r, k, opt);
  const double factor = std::pow(r * r * q_constant(d), k);
  DetailValue out;
  out.raw = factor * l1.fine;
  out.error = factor * std::abs(l1.fine - l1.coarse);
  out.value = std::clamp(out.raw, 0.0, 1.0);
  return out;
}

DetailValue detail(const Measure& m, double r, const DetailOptions& opt)
{
  return order_k_detail(m, r, 1, opt);
}

DetailValue detail(const SampleSet& s, double r, int k, const DetailOptions& opt)
{
  if (s.size() == 0)
    throw InvalidInput("detail: empty sample set");
  DetailValue out = order_k_detail(DiscreteMeasure::from_samples(s), r, k, opt);
  Vec extent = s.points.rowwise().maxCoeff() - s.points.rowwise().minCoeff();
  double volume = 1;
  for (int c = 0; c < s.dim(); ++c)
    volume *= std::max(extent(c), 0.0);
  double spacing = volume > 0 ? std::pow(volume / static_cast<double>(s.size()), 1.0 / s.dim())
                              : extent.maxCoeff() / static_cast<double>(s.size());
  out.sampling_bias = 0.5 * spacing / r;
  return out;
}

std::vector<DetailScanEntry> scan_detail(const Measure& m, double r_max, double r_min, int count,
                                         int k, const DetailOptions& opt)
{
  if (!(r_max > 0) || !(r_min > 0) || r_min > r_max || count < 1)
    throw InvalidInput("scan_detail: need 0 < r_min <= r_max and count >= 1");
  std::vector<DetailScanEntry> out;
  for (int i = 0; i < count; ++i) {
    double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
    double r = r_max * std::pow(r_min / r_max, t);
    out.push_back({ r, order_k_detail(m, r, k, opt) });
  }
  return out;
}

// ---------------------------------------------------------------------------
// convolution

Measure convolve(const Measure& a, const Measure& b)
{
  const int d = dimension(a);
  if (d != dimension(b))
    throw InvalidInput("convolve: dimension mismatch");
  const auto* da = std::get_if<DiscreteMeasure>(&a);
  const auto* db = std::get_if<DiscreteMeasure>(&b);
  if (da && db) {
    const std::size_t n = da->size() * db->size();
    if (n > 10000000)
      throw BudgetExceeded("convolve: atomic convolution exceeds 10^7 atoms");
    Mat pts(d, static_cast<Eigen::Index>(n));
    std::vector<double> mass(n);
    std::size_t t = 0;
    for (std::size_t i = 0; i < da->size(); ++i)
      for (std::size_t j = 0; j < db->size(); ++j, ++t) {
        pts.col(static_cast<Eigen::Index>(t)) =
          da->points.col(static_cast<Eigen::Index>(i)) + db->points.col(static_cast<Eigen::Index>(j));
        mass[t] = da->mass[i] * db->mass[j];
      }
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto x, auto y) {
      for (int c = 0; c < d; ++c) {
        double u = pts(c, static_cast<Eigen::Index>(x)), v = pts(c, static_cast<Eigen::Index>(y));
        if (u != v)
          return u < v;
      }
      return false;
    });
    std::vector<std::size_t> keep;
    std::vector<double> out_mass;
    for (auto i : idx) {
      if (!keep.empty()) {
        auto p = pts.col(static_cast<Eigen::Index>(keep.back()));
        auto q = pts.col(static_cast<Eigen::Index>(i));
        if ((p - q).cwiseAbs().maxCoeff() <= 1e-12 * (1 + q.cwiseAbs().maxCoeff())) {
          out_mass.back() += mass[i];
          continue;
        }
      }
      keep.push_back(i);
      out_mass.push_back(mass[i]);
    }
    Mat out(d, static_cast<Eigen::Index>(keep.size()));
    for (std::size_t s = 0; s < keep.size(); ++s)
      out.col(static_cast<Eigen::Index>(s)) = pts.col(static_cast<Eigen::Index>(keep[s]));
    return DiscreteMeasure(std::move(out), std::move(out_mass));
  }

  const GridMeasure* ga = std::get_if<GridMeasure>(&a);
  const GridMeasure* gb = std::get_if<GridMeasure>(&b);
  std::optional<GridMeasure> binned;
  if (!ga) {
    binned = binned_grid(*da, gb->origin, gb->h);
    ga = &*binned;
  } else if (!gb) {
    binned = binned_grid(*db, ga->origin, ga->h);
    gb = &*binned;
  }
  if (std::abs(ga->h - gb->h) > 1e-12 * ga->h)
    throw InvalidInput("convolve: grids must share the cell width");
  std::vector<std::size_t> so;
  std::vector<double> mass =
    fft_convolve(ga->mass, ga->shape, gb->mass, gb->shape, so, std::size_t(1) << 26);
  double total = 0;
  for (auto& v : mass) {
    v = std::max(v, 0.0);
    total += v;
  }
  for (auto& v : mass)
    v /= total;
  return GridMeasure(ga->origin + gb->origin, ga->h, so, std::move(mass));
}

Measure convolve(const std::vector<Measure>& ms)
{
  if (ms.empty())
    throw InvalidInput("convolve: empty list");
  Measure acc = ms.front();
  for (std::size_t i = 1; i < ms.size(); ++i)
    acc = convolve(acc, ms[i]);
  return acc;
}

// ---------------------------------------------------------------------------
// property checks

ProductCheck check_product_bound(const std::vector<Measure>& ms, double r,
                                 const DetailOptions& opt)
{
  if (ms.empty())
    throw InvalidInput("check_product_bound: empty list");
  const int k = static_cast<int>(ms.size());
  DetailValue lhs = order_k_detail(convolve(ms), r, k, opt);
  ProductCheck out{};
  out.lhs = lhs.value;
  out.rhs = 1;
  out.error = lhs.error;
  for (const auto& m : ms) {
    DetailValue s = detail(m, r, opt);
    out.rhs *= s.value;
    out.error += s.error;
  }
  out.slack = out.rhs - out.lhs;
  out.holds = out.lhs <= out.rhs + out.error + 1e-9;
  return out;
}

StrongProductCheck check_strong_product(const std::vector<Measure>& ms, double a, double b,
                                        double alpha, int grid, const DetailOptions& opt)
{
  if (ms.empty())
    throw InvalidInput("check_strong_product: empty list");
  if (!(a > 0) || !(b >= a))
    throw InvalidInput("check_strong_product: need 0 < a <= b");
  if (!(alpha > 0) || !(alpha < 1))
    throw InvalidInput("check_strong_product: alpha must lie in (0, 1)");
  const int k = static_cast<int>(ms.size());
  const int d = dimension(ms.front());
  StrongProductCheck out{};
  for (std::size_t i = 0; i < ms.size(); ++i)
    for (const auto& e : scan_detail(ms[i], b, a, a == b ? 1 : std::max(grid, 2), 1, opt))
      if (e.s.value > alpha)
        out.failures.push_back({ i, e.r, e.s.value });
  out.premise_ok = out.failures.empty();
  out.bound = std::pow(q_prime_constant(d), k - 1) *
              (std::pow(alpha, k) + factorial(k) * k * a * a / (b * b));
  DetailValue obs = detail(convolve(ms), a * std::sqrt(static_cast<double>(k)), opt);
  out.observed = obs.value;
  out.holds = !out.premise_ok || out.observed <= out.bound + obs.error + 1e-9;
  return out;
}

double wasserstein1(const Measure& a, const Measure& b)
{
  if (dimension(a) != 1 || dimension(b) != 1)
    throw Unsupported("wasserstein1: exact W1 is implemented on R only");
  DiscreteMeasure x = as_atoms(a), y = as_atoms(b);
  std::vector<double> xa(x.points.data(), x.points.data() + x.size());
  std::vector<double> ya(y.points.data(), y.points.data() + y.size());
  return wasserstein1_1d(xa, x.mass, ya, y.mass);
}

WassersteinCheck check_wasserstein_lipschitz(const Measure& a, const Measure& b, double r, int k,
                                             const DetailOptions& opt)
{
  const int d = dimension(a);
  if (d != dimension(b))
    throw InvalidInput("check_wasserstein_lipschitz: dimension mismatch");
  WassersteinCheck out{};
  if (d == 1) {
    out.w1 = wasserstein1(a, b);
    out.w1_exact = true;
  } else {
    const auto* da = std::get_if<DiscreteMeasure>(&a);
    const auto* db = std::get_if<DiscreteMeasure>(&b);
    if (!da || !db || da->size() != db->size() || da->mass != db->mass)
      throw Unsupported("check_wasserstein_lipschitz: in d = 2 the atom lists must pair up "
                        "index by index with equal masses");
    for (std::size_t i = 0; i < da->size(); ++i)
      out.w1 += da->mass[i] * (da->points.col(static_cast<Eigen::Index>(i)) -
                               db->points.col(static_cast<Eigen::Index>(i)))
                                .norm();
    out.w1_exact = false;
  }
  DetailValue sa = order_k_detail(a, r, k, opt), sb = order_k_detail(b, r, k, opt);
  out.delta = std::abs(sa.raw - sb.raw);
  out.error = sa.error + sb.error;
  out.bound = euler_e * d * out.w1 / r;
  out.holds = out.delta <= out.bound + out.error + 1e-9;
  return out;
}

// ---------------------------------------------------------------------------
// PSD partition

namespace {

struct Whitened
{
  std::vector<Mat> A;
  double C, c;
  int d;
};

Whitened whiten(const std::vector<Mat>& As, int k)
{
  if (k < 1)
    throw InvalidInput("partition_psd: k must be at least 1");
  if (As.empty() || static_cast<std::size_t>(k) > As.size())
    throw InvalidInput("partition_psd: need 1 <= k <= n");
  const Eigen::Index d = As.front().rows();
  Mat M = Mat::Zero(d, d);
  Whitened w{};
  w.d = static_cast<int>(d);
  for (const auto& A : As) {
    if (A.rows() != d || A.cols() != d)
      throw InvalidInput("partition_psd: matrices must be square of a common size");
    double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
    if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
      throw InvalidInput("partition_psd: matrix is not symmetric");
    Eigen::SelfAdjointEigenSolver<Mat> es(A);
    if (es.eigenvalues().minCoeff() < -1e-12 * scale)
      throw InvalidInput("partition_psd: matrix is not positive semidefinite");
    w.c = std::max(w.c, es.eigenvalues().cwiseAbs().maxCoeff());
    M += A;
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(M);
  const double lmin = es.eigenvalues().minCoeff();
  if (!(lmin > 0))
    throw PreconditionFailed("partition_psd: the sum of the matrices is singular");
  w.C = lmin / k;
  Vec inv_sqrt = (lmin / es.eigenvalues().array()).sqrt();
  Mat Q = es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().transpose();
  for (const auto& A : As)
    w.A.push_back(Q * A * Q);
  return w;
}

constexpr double exact_partition_limit = 1 << 20;

double frob2(const Mat& A)
{
  return A.squaredNorm();
}

} // namespace

double partition_objective(const std::vector<Mat>& As, int k, const std::vector<int>& assignment)
{
  Whitened w = whiten(As, k);
  if (assignment.size() != As.size())
    throw InvalidInput("partition_objective: one part index per matrix");
  std::vector<Mat> S(k, Mat::Zero(w.d, w.d));
  for (std::size_t i = 0; i < As.size(); ++i) {
    if (assignment[i] < 0 || assignment[i] >= k)
      throw InvalidInput("partition_objective: part index out of range");
    S[assignment[i]] += w.A[i];
  }
  double obj = 0;
  for (const auto& s : S)
    obj += frob2(s);
  return obj;
}

PsdPartition partition_psd(const std::vector<Mat>& As, int k)
{
  Whitened w = whiten(As, k);
  const std::size_t n = As.size();
  std::vector<int> part(n);
  std::vector<Mat> S(k, Mat::Zero(w.d, w.d));
  for (std::size_t i = 0; i < n; ++i) {
    part[i] = static_cast<int>(i % static_cast<std::size_t>(k));
    S[part[i]] += w.A[i];
  }
  PsdPartition out;
  if (std::pow(static_cast<double>(k), static_cast<double>(n)) <= exact_partition_limit) {
    // exact minimum; parts are interchangeable, so item i only opens part
    // max_used + 1
    std::vector<int> cur(n, 0), used(n + 1, 0);
    std::vector<Mat> T(k, Mat::Zero(w.d, w.d));
    double best = std::numeric_limits<double>::infinity();
    std::function<void(std::size_t, int)> rec = [&](std::size_t i, int open) {
      if (i == n) {
        double obj = 0;
        for (const auto& t : T)
          obj += frob2(t);
        if (obj < best) {
          best = obj;
          part = cur;
        }
        return;
      }
      for (int j = 0; j < std::min(open + 1, k); ++j) {
        cur[i] = j;
        T[j] += w.A[i];
        rec(i + 1, std::max(open, j + 1));
        T[j] -= w.A[i];
      }
    };
    rec(0, 0);
    for (int j = 0; j < k; ++j)
      S[j].setZero();
    for (std::size_t i = 0; i < n; ++i)
      S[part[i]] += w.A[i];
    out.exact = true;
  }
  double scale = 0;
  for (const auto& A : w.A)
    scale = std::max(scale, frob2(A));
  const double tol = 1e-12 * std::max(scale, w.C * w.C);
  auto dot = [](const Mat& x, const Mat& y) { return (x.array() * y.array()).sum(); };

  bool improved = true;
  while (improved) {
    improved = false;
    // single moves, first improvement in index order
    bool moved = true;
    while (moved) {
      moved = false;
      for (std::size_t i = 0; i < n; ++i)
        for (int j = 0; j < k; ++j) {
          if (j == part[i])
            continue;
          const Mat& v = w.A[i];
          double delta = 2 * (dot(v, S[j]) - dot(v, S[part[i]])) + 2 * frob2(v);
          if (delta < -tol) {
            S[part[i]] -= v;
            S[j] += v;
            part[i] = j;
            ++out.moves;
            moved = improved = true;
          }
        }
    }
    // pair swaps between parts
    for (std::size_t i = 0; i < n && !improved; ++i)
      for (std::size_t t = i + 1; t < n && !improved; ++t) {
        if (part[i] == part[t])
          continue;
        Mat u = w.A[i] - w.A[t];
        double delta = 2 * (dot(u, S[part[t]]) - dot(u, S[part[i]])) + 2 * frob2(u);
        if (delta < -tol) {
          S[part[i]] -= u;
          S[part[t]] += u;
          std::swap(part[i], part[t]);
          ++out.moves;
          improved = true;
        }
      }
  }

  out.parts.assign(k, {});
  out.sums.assign(k, Mat::Zero(w.d, w.d));
  for (std::size_t i = 0; i < n; ++i) {
    out.parts[part[i]].push_back(i);
    out.sums[part[i]] += As[i];
  }
  out.C = w.C;
  out.c = w.c;
  const double d = w.d;
  out.guarantee = w.C - d * std::sqrt(2 * w.c * w.C) - 2 * std::pow(d, 1.5) * w.c;
  out.deviation_bound = d * std::sqrt(2 * w.c * w.C) + 2 * std::pow(d, 1.5) * w.c;
  out.bound_holds = true;
  for (int j = 0; j < k; ++j) {
    out.objective += frob2(S[j]);
    out.deviation =
      std::max(out.deviation, (S[j] - w.C * Mat::Identity(w.d, w.d)).norm());
    Eigen::SelfAdjointEigenSolver<Mat> es(out.sums[j]);
    out.min_eigenvalue.push_back(es.eigenvalues().minCoeff());
    if (out.min_eigenvalue.back() < out.guarantee - 1e-9 * std::max(1.0, std::abs(w.C)))
      out.bound_holds = false;
  }
  return out;
}

// ---------------------------------------------------------------------------
// small random variables

SmallRvCheck small_rv_detail_check(const std::vector<Law1D>& xs, double r, int k, double C,
                                   std::uint64_t seed, const DetailOptions& opt)
{
  check_scale(r, k, "small_rv_detail_check");
  if (!(C > 0))
    throw InvalidInput("small_rv_detail_check: C must be positive");
  if (xs.empty())
    throw InvalidInput("small_rv_detail_check: no variables");
  std::vector<Mat> vars;
  std::vector<Law1D> centred;
  double total_var = 0;
  for (const auto& x : xs) {
    if (x.values.empty() || x.values.size() != x.probs.size())
      throw InvalidInput("small_rv_detail_check: malformed law");
    if (x.bound() > r / C * (1 + 1e-12))
      throw PreconditionFailed("small_rv_detail_check: |X_i| exceeds r / C");
    double m = x.mean();
    double v = std::max(0.0, x.second_moment() - m * m);
    total_var += v;
    vars.push_back(Mat::Constant(1, 1, v));
    Law1D c = x;
    for (auto& val : c.values)
      val -= m;
    centred.push_back(std::move(c));
  }
  if (total_var < C * k * r * r * (1 - 1e-12)) {
    std::ostringstream msg;
    msg << "small_rv_detail_check: total variance " << total_var << " is below C k r^2 = "
        << C * k * r * r;
    throw PreconditionFailed(msg.str());
  }

  PsdPartition part = partition_psd(vars, k);
  SmallRvCheck out{};
  out.parts = part.parts;
  out.exact = true;
  out.target = 1;
  out.gaussian_reference = 1;
  for (int j = 0; j < k; ++j) {
    std::vector<Law1D> laws;
    double v = 0;
    for (auto i : part.parts[j]) {
      laws.push_back(centred[i]);
      v += vars[i](0, 0);
    }
    bool exact = true;
    Law1D s = sum_law(laws, seed + static_cast<std::uint64_t>(j), 200000, 2000000, &exact);
    out.exact = out.exact && exact;
    double w1 = v > 0 ? wasserstein1_to_normal(s, 0.0, std::sqrt(v)) : 0.0;
    double a = std::min(1.0, r * r / (r * r + v) + euler_e * w1 / r);
    out.variance.push_back(v);
    out.alpha.push_back(a);
    out.target *= a;
    out.gaussian_reference *= r * r / (r * r + v);
  }

  bool exact = true;
  Law1D sum = sum_law(centred, seed + static_cast<std::uint64_t>(k), 200000, 2000000, &exact);
  out.exact = out.exact && exact;
  // binomial-type tails underflow to zero mass; drop those atoms
  std::vector<double> vals, probs;
  for (std::size_t i = 0; i < sum.values.size(); ++i)
    if (sum.probs[i] > 0) {
      vals.push_back(sum.values[i]);
      probs.push_back(sum.probs[i]);
    }
  double total = std::accumulate(probs.begin(), probs.end(), 0.0);
  for (auto& p : probs)
    p /= total;
  Mat pts = Eigen::Map<const Mat>(vals.data(), 1, static_cast<Eigen::Index>(vals.size()));
  DetailValue obs = order_k_detail(DiscreteMeasure(std::move(pts), std::move(probs)), r, k, opt);
  out.observed = obs.value;
  out.error = obs.error;
  out.holds = out.observed <= out.target + out.error + 1e-9;
  return out;
}

} // namespace selfsim
