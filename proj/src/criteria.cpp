#include "selfsim/criteria.hpp"

#include "selfsim/errors.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace selfsim {

namespace {

double sq(double x) { return x * x; }

double log_ratio_term(double S, double h)
{
  return sq(std::max(1.0, std::log(S / h)));
}

double to_double(const Rational& x) { return x.convert_to<double>(); }

SimMeasure u_part_measure(const SimMeasure& mu)
{
  std::vector<Atom> atoms;
  int d = mu.dim();
  for (const auto& a : mu.atoms())
    atoms.push_back({ a.p, Similarity(QuadraticNumber(1), a.g.U(), ExactVector(d)) });
  return SimMeasure(std::move(atoms));
}

//! L = max(1, max log height of the U entries) and the degree of their field.
std::pair<double, int> u_height(const SimMeasure& mu)
{
  double L = 1;
  long long D = 0;
  for (const auto& a : mu.atoms())
    for (const auto& e : a.g.U().a) {
      L = std::max(L, log_height(AlgebraicNumber(e)));
      if (!e.is_rational())
        D = common_radicand(D, e.radicand());
    }
  return { L, D == 0 ? 1 : 2 };
}

void run_diagnostics(const SimMeasure& mu, const CriterionOptions& opt, CriterionReport& r)
{
  int d = mu.dim();
  MixingConfig mc;
  mc.kappa = opt.diagnostic_kappa;
  mc.T = opt.diagnostic_T;
  mc.samples = opt.diagnostic_samples;
  mc.seed = opt.seed;
  mc.threads = opt.enumeration.threads;
  Vec e1 = Vec::Zero(d);
  e1(0) = 1;
  r.well_mixing = well_mixing_estimate(mu, mc, e1, e1);

  SampleOptions so;
  so.seed = opt.seed + 1;
  so.threads = opt.enumeration.threads;
  SampleSet s = sample_stationary(mu, opt.diagnostic_samples, so);
  Vec mean = s.points.rowwise().mean();
  double var = 0, radius = 0;
  for (Eigen::Index i = 0; i < s.points.cols(); ++i) {
    var += (s.points.col(i) - mean).squaredNorm();
    radius = std::max(radius, s.points.col(i).norm());
  }
  double sd = std::sqrt(var / static_cast<double>(s.size()) / d);
  double theta = std::max(0.1 * sd, 1e-300);
  double A = 2 * radius + 1;
  Estimate best{ -1, 0, s.size() };
  for (int axis = 0; axis < d; ++axis) {
    Vec n = Vec::Zero(d);
    n(axis) = 1;
    Estimate e = slab_mass(s, Slab{ { n }, mean }, theta, A);
    if (e.value > best.value)
      best = e;
  }
  r.non_degeneracy = best;
  std::ostringstream note;
  note.precision(6);
  note << "heuristic: kappa=" << mc.kappa << " T=" << mc.T << " samples=" << mc.samples
       << " theta=" << theta << " A=" << A;
  r.diagnostics_note = note.str();
}

//! Unique x > 1 with x = (log x)^-2; it lies in [2, 5/2].
double eta_prime()
{
  auto f = [](double x) { return x - 1 / sq(std::log(x)); };
  boost::uintmax_t iters = 100;
  auto root = boost::math::tools::toms748_solve(f, 2.0, 2.5,
                                                boost::math::tools::eps_tolerance<double>(52), iters);
  return 0.5 * (root.first + root.second);
}

std::string join(const std::vector<std::string>& v)
{
  std::string out;
  for (const auto& s : v)
    out += (out.empty() ? "" : "; ") + s;
  return out;
}

} // namespace

CriterionReport main_criterion(const SimMeasure& mu, const CriterionOptions& opt)
{
  if (!(opt.C > 0))
    throw InvalidInput("main_criterion: C must be positive");
  CriterionReport r;
  r.C = opt.C;
  r.u_part = opt.u_part;

  r.common_fixed_point = has_common_fixed_point(mu);
  if (r.common_fixed_point)
    r.gate_failures.push_back("common fixed point");
  r.irreducible = is_irreducible(mu);
  if (!r.irreducible)
    r.gate_failures.push_back("rotation part is not irreducible");
  r.chi = lyapunov_exponent(mu);
  if (r.chi.kind == Contraction::not_contracting)
    r.gate_failures.push_back("not contracting on average (chi >= 0)");

  if (opt.u_part) {
    if (mu.dim() < 3)
      r.gate_failures.push_back("rotation-part variant needs d >= 3");
    if (!mu.is_exact())
      throw Unsupported("main_criterion: rotation-part variant needs exact rotation parts");
    r.entropy = entropy_bound(u_part_measure(mu), opt.entropy_level, opt.enumeration);
    auto [L, D] = u_height(mu);
    r.u_log_height = L;
    r.u_field_degree = D;
    r.separation_note = "S replaced by L [K:Q] of the rotation parts";
  } else {
    r.entropy = entropy_bound(mu, opt.entropy_level, opt.enumeration);
    if (!mu.is_exact()) {
      r.separation_note = "numeric maps carry no algebraic data; no bound on S";
    } else {
      try {
        r.separation = height_separation_bound(mu);
      } catch (const Unsupported& e) {
        r.separation_note = e.what();
      }
    }
  }

  if (r.entropy.lower && *r.entropy.lower > 0 && r.chi.value < 0) {
    double h = *r.entropy.lower;
    r.ratio = h / std::abs(r.chi.value);
    std::optional<double> S;
    if (opt.u_part)
      S = r.u_log_height * r.u_field_degree;
    else if (r.separation)
      S = r.separation->value;
    if (S) {
      r.rhs = opt.C * log_ratio_term(*S, h);
      r.margin = *r.ratio - *r.rhs;
    }
  }

  if (opt.diagnostics && r.chi.value < 0)
    run_diagnostics(mu, opt, r);
  return r;
}

ContractingAverageReport contracting_avg_criterion(const SimMeasure& mu, double epsilon,
                                                   double rho_tilde)
{
  if (!(rho_tilde >= 0 && rho_tilde < 1))
    throw InvalidInput("contracting_avg_criterion: rho_tilde must lie in [0, 1)");
  std::vector<std::pair<double, double>> pts; // (rho, p)
  double mean = 0;
  for (const auto& a : mu.atoms()) {
    double p = to_double(a.p);
    pts.emplace_back(a.g.rho_f(), p);
    mean += p * a.g.rho_f();
  }
  if (mean >= 1)
    throw PreconditionFailed("contracting_avg_criterion: E rho >= 1, the ratio is undefined");
  if (lyapunov_exponent(mu).value >= 0)
    throw PreconditionFailed("contracting_avg_criterion: chi >= 0");

  auto numerator = [&](double x) {
    double s = 0;
    for (auto [rho, p] : pts)
      s += p * std::abs(x - rho);
    return s;
  };
  // Convex and piecewise linear: the minimum over [rho_tilde, 1] sits at a
  // breakpoint or an endpoint.
  std::vector<std::pair<double, bool>> candidates{ { rho_tilde, false }, { 1.0, false } };
  for (auto [rho, p] : pts)
    if (rho > rho_tilde && rho < 1)
      candidates.emplace_back(rho, true);
  ContractingAverageReport out;
  out.mean_rho = mean;
  double best = std::numeric_limits<double>::infinity();
  for (auto [x, interior] : candidates) {
    double v = numerator(x);
    if (v < best || (v == best && interior && !out.attained)) {
      best = v;
      out.rho_hat = x;
      out.attained = interior;
    }
  }
  out.ratio = best / (1 - mean);
  out.threshold = 1 - epsilon;
  out.pass = out.ratio < out.threshold;
  return out;
}

DimensionEstimate dimension_estimate(const SimMeasure& mu, const EntropyBound& h)
{
  Lyapunov chi = lyapunov_exponent(mu);
  if (chi.value >= 0)
    throw PreconditionFailed("dimension_estimate: chi >= 0");
  double d = mu.dim();
  double lo = h.lower ? *h.lower : 0.0;
  DimensionEstimate out;
  out.lower = std::min(d, lo / std::abs(chi.value));
  out.upper = std::min(d, h.upper / std::abs(chi.value));
  out.exact = h.method == EntropyMethod::exact_free;
  out.assumptions = "assumes the separation hypotheses; they are not verified";
  return out;
}

DimensionEstimate dimension_estimate(const SimMeasure& mu, int entropy_level,
                                     const EnumerationOptions& opt)
{
  return dimension_estimate(mu, entropy_bound(mu, entropy_level, opt));
}

std::string to_string(BernoulliCase c)
{
  switch (c) {
    case BernoulliCase::small_mahler:
      return "small_mahler";
    case BernoulliCase::large_mahler:
      return "large_mahler";
    case BernoulliCase::ambiguous:
      return "ambiguous";
  }
  return "?";
}

BernoulliReport bernoulli_criterion(const AlgebraicNumber& lambda, double C, double epsilon)
{
  if (!(C > 0))
    throw InvalidInput("bernoulli_criterion: C must be positive");
  BernoulliReport r;
  r.complex = !lambda.is_real();
  if (!r.complex) {
    Interval x = evaluate(lambda, 1e-15);
    if (!(x.lo() > 0.5 && x.hi() < 1))
      throw InvalidInput("bernoulli_criterion: real lambda must lie in (1/2, 1)");
    r.modulus = x.mid();
  } else {
    auto z = lambda.approx();
    r.modulus = std::abs(z);
    if (!(r.modulus > std::sqrt(0.5) && r.modulus < 1))
      throw InvalidInput("bernoulli_criterion: |lambda| must lie in (2^-1/2, 1)");
    if (std::abs(z.imag()) < epsilon)
      throw InvalidInput("bernoulli_criterion: |Im lambda| < epsilon");
  }
  double eta = std::log(lambda.mahler().mid());
  r.log_mahler = eta;
  double inv_sq = eta == 1 ? std::numeric_limits<double>::infinity() : 1 / sq(std::log(eta));
  r.branch_min = std::min(eta, inv_sq);
  r.threshold = 1 - r.branch_min / C;
  r.margin = r.modulus - r.threshold;
  r.pass = r.margin > 0;
  r.eta_prime = eta_prime();
  if (eta <= std::log(2.0)) {
    r.split = BernoulliCase::small_mahler;
    r.case_threshold = 1 - eta / C;
  } else if (eta >= 2 * r.eta_prime) {
    r.split = BernoulliCase::large_mahler;
    r.case_threshold = 1 - std::min(1.0, inv_sq) / C;
  } else {
    r.split = BernoulliCase::ambiguous;
    r.case_threshold = r.threshold;
  }
  return r;
}

InhomReport dim1_inhom_criterion(const AlgebraicNumber& lambda1, const AlgebraicNumber& lambda2,
                                 double c, double epsilon)
{
  if (!(c > 0))
    throw InvalidInput("dim1_inhom_criterion: c must be positive");
  for (const auto* l : { &lambda1, &lambda2 }) {
    if (!l->is_real())
      throw InvalidInput("dim1_inhom_criterion: lambda must be real");
    Interval x = evaluate(*l, 1e-15);
    if (!(x.lo() > 0 && x.hi() < 1))
      throw InvalidInput("dim1_inhom_criterion: lambda must lie in (0, 1)");
  }
  InhomReport r;
  r.height = std::max(log_height(lambda1), log_height(lambda2));

  auto q1 = lambda1.to_quadratic();
  auto q2 = lambda2.to_quadratic();
  if (q1 && q2) {
    long long D = 0;
    try {
      D = common_radicand(q1->radicand(), q2->radicand());
      r.field_degree = D == 0 ? 1 : 2;
    } catch (const Unsupported&) {
      r.field_degree = 4; // two distinct real quadratic fields
    }
  } else if (lambda1 == lambda2 || lambda2.is_rational()) {
    r.field_degree = lambda1.degree();
  } else if (lambda1.is_rational()) {
    r.field_degree = lambda2.degree();
  } else {
    r.field_degree = lambda1.degree() * lambda2.degree();
    r.field_degree_exact = false;
  }

  r.chi = 0.5 * (std::log(evaluate(lambda1, 1e-15).mid()) + std::log(evaluate(lambda2, 1e-15).mid()));
  r.lhs = std::abs(r.chi) * sq(std::max(1.0, std::log(r.field_degree * r.height)));
  r.height_ok = r.height >= epsilon;
  r.chi_ok = r.lhs < c;
  r.margin = c - r.lhs;

  for (const auto* l : { &lambda1, &lambda2 }) {
    if (!l->is_rational())
      continue;
    Rational x = l->to_quadratic()->a();
    Integer q = denominator(x);
    Integer p = q - numerator(x);
    double qd = q.convert_to<double>();
    double bound = c * qd / sq(std::log(std::log(qd)));
    r.rational_form.push_back({ p, q, bound, p.convert_to<double>() <= bound });
  }
  return r;
}

std::string to_string(FamilyTag t)
{
  switch (t) {
    case FamilyTag::inhom1d:
      return "inhom1d";
    case FamilyTag::prime_q:
      return "prime_q";
    case FamilyTag::contracting_avg_q:
      return "contracting_avg_q";
    case FamilyTag::quadratic_sqrtq:
      return "quadratic_sqrtq";
    case FamilyTag::bernoulli:
      return "bernoulli";
    case FamilyTag::complex_bernoulli:
      return "complex_bernoulli";
  }
  return "?";
}

FamilyTag parse_family_tag(const std::string& s)
{
  for (auto t : { FamilyTag::inhom1d, FamilyTag::prime_q, FamilyTag::contracting_avg_q,
                  FamilyTag::quadratic_sqrtq, FamilyTag::bernoulli, FamilyTag::complex_bernoulli })
    if (to_string(t) == s)
      return t;
  throw InvalidInput("unknown family tag '" + s + "'");
}

namespace {

//! Number of maps and dimension implied by the per-map parameter lists.
std::pair<std::size_t, int> family_shape(const FamilySpec& s)
{
  std::size_t k = std::max({ s.U.size(), s.b.size(), s.a.size(), s.p.size() });
  int d = !s.U.empty() ? s.U.front().rows : !s.b.empty() ? static_cast<int>(s.b.front().size()) : 1;
  return { k, d };
}

std::vector<Rational> family_probs(const FamilySpec& s, std::size_t k)
{
  if (!s.p.empty())
    return s.p;
  return std::vector<Rational>(k, Rational(1, static_cast<long>(k)));
}

std::vector<std::string> shape_errors(const FamilySpec& s, std::size_t k, int d, bool need_a)
{
  std::vector<std::string> err;
  if (k < 2)
    err.push_back("need at least two maps");
  if (!s.U.empty() && s.U.size() != k)
    err.push_back("U list length differs from the number of maps");
  if (s.b.size() != k)
    err.push_back("b list length differs from the number of maps");
  if (need_a && s.a.size() != k)
    err.push_back("a list length differs from the number of maps");
  if (!s.p.empty() && s.p.size() != k)
    err.push_back("p list length differs from the number of maps");
  for (const auto& U : s.U)
    if (U.rows != d || U.cols != d || !is_orthogonal(U))
      err.push_back("U_i must be orthogonal d x d matrices");
  for (const auto& b : s.b)
    if (static_cast<int>(b.size()) != d)
      err.push_back("b_i must have dimension d");
  if (s.q < 2 || !is_prime(s.q))
    err.push_back("q must be prime");
  if (!(s.epsilon > 0 && s.epsilon < 1))
    err.push_back("epsilon must lie in (0, 1)");
  return err;
}

ExactMatrix family_U(const FamilySpec& s, std::size_t i, int d)
{
  return s.U.empty() ? ExactMatrix::identity(d) : s.U[i];
}

Similarity complex_bernoulli_map(std::complex<double> z, double sign)
{
  double rho = std::abs(z), t = std::arg(z);
  Mat U(2, 2);
  U << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
  Vec b(2);
  b << sign, 0;
  return Similarity::numeric(rho, U, b);
}

} // namespace

std::vector<std::string> validate_family(const FamilySpec& s, const SimMeasure& mu)
{
  std::vector<std::string> err;
  auto common = [&] {
    if (has_common_fixed_point(mu))
      err.push_back("the maps have a common fixed point");
  };
  auto quite_general = [&] {
    for (const auto& a : mu.atoms())
      if (to_double(a.p) < s.epsilon)
        err.push_back("p_i >= epsilon violated");
    if (!is_irreducible(mu))
      err.push_back("mu_U is not irreducible");
    if (mu.size() >= 2 && mu[0].g.b_f() == mu[1].g.b_f())
      err.push_back("b_1 != b_2 violated");
    common();
  };
  switch (s.tag) {
    case FamilyTag::inhom1d:
      if (s.n < 1)
        err.push_back("n >= 1 required");
      common();
      break;
    case FamilyTag::prime_q: {
      double cap = std::pow(static_cast<double>(s.q), 1 - s.epsilon);
      for (auto a : s.a)
        if (a < 1 || static_cast<double>(a) > cap)
          err.push_back("a_(i,q) in [1, q^(1-epsilon)] violated");
      quite_general();
      break;
    }
    case FamilyTag::contracting_avg_q:
      if (mu[mu.size() - 1].p > Rational(1, 3))
        err.push_back("p_k <= 1/3 violated");
      quite_general();
      break;
    case FamilyTag::quadratic_sqrtq: {
      double q = static_cast<double>(s.q);
      double cap = std::pow(q, 0.5 - s.epsilon);
      for (auto m : s.a)
        if (m < 0 || static_cast<double>(m) > cap)
          err.push_back("m_(i,q) in [0, q^(1/2-epsilon)] violated");
      double log_cap = std::exp(std::pow(q, s.epsilon / 3));
      for (const auto& b : s.b)
        for (const auto& x : b)
          if (!x.is_rational() || denominator(x.a()) != 1)
            err.push_back("d_i must be an integer vector");
          else if (!x.is_zero() && std::log(std::abs(x.to_double())) > log_cap)
            err.push_back("|d_i|_inf <= exp(exp(q^(epsilon/3))) violated");
      for (std::size_t j = 0; j < std::min<std::size_t>(2, mu.size()); ++j)
        if (mu[j].g.rho().conjugate().abs() >= QuadraticNumber(Rational(1, 3)))
          err.push_back("conjugate modulus < 1/3 violated for j = " + std::to_string(j + 1));
      for (const auto& a : mu.atoms())
        if (a.g.rho() >= QuadraticNumber(1))
          err.push_back("maps must be contracting");
      for (const auto& a : mu.atoms())
        if (to_double(a.p) < s.epsilon)
          err.push_back("p_i >= epsilon violated");
      if (!is_irreducible(mu))
        err.push_back("mu_U is not irreducible");
      common();
      break;
    }
    case FamilyTag::bernoulli: {
      Interval x = evaluate(*s.lambda, 1e-15);
      if (!s.lambda->is_real() || !(x.lo() > 0.5 && x.hi() < 1))
        err.push_back("lambda in (1/2, 1) violated");
      break;
    }
    case FamilyTag::complex_bernoulli: {
      auto z = s.lambda->approx();
      if (!(std::abs(z) > std::sqrt(0.5) && std::abs(z) < 1))
        err.push_back("|lambda| in (2^-1/2, 1) violated");
      if (std::abs(z.imag()) < s.epsilon)
        err.push_back("|Im lambda| >= epsilon violated");
      break;
    }
  }
  std::sort(err.begin(), err.end());
  err.erase(std::unique(err.begin(), err.end()), err.end());
  return err;
}

SimMeasure generate_family(const FamilySpec& s)
{
  std::vector<Atom> atoms;
  std::vector<std::string> err;
  switch (s.tag) {
    case FamilyTag::inhom1d: {
      if (s.n < 1)
        throw InvalidInput("inhom1d: n >= 1 required");
      Rational half(1, 2);
      atoms.push_back({ half, Similarity::affine1d(Rational(s.n, s.n + 1), 0) });
      atoms.push_back({ half, Similarity::affine1d(Rational(s.n, s.n + 2), 1) });
      break;
    }
    case FamilyTag::prime_q:
    case FamilyTag::contracting_avg_q: {
      auto [k, d] = family_shape(s);
      err = shape_errors(s, k, d, s.tag == FamilyTag::prime_q);
      if (!err.empty())
        break;
      auto probs = family_probs(s, k);
      for (std::size_t i = 0; i < k; ++i) {
        Rational rho = s.tag == FamilyTag::prime_q ? Rational(s.q, s.q + s.a[i])
                       : i + 1 < k                 ? Rational(s.q, s.q + 3)
                                                   : Rational(s.q, s.q - 1);
        atoms.push_back({ probs[i], Similarity(rho, family_U(s, i, d), s.b[i]) });
      }
      break;
    }
    case FamilyTag::quadratic_sqrtq: {
      auto [k, d] = family_shape(s);
      err = shape_errors(s, k, d, true);
      if (!err.empty())
        break;
      auto probs = family_probs(s, k);
      long long ceil_sqrt = static_cast<long long>(std::ceil(std::sqrt(static_cast<double>(s.q))));
      while (ceil_sqrt * ceil_sqrt < s.q)
        ++ceil_sqrt;
      while ((ceil_sqrt - 1) * (ceil_sqrt - 1) >= s.q)
        --ceil_sqrt;
      for (std::size_t i = 0; i < k; ++i) {
        Rational c(3 * ceil_sqrt);
        QuadraticNumber rho(Rational(ceil_sqrt - s.a[i]) / c, Rational(2) / c, s.q);
        atoms.push_back({ probs[i], Similarity(rho, family_U(s, i, d), s.b[i]) });
      }
      break;
    }
    case FamilyTag::bernoulli: {
      if (!s.lambda)
        throw InvalidInput("bernoulli: lambda required");
      Rational half(1, 2);
      if (auto q = s.lambda->to_quadratic()) {
        atoms.push_back({ half, Similarity::affine1d(*q, 1) });
        atoms.push_back({ half, Similarity::affine1d(*q, -1) });
      } else {
        double l = evaluate(*s.lambda, 1e-15).mid();
        for (double sign : { 1.0, -1.0 })
          atoms.push_back({ half, Similarity::numeric(std::abs(l), Mat::Constant(1, 1, l < 0 ? -1 : 1),
                                                      Vec::Constant(1, sign)) });
      }
      break;
    }
    case FamilyTag::complex_bernoulli: {
      if (!s.lambda)
        throw InvalidInput("complex_bernoulli: lambda required");
      Rational half(1, 2);
      atoms.push_back({ half, complex_bernoulli_map(s.lambda->approx(), 1) });
      atoms.push_back({ half, complex_bernoulli_map(s.lambda->approx(), -1) });
      break;
    }
  }
  if (!err.empty())
    throw InvalidInput(to_string(s.tag) + ": " + join(err));
  SimMeasure mu(std::move(atoms));
  err = validate_family(s, mu);
  if (!err.empty())
    throw InvalidInput(to_string(s.tag) + ": " + join(err));
  return mu;
}

} // namespace selfsim
