#include "selfsim/separation.hpp"

#include "selfsim/errors.hpp"
#include "selfsim/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <unordered_set>

namespace selfsim {

namespace {

//! Relative margin of the float prefilter; float metric errors are orders of
//! magnitude below it.
constexpr double prefilter_margin = 1e-9;

struct Shadow
{
  double log_rho;
  Mat U;
  Vec b;
};

Shadow shadow_of(const Similarity& g)
{
  return { std::log(g.rho_f()), g.U_f(), g.b_f() };
}

double float_metric(const Shadow& x, const Shadow& y)
{
  double rot = x.U.rows() == 1 ? std::abs(x.U(0, 0) - y.U(0, 0)) : (x.U - y.U).operatorNorm();
  return std::abs(x.log_rho - y.log_rho) + rot + (x.b - y.b).norm();
}

//! Certified minimum of the metric over the pairs produced by `pairs`, which
//! calls its argument once per candidate pair (i, j).
template <class ForPairs>
std::optional<Interval> certified_min(const std::vector<Similarity>& elems,
                                      const std::vector<Shadow>& shadows, ForPairs pairs,
                                      int threads)
{
  std::vector<std::pair<std::size_t, std::size_t>> all;
  pairs([&](std::size_t i, std::size_t j) { all.emplace_back(i, j); });
  if (all.empty())
    return std::nullopt;
  std::vector<double> dist(all.size());
  parallel_for(all.size(), threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t t = b; t < e; ++t)
      dist[t] = float_metric(shadows[all[t].first], shadows[all[t].second]);
  });
  double m = *std::min_element(dist.begin(), dist.end());
  double cut = m * (1 + prefilter_margin) + 1e-12;
  std::optional<Interval> best;
  for (std::size_t t = 0; t < all.size(); ++t) {
    if (dist[t] > cut)
      continue;
    Interval v = group_metric_interval(elems[all[t].first], elems[all[t].second]);
    best = best ? min(*best, v) : v;
  }
  return best;
}

SeparationProfile profile(const SimMeasure& mu, int n_max, const EnumerationOptions& opt)
{
  if (n_max < 1)
    throw InvalidInput("exact_separation: n_max must be at least 1");
  int threads = opt.threads > 0 ? opt.threads : default_threads();
  std::vector<WordEnumeration> levels = enumerate_levels(mu, n_max, opt);

  struct Hash
  {
    std::size_t operator()(const Similarity& g) const { return g.hash(); }
  };
  std::unordered_set<Similarity, Hash> seen;
  std::vector<Similarity> uni{ Similarity::identity(mu.dim()) };
  std::vector<Shadow> uni_shadow{ shadow_of(uni.front()) };
  seen.insert(uni.front());

  SeparationProfile out;
  std::optional<Interval> M;
  for (int n = 1; n <= n_max; ++n) {
    const WordEnumeration& lv = levels[n - 1];
    SeparationLevel rec;
    rec.n = n;
    rec.level_size = lv.elements.size();

    std::size_t old = uni.size();
    for (const auto& e : lv.elements)
      if (seen.insert(e.g).second) {
        uni.push_back(e.g);
        uni_shadow.push_back(shadow_of(e.g));
      }
    auto fresh = certified_min(
      uni, uni_shadow,
      [&](auto emit) {
        for (std::size_t i = old; i < uni.size(); ++i)
          for (std::size_t j = 0; j < i; ++j)
            emit(i, j);
      },
      threads);
    if (fresh)
      M = M ? min(*M, *fresh) : *fresh;
    rec.M = M;
    rec.union_size = uni.size();

    std::vector<Similarity> lvl;
    std::vector<Shadow> lvl_shadow;
    for (const auto& e : lv.elements) {
      lvl.push_back(e.g);
      lvl_shadow.push_back(shadow_of(e.g));
    }
    rec.Delta = certified_min(
      lvl, lvl_shadow,
      [&](auto emit) {
        for (std::size_t i = 0; i < lvl.size(); ++i)
          for (std::size_t j = 0; j < i; ++j)
            emit(i, j);
      },
      threads);

    if (M) {
      Interval lg = log(*M);
      rec.S = Interval(-lg.hi() / n, -lg.lo() / n).widened();
    }
    out.levels.push_back(std::move(rec));
  }
  return out;
}

} // namespace

SeparationProfile exact_separation(const SimMeasure& mu, int n_max, const EnumerationOptions& opt)
{
  return profile(mu, n_max, opt);
}

SeparationProfile u_part_separation(const SimMeasure& mu, int n_max, const EnumerationOptions& opt)
{
  if (mu.dim() < 2)
    throw InvalidInput("u_part_separation: needs d >= 2");
  if (!mu.is_exact())
    throw Unsupported("u_part_separation: exact comparison needs exact maps");
  std::vector<Atom> atoms;
  for (const auto& a : mu.atoms())
    atoms.push_back({ a.p, Similarity(QuadraticNumber(1), a.g.U(), ExactVector(mu.dim())) });
  return profile(SimMeasure(atoms), n_max, opt);
}

std::string to_string(SeparationRoute r)
{
  return r == SeparationRoute::height ? "height" : "mahler";
}

double SeparationBound::at_level(int n) const
{
  if (route == SeparationRoute::mahler)
    return value;
  if (n < 1)
    throw InvalidInput("SeparationBound::at_level: n must be positive");
  const double D = field_degree, logd = std::log(static_cast<double>(dim)), lh = joint_log_height;
  double t1 = D * std::log(2.0) / n + D * lh + log_R;
  double t2 = D * (std::log(2.0) + (n - 1) * logd) / n + D * lh;
  double t3 = D * (std::log(2.0 * n) + (n - 1) * logd) / n + D * (2.0 * n - 1) / n * lh;
  return std::max({ t1, t2, t3 });
}

SeparationBound height_separation_bound(const SimMeasure& mu)
{
  if (!mu.is_exact())
    throw Unsupported("height_separation_bound: coefficients must be exact");
  long long field = 0;
  std::vector<QuadraticNumber> S;
  double R = 1;
  for (const auto& a : mu.atoms()) {
    field = common_radicand(field, a.g.radicand());
    S.push_back(a.g.rho());
    S.insert(S.end(), a.g.U().a.begin(), a.g.U().a.end());
    S.insert(S.end(), a.g.b().begin(), a.g.b().end());
    R = std::max(R, a.g.rho().to_interval().hi());
  }

  SeparationBound out;
  out.route = SeparationRoute::height;
  out.dim = mu.dim();
  out.field_degree = field == 0 ? 1 : 2;
  out.log_R = std::log(R);

  // non-archimedean part: c y is integral for every y, so it is at most log c
  Integer c = 1;
  for (const auto& y : S) {
    c = boost::multiprecision::lcm(c, denominator(y.a()));
    c = boost::multiprecision::lcm(c, denominator(y.b()));
  }
  long exp = 0;
  double mant = mpz_get_d_2exp(&exp, c.backend().data());
  double log_c = std::log(mant) + static_cast<double>(exp) * std::log(2.0);

  // archimedean part: one factor per real embedding, weight 1 / D
  double arch = 0;
  for (int emb = 0; emb < out.field_degree; ++emb) {
    double m = 1;
    for (const auto& y : S)
      m = std::max(m, (emb ? y.conjugate() : y).abs().to_interval().hi());
    arch += std::log(m);
  }
  out.joint_log_height = (log_c + arch / out.field_degree) * (1 + 1e-12);

  for (const auto& y : S)
    out.max_log_height = std::max(out.max_log_height, log_height(AlgebraicNumber(y)));
  out.asymptotic_scale = out.field_degree * std::max(out.max_log_height, 1.0);

  const double D = out.field_degree;
  out.value = D * (std::log(2.0) + std::log(static_cast<double>(out.dim)) +
                   2 * out.joint_log_height) +
              out.log_R;
  return out;
}

SeparationBound bernoulli_mahler_bound(const AlgebraicNumber& lambda)
{
  if (!(lambda.root().modulus.hi() < 1))
    throw InvalidInput("bernoulli_mahler_bound: need |lambda| < 1");
  SeparationBound out;
  out.route = SeparationRoute::mahler;
  out.field_degree = lambda.degree();
  out.max_log_height = log_height(lambda);
  out.value = std::log(lambda.mahler().hi());
  return out;
}

} // namespace selfsim
