#pragma once

#include "selfsim/algebraic.hpp"
#include "selfsim/entropy.hpp"
#include "selfsim/similarity.hpp"

#include <optional>
#include <string>
#include <vector>

namespace selfsim {

struct SeparationLevel
{
  int n = 0;
  //! Min distance over distinct pairs in {id} and supp(mu^{*i}), i <= n.
  std::optional<Interval> M;
  //! Min distance over distinct pairs inside supp(mu^{*n}).
  std::optional<Interval> Delta;
  //! -log(M_n) / n.
  std::optional<Interval> S;
  std::size_t union_size = 0;
  std::size_t level_size = 0;
};

struct SeparationProfile
{
  std::vector<SeparationLevel> levels; //!< levels[i].n == i + 1
};

//! Exact separation profile for n = 1..n_max. Float distances prefilter the
//! pairs (relative margin 1e-9); the surviving pairs get certified intervals
//! and M_n, Delta_n enclose the true minima.
SeparationProfile exact_separation(const SimMeasure& mu, int n_max,
                                   const EnumerationOptions& opt = {});

//! Same computation for the pushforward U(mu) on O(d), metric ||U1 - U2||.
//! Requires d >= 2.
SeparationProfile u_part_separation(const SimMeasure& mu, int n_max,
                                    const EnumerationOptions& opt = {});

enum class SeparationRoute
{
  height,
  mahler
};

std::string to_string(SeparationRoute r);

//! Upper bound on the splitting rate.
//!
//! Height route, with S the coefficients of rho_i, U_i, b_i in a field K of
//! degree D, H_S the height of the point (1 : y, y in S), R = max(1, rho_i)
//! and d the dimension:
//!   S_n <= max(D log 2 / n + D log H_S + log R,
//!              D log(2 d^(n-1)) / n + D log H_S,
//!              D log(2 n d^(n-1)) / n + D (2n - 1)/n log H_S)
//! and uniformly S_mu <= D (log 2 + log d + 2 log H_S) + log R.
struct SeparationBound
{
  double value = 0; //!< uniform bound
  SeparationRoute route = SeparationRoute::height;
  int field_degree = 1;
  double max_log_height = 0;   //!< max h(y) over S
  double joint_log_height = 0; //!< log H_S (upper bound)
  double log_R = 0;
  int dim = 1;
  //! D * max(max h(y), 1): the scale in the asymptotic statement, without
  //! its unspecified constant. Informational only.
  double asymptotic_scale = 0;

  //! Bound on S_n for one level (route height); `value` for route mahler.
  double at_level(int n) const;
};

//! Requires exact coefficients in Q or one Q(sqrt D).
SeparationBound height_separation_bound(const SimMeasure& mu);

//! log M_lambda for the Bernoulli family; |lambda| < 1 required.
SeparationBound bernoulli_mahler_bound(const AlgebraicNumber& lambda);

} // namespace selfsim
