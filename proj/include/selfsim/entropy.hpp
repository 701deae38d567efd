#pragma once

#include "selfsim/algebraic.hpp"
#include "selfsim/similarity.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace selfsim {

//! One distinct element of supp(mu^{*n}).
struct WordElement
{
  Similarity g;
  Rational prob;           //!< aggregated mass
  std::uint64_t words = 0; //!< number of length-n words composing to g
};

//! Distinct elements of supp(mu^{*n}), in order of first appearance along
//! lexicographic words.
struct WordEnumeration
{
  int level = 0;
  std::vector<WordElement> elements;
  std::uint64_t word_count = 0; //!< k^n
  //! Words that landed on an already present element: k^n - |supp|.
  std::uint64_t collisions() const { return word_count - elements.size(); }
  //! Shannon entropy H(mu^{*n}).
  double entropy() const;
};

struct EnumerationOptions
{
  std::uint64_t budget = 10000000; //!< cap on k^n
  int threads = 0;
};

//! Exact convolution support of an exact measure. Throws BudgetExceeded when
//! k^n > budget and Unsupported for numeric maps.
WordEnumeration enumerate_convolution(const SimMeasure& mu, int n,
                                      const EnumerationOptions& opt = {});

//! Levels 1..n (element i is level i + 1), sharing the work of the last call.
std::vector<WordEnumeration> enumerate_levels(const SimMeasure& mu, int n,
                                              const EnumerationOptions& opt = {});

//! H(mu^{*n}) / n, an upper bound for h_mu.
double shannon_entropy_rate(const SimMeasure& mu, int n, const EnumerationOptions& opt = {});

//! -sum p log p of a rational probability vector.
double shannon_entropy(const std::vector<Rational>& probs);

enum class FreeRoute
{
  p_adic,
  galois,
  interval //!< open set condition on an interval in d = 1
};

std::string to_string(FreeRoute r);

//! Outcome of a ping-pong check. `checks` lists every inequality that was
//! verified, in readable form.
struct FreenessCertificate
{
  bool certified = false;
  bool unsupported = false; //!< rejected because the field is not handled
  FreeRoute route = FreeRoute::p_adic;
  long prime = 0;           //!< p-adic route
  int branch = 0;           //!< ideal above a split prime (0 or 1)
  int embedding = 0;        //!< galois route: 0 identity, 1 sqrt(D) -> -sqrt(D)
  long long radicand = 0;   //!< field Q(sqrt D), 0 for Q
  //! The checks ran on g1^-1 and g2^-1. Reversing words shows those generate
  //! a free semigroup iff g1 and g2 do.
  bool inverse = false;
  std::vector<std::string> checks;
  std::string reason;       //!< why a rejection happened
};

//! p-adic ping-pong at a prime ideal above p: entries of rho_i U_i in the
//! maximal ideal, b_i integral, and b_1 - b_2 not in the ideal. For split p
//! both ideals are tried.
FreenessCertificate padic_pingpong_certify(const Similarity& g1, const Similarity& g2, long p);

//! Galois ping-pong: some automorphism Phi of Q(sqrt D) with
//! |Phi(rho_i)| < 1/3 for both maps, and no common fixed point.
FreenessCertificate galois_pingpong_certify(const Similarity& g1, const Similarity& g2);

//! Interval ping-pong in d = 1: an interval V with g_i(V) inside V and
//! g_1(V), g_2(V) meeting at most in an endpoint. Two distinct words with a
//! common image of the interior of V would contradict that disjointness, so
//! the pair generates a free semigroup. V is the hull of the fixed points of
//! the words of length <= 2; both maps must contract.
FreenessCertificate interval_pingpong_certify(const Similarity& g1, const Similarity& g2);

//! Primes worth trying for the p-adic route: prime factors of the numerators
//! of the entries of rho_i U_i (trial division to 10^5, plus a prime cofactor).
std::vector<long> candidate_primes(const Similarity& g1, const Similarity& g2);

//! p-adic over candidate_primes first, then Galois, each on the pair and
//! then on the inverse pair, then the interval route. Returns the first certificate, or a rejection
//! with all reasons joined.
FreenessCertificate certify_free(const Similarity& g1, const Similarity& g2);

enum class EntropyMethod
{
  exact_free,
  pair_free,
  enumeration
};

std::string to_string(EntropyMethod m);

struct PairCertificate
{
  std::size_t i = 0;
  std::size_t j = 0;
  FreenessCertificate certificate;
};

struct EntropyBound
{
  //! Numeric lower bound; only set for exact_free.
  std::optional<double> lower;
  //! pair_free: h_mu is bounded below by an unspecified constant times
  //! pair_min_prob. No number is attached to that constant.
  bool lower_positive_qualitative = false;
  double upper = 0;
  EntropyMethod method = EntropyMethod::enumeration;
  int level = 0;                  //!< enumeration depth actually used
  std::uint64_t collisions = 0;   //!< at that depth
  std::vector<PairCertificate> certified_pairs;
  std::optional<std::pair<std::size_t, std::size_t>> pair; //!< pair behind pair_free
  double pair_min_prob = 0;
};

//! Entropy bounds from pairwise freeness certificates plus exact enumeration
//! up to `level` (reduced to fit the budget). Numeric measures only get the
//! upper bound H(mu).
EntropyBound entropy_bound(const SimMeasure& mu, int level, const EnumerationOptions& opt = {});

//! n = ceil(log 3 / max_log_height) + 2.
int height_entropy_level(double max_log_height);

struct HeightEntropySetup
{
  int n = 0;
  double max_log_height = 0;
  bool found = false;            //!< some word pair has H(lambda) > 3
  std::string word_f;            //!< letters over {f, g}, leftmost applied last
  std::string word_g;
  int f_count = 0;               //!< number of f letters in each word
  std::optional<QuadraticNumber> lambda; //!< common contraction, when exact
  double lambda_log_height = 0;
  FreeRoute route = FreeRoute::p_adic;
  //! Certificate for the pair conjugated to x -> lambda x and
  //! x -> lambda x + 1 - lambda; absent outside Q and Q(sqrt D).
  std::optional<FreenessCertificate> certificate;
};

//! Word pair setup for f(x) = lambda1 x + 1 and g(x) = lambda2 x with
//! lambda_i real in (0, 1). Searches f^i g^(n-i) against g f^i g^(n-i-1) for
//! the i maximizing the height of lambda1^i lambda2^(n-i). Prefers the
//! p-adic route when both apply; that route may need the inverse pair
//! (lambda^-1 in a prime ideal).
HeightEntropySetup height_to_entropy_setup(const AlgebraicNumber& lambda1,
                                           const AlgebraicNumber& lambda2);

} // namespace selfsim
