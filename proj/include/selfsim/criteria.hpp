#pragma once

#include "selfsim/algebraic.hpp"
#include "selfsim/entropy.hpp"
#include "selfsim/separation.hpp"
#include "selfsim/similarity.hpp"
#include "selfsim/walk.hpp"

#include <optional>
#include <string>
#include <vector>

namespace selfsim {

//! The theorems' constants are existential; every criterion takes them as
//! user parameters and reports a margin, never a proof.
struct CriterionOptions
{
  double C = 1;
  int entropy_level = 10;
  EnumerationOptions enumeration;
  //! Use h and S of the rotation part U(mu) with S replaced by L [K:Q]
  //! (L = max(1, max log height of the U entries)).
  bool u_part = false;
  //! Monte Carlo well-mixing and non-degeneracy diagnostics.
  bool diagnostics = true;
  std::size_t diagnostic_samples = 2000;
  double diagnostic_kappa = 0.1; //!< stopping scale of the well-mixing walk
  long diagnostic_T = 10;
  std::uint64_t seed = 0;
};

struct CriterionReport
{
  double C = 1;
  bool u_part = false;

  // gates
  bool common_fixed_point = false;
  bool irreducible = true;
  Lyapunov chi{};
  std::vector<std::string> gate_failures;
  bool gates_ok() const { return gate_failures.empty(); }

  EntropyBound entropy;
  std::optional<SeparationBound> separation; //!< absent without algebraic data
  std::string separation_note;
  double u_log_height = 0; //!< L, u_part only
  int u_field_degree = 1;  //!< [K:Q], u_part only

  //! h_lower / |chi|; set when h has a numeric lower bound.
  std::optional<double> ratio;
  //! C max{1, log(S / h)}^2 with the h lower bound.
  std::optional<double> rhs;
  std::optional<double> margin;

  //! Heuristic diagnostics, with standard errors. Well-mixing is
  //! E |e_1 . U(q_(tau + F)) e_1|^2; non-degeneracy is the largest mass
  //! within theta of a coordinate hyperplane through the sample mean, with
  //! theta a tenth of the sample standard deviation.
  std::optional<Estimate> well_mixing;
  std::optional<Estimate> non_degeneracy;
  std::string diagnostics_note;
};

//! Gathers h, chi and the height bound on S and evaluates
//! h / |chi| > C max{1, log(S / h)}^2 as a margin.
CriterionReport main_criterion(const SimMeasure& mu, const CriterionOptions& opt = {});

struct ContractingAverageReport
{
  double mean_rho = 0;    //!< E rho
  double ratio = 0;       //!< inf over rho_hat in (rho_tilde, 1)
  double rho_hat = 0;     //!< minimizer (or the boundary point approached)
  bool attained = true;   //!< false when the infimum sits at rho_tilde
  double threshold = 0;   //!< 1 - epsilon
  bool pass = false;      //!< ratio < 1 - epsilon
};

//! Minimizes E|rho_hat - rho| / (1 - E rho) over rho_hat in (rho_tilde, 1)
//! exactly (the numerator is piecewise linear with breaks at the rho_i).
//! Throws PreconditionFailed when chi >= 0 or E rho >= 1.
ContractingAverageReport contracting_avg_criterion(const SimMeasure& mu, double epsilon,
                                                   double rho_tilde);

struct DimensionEstimate
{
  double lower = 0;
  double upper = 0;
  bool exact = false; //!< h known exactly
  //! The formula presumes the separation hypotheses; they are not checked.
  std::string assumptions;
};

//! min{d, h / |chi|}, bracketed when h is only bracketed.
DimensionEstimate dimension_estimate(const SimMeasure& mu, const EntropyBound& h);
DimensionEstimate dimension_estimate(const SimMeasure& mu, int entropy_level = 10,
                                     const EnumerationOptions& opt = {});

enum class BernoulliCase
{
  small_mahler, //!< log M <= log 2: threshold 1 - log M / C
  large_mahler, //!< log M >= 2 eta': threshold 1 - min{1, (log log M)^-2} / C
  ambiguous     //!< log 2 < log M < 2 eta': the headline form needs a larger C
};

std::string to_string(BernoulliCase c);

struct BernoulliReport
{
  bool complex = false;
  double modulus = 0;       //!< lambda, or |lambda| when complex
  double log_mahler = 0;    //!< eta = log M_lambda
  double branch_min = 0;    //!< min{eta, (log eta)^-2}
  double threshold = 0;     //!< 1 - branch_min / C
  double margin = 0;        //!< modulus - threshold
  bool pass = false;
  BernoulliCase split = BernoulliCase::small_mahler;
  double case_threshold = 0; //!< threshold of the case that applies
  double eta_prime = 0;      //!< unique solution of x = (log x)^-2
};

//! Real lambda in (1/2, 1), or complex lambda with |lambda| in (2^-1/2, 1)
//! and |Im lambda| >= epsilon. Throws InvalidInput outside these ranges.
BernoulliReport bernoulli_criterion(const AlgebraicNumber& lambda, double C = 1,
                                    double epsilon = 0);

struct RationalForm
{
  Integer p, q;
  double bound;  //!< c q / (log log q)^2
  bool holds;    //!< p <= bound
};

struct InhomReport
{
  double height = 0;       //!< max{h(lambda_1), h(lambda_2)}
  int field_degree = 1;    //!< [K:Q]
  bool field_degree_exact = true;
  double chi = 0;
  double lhs = 0;          //!< |chi| max{1, log([K:Q] h)}^2
  bool height_ok = false;  //!< h >= epsilon
  bool chi_ok = false;     //!< lhs < c
  double margin = 0;       //!< c - lhs
  std::vector<RationalForm> rational_form; //!< lambda_i = 1 - p_i / q_i
};

//! Maps x -> lambda_1 x and x -> lambda_2 x + 1 with probabilities 1/2.
InhomReport dim1_inhom_criterion(const AlgebraicNumber& lambda1, const AlgebraicNumber& lambda2,
                                 double c, double epsilon = 0);

enum class FamilyTag
{
  inhom1d,
  prime_q,
  contracting_avg_q,
  quadratic_sqrtq,
  bernoulli,
  complex_bernoulli
};

std::string to_string(FamilyTag t);
FamilyTag parse_family_tag(const std::string& s);

struct FamilySpec
{
  FamilyTag tag = FamilyTag::inhom1d;
  long long n = 0;              //!< inhom1d
  long long q = 0;              //!< prime_q, contracting_avg_q, quadratic_sqrtq
  std::vector<long long> a;     //!< a_(i,q) (prime_q) or m_(i,q) (quadratic_sqrtq)
  std::vector<ExactMatrix> U;   //!< rotation parts; identity in d = 1 when empty
  std::vector<ExactVector> b;   //!< translations (integer for quadratic_sqrtq)
  std::vector<Rational> p;      //!< probabilities; uniform when empty
  double epsilon = 0.1;         //!< the corollaries' epsilon
  std::optional<AlgebraicNumber> lambda; //!< bernoulli, complex_bernoulli
};

//! Builds the family's measure and runs its hypothesis validators. Throws
//! InvalidInput naming the violated clause.
SimMeasure generate_family(const FamilySpec& spec);

//! Hypotheses of the family's corollary on a built measure; empty when all
//! hold.
std::vector<std::string> validate_family(const FamilySpec& spec, const SimMeasure& mu);

} // namespace selfsim
