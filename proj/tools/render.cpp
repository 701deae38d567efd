#include "render.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace selfsim::cli {

namespace {

json opt_number(const std::optional<double>& x)
{
  return x ? json(*x) : json(nullptr);
}

//! JSON has no infinities; they become strings.
json number(double x)
{
  if (std::isfinite(x))
    return x;
  return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
}

std::string yes(bool b) { return b ? "yes" : "no"; }

std::string fmt_opt(const std::optional<double>& x)
{
  return x ? fmt(*x) : "undefined";
}

} // namespace

std::string fmt(double x)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::string fmt(const Interval& x)
{
  return fmt(x.mid()) + " (width " + fmt(x.width()) + ")";
}

json to_json(const Interval& x)
{
  return { { "lo", number(x.lo()) }, { "hi", number(x.hi()) } };
}

json to_json(const Estimate& e)
{
  return { { "value", e.value }, { "std_error", e.std_error }, { "samples", e.samples } };
}

json to_json(const FreenessCertificate& c)
{
  json j = { { "certified", c.certified }, { "route", to_string(c.route) } };
  if (c.route == FreeRoute::p_adic) {
    j["prime"] = c.prime;
    j["branch"] = c.branch;
  }
  if (c.route == FreeRoute::galois)
    j["embedding"] = c.embedding;
  j["radicand"] = c.radicand;
  j["inverse"] = c.inverse;
  j["checks"] = c.checks;
  if (!c.certified)
    j["reason"] = c.reason;
  return j;
}

json to_json(const EntropyBound& b)
{
  json pairs = json::array();
  for (const auto& p : b.certified_pairs)
    pairs.push_back({ { "i", p.i }, { "j", p.j }, { "certificate", to_json(p.certificate) } });
  json j = { { "method", to_string(b.method) },
             { "lower", opt_number(b.lower) },
             { "lower_positive_qualitative", b.lower_positive_qualitative },
             { "upper", b.upper },
             { "level", b.level },
             { "collisions", b.collisions },
             { "certified_pairs", pairs } };
  if (b.pair) {
    j["pair"] = { b.pair->first, b.pair->second };
    j["pair_min_prob"] = b.pair_min_prob;
  }
  return j;
}

json to_json(const SeparationBound& b)
{
  return { { "value", b.value },
           { "route", to_string(b.route) },
           { "field_degree", b.field_degree },
           { "max_log_height", b.max_log_height },
           { "joint_log_height", b.joint_log_height },
           { "log_R", b.log_R },
           { "dim", b.dim },
           { "asymptotic_scale", b.asymptotic_scale } };
}

json to_json(const CriterionReport& r)
{
  json j = { { "C", r.C },
             { "u_part", r.u_part },
             { "gates_ok", r.gates_ok() },
             { "gate_failures", r.gate_failures },
             { "common_fixed_point", r.common_fixed_point },
             { "irreducible", r.irreducible },
             { "chi", r.chi.value },
             { "chi_enclosure", to_json(r.chi.enclosure) },
             { "contraction", to_string(r.chi.kind) },
             { "entropy", to_json(r.entropy) },
             { "separation", r.separation ? to_json(*r.separation) : json(nullptr) },
             { "separation_note", r.separation_note } };
  if (r.u_part) {
    j["u_log_height"] = r.u_log_height;
    j["u_field_degree"] = r.u_field_degree;
  }
  j["ratio"] = opt_number(r.ratio);
  j["rhs"] = opt_number(r.rhs);
  j["margin"] = opt_number(r.margin);
  j["well_mixing"] = r.well_mixing ? to_json(*r.well_mixing) : json(nullptr);
  j["non_degeneracy"] = r.non_degeneracy ? to_json(*r.non_degeneracy) : json(nullptr);
  j["diagnostics_note"] = r.diagnostics_note;
  return j;
}

json to_json(const ContractingAverageReport& r)
{
  return { { "mean_rho", r.mean_rho }, { "ratio", r.ratio },         { "rho_hat", r.rho_hat },
           { "attained", r.attained }, { "threshold", r.threshold }, { "pass", r.pass } };
}

json to_json(const DimensionEstimate& r)
{
  return { { "lower", r.lower }, { "upper", r.upper }, { "exact", r.exact },
           { "assumptions", r.assumptions } };
}

json to_json(const BernoulliReport& r)
{
  return { { "complex", r.complex },
           { "modulus", r.modulus },
           { "log_mahler", r.log_mahler },
           { "branch_min", r.branch_min },
           { "threshold", r.threshold },
           { "margin", r.margin },
           { "pass", r.pass },
           { "case", to_string(r.split) },
           { "case_threshold", r.case_threshold },
           { "eta_prime", r.eta_prime } };
}

json to_json(const InhomReport& r)
{
  json forms = json::array();
  for (const auto& f : r.rational_form)
    forms.push_back({ { "p", f.p.str() }, { "q", f.q.str() }, { "bound", number(f.bound) },
                      { "holds", f.holds } });
  return { { "height", r.height },       { "field_degree", r.field_degree },
           { "field_degree_exact", r.field_degree_exact },
           { "chi", r.chi },             { "lhs", r.lhs },
           { "height_ok", r.height_ok }, { "chi_ok", r.chi_ok },
           { "margin", r.margin },       { "rational_form", forms } };
}

json to_json(const PsdPartition& p)
{
  return { { "parts", p.parts },
           { "min_eigenvalue", p.min_eigenvalue },
           { "objective", p.objective },
           { "C", p.C },
           { "c", p.c },
           { "guarantee", p.guarantee },
           { "bound_holds", p.bound_holds },
           { "deviation", p.deviation },
           { "deviation_bound", p.deviation_bound },
           { "moves", p.moves },
           { "exact", p.exact } };
}

std::string to_text(const CriterionReport& r)
{
  std::ostringstream os;
  os << "gates: " << (r.gates_ok() ? "ok" : "FAILED") << "\n";
  for (const auto& f : r.gate_failures)
    os << "  failure: " << f << "\n";
  os << "common fixed point: " << yes(r.common_fixed_point) << "\n";
  os << "irreducible rotation part: " << yes(r.irreducible) << "\n";
  os << "chi: " << fmt(r.chi.value) << "  enclosure " << fmt(r.chi.enclosure) << "  ("
     << to_string(r.chi.kind) << ")\n";
  os << "entropy: method " << to_string(r.entropy.method) << ", lower "
     << (r.entropy.lower ? fmt(*r.entropy.lower)
                         : r.entropy.lower_positive_qualitative ? "positive (qualitative)"
                                                                : "none")
     << ", upper " << fmt(r.entropy.upper) << ", level " << r.entropy.level << ", collisions "
     << r.entropy.collisions << "\n";
  for (const auto& p : r.entropy.certified_pairs)
    os << "  free pair (" << p.i << ", " << p.j << ") via " << to_string(p.certificate.route)
       << (p.certificate.route == FreeRoute::p_adic ? " p=" + std::to_string(p.certificate.prime)
                                                    : "")
       << (p.certificate.inverse ? " (inverse pair)" : "") << "\n";
  if (r.u_part)
    os << "S replaced by L [K:Q] = " << fmt(r.u_log_height) << " * " << r.u_field_degree << "\n";
  else if (r.separation)
    os << "S bound: " << fmt(r.separation->value) << " (" << to_string(r.separation->route)
       << " route, [K:Q] = " << r.separation->field_degree << ")\n";
  if (!r.separation_note.empty())
    os << "S note: " << r.separation_note << "\n";
  os << "ratio h/|chi|: " << fmt_opt(r.ratio) << "\n";
  os << "rhs C max{1, log(S/h)}^2 (C = " << fmt(r.C) << "): " << fmt_opt(r.rhs) << "\n";
  os << "margin: " << fmt_opt(r.margin) << "\n";
  if (r.well_mixing)
    os << "well-mixing (heuristic): " << fmt(r.well_mixing->value) << " +- "
       << fmt(r.well_mixing->std_error) << "\n";
  if (r.non_degeneracy)
    os << "non-degeneracy slab mass (heuristic): " << fmt(r.non_degeneracy->value) << " +- "
       << fmt(r.non_degeneracy->std_error) << "\n";
  if (!r.diagnostics_note.empty())
    os << "diagnostics: " << r.diagnostics_note << "\n";
  return os.str();
}

std::string to_text(const ContractingAverageReport& r)
{
  std::ostringstream os;
  os << "E rho: " << fmt(r.mean_rho) << "\n"
     << "best ratio E|rho_hat - rho| / (1 - E rho): " << fmt(r.ratio) << " at rho_hat "
     << fmt(r.rho_hat) << (r.attained ? "" : " (infimum, not attained)") << "\n"
     << "threshold 1 - epsilon: " << fmt(r.threshold) << "  " << (r.pass ? "pass" : "fail")
     << "\n";
  return os.str();
}

std::string to_text(const DimensionEstimate& r)
{
  std::ostringstream os;
  os << "dimension min{d, h/|chi|}: ";
  if (r.lower == r.upper)
    os << fmt(r.lower);
  else
    os << "[" << fmt(r.lower) << ", " << fmt(r.upper) << "]";
  os << (r.exact ? " (h exact)" : "") << "; " << r.assumptions << "\n";
  return os.str();
}

std::string to_text(const BernoulliReport& r)
{
  std::ostringstream os;
  os << (r.complex ? "|lambda|: " : "lambda: ") << fmt(r.modulus) << "\n"
     << "log M: " << fmt(r.log_mahler) << "\n"
     << "min{log M, (log log M)^-2}: " << fmt(r.branch_min) << "\n"
     << "threshold: " << fmt(r.threshold) << "\n"
     << "margin: " << fmt(r.margin) << "  " << (r.pass ? "pass" : "fail") << "\n"
     << "case: " << to_string(r.split) << " (threshold " << fmt(r.case_threshold)
     << ", eta' = " << fmt(r.eta_prime) << ")\n";
  return os.str();
}

std::string to_text(const InhomReport& r)
{
  std::ostringstream os;
  os << "h(lambda1, lambda2): " << fmt(r.height) << (r.height_ok ? "" : "  (below epsilon)")
     << "\n"
     << "[K:Q]: " << r.field_degree << (r.field_degree_exact ? "" : " (upper bound)") << "\n"
     << "chi: " << fmt(r.chi) << "\n"
     << "|chi| max{1, log([K:Q] h)}^2: " << fmt(r.lhs) << "\n"
     << "margin c - lhs: " << fmt(r.margin) << "  " << (r.chi_ok ? "pass" : "fail") << "\n";
  for (const auto& f : r.rational_form)
    os << "rational form p = " << f.p << " <= c q / (log log q)^2 = " << fmt(f.bound)
       << " (q = " << f.q << "): " << (f.holds ? "holds" : "fails") << "\n";
  return os.str();
}

std::string to_text(const FreenessCertificate& c)
{
  std::ostringstream os;
  os << "certified: " << yes(c.certified) << "\n"
     << "route: " << to_string(c.route) << "\n";
  if (c.route == FreeRoute::p_adic && c.prime)
    os << "prime: " << c.prime << " (branch " << c.branch << ")\n";
  if (c.radicand)
    os << "field: Q(sqrt " << c.radicand << ")\n";
  if (c.inverse)
    os << "checked on the inverse pair\n";
  for (const auto& s : c.checks)
    os << "  " << s << "\n";
  if (!c.certified)
    os << "reason: " << c.reason << "\n";
  return os.str();
}

} // namespace selfsim::cli
