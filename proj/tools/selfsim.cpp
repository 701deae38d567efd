// Command-line front end: reads IFS spec files and writes reports and CSV.

#include "render.hpp"

#include "selfsim/criteria.hpp"
#include "selfsim/detail.hpp"
#include "selfsim/entropy.hpp"
#include "selfsim/errors.hpp"
#include "selfsim/ifs_io.hpp"
#include "selfsim/parallel.hpp"
#include "selfsim/rng.hpp"
#include "selfsim/separation.hpp"
#include "selfsim/walk.hpp"

#include <CLI11.hpp>
#include <boost/version.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#ifndef SELFSIM_VERSION
#define SELFSIM_VERSION "unknown"
#endif

using namespace selfsim;
using namespace selfsim::cli;

namespace {

enum class Format
{
  csv,
  json_lines
};

struct Globals
{
  std::uint64_t seed = 0;
  int threads = 0;
  std::uint64_t budget = 10000000;
  Format format = Format::csv;
  std::string output;
  bool no_manifest = false;
};

//! Exit codes: the computation finished but a gate or criterion failed.
constexpr int exit_failed_check = 2;
constexpr int exit_error = 1;

//! Destination of the main output: the -o file or stdout.
class Sink
{
public:
  explicit Sink(const std::string& path)
  {
    if (!path.empty()) {
      file_.open(path);
      if (!file_)
        throw InvalidInput("cannot open output file " + path);
    }
  }
  std::ostream& os() { return file_.is_open() ? file_ : std::cout; }

private:
  std::ofstream file_;
};

std::string csv_quote(const std::string& s)
{
  if (s.find_first_of(",\"\n") == std::string::npos)
    return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"')
      out += '"';
    out += c;
  }
  return out + "\"";
}

//! Writes rows either as CSV with a header or as one JSON object per line.
class Table
{
public:
  Table(std::ostream& os, Format format, std::vector<std::string> columns)
    : os_(os)
    , format_(format)
    , columns_(std::move(columns))
  {
    if (format_ == Format::csv) {
      for (std::size_t i = 0; i < columns_.size(); ++i)
        os_ << (i ? "," : "") << columns_[i];
      os_ << "\n";
    }
  }

  //! Cells are json values; numbers print with 12 significant digits in CSV.
  void row(const std::vector<json>& cells)
  {
    if (format_ == Format::json_lines) {
      json j = json::object();
      for (std::size_t i = 0; i < columns_.size(); ++i)
        j[columns_[i]] = cells[i];
      os_ << j.dump() << "\n";
      return;
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
      os_ << (i ? "," : "");
      const json& c = cells[i];
      if (c.is_number_float())
        os_ << fmt(c.get<double>());
      else if (c.is_string())
        os_ << csv_quote(c.get<std::string>());
      else if (!c.is_null())
        os_ << c.dump();
    }
    os_ << "\n";
  }

private:
  std::ostream& os_;
  Format format_;
  std::vector<std::string> columns_;
};

//! Doubles that may be infinite; JSON gets a string in that case.
json num(double x)
{
  if (std::isfinite(x))
    return x;
  return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
}

json interval_cell(const std::optional<Interval>& x, bool lo)
{
  if (!x)
    return nullptr;
  return num(lo ? x->lo() : x->hi());
}

std::string iso_time(std::chrono::system_clock::time_point t)
{
  std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

//! Resolved value of every option of `app` (defaults included).
void collect_parameters(const CLI::App& app, json& out)
{
  for (const CLI::Option* o : app.get_options()) {
    std::string key = o->get_single_name();
    if (key.empty() || key == "help" || key == "version")
      continue;
    if (o->get_expected_max() == 0) {
      out[key] = o->count() > 0;
      continue;
    }
    const auto& res = o->results();
    if (!res.empty())
      out[key] = res.size() == 1 ? json(res.front()) : json(res);
    else if (!o->get_default_str().empty())
      out[key] = o->get_default_str();
  }
}

struct Manifest
{
  std::string command;
  json parameters = json::object();
  json summary = json::object();
  std::chrono::system_clock::time_point started = std::chrono::system_clock::now();
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

  json record(const Globals& g, int exit_code) const
  {
    double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return { { "command", command },
             { "parameters", parameters },
             { "seed", g.seed },
             { "threads", g.threads > 0 ? g.threads : default_threads() },
             { "versions",
               { { "selfsim", SELFSIM_VERSION },
                 { "compiler", __VERSION__ },
                 { "boost", BOOST_LIB_VERSION },
                 { "eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                              std::to_string(EIGEN_MAJOR_VERSION) + "." +
                              std::to_string(EIGEN_MINOR_VERSION) } } },
             { "timing", { { "started", iso_time(started) }, { "wall_seconds", wall } } },
             { "exit_code", exit_code },
             { "summary", summary } };
  }
};

//! Next to the output file as <output>.manifest.json, else one stderr line.
void emit_manifest(const Manifest& m, const Globals& g, int exit_code)
{
  if (g.no_manifest)
    return;
  json rec = m.record(g, exit_code);
  if (!g.output.empty()) {
    std::ofstream f(g.output + ".manifest.json");
    f << rec.dump(2) << "\n";
  } else {
    std::cerr << "manifest: " << rec.dump() << "\n";
  }
}

EnumerationOptions enumeration_options(const Globals& g)
{
  EnumerationOptions e;
  e.budget = g.budget;
  e.threads = g.threads;
  return e;
}

// ---------------------------------------------------------------- analyze

struct AnalyzeArgs
{
  std::string spec;
  double constant = 1;
  int level = 10;
  double epsilon = 0.1;
  double rho_tilde = 0;
  bool u_part = false;
  bool no_diagnostics = false;
  std::size_t samples = 2000;
};

CriterionOptions criterion_options(const AnalyzeArgs& a, const Globals& g)
{
  CriterionOptions opt;
  opt.C = a.constant;
  opt.entropy_level = a.level;
  opt.enumeration = enumeration_options(g);
  opt.u_part = a.u_part;
  opt.diagnostics = !a.no_diagnostics;
  opt.diagnostic_samples = a.samples;
  opt.seed = g.seed;
  return opt;
}

//! Dimension formula and contracting-average criterion next to the main
//! report; either may be inapplicable to the measure.
int run_analyze(const AnalyzeArgs& a, const Globals& g, Manifest& m)
{
  SimMeasure mu = load_ifs(a.spec).measure();
  CriterionReport rep = main_criterion(mu, criterion_options(a, g));
  DimensionEstimate dim = dimension_estimate(mu, rep.entropy);
  std::optional<ContractingAverageReport> avg;
  std::string avg_note;
  try {
    avg = contracting_avg_criterion(mu, a.epsilon, a.rho_tilde);
  } catch (const PreconditionFailed& e) {
    avg_note = e.what();
  }

  Sink sink(g.output);
  if (g.format == Format::json_lines) {
    json j = { { "criterion", to_json(rep) },
               { "dimension", to_json(dim) },
               { "contracting_average", avg ? to_json(*avg) : json(nullptr) } };
    if (!avg_note.empty())
      j["contracting_average_note"] = avg_note;
    sink.os() << j.dump() << "\n";
  } else {
    sink.os() << "== criterion\n" << to_text(rep) << "== dimension\n" << to_text(dim)
              << "== contracting on average\n"
              << (avg ? to_text(*avg) : "not applicable: " + avg_note + "\n");
  }
  m.summary = { { "gates_ok", rep.gates_ok() }, { "margin", rep.margin ? json(*rep.margin) : json(nullptr) } };
  return rep.gates_ok() ? 0 : exit_failed_check;
}

// -------------------------------------------------------------- criterion

struct CriterionArgs
{
  AnalyzeArgs base;
  std::string lambda;
  std::string lambda2;
};

int run_criterion(const CriterionArgs& c, const Globals& g, Manifest& m)
{
  const AnalyzeArgs& a = c.base;
  Sink sink(g.output);
  auto emit = [&](const json& j, const std::string& text) {
    if (g.format == Format::json_lines)
      sink.os() << j.dump() << "\n";
    else
      sink.os() << text;
  };

  if (!c.lambda.empty()) {
    AlgebraicNumber l1 = parse_algebraic(c.lambda);
    if (c.lambda2.empty()) {
      BernoulliReport r = bernoulli_criterion(l1, a.constant, a.epsilon);
      emit({ { "bernoulli", to_json(r) } }, to_text(r));
      m.summary = { { "pass", r.pass }, { "margin", r.margin } };
      return r.pass ? 0 : exit_failed_check;
    }
    InhomReport r = dim1_inhom_criterion(l1, parse_algebraic(c.lambda2), a.constant, a.epsilon);
    emit({ { "inhom1d", to_json(r) } }, to_text(r));
    bool ok = r.height_ok && r.chi_ok;
    m.summary = { { "pass", ok }, { "margin", r.margin } };
    return ok ? 0 : exit_failed_check;
  }

  if (a.spec.empty())
    throw InvalidInput("criterion needs a spec file or --lambda");
  IfsSpec spec = load_ifs(a.spec);
  SimMeasure mu = spec.measure();
  std::optional<FamilyTag> tag;
  if (spec.family)
    tag = spec.family->tag;

  if (tag == FamilyTag::bernoulli || tag == FamilyTag::complex_bernoulli) {
    BernoulliReport r = bernoulli_criterion(*spec.family->lambda, a.constant, a.epsilon);
    emit({ { "family", to_string(*tag) }, { "bernoulli", to_json(r) } }, to_text(r));
    m.summary = { { "pass", r.pass }, { "margin", r.margin } };
    return r.pass ? 0 : exit_failed_check;
  }

  CriterionReport rep = main_criterion(mu, criterion_options(a, g));
  json j = { { "family", tag ? json(to_string(*tag)) : json(nullptr) },
             { "criterion", to_json(rep) } };
  std::string text = "== criterion\n" + to_text(rep);
  bool ok = rep.gates_ok() && rep.margin && *rep.margin > 0;

  if (tag == FamilyTag::inhom1d) {
    AlgebraicNumber l1(mu[0].g.rho()), l2(mu[1].g.rho());
    InhomReport r = dim1_inhom_criterion(l1, l2, a.constant, a.epsilon);
    j["inhom1d"] = to_json(r);
    text += "== one-dimensional inhomogeneous\n" + to_text(r);
    ok = rep.gates_ok() && r.height_ok && r.chi_ok;
  } else if (tag == FamilyTag::contracting_avg_q) {
    ContractingAverageReport r =
      contracting_avg_criterion(mu, spec.family->epsilon, a.rho_tilde);
    j["contracting_average"] = to_json(r);
    text += "== contracting on average\n" + to_text(r);
    ok = rep.gates_ok() && r.pass;
  }
  emit(j, text);
  m.summary = { { "gates_ok", rep.gates_ok() }, { "pass", ok } };
  return ok ? 0 : exit_failed_check;
}

// ------------------------------------------------------------ scan-detail

struct ScanArgs
{
  std::string spec;
  std::string points;
  double r_max = 1;
  double r_min = 1e-3;
  int count = 20;
  int k = 1;
  double beta = 1;
  std::string source = "level";
  int level = 0;
  std::size_t samples = 20000;
};

//! Points CSV: one point per row, d in {1, 2} columns, optional header.
SampleSet read_points_csv(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw InvalidInput("cannot open points file " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#')
      continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str()) {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (!numeric) {
      if (rows.empty())
        continue; // header
      throw ParseError(lineno, "non-numeric cell");
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw ParseError(lineno, "row has " + std::to_string(row.size()) + " columns, expected " +
                                 std::to_string(rows.front().size()));
    if (row.empty() || row.size() > 2)
      throw ParseError(lineno, "points must have 1 or 2 coordinates");
    rows.push_back(std::move(row));
  }
  if (rows.empty())
    throw InvalidInput("points file " + path + " has no rows");
  Mat pts(static_cast<Eigen::Index>(rows.front().size()), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t j = 0; j < rows.size(); ++j)
    for (std::size_t i = 0; i < rows[j].size(); ++i)
      pts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[j][i];
  return make_sample_set(std::move(pts));
}

//! Largest n <= 40 with k^n <= 2^14; the 1D atom scan costs about a second
//! per scale at that size.
int auto_level(std::size_t k)
{
  int n = 0;
  double atoms = 1;
  while (n < 40 && atoms * static_cast<double>(k) <= double(1 << 14)) {
    atoms *= static_cast<double>(k);
    ++n;
  }
  return std::max(n, 1);
}

int run_scan_detail(const ScanArgs& a, const Globals& g, Manifest& m)
{
  if (a.count < 1 || !(a.r_min > 0) || !(a.r_max >= a.r_min))
    throw InvalidInput("scan-detail needs 0 < r-min <= r-max and count >= 1");
  DetailOptions dopt;
  dopt.threads = g.threads;

  std::vector<double> rs(static_cast<std::size_t>(a.count));
  for (int i = 0; i < a.count; ++i)
    rs[static_cast<std::size_t>(i)] =
      a.count == 1 ? a.r_max : a.r_max * std::pow(a.r_min / a.r_max, double(i) / (a.count - 1));

  // Either a fixed measure with a W1 distance to nu, or a sample set.
  std::optional<Measure> measure;
  std::optional<SampleSet> samples;
  double w1 = 0;
  int d = 1;
  if (!a.points.empty()) {
    samples = read_points_csv(a.points);
    d = samples->dim();
    m.summary["source"] = "points";
    m.summary["points"] = samples->size();
  } else {
    if (a.spec.empty())
      throw InvalidInput("scan-detail needs a spec file or --points");
    SimMeasure mu = load_ifs(a.spec).measure();
    d = mu.dim();
    if (a.source == "level") {
      int n = a.level > 0 ? a.level : auto_level(mu.size());
      LevelMeasure lm = level_measure(mu, n, std::size_t(1) << 22);
      w1 = lm.w1_bound;
      measure = Measure(std::move(lm.measure));
      m.summary["source"] = "level";
      m.summary["level"] = n;
      m.summary["w1_bound"] = num(w1);
    } else if (a.source == "samples") {
      SampleOptions so;
      so.seed = g.seed;
      so.threads = g.threads;
      samples = sample_stationary(mu, a.samples, so);
      m.summary["source"] = "samples";
      m.summary["samples"] = a.samples;
    } else {
      throw InvalidInput("unknown source " + a.source + " (expected level or samples)");
    }
  }

  Sink sink(g.output);
  Table t(sink.os(), g.format, { "r", "s_r", "raw", "error", "w1_term", "sampling_bias", "reference" });
  bool in_range = true;
  for (double r : rs) {
    DetailValue v = measure ? order_k_detail(*measure, r, a.k, dopt) : detail(*samples, r, a.k, dopt);
    in_range = in_range && v.raw >= -1e-9 && v.raw <= 1 + 1e-9;
    double w1_term = measure ? std::exp(1.0) * d * w1 / r : NAN;
    double lg = std::log(1 / r);
    double reference = lg > 0 ? std::pow(lg, -a.beta) : INFINITY;
    t.row({ r, v.value, v.raw, v.error, measure ? num(w1_term) : json(nullptr),
            samples ? json(v.sampling_bias) : json(nullptr), num(reference) });
  }
  m.summary["raw_in_unit_interval"] = in_range;
  return 0;
}

// -------------------------------------------------------------- enumerate

int run_enumerate(const std::string& path, int level, const Globals& g, Manifest& m)
{
  SimMeasure mu = load_ifs(path).measure();
  WordEnumeration e = enumerate_convolution(mu, level, enumeration_options(g));
  Sink sink(g.output);
  Table t(sink.os(), g.format, { "index", "prob", "prob_float", "words", "map" });
  for (std::size_t i = 0; i < e.elements.size(); ++i) {
    const WordElement& w = e.elements[i];
    t.row({ i, w.prob.str(), w.prob.convert_to<double>(), w.words, w.g.to_string() });
  }
  m.summary = { { "level", level },
                { "distinct", e.elements.size() },
                { "words", e.word_count },
                { "collisions", e.collisions() },
                { "entropy", e.entropy() },
                { "entropy_rate", e.entropy() / level } };
  return 0;
}

// ------------------------------------------------------------- separation

int run_separation(const std::string& path, int n_max, bool u_part, const Globals& g,
                   Manifest& m)
{
  SimMeasure mu = load_ifs(path).measure();
  EnumerationOptions eo = enumeration_options(g);
  SeparationProfile prof = u_part ? u_part_separation(mu, n_max, eo) : exact_separation(mu, n_max, eo);
  std::optional<SeparationBound> bound;
  if (!u_part) {
    try {
      bound = height_separation_bound(mu);
      m.summary["bound"] = to_json(*bound);
    } catch (const Unsupported& e) {
      m.summary["bound_note"] = e.what();
    }
  }
  Sink sink(g.output);
  Table t(sink.os(), g.format,
          { "n", "M_lo", "M_hi", "Delta_lo", "Delta_hi", "S_lo", "S_hi", "union_size",
            "level_size", "bound" });
  for (const SeparationLevel& l : prof.levels)
    t.row({ l.n, interval_cell(l.M, true), interval_cell(l.M, false),
            interval_cell(l.Delta, true), interval_cell(l.Delta, false), interval_cell(l.S, true),
            interval_cell(l.S, false), l.union_size, l.level_size,
            bound ? num(bound->at_level(l.n)) : json(nullptr) });
  return 0;
}

// ---------------------------------------------------------- certify-free

int run_certify_free(const std::string& path, const std::vector<std::size_t>& pair,
                     const Globals& g, Manifest& m)
{
  SimMeasure mu = load_ifs(path).measure();
  if (pair.size() != 2 || pair[0] == pair[1] || pair[0] >= mu.size() || pair[1] >= mu.size())
    throw InvalidInput("--pair needs two distinct atom indices below " + std::to_string(mu.size()));
  FreenessCertificate c = certify_free(mu[pair[0]].g, mu[pair[1]].g);
  Sink sink(g.output);
  if (g.format == Format::json_lines)
    sink.os() << json{ { "i", pair[0] }, { "j", pair[1] }, { "certificate", to_json(c) } }.dump()
              << "\n";
  else
    sink.os() << "pair: " << pair[0] << ", " << pair[1] << "\n" << to_text(c);
  m.summary = { { "certified", c.certified }, { "route", to_string(c.route) } };
  return c.certified ? 0 : exit_failed_check;
}

// ----------------------------------------------------------------- sample

int run_sample(const std::string& path, std::size_t count, long steps, const Globals& g,
               Manifest& m)
{
  SimMeasure mu = load_ifs(path).measure();
  SampleOptions so;
  so.steps = steps;
  so.seed = g.seed;
  so.threads = g.threads;
  SampleSet s = sample_stationary(mu, count, so);
  Sink sink(g.output);
  if (g.format == Format::csv) {
    write_csv(sink.os(), s);
  } else {
    for (std::size_t i = 0; i < s.size(); ++i) {
      json row = json::array();
      for (int r = 0; r < s.dim(); ++r)
        row.push_back(s.points(r, static_cast<Eigen::Index>(i)));
      sink.os() << row.dump() << "\n";
    }
  }
  m.summary = { { "points", s.size() }, { "mean_steps", s.mean_steps } };
  return 0;
}

// --------------------------------------------------------- partition-demo

//! n random PSD matrices G G^T / d with G a d x d standard Gaussian matrix,
//! split into k parts.
int run_partition_demo(int n, int d, int k, const Globals& g, Manifest& m)
{
  if (n < 1 || d < 1 || k < 1)
    throw InvalidInput("partition-demo needs n, d, k >= 1");
  std::mt19937_64 gen(g.seed);
  std::normal_distribution<double> normal;
  std::vector<Mat> As;
  for (int i = 0; i < n; ++i) {
    Mat G(d, d);
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c)
        G(r, c) = normal(gen);
    As.push_back(G * G.transpose() / d);
  }
  PsdPartition p = partition_psd(As, k);
  Sink sink(g.output);
  if (g.format == Format::json_lines) {
    sink.os() << to_json(p).dump() << "\n";
  } else {
    std::ostream& os = sink.os();
    os << "matrices: " << n << " of size " << d << ", parts: " << k << "\n"
       << "search: " << (p.exact ? "exhaustive" : "local") << ", improving moves " << p.moves
       << "\n"
       << "C = lambda_min(sum A_i) / k: " << fmt(p.C) << "\n"
       << "c = max ||A_i||: " << fmt(p.c) << "\n"
       << "guarantee C - d sqrt(2cC) - 2 d^(3/2) c: " << fmt(p.guarantee) << "\n";
    for (std::size_t j = 0; j < p.parts.size(); ++j)
      os << "part " << j << ": " << p.parts[j].size()
         << " matrices, lambda_min = " << fmt(p.min_eigenvalue[j]) << "\n";
    os << "bound holds: " << (p.bound_holds ? "yes" : "no") << "\n"
       << "deviation " << fmt(p.deviation) << " <= " << fmt(p.deviation_bound) << "\n";
  }
  m.summary = { { "bound_holds", p.bound_holds }, { "exact", p.exact } };
  return 0;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{ "Quantities behind absolute-continuity criteria for self-similar measures" };
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.set_version_flag("--version", SELFSIM_VERSION);

  Globals g;
  std::map<std::string, Format> formats{ { "csv", Format::csv },
                                         { "json-lines", Format::json_lines } };
  app.add_option("--seed", g.seed, "Random seed")->default_val(0);
  app.add_option("--threads", g.threads, "Thread cap (0: SELFSIM_THREADS or hardware)")
    ->default_val(0)
    ->check(CLI::NonNegativeNumber);
  app.add_option("--budget", g.budget, "Cap on enumerated words k^n")->default_val(10000000);
  app.add_option("--format", g.format, "Output format")
    ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case))
    ->default_str("csv");
  app.add_option("-o,--output", g.output, "Output file (default stdout)");
  app.add_flag("--no-manifest", g.no_manifest, "Do not emit the run manifest");
  app.fallthrough();

  Manifest m;
  std::function<int()> run;

  AnalyzeArgs analyze;
  auto add_criterion_flags = [](CLI::App* sub, AnalyzeArgs& a) {
    sub->add_option("--constant", a.constant, "Constant C (c for the inhomogeneous test)")
      ->default_val(1.0);
    sub->add_option("--level", a.level, "Entropy enumeration level")->default_val(10);
    sub->add_option("--epsilon", a.epsilon, "Epsilon of the corollaries")->default_val(0.1);
    sub->add_option("--rho-tilde", a.rho_tilde, "Lower end of the rho_hat range")
      ->default_val(0.0);
    sub->add_flag("--u-part", a.u_part, "Use the rotation-part variant (d >= 3)");
    sub->add_flag("--no-diagnostics", a.no_diagnostics, "Skip the Monte Carlo diagnostics");
    sub->add_option("--samples", a.samples, "Diagnostic sample count")->default_val(2000);
  };
  CLI::App* sub_analyze = app.add_subcommand("analyze", "Full criterion report for a spec");
  sub_analyze->add_option("spec", analyze.spec, "IFS spec file")->required()->check(CLI::ExistingFile);
  add_criterion_flags(sub_analyze, analyze);
  sub_analyze->callback([&] { run = [&] { return run_analyze(analyze, g, m); }; });

  CriterionArgs crit;
  CLI::App* sub_crit =
    app.add_subcommand("criterion", "Family-specific criterion for a spec or an algebraic lambda");
  sub_crit->add_option("spec", crit.base.spec, "IFS or family spec file")->check(CLI::ExistingFile);
  sub_crit->add_option("--lambda", crit.lambda, "Bernoulli parameter, or lambda_1 with --lambda2");
  sub_crit->add_option("--lambda2", crit.lambda2, "lambda_2 of the inhomogeneous pair")
    ->needs("--lambda");
  add_criterion_flags(sub_crit, crit.base);
  sub_crit->callback([&] { run = [&] { return run_criterion(crit, g, m); }; });

  ScanArgs scan;
  CLI::App* sub_scan = app.add_subcommand("scan-detail", "Detail s_r over a geometric r grid");
  sub_scan->add_option("spec", scan.spec, "IFS spec file")->check(CLI::ExistingFile);
  sub_scan->add_option("--points", scan.points, "CSV of sample points instead of a spec")
    ->check(CLI::ExistingFile);
  sub_scan->add_option("--r-max", scan.r_max)->default_val(1.0);
  sub_scan->add_option("--r-min", scan.r_min)->default_val(1e-3);
  sub_scan->add_option("--count", scan.count)->default_val(20);
  sub_scan->add_option("-k,--k", scan.k, "Detail order")->default_val(1)->check(CLI::PositiveNumber);
  sub_scan->add_option("--beta", scan.beta, "Exponent of the (log 1/r)^-beta reference")
    ->default_val(1.0);
  sub_scan->add_option("--source", scan.source, "level or samples")
    ->default_val("level")
    ->check(CLI::IsMember({ "level", "samples" }));
  sub_scan->add_option("--level", scan.level, "Word length of the atomic approximation (0: auto)")
    ->default_val(0);
  sub_scan->add_option("--samples", scan.samples, "Sample count for --source samples")
    ->default_val(20000);
  sub_scan->callback([&] { run = [&] { return run_scan_detail(scan, g, m); }; });

  std::string spec;
  int level = 3;
  CLI::App* sub_enum = app.add_subcommand("enumerate", "Distinct elements of supp(mu^{*n})");
  sub_enum->add_option("spec", spec)->required()->check(CLI::ExistingFile);
  sub_enum->add_option("--level", level)->default_val(3)->check(CLI::PositiveNumber);
  sub_enum->callback([&] { run = [&] { return run_enumerate(spec, level, g, m); }; });

  int n_max = 6;
  bool u_part = false;
  CLI::App* sub_sep = app.add_subcommand("separation", "Separation profile M_n, Delta_n, S_n");
  sub_sep->add_option("spec", spec)->required()->check(CLI::ExistingFile);
  sub_sep->add_option("--n-max", n_max)->default_val(6)->check(CLI::PositiveNumber);
  sub_sep->add_flag("--u-part", u_part, "Separation of the rotation parts");
  sub_sep->callback([&] { run = [&] { return run_separation(spec, n_max, u_part, g, m); }; });

  std::vector<std::size_t> pair{ 0, 1 };
  CLI::App* sub_free = app.add_subcommand("certify-free", "Ping-pong freeness certificate");
  sub_free->add_option("spec", spec)->required()->check(CLI::ExistingFile);
  sub_free->add_option("--pair", pair, "Atom indices i,j")->delimiter(',')->expected(2);
  sub_free->callback([&] { run = [&] { return run_certify_free(spec, pair, g, m); }; });

  std::size_t count = 1000;
  long steps = 0;
  CLI::App* sub_sample = app.add_subcommand("sample", "Draws from the stationary measure");
  sub_sample->add_option("spec", spec)->required()->check(CLI::ExistingFile);
  sub_sample->add_option("--count", count)->default_val(1000);
  sub_sample->add_option("--steps", steps, "Fixed word length (0: adaptive)")->default_val(0);
  sub_sample->callback([&] { run = [&] { return run_sample(spec, count, steps, g, m); }; });

  int pn = 12, pd = 2, pk = 3;
  CLI::App* sub_part = app.add_subcommand("partition-demo", "PSD partition on random matrices");
  sub_part->add_option("--n", pn)->default_val(12);
  sub_part->add_option("--d", pd)->default_val(2);
  sub_part->add_option("--k", pk)->default_val(3);
  sub_part->callback([&] { run = [&] { return run_partition_demo(pn, pd, pk, g, m); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : exit_error;
  }

  const CLI::App* chosen = app.get_subcommands().front();
  m.command = chosen->get_name();
  collect_parameters(app, m.parameters);
  collect_parameters(*chosen, m.parameters);
  m.parameters["format"] = g.format == Format::csv ? "csv" : "json-lines";
  if (g.threads > 0)
    setenv("SELFSIM_THREADS", std::to_string(g.threads).c_str(), 1);

  int code = 0;
  try {
    code = run();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    code = exit_error;
  }
  emit_manifest(m, g, code);
  return code;
}
