#include "selfsim/ifs_io.hpp"

#include "selfsim/errors.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace selfsim {

namespace {

std::string strip(const std::string& s)
{
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos)
    return {};
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

//! Splits on `sep` outside brackets, braces and parentheses.
std::vector<std::string> split_top(const std::string& s, char sep)
{
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char c : s) {
    if (c == '[' || c == '{' || c == '(')
      ++depth;
    else if (c == ']' || c == '}' || c == ')')
      --depth;
    if (c == sep && depth == 0) {
      out.push_back(strip(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(strip(cur));
  return out;
}

std::string fmt_double(double x)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

class FloatParser
{
public:
  explicit FloatParser(const std::string& s)
    : s_(s)
  {}

  double parse()
  {
    double v = expr();
    skip();
    if (i_ != s_.size())
      fail("unexpected '" + s_.substr(i_, 1) + "'");
    return v;
  }

private:
  [[noreturn]] void fail(const std::string& m) const
  {
    throw InvalidInput("cannot parse float expression \"" + s_ + "\": " + m);
  }
  void skip()
  {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_])))
      ++i_;
  }
  bool eat(char c)
  {
    skip();
    if (i_ < s_.size() && s_[i_] == c) {
      ++i_;
      return true;
    }
    return false;
  }
  double expr()
  {
    double v = term();
    for (;;) {
      if (eat('+'))
        v += term();
      else if (eat('-'))
        v -= term();
      else
        return v;
    }
  }
  double term()
  {
    double v = unary();
    for (;;) {
      if (eat('*'))
        v *= unary();
      else if (eat('/'))
        v /= unary();
      else
        return v;
    }
  }
  double unary()
  {
    if (eat('-'))
      return -unary();
    if (eat('+'))
      return unary();
    double base = atom();
    if (eat('^'))
      return std::pow(base, unary());
    return base;
  }
  double atom()
  {
    skip();
    if (eat('(')) {
      double v = expr();
      if (!eat(')'))
        fail("missing ')'");
      return v;
    }
    if (i_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[i_]))) {
      std::size_t j = i_;
      while (j < s_.size() && std::isalpha(static_cast<unsigned char>(s_[j])))
        ++j;
      std::string name = s_.substr(i_, j - i_);
      i_ = j;
      if (name == "pi")
        return M_PI;
      if (name == "e")
        return M_E;
      if (!eat('('))
        fail("expected '(' after " + name);
      double x = expr();
      if (!eat(')'))
        fail("missing ')'");
      if (name == "sqrt")
        return std::sqrt(x);
      if (name == "exp")
        return std::exp(x);
      if (name == "log")
        return std::log(x);
      if (name == "sin")
        return std::sin(x);
      if (name == "cos")
        return std::cos(x);
      if (name == "tan")
        return std::tan(x);
      fail("unknown function " + name);
    }
    const char* start = s_.c_str() + i_;
    char* end = nullptr;
    double v = std::strtod(start, &end);
    if (end == start)
      fail("expected a number");
    i_ += static_cast<std::size_t>(end - start);
    return v;
  }

  const std::string& s_;
  std::size_t i_ = 0;
};

std::string bracket_body(const std::string& s)
{
  std::string t = strip(s);
  if (t.size() < 2 || t.front() != '[' || t.back() != ']')
    throw InvalidInput("expected [...], got \"" + s + "\"");
  return t.substr(1, t.size() - 2);
}

template <class Parse>
auto parse_vector(const std::string& s, Parse parse)
{
  std::vector<decltype(parse(std::string()))> out;
  std::string body = strip(bracket_body(s));
  if (body.empty())
    return out;
  for (const auto& e : split_top(body, ','))
    out.push_back(parse(e));
  return out;
}

template <class Parse>
auto parse_matrix(const std::string& s, Parse parse)
{
  std::vector<std::vector<decltype(parse(std::string()))>> rows;
  for (const auto& r : split_top(bracket_body(s), ';')) {
    rows.emplace_back();
    for (const auto& e : split_top(r, ','))
      rows.back().push_back(parse(e));
  }
  for (const auto& r : rows)
    if (r.size() != rows.size())
      throw InvalidInput("matrix \"" + s + "\" is not square");
  return rows;
}

ExactMatrix exact_matrix(const std::string& s)
{
  auto rows = parse_matrix(s, [](const std::string& e) { return parse_quadratic(e); });
  int d = static_cast<int>(rows.size());
  ExactMatrix U(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      U(i, j) = rows[i][j];
  return U;
}

Rational exact_rational(const std::string& s)
{
  QuadraticNumber x = parse_quadratic(s);
  if (!x.is_rational())
    throw InvalidInput("\"" + s + "\" must be rational");
  return x.a();
}

long long integer(const std::string& s)
{
  Rational x = exact_rational(s);
  if (denominator(x) != 1)
    throw InvalidInput("\"" + s + "\" must be an integer");
  return numerator(x).convert_to<long long>();
}

std::string to_text(const ExactMatrix& U)
{
  std::string s = "[";
  for (int i = 0; i < U.rows; ++i) {
    if (i)
      s += ";";
    for (int j = 0; j < U.cols; ++j)
      s += (j ? "," : "") + U(i, j).to_string();
  }
  return s + "]";
}

std::string to_text(const ExactVector& b)
{
  std::string s = "[";
  for (std::size_t i = 0; i < b.size(); ++i)
    s += (i ? "," : "") + b[i].to_string();
  return s + "]";
}

struct KeyValues
{
  bool numeric = false;
  std::vector<std::pair<std::string, std::string>> kv;

  const std::string* get(const std::string& key) const
  {
    for (const auto& [k, v] : kv)
      if (k == key)
        return &v;
    return nullptr;
  }
};

KeyValues key_values(const std::string& rest, std::initializer_list<const char*> allowed)
{
  KeyValues out;
  for (const auto& f : split_top(rest, ';')) {
    if (f.empty())
      continue;
    if (f == "numeric") {
      out.numeric = true;
      continue;
    }
    std::size_t eq = f.find('=');
    if (eq == std::string::npos)
      throw InvalidInput("expected key=value, got \"" + f + "\"");
    std::string k = strip(f.substr(0, eq));
    bool ok = false;
    for (const char* a : allowed)
      ok = ok || k == a;
    if (!ok)
      throw InvalidInput("unknown key \"" + k + "\"");
    if (out.get(k))
      throw InvalidInput("duplicate key \"" + k + "\"");
    out.kv.emplace_back(k, strip(f.substr(eq + 1)));
  }
  return out;
}

Atom parse_atom(const std::string& rest, int d)
{
  KeyValues f = key_values(rest, { "p", "rho", "U", "b" });
  if (!f.get("p") || !f.get("rho"))
    throw InvalidInput("atom needs p and rho");
  Rational p = exact_rational(*f.get("p"));
  if (f.numeric) {
    double rho = parse_float_expr(*f.get("rho"));
    Mat U = Mat::Identity(d, d);
    Vec b = Vec::Zero(d);
    if (auto s = f.get("U")) {
      auto rows = parse_matrix(*s, parse_float_expr);
      if (static_cast<int>(rows.size()) != d)
        throw InvalidInput("U must be d x d");
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          U(i, j) = rows[i][j];
    }
    if (auto s = f.get("b")) {
      auto v = parse_vector(*s, parse_float_expr);
      if (static_cast<int>(v.size()) != d)
        throw InvalidInput("b must have d entries");
      for (int i = 0; i < d; ++i)
        b(i) = v[i];
    }
    return { p, Similarity::numeric(rho, U, b) };
  }
  QuadraticNumber rho = parse_quadratic(*f.get("rho"));
  ExactMatrix U = f.get("U") ? exact_matrix(*f.get("U")) : ExactMatrix::identity(d);
  ExactVector b = f.get("b") ? parse_vector(*f.get("b"), [](const std::string& e) {
    return parse_quadratic(e);
  })
                             : ExactVector(d);
  if (U.rows != d || static_cast<int>(b.size()) != d)
    throw InvalidInput("U and b must match the dimension");
  if (d == 1 && rho.sign() < 0)
    return { p, Similarity::affine1d(rho * U(0, 0), b[0]) };
  return { p, Similarity(rho, U, b) };
}

void parse_map(const std::string& rest, FamilySpec& fam)
{
  KeyValues f = key_values(rest, { "p", "a", "m", "U", "b" });
  if (auto s = f.get("p"))
    fam.p.push_back(exact_rational(*s));
  if (f.get("a") && f.get("m"))
    throw InvalidInput("give a or m, not both");
  if (auto s = f.get("a") ? f.get("a") : f.get("m"))
    fam.a.push_back(integer(*s));
  if (auto s = f.get("U"))
    fam.U.push_back(exact_matrix(*s));
  if (auto s = f.get("b"))
    fam.b.push_back(parse_vector(*s, [](const std::string& e) { return parse_quadratic(e); }));
}

} // namespace

double parse_float_expr(const std::string& text)
{
  return FloatParser(text).parse();
}

SimMeasure IfsSpec::measure() const
{
  if (family)
    return generate_family(*family);
  return SimMeasure(atoms);
}

IfsSpec parse_ifs(const std::string& text)
{
  IfsSpec spec;
  std::istringstream in(text);
  std::string raw;
  int line = 0, first_entry = 0;
  bool have_dim = false;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = strip(raw.substr(0, raw.find('#')));
    if (s.empty())
      continue;
    std::size_t colon = s.find(':');
    if (colon == std::string::npos)
      throw ParseError(line, "expected 'key: value'");
    std::string key = strip(s.substr(0, colon)), rest = strip(s.substr(colon + 1));
    try {
      if (key == "dimension") {
        if (have_dim || !spec.atoms.empty() || spec.family)
          throw InvalidInput("dimension must come first and only once");
        long long d = integer(rest);
        if (d < 1 || d > 64)
          throw InvalidInput("dimension must lie in [1, 64]");
        spec.dimension = static_cast<int>(d);
        have_dim = true;
      } else if (key == "atom") {
        if (spec.family)
          throw InvalidInput("atom lines cannot follow a family");
        spec.atoms.push_back(parse_atom(rest, spec.dimension));
        if (!first_entry)
          first_entry = line;
      } else if (key == "family") {
        if (spec.family || !spec.atoms.empty())
          throw InvalidInput("only one family, and no atom lines with it");
        spec.family = FamilySpec{};
        spec.family->tag = parse_family_tag(rest);
        first_entry = line;
      } else if (spec.family && key == "n") {
        spec.family->n = integer(rest);
      } else if (spec.family && key == "q") {
        spec.family->q = integer(rest);
      } else if (spec.family && key == "epsilon") {
        spec.family->epsilon = parse_float_expr(rest);
      } else if (spec.family && key == "lambda") {
        spec.family->lambda = parse_algebraic(rest);
      } else if (spec.family && key == "map") {
        parse_map(rest, *spec.family);
      } else {
        throw InvalidInput("unknown entry \"" + key + "\"");
      }
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(line, e.what());
    }
  }
  if (!first_entry)
    throw ParseError(line, "no atoms or family given");
  try {
    SimMeasure mu = spec.measure();
    if (mu.dim() != spec.dimension)
      throw InvalidInput("maps have dimension " + std::to_string(mu.dim()) + ", declared " +
                         std::to_string(spec.dimension));
  } catch (const std::exception& e) {
    throw ParseError(first_entry, e.what());
  }
  return spec;
}

IfsSpec load_ifs(const std::string& path)
{
  std::ifstream f(path);
  if (!f)
    throw InvalidInput("cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_ifs(ss.str());
}

std::string serialize_ifs(const IfsSpec& spec)
{
  std::ostringstream os;
  os << "dimension: " << spec.dimension << "\n";
  if (spec.family) {
    const FamilySpec& f = *spec.family;
    os << "family: " << to_string(f.tag) << "\n";
    if (f.tag == FamilyTag::inhom1d)
      os << "n: " << f.n << "\n";
    if (f.q)
      os << "q: " << f.q << "\n";
    os << "epsilon: " << fmt_double(f.epsilon) << "\n";
    if (f.lambda)
      os << "lambda: " << f.lambda->to_string() << "\n";
    std::size_t k = std::max({ f.p.size(), f.a.size(), f.U.size(), f.b.size() });
    for (std::size_t i = 0; i < k; ++i) {
      std::vector<std::string> parts;
      if (i < f.p.size())
        parts.push_back("p=" + QuadraticNumber(f.p[i]).to_string());
      if (i < f.a.size())
        parts.push_back("a=" + std::to_string(f.a[i]));
      if (i < f.U.size())
        parts.push_back("U=" + to_text(f.U[i]));
      if (i < f.b.size())
        parts.push_back("b=" + to_text(f.b[i]));
      os << "map: ";
      for (std::size_t j = 0; j < parts.size(); ++j)
        os << (j ? "; " : "") << parts[j];
      os << "\n";
    }
    return os.str();
  }
  for (const auto& a : spec.atoms)
    os << "atom: p=" << QuadraticNumber(a.p).to_string() << "; "
       << (a.g.is_exact() ? "" : "numeric; ") << a.g.to_string() << "\n";
  return os.str();
}

} // namespace selfsim
