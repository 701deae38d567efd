#pragma once

#include "selfsim/criteria.hpp"
#include "selfsim/similarity.hpp"

#include <optional>
#include <string>
#include <vector>

namespace selfsim {

//! An IFS given either atom by atom or as a family.
//!
//! Text format, one entry per line, `#` starts a comment:
//!
//!     dimension: 2
//!     atom: p=1/2; rho=1/2; U=[3/5,-4/5;4/5,3/5]; b=[1,0]
//!     atom: p=1/2; numeric; rho=0.5; U=[cos(1),-sin(1);sin(1),cos(1)]; b=[0,0]
//!
//! or
//!
//!     family: prime_q
//!     q: 101
//!     epsilon: 0.1
//!     map: a=1; b=[0]
//!     map: a=3; b=[1]
//!
//! Exact entries use the exact-number syntax; `numeric` atoms take float
//! expressions (+ - * / ^, parentheses, pi, e, sqrt, exp, log, sin, cos, tan).
//! Probabilities are always exact rationals.
struct IfsSpec
{
  int dimension = 1;
  std::vector<Atom> atoms;
  std::optional<FamilySpec> family;

  //! The atoms, or the generated family (with its validators run).
  SimMeasure measure() const;
};

//! Throws ParseError with the offending line; the measure is built and
//! validated at load time.
IfsSpec parse_ifs(const std::string& text);
IfsSpec load_ifs(const std::string& path);

//! Inverse of parse_ifs: parsing the output yields identical exact values
//! (and identical doubles for numeric atoms).
std::string serialize_ifs(const IfsSpec& spec);

//! Evaluates a float expression such as "-sin(1)/2".
double parse_float_expr(const std::string& text);

} // namespace selfsim
