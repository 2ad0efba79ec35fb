#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hypertrace/formula.hpp"

namespace hypertrace {

enum class Dialect { Hyper, S1S, Ltl, Hqptl };

// Result of parsing a formula file.  `warnings` reports silent variable
// renamings applied to restore unique binding.
struct ParsedHyper {
  HPtr formula;
  std::set<std::string> alphabet;  // declared props plus occurring ones
  std::vector<std::string> warnings;
};
struct ParsedS1S {
  SPtr formula;
  std::vector<std::string> warnings;
};
struct ParsedLtl {
  LPtr formula;
  std::vector<std::string> warnings;
};
struct ParsedHqptl {
  HQPTLFormula formula;
  std::set<std::string> alphabet;
  std::vector<std::string> warnings;
};

// Concrete syntax, hyper dialect (others analogous):
//   formula := quant* body
//   quant   := ("exists"|"forall") sort ident "."
//   sort    := "trace" | "ctrace" | "time"
//   body    := body "<->" body | body "->" body | body "|" body
//            | body "&" body | "!" body | "(" formula ")" | atom
//   atom    := ident "(" ident "," ident ")" | ident "<" ident
//            | ident "=" ident
// A file may start with `props: a, b;`.  Comments run "//" to end of line.
// S1S sorts are "set" | "nat"; S1S atoms are X(i), succ(i,j), i = j plus the
// abbreviations i < j, i <= j, i = 0, subset(X,Y), succClosed(X), which the
// parser expands.  LTL/HQPTL add temporal operators X F G U, constants
// true/false, and atoms a[pi] (indexed) or bare idents; HQPTL sorts are
// "trace" | "prop".
ParsedHyper parse_hyper(const std::string& text);
ParsedS1S parse_s1s(const std::string& text);
ParsedLtl parse_ltl(const std::string& text);
ParsedHqptl parse_hqptl(const std::string& text);

std::string render(const HPtr& f);  // includes a props: header when needed
std::string render(const SPtr& f);
std::string render(const LPtr& f);
std::string render(const HQPTLFormula& f);

// Negation normal form: negation pushed to atoms, And/Implies/Iff and
// quantifier duals eliminated accordingly.
HPtr to_nnf(const HPtr& f);

// Prenex normal form.  Renames bound variables apart first; hoists
// quantifiers left to right in encounter order; never reorders quantifiers
// already in prefix position.
HPtr to_prenex(const HPtr& f);

// Prefix of a formula in prenex form; throws ShapeError otherwise.
QuantifierPrefix quantifier_prefix(const HPtr& f);

// Matrix under the prefix of a prenex formula.
HPtr prenex_matrix(const HPtr& f);

// Reattach a prefix around a matrix.
HPtr attach_prefix(const QuantifierPrefix& prefix, HPtr matrix);

bool is_prenex(const HPtr& f);
bool is_quantifier_free(const HPtr& f);

// Renames bound variables so that no name is bound twice and no bound name
// collides with a free one.  Appends a warning per rename.
HPtr freshen_bound(const HPtr& f, std::vector<std::string>* warnings);

// Capture-free substitution of trace variables (used by the transforms).
HPtr substitute_trace_vars(const HPtr& f,
                           const std::map<std::string, std::string>& sub);

}  // namespace hypertrace
