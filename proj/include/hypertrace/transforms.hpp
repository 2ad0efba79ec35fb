#pragma once

#include <map>
#include <string>

#include "hypertrace/formula.hpp"

namespace hypertrace {

// Splits each unconstrained trace variable into one variable per proposition:
// an unconstrained ∃π becomes ∃π_x0 … ∃π_xn, predicates x(π, i) with π
// tracked become x(π_x, i), and constrained quantifiers pass through
// unchanged.  Universal forms go through the dual of the existential case.
// `vc` must contain only free trace variables of `f`.
HPtr flatten(const HPtr& f, const std::set<std::string>& props,
             const std::set<std::string>& vc);

// Variant exposing the variable mapping (original var, prop) -> new var.
struct FlattenResult {
  HPtr formula;
  std::map<std::pair<std::string, std::string>, std::string> var_map;
};
FlattenResult flatten_with_map(const HPtr& f, const std::set<std::string>& props,
                               const std::set<std::string>& vc);

// Removes a block of constrained universal quantifiers from a prenex formula
// E ∃̂π1…∃̂πn ∀̂π'1…∀̂π'm Q matrix by conjoining all m-fold substitutions of
// the π' by the π; each conjunct carries freshly renamed copies of Q.
// Requires n >= 1 when m >= 1.
HPtr remove_forall(const HPtr& f);

// Turns a leading block of constrained existentials into unconstrained ones;
// requires that no constrained quantifier remains after the block.
HPtr remove_exists_hats(const HPtr& f);

// remove_forall then remove_exists_hats; the result has no constrained
// quantifiers and is equisatisfiable with the input.
HPtr to_unconstrained(const HPtr& f);

// Replaces every constrained existential in a prenex prefix by its
// unconstrained form.  Models of `f` are models of the result, which yields
// an unsatisfiability semi-decision via the contrapositive.
HPtr relax_existentials(const HPtr& f);

// Hyper -> S1S on formulas without constrained quantifiers: flatten on the
// free trace variables, then reinterpret each π_x as a second-order variable
// (x(π_x, i) becomes π_x(i)); time order atoms expand to their second-order definitions.
struct ToS1SResult {
  SPtr formula;
  // (trace var, prop) -> second-order variable
  std::map<std::pair<std::string, std::string>, std::string> var_map;
};
ToS1SResult to_s1s(const HPtr& f, const std::set<std::string>& props);

// S1S -> hypertrace: each second-order X becomes trace variable pi_X with
// distinguished proposition X; Succ(i,j) expands to i<j ∧ ∀k (i<k → j<=k).
struct ToHyperResult {
  HPtr formula;
  std::map<std::string, std::string> var_map;  // SO var -> trace var
  std::set<std::string> props;                 // distinguished propositions
};
ToHyperResult to_hyper(const SPtr& f);

// LTL -> first-order matrix over one trace variable with a free anchor time
// variable.  Indexed atoms a_π map onto that trace variable π; plain atoms
// use `tracevar`.
HPtr ltl_to_fo(const LPtr& f, const std::string& tracevar,
               const std::string& anchor, int& fresh_counter);

// HyperQPTL sentence -> trace-prefixed hypertrace sentence: trace
// quantifiers become constrained, propositional quantifiers become
// unconstrained quantifiers over pi_q, and the body goes through ltl_to_fo
// anchored at an initial-time variable constrained to zero.
HPtr tr_hqptl_to_hyper(const HQPTLFormula& f);

// The exists-then-forall constrained prefix split E ∃̂^n ∀̂^m Q used by the
// transforms above and by the decision router.
struct ConstrainedSplit {
  QuantifierPrefix leading_exists;       // existential time/unconstrained
  std::vector<std::string> exists_hats;  // ∃̂ block
  std::vector<std::string> forall_hats;  // ∀̂ block
  QuantifierPrefix trailing;             // no constrained quantifiers
  HPtr matrix;
};
// Throws ShapeError when the prefix does not fit the pattern.
ConstrainedSplit split_constrained_prefix(const HPtr& prenex);

}  // namespace hypertrace
