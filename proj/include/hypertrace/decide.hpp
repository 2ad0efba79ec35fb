#pragma once

#include <optional>
#include <string>

#include "hypertrace/automata.hpp"
#include "hypertrace/eval.hpp"
#include "hypertrace/formula.hpp"
#include "hypertrace/traces.hpp"

namespace hypertrace {

// Decidability classes keyed on the prenex quantifier prefix, first match in
// this order wins: UnconstrainedOnly, ExistsForallConstrained,
// TracePrefixedDecidable, TimePrefixedDecidable, KnownUndecidable, Unknown.
struct FragmentClass {
  enum class Label {
    UnconstrainedOnly,
    ExistsForallConstrained,
    TracePrefixedDecidable,
    TimePrefixedDecidable,
    KnownUndecidable,
    Unknown,
  } label = Label::Unknown;
  std::string reason;       // TracePrefix_AAE or TimePrefix_Minsky
  QuantifierPrefix prefix;  // matched evidence

  bool decidable() const {
    return label == Label::UnconstrainedOnly ||
           label == Label::ExistsForallConstrained ||
           label == Label::TracePrefixedDecidable ||
           label == Label::TimePrefixedDecidable;
  }
};

const char* to_string(FragmentClass::Label label);

FragmentClass classify(const HPtr& f);

struct SatResult {
  enum class Verdict { Sat, Unsat, Unknown } verdict = Verdict::Unknown;
  TraceSet witness;    // Sat only
  std::string reason;  // Unknown only
};

// Satisfiability along the decidable routes: to_unconstrained when needed,
// then the S1S automaton and its emptiness check.  Sat witnesses decode the
// leading existential trace variables from the lasso and re-verify under
// model_check.  Other classes first try the empty model, then the
// relax_existentials semi-decision; failing both they stay Unknown.
SatResult check_sat(const HPtr& f, const AutomataLimits& limits = {});

// Exact model checking: constrained quantifiers expand by enumeration over
// the model, fixed traces enter the automaton as constrained constant
// tracks, and the verdict is an emptiness check.
bool model_check(const TraceSet& model, const HPtr& f,
                 const AutomataLimits& limits = {});

// Exact satisfaction with free variables bound by the assignment.
bool eval_exact(const TraceSet& model, const Assignment& asg, const HPtr& f,
                const AutomataLimits& limits = {});

// EvalOptions preconfigured so Mode::Exact routes through the automata.
EvalOptions exact_eval_options(const AutomataLimits& limits = {});

// Finite trace family for the brute-force oracle.
struct TraceUniverse {
  int prefix_bound = 1;
  int period_bound = 1;
  std::set<std::string> alphabet;

  std::vector<UPTrace> generate() const {
    return enumerate_traces(alphabet, prefix_bound, period_bound);
  }
};

struct EquisatVerdict {
  enum class Kind { AgreeSat, AgreeUnsat, Disagree, Inconclusive } kind;
  TraceSet witness;  // Disagree: the separating model
};

// Compares the existence of satisfying models for two closed formulas over
// all subsets of the universe up to the size cap, evaluating in bounded
// mode with the same universe for unconstrained quantifiers.
EquisatVerdict equisat_oracle(const HPtr& f, const HPtr& g,
                              const TraceUniverse& u, int max_model_size);

}  // namespace hypertrace
