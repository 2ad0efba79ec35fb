#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "hypertrace/formula.hpp"
#include "hypertrace/traces.hpp"

namespace hypertrace {

// Bounded mode enumerates time quantifiers up to a computed horizon and
// unconstrained trace quantifiers over a finite trace universe; exact mode
// delegates whole-formula checks to the automata route (installed by the
// decide module to avoid a dependency cycle).
struct EvalOptions {
  enum class Mode { Bounded, Exact } mode = Mode::Bounded;
  uint64_t max_horizon = 10000;
  int universe_prefix = 2;
  int universe_period = 2;
  bool allow_unconstrained_enumeration = true;

  std::function<bool(const TraceSet&, const Assignment&, const HPtr&)>
      exact_delegate;  // eval_hyper, Mode::Exact
  std::function<bool(const TraceSet&, const HQPTLFormula&)>
      hqptl_exact_delegate;  // eval_hqptl, Mode::Exact (closed sentences)
};

// Satisfaction of a hypertrace formula over a trace-set structure under a
// pair of assignments.  Constrained quantifiers enumerate the model; time
// quantifiers enumerate [0, H) with H = maxPrefix + (d+1)·lcm(periods in
// scope), d = number of time quantifiers; unconstrained quantifiers
// enumerate the universe (bounded) or go through the automata route (exact).
bool eval_hyper(const TraceSet& model, const Assignment& asg, const HPtr& f,
                const EvalOptions& opts = {});

// Exact LTL satisfaction on an ultimately periodic word.  Suffixes of a UP
// word fall into prefix+period classes; Until is a least fixpoint over them.
// Indexed atoms a_π read the proposition "a[π]" of the flattened word.
bool eval_ltl_lasso(const UPTrace& trace, const LPtr& f);

// ⌊Π⌋: one UP trace over the product alphabet; proposition "a[π]" holds at i
// iff a ∈ Π(π)[i], and for variables listed in prop_vars the proposition
// keeps its own name (HyperQPTL's q-atoms).
UPTrace flatten_assignment(const std::map<std::string, UPTrace>& traces,
                           const std::set<std::string>& prop_vars = {});

// HyperQPTL satisfaction relative to time point i.  Trace quantifiers range
// over the model; propositional quantifiers enumerate {q}-trace candidates
// in bounded mode; quantifier-free bodies evaluate via the flattening.
bool eval_hqptl(const std::map<std::string, UPTrace>& trace_asg,
                const TraceSet& model, uint64_t i, const HQPTLFormula& f,
                const EvalOptions& opts = {});

// Bounded-horizon S1S evaluation over UP sets: first-order quantifiers run
// to a horizon that is exact for the order fragment (the order-abbreviation
// expansions are recognized and evaluated directly); second-order
// quantifiers enumerate UP sets within the universe bounds, which is a
// semi-decision used by the test oracles.
bool eval_s1s(const std::map<std::string, uint64_t>& first_order,
              const std::map<std::string, UPSet>& second_order, const SPtr& f,
              const EvalOptions& opts = {});

// All UP traces over `props` with prefix length <= max_prefix and period
// length <= max_period, canonicalized, deduplicated, deterministic order.
std::vector<UPTrace> enumerate_traces(const std::set<std::string>& props,
                                      int max_prefix, int max_period);
std::vector<UPSet> enumerate_upsets(int max_prefix, int max_period);

// Propositions appearing together with a given trace variable in Pred atoms.
std::set<std::string> props_used_with(const HPtr& f, const std::string& var);

}  // namespace hypertrace
