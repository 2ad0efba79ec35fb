#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hypertrace/formula.hpp"
#include "hypertrace/traces.hpp"

namespace hypertrace {

enum class CounterOp : uint8_t { Inc, Dec, IsZero };

const char* to_string(CounterOp op);

struct MinskyTransition {
  std::string from;
  int counter;  // 1 or 2
  CounterOp op;
  std::string to;
  bool operator==(const MinskyTransition&) const = default;
};

// Two-counter machine (Q, Δ, q̂).
struct MinskyMachine {
  std::vector<std::string> states;  // unique, declaration order
  std::string initial;
  std::vector<MinskyTransition> delta;

  void validate() const;  // throws ParseError on bad references or names
};

struct Configuration {
  std::string state;
  uint64_t c1 = 0, c2 = 0;
  bool operator==(const Configuration&) const = default;
  bool operator<(const Configuration& o) const {
    if (state != o.state) return state < o.state;
    if (c1 != o.c1) return c1 < o.c1;
    return c2 < o.c2;
  }
};

// All successors with the transition taken.  dec requires a positive
// counter; isZero requires and preserves zero; the other counter is kept.
std::vector<std::pair<MinskyTransition, Configuration>> step(
    const MinskyMachine& m, const Configuration& c);

// Eventually-cyclic computation witness.
struct Lasso {
  std::vector<Configuration> stem;   // from the initial configuration
  std::vector<Configuration> cycle;  // nonempty; wraps onto itself
};

// Bounded search for an infinite computation: configurations with counters
// up to counter_cap, at most step_cap configurations explored.  A nullopt
// result is inconclusive, not a proof of absence.
std::optional<Lasso> find_lasso(const MinskyMachine& m, uint64_t counter_cap,
                                uint64_t step_cap);

// Proposition names of the encoding alphabet.
struct MinskyProps {
  std::vector<std::string> config;      // states, mem1, mem2
  std::vector<std::string> transition;  // q_to/q_from per state, ops, to1/to2
  std::vector<std::string> guess;       // guess, guessed
  std::set<std::string> all() const;
};
MinskyProps encoding_props(const MinskyMachine& m);

enum class HelperKind {
  SingleTr,
  SameTr,
  ValidTr,
  SameState,
  GoodStates,
  StopMultipleGuess,
  Op,
};

// The helper formulas of the non-halting encoding, rendered structurally:
//   SingleTr(π, i); SameTr(π, i, j); ValidTr(π, i); SameState(π, i, j);
//   GoodStates(π, π', i); StopMultipleGuess(π_g, i, j);
//   Op(π, c, π', π_g, i, i+, i-)  with c passed as "1" or "2".
HPtr helper_formula(HelperKind kind, const MinskyMachine& m,
                    const std::vector<std::string>& args);

// φ_M: the time-prefixed formula whose models encode infinite computations.
HPtr encode(const MinskyMachine& m);

// One trace per lasso step: the configuration in unary counters plus the
// constant propositions of the taken transition; guess propositions stay
// false everywhere.
TraceSet witness_model(const MinskyMachine& m, const Lasso& l);

// Machine file format:
//   states: q0, q1; init: q0; delta: (q0, 1, isZero, q0), (q0, 2, inc, q1);
MinskyMachine parse_machine(const std::string& text);
std::string render_machine(const MinskyMachine& m);

}  // namespace hypertrace
