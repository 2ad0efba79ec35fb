#pragma once

#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace hypertrace {

// Error kinds thrown across the library. The CLI maps them onto exit codes.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SortError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Hypertrace formulas
//
// Two-sorted first-order logic: time variables range over the naturals with
// < and =, trace variables range over infinite traces.  Trace quantifiers
// come in two kinds: unconstrained (all traces) and constrained (the model's
// trace set).  A constrained quantifier node is first-class sugar: it stands
// for the T-guarded unconstrained form, see `kConstrainedQuantIsGuardSugar`.
// And/Implies/Iff/Forall are kept as nodes; to_nnf eliminates them.

enum class HKind : uint8_t {
  ExistsTrace,   // unconstrained
  ForallTrace,   // unconstrained
  ExistsTraceC,  // constrained
  ForallTraceC,  // constrained
  ExistsTime,
  ForallTime,
  Not,
  Or,
  And,
  Implies,
  Iff,
  Less,    // time < time
  TimeEq,  // time = time
  Pred,    // prop(tracevar, timevar)
};

struct HyperFormula;
using HPtr = std::shared_ptr<const HyperFormula>;

// Records that ∃̂π φ abbreviates ∃π (T(π) ∧ φ) and dually for the universal.
inline constexpr bool kConstrainedQuantIsGuardSugar = true;

struct HyperFormula {
  HKind kind;
  // Quantifiers: a = bound variable.
  // Less/TimeEq: a, b = time variables.
  // Pred: a = proposition, b = trace variable, c = time variable.
  std::string a, b, c;
  HPtr lhs, rhs;  // Not uses lhs only.

  HyperFormula(HKind k, std::string a_, std::string b_, std::string c_,
               HPtr l, HPtr r)
      : kind(k), a(std::move(a_)), b(std::move(b_)), c(std::move(c_)),
        lhs(std::move(l)), rhs(std::move(r)) {}
};

bool equal(const HPtr& x, const HPtr& y);

namespace hf {
HPtr exists_trace(std::string v, HPtr body);
HPtr forall_trace(std::string v, HPtr body);
HPtr exists_ctrace(std::string v, HPtr body);
HPtr forall_ctrace(std::string v, HPtr body);
HPtr exists_time(std::string v, HPtr body);
HPtr forall_time(std::string v, HPtr body);
HPtr not_(HPtr x);
HPtr or_(HPtr x, HPtr y);
HPtr and_(HPtr x, HPtr y);
HPtr implies(HPtr x, HPtr y);
HPtr iff(HPtr x, HPtr y);
HPtr less(std::string i, std::string j);
HPtr time_eq(std::string i, std::string j);
HPtr pred(std::string prop, std::string tracevar, std::string timevar);

// Closed stand-ins for the missing boolean constants: ∀u (u = u) and
// ∃u (u < u).  Used where an empty conjunction or disjunction arises.
HPtr taut();
HPtr contra();

// Conjunction/disjunction of a list; empty list folds to taut()/contra().
HPtr and_all(const std::vector<HPtr>& xs);
HPtr or_all(const std::vector<HPtr>& xs);
}  // namespace hf

inline bool is_quantifier(HKind k) {
  return k == HKind::ExistsTrace || k == HKind::ForallTrace ||
         k == HKind::ExistsTraceC || k == HKind::ForallTraceC ||
         k == HKind::ExistsTime || k == HKind::ForallTime;
}
inline bool is_trace_quantifier(HKind k) {
  return k == HKind::ExistsTrace || k == HKind::ForallTrace ||
         k == HKind::ExistsTraceC || k == HKind::ForallTraceC;
}
inline bool is_constrained_quantifier(HKind k) {
  return k == HKind::ExistsTraceC || k == HKind::ForallTraceC;
}
inline bool is_existential(HKind k) {
  return k == HKind::ExistsTrace || k == HKind::ExistsTraceC ||
         k == HKind::ExistsTime;
}
inline bool is_atom(HKind k) {
  return k == HKind::Less || k == HKind::TimeEq || k == HKind::Pred;
}

// Free variables, split by sort.
struct FreeVars {
  std::set<std::string> trace_vars;
  std::set<std::string> time_vars;
};
FreeVars free_vars(const HPtr& f);

// All propositions occurring in Pred atoms.
std::set<std::string> used_props(const HPtr& f);

// Well-formedness: single binding per root-to-leaf path, disjoint trace/time
// name spaces, atoms over bound-or-free variables of the right sort, and
// (when an alphabet is given) Pred propositions drawn from it.
// Throws SortError on violation.
void validate(const HPtr& f, const std::set<std::string>* alphabet = nullptr);

// ---------------------------------------------------------------------------
// S1S formulas (second-order monadic logic of one successor)

enum class SKind : uint8_t {
  Exists2,
  Forall2,
  Exists1,
  Forall1,
  Not,
  Or,
  And,
  Eq,      // first-order = first-order
  Succ,    // Succ(fo, fo)
  Member,  // so(fo)
};

struct S1SFormula;
using SPtr = std::shared_ptr<const S1SFormula>;

struct S1SFormula {
  SKind kind;
  std::string a, b;  // quantifier var; Member: a = SO var, b = FO var
  SPtr lhs, rhs;

  S1SFormula(SKind k, std::string a_, std::string b_, SPtr l, SPtr r)
      : kind(k), a(std::move(a_)), b(std::move(b_)), lhs(std::move(l)),
        rhs(std::move(r)) {}
};

bool equal(const SPtr& x, const SPtr& y);

namespace sf {
SPtr exists2(std::string v, SPtr body);
SPtr forall2(std::string v, SPtr body);
SPtr exists1(std::string v, SPtr body);
SPtr forall1(std::string v, SPtr body);
SPtr not_(SPtr x);
SPtr or_(SPtr x, SPtr y);
SPtr and_(SPtr x, SPtr y);
SPtr eq(std::string i, std::string j);
SPtr succ(std::string i, std::string j);
SPtr member(std::string so, std::string fo);
SPtr and_all(const std::vector<SPtr>& xs);  // empty -> ∀u (u = u)
SPtr or_all(const std::vector<SPtr>& xs);   // empty -> ∃u Succ(u, u)
}  // namespace sf

// Variable sorts of an S1S formula, inferred from binders and atom positions.
struct S1SVars {
  std::set<std::string> first_order;   // free FO vars
  std::set<std::string> second_order;  // free SO vars
};
S1SVars s1s_free_vars(const SPtr& f);  // throws SortError on clashes

inline bool is_s1s_quantifier(SKind k) {
  return k == SKind::Exists2 || k == SKind::Forall2 || k == SKind::Exists1 ||
         k == SKind::Forall1;
}

// Order abbreviations.  The parser and the hyper->S1S translation expand
// them into plain grammar primitives through these builders; the automata
// backend and the bounded evaluator recognize the expansions structurally.
namespace s1s_abbrev {
SPtr succ_closed(const std::string& so, int& fresh_counter);
SPtr subset(const std::string& x, const std::string& y, int& fresh_counter);
SPtr leq(const std::string& x, const std::string& y, int& fresh_counter);
SPtr less(const std::string& x, const std::string& y, int& fresh_counter);
SPtr eq_zero(const std::string& i, int& fresh_counter);

enum class AbbrevKind { SuccClosed, Subset, Leq, Less, EqZero };
struct Recognized {
  AbbrevKind kind;
  std::string x, y;  // EqZero/SuccClosed use x only
};
// Structural match against the expansions above, any variable names.
bool recognize(const SPtr& f, Recognized& out);
}  // namespace s1s_abbrev

// ---------------------------------------------------------------------------
// LTL and HyperQPTL

enum class LKind : uint8_t { True, Prop, Not, Or, Next, Until };

struct LTLFormula;
using LPtr = std::shared_ptr<const LTLFormula>;

struct LTLFormula {
  LKind kind;
  std::string prop;
  std::string tvar;  // empty: plain atom; nonempty: indexed atom prop_tvar
  LPtr lhs, rhs;

  LTLFormula(LKind k, std::string p, std::string t, LPtr l, LPtr r)
      : kind(k), prop(std::move(p)), tvar(std::move(t)), lhs(std::move(l)),
        rhs(std::move(r)) {}
};

bool equal(const LPtr& x, const LPtr& y);

namespace lf {
LPtr true_();
LPtr prop(std::string name);                       // a
LPtr iprop(std::string name, std::string tracev);  // a_π
LPtr not_(LPtr x);
LPtr or_(LPtr x, LPtr y);
LPtr next(LPtr x);
LPtr until(LPtr x, LPtr y);
// Sugar, eliminated on construction.
LPtr and_(LPtr x, LPtr y);
LPtr implies(LPtr x, LPtr y);
LPtr iff(LPtr x, LPtr y);
LPtr finally_(LPtr x);
LPtr globally(LPtr x);
}  // namespace lf

struct HQuant {
  bool is_exists;
  bool is_trace;  // else propositional
  std::string var;
  bool operator==(const HQuant&) const = default;
};

struct HQPTLFormula {
  std::vector<HQuant> prefix;
  LPtr body;  // quantifier-free
};

bool equal(const HQPTLFormula& x, const HQPTLFormula& y);

// Propositions appearing in an LTL/HQPTL body.
std::set<std::string> ltl_props(const LPtr& f);

// ---------------------------------------------------------------------------
// Quantifier prefixes

enum class QSort : uint8_t { Time, TraceU, TraceC };

struct QuantEntry {
  QSort sort;
  bool is_exists;
  std::string var;
  bool operator==(const QuantEntry&) const = default;
};

using QuantifierPrefix = std::vector<QuantEntry>;

}  // namespace hypertrace
