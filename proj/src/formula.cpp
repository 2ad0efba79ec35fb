#include "hypertrace/formula.hpp"

#include <algorithm>
#include <map>

namespace hypertrace {

namespace hf {

static HPtr mk(HKind k, std::string a = "", std::string b = "",
               std::string c = "", HPtr l = nullptr, HPtr r = nullptr) {
  return std::make_shared<const HyperFormula>(k, std::move(a), std::move(b),
                                              std::move(c), std::move(l),
                                              std::move(r));
}

HPtr exists_trace(std::string v, HPtr body) {
  return mk(HKind::ExistsTrace, std::move(v), "", "", std::move(body));
}
HPtr forall_trace(std::string v, HPtr body) {
  return mk(HKind::ForallTrace, std::move(v), "", "", std::move(body));
}
HPtr exists_ctrace(std::string v, HPtr body) {
  return mk(HKind::ExistsTraceC, std::move(v), "", "", std::move(body));
}
HPtr forall_ctrace(std::string v, HPtr body) {
  return mk(HKind::ForallTraceC, std::move(v), "", "", std::move(body));
}
HPtr exists_time(std::string v, HPtr body) {
  return mk(HKind::ExistsTime, std::move(v), "", "", std::move(body));
}
HPtr forall_time(std::string v, HPtr body) {
  return mk(HKind::ForallTime, std::move(v), "", "", std::move(body));
}
HPtr not_(HPtr x) { return mk(HKind::Not, "", "", "", std::move(x)); }
HPtr or_(HPtr x, HPtr y) {
  return mk(HKind::Or, "", "", "", std::move(x), std::move(y));
}
HPtr and_(HPtr x, HPtr y) {
  return mk(HKind::And, "", "", "", std::move(x), std::move(y));
}
HPtr implies(HPtr x, HPtr y) {
  return mk(HKind::Implies, "", "", "", std::move(x), std::move(y));
}
HPtr iff(HPtr x, HPtr y) {
  return mk(HKind::Iff, "", "", "", std::move(x), std::move(y));
}
HPtr less(std::string i, std::string j) {
  return mk(HKind::Less, std::move(i), std::move(j));
}
HPtr time_eq(std::string i, std::string j) {
  return mk(HKind::TimeEq, std::move(i), std::move(j));
}
HPtr pred(std::string prop, std::string tracevar, std::string timevar) {
  return mk(HKind::Pred, std::move(prop), std::move(tracevar),
            std::move(timevar));
}

HPtr taut() { return forall_time("u_taut", time_eq("u_taut", "u_taut")); }
HPtr contra() { return exists_time("u_contra", less("u_contra", "u_contra")); }

HPtr and_all(const std::vector<HPtr>& xs) {
  if (xs.empty()) return taut();
  HPtr acc = xs[0];
  for (size_t i = 1; i < xs.size(); ++i) acc = and_(acc, xs[i]);
  return acc;
}
HPtr or_all(const std::vector<HPtr>& xs) {
  if (xs.empty()) return contra();
  HPtr acc = xs[0];
  for (size_t i = 1; i < xs.size(); ++i) acc = or_(acc, xs[i]);
  return acc;
}

}  // namespace hf

bool equal(const HPtr& x, const HPtr& y) {
  if (x == y) return true;
  if (!x || !y) return false;
  if (x->kind != y->kind || x->a != y->a || x->b != y->b || x->c != y->c)
    return false;
  return equal(x->lhs, y->lhs) && equal(x->rhs, y->rhs);
}

FreeVars free_vars(const HPtr& f) {
  FreeVars out;
  // bound maps var -> sort is implicit: quantifier kind decides membership.
  std::set<std::string> bound_trace, bound_time;
  auto walk = [&](auto&& self, const HPtr& g) -> void {
    if (!g) return;
    switch (g->kind) {
      case HKind::ExistsTrace:
      case HKind::ForallTrace:
      case HKind::ExistsTraceC:
      case HKind::ForallTraceC: {
        bool fresh = bound_trace.insert(g->a).second;
        self(self, g->lhs);
        if (fresh) bound_trace.erase(g->a);
        return;
      }
      case HKind::ExistsTime:
      case HKind::ForallTime: {
        bool fresh = bound_time.insert(g->a).second;
        self(self, g->lhs);
        if (fresh) bound_time.erase(g->a);
        return;
      }
      case HKind::Less:
      case HKind::TimeEq:
        if (!bound_time.count(g->a)) out.time_vars.insert(g->a);
        if (!bound_time.count(g->b)) out.time_vars.insert(g->b);
        return;
      case HKind::Pred:
        if (!bound_trace.count(g->b)) out.trace_vars.insert(g->b);
        if (!bound_time.count(g->c)) out.time_vars.insert(g->c);
        return;
      default:
        self(self, g->lhs);
        self(self, g->rhs);
        return;
    }
  };
  walk(walk, f);
  return out;
}

std::set<std::string> used_props(const HPtr& f) {
  std::set<std::string> out;
  auto walk = [&](auto&& self, const HPtr& g) -> void {
    if (!g) return;
    if (g->kind == HKind::Pred) out.insert(g->a);
    self(self, g->lhs);
    self(self, g->rhs);
  };
  walk(walk, f);
  return out;
}

void validate(const HPtr& f, const std::set<std::string>* alphabet) {
  // Sorts are global per formula: one name may not act as both a trace and a
  // time variable anywhere in the tree.
  std::set<std::string> trace_names, time_names;
  auto note_trace = [&](const std::string& v) {
    if (time_names.count(v))
      throw SortError("variable '" + v + "' used in both sorts");
    trace_names.insert(v);
  };
  auto note_time = [&](const std::string& v) {
    if (trace_names.count(v))
      throw SortError("variable '" + v + "' used in both sorts");
    time_names.insert(v);
  };

  std::set<std::string> bound;  // along current path, any sort
  auto walk = [&](auto&& self, const HPtr& g) -> void {
    if (!g) throw SortError("null subformula");
    switch (g->kind) {
      case HKind::ExistsTrace:
      case HKind::ForallTrace:
      case HKind::ExistsTraceC:
      case HKind::ForallTraceC:
      case HKind::ExistsTime:
      case HKind::ForallTime: {
        bool trace = is_trace_quantifier(g->kind);
        if (trace)
          note_trace(g->a);
        else
          note_time(g->a);
        if (!bound.insert(g->a).second)
          throw SortError("variable '" + g->a + "' bound twice on a path");
        self(self, g->lhs);
        bound.erase(g->a);
        return;
      }
      case HKind::Less:
      case HKind::TimeEq:
        note_time(g->a);
        note_time(g->b);
        return;
      case HKind::Pred:
        note_trace(g->b);
        note_time(g->c);
        if (alphabet && !alphabet->count(g->a))
          throw SortError("unknown proposition '" + g->a + "'");
        return;
      case HKind::Not:
        self(self, g->lhs);
        return;
      default:
        self(self, g->lhs);
        self(self, g->rhs);
        return;
    }
  };
  walk(walk, f);
}

// --------------------------------------------------------------------- S1S

namespace sf {

static SPtr mk(SKind k, std::string a = "", std::string b = "",
               SPtr l = nullptr, SPtr r = nullptr) {
  return std::make_shared<const S1SFormula>(k, std::move(a), std::move(b),
                                            std::move(l), std::move(r));
}

SPtr exists2(std::string v, SPtr body) {
  return mk(SKind::Exists2, std::move(v), "", std::move(body));
}
SPtr forall2(std::string v, SPtr body) {
  return mk(SKind::Forall2, std::move(v), "", std::move(body));
}
SPtr exists1(std::string v, SPtr body) {
  return mk(SKind::Exists1, std::move(v), "", std::move(body));
}
SPtr forall1(std::string v, SPtr body) {
  return mk(SKind::Forall1, std::move(v), "", std::move(body));
}
SPtr not_(SPtr x) { return mk(SKind::Not, "", "", std::move(x)); }
SPtr or_(SPtr x, SPtr y) {
  return mk(SKind::Or, "", "", std::move(x), std::move(y));
}
SPtr and_(SPtr x, SPtr y) {
  return mk(SKind::And, "", "", std::move(x), std::move(y));
}
SPtr eq(std::string i, std::string j) {
  return mk(SKind::Eq, std::move(i), std::move(j));
}
SPtr succ(std::string i, std::string j) {
  return mk(SKind::Succ, std::move(i), std::move(j));
}
SPtr member(std::string so, std::string fo) {
  return mk(SKind::Member, std::move(so), std::move(fo));
}
SPtr and_all(const std::vector<SPtr>& xs) {
  if (xs.empty()) return forall1("u_taut", eq("u_taut", "u_taut"));
  SPtr acc = xs[0];
  for (size_t i = 1; i < xs.size(); ++i) acc = and_(acc, xs[i]);
  return acc;
}
SPtr or_all(const std::vector<SPtr>& xs) {
  if (xs.empty()) return exists1("u_con", succ("u_con", "u_con"));
  SPtr acc = xs[0];
  for (size_t i = 1; i < xs.size(); ++i) acc = or_(acc, xs[i]);
  return acc;
}

}  // namespace sf

bool equal(const SPtr& x, const SPtr& y) {
  if (x == y) return true;
  if (!x || !y) return false;
  if (x->kind != y->kind || x->a != y->a || x->b != y->b) return false;
  return equal(x->lhs, y->lhs) && equal(x->rhs, y->rhs);
}

S1SVars s1s_free_vars(const SPtr& f) {
  S1SVars out;
  std::set<std::string> all_fo, all_so;
  auto note_fo = [&](const std::string& v) {
    if (all_so.count(v)) throw SortError("S1S variable '" + v + "' sort clash");
    all_fo.insert(v);
  };
  auto note_so = [&](const std::string& v) {
    if (all_fo.count(v)) throw SortError("S1S variable '" + v + "' sort clash");
    all_so.insert(v);
  };
  std::set<std::string> bound;
  auto walk = [&](auto&& self, const SPtr& g) -> void {
    if (!g) throw SortError("null S1S subformula");
    switch (g->kind) {
      case SKind::Exists2:
      case SKind::Forall2:
      case SKind::Exists1:
      case SKind::Forall1: {
        bool so = g->kind == SKind::Exists2 || g->kind == SKind::Forall2;
        if (so)
          note_so(g->a);
        else
          note_fo(g->a);
        bool fresh = bound.insert(g->a).second;
        self(self, g->lhs);
        if (fresh) bound.erase(g->a);
        return;
      }
      case SKind::Eq:
      case SKind::Succ:
        note_fo(g->a);
        note_fo(g->b);
        if (!bound.count(g->a)) out.first_order.insert(g->a);
        if (!bound.count(g->b)) out.first_order.insert(g->b);
        return;
      case SKind::Member:
        note_so(g->a);
        note_fo(g->b);
        if (!bound.count(g->a)) out.second_order.insert(g->a);
        if (!bound.count(g->b)) out.first_order.insert(g->b);
        return;
      case SKind::Not:
        self(self, g->lhs);
        return;
      default:
        self(self, g->lhs);
        self(self, g->rhs);
        return;
    }
  };
  walk(walk, f);
  return out;
}

// order-abbreviation expansions.  Shapes are fixed; recognize() below matches
// them back up to variable names.
namespace s1s_abbrev {

static std::string fresh(int& c, const char* base) {
  return std::string(base) + "_ab" + std::to_string(c++);
}

SPtr succ_closed(const std::string& so, int& c) {
  std::string u = fresh(c, "i"), v = fresh(c, "i");
  // ∀u ∀v (¬(Z(u) ∧ Succ(u,v)) ∨ Z(v))
  return sf::forall1(
      u, sf::forall1(
             v, sf::or_(sf::not_(sf::and_(sf::member(so, u), sf::succ(u, v))),
                        sf::member(so, v))));
}

SPtr subset(const std::string& x, const std::string& y, int& c) {
  std::string u = fresh(c, "i");
  return sf::forall1(
      u, sf::or_(sf::not_(sf::member(x, u)), sf::member(y, u)));
}

SPtr leq(const std::string& x, const std::string& y, int& c) {
  std::string z = fresh(c, "Z");
  // ∀Z (¬(Z(x) ∧ SuccClosed(Z)) ∨ Z(y))
  return sf::forall2(
      z, sf::or_(sf::not_(sf::and_(sf::member(z, x), succ_closed(z, c))),
                 sf::member(z, y)));
}

SPtr less(const std::string& x, const std::string& y, int& c) {
  return sf::and_(leq(x, y, c), sf::not_(sf::eq(x, y)));
}

SPtr eq_zero(const std::string& i, int& c) {
  std::string j = fresh(c, "i");
  return sf::forall1(j, sf::or_(sf::eq(i, j), less(i, j, c)));
}

static bool match_succ_closed(const SPtr& f, std::string& so) {
  if (!f || f->kind != SKind::Forall1) return false;
  const std::string& u = f->a;
  const SPtr& g = f->lhs;
  if (!g || g->kind != SKind::Forall1) return false;
  const std::string& v = g->a;
  const SPtr& o = g->lhs;
  if (!o || o->kind != SKind::Or) return false;
  const SPtr& l = o->lhs;
  const SPtr& r = o->rhs;
  if (!l || l->kind != SKind::Not || !l->lhs || l->lhs->kind != SKind::And)
    return false;
  const SPtr& m1 = l->lhs->lhs;
  const SPtr& sc = l->lhs->rhs;
  if (!m1 || m1->kind != SKind::Member || m1->b != u) return false;
  if (!sc || sc->kind != SKind::Succ || sc->a != u || sc->b != v) return false;
  if (!r || r->kind != SKind::Member || r->a != m1->a || r->b != v)
    return false;
  so = m1->a;
  return true;
}

static bool match_leq(const SPtr& f, std::string& x, std::string& y) {
  if (!f || f->kind != SKind::Forall2) return false;
  const std::string& z = f->a;
  const SPtr& o = f->lhs;
  if (!o || o->kind != SKind::Or) return false;
  const SPtr& l = o->lhs;
  const SPtr& r = o->rhs;
  if (!l || l->kind != SKind::Not || !l->lhs || l->lhs->kind != SKind::And)
    return false;
  const SPtr& zx = l->lhs->lhs;
  std::string sc_var;
  if (!zx || zx->kind != SKind::Member || zx->a != z) return false;
  if (!match_succ_closed(l->lhs->rhs, sc_var) || sc_var != z) return false;
  if (!r || r->kind != SKind::Member || r->a != z) return false;
  x = zx->b;
  y = r->b;
  return true;
}

static bool match_less(const SPtr& f, std::string& x, std::string& y) {
  if (!f || f->kind != SKind::And) return false;
  std::string lx, ly;
  if (!match_leq(f->lhs, lx, ly)) return false;
  const SPtr& n = f->rhs;
  if (!n || n->kind != SKind::Not || !n->lhs || n->lhs->kind != SKind::Eq)
    return false;
  if (n->lhs->a != lx || n->lhs->b != ly) return false;
  x = lx;
  y = ly;
  return true;
}

static bool match_eq_zero(const SPtr& f, std::string& i) {
  if (!f || f->kind != SKind::Forall1) return false;
  const std::string& j = f->a;
  const SPtr& o = f->lhs;
  if (!o || o->kind != SKind::Or) return false;
  if (!o->lhs || o->lhs->kind != SKind::Eq || o->lhs->b != j) return false;
  std::string x, y;
  if (!match_less(o->rhs, x, y)) return false;
  if (x != o->lhs->a || y != j) return false;
  i = x;
  return true;
}

static bool match_subset(const SPtr& f, std::string& x, std::string& y) {
  if (!f || f->kind != SKind::Forall1) return false;
  const std::string& u = f->a;
  const SPtr& o = f->lhs;
  if (!o || o->kind != SKind::Or) return false;
  const SPtr& l = o->lhs;
  const SPtr& r = o->rhs;
  if (!l || l->kind != SKind::Not || !l->lhs || l->lhs->kind != SKind::Member)
    return false;
  if (l->lhs->b != u) return false;
  if (!r || r->kind != SKind::Member || r->b != u) return false;
  x = l->lhs->a;
  y = r->a;
  return true;
}

bool recognize(const SPtr& f, Recognized& out) {
  std::string x, y;
  if (match_less(f, x, y)) {
    out = {AbbrevKind::Less, x, y};
    return true;
  }
  if (match_leq(f, x, y)) {
    out = {AbbrevKind::Leq, x, y};
    return true;
  }
  if (match_eq_zero(f, x)) {
    out = {AbbrevKind::EqZero, x, ""};
    return true;
  }
  if (match_succ_closed(f, x)) {
    out = {AbbrevKind::SuccClosed, x, ""};
    return true;
  }
  if (match_subset(f, x, y)) {
    out = {AbbrevKind::Subset, x, y};
    return true;
  }
  return false;
}

}  // namespace s1s_abbrev

// --------------------------------------------------------------------- LTL

namespace lf {

static LPtr mk(LKind k, std::string p = "", std::string t = "",
               LPtr l = nullptr, LPtr r = nullptr) {
  return std::make_shared<const LTLFormula>(k, std::move(p), std::move(t),
                                            std::move(l), std::move(r));
}

LPtr true_() { return mk(LKind::True); }
LPtr prop(std::string name) { return mk(LKind::Prop, std::move(name)); }
LPtr iprop(std::string name, std::string tracev) {
  return mk(LKind::Prop, std::move(name), std::move(tracev));
}
LPtr not_(LPtr x) { return mk(LKind::Not, "", "", std::move(x)); }
LPtr or_(LPtr x, LPtr y) {
  return mk(LKind::Or, "", "", std::move(x), std::move(y));
}
LPtr next(LPtr x) { return mk(LKind::Next, "", "", std::move(x)); }
LPtr until(LPtr x, LPtr y) {
  return mk(LKind::Until, "", "", std::move(x), std::move(y));
}
LPtr and_(LPtr x, LPtr y) {
  return not_(or_(not_(std::move(x)), not_(std::move(y))));
}
LPtr implies(LPtr x, LPtr y) { return or_(not_(std::move(x)), std::move(y)); }
LPtr iff(LPtr x, LPtr y) {
  LPtr fwd = implies(x, y);
  LPtr bwd = implies(std::move(y), std::move(x));
  return and_(std::move(fwd), std::move(bwd));
}
LPtr finally_(LPtr x) { return until(true_(), std::move(x)); }
LPtr globally(LPtr x) { return not_(finally_(not_(std::move(x)))); }

}  // namespace lf

bool equal(const LPtr& x, const LPtr& y) {
  if (x == y) return true;
  if (!x || !y) return false;
  if (x->kind != y->kind || x->prop != y->prop || x->tvar != y->tvar)
    return false;
  return equal(x->lhs, y->lhs) && equal(x->rhs, y->rhs);
}

bool equal(const HQPTLFormula& x, const HQPTLFormula& y) {
  return x.prefix == y.prefix && equal(x.body, y.body);
}

std::set<std::string> ltl_props(const LPtr& f) {
  std::set<std::string> out;
  auto walk = [&](auto&& self, const LPtr& g) -> void {
    if (!g) return;
    if (g->kind == LKind::Prop) out.insert(g->prop);
    self(self, g->lhs);
    self(self, g->rhs);
  };
  walk(walk, f);
  return out;
}

}  // namespace hypertrace
