#include "hypertrace/transforms.hpp"

#include <algorithm>

#include "hypertrace/syntax.hpp"

namespace hypertrace {

namespace {

void collect_names(const HPtr& f, std::set<std::string>& out) {
  if (!f) return;
  if (is_quantifier(f->kind)) {
    out.insert(f->a);
    collect_names(f->lhs, out);
    return;
  }
  switch (f->kind) {
    case HKind::Less:
    case HKind::TimeEq:
      out.insert(f->a);
      out.insert(f->b);
      return;
    case HKind::Pred:
      out.insert(f->b);
      out.insert(f->c);
      return;
    default:
      collect_names(f->lhs, out);
      collect_names(f->rhs, out);
  }
}

// Renames variable occurrences of either sort in a quantifier-free matrix.
HPtr rename_matrix_vars(const HPtr& f,
                        const std::map<std::string, std::string>& ren) {
  if (ren.empty()) return f;
  auto r = [&](const std::string& n) {
    auto it = ren.find(n);
    return it == ren.end() ? n : it->second;
  };
  switch (f->kind) {
    case HKind::Less:
      return hf::less(r(f->a), r(f->b));
    case HKind::TimeEq:
      return hf::time_eq(r(f->a), r(f->b));
    case HKind::Pred:
      return hf::pred(f->a, r(f->b), r(f->c));
    case HKind::Not:
      return hf::not_(rename_matrix_vars(f->lhs, ren));
    default: {
      if (is_quantifier(f->kind))
        throw ShapeError("matrix rename applied to a quantified formula");
      HPtr l = rename_matrix_vars(f->lhs, ren);
      HPtr rr = rename_matrix_vars(f->rhs, ren);
      return std::make_shared<const HyperFormula>(f->kind, "", "", "", l, rr);
    }
  }
}

bool contains_constrained(const HPtr& f) {
  if (!f) return false;
  if (is_constrained_quantifier(f->kind)) return true;
  return contains_constrained(f->lhs) || contains_constrained(f->rhs);
}

}  // namespace

// ----------------------------------------------------------------- flatten

namespace {

struct Flattener {
  std::vector<std::string> props;  // alphabet order fixes quantifier order
  std::set<std::string> used;
  std::map<std::pair<std::string, std::string>, std::string> var_map;

  std::string var_for(const std::string& pi, const std::string& x) {
    auto key = std::make_pair(pi, x);
    auto it = var_map.find(key);
    if (it != var_map.end()) return it->second;
    std::string name = pi + "_" + x;
    while (used.count(name)) name += "'";
    used.insert(name);
    var_map.emplace(key, name);
    return name;
  }

  HPtr walk(const HPtr& f, std::set<std::string> vc) {
    switch (f->kind) {
      case HKind::ExistsTrace:
      case HKind::ForallTrace: {
        bool ex = f->kind == HKind::ExistsTrace;
        vc.insert(f->a);
        HPtr body = walk(f->lhs, vc);
        for (auto it = props.rbegin(); it != props.rend(); ++it) {
          std::string v = var_for(f->a, *it);
          body = ex ? hf::exists_trace(v, body) : hf::forall_trace(v, body);
        }
        return body;
      }
      case HKind::ExistsTraceC:
        return hf::exists_ctrace(f->a, walk(f->lhs, vc));
      case HKind::ForallTraceC:
        return hf::forall_ctrace(f->a, walk(f->lhs, vc));
      case HKind::ExistsTime:
        return hf::exists_time(f->a, walk(f->lhs, vc));
      case HKind::ForallTime:
        return hf::forall_time(f->a, walk(f->lhs, vc));
      case HKind::Not:
        return hf::not_(walk(f->lhs, vc));
      case HKind::Pred:
        if (vc.count(f->b)) return hf::pred(f->a, var_for(f->b, f->a), f->c);
        return f;
      case HKind::Less:
      case HKind::TimeEq:
        return f;
      default: {
        HPtr l = walk(f->lhs, vc);
        HPtr r = walk(f->rhs, vc);
        return std::make_shared<const HyperFormula>(f->kind, "", "", "", l, r);
      }
    }
  }
};

}  // namespace

FlattenResult flatten_with_map(const HPtr& f, const std::set<std::string>& props,
                               const std::set<std::string>& vc) {
  FreeVars fv = free_vars(f);
  for (const auto& v : vc)
    if (!fv.trace_vars.count(v))
      throw ShapeError("flatten: '" + v + "' is not a free trace variable");
  Flattener fl;
  fl.props.assign(props.begin(), props.end());
  collect_names(f, fl.used);
  FlattenResult out;
  out.formula = fl.walk(f, vc);
  out.var_map = std::move(fl.var_map);
  return out;
}

HPtr flatten(const HPtr& f, const std::set<std::string>& props,
             const std::set<std::string>& vc) {
  return flatten_with_map(f, props, vc).formula;
}

// ------------------------------------------------- constrained prefix split

ConstrainedSplit split_constrained_prefix(const HPtr& prenex) {
  QuantifierPrefix prefix = quantifier_prefix(prenex);  // throws if not prenex
  ConstrainedSplit out;
  out.matrix = prenex_matrix(prenex);
  size_t i = 0;
  while (i < prefix.size() && prefix[i].is_exists &&
         prefix[i].sort != QSort::TraceC)
    out.leading_exists.push_back(prefix[i++]);
  while (i < prefix.size() && prefix[i].sort == QSort::TraceC &&
         prefix[i].is_exists)
    out.exists_hats.push_back(prefix[i++].var);
  while (i < prefix.size() && prefix[i].sort == QSort::TraceC &&
         !prefix[i].is_exists)
    out.forall_hats.push_back(prefix[i++].var);
  for (; i < prefix.size(); ++i) {
    if (prefix[i].sort == QSort::TraceC)
      throw ShapeError("constrained quantifier '" + prefix[i].var +
                       "' appears after the constrained block");
    out.trailing.push_back(prefix[i]);
  }
  return out;
}

// ------------------------------------------------------------ removeForAll

HPtr remove_forall(const HPtr& f) {
  ConstrainedSplit sp = split_constrained_prefix(f);
  size_t n = sp.exists_hats.size(), m = sp.forall_hats.size();
  if (m == 0) return f;
  if (n == 0)
    throw ShapeError("remove_forall needs a constrained existential to "
                     "instantiate the universal block");

  std::set<std::string> used;
  collect_names(f, used);

  std::vector<HPtr> conjuncts;
  std::vector<size_t> choice(m, 0);
  int copy_index = 0;
  while (true) {
    std::map<std::string, std::string> sub;
    for (size_t k = 0; k < m; ++k)
      sub[sp.forall_hats[k]] = sp.exists_hats[choice[k]];
    // The trailing quantifiers get fresh names in each conjunct to keep
    // bindings unique across the conjunction.
    QuantifierPrefix trail = sp.trailing;
    std::map<std::string, std::string> rename;
    ++copy_index;
    for (auto& e : trail) {
      std::string nv = e.var + "_" + std::to_string(copy_index);
      while (used.count(nv)) nv += "'";
      used.insert(nv);
      rename[e.var] = nv;
      e.var = nv;
    }
    for (const auto& [fh, eh] : sub) rename[fh] = eh;
    HPtr body = rename_matrix_vars(sp.matrix, rename);
    conjuncts.push_back(attach_prefix(trail, body));
    size_t k = 0;
    while (k < m && ++choice[k] == n) choice[k++] = 0;
    if (k == m) break;
  }

  HPtr out = hf::and_all(conjuncts);
  for (auto it = sp.exists_hats.rbegin(); it != sp.exists_hats.rend(); ++it)
    out = hf::exists_ctrace(*it, out);
  return attach_prefix(sp.leading_exists, out);
}

// ----------------------------------------------------------- removeExists

HPtr remove_exists_hats(const HPtr& f) {
  // Leading existential time/unconstrained block, then the ∃̂ block, then
  // anything free of constrained quantifiers.
  std::vector<const HyperFormula*> spine;
  HPtr g = f;
  while (g && is_quantifier(g->kind) && !is_constrained_quantifier(g->kind) &&
         is_existential(g->kind)) {
    spine.push_back(g.get());
    g = g->lhs;
  }
  std::vector<std::string> hats;
  while (g && g->kind == HKind::ExistsTraceC) {
    hats.push_back(g->a);
    g = g->lhs;
  }
  if (contains_constrained(g))
    throw ShapeError(
        "constrained quantifier remains after the existential block");

  HPtr out = g;
  for (auto it = hats.rbegin(); it != hats.rend(); ++it)
    out = hf::exists_trace(*it, out);
  for (auto it = spine.rbegin(); it != spine.rend(); ++it)
    out = std::make_shared<const HyperFormula>((*it)->kind, (*it)->a, "", "",
                                               out, nullptr);
  return out;
}

HPtr to_unconstrained(const HPtr& f) {
  return remove_exists_hats(remove_forall(f));
}

// ------------------------------------------------------ relax existentials

HPtr relax_existentials(const HPtr& f) {
  QuantifierPrefix prefix = quantifier_prefix(f);  // throws if not prenex
  for (auto& e : prefix)
    if (e.sort == QSort::TraceC && e.is_exists) e.sort = QSort::TraceU;
  return attach_prefix(prefix, prenex_matrix(f));
}

// ------------------------------------------------------------------ toS1S

namespace {

struct S1STranslator {
  int fresh = 0;

  SPtr walk(const HPtr& f) {
    switch (f->kind) {
      case HKind::ExistsTrace:
        return sf::exists2(f->a, walk(f->lhs));
      case HKind::ForallTrace:
        return sf::forall2(f->a, walk(f->lhs));
      case HKind::ExistsTime:
        return sf::exists1(f->a, walk(f->lhs));
      case HKind::ForallTime:
        return sf::forall1(f->a, walk(f->lhs));
      case HKind::ExistsTraceC:
      case HKind::ForallTraceC:
        throw ShapeError("constrained quantifier has no S1S counterpart");
      case HKind::Not:
        return sf::not_(walk(f->lhs));
      case HKind::Or:
        return sf::or_(walk(f->lhs), walk(f->rhs));
      case HKind::And:
        return sf::and_(walk(f->lhs), walk(f->rhs));
      case HKind::Implies:
        return sf::or_(sf::not_(walk(f->lhs)), walk(f->rhs));
      case HKind::Iff: {
        SPtr l = walk(f->lhs), r = walk(f->rhs);
        return sf::and_(sf::or_(sf::not_(l), r), sf::or_(sf::not_(r), l));
      }
      case HKind::Less:
        return s1s_abbrev::less(f->a, f->b, fresh);
      case HKind::TimeEq:
        return sf::eq(f->a, f->b);
      case HKind::Pred:
        // After flatten every predicate reads one proposition of one split
        // variable, which becomes the second-order track.
        return sf::member(f->b, f->c);
    }
    throw ShapeError("unreachable");
  }
};

}  // namespace

ToS1SResult to_s1s(const HPtr& f, const std::set<std::string>& props) {
  if (contains_constrained(f))
    throw ShapeError("to_s1s requires an unconstrained formula");
  FreeVars fv = free_vars(f);
  FlattenResult fl = flatten_with_map(f, props, fv.trace_vars);
  S1STranslator tr;
  ToS1SResult out;
  out.formula = tr.walk(fl.formula);
  out.var_map = std::move(fl.var_map);
  return out;
}

// ----------------------------------------------------------------- toHyper

namespace {

struct HyperTranslator {
  std::map<std::string, std::string> var_map;
  std::set<std::string> props;
  std::set<std::string> used;
  int fresh = 0;

  std::string trace_var(const std::string& so) {
    auto it = var_map.find(so);
    if (it != var_map.end()) return it->second;
    std::string name = "pi_" + so;
    while (used.count(name)) name += "'";
    used.insert(name);
    var_map.emplace(so, name);
    return name;
  }

  std::string fresh_time() {
    std::string name;
    do {
      name = "k_" + std::to_string(fresh++);
    } while (used.count(name));
    used.insert(name);
    return name;
  }

  HPtr walk(const SPtr& f) {
    switch (f->kind) {
      case SKind::Exists2:
        return hf::exists_trace(trace_var(f->a), walk(f->lhs));
      case SKind::Forall2:
        return hf::forall_trace(trace_var(f->a), walk(f->lhs));
      case SKind::Exists1:
        return hf::exists_time(f->a, walk(f->lhs));
      case SKind::Forall1:
        return hf::forall_time(f->a, walk(f->lhs));
      case SKind::Not:
        return hf::not_(walk(f->lhs));
      case SKind::Or:
        return hf::or_(walk(f->lhs), walk(f->rhs));
      case SKind::And:
        return hf::and_(walk(f->lhs), walk(f->rhs));
      case SKind::Eq:
        return hf::time_eq(f->a, f->b);
      case SKind::Succ: {
        // i < i' ∧ ∀k (i < k → i' <= k), with <= rendered as (= | <).
        std::string k = fresh_time();
        return hf::and_(
            hf::less(f->a, f->b),
            hf::forall_time(
                k, hf::implies(hf::less(f->a, k),
                               hf::or_(hf::time_eq(f->b, k),
                                       hf::less(f->b, k)))));
      }
      case SKind::Member: {
        props.insert(f->a);
        return hf::pred(f->a, trace_var(f->a), f->b);
      }
    }
    throw ShapeError("unreachable");
  }
};

}  // namespace

ToHyperResult to_hyper(const SPtr& f) {
  HyperTranslator tr;
  auto walk = [&](auto&& self, const SPtr& g) -> void {
    if (!g) return;
    if (!g->a.empty()) tr.used.insert(g->a);
    if (!g->b.empty()) tr.used.insert(g->b);
    self(self, g->lhs);
    self(self, g->rhs);
  };
  walk(walk, f);
  ToHyperResult out;
  out.formula = tr.walk(f);
  out.var_map = std::move(tr.var_map);
  out.props = std::move(tr.props);
  return out;
}

// --------------------------------------------------------------- LTLtoFO

HPtr ltl_to_fo(const LPtr& f, const std::string& tracevar,
               const std::string& anchor, int& fresh_counter) {
  auto fresh = [&](const char* base) {
    return std::string(base) + std::to_string(fresh_counter++);
  };
  auto leq = [](const std::string& a, const std::string& b) {
    return hf::or_(hf::time_eq(a, b), hf::less(a, b));
  };
  switch (f->kind) {
    case LKind::True:
      return hf::time_eq(anchor, anchor);
    case LKind::Prop:
      return hf::pred(f->prop, f->tvar.empty() ? tracevar : f->tvar, anchor);
    case LKind::Not:
      return hf::not_(ltl_to_fo(f->lhs, tracevar, anchor, fresh_counter));
    case LKind::Or:
      return hf::or_(ltl_to_fo(f->lhs, tracevar, anchor, fresh_counter),
                     ltl_to_fo(f->rhs, tracevar, anchor, fresh_counter));
    case LKind::Next: {
      // ∃j (anchor < j ∧ ∀k (anchor < k → j <= k) ∧ tr(ψ, j))
      std::string j = fresh("j"), k = fresh("k");
      return hf::exists_time(
          j, hf::and_(
                 hf::and_(hf::less(anchor, j),
                          hf::forall_time(
                              k, hf::implies(hf::less(anchor, k), leq(j, k)))),
                 ltl_to_fo(f->lhs, tracevar, j, fresh_counter)));
    }
    case LKind::Until: {
      // ∃j (anchor <= j ∧ tr(ψ2, j) ∧ ∀k (anchor <= k ∧ k < j → tr(ψ1, k)))
      std::string j = fresh("j"), k = fresh("k");
      return hf::exists_time(
          j, hf::and_(
                 hf::and_(leq(anchor, j),
                          ltl_to_fo(f->rhs, tracevar, j, fresh_counter)),
                 hf::forall_time(
                     k, hf::implies(hf::and_(leq(anchor, k), hf::less(k, j)),
                                    ltl_to_fo(f->lhs, tracevar, k,
                                              fresh_counter)))));
    }
  }
  throw ShapeError("unreachable");
}

// -------------------------------------------------------------------- trH

HPtr tr_hqptl_to_hyper(const HQPTLFormula& f) {
  std::set<std::string> used;
  for (const auto& q : f.prefix) used.insert(q.var);
  auto unique_name = [&](std::string base) {
    while (used.count(base)) base += "'";
    used.insert(base);
    return base;
  };

  std::map<std::string, std::string> prop_var;  // q -> pi_q
  for (const auto& q : f.prefix)
    if (!q.is_trace) prop_var[q.var] = unique_name("pi_" + q.var);

  std::string i0 = unique_name("i0");
  std::string j0 = unique_name("j0");
  int fresh = 0;

  // Propositional atoms read their pi_q trace.
  auto fix_atoms = [&](auto&& self, const LPtr& g) -> LPtr {
    if (!g) return g;
    if (g->kind == LKind::Prop && g->tvar.empty()) {
      auto it = prop_var.find(g->prop);
      if (it == prop_var.end())
        throw ShapeError("free propositional atom '" + g->prop + "'");
      return lf::iprop(g->prop, it->second);
    }
    if (g->kind == LKind::Prop || g->kind == LKind::True) return g;
    LPtr l = self(self, g->lhs);
    LPtr r = self(self, g->rhs);
    return std::make_shared<const LTLFormula>(g->kind, g->prop, g->tvar, l, r);
  };
  LPtr body = fix_atoms(fix_atoms, f.body);

  // Sentences are evaluated at time zero: anchor at i0 with the "i = 0"
  // expansion ∀j (i0 = j ∨ i0 < j).
  HPtr matrix = ltl_to_fo(body, "", i0, fresh);
  HPtr zero =
      hf::forall_time(j0, hf::or_(hf::time_eq(i0, j0), hf::less(i0, j0)));
  HPtr out = hf::exists_time(i0, hf::and_(zero, matrix));
  for (auto it = f.prefix.rbegin(); it != f.prefix.rend(); ++it) {
    if (it->is_trace) {
      out = it->is_exists ? hf::exists_ctrace(it->var, out)
                          : hf::forall_ctrace(it->var, out);
    } else {
      const std::string& v = prop_var[it->var];
      out = it->is_exists ? hf::exists_trace(v, out)
                          : hf::forall_trace(v, out);
    }
  }
  return out;
}

}  // namespace hypertrace
