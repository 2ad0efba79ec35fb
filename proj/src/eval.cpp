#include "hypertrace/eval.hpp"

#include <algorithm>
#include <optional>

namespace hypertrace {

namespace {

uint64_t checked_horizon(uint64_t h, const EvalOptions& opts) {
  if (h > opts.max_horizon)
    throw ResourceError("horizon overflow: " + std::to_string(h) +
                        " exceeds cap " + std::to_string(opts.max_horizon));
  return h;
}

int count_time_quantifiers(const HPtr& f) {
  if (!f) return 0;
  int n = (f->kind == HKind::ExistsTime || f->kind == HKind::ForallTime) ? 1 : 0;
  return n + count_time_quantifiers(f->lhs) + count_time_quantifiers(f->rhs);
}

bool has_unconstrained_quant(const HPtr& f) {
  if (!f) return false;
  if (f->kind == HKind::ExistsTrace || f->kind == HKind::ForallTrace)
    return true;
  return has_unconstrained_quant(f->lhs) || has_unconstrained_quant(f->rhs);
}

struct HyperCtx {
  const TraceSet& model;
  const EvalOptions& opts;
  // Time quantifier at depth k enumerates [0, base + (d+1+k)*step): never
  // below the L + (d+1)*P horizon, and growing with depth so witnesses of
  // successor-style subformulas stay in range above outer choices.
  uint64_t base, step, total_d;
  std::map<std::set<std::string>, std::vector<UPTrace>> cache;

  const std::vector<UPTrace>& universe(const std::set<std::string>& props) {
    auto it = cache.find(props);
    if (it != cache.end()) return it->second;
    auto u = enumerate_traces(props, opts.universe_prefix, opts.universe_period);
    return cache.emplace(props, std::move(u)).first->second;
  }
};

bool eval_rec(HyperCtx& cx, Assignment& asg, const HPtr& f, int depth) {
  switch (f->kind) {
    case HKind::ExistsTrace:
    case HKind::ForallTrace: {
      if (!cx.opts.allow_unconstrained_enumeration)
        throw EvalError("unconstrained trace quantifier '" + f->a +
                        "' refused in bounded mode");
      bool exists = f->kind == HKind::ExistsTrace;
      const auto& cands = cx.universe(props_used_with(f->lhs, f->a));
      auto prev = asg.trace_part.find(f->a) != asg.trace_part.end()
                      ? std::optional<UPTrace>(asg.trace_part[f->a])
                      : std::nullopt;
      bool result = !exists;
      for (const auto& t : cands) {
        asg.trace_part[f->a] = t;
        if (eval_rec(cx, asg, f->lhs, depth) == exists) {
          result = exists;
          break;
        }
      }
      if (prev) asg.trace_part[f->a] = *prev; else asg.trace_part.erase(f->a);
      return result;
    }
    case HKind::ExistsTraceC:
    case HKind::ForallTraceC: {
      bool exists = f->kind == HKind::ExistsTraceC;
      auto prev = asg.trace_part.find(f->a) != asg.trace_part.end()
                      ? std::optional<UPTrace>(asg.trace_part[f->a])
                      : std::nullopt;
      bool result = !exists;
      for (const auto& t : cx.model.traces) {
        asg.trace_part[f->a] = t;
        if (eval_rec(cx, asg, f->lhs, depth) == exists) {
          result = exists;
          break;
        }
      }
      if (prev) asg.trace_part[f->a] = *prev; else asg.trace_part.erase(f->a);
      return result;
    }
    case HKind::ExistsTime:
    case HKind::ForallTime: {
      bool exists = f->kind == HKind::ExistsTime;
      auto prev = asg.time_part.find(f->a) != asg.time_part.end()
                      ? std::optional<uint64_t>(asg.time_part[f->a])
                      : std::nullopt;
      bool result = !exists;
      uint64_t bound = cx.base + (cx.total_d + 1 + depth) * cx.step;
      for (uint64_t k = 0; k < bound; ++k) {
        asg.time_part[f->a] = k;
        if (eval_rec(cx, asg, f->lhs, depth + 1) == exists) {
          result = exists;
          break;
        }
      }
      if (prev) asg.time_part[f->a] = *prev; else asg.time_part.erase(f->a);
      return result;
    }
    case HKind::Not:
      return !eval_rec(cx, asg, f->lhs, depth);
    case HKind::Or:
      return eval_rec(cx, asg, f->lhs, depth) ||
             eval_rec(cx, asg, f->rhs, depth);
    case HKind::And:
      return eval_rec(cx, asg, f->lhs, depth) &&
             eval_rec(cx, asg, f->rhs, depth);
    case HKind::Implies:
      return !eval_rec(cx, asg, f->lhs, depth) ||
             eval_rec(cx, asg, f->rhs, depth);
    case HKind::Iff:
      return eval_rec(cx, asg, f->lhs, depth) ==
             eval_rec(cx, asg, f->rhs, depth);
    case HKind::Less:
    case HKind::TimeEq: {
      auto ia = asg.time_part.find(f->a), ib = asg.time_part.find(f->b);
      if (ia == asg.time_part.end() || ib == asg.time_part.end())
        throw EvalError("unbound time variable in atom");
      return f->kind == HKind::Less ? ia->second < ib->second
                                    : ia->second == ib->second;
    }
    case HKind::Pred: {
      auto it = asg.trace_part.find(f->b);
      auto ti = asg.time_part.find(f->c);
      if (it == asg.trace_part.end() || ti == asg.time_part.end())
        throw EvalError("unbound variable in predicate '" + f->a + "'");
      return value_at(it->second, ti->second).count(f->a) != 0;
    }
  }
  throw EvalError("unreachable");
}

}  // namespace

std::set<std::string> props_used_with(const HPtr& f, const std::string& var) {
  std::set<std::string> out;
  auto walk = [&](auto&& self, const HPtr& g) -> void {
    if (!g) return;
    if (g->kind == HKind::Pred && g->b == var) out.insert(g->a);
    if (is_trace_quantifier(g->kind) && g->a == var) return;  // shadowed
    self(self, g->lhs);
    self(self, g->rhs);
  };
  walk(walk, f);
  return out;
}

std::vector<UPTrace> enumerate_traces(const std::set<std::string>& props,
                                      int max_prefix, int max_period) {
  std::vector<Valuation> vals;
  std::vector<std::string> pv(props.begin(), props.end());
  size_t n = 1ull << pv.size();
  for (size_t mask = 0; mask < n; ++mask) {
    Valuation v;
    for (size_t i = 0; i < pv.size(); ++i)
      if (mask & (1ull << i)) v.insert(pv[i]);
    vals.push_back(std::move(v));
  }
  // All valuation sequences up to the needed length.
  std::vector<std::vector<Valuation>> seqs{{}};
  size_t begin = 0;
  for (int len = 1; len <= std::max(max_prefix, max_period); ++len) {
    size_t end = seqs.size();
    for (size_t k = begin; k < end; ++k) {
      for (const auto& v : vals) {
        auto s2 = seqs[k];
        s2.push_back(v);
        seqs.push_back(std::move(s2));
      }
    }
    begin = end;
  }
  std::vector<UPTrace> out;
  std::set<UPTrace> seen;
  for (const auto& pre : seqs) {
    if (static_cast<int>(pre.size()) > max_prefix) continue;
    for (const auto& per : seqs) {
      if (per.empty() || static_cast<int>(per.size()) > max_period) continue;
      UPTrace t = canonicalize(UPTrace{pre, per});
      if (seen.insert(t).second) out.push_back(std::move(t));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<UPSet> enumerate_upsets(int max_prefix, int max_period) {
  auto traces = enumerate_traces({"x"}, max_prefix, max_period);
  std::vector<UPSet> out;
  out.reserve(traces.size());
  for (const auto& t : traces) out.push_back(support_set(t, "x"));
  return out;
}

bool eval_hyper(const TraceSet& model, const Assignment& asg, const HPtr& f,
                const EvalOptions& opts) {
  FreeVars fv = free_vars(f);
  for (const auto& v : fv.trace_vars)
    if (!asg.trace_part.count(v))
      throw EvalError("unbound trace variable '" + v + "'");
  for (const auto& v : fv.time_vars)
    if (!asg.time_part.count(v))
      throw EvalError("unbound time variable '" + v + "'");

  if (opts.mode == EvalOptions::Mode::Exact) {
    if (!opts.exact_delegate)
      throw EvalError("exact mode requested but no automata delegate set");
    return opts.exact_delegate(model, asg, f);
  }

  uint64_t max_prefix = 0, lcm_periods = 1;
  auto feed = [&](const UPTrace& t) {
    max_prefix = std::max<uint64_t>(max_prefix, t.prefix.size());
    lcm_periods = lcm_u64(lcm_periods, t.period.empty() ? 1 : t.period.size());
  };
  for (const auto& t : model.traces) feed(t);
  for (const auto& [v, t] : asg.trace_part) feed(t);
  for (const auto& [v, k] : asg.time_part)
    max_prefix = std::max(max_prefix, k + 1);
  if (has_unconstrained_quant(f) && opts.allow_unconstrained_enumeration) {
    max_prefix = std::max<uint64_t>(max_prefix, opts.universe_prefix);
    for (int p = 1; p <= opts.universe_period; ++p)
      lcm_periods = lcm_u64(lcm_periods, p);
  }
  uint64_t d = count_time_quantifiers(f);
  HyperCtx cx{model, opts, max_prefix, lcm_periods, d, {}};
  checked_horizon(max_prefix + (2 * d + 1) * lcm_periods, opts);
  Assignment a = asg;
  return eval_rec(cx, a, f, 0);
}

// ------------------------------------------------------------- LTL on UP

namespace {

size_t lasso_next(size_t k, size_t l, size_t p) {
  return k + 1 < l + p ? k + 1 : l;
}

std::vector<char> ltl_classes(const UPTrace& tr, const LPtr& f, size_t l,
                              size_t p) {
  size_t n = l + p;
  switch (f->kind) {
    case LKind::True:
      return std::vector<char>(n, 1);
    case LKind::Prop: {
      std::string key =
          f->tvar.empty() ? f->prop : f->prop + "[" + f->tvar + "]";
      std::vector<char> v(n);
      for (size_t k = 0; k < n; ++k) v[k] = value_at(tr, k).count(key) ? 1 : 0;
      return v;
    }
    case LKind::Not: {
      auto v = ltl_classes(tr, f->lhs, l, p);
      for (auto& x : v) x = !x;
      return v;
    }
    case LKind::Or: {
      auto a = ltl_classes(tr, f->lhs, l, p);
      auto b = ltl_classes(tr, f->rhs, l, p);
      for (size_t k = 0; k < n; ++k) a[k] = a[k] || b[k];
      return a;
    }
    case LKind::Next: {
      auto a = ltl_classes(tr, f->lhs, l, p);
      std::vector<char> v(n);
      for (size_t k = 0; k < n; ++k) v[k] = a[lasso_next(k, l, p)];
      return v;
    }
    case LKind::Until: {
      auto a = ltl_classes(tr, f->lhs, l, p);
      auto b = ltl_classes(tr, f->rhs, l, p);
      std::vector<char> u(n, 0);
      // least fixpoint of u[k] = b[k] | (a[k] & u[next k])
      for (size_t round = 0; round <= n; ++round) {
        bool changed = false;
        for (size_t k = n; k-- > 0;) {
          char nv = b[k] || (a[k] && u[lasso_next(k, l, p)]);
          if (nv != u[k]) {
            u[k] = nv;
            changed = true;
          }
        }
        if (!changed) break;
      }
      return u;
    }
  }
  throw EvalError("unreachable");
}

}  // namespace

bool eval_ltl_lasso(const UPTrace& trace, const LPtr& f) {
  UPTrace t = canonicalize(trace);
  size_t l = t.prefix.size(), p = t.period.size();
  return ltl_classes(t, f, l, p)[0] != 0;
}

UPTrace flatten_assignment(const std::map<std::string, UPTrace>& traces,
                           const std::set<std::string>& prop_vars) {
  uint64_t l = 0, p = 1;
  for (const auto& [v, t] : traces) {
    l = std::max<uint64_t>(l, t.prefix.size());
    p = lcm_u64(p, t.period.empty() ? 1 : t.period.size());
  }
  UPTrace out;
  auto val_at = [&](uint64_t i) {
    Valuation v;
    for (const auto& [var, t] : traces) {
      for (const auto& prop : value_at(t, i)) {
        if (prop_vars.count(var)) {
          if (prop == var) v.insert(var);
        } else {
          v.insert(prop + "[" + var + "]");
        }
      }
    }
    return v;
  };
  for (uint64_t i = 0; i < l; ++i) out.prefix.push_back(val_at(i));
  for (uint64_t i = l; i < l + p; ++i) out.period.push_back(val_at(i));
  return canonicalize(out);
}

// ----------------------------------------------------------------- HQPTL

namespace {

bool hqptl_rec(std::map<std::string, UPTrace>& asg,
               std::set<std::string>& prop_vars, const TraceSet& model,
               uint64_t i, const HQPTLFormula& f, size_t qi,
               const EvalOptions& opts) {
  if (qi == f.prefix.size()) {
    UPTrace flat = flatten_assignment(asg, prop_vars);
    return eval_ltl_lasso(suffix(flat, i), f.body);
  }
  const HQuant& q = f.prefix[qi];
  const std::vector<UPTrace>* domain;
  std::vector<UPTrace> qdom;
  if (q.is_trace) {
    domain = &model.traces;
  } else {
    qdom = enumerate_traces({q.var}, opts.universe_prefix,
                            opts.universe_period);
    domain = &qdom;
    prop_vars.insert(q.var);
  }
  auto prev = asg.find(q.var) != asg.end()
                  ? std::optional<UPTrace>(asg[q.var])
                  : std::nullopt;
  bool result = !q.is_exists;
  for (const auto& t : *domain) {
    asg[q.var] = t;
    bool v = hqptl_rec(asg, prop_vars, model, i, f, qi + 1, opts);
    if (v == q.is_exists) {
      result = q.is_exists;
      break;
    }
  }
  if (prev)
    asg[q.var] = *prev;
  else
    asg.erase(q.var);
  if (!q.is_trace) prop_vars.erase(q.var);
  return result;
}

}  // namespace

bool eval_hqptl(const std::map<std::string, UPTrace>& trace_asg,
                const TraceSet& model, uint64_t i, const HQPTLFormula& f,
                const EvalOptions& opts) {
  if (opts.mode == EvalOptions::Mode::Exact) {
    if (!opts.hqptl_exact_delegate)
      throw EvalError("exact mode requested but no automata delegate set");
    if (!trace_asg.empty() || i != 0)
      throw EvalError("exact HyperQPTL evaluation handles closed sentences "
                      "at time 0 only");
    return opts.hqptl_exact_delegate(model, f);
  }
  auto asg = trace_asg;
  std::set<std::string> prop_vars;
  return hqptl_rec(asg, prop_vars, model, i, f, 0, opts);
}

// ------------------------------------------------------------------- S1S

namespace {

int count_fo_quantifiers(const SPtr& f) {
  if (!f) return 0;
  int n = (f->kind == SKind::Exists1 || f->kind == SKind::Forall1) ? 1 : 0;
  return n + count_fo_quantifiers(f->lhs) + count_fo_quantifiers(f->rhs);
}

bool has_so_quantifier(const SPtr& f) {
  if (!f) return false;
  if (f->kind == SKind::Exists2 || f->kind == SKind::Forall2) {
    s1s_abbrev::Recognized rec;
    // The leq pattern's ∀Z is evaluated directly, not enumerated.
    if (s1s_abbrev::recognize(f, rec)) return false;
    return true;
  }
  return has_so_quantifier(f->lhs) || has_so_quantifier(f->rhs);
}

struct S1SCtx {
  const EvalOptions& opts;
  uint64_t base, step, total_d;  // depth-k bound: base + (total_d+1+k)*step
  std::vector<UPSet> so_universe;
};

bool succ_closed_holds(const UPSet& s) {
  uint64_t bound = s.prefix.size() + s.period.size() + 1;
  for (uint64_t i = 0; i < bound; ++i)
    if (s.contains(i) && !s.contains(i + 1)) return false;
  return true;
}

bool subset_holds(const UPSet& x, const UPSet& y) {
  uint64_t bound =
      std::max(x.prefix.size(), y.prefix.size()) +
      lcm_u64(x.period.empty() ? 1 : x.period.size(),
              y.period.empty() ? 1 : y.period.size());
  for (uint64_t i = 0; i < bound; ++i)
    if (x.contains(i) && !y.contains(i)) return false;
  return true;
}

bool s1s_rec(S1SCtx& cx, std::map<std::string, uint64_t>& fo,
             std::map<std::string, UPSet>& so, const SPtr& f, int depth) {
  s1s_abbrev::Recognized rec;
  if (s1s_abbrev::recognize(f, rec)) {
    using AK = s1s_abbrev::AbbrevKind;
    switch (rec.kind) {
      case AK::Less:
      case AK::Leq: {
        auto x = fo.find(rec.x), y = fo.find(rec.y);
        if (x == fo.end() || y == fo.end())
          throw EvalError("unbound S1S variable in order atom");
        return rec.kind == AK::Less ? x->second < y->second
                                    : x->second <= y->second;
      }
      case AK::EqZero: {
        auto x = fo.find(rec.x);
        if (x == fo.end()) throw EvalError("unbound S1S variable");
        return x->second == 0;
      }
      case AK::SuccClosed: {
        auto z = so.find(rec.x);
        if (z == so.end()) throw EvalError("unbound S1S set variable");
        return succ_closed_holds(z->second);
      }
      case AK::Subset: {
        auto x = so.find(rec.x), y = so.find(rec.y);
        if (x == so.end() || y == so.end())
          throw EvalError("unbound S1S set variable");
        return subset_holds(x->second, y->second);
      }
    }
  }
  switch (f->kind) {
    case SKind::Exists1:
    case SKind::Forall1: {
      bool exists = f->kind == SKind::Exists1;
      auto prev = fo.find(f->a) != fo.end()
                      ? std::optional<uint64_t>(fo[f->a])
                      : std::nullopt;
      bool result = !exists;
      uint64_t bound = cx.base + (cx.total_d + 1 + depth) * cx.step;
      for (uint64_t k = 0; k < bound; ++k) {
        fo[f->a] = k;
        if (s1s_rec(cx, fo, so, f->lhs, depth + 1) == exists) {
          result = exists;
          break;
        }
      }
      if (prev) fo[f->a] = *prev; else fo.erase(f->a);
      return result;
    }
    case SKind::Exists2:
    case SKind::Forall2: {
      bool exists = f->kind == SKind::Exists2;
      auto prev = so.find(f->a) != so.end()
                      ? std::optional<UPSet>(so[f->a])
                      : std::nullopt;
      bool result = !exists;
      for (const auto& s : cx.so_universe) {
        so[f->a] = s;
        if (s1s_rec(cx, fo, so, f->lhs, depth + 1) == exists) {
          result = exists;
          break;
        }
      }
      if (prev) so[f->a] = *prev; else so.erase(f->a);
      return result;
    }
    case SKind::Not:
      return !s1s_rec(cx, fo, so, f->lhs, depth);
    case SKind::Or:
      return s1s_rec(cx, fo, so, f->lhs, depth) ||
             s1s_rec(cx, fo, so, f->rhs, depth);
    case SKind::And:
      return s1s_rec(cx, fo, so, f->lhs, depth) &&
             s1s_rec(cx, fo, so, f->rhs, depth);
    case SKind::Eq: {
      auto a = fo.find(f->a), b = fo.find(f->b);
      if (a == fo.end() || b == fo.end())
        throw EvalError("unbound S1S variable in '='");
      return a->second == b->second;
    }
    case SKind::Succ: {
      auto a = fo.find(f->a), b = fo.find(f->b);
      if (a == fo.end() || b == fo.end())
        throw EvalError("unbound S1S variable in Succ");
      return b->second == a->second + 1;
    }
    case SKind::Member: {
      auto s = so.find(f->a);
      auto i = fo.find(f->b);
      if (s == so.end() || i == fo.end())
        throw EvalError("unbound S1S variable in membership");
      return s->second.contains(i->second);
    }
  }
  throw EvalError("unreachable");
}

}  // namespace

bool eval_s1s(const std::map<std::string, uint64_t>& first_order,
              const std::map<std::string, UPSet>& second_order, const SPtr& f,
              const EvalOptions& opts) {
  uint64_t max_prefix = 0, lcm_periods = 1;
  for (const auto& [v, s] : second_order) {
    max_prefix = std::max<uint64_t>(max_prefix, s.prefix.size());
    lcm_periods = lcm_u64(lcm_periods, s.period.empty() ? 1 : s.period.size());
  }
  for (const auto& [v, k] : first_order)
    max_prefix = std::max(max_prefix, k + 1);
  S1SCtx cx{opts, 0, 0, 0, {}};
  if (has_so_quantifier(f)) {
    cx.so_universe =
        enumerate_upsets(opts.universe_prefix, opts.universe_period);
    max_prefix = std::max<uint64_t>(max_prefix, opts.universe_prefix);
    for (int p = 1; p <= opts.universe_period; ++p)
      lcm_periods = lcm_u64(lcm_periods, p);
  }
  uint64_t d = count_fo_quantifiers(f);
  // Succ atoms tie adjacent values together, so inner quantifiers need room
  // above outer choices; no bound drops below the shared horizon.
  cx.base = max_prefix;
  cx.step = lcm_periods + d + 1;
  cx.total_d = d;
  checked_horizon(cx.base + (2 * d + 1) * cx.step, opts);
  auto fo = first_order;
  auto so = second_order;
  return s1s_rec(cx, fo, so, f, 0);
}

}  // namespace hypertrace
