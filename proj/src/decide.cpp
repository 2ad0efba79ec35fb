#include "hypertrace/decide.hpp"

#include <algorithm>

#include "hypertrace/syntax.hpp"
#include "hypertrace/transforms.hpp"

namespace hypertrace {

const char* to_string(FragmentClass::Label label) {
  switch (label) {
    case FragmentClass::Label::UnconstrainedOnly: return "UnconstrainedOnly";
    case FragmentClass::Label::ExistsForallConstrained:
      return "ExistsForallConstrained";
    case FragmentClass::Label::TracePrefixedDecidable:
      return "TracePrefixedDecidable";
    case FragmentClass::Label::TimePrefixedDecidable:
      return "TimePrefixedDecidable";
    case FragmentClass::Label::KnownUndecidable: return "KnownUndecidable";
    case FragmentClass::Label::Unknown: return "Unknown";
  }
  return "Unknown";
}

// ----------------------------------------------------------------- classify

namespace {

bool match_exists_forall(const QuantifierPrefix& p, size_t& n_hats,
                         size_t& m_hats) {
  size_t i = 0;
  while (i < p.size() && p[i].is_exists && p[i].sort != QSort::TraceC) ++i;
  size_t hat_e = i;
  while (i < p.size() && p[i].sort == QSort::TraceC && p[i].is_exists) ++i;
  n_hats = i - hat_e;
  size_t hat_a = i;
  while (i < p.size() && p[i].sort == QSort::TraceC && !p[i].is_exists) ++i;
  m_hats = i - hat_a;
  for (; i < p.size(); ++i)
    if (p[i].sort == QSort::TraceC) return false;
  return true;
}

bool match_trace_prefixed(const QuantifierPrefix& p) {
  // ∃-unconstrained*, ∃̂*, ∀̂*, unconstrained*, time*
  size_t i = 0;
  while (i < p.size() && p[i].sort == QSort::TraceU && p[i].is_exists) ++i;
  while (i < p.size() && p[i].sort == QSort::TraceC && p[i].is_exists) ++i;
  while (i < p.size() && p[i].sort == QSort::TraceC && !p[i].is_exists) ++i;
  while (i < p.size() && p[i].sort == QSort::TraceU) ++i;
  while (i < p.size() && p[i].sort == QSort::Time) ++i;
  return i == p.size();
}

bool match_time_prefixed(const QuantifierPrefix& p) {
  // ∃-time*, ∃-unconstrained*, ∃̂*, ∀̂*, then time/unconstrained mix
  size_t i = 0;
  while (i < p.size() && p[i].sort == QSort::Time && p[i].is_exists) ++i;
  while (i < p.size() && p[i].sort == QSort::TraceU && p[i].is_exists) ++i;
  while (i < p.size() && p[i].sort == QSort::TraceC && p[i].is_exists) ++i;
  while (i < p.size() && p[i].sort == QSort::TraceC && !p[i].is_exists) ++i;
  for (; i < p.size(); ++i)
    if (p[i].sort == QSort::TraceC) return false;
  return true;
}

bool match_aae(const QuantifierPrefix& p) {
  // exactly ∀̂ ∀̂ ∃̂ then one or more time quantifiers
  if (p.size() < 4) return false;
  if (!(p[0].sort == QSort::TraceC && !p[0].is_exists)) return false;
  if (!(p[1].sort == QSort::TraceC && !p[1].is_exists)) return false;
  if (!(p[2].sort == QSort::TraceC && p[2].is_exists)) return false;
  for (size_t i = 3; i < p.size(); ++i)
    if (p[i].sort != QSort::Time) return false;
  return true;
}

bool match_minsky(const QuantifierPrefix& p) {
  // time ∃∀∃∃∀ then trace ∀̂ ∃̂ ∃̂ ∃
  if (p.size() != 9) return false;
  const bool e = true, a = false;
  const std::pair<QSort, bool> want[9] = {
      {QSort::Time, e},   {QSort::Time, a},   {QSort::Time, e},
      {QSort::Time, e},   {QSort::Time, a},   {QSort::TraceC, a},
      {QSort::TraceC, e}, {QSort::TraceC, e}, {QSort::TraceU, e}};
  for (size_t i = 0; i < 9; ++i)
    if (p[i].sort != want[i].first || p[i].is_exists != want[i].second)
      return false;
  return true;
}

}  // namespace

FragmentClass classify(const HPtr& f) {
  HPtr p = is_prenex(f) ? f : to_prenex(f);
  FragmentClass out;
  out.prefix = quantifier_prefix(p);
  const QuantifierPrefix& q = out.prefix;

  bool any_constrained = false;
  for (const auto& e : q) any_constrained |= e.sort == QSort::TraceC;
  if (!any_constrained) {
    out.label = FragmentClass::Label::UnconstrainedOnly;
    return out;
  }
  size_t n = 0, m = 0;
  if (match_exists_forall(q, n, m) && n >= 1) {
    out.label = FragmentClass::Label::ExistsForallConstrained;
    return out;
  }
  if (match_trace_prefixed(q)) {
    out.label = FragmentClass::Label::TracePrefixedDecidable;
    return out;
  }
  if (match_time_prefixed(q)) {
    out.label = FragmentClass::Label::TimePrefixedDecidable;
    return out;
  }
  if (match_aae(q)) {
    out.label = FragmentClass::Label::KnownUndecidable;
    out.reason = "TracePrefix_AAE";
    return out;
  }
  if (match_minsky(q)) {
    out.label = FragmentClass::Label::KnownUndecidable;
    out.reason = "TimePrefix_Minsky";
    return out;
  }
  out.label = FragmentClass::Label::Unknown;
  return out;
}

// --------------------------------------------------------------- eval_exact

namespace {

// Constant traces live under reserved names the parser cannot produce.
std::string const_name(size_t i) { return "$c" + std::to_string(i); }

HPtr expand_constrained(const HPtr& f, size_t model_size) {
  switch (f->kind) {
    case HKind::ExistsTraceC:
    case HKind::ForallTraceC: {
      bool ex = f->kind == HKind::ExistsTraceC;
      HPtr body = expand_constrained(f->lhs, model_size);
      std::vector<HPtr> parts;
      for (size_t i = 0; i < model_size; ++i)
        parts.push_back(substitute_trace_vars(body, {{f->a, const_name(i)}}));
      return ex ? hf::or_all(parts) : hf::and_all(parts);
    }
    case HKind::ExistsTrace:
    case HKind::ForallTrace:
    case HKind::ExistsTime:
    case HKind::ForallTime:
      return std::make_shared<const HyperFormula>(
          f->kind, f->a, "", "", expand_constrained(f->lhs, model_size),
          nullptr);
    case HKind::Not:
      return hf::not_(expand_constrained(f->lhs, model_size));
    case HKind::Or:
    case HKind::And:
    case HKind::Implies:
    case HKind::Iff: {
      HPtr l = expand_constrained(f->lhs, model_size);
      HPtr r = expand_constrained(f->rhs, model_size);
      return std::make_shared<const HyperFormula>(f->kind, "", "", "", l, r);
    }
    default:
      return f;
  }
}

UPSet singleton_set(uint64_t k) {
  UPSet s;
  s.prefix.assign(k, 0);
  s.prefix.push_back(1);
  s.period = {0};
  return s;
}

}  // namespace

bool eval_exact(const TraceSet& model, const Assignment& asg, const HPtr& f,
                const AutomataLimits& limits) {
  FreeVars fv = free_vars(f);
  for (const auto& v : fv.trace_vars)
    if (!asg.trace_part.count(v))
      throw EvalError("unbound trace variable '" + v + "'");
  for (const auto& v : fv.time_vars)
    if (!asg.time_part.count(v))
      throw EvalError("unbound time variable '" + v + "'");

  HPtr g = expand_constrained(f, model.size());
  std::map<std::string, UPTrace> constants;
  for (size_t i = 0; i < model.size(); ++i)
    constants[const_name(i)] = model.traces[i];
  for (const auto& [v, t] : asg.trace_part) constants[v] = t;

  std::set<std::string> props = used_props(g);
  ToS1SResult s1s = to_s1s(g, props);
  // Fixed traces enter the construction at the atom level: their membership
  // automata run over the time track alone, so constant tracks never appear.
  std::map<std::string, UPSet> fixed;
  for (const auto& [key, sovar] : s1s.var_map) {
    auto it = constants.find(key.first);
    if (it != constants.end())
      fixed[sovar] = support_set(it->second, key.second);
  }
  NBW a = from_s1s(s1s.formula, limits, &fixed);
  for (const auto& [v, k] : asg.time_part) {
    if (a.track_index(v) < 0) continue;
    a = constrain_track_to_constant(a, v, singleton_set(k), limits);
  }
  return is_empty(a).has_value();
}

bool model_check(const TraceSet& model, const HPtr& f,
                 const AutomataLimits& limits) {
  // The formula may read propositions beyond the model alphabet: quantified
  // propositions of translated HyperQPTL sentences live on unconstrained
  // traces, and model traces simply never carry them.
  FreeVars fv = free_vars(f);
  if (!fv.trace_vars.empty() || !fv.time_vars.empty())
    throw EvalError("model_check requires a closed formula");
  return eval_exact(model, {}, f, limits);
}

EvalOptions exact_eval_options(const AutomataLimits& limits) {
  EvalOptions opts;
  opts.mode = EvalOptions::Mode::Exact;
  opts.exact_delegate = [limits](const TraceSet& model, const Assignment& asg,
                                 const HPtr& f) {
    return eval_exact(model, asg, f, limits);
  };
  opts.hqptl_exact_delegate = [limits](const TraceSet& model,
                                       const HQPTLFormula& f) {
    return model_check(model, tr_hqptl_to_hyper(f), limits);
  };
  return opts;
}

// ---------------------------------------------------------------- check_sat

namespace {

TraceSet empty_model_over(const std::set<std::string>& props) {
  TraceSet ts;
  ts.alphabet = props;
  return ts;
}

// The decidable route: split the prenex prefix, remove the constrained
// block, and decode witnesses for the leading existential trace variables
// from an emptiness lasso.
SatResult decide_route(const HPtr& f, const AutomataLimits& limits) {
  SatResult out;
  HPtr p = is_prenex(f) ? f : to_prenex(f);
  ConstrainedSplit sp = split_constrained_prefix(p);
  std::set<std::string> props = used_props(f);

  if (!sp.forall_hats.empty() && sp.exists_hats.empty()) {
    // A constrained universal block with nothing to instantiate it: the
    // empty trace set satisfies the formula vacuously.
    TraceSet empty = empty_model_over(props);
    if (model_check(empty, f, limits)) {
      out.verdict = SatResult::Verdict::Sat;
      out.witness = empty;
      return out;
    }
    throw EvalError("internal: vacuous-universal witness failed to verify");
  }

  HPtr u = to_unconstrained(p);

  // Keep the leading existential block free so its traces can be decoded.
  ToS1SResult s1s = to_s1s(u, props);
  SPtr body = s1s.formula;
  while (body &&
         (body->kind == SKind::Exists1 || body->kind == SKind::Exists2))
    body = body->lhs;
  NBW a = from_s1s(body, limits);
  auto w = is_empty(a);
  if (!w) {
    out.verdict = SatResult::Verdict::Unsat;
    return out;
  }
  std::map<std::string, std::map<std::string, UPSet>> supports;
  for (const auto& [key, sovar] : s1s.var_map) {
    const auto& [var, prop] = key;
    if (a.track_index(sovar) >= 0)
      supports[var][prop] = lasso_track_set(a, *w, sovar);
    else
      supports[var][prop] = UPSet{{}, {0}};
  }
  // Witness model: the constrained existential block when the formula had
  // constrained quantifiers, otherwise the leading unconstrained existential
  // trace variables.
  std::vector<std::string> model_vars = sp.exists_hats;
  bool had_constrained = !sp.exists_hats.empty() || !sp.forall_hats.empty();
  if (!had_constrained) {
    for (const auto& e : sp.leading_exists)
      if (e.sort == QSort::TraceU) model_vars.push_back(e.var);
  }
  TraceSet witness = empty_model_over(props);
  int k = 0;
  for (const auto& v : model_vars) {
    std::map<std::string, UPSet> m;
    for (const auto& prop : props) {
      auto vi = supports.find(v);
      if (vi != supports.end() && vi->second.count(prop))
        m[prop] = vi->second.at(prop);
      else
        m[prop] = UPSet{{}, {0}};
    }
    UPTrace t = from_support_sets(m);
    if (!witness.contains(t)) witness.add("w" + std::to_string(k++), t);
  }
  if (!model_check(witness, f, limits))
    throw EvalError("internal: sat witness failed verification");
  out.verdict = SatResult::Verdict::Sat;
  out.witness = witness;
  return out;
}

}  // namespace

SatResult check_sat(const HPtr& f, const AutomataLimits& limits) {
  FragmentClass cls = classify(f);
  if (cls.decidable()) {
    try {
      return decide_route(f, limits);
    } catch (const ResourceError& e) {
      SatResult r;
      r.verdict = SatResult::Verdict::Unknown;
      r.reason = std::string("resource: ") + e.what();
      return r;
    }
  }

  SatResult out;
  out.verdict = SatResult::Verdict::Unknown;
  out.reason = cls.label == FragmentClass::Label::KnownUndecidable
                   ? "KnownUndecidable:" + cls.reason
                   : "Unknown";

  // Unsatisfiability through the contrapositive of the relaxation: models
  // of the original survive dropping the constraints on existentials.
  try {
    HPtr p = is_prenex(f) ? f : to_prenex(f);
    HPtr relaxed = relax_existentials(p);
    if (!equal(relaxed, p)) {
      SatResult r = check_sat(relaxed, limits);
      if (r.verdict == SatResult::Verdict::Unsat) {
        out.verdict = SatResult::Verdict::Unsat;
        out.reason.clear();
        return out;
      }
      out.reason += std::string("; relaxation ") +
                    (r.verdict == SatResult::Verdict::Sat ? "is satisfiable"
                                                          : "undecided");
    }
  } catch (const ResourceError&) {
  } catch (const ShapeError&) {
  }
  return out;
}

// ------------------------------------------------------------ bounded oracle

EquisatVerdict equisat_oracle(const HPtr& f, const HPtr& g,
                              const TraceUniverse& u, int max_model_size) {
  std::vector<UPTrace> universe = u.generate();
  size_t n = universe.size();
  if (n > 20) throw ResourceError("oracle universe too large");
  EvalOptions opts;
  opts.universe_prefix = u.prefix_bound;
  opts.universe_period = u.period_bound;

  auto find_model = [&](const HPtr& h) -> std::optional<TraceSet> {
    for (size_t mask = 0; mask < (size_t{1} << n); ++mask) {
      if (__builtin_popcountll(mask) > max_model_size) continue;
      TraceSet model;
      model.alphabet = u.alphabet;
      int k = 0;
      for (size_t i = 0; i < n; ++i)
        if (mask & (size_t{1} << i))
          model.add("t" + std::to_string(k++), universe[i]);
      if (eval_hyper(model, {}, h, opts)) return model;
    }
    return std::nullopt;
  };

  auto mf = find_model(f);
  auto mg = find_model(g);
  EquisatVerdict v;
  if (mf && mg) {
    v.kind = EquisatVerdict::Kind::AgreeSat;
    return v;
  }
  if (mf || mg) {
    v.kind = EquisatVerdict::Kind::Disagree;
    v.witness = mf ? *mf : *mg;
    return v;
  }
  // Nothing within bounds; the exact route may still certify joint
  // unsatisfiability.  Tight resource limits keep this certification step
  // from dominating the oracle on adversarial random inputs.
  try {
    AutomataLimits tight;
    tight.rank_input_cap = 8;
    tight.macro_budget = 20000;
    tight.transition_budget = 200000;
    if (check_sat(f, tight).verdict == SatResult::Verdict::Unsat &&
        check_sat(g, tight).verdict == SatResult::Verdict::Unsat) {
      v.kind = EquisatVerdict::Kind::AgreeUnsat;
      return v;
    }
  } catch (const ResourceError&) {
  }
  v.kind = EquisatVerdict::Kind::Inconclusive;
  return v;
}

}  // namespace hypertrace
