#include "doctest.h"

#include <random>

#include "hypertrace/eval.hpp"
#include "hypertrace/formula.hpp"
#include "hypertrace/syntax.hpp"
#include "hypertrace/traces.hpp"

using namespace hypertrace;

namespace {

// Independence between a secret input and a public output (all quantifiers
// constrained), and the mixed variant with an unconstrained first quantifier.
HPtr independence_formula(bool mix) {
  HPtr matrix = hf::and_(
      hf::iff(hf::pred("secret", "p", "i"), hf::pred("secret", "pe", "i")),
      hf::iff(hf::pred("pub", "p'", "i"), hf::pred("pub", "pe", "i")));
  HPtr f = hf::forall_time("i", matrix);
  f = hf::exists_ctrace("pe", f);
  f = hf::forall_ctrace("p'", f);
  return mix ? hf::forall_trace("p", f) : hf::forall_ctrace("p", f);
}

TraceSet model_of(std::vector<UPTrace> traces) {
  TraceSet ts;
  ts.alphabet = {"secret", "pub"};
  for (size_t i = 0; i < traces.size(); ++i)
    ts.add("t" + std::to_string(i), traces[i]);
  return ts;
}

UPTrace random_trace(std::mt19937_64& rng, const std::vector<std::string>& props,
                     int max_pre, int max_per) {
  std::uniform_int_distribution<int> pre_len(0, max_pre), per_len(1, max_per);
  auto val = [&]() {
    Valuation v;
    for (const auto& p : props)
      if (rng() & 1) v.insert(p);
    return v;
  };
  UPTrace t;
  int np = pre_len(rng), nq = per_len(rng);
  for (int i = 0; i < np; ++i) t.prefix.push_back(val());
  for (int i = 0; i < nq; ++i) t.period.push_back(val());
  return canonicalize(t);
}

LPtr random_ltl(std::mt19937_64& rng, const std::vector<std::string>& props,
                int depth) {
  if (depth == 0 || rng() % 4 == 0) {
    if (rng() % 8 == 0) return lf::true_();
    return lf::prop(props[rng() % props.size()]);
  }
  switch (rng() % 4) {
    case 0: return lf::not_(random_ltl(rng, props, depth - 1));
    case 1:
      return lf::or_(random_ltl(rng, props, depth - 1),
                     random_ltl(rng, props, depth - 1));
    case 2: return lf::next(random_ltl(rng, props, depth - 1));
    default:
      return lf::until(random_ltl(rng, props, depth - 1),
                       random_ltl(rng, props, depth - 1));
  }
}

// Bounded unrolled LTL semantics: ground truth for the lasso evaluator.
// The horizon is deep enough that Until verdicts inside it are exact.
bool ltl_unrolled(const UPTrace& t, const LPtr& f, uint64_t pos,
                  uint64_t horizon) {
  switch (f->kind) {
    case LKind::True: return true;
    case LKind::Prop: {
      std::string key =
          f->tvar.empty() ? f->prop : f->prop + "[" + f->tvar + "]";
      return value_at(t, pos).count(key) != 0;
    }
    case LKind::Not: return !ltl_unrolled(t, f->lhs, pos, horizon);
    case LKind::Or:
      return ltl_unrolled(t, f->lhs, pos, horizon) ||
             ltl_unrolled(t, f->rhs, pos, horizon);
    case LKind::Next: return ltl_unrolled(t, f->lhs, pos + 1, horizon);
    case LKind::Until: {
      for (uint64_t j = pos; j < horizon; ++j) {
        if (ltl_unrolled(t, f->rhs, j, horizon)) {
          bool all = true;
          for (uint64_t k = pos; k < j && all; ++k)
            all = ltl_unrolled(t, f->lhs, k, horizon);
          if (all) return true;
        }
      }
      return false;
    }
  }
  return false;
}

// Direct recursive HyperQPTL semantics on quantifier-free bodies, following
// the satisfaction clauses position by position; independent of the
// flattening route it cross-checks.
bool hqptl_direct(const std::map<std::string, UPTrace>& asg,
                  const std::set<std::string>& prop_vars, uint64_t i,
                  const LPtr& f) {
  auto trace_of = [&](const std::string& var) -> const UPTrace& {
    auto it = asg.find(var);
    if (it == asg.end()) throw EvalError("missing assignment");
    return it->second;
  };
  switch (f->kind) {
    case LKind::True: return true;
    case LKind::Prop: {
      if (!f->tvar.empty())
        return value_at(trace_of(f->tvar), i).count(f->prop) != 0;
      return value_at(trace_of(f->prop), i).count(f->prop) != 0;
    }
    case LKind::Not: return !hqptl_direct(asg, prop_vars, i, f->lhs);
    case LKind::Or:
      return hqptl_direct(asg, prop_vars, i, f->lhs) ||
             hqptl_direct(asg, prop_vars, i, f->rhs);
    case LKind::Next: return hqptl_direct(asg, prop_vars, i + 1, f->lhs);
    case LKind::Until: {
      uint64_t l = 0, p = 1;
      for (const auto& [v, t] : asg) {
        l = std::max<uint64_t>(l, t.prefix.size());
        p = lcm_u64(p, t.period.size());
      }
      uint64_t bound = std::max(i, l) + 2 * p + 1;
      for (uint64_t j = i; j < bound; ++j) {
        if (hqptl_direct(asg, prop_vars, j, f->rhs)) {
          bool all = true;
          for (uint64_t k = i; k < j && all; ++k)
            all = hqptl_direct(asg, prop_vars, k, f->lhs);
          if (all) return true;
        }
      }
      return false;
    }
  }
  return false;
}

}  // namespace

TEST_CASE("independence verdicts over the three two-proposition models") {
  UPTrace empty = constant_trace({});
  UPTrace both = constant_trace({"secret", "pub"});
  TraceSet t0 = model_of({empty});
  TraceSet t1 = model_of({both});
  TraceSet t01 = model_of({empty, both});

  HPtr phi = independence_formula(false);
  HPtr phi_mix = independence_formula(true);
  Assignment none;
  EvalOptions opts;

  CHECK(eval_hyper(t0, none, phi, opts));
  CHECK(eval_hyper(t1, none, phi, opts));
  CHECK_FALSE(eval_hyper(t01, none, phi, opts));

  CHECK_FALSE(eval_hyper(t0, none, phi_mix, opts));
  CHECK_FALSE(eval_hyper(t1, none, phi_mix, opts));
  CHECK_FALSE(eval_hyper(t01, none, phi_mix, opts));
}

TEST_CASE("eval_hyper reports unbound variables") {
  TraceSet empty_model;
  Assignment none;
  CHECK_THROWS_AS(eval_hyper(empty_model, none, hf::pred("a", "p", "i"), {}),
                  EvalError);
}

TEST_CASE("eval_hyper respects the horizon cap") {
  TraceSet empty_model;
  Assignment none;
  EvalOptions opts;
  opts.max_horizon = 2;
  HPtr f = hf::exists_time(
      "i", hf::exists_time("j", hf::exists_time("k", hf::less("i", "j"))));
  CHECK_THROWS_AS(eval_hyper(empty_model, none, f, opts), ResourceError);
}

TEST_CASE("bounded-mode refusal of unconstrained quantifiers") {
  TraceSet empty_model;
  Assignment none;
  EvalOptions opts;
  opts.allow_unconstrained_enumeration = false;
  HPtr f = hf::exists_trace("p", hf::exists_time("i", hf::pred("a", "p", "i")));
  CHECK_THROWS_AS(eval_hyper(empty_model, none, f, opts), EvalError);
}

TEST_CASE("taut and contra evaluate as expected") {
  TraceSet empty_model;
  Assignment none;
  CHECK(eval_hyper(empty_model, none, hf::taut(), {}));
  CHECK_FALSE(eval_hyper(empty_model, none, hf::contra(), {}));
}

TEST_CASE("eval_ltl_lasso frozen examples") {
  UPTrace all_a = constant_trace({"a"});
  CHECK_FALSE(eval_ltl_lasso(all_a, lf::until(lf::prop("a"), lf::prop("b"))));
  UPTrace xb{{{}}, {{"b"}}};
  CHECK(eval_ltl_lasso(xb, lf::next(lf::prop("b"))));
  CHECK(eval_ltl_lasso(all_a, lf::globally(lf::prop("a"))));
  CHECK_FALSE(eval_ltl_lasso(xb, lf::globally(lf::prop("b"))));
  CHECK(eval_ltl_lasso(xb, lf::next(lf::globally(lf::prop("b")))));
}

TEST_CASE("eval_ltl_lasso agrees with deep unrolling") {
  std::mt19937_64 rng(60601);
  std::vector<std::string> props{"a", "b"};
  for (int it = 0; it < 500; ++it) {
    UPTrace t = random_trace(rng, props, 2, 3);
    LPtr f = random_ltl(rng, props, 4);
    uint64_t lp = t.prefix.size() + t.period.size();
    CHECK(eval_ltl_lasso(t, f) == ltl_unrolled(t, f, 0, 3 * lp + 16));
  }
}

TEST_CASE("flatten_assignment frozen examples") {
  std::map<std::string, UPTrace> asg{{"pi", constant_trace({"a"})}};
  UPTrace flat = flatten_assignment(asg);
  CHECK(flat == constant_trace({"a[pi]"}));
  CHECK(flatten_assignment({}) == canonicalize(UPTrace{{}, {{}}}));

  std::map<std::string, UPTrace> asg2{{"pi", constant_trace({"a"})},
                                      {"q", constant_trace({"q"})}};
  UPTrace flat2 = flatten_assignment(asg2, {"q"});
  CHECK(flat2 == constant_trace({"a[pi]", "q"}));
}

TEST_CASE("quantifier-free HyperQPTL satisfaction equals LTL on flattening") {
  std::mt19937_64 rng(50505);
  std::vector<std::string> props{"a", "b"};
  int checked = 0;
  for (int it = 0; it < 500; ++it) {
    std::map<std::string, UPTrace> asg{
        {"p1", random_trace(rng, props, 2, 2)},
        {"p2", random_trace(rng, props, 2, 2)},
        {"q", random_trace(rng, {"q"}, 2, 2)}};
    // Body over indexed atoms for p1/p2 and the bare q.
    auto atom = [&](int which) -> LPtr {
      if (which == 0) return lf::iprop(props[rng() % 2], "p1");
      if (which == 1) return lf::iprop(props[rng() % 2], "p2");
      return lf::prop("q");
    };
    LPtr body;
    switch (rng() % 4) {
      case 0: body = lf::until(atom(rng() % 3), atom(rng() % 3)); break;
      case 1: body = lf::next(lf::or_(atom(rng() % 3), atom(rng() % 3))); break;
      case 2: body = lf::not_(lf::until(atom(rng() % 3), atom(rng() % 3))); break;
      default: body = lf::or_(lf::not_(atom(rng() % 3)), lf::next(atom(rng() % 3)));
    }
    uint64_t i = rng() % 5;
    bool direct = hqptl_direct(asg, {"q"}, i, body);
    bool flat = eval_ltl_lasso(suffix(flatten_assignment(asg, {"q"}), i), body);
    CHECK(direct == flat);
    ++checked;
  }
  CHECK(checked == 500);
}

TEST_CASE("eval_hqptl universal and existential trace quantification") {
  TraceSet t_all;
  t_all.alphabet = {"a"};
  t_all.add("t0", constant_trace({"a"}));
  TraceSet t_mixed = t_all;
  t_mixed.add("t1", constant_trace({}));

  HQPTLFormula f;
  f.prefix = {{false, true, "p"}};
  f.body = lf::globally(lf::iprop("a", "p"));
  CHECK(eval_hqptl({}, t_all, 0, f, {}));
  CHECK_FALSE(eval_hqptl({}, t_mixed, 0, f, {}));

  HQPTLFormula g;
  g.prefix = {{true, true, "p"}};
  g.body = lf::globally(lf::iprop("a", "p"));
  CHECK(eval_hqptl({}, t_mixed, 0, g, {}));
}

TEST_CASE("eval_hqptl propositional quantification, bounded") {
  TraceSet t;
  t.alphabet = {"a"};
  t.add("t0", constant_trace({"a"}));
  // ∃q (q ∧ X ¬q): some {q}-trace has q now and not next.
  HQPTLFormula f;
  f.prefix = {{true, false, "q"}};
  f.body = lf::and_(lf::prop("q"), lf::next(lf::not_(lf::prop("q"))));
  CHECK(eval_hqptl({}, t, 0, f, {}));
  // ∀q (q ∨ ¬q) holds; ∀q q does not.
  HQPTLFormula g;
  g.prefix = {{false, false, "q"}};
  g.body = lf::or_(lf::prop("q"), lf::not_(lf::prop("q")));
  CHECK(eval_hqptl({}, t, 0, g, {}));
  HQPTLFormula h;
  h.prefix = {{false, false, "q"}};
  h.body = lf::prop("q");
  CHECK_FALSE(eval_hqptl({}, t, 0, h, {}));
}

TEST_CASE("eval_s1s primitives and abbreviations") {
  std::map<std::string, uint64_t> fo{{"i", 3}, {"j", 4}};
  std::map<std::string, UPSet> so{{"X", UPSet{{0, 1, 0}, {1}}}};
  CHECK(eval_s1s(fo, so, sf::succ("i", "j"), {}));
  CHECK_FALSE(eval_s1s(fo, so, sf::succ("j", "i"), {}));
  CHECK(eval_s1s(fo, so, sf::member("X", "j"), {}));
  CHECK_FALSE(eval_s1s(fo, so, sf::not_(sf::member("X", "i")), {}));

  int c = 0;
  CHECK(eval_s1s(fo, so, s1s_abbrev::less("i", "j", c), {}));
  CHECK_FALSE(eval_s1s(fo, so, s1s_abbrev::less("j", "i", c), {}));
  CHECK(eval_s1s(fo, so, s1s_abbrev::leq("i", "i", c), {}));
  CHECK_FALSE(eval_s1s(fo, so, s1s_abbrev::eq_zero("i", c), {}));
  CHECK(eval_s1s({{"z", 0}}, {}, s1s_abbrev::eq_zero("z", c), {}));

  // SuccClosed holds for upward-closed sets only.
  CHECK_FALSE(eval_s1s({}, so, s1s_abbrev::succ_closed("X", c), {}));
  std::map<std::string, UPSet> closed{{"X", UPSet{{0, 0, 1}, {1}}}};
  CHECK(eval_s1s({}, closed, s1s_abbrev::succ_closed("X", c), {}));
}

TEST_CASE("eval_s1s quantifiers") {
  // ∀i ∃j Succ(i, j) within the horizon.
  SPtr f = sf::forall1("i", sf::exists1("j", sf::succ("i", "j")));
  CHECK(eval_s1s({}, {}, f, {}));
  // ∃i (i < i) is unsatisfiable.
  int c = 0;
  CHECK_FALSE(eval_s1s({}, {}, sf::exists1("i", s1s_abbrev::less("i", "i", c)),
                       {}));
  // ∃X ∀i X(i): the full set is in the bounded universe.
  CHECK(eval_s1s({}, {}, sf::exists2("X", sf::forall1("i", sf::member("X", "i"))),
                 {}));
}

TEST_CASE("horizon robustness: one extra period never flips the verdict") {
  // Run a small random suite twice, the second time with the universe period
  // bumped so horizons grow; verdicts must match.
  std::mt19937_64 rng(808);
  std::vector<std::string> props{"a"};
  for (int it = 0; it < 150; ++it) {
    TraceSet model;
    model.alphabet = {"a"};
    int n = 1 + rng() % 2;
    for (int k = 0; k < n; ++k)
      model.add("t" + std::to_string(k), random_trace(rng, props, 2, 2));
    // ∃̂/∀̂ with one or two time quantifiers.
    HPtr inner = (rng() & 1)
                     ? hf::implies(hf::less("i", "j"), hf::pred("a", "p", "j"))
                     : hf::or_(hf::pred("a", "p", "i"), hf::pred("a", "p", "j"));
    HPtr f = hf::forall_time("j", inner);
    f = (rng() & 1) ? hf::exists_time("i", f) : hf::forall_time("i", f);
    f = (rng() & 1) ? hf::exists_ctrace("p", f) : hf::forall_ctrace("p", f);

    EvalOptions base;
    bool v1 = eval_hyper(model, {}, f, base);
    // Grow every trace's period representation by unrolling once: same
    // denotation, larger raw horizon inputs.
    EvalOptions wider = base;
    wider.universe_period = base.universe_period + 1;
    wider.universe_prefix = base.universe_prefix + 1;
    bool v2 = eval_hyper(model, {}, f, wider);
    CHECK(v1 == v2);
  }
}
