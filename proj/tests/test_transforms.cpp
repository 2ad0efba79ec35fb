#include "doctest.h"

#include <random>

#include "hypertrace/eval.hpp"
#include "hypertrace/formula.hpp"
#include "hypertrace/syntax.hpp"
#include "hypertrace/transforms.hpp"

using namespace hypertrace;

namespace {

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

TraceSet random_model(std::mt19937_64& rng, const std::set<std::string>& props,
                      int max_traces) {
  TraceSet ts;
  ts.alphabet = props;
  std::vector<std::string> pv(props.begin(), props.end());
  int n = 1 + rng() % max_traces;
  for (int i = 0; i < n; ++i) {
    UPTrace t = random_trace(rng, pv, 2, 2);
    if (!ts.contains(t)) ts.add("m" + std::to_string(i), t);
  }
  return ts;
}

// Random formulas for the assignment-level flatten suite: free trace
// variables with any propositions, quantified trace variables reading a
// single proposition each, nested time quantifiers and connectives.
struct L31Gen {
  std::mt19937_64 rng;
  std::vector<std::string> props;
  int fresh = 0;

  HPtr gen(std::vector<std::string> tr, std::vector<std::string> tm,
           int depth) {
    auto pick = [&](const std::vector<std::string>& v) {
      return v[rng() % v.size()];
    };
    if (depth == 0 || rng() % 4 == 0) {
      if (!tm.empty()) {
        switch (rng() % 3) {
          case 0:
            if (!tr.empty()) return hf::pred(pick(props), pick(tr), pick(tm));
            [[fallthrough]];
          case 1: return hf::less(pick(tm), pick(tm));
          default: return hf::time_eq(pick(tm), pick(tm));
        }
      }
      return hf::taut();
    }
    switch (rng() % 8) {
      case 0: return hf::not_(gen(tr, tm, depth - 1));
      case 1: return hf::or_(gen(tr, tm, depth - 1), gen(tr, tm, depth - 1));
      case 2: return hf::and_(gen(tr, tm, depth - 1), gen(tr, tm, depth - 1));
      case 3:
        return hf::implies(gen(tr, tm, depth - 1), gen(tr, tm, depth - 1));
      case 4: {
        std::string v = "ti" + std::to_string(fresh++);
        tm.push_back(v);
        HPtr b = gen(tr, tm, depth - 1);
        return (rng() & 1) ? hf::exists_time(v, b) : hf::forall_time(v, b);
      }
      case 5: {
        std::string v = "ci" + std::to_string(fresh++);
        tr.push_back(v);
        HPtr b = gen(tr, tm, depth - 1);
        return (rng() & 1) ? hf::exists_ctrace(v, b) : hf::forall_ctrace(v, b);
      }
      case 6: {
        std::string v = "ui" + std::to_string(fresh++);
        tr.push_back(v);
        HPtr b = gen(tr, tm, depth - 1);
        return (rng() & 1) ? hf::exists_trace(v, b) : hf::forall_trace(v, b);
      }
      default:
        return hf::iff(gen(tr, tm, depth - 1), gen(tr, tm, depth - 1));
    }
  }
};

// Existence of a model within a small universe of candidate traces.
bool bounded_sat(const HPtr& f, const std::set<std::string>& props,
                 int max_model_size, const EvalOptions& opts) {
  std::vector<UPTrace> universe = enumerate_traces(props, 1, 1);
  size_t n = universe.size();
  for (size_t mask = 0; mask < (1ull << n); ++mask) {
    if (__builtin_popcountll(mask) > max_model_size) continue;
    TraceSet model;
    model.alphabet = props;
    int k = 0;
    for (size_t i = 0; i < n; ++i)
      if (mask & (1ull << i)) model.add("t" + std::to_string(k++), universe[i]);
    if (eval_hyper(model, {}, f, opts)) return true;
  }
  return false;
}

// In-shape random formulas E ∃̂^n ∀̂^m Q matrix.
struct ShapeGen {
  std::mt19937_64 rng;
  std::vector<std::string> props;
  int fresh = 0;

  HPtr matrix(const std::vector<std::string>& tr,
              const std::vector<std::string>& tm, int depth) {
    auto pick = [&](const std::vector<std::string>& v) {
      return v[rng() % v.size()];
    };
    if (depth == 0 || rng() % 3 == 0) {
      if (!tm.empty() && rng() % 4 == 0)
        return (rng() & 1) ? hf::less(pick(tm), pick(tm))
                           : hf::time_eq(pick(tm), pick(tm));
      if (!tr.empty() && !tm.empty())
        return hf::pred(pick(props), pick(tr), pick(tm));
      return hf::taut();
    }
    switch (rng() % 4) {
      case 0: return hf::not_(matrix(tr, tm, depth - 1));
      case 1:
        return hf::or_(matrix(tr, tm, depth - 1), matrix(tr, tm, depth - 1));
      case 2:
        return hf::and_(matrix(tr, tm, depth - 1), matrix(tr, tm, depth - 1));
      default:
        return hf::implies(matrix(tr, tm, depth - 1),
                           matrix(tr, tm, depth - 1));
    }
  }

  HPtr in_shape(int n_leading, int n_hats, int m_hats, int n_trailing) {
    std::vector<std::string> tr, tm;
    QuantifierPrefix prefix;
    for (int i = 0; i < n_leading; ++i) {
      std::string v = "e" + std::to_string(fresh++);
      if (rng() & 1) {
        prefix.push_back({QSort::Time, true, v});
        tm.push_back(v);
      } else {
        prefix.push_back({QSort::TraceU, true, v});
        tr.push_back(v);
      }
    }
    for (int i = 0; i < n_hats; ++i) {
      std::string v = "x" + std::to_string(fresh++);
      prefix.push_back({QSort::TraceC, true, v});
      tr.push_back(v);
    }
    for (int i = 0; i < m_hats; ++i) {
      std::string v = "y" + std::to_string(fresh++);
      prefix.push_back({QSort::TraceC, false, v});
      tr.push_back(v);
    }
    for (int i = 0; i < n_trailing; ++i) {
      std::string v = "q" + std::to_string(fresh++);
      if (rng() & 1) {
        prefix.push_back({QSort::Time, static_cast<bool>(rng() & 1), v});
        tm.push_back(v);
      } else {
        prefix.push_back({QSort::TraceU, static_cast<bool>(rng() & 1), v});
        tr.push_back(v);
      }
    }
    if (tm.empty()) {
      std::string v = "q" + std::to_string(fresh++);
      prefix.push_back({QSort::Time, true, v});
      tm.push_back(v);
    }
    return attach_prefix(prefix, matrix(tr, tm, 2));
  }
};

EvalOptions oracle_opts() {
  EvalOptions o;
  o.universe_prefix = 1;
  o.universe_period = 1;
  return o;
}

bool has_constrained(const HPtr& f) {
  if (!f) return false;
  if (is_constrained_quantifier(f->kind)) return true;
  return has_constrained(f->lhs) || has_constrained(f->rhs);
}

}  // namespace

TEST_CASE("flatten base cases") {
  HPtr a = hf::pred("x", "pi", "i");
  CHECK(equal(flatten(a, {"x"}, {"pi"}), hf::pred("x", "pi_x", "i")));
  CHECK(equal(flatten(a, {"x"}, {}), a));

  HPtr c = hf::exists_ctrace("p", hf::pred("x", "p", "i"));
  CHECK(equal(flatten(c, {"x", "y"}, {}), c));
}

TEST_CASE("flatten splits an unconstrained quantifier per proposition") {
  HPtr f = hf::exists_trace(
      "p", hf::exists_time(
               "i", hf::and_(hf::pred("a", "p", "i"), hf::pred("b", "p", "i"))));
  HPtr g = flatten(f, {"a", "b"}, {});
  HPtr expect = hf::exists_trace(
      "p_a",
      hf::exists_trace(
          "p_b", hf::exists_time("i", hf::and_(hf::pred("a", "p_a", "i"),
                                               hf::pred("b", "p_b", "i")))));
  CHECK(equal(g, expect));
}

TEST_CASE("flatten handles universal forms through duals") {
  HPtr f = hf::forall_trace("p", hf::exists_time("i", hf::pred("a", "p", "i")));
  CHECK(equal(flatten(f, {"a"}, {}),
              hf::forall_trace("p_a",
                               hf::exists_time("i", hf::pred("a", "p_a", "i")))));
}

TEST_CASE("flatten rejects non-free tracked variables") {
  HPtr f = hf::exists_trace("p", hf::exists_time("i", hf::pred("a", "p", "i")));
  CHECK_THROWS_AS(flatten(f, {"a"}, {"p"}), ShapeError);
}

TEST_CASE("assignment-level flatten correctness on random instances") {
  L31Gen gen{std::mt19937_64(1311), {"a", "b"}};
  std::mt19937_64& rng = gen.rng;
  std::set<std::string> props{"a", "b"};
  std::vector<std::string> pv(props.begin(), props.end());
  int ran = 0;
  for (int it = 0; it < 400; ++it) {
    std::vector<std::string> ftr{"fv0"};
    if (rng() & 1) ftr.push_back("fv1");
    std::vector<std::string> ftm{"ft0"};
    HPtr f = gen.gen(ftr, ftm, 3);

    TraceSet model = random_model(rng, props, 3);
    Assignment asg;
    for (const auto& v : ftr) asg.trace_part[v] = random_trace(rng, pv, 2, 2);
    asg.time_part["ft0"] = rng() % 4;

    FreeVars fv = free_vars(f);
    std::set<std::string> vc;
    for (const auto& v : fv.trace_vars)
      if (rng() & 1) vc.insert(v);

    FlattenResult fl = flatten_with_map(f, props, vc);

    // Split assignment: agrees with the original per proposition, with the
    // other propositions randomized.
    Assignment asg2;
    asg2.time_part = asg.time_part;
    for (const auto& v : fv.trace_vars)
      if (!vc.count(v)) asg2.trace_part[v] = asg.trace_part.at(v);
    for (const auto& [key, nv] : fl.var_map) {
      const auto& [orig, prop] = key;
      if (!vc.count(orig)) continue;
      UPTrace noise = random_trace(rng, pv, 2, 2);
      std::map<std::string, UPSet> supports;
      for (const auto& p : props)
        supports[p] = (p == prop) ? support_set(asg.trace_part.at(orig), prop)
                                  : support_set(noise, p);
      asg2.trace_part[nv] = from_support_sets(supports);
    }

    EvalOptions opts;
    CHECK(eval_hyper(model, asg, f, opts) ==
          eval_hyper(model, asg2, fl.formula, opts));
    ++ran;
  }
  CHECK(ran == 400);
}

TEST_CASE("closed formulas stay equisatisfiable under flatten") {
  L31Gen gen{std::mt19937_64(332), {"a"}};
  std::set<std::string> props{"a"};
  EvalOptions opts = oracle_opts();
  for (int it = 0; it < 60; ++it) {
    HPtr f = gen.gen({}, {}, 3);
    HPtr g = flatten(f, props, {});
    CHECK(bounded_sat(f, props, 2, opts) == bounded_sat(g, props, 2, opts));
  }
}

TEST_CASE("remove_forall reproduces the two-copy example") {
  HPtr matrix = hf::and_(hf::and_(hf::pred("a", "pi1", "i"),
                                  hf::not_(hf::pred("a", "pi2", "i"))),
                         hf::pred("b", "pi3", "j"));
  HPtr f = hf::exists_ctrace(
      "pi1",
      hf::exists_ctrace(
          "pi2", hf::forall_ctrace(
                     "pi3", hf::exists_time("i", hf::exists_time("j", matrix)))));
  HPtr g = remove_forall(f);

  auto conjunct = [&](const std::string& target, int copy) {
    std::string i = "i_" + std::to_string(copy);
    std::string j = "j_" + std::to_string(copy);
    return hf::exists_time(
        i, hf::exists_time(
               j, hf::and_(hf::and_(hf::pred("a", "pi1", i),
                                    hf::not_(hf::pred("a", "pi2", i))),
                           hf::pred("b", target, j))));
  };
  HPtr expect = hf::exists_ctrace(
      "pi1", hf::exists_ctrace(
                 "pi2", hf::and_(conjunct("pi1", 1), conjunct("pi2", 2))));
  CHECK(equal(g, expect));
}

TEST_CASE("remove_forall edge shapes") {
  HPtr f = hf::exists_ctrace("p", hf::exists_time("i", hf::pred("a", "p", "i")));
  CHECK(equal(remove_forall(f), f));  // m = 0

  HPtr g = hf::forall_ctrace("p", hf::exists_time("i", hf::pred("a", "p", "i")));
  CHECK_THROWS_AS(remove_forall(g), ShapeError);  // n = 0, m = 1

  // n = 1, m = 2: one conjunct, both universals mapped to the existential.
  HPtr h = hf::exists_ctrace(
      "x", hf::forall_ctrace(
               "y1", hf::forall_ctrace(
                         "y2", hf::exists_time(
                                   "i", hf::and_(hf::pred("a", "y1", "i"),
                                                 hf::pred("b", "y2", "i"))))));
  HPtr expect = hf::exists_ctrace(
      "x", hf::exists_time("i_1", hf::and_(hf::pred("a", "x", "i_1"),
                                           hf::pred("b", "x", "i_1"))));
  CHECK(equal(remove_forall(h), expect));
}

TEST_CASE("universal block equals its substitution conjunction on induced "
          "models") {
  std::mt19937_64 rng(474747);
  std::set<std::string> props{"a", "b"};
  std::vector<std::string> pv(props.begin(), props.end());
  int ran = 0;
  for (int it = 0; it < 300; ++it) {
    int n = 1 + rng() % 2, m = 1 + rng() % 2;
    ShapeGen gen{std::mt19937_64(rng()), pv};
    HPtr f = gen.in_shape(0, n, m, 1 + rng() % 2);
    ConstrainedSplit sp = split_constrained_prefix(f);

    Assignment asg;
    TraceSet model;
    model.alphabet = props;
    for (size_t k = 0; k < sp.exists_hats.size(); ++k) {
      UPTrace t = random_trace(rng, pv, 1, 2);
      asg.trace_part[sp.exists_hats[k]] = t;
      if (!model.contains(t)) model.add("t" + std::to_string(k), t);
    }

    QuantifierPrefix full;
    for (const auto& v : sp.forall_hats)
      full.push_back({QSort::TraceC, false, v});
    full.insert(full.end(), sp.trailing.begin(), sp.trailing.end());
    HPtr lhs = attach_prefix(full, sp.matrix);

    HPtr rhs = remove_forall(f);
    for (size_t k = 0; k < sp.leading_exists.size() + sp.exists_hats.size();
         ++k)
      rhs = rhs->lhs;

    EvalOptions opts;
    CHECK(eval_hyper(model, asg, lhs, opts) ==
          eval_hyper(model, asg, rhs, opts));
    ++ran;
  }
  CHECK(ran == 300);
}

TEST_CASE("models without constrained existentials are subset-closed") {
  std::mt19937_64 rng(828282);
  std::set<std::string> props{"a", "b"};
  std::vector<std::string> pv(props.begin(), props.end());
  L31Gen gen{std::mt19937_64(603), pv};
  int ran = 0;
  for (int it = 0; it < 300; ++it) {
    HPtr f;
    while (true) {
      HPtr cand = gen.gen({"fv0"}, {"ft0"}, 3);
      HPtr nnf = to_nnf(to_prenex(cand));
      if (!has_constrained(nnf)) {
        f = to_prenex(nnf);
        break;
      }
      bool has_ce = false;
      auto walk = [&](auto&& self, const HPtr& g) -> void {
        if (!g) return;
        if (g->kind == HKind::ExistsTraceC) has_ce = true;
        self(self, g->lhs);
        self(self, g->rhs);
      };
      walk(walk, nnf);
      if (!has_ce) {
        f = to_prenex(nnf);
        break;
      }
    }
    TraceSet model = random_model(rng, props, 3);
    TraceSet sub;
    sub.alphabet = props;
    for (size_t i = 0; i < model.size(); ++i)
      if (rng() & 1) sub.add(model.names[i], model.traces[i]);

    Assignment asg;
    asg.trace_part["fv0"] = random_trace(rng, pv, 2, 2);
    asg.time_part["ft0"] = rng() % 3;

    EvalOptions opts;
    if (eval_hyper(model, asg, f, opts)) CHECK(eval_hyper(sub, asg, f, opts));
    ++ran;
  }
  CHECK(ran == 300);
}

TEST_CASE("remove_exists_hats turns the block unconstrained") {
  HPtr f = hf::exists_ctrace("p", hf::exists_time("i", hf::pred("a", "p", "i")));
  CHECK(equal(remove_exists_hats(f),
              hf::exists_trace("p",
                               hf::exists_time("i", hf::pred("a", "p", "i")))));
  HPtr g = hf::exists_trace("p", hf::forall_time("i", hf::pred("a", "p", "i")));
  CHECK(equal(remove_exists_hats(g), g));
  HPtr h = hf::exists_ctrace("p", hf::forall_ctrace("r", hf::taut()));
  CHECK_THROWS_AS(remove_exists_hats(h), ShapeError);
}

TEST_CASE("to_unconstrained removes all constrained quantifiers and "
          "preserves bounded satisfiability") {
  std::mt19937_64 rng(51015);
  std::set<std::string> props{"a", "b"};
  std::vector<std::string> pv(props.begin(), props.end());
  EvalOptions opts = oracle_opts();
  int ran = 0;
  for (int it = 0; it < 120; ++it) {
    ShapeGen gen{std::mt19937_64(rng()), pv};
    HPtr f = gen.in_shape(rng() % 2, 1 + rng() % 2, rng() % 2, rng() % 2);
    HPtr g = to_unconstrained(f);
    CHECK_FALSE(has_constrained(g));
    CHECK(bounded_sat(f, props, 2, opts) == bounded_sat(g, props, 2, opts));
    ++ran;
  }
  CHECK(ran == 120);
}

TEST_CASE("relax_existentials weakens constrained existentials only") {
  HPtr f = hf::forall_ctrace(
      "p",
      hf::exists_ctrace("r", hf::exists_time("i", hf::pred("a", "p", "i"))));
  CHECK(equal(relax_existentials(f),
              hf::forall_ctrace(
                  "p", hf::exists_trace(
                           "r", hf::exists_time("i", hf::pred("a", "p", "i"))))));
  HPtr h = hf::forall_ctrace("p", hf::exists_time("i", hf::pred("a", "p", "i")));
  CHECK(equal(relax_existentials(h), h));
}

TEST_CASE("every model of a formula models its relaxation") {
  std::mt19937_64 rng(62016);
  std::set<std::string> props{"a"};
  std::vector<std::string> pv(props.begin(), props.end());
  for (int it = 0; it < 300; ++it) {
    ShapeGen gen{std::mt19937_64(rng()), pv};
    HPtr f = gen.in_shape(0, 1 + rng() % 2, rng() % 2, 1);
    HPtr g = relax_existentials(f);
    TraceSet model = random_model(rng, props, 2);
    EvalOptions opts;
    if (eval_hyper(model, {}, f, opts)) CHECK(eval_hyper(model, {}, g, opts));
  }
}

TEST_CASE("to_s1s direct unfolding") {
  HPtr f = hf::exists_trace("p", hf::forall_time("i", hf::pred("x", "p", "i")));
  ToS1SResult r = to_s1s(f, {"x"});
  CHECK(equal(r.formula,
              sf::exists2("p_x", sf::forall1("i", sf::member("p_x", "i")))));
  CHECK(r.var_map.at({"p", "x"}) == "p_x");

  HPtr g = hf::forall_time("i", hf::time_eq("i", "i"));
  CHECK(equal(to_s1s(g, {}).formula, sf::forall1("i", sf::eq("i", "i"))));

  CHECK_THROWS_AS(to_s1s(hf::exists_ctrace("p", hf::taut()), {}), ShapeError);
}

TEST_CASE("satisfaction transfers between eval_hyper and eval_s1s") {
  std::mt19937_64 rng(73321);
  std::set<std::string> props{"a", "b"};
  std::vector<std::string> pv(props.begin(), props.end());
  L31Gen gen{std::mt19937_64(1999), pv};
  int ran = 0;
  while (ran < 300) {
    HPtr f = gen.gen({"fv0"}, {"ft0"}, 3);
    if (has_constrained(f)) continue;

    Assignment asg;
    asg.trace_part["fv0"] = random_trace(rng, pv, 2, 2);
    asg.time_part["ft0"] = rng() % 3;

    ToS1SResult s1s = to_s1s(f, props);
    std::map<std::string, uint64_t> fo{{"ft0", asg.time_part["ft0"]}};
    std::map<std::string, UPSet> so;
    for (const auto& [key, var] : s1s.var_map) {
      const auto& [orig, prop] = key;
      if (asg.trace_part.count(orig))
        so[var] = support_set(asg.trace_part.at(orig), prop);
    }
    TraceSet no_model;
    no_model.alphabet = props;
    EvalOptions opts;
    CHECK(eval_hyper(no_model, asg, f, opts) ==
          eval_s1s(fo, so, s1s.formula, opts));
    ++ran;
  }
  CHECK(ran == 300);
}

TEST_CASE("to_hyper base cases follow the standard translation") {
  ToHyperResult r = to_hyper(sf::member("X", "i"));
  CHECK(equal(r.formula, hf::pred("X", "pi_X", "i")));
  CHECK(r.props == std::set<std::string>{"X"});

  CHECK(equal(to_hyper(sf::eq("i", "j")).formula, hf::time_eq("i", "j")));

  ToHyperResult s = to_hyper(sf::succ("i", "j"));
  HPtr expect = hf::and_(
      hf::less("i", "j"),
      hf::forall_time("k_0", hf::implies(hf::less("i", "k_0"),
                                         hf::or_(hf::time_eq("j", "k_0"),
                                                 hf::less("j", "k_0")))));
  CHECK(equal(s.formula, expect));
}

TEST_CASE("to_hyper agrees with eval_s1s under the boolean translation") {
  std::mt19937_64 rng(90125);
  std::vector<std::string> so_vars{"X", "Y"};
  int ran = 0;
  for (int it = 0; it < 300; ++it) {
    int fresh = 0;
    auto gen = [&](auto&& self, std::vector<std::string> fo, int depth) -> SPtr {
      auto pick_fo = [&]() { return fo[rng() % fo.size()]; };
      if (depth == 0 || rng() % 4 == 0) {
        switch (rng() % 4) {
          case 0: return sf::member(so_vars[rng() % 2], pick_fo());
          case 1: return sf::eq(pick_fo(), pick_fo());
          case 2: return sf::succ(pick_fo(), pick_fo());
          default: return sf::member(so_vars[rng() % 2], pick_fo());
        }
      }
      switch (rng() % 4) {
        case 0: return sf::not_(self(self, fo, depth - 1));
        case 1:
          return sf::or_(self(self, fo, depth - 1), self(self, fo, depth - 1));
        case 2:
          return sf::and_(self(self, fo, depth - 1), self(self, fo, depth - 1));
        default: {
          std::string v = "n" + std::to_string(fresh++);
          fo.push_back(v);
          SPtr b = self(self, fo, depth - 1);
          return (rng() & 1) ? sf::exists1(v, b) : sf::forall1(v, b);
        }
      }
    };
    SPtr f = gen(gen, {"f0"}, 3);

    auto rnd_set = [&]() {
      UPSet s;
      int np = rng() % 3, nq = 1 + rng() % 2;
      for (int i = 0; i < np; ++i) s.prefix.push_back(rng() & 1);
      for (int i = 0; i < nq; ++i) s.period.push_back(rng() & 1);
      return canonicalize(s);
    };
    std::map<std::string, UPSet> so{{"X", rnd_set()}, {"Y", rnd_set()}};
    std::map<std::string, uint64_t> fo{{"f0", rng() % 3}};

    ToHyperResult hy = to_hyper(f);
    Assignment asg;
    asg.time_part["f0"] = fo["f0"];
    for (const auto& [sov, tv] : hy.var_map) {
      std::map<std::string, UPSet> supports;
      for (const auto& p : hy.props)
        supports[p] = (p == sov) ? so.at(sov) : UPSet{{}, {0}};
      asg.trace_part[tv] = from_support_sets(supports);
    }
    TraceSet no_model;
    EvalOptions opts;
    CHECK(eval_s1s(fo, so, f, opts) ==
          eval_hyper(no_model, asg, hy.formula, opts));
    ++ran;
  }
  CHECK(ran == 300);
}

TEST_CASE("ltl_to_fo frozen shapes") {
  int c = 0;
  CHECK(equal(ltl_to_fo(lf::prop("a"), "p", "t0", c),
              hf::pred("a", "p", "t0")));
  c = 0;
  HPtr next = ltl_to_fo(lf::next(lf::prop("a")), "p", "t0", c);
  HPtr expect = hf::exists_time(
      "j0",
      hf::and_(hf::and_(hf::less("t0", "j0"),
                        hf::forall_time(
                            "k1", hf::implies(hf::less("t0", "k1"),
                                              hf::or_(hf::time_eq("j0", "k1"),
                                                      hf::less("j0", "k1"))))),
               hf::pred("a", "p", "j0")));
  CHECK(equal(next, expect));
}

TEST_CASE("ltl_to_fo agrees with the lasso evaluator at sampled anchors") {
  std::mt19937_64 rng(112233);
  std::vector<std::string> props{"a", "b"};
  int ran = 0;
  for (int it = 0; it < 500; ++it) {
    auto gen = [&](auto&& self, int depth) -> LPtr {
      if (depth == 0 || rng() % 4 == 0) {
        if (rng() % 8 == 0) return lf::true_();
        return lf::prop(props[rng() % 2]);
      }
      switch (rng() % 4) {
        case 0: return lf::not_(self(self, depth - 1));
        case 1: return lf::or_(self(self, depth - 1), self(self, depth - 1));
        case 2: return lf::next(self(self, depth - 1));
        default:
          return lf::until(self(self, depth - 1), self(self, depth - 1));
      }
    };
    LPtr f = gen(gen, 3);
    UPTrace t = random_trace(rng, props, 2, 2);
    uint64_t anchor = rng() % 4;

    int c = 0;
    HPtr fo = ltl_to_fo(f, "p", "t0", c);
    Assignment asg;
    asg.trace_part["p"] = t;
    asg.time_part["t0"] = anchor;
    TraceSet no_model;
    CHECK(eval_hyper(no_model, asg, fo, {}) ==
          eval_ltl_lasso(suffix(t, anchor), f));
    ++ran;
  }
  CHECK(ran == 500);
}

TEST_CASE("tr_hqptl_to_hyper structure") {
  HQPTLFormula f;
  f.prefix = {{false, true, "p"}};
  f.body = lf::globally(lf::iprop("a", "p"));
  HPtr h = tr_hqptl_to_hyper(f);
  CHECK(h->kind == HKind::ForallTraceC);
  CHECK(h->lhs->kind == HKind::ExistsTime);  // the zero-anchored time

  HQPTLFormula g;
  g.prefix = {{true, false, "q"}};
  g.body = lf::prop("q");
  HPtr hg = tr_hqptl_to_hyper(g);
  CHECK(hg->kind == HKind::ExistsTrace);
  CHECK(hg->a == "pi_q");
  FreeVars fv = free_vars(hg);
  CHECK(fv.trace_vars.empty());
  CHECK(fv.time_vars.empty());
}

TEST_CASE("tr_hqptl_to_hyper satisfaction matches eval_hqptl") {
  std::mt19937_64 rng(445566);
  int ran = 0;
  for (int it = 0; it < 200; ++it) {
    HQPTLFormula f;
    HQuant qt{static_cast<bool>(rng() & 1), true, "p"};
    HQuant qp{static_cast<bool>(rng() & 1), false, "q"};
    if (rng() & 1)
      f.prefix = {qt, qp};
    else
      f.prefix = {qp, qt};
    auto atom = [&]() -> LPtr {
      return (rng() & 1) ? lf::iprop("a", "p") : LPtr(lf::prop("q"));
    };
    switch (rng() % 5) {
      case 0: f.body = lf::until(atom(), atom()); break;
      case 1: f.body = lf::next(atom()); break;
      case 2: f.body = lf::or_(lf::not_(atom()), lf::next(atom())); break;
      case 3: f.body = lf::not_(lf::until(atom(), atom())); break;
      default: f.body = lf::and_(atom(), lf::next(lf::not_(atom())));
    }

    TraceSet model;
    model.alphabet = {"a"};
    int n = 1 + rng() % 2;
    for (int k = 0; k < n; ++k) {
      UPTrace t = random_trace(rng, {"a"}, 2, 2);
      if (!model.contains(t)) model.add("t" + std::to_string(k), t);
    }

    EvalOptions opts;
    CHECK(eval_hqptl({}, model, 0, f, opts) ==
          eval_hyper(model, {}, tr_hqptl_to_hyper(f), opts));
    ++ran;
  }
  CHECK(ran == 200);
}

TEST_CASE("transforms preserve well-formedness") {
  std::mt19937_64 rng(8080);
  std::set<std::string> props{"a", "b"};
  std::vector<std::string> pv(props.begin(), props.end());
  for (int it = 0; it < 200; ++it) {
    ShapeGen gen{std::mt19937_64(rng()), pv};
    HPtr f = gen.in_shape(rng() % 2, 1 + rng() % 2, rng() % 2, rng() % 2);
    validate(f);
    validate(remove_forall(f));
    validate(to_unconstrained(f));
    validate(relax_existentials(f));
    validate(flatten(f, props, {}));
  }
}

TEST_CASE("normal forms preserve satisfaction on random triples") {
  L31Gen gen{std::mt19937_64(7321), {"a", "b"}};
  std::mt19937_64& rng = gen.rng;
  std::set<std::string> props{"a", "b"};
  std::vector<std::string> pv(props.begin(), props.end());
  int ran = 0;
  for (int it = 0; it < 1000; ++it) {
    HPtr f = gen.gen({"fv0"}, {"ft0"}, 3);
    TraceSet model = random_model(rng, props, 2);
    Assignment asg;
    asg.trace_part["fv0"] = random_trace(rng, pv, 2, 2);
    asg.time_part["ft0"] = rng() % 3;
    EvalOptions opts;
    bool base = eval_hyper(model, asg, f, opts);
    CHECK(eval_hyper(model, asg, to_nnf(f), opts) == base);
    CHECK(eval_hyper(model, asg, to_prenex(f), opts) == base);
    ++ran;
  }
  CHECK(ran == 1000);
}
