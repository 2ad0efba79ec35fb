#include "hypertrace/minsky.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <map>
#include <queue>
#include <set>
#include <sstream>

namespace hypertrace {

const char* to_string(CounterOp op) {
  switch (op) {
    case CounterOp::Inc: return "inc";
    case CounterOp::Dec: return "dec";
    case CounterOp::IsZero: return "isZero";
  }
  return "?";
}

void MinskyMachine::validate() const {
  std::set<std::string> names(states.begin(), states.end());
  if (names.size() != states.size())
    throw ParseError("duplicate machine state");
  if (!names.count(initial))
    throw ParseError("initial state '" + initial + "' not declared");
  for (const auto& t : delta) {
    if (!names.count(t.from) || !names.count(t.to))
      throw ParseError("transition references an undeclared state");
    if (t.counter != 1 && t.counter != 2)
      throw ParseError("counter index must be 1 or 2");
  }
  // Generated proposition names must not collide.
  std::set<std::string> props;
  auto put = [&](const std::string& p) {
    if (!props.insert(p).second)
      throw ParseError("state names collide in the encoding alphabet: " + p);
  };
  for (const auto& q : states) {
    put(q);
    put(q + "_to");
    put(q + "_from");
  }
  for (const char* fixed :
       {"mem1", "mem2", "inc", "dec", "isZero", "to1", "to2", "guess",
        "guessed"})
    put(fixed);
}

std::vector<std::pair<MinskyTransition, Configuration>> step(
    const MinskyMachine& m, const Configuration& c) {
  std::vector<std::pair<MinskyTransition, Configuration>> out;
  for (const auto& t : m.delta) {
    if (t.from != c.state) continue;
    uint64_t value = t.counter == 1 ? c.c1 : c.c2;
    uint64_t next_value = value;
    switch (t.op) {
      case CounterOp::Inc:
        next_value = value + 1;
        break;
      case CounterOp::Dec:
        if (value == 0) continue;
        next_value = value - 1;
        break;
      case CounterOp::IsZero:
        if (value != 0) continue;
        break;
    }
    Configuration d{t.to, c.c1, c.c2};
    (t.counter == 1 ? d.c1 : d.c2) = next_value;
    out.push_back({t, d});
  }
  return out;
}

std::optional<Lasso> find_lasso(const MinskyMachine& m, uint64_t counter_cap,
                                uint64_t step_cap) {
  m.validate();
  Configuration init{m.initial, 0, 0};
  // Bounded BFS collecting the reachable configuration graph.
  std::map<Configuration, int> id;
  std::vector<Configuration> configs;
  std::vector<std::vector<int>> succ;
  std::vector<int> bfs_parent;
  std::queue<int> work;
  auto add = [&](const Configuration& c, int parent) {
    auto it = id.find(c);
    if (it != id.end()) return it->second;
    int k = static_cast<int>(configs.size());
    id.emplace(c, k);
    configs.push_back(c);
    succ.emplace_back();
    bfs_parent.push_back(parent);
    work.push(k);
    return k;
  };
  add(init, -1);
  while (!work.empty() && configs.size() <= step_cap) {
    int k = work.front();
    work.pop();
    for (const auto& [t, d] : step(m, configs[k])) {
      if (d.c1 > counter_cap || d.c2 > counter_cap) continue;
      int j = add(d, k);
      succ[k].push_back(j);
    }
  }
  // A lasso exists when some reachable configuration reaches itself.
  int n = static_cast<int>(configs.size());
  for (int c = 0; c < n; ++c) {
    // BFS from c back to c
    std::vector<int> par(n, -2);
    std::queue<int> q;
    for (int d : succ[c])
      if (par[d] == -2) {
        par[d] = -1;
        q.push(d);
      }
    bool direct = false;
    for (int d : succ[c]) direct |= d == c;
    int closer = -1;
    while (!q.empty() && closer == -1 && !direct) {
      int x = q.front();
      q.pop();
      for (int d : succ[x]) {
        if (d == c) {
          closer = x;
          break;
        }
        if (par[d] == -2) {
          par[d] = x;
          q.push(d);
        }
      }
    }
    if (!direct && closer == -1) continue;
    Lasso l;
    // stem: BFS path from the initial configuration to c
    std::vector<int> stem_ids;
    for (int x = c; x != -1; x = bfs_parent[x]) stem_ids.push_back(x);
    std::reverse(stem_ids.begin(), stem_ids.end());
    for (size_t i = 0; i + 1 < stem_ids.size(); ++i)
      l.stem.push_back(configs[stem_ids[i]]);
    // cycle: c ... back to c
    l.cycle.push_back(configs[c]);
    if (!direct) {
      std::vector<int> back;
      for (int x = closer; x != -1; x = par[x]) back.push_back(x);
      std::reverse(back.begin(), back.end());
      for (int x : back) l.cycle.push_back(configs[x]);
    }
    return l;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------- encoding

MinskyProps encoding_props(const MinskyMachine& m) {
  MinskyProps p;
  for (const auto& q : m.states) p.config.push_back(q);
  p.config.push_back("mem1");
  p.config.push_back("mem2");
  for (const auto& q : m.states) {
    p.transition.push_back(q + "_to");
    p.transition.push_back(q + "_from");
  }
  for (const char* s : {"inc", "dec", "isZero", "to1", "to2"})
    p.transition.push_back(s);
  p.guess = {"guess", "guessed"};
  return p;
}

std::set<std::string> MinskyProps::all() const {
  std::set<std::string> s(config.begin(), config.end());
  s.insert(transition.begin(), transition.end());
  s.insert(guess.begin(), guess.end());
  return s;
}

namespace {

// exactlyOne as the disjunction of "this one and none of the others".
HPtr exactly_one(const std::vector<HPtr>& atoms) {
  std::vector<HPtr> cases;
  for (size_t i = 0; i < atoms.size(); ++i) {
    std::vector<HPtr> conj{atoms[i]};
    for (size_t j = 0; j < atoms.size(); ++j)
      if (j != i) conj.push_back(hf::not_(atoms[j]));
    cases.push_back(hf::and_all(conj));
  }
  return hf::or_all(cases);
}

HPtr leq_time(const std::string& a, const std::string& b) {
  return hf::or_(hf::time_eq(a, b), hf::less(a, b));
}

struct Names {
  const MinskyMachine& m;
  HPtr to(const std::string& q, const std::string& pi,
          const std::string& i) const {
    return hf::pred(q + "_to", pi, i);
  }
  HPtr from(const std::string& q, const std::string& pi,
            const std::string& i) const {
    return hf::pred(q + "_from", pi, i);
  }
  HPtr state(const std::string& q, const std::string& pi,
             const std::string& i) const {
    return hf::pred(q, pi, i);
  }
  HPtr opp(CounterOp op, const std::string& pi, const std::string& i) const {
    return hf::pred(to_string(op), pi, i);
  }
  HPtr toc(int c, const std::string& pi, const std::string& i) const {
    return hf::pred(c == 1 ? "to1" : "to2", pi, i);
  }
  HPtr mem(int c, const std::string& pi, const std::string& i) const {
    return hf::pred(c == 1 ? "mem1" : "mem2", pi, i);
  }
};

HPtr single_tr(const MinskyMachine& m, const std::string& pi,
               const std::string& i) {
  Names nm{m};
  std::vector<HPtr> tos, froms, tocs, ops;
  for (const auto& q : m.states) {
    tos.push_back(nm.to(q, pi, i));
    froms.push_back(nm.from(q, pi, i));
  }
  tocs = {nm.toc(1, pi, i), nm.toc(2, pi, i)};
  ops = {nm.opp(CounterOp::Inc, pi, i), nm.opp(CounterOp::Dec, pi, i),
         nm.opp(CounterOp::IsZero, pi, i)};
  return hf::and_all({exactly_one(tos), exactly_one(froms), exactly_one(tocs),
                      exactly_one(ops)});
}

HPtr same_tr(const MinskyMachine& m, const std::string& pi,
             const std::string& i, const std::string& j) {
  Names nm{m};
  std::vector<HPtr> parts;
  for (const auto& q : m.states)
    parts.push_back(hf::iff(nm.to(q, pi, i), nm.to(q, pi, j)));
  for (const auto& q : m.states)
    parts.push_back(hf::iff(nm.from(q, pi, i), nm.from(q, pi, j)));
  for (int c : {1, 2})
    parts.push_back(hf::iff(nm.toc(c, pi, i), nm.toc(c, pi, j)));
  for (CounterOp op : {CounterOp::Inc, CounterOp::Dec, CounterOp::IsZero})
    parts.push_back(hf::iff(nm.opp(op, pi, i), nm.opp(op, pi, j)));
  return hf::and_all(parts);
}

HPtr valid_tr(const MinskyMachine& m, const std::string& pi,
              const std::string& i) {
  Names nm{m};
  std::vector<HPtr> cases;
  for (const auto& t : m.delta) {
    cases.push_back(hf::and_all({nm.from(t.from, pi, i),
                                 nm.toc(t.counter, pi, i),
                                 nm.opp(t.op, pi, i), nm.to(t.to, pi, i)}));
  }
  return hf::or_all(cases);
}

HPtr same_state(const MinskyMachine& m, const std::string& pi,
                const std::string& i, const std::string& j) {
  Names nm{m};
  std::vector<HPtr> parts;
  for (const auto& q : m.states)
    parts.push_back(hf::iff(nm.state(q, pi, i), nm.state(q, pi, j)));
  std::vector<HPtr> atoms;
  for (const auto& q : m.states) atoms.push_back(nm.state(q, pi, i));
  parts.push_back(exactly_one(atoms));
  return hf::and_all(parts);
}

HPtr good_states(const MinskyMachine& m, const std::string& pi,
                 const std::string& pi2, const std::string& i) {
  Names nm{m};
  std::vector<HPtr> froms, tos;
  for (const auto& q : m.states) {
    froms.push_back(hf::iff(nm.from(q, pi, i), nm.state(q, pi, i)));
    tos.push_back(hf::iff(nm.to(q, pi, i), nm.state(q, pi2, i)));
  }
  return hf::and_(hf::or_all(froms), hf::or_all(tos));
}

HPtr stop_multiple_guess(const std::string& pg, const std::string& i,
                         const std::string& j) {
  return hf::implies(hf::or_(hf::pred("guess", pg, i),
                             hf::pred("guessed", pg, i)),
                     hf::pred("guessed", pg, j));
}

HPtr op_formula(const MinskyMachine& m, const std::string& pi, int c,
                const std::string& pi2, const std::string& pg,
                const std::string& i, const std::string& ip,
                const std::string& im) {
  Names nm{m};
  int cbar = 3 - c;
  std::vector<HPtr> parts;
  parts.push_back(hf::iff(nm.mem(cbar, pi, i), nm.mem(cbar, pi2, i)));
  parts.push_back(hf::implies(
      nm.opp(CounterOp::IsZero, pi, i),
      hf::and_(hf::not_(nm.mem(c, pi, i)), hf::not_(nm.mem(c, pi2, i)))));
  parts.push_back(hf::implies(
      hf::or_(hf::not_(hf::pred("guess", pg, i)), hf::pred("guessed", pg, i)),
      hf::iff(nm.mem(c, pi, i), nm.mem(c, pi2, i))));
  parts.push_back(hf::implies(
      hf::and_all({hf::not_(hf::pred("guessed", pg, i)),
                   hf::pred("guess", pg, i), nm.opp(CounterOp::Inc, pi, i)}),
      hf::and_all({hf::not_(nm.mem(c, pi, i)), nm.mem(c, pi2, i),
                   hf::not_(nm.mem(c, pi2, ip))})));
  parts.push_back(hf::implies(
      hf::and_all({hf::not_(hf::pred("guessed", pg, i)),
                   hf::pred("guess", pg, i), nm.opp(CounterOp::Dec, pi, i)}),
      hf::and_all({nm.mem(c, pi, i), hf::not_(nm.mem(c, pi2, i)),
                   nm.mem(c, pi2, im)})));
  return hf::and_all(parts);
}

void need_args(const std::vector<std::string>& args, size_t n,
               const char* kind) {
  if (args.size() != n)
    throw ShapeError(std::string(kind) + " takes " + std::to_string(n) +
                     " arguments, got " + std::to_string(args.size()));
}

}  // namespace

HPtr helper_formula(HelperKind kind, const MinskyMachine& m,
                    const std::vector<std::string>& args) {
  m.validate();
  switch (kind) {
    case HelperKind::SingleTr:
      need_args(args, 2, "singleTr");
      return single_tr(m, args[0], args[1]);
    case HelperKind::SameTr:
      need_args(args, 3, "sameTr");
      return same_tr(m, args[0], args[1], args[2]);
    case HelperKind::ValidTr:
      need_args(args, 2, "validTr");
      return valid_tr(m, args[0], args[1]);
    case HelperKind::SameState:
      need_args(args, 3, "sameState");
      return same_state(m, args[0], args[1], args[2]);
    case HelperKind::GoodStates:
      need_args(args, 3, "goodStates");
      return good_states(m, args[0], args[1], args[2]);
    case HelperKind::StopMultipleGuess:
      need_args(args, 3, "stopMultipleGuess");
      return stop_multiple_guess(args[0], args[1], args[2]);
    case HelperKind::Op: {
      need_args(args, 7, "op");
      if (args[1] != "1" && args[1] != "2")
        throw ShapeError("op counter must be 1 or 2");
      return op_formula(m, args[0], args[1] == "1" ? 1 : 2, args[2], args[3],
                        args[4], args[5], args[6]);
    }
  }
  throw ShapeError("unknown helper kind");
}

HPtr encode(const MinskyMachine& m) {
  m.validate();
  Names nm{m};
  const std::string i0 = "i0", i = "i", ip = "i_plus", im = "i_minus",
                    j = "j", p = "p", p2 = "p_next", pq = "p_init",
                    pg = "p_guess";

  HPtr guard = hf::and_all(
      {leq_time(i0, j), leq_time(im, i), hf::less(i, ip),
       hf::implies(hf::less(i, j), leq_time(ip, j)),
       hf::implies(hf::time_eq(im, i), hf::time_eq(i, i0)),
       hf::implies(hf::less(j, i), leq_time(j, im))});

  std::vector<HPtr> body;
  body.push_back(hf::implies(nm.mem(1, p, ip), nm.mem(1, p, i)));
  body.push_back(hf::implies(nm.mem(2, p, ip), nm.mem(2, p, i)));
  body.push_back(nm.state(m.initial, pq, i));
  body.push_back(hf::implies(
      nm.state(m.initial, p, i),
      hf::and_(hf::not_(nm.mem(1, p, i)), hf::not_(nm.mem(2, p, i)))));
  body.push_back(stop_multiple_guess(pg, i, ip));
  body.push_back(single_tr(m, p, i));
  body.push_back(same_tr(m, p, i, ip));
  body.push_back(valid_tr(m, p, i));
  body.push_back(same_state(m, p, i, ip));
  body.push_back(good_states(m, p, p2, i));
  body.push_back(
      hf::implies(nm.toc(1, p, i), op_formula(m, p, 1, p2, pg, i, ip, im)));
  body.push_back(
      hf::implies(nm.toc(2, p, i), op_formula(m, p, 2, p2, pg, i, ip, im)));

  HPtr matrix = hf::implies(guard, hf::and_all(body));

  HPtr f = hf::exists_trace(pg, matrix);
  f = hf::exists_ctrace(pq, f);
  f = hf::exists_ctrace(p2, f);
  f = hf::forall_ctrace(p, f);
  f = hf::forall_time(j, f);
  f = hf::exists_time(im, f);
  f = hf::exists_time(ip, f);
  f = hf::forall_time(i, f);
  f = hf::exists_time(i0, f);
  return f;
}

TraceSet witness_model(const MinskyMachine& m, const Lasso& l) {
  m.validate();
  if (l.cycle.empty()) throw ShapeError("lasso cycle must be nonempty");
  // Path with the taken transitions; every link must match Δ.
  std::vector<Configuration> path = l.stem;
  path.insert(path.end(), l.cycle.begin(), l.cycle.end());
  std::vector<std::pair<Configuration, MinskyTransition>> steps;
  for (size_t k = 0; k < path.size(); ++k) {
    const Configuration& cur = path[k];
    const Configuration& nxt =
        k + 1 < path.size() ? path[k + 1] : l.cycle.front();
    bool found = false;
    for (const auto& [t, d] : step(m, cur)) {
      if (d == nxt) {
        steps.push_back({cur, t});
        found = true;
        break;
      }
    }
    if (!found) throw ShapeError("invalid lasso: no transition between steps");
  }

  MinskyProps props = encoding_props(m);
  TraceSet ts;
  ts.alphabet = props.all();
  int k = 0;
  for (const auto& [cfg, tr] : steps) {
    Valuation constant{cfg.state, tr.from + "_from", tr.to + "_to",
                       tr.counter == 1 ? "to1" : "to2", to_string(tr.op)};
    UPTrace t;
    uint64_t unary = std::max(cfg.c1, cfg.c2);
    for (uint64_t pos = 0; pos < unary; ++pos) {
      Valuation v = constant;
      if (pos < cfg.c1) v.insert("mem1");
      if (pos < cfg.c2) v.insert("mem2");
      t.prefix.push_back(std::move(v));
    }
    t.period.push_back(constant);
    t = canonicalize(t);
    if (!ts.contains(t)) ts.add("s" + std::to_string(k++), t);
  }
  return ts;
}

// -------------------------------------------------------------- file format

namespace {

struct MCursor {
  const std::string& s;
  size_t i = 0;

  void skip() {
    while (i < s.size()) {
      if (isspace(static_cast<unsigned char>(s[i])))
        ++i;
      else if (s[i] == '/' && i + 1 < s.size() && s[i + 1] == '/')
        while (i < s.size() && s[i] != '\n') ++i;
      else
        break;
    }
  }
  bool eat(char c) {
    skip();
    if (i < s.size() && s[i] == c) {
      ++i;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!eat(c))
      throw ParseError(std::string("expected '") + c + "' in machine file");
  }
  bool eat_word(const char* w) {
    skip();
    size_t n = strlen(w);
    if (s.compare(i, n, w) == 0) {
      i += n;
      return true;
    }
    return false;
  }
  std::string ident() {
    skip();
    size_t start = i;
    if (i < s.size() &&
        (isalpha(static_cast<unsigned char>(s[i])) || s[i] == '_')) {
      ++i;
      while (i < s.size() && (isalnum(static_cast<unsigned char>(s[i])) ||
                              s[i] == '_' || s[i] == '\''))
        ++i;
    }
    if (start == i) throw ParseError("expected identifier in machine file");
    return s.substr(start, i - start);
  }
  int digit() {
    skip();
    if (i < s.size() && (s[i] == '1' || s[i] == '2')) return s[i++] - '0';
    throw ParseError("expected counter index 1 or 2");
  }
  bool done() {
    skip();
    return i >= s.size();
  }
};

CounterOp parse_op(const std::string& w) {
  if (w == "inc") return CounterOp::Inc;
  if (w == "dec") return CounterOp::Dec;
  if (w == "isZero") return CounterOp::IsZero;
  throw ParseError("unknown counter operation '" + w + "'");
}

}  // namespace

MinskyMachine parse_machine(const std::string& text) {
  MCursor c{text};
  MinskyMachine m;
  if (!c.eat_word("states")) throw ParseError("machine file needs 'states:'");
  c.expect(':');
  while (true) {
    m.states.push_back(c.ident());
    if (c.eat(';')) break;
    c.expect(',');
  }
  if (!c.eat_word("init")) throw ParseError("machine file needs 'init:'");
  c.expect(':');
  m.initial = c.ident();
  c.expect(';');
  if (!c.eat_word("delta")) throw ParseError("machine file needs 'delta:'");
  c.expect(':');
  c.skip();
  if (!c.eat(';')) {
    while (true) {
      c.expect('(');
      MinskyTransition t;
      t.from = c.ident();
      c.expect(',');
      t.counter = c.digit();
      c.expect(',');
      t.op = parse_op(c.ident());
      c.expect(',');
      t.to = c.ident();
      c.expect(')');
      m.delta.push_back(t);
      if (c.eat(';')) break;
      c.expect(',');
    }
  }
  if (!c.done()) throw ParseError("trailing input in machine file");
  m.validate();
  return m;
}

std::string render_machine(const MinskyMachine& m) {
  std::ostringstream out;
  out << "states: ";
  for (size_t i = 0; i < m.states.size(); ++i)
    out << (i ? ", " : "") << m.states[i];
  out << ";\ninit: " << m.initial << ";\ndelta:";
  for (size_t i = 0; i < m.delta.size(); ++i) {
    const auto& t = m.delta[i];
    out << (i ? ", " : " ") << "(" << t.from << ", " << t.counter << ", "
        << to_string(t.op) << ", " << t.to << ")";
  }
  out << ";\n";
  return out.str();
}

}  // namespace hypertrace
