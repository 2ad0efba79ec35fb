#include "hypertrace/syntax.hpp"

#include <cctype>
#include <cstring>
#include <map>
#include <sstream>

namespace hypertrace {

// ------------------------------------------------------------------ lexer

namespace {

struct Token {
  enum Kind { Ident, Punct, End } kind;
  std::string text;
  size_t line;
};

std::vector<Token> lex(const std::string& s) {
  std::vector<Token> out;
  size_t i = 0, line = 1;
  auto peek2 = [&](const char* p) {
    return s.compare(i, strlen(p), p) == 0;
  };
  while (i < s.size()) {
    char c = s[i];
    if (c == '\n') {
      ++line;
      ++i;
      continue;
    }
    if (isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '/' && i + 1 < s.size() && s[i + 1] == '/') {
      while (i < s.size() && s[i] != '\n') ++i;
      continue;
    }
    if (isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = i;
      while (i < s.size() && (isalnum(static_cast<unsigned char>(s[i])) ||
                              s[i] == '_' || s[i] == '\''))
        ++i;
      out.push_back({Token::Ident, s.substr(start, i - start), line});
      continue;
    }
    if (peek2("<->")) {
      out.push_back({Token::Punct, "<->", line});
      i += 3;
      continue;
    }
    if (peek2("->")) {
      out.push_back({Token::Punct, "->", line});
      i += 2;
      continue;
    }
    if (peek2("<=")) {
      out.push_back({Token::Punct, "<=", line});
      i += 2;
      continue;
    }
    if (strchr("().,;:<=!&|[]{}0", c)) {
      out.push_back({Token::Punct, std::string(1, c), line});
      ++i;
      continue;
    }
    throw ParseError("lexical error at line " + std::to_string(line) +
                     ": unexpected '" + std::string(1, c) + "'");
  }
  out.push_back({Token::End, "", line});
  return out;
}

struct TokenStream {
  std::vector<Token> toks;
  size_t pos = 0;

  const Token& peek() const { return toks[pos]; }
  bool at_ident(const char* w = nullptr) const {
    return peek().kind == Token::Ident && (!w || peek().text == w);
  }
  bool eat_ident(const char* w) {
    if (at_ident(w)) {
      ++pos;
      return true;
    }
    return false;
  }
  bool eat(const char* p) {
    if (peek().kind == Token::Punct && peek().text == p) {
      ++pos;
      return true;
    }
    return false;
  }
  void expect(const char* p) {
    if (!eat(p)) fail(std::string("expected '") + p + "'");
  }
  std::string ident(const char* what = "identifier") {
    if (peek().kind != Token::Ident) fail(std::string("expected ") + what);
    return toks[pos++].text;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("parse error at line " + std::to_string(peek().line) +
                     ": " + msg +
                     (peek().kind == Token::End ? " (at end of input)"
                                                : ", got '" + peek().text +
                                                      "'"));
  }
  void done() {
    if (peek().kind != Token::End) fail("trailing input");
  }
  std::set<std::string> all_idents() const {
    std::set<std::string> s;
    for (const auto& t : toks)
      if (t.kind == Token::Ident) s.insert(t.text);
    return s;
  }
};

std::set<std::string> parse_props_header(TokenStream& ts) {
  std::set<std::string> props;
  if (ts.at_ident("props")) {
    ++ts.pos;
    ts.expect(":");
    if (!ts.eat(";")) {
      while (true) {
        props.insert(ts.ident("proposition"));
        if (ts.eat(";")) break;
        ts.expect(",");
      }
    }
  }
  return props;
}

// Scoped variable environment with silent renaming on rebinding.
struct VarEnv {
  enum Sort { Trace, Time, SetV, NatV, PropV };
  struct Binding {
    std::string orig, renamed;
    Sort sort;
  };
  std::vector<Binding> scope;
  std::map<std::string, Sort> ever_bound;  // by renamed name
  std::set<std::string> used_names;
  std::vector<std::string>* warnings;

  explicit VarEnv(std::set<std::string> used, std::vector<std::string>* w)
      : used_names(std::move(used)), warnings(w) {}

  const Binding* lookup(const std::string& name) const {
    for (auto it = scope.rbegin(); it != scope.rend(); ++it)
      if (it->orig == name) return &*it;
    return nullptr;
  }

  bool bound_on_path(const std::string& name) const {
    for (const auto& b : scope)
      if (b.renamed == name || b.orig == name) return true;
    return false;
  }

  std::string bind(const std::string& name, Sort sort) {
    std::string chosen = name;
    bool clash = bound_on_path(name);
    auto prev = ever_bound.find(name);
    if (!clash && prev != ever_bound.end() && prev->second != sort)
      clash = true;  // keep sorts globally disjoint
    if (clash) {
      do {
        chosen += "'";
      } while (used_names.count(chosen) || ever_bound.count(chosen));
      if (warnings)
        warnings->push_back("variable '" + name + "' rebound; renamed to '" +
                            chosen + "'");
    }
    used_names.insert(chosen);
    ever_bound.emplace(chosen, sort);
    scope.push_back({name, chosen, sort});
    return chosen;
  }
  void pop() { scope.pop_back(); }
};

// ----------------------------------------------------------- hyper parser

struct HyperParser {
  TokenStream& ts;
  const std::set<std::string>& props;
  VarEnv env;

  HyperParser(TokenStream& t, const std::set<std::string>& p,
              std::vector<std::string>* w)
      : ts(t), props(p), env(t.all_idents(), w) {}

  HPtr formula() {
    if (ts.at_ident("exists") || ts.at_ident("forall")) {
      bool ex = ts.peek().text == "exists";
      ++ts.pos;
      std::string sort = ts.ident("sort");
      std::string var = ts.ident("variable");
      ts.expect(".");
      if (sort == "trace" || sort == "ctrace") {
        std::string v = env.bind(var, VarEnv::Trace);
        HPtr body = formula();
        env.pop();
        if (sort == "ctrace")
          return ex ? hf::exists_ctrace(v, body) : hf::forall_ctrace(v, body);
        return ex ? hf::exists_trace(v, body) : hf::forall_trace(v, body);
      }
      if (sort == "time") {
        std::string v = env.bind(var, VarEnv::Time);
        HPtr body = formula();
        env.pop();
        return ex ? hf::exists_time(v, body) : hf::forall_time(v, body);
      }
      ts.fail("unknown sort '" + sort + "'");
    }
    return iff_level();
  }

  HPtr iff_level() {
    HPtr l = imp_level();
    if (ts.eat("<->")) return hf::iff(l, iff_level());
    return l;
  }
  HPtr imp_level() {
    HPtr l = or_level();
    if (ts.eat("->")) return hf::implies(l, imp_level());
    return l;
  }
  HPtr or_level() {
    HPtr l = and_level();
    while (ts.eat("|")) l = hf::or_(l, and_level());
    return l;
  }
  HPtr and_level() {
    HPtr l = unary();
    while (ts.eat("&")) l = hf::and_(l, unary());
    return l;
  }
  HPtr unary() {
    if (ts.eat("!")) return hf::not_(unary());
    if (ts.eat("(")) {
      HPtr f = formula();
      ts.expect(")");
      return f;
    }
    return atom();
  }

  std::string resolve(const std::string& name, VarEnv::Sort want,
                      const char* role) {
    const auto* b = env.lookup(name);
    if (!b) ts.fail("unbound variable '" + name + "'");
    if (b->sort != want)
      throw SortError("sort clash: '" + name + "' used as " + role);
    return b->renamed;
  }

  HPtr atom() {
    std::string head = ts.ident("atom");
    if (ts.eat("(")) {
      if (!props.count(head)) ts.fail("unknown proposition '" + head + "'");
      std::string tv = ts.ident("trace variable");
      ts.expect(",");
      std::string iv = ts.ident("time variable");
      ts.expect(")");
      return hf::pred(head, resolve(tv, VarEnv::Trace, "a trace variable"),
                      resolve(iv, VarEnv::Time, "a time variable"));
    }
    if (ts.eat("<")) {
      std::string rhs = ts.ident("time variable");
      return hf::less(resolve(head, VarEnv::Time, "a time variable"),
                      resolve(rhs, VarEnv::Time, "a time variable"));
    }
    if (ts.eat("=")) {
      std::string rhs = ts.ident("time variable");
      return hf::time_eq(resolve(head, VarEnv::Time, "a time variable"),
                         resolve(rhs, VarEnv::Time, "a time variable"));
    }
    ts.fail("expected atom");
  }
};

// ------------------------------------------------------------- S1S parser

struct S1SParser {
  TokenStream& ts;
  VarEnv env;
  int fresh = 0;

  S1SParser(TokenStream& t, std::vector<std::string>* w)
      : ts(t), env(t.all_idents(), w) {}

  SPtr formula() {
    if (ts.at_ident("exists") || ts.at_ident("forall")) {
      bool ex = ts.peek().text == "exists";
      ++ts.pos;
      std::string sort = ts.ident("sort");
      std::string var = ts.ident("variable");
      ts.expect(".");
      if (sort == "set") {
        std::string v = env.bind(var, VarEnv::SetV);
        SPtr body = formula();
        env.pop();
        return ex ? sf::exists2(v, body) : sf::forall2(v, body);
      }
      if (sort == "nat") {
        std::string v = env.bind(var, VarEnv::NatV);
        SPtr body = formula();
        env.pop();
        return ex ? sf::exists1(v, body) : sf::forall1(v, body);
      }
      ts.fail("unknown sort '" + sort + "' (expected set or nat)");
    }
    return iff_level();
  }

  SPtr iff_level() {
    SPtr l = imp_level();
    if (ts.eat("<->")) {
      SPtr r = iff_level();
      return sf::and_(sf::or_(sf::not_(l), r), sf::or_(sf::not_(r), l));
    }
    return l;
  }
  SPtr imp_level() {
    SPtr l = or_level();
    if (ts.eat("->")) return sf::or_(sf::not_(l), imp_level());
    return l;
  }
  SPtr or_level() {
    SPtr l = and_level();
    while (ts.eat("|")) l = sf::or_(l, and_level());
    return l;
  }
  SPtr and_level() {
    SPtr l = unary();
    while (ts.eat("&")) l = sf::and_(l, unary());
    return l;
  }
  SPtr unary() {
    if (ts.eat("!")) return sf::not_(unary());
    if (ts.eat("(")) {
      SPtr f = formula();
      ts.expect(")");
      return f;
    }
    return atom();
  }

  std::string resolve(const std::string& name, VarEnv::Sort want,
                      const char* role) {
    const auto* b = env.lookup(name);
    if (!b) ts.fail("unbound variable '" + name + "'");
    if (b->sort != want)
      throw SortError("sort clash: '" + name + "' used as " + role);
    return b->renamed;
  }

  SPtr atom() {
    std::string head = ts.ident("atom");
    if (head == "succ") {
      ts.expect("(");
      std::string i = ts.ident("nat variable");
      ts.expect(",");
      std::string j = ts.ident("nat variable");
      ts.expect(")");
      return sf::succ(resolve(i, VarEnv::NatV, "a nat variable"),
                      resolve(j, VarEnv::NatV, "a nat variable"));
    }
    if (head == "subset") {
      ts.expect("(");
      std::string x = ts.ident("set variable");
      ts.expect(",");
      std::string y = ts.ident("set variable");
      ts.expect(")");
      return s1s_abbrev::subset(resolve(x, VarEnv::SetV, "a set variable"),
                                resolve(y, VarEnv::SetV, "a set variable"),
                                fresh);
    }
    if (head == "succClosed") {
      ts.expect("(");
      std::string x = ts.ident("set variable");
      ts.expect(")");
      return s1s_abbrev::succ_closed(
          resolve(x, VarEnv::SetV, "a set variable"), fresh);
    }
    if (ts.eat("(")) {
      std::string i = ts.ident("nat variable");
      ts.expect(")");
      return sf::member(resolve(head, VarEnv::SetV, "a set variable"),
                        resolve(i, VarEnv::NatV, "a nat variable"));
    }
    std::string lhs = resolve(head, VarEnv::NatV, "a nat variable");
    if (ts.eat("=")) {
      if (ts.eat("0")) return s1s_abbrev::eq_zero(lhs, fresh);
      return sf::eq(lhs, resolve(ts.ident("nat variable"), VarEnv::NatV,
                                 "a nat variable"));
    }
    if (ts.eat("<=")) {
      return s1s_abbrev::leq(lhs,
                             resolve(ts.ident("nat variable"), VarEnv::NatV,
                                     "a nat variable"),
                             fresh);
    }
    if (ts.eat("<")) {
      return s1s_abbrev::less(lhs,
                              resolve(ts.ident("nat variable"), VarEnv::NatV,
                                      "a nat variable"),
                              fresh);
    }
    ts.fail("expected S1S atom");
  }
};

// ------------------------------------------------------- LTL/HQPTL parser

struct LtlParser {
  TokenStream& ts;
  bool allow_indexed;
  // HQPTL scope: bound trace vars and bound prop vars; empty for plain LTL.
  const std::set<std::string>* trace_vars;
  const std::set<std::string>* prop_vars;
  const std::set<std::string>* props;  // declared alphabet (indexed atoms)

  LPtr formula() { return iff_level(); }

  LPtr iff_level() {
    LPtr l = imp_level();
    if (ts.eat("<->")) return lf::iff(l, iff_level());
    return l;
  }
  LPtr imp_level() {
    LPtr l = or_level();
    if (ts.eat("->")) return lf::implies(l, imp_level());
    return l;
  }
  LPtr or_level() {
    LPtr l = and_level();
    while (ts.eat("|")) l = lf::or_(l, and_level());
    return l;
  }
  LPtr and_level() {
    LPtr l = until_level();
    while (ts.eat("&")) l = lf::and_(l, until_level());
    return l;
  }
  LPtr until_level() {
    LPtr l = unary();
    if (ts.at_ident("U")) {
      ++ts.pos;
      return lf::until(l, until_level());
    }
    return l;
  }
  LPtr unary() {
    if (ts.eat("!")) return lf::not_(unary());
    if (ts.at_ident("X")) {
      ++ts.pos;
      return lf::next(unary());
    }
    if (ts.at_ident("F")) {
      ++ts.pos;
      return lf::finally_(unary());
    }
    if (ts.at_ident("G")) {
      ++ts.pos;
      return lf::globally(unary());
    }
    if (ts.eat("(")) {
      LPtr f = formula();
      ts.expect(")");
      return f;
    }
    return atom();
  }
  LPtr atom() {
    if (ts.eat_ident("true")) return lf::true_();
    if (ts.eat_ident("false")) return lf::not_(lf::true_());
    std::string head = ts.ident("atom");
    if (ts.eat("[")) {
      if (!allow_indexed) ts.fail("indexed atom in ltl dialect");
      std::string tv = ts.ident("trace variable");
      ts.expect("]");
      if (!trace_vars->count(tv)) ts.fail("unbound variable '" + tv + "'");
      if (props && !props->count(head))
        ts.fail("unknown proposition '" + head + "'");
      return lf::iprop(head, tv);
    }
    if (allow_indexed && prop_vars && !prop_vars->count(head))
      ts.fail("unbound variable '" + head + "'");
    return lf::prop(head);
  }
};

}  // namespace

ParsedHyper parse_hyper(const std::string& text) {
  TokenStream ts{lex(text)};
  ParsedHyper out;
  out.alphabet = parse_props_header(ts);
  HyperParser p(ts, out.alphabet, &out.warnings);
  out.formula = p.formula();
  ts.done();
  validate(out.formula, &out.alphabet);
  return out;
}

ParsedS1S parse_s1s(const std::string& text) {
  TokenStream ts{lex(text)};
  ParsedS1S out;
  S1SParser p(ts, &out.warnings);
  out.formula = p.formula();
  ts.done();
  s1s_free_vars(out.formula);  // sort consistency
  return out;
}

ParsedLtl parse_ltl(const std::string& text) {
  TokenStream ts{lex(text)};
  ParsedLtl out;
  LtlParser p{ts, false, nullptr, nullptr, nullptr};
  out.formula = p.formula();
  ts.done();
  return out;
}

ParsedHqptl parse_hqptl(const std::string& text) {
  TokenStream ts{lex(text)};
  ParsedHqptl out;
  out.alphabet = parse_props_header(ts);
  std::set<std::string> tvars, pvars;
  while (ts.at_ident("exists") || ts.at_ident("forall")) {
    bool ex = ts.peek().text == "exists";
    ++ts.pos;
    std::string sort = ts.ident("sort");
    std::string var = ts.ident("variable");
    ts.expect(".");
    if (sort == "trace") {
      if (tvars.count(var) || pvars.count(var))
        ts.fail("variable '" + var + "' bound twice");
      tvars.insert(var);
      out.formula.prefix.push_back({ex, true, var});
    } else if (sort == "prop") {
      if (tvars.count(var) || pvars.count(var))
        ts.fail("variable '" + var + "' bound twice");
      pvars.insert(var);
      out.alphabet.insert(var);
      out.formula.prefix.push_back({ex, false, var});
    } else {
      ts.fail("unknown sort '" + sort + "' (expected trace or prop)");
    }
  }
  LtlParser p{ts, true, &tvars, &pvars, &out.alphabet};
  out.formula.body = p.formula();
  ts.done();
  return out;
}

// --------------------------------------------------------------- renderers

namespace {

// Precedence: iff 1, implies 2, or 3, and 4, unary 5, atom 6.
// Quantifiers extend to the right and get parenthesized below prec 1.

void render_hyper(const HPtr& f, int min_prec, std::ostream& out) {
  auto quant = [&](const char* kw, const char* sort) {
    if (min_prec > 0) out << "(";
    out << kw << " " << sort << " " << f->a << " . ";
    render_hyper(f->lhs, 0, out);
    if (min_prec > 0) out << ")";
  };
  auto binary = [&](const char* op, int prec, bool right_assoc) {
    if (min_prec > prec) out << "(";
    render_hyper(f->lhs, right_assoc ? prec + 1 : prec, out);
    out << " " << op << " ";
    render_hyper(f->rhs, right_assoc ? prec : prec + 1, out);
    if (min_prec > prec) out << ")";
  };
  switch (f->kind) {
    case HKind::ExistsTrace: quant("exists", "trace"); return;
    case HKind::ForallTrace: quant("forall", "trace"); return;
    case HKind::ExistsTraceC: quant("exists", "ctrace"); return;
    case HKind::ForallTraceC: quant("forall", "ctrace"); return;
    case HKind::ExistsTime: quant("exists", "time"); return;
    case HKind::ForallTime: quant("forall", "time"); return;
    case HKind::Iff: binary("<->", 1, true); return;
    case HKind::Implies: binary("->", 2, true); return;
    case HKind::Or: binary("|", 3, false); return;
    case HKind::And: binary("&", 4, false); return;
    case HKind::Not:
      out << "!";
      render_hyper(f->lhs, 5, out);
      return;
    case HKind::Less: out << f->a << " < " << f->b; return;
    case HKind::TimeEq: out << f->a << " = " << f->b; return;
    case HKind::Pred: out << f->a << "(" << f->b << ", " << f->c << ")"; return;
  }
}

void render_s1s(const SPtr& f, int min_prec, std::ostream& out) {
  auto quant = [&](const char* kw, const char* sort) {
    if (min_prec > 0) out << "(";
    out << kw << " " << sort << " " << f->a << " . ";
    render_s1s(f->lhs, 0, out);
    if (min_prec > 0) out << ")";
  };
  switch (f->kind) {
    case SKind::Exists2: quant("exists", "set"); return;
    case SKind::Forall2: quant("forall", "set"); return;
    case SKind::Exists1: quant("exists", "nat"); return;
    case SKind::Forall1: quant("forall", "nat"); return;
    case SKind::Or:
      if (min_prec > 3) out << "(";
      render_s1s(f->lhs, 3, out);
      out << " | ";
      render_s1s(f->rhs, 4, out);
      if (min_prec > 3) out << ")";
      return;
    case SKind::And:
      if (min_prec > 4) out << "(";
      render_s1s(f->lhs, 4, out);
      out << " & ";
      render_s1s(f->rhs, 5, out);
      if (min_prec > 4) out << ")";
      return;
    case SKind::Not:
      out << "!";
      render_s1s(f->lhs, 5, out);
      return;
    case SKind::Eq: out << f->a << " = " << f->b; return;
    case SKind::Succ: out << "succ(" << f->a << ", " << f->b << ")"; return;
    case SKind::Member: out << f->a << "(" << f->b << ")"; return;
  }
}

void render_ltl(const LPtr& f, int min_prec, std::ostream& out) {
  // atoms 7, unary 6, U 5, & 4, | 3, -> 2, <-> 1 (only core nodes occur)
  switch (f->kind) {
    case LKind::True: out << "true"; return;
    case LKind::Prop:
      out << f->prop;
      if (!f->tvar.empty()) out << "[" << f->tvar << "]";
      return;
    case LKind::Not:
      out << "!";
      render_ltl(f->lhs, 6, out);
      return;
    case LKind::Next:
      out << "X ";
      render_ltl(f->lhs, 6, out);
      return;
    case LKind::Until:
      if (min_prec > 5) out << "(";
      render_ltl(f->lhs, 6, out);
      out << " U ";
      render_ltl(f->rhs, 5, out);
      if (min_prec > 5) out << ")";
      return;
    case LKind::Or:
      if (min_prec > 3) out << "(";
      render_ltl(f->lhs, 3, out);
      out << " | ";
      render_ltl(f->rhs, 4, out);
      if (min_prec > 3) out << ")";
      return;
  }
}

}  // namespace

std::string render(const HPtr& f) {
  std::ostringstream out;
  auto props = used_props(f);
  if (!props.empty()) {
    out << "props:";
    bool first = true;
    for (const auto& p : props) {
      out << (first ? " " : ", ") << p;
      first = false;
    }
    out << ";\n";
  }
  render_hyper(f, 0, out);
  return out.str();
}

std::string render(const SPtr& f) {
  std::ostringstream out;
  render_s1s(f, 0, out);
  return out.str();
}

std::string render(const LPtr& f) {
  std::ostringstream out;
  render_ltl(f, 0, out);
  return out.str();
}

std::string render(const HQPTLFormula& f) {
  std::ostringstream out;
  std::set<std::string> props = ltl_props(f.body);
  for (const auto& q : f.prefix)
    if (!q.is_trace) props.erase(q.var);
  if (!props.empty()) {
    out << "props:";
    bool first = true;
    for (const auto& p : props) {
      out << (first ? " " : ", ") << p;
      first = false;
    }
    out << ";\n";
  }
  for (const auto& q : f.prefix)
    out << (q.is_exists ? "exists " : "forall ")
        << (q.is_trace ? "trace " : "prop ") << q.var << " . ";
  render_ltl(f.body, 0, out);
  return out.str();
}

// ---------------------------------------------------------- normalization

namespace {

HPtr nnf_rec(const HPtr& f, bool positive) {
  switch (f->kind) {
    case HKind::ExistsTrace:
      return positive ? hf::exists_trace(f->a, nnf_rec(f->lhs, true))
                      : hf::forall_trace(f->a, nnf_rec(f->lhs, false));
    case HKind::ForallTrace:
      return positive ? hf::forall_trace(f->a, nnf_rec(f->lhs, true))
                      : hf::exists_trace(f->a, nnf_rec(f->lhs, false));
    case HKind::ExistsTraceC:
      return positive ? hf::exists_ctrace(f->a, nnf_rec(f->lhs, true))
                      : hf::forall_ctrace(f->a, nnf_rec(f->lhs, false));
    case HKind::ForallTraceC:
      return positive ? hf::forall_ctrace(f->a, nnf_rec(f->lhs, true))
                      : hf::exists_ctrace(f->a, nnf_rec(f->lhs, false));
    case HKind::ExistsTime:
      return positive ? hf::exists_time(f->a, nnf_rec(f->lhs, true))
                      : hf::forall_time(f->a, nnf_rec(f->lhs, false));
    case HKind::ForallTime:
      return positive ? hf::forall_time(f->a, nnf_rec(f->lhs, true))
                      : hf::exists_time(f->a, nnf_rec(f->lhs, false));
    case HKind::Not:
      return nnf_rec(f->lhs, !positive);
    case HKind::Or:
      return positive
                 ? hf::or_(nnf_rec(f->lhs, true), nnf_rec(f->rhs, true))
                 : hf::and_(nnf_rec(f->lhs, false), nnf_rec(f->rhs, false));
    case HKind::And:
      return positive
                 ? hf::and_(nnf_rec(f->lhs, true), nnf_rec(f->rhs, true))
                 : hf::or_(nnf_rec(f->lhs, false), nnf_rec(f->rhs, false));
    case HKind::Implies:
      return positive
                 ? hf::or_(nnf_rec(f->lhs, false), nnf_rec(f->rhs, true))
                 : hf::and_(nnf_rec(f->lhs, true), nnf_rec(f->rhs, false));
    case HKind::Iff:
      return positive
                 ? hf::or_(hf::and_(nnf_rec(f->lhs, true),
                                    nnf_rec(f->rhs, true)),
                           hf::and_(nnf_rec(f->lhs, false),
                                    nnf_rec(f->rhs, false)))
                 : hf::or_(hf::and_(nnf_rec(f->lhs, true),
                                    nnf_rec(f->rhs, false)),
                           hf::and_(nnf_rec(f->lhs, false),
                                    nnf_rec(f->rhs, true)));
    default:
      return positive ? f : hf::not_(f);
  }
}

struct Freshener {
  std::set<std::string> claimed;
  std::vector<std::string>* warnings = nullptr;

  std::string freshen(const std::string& name) {
    std::string chosen = name;
    while (claimed.count(chosen)) chosen += "'";
    if (chosen != name && warnings)
      warnings->push_back("variable '" + name + "' renamed to '" + chosen +
                          "' for unique binding");
    claimed.insert(chosen);
    return chosen;
  }

  HPtr walk(const HPtr& f, std::map<std::string, std::string>& env) {
    if (is_quantifier(f->kind)) {
      std::string v = freshen(f->a);
      auto saved = env.find(f->a) != env.end()
                       ? std::optional<std::string>(env[f->a])
                       : std::nullopt;
      env[f->a] = v;
      HPtr body = walk(f->lhs, env);
      if (saved)
        env[f->a] = *saved;
      else
        env.erase(f->a);
      return std::make_shared<const HyperFormula>(f->kind, v, "", "", body,
                                                  nullptr);
    }
    auto ren = [&](const std::string& n) {
      auto it = env.find(n);
      return it == env.end() ? n : it->second;
    };
    switch (f->kind) {
      case HKind::Less:
        return hf::less(ren(f->a), ren(f->b));
      case HKind::TimeEq:
        return hf::time_eq(ren(f->a), ren(f->b));
      case HKind::Pred:
        return hf::pred(f->a, ren(f->b), ren(f->c));
      case HKind::Not:
        return hf::not_(walk(f->lhs, env));
      default: {
        HPtr l = walk(f->lhs, env);
        HPtr r = walk(f->rhs, env);
        return std::make_shared<const HyperFormula>(f->kind, "", "", "", l, r);
      }
    }
  }
};

struct PrenexPull {
  Freshener freshener;  // used to rename duplicated Iff copies

  struct Pulled {
    QuantifierPrefix prefix;
    HPtr matrix;
  };

  static QuantEntry entry_of(const HPtr& f) {
    switch (f->kind) {
      case HKind::ExistsTrace: return {QSort::TraceU, true, f->a};
      case HKind::ForallTrace: return {QSort::TraceU, false, f->a};
      case HKind::ExistsTraceC: return {QSort::TraceC, true, f->a};
      case HKind::ForallTraceC: return {QSort::TraceC, false, f->a};
      case HKind::ExistsTime: return {QSort::Time, true, f->a};
      default: return {QSort::Time, false, f->a};
    }
  }

  static void flip(QuantifierPrefix& p) {
    for (auto& e : p) e.is_exists = !e.is_exists;
  }

  Pulled pull(const HPtr& f) {
    if (is_quantifier(f->kind)) {
      Pulled b = pull(f->lhs);
      QuantifierPrefix p{entry_of(f)};
      p.insert(p.end(), b.prefix.begin(), b.prefix.end());
      return {std::move(p), b.matrix};
    }
    switch (f->kind) {
      case HKind::Not: {
        Pulled b = pull(f->lhs);
        flip(b.prefix);
        return {std::move(b.prefix), hf::not_(b.matrix)};
      }
      case HKind::Or:
      case HKind::And: {
        Pulled l = pull(f->lhs), r = pull(f->rhs);
        QuantifierPrefix p = std::move(l.prefix);
        p.insert(p.end(), r.prefix.begin(), r.prefix.end());
        HPtr m = f->kind == HKind::Or ? hf::or_(l.matrix, r.matrix)
                                      : hf::and_(l.matrix, r.matrix);
        return {std::move(p), m};
      }
      case HKind::Implies: {
        Pulled l = pull(f->lhs), r = pull(f->rhs);
        flip(l.prefix);
        QuantifierPrefix p = std::move(l.prefix);
        p.insert(p.end(), r.prefix.begin(), r.prefix.end());
        return {std::move(p), hf::implies(l.matrix, r.matrix)};
      }
      case HKind::Iff: {
        if (is_quantifier_free(f)) return {{}, f};
        // Duplicate into (l -> r) & (r' -> l') with fresh bound names in the
        // second copies, then pull the conjunction.
        std::map<std::string, std::string> env;
        HPtr l2 = freshener.walk(f->lhs, env);
        env.clear();
        HPtr r2 = freshener.walk(f->rhs, env);
        return pull(hf::and_(hf::implies(f->lhs, f->rhs),
                             hf::implies(r2, l2)));
      }
      default:
        return {{}, f};
    }
  }
};

void collect_all_names(const HPtr& f, std::set<std::string>& out) {
  if (is_quantifier(f->kind)) {
    out.insert(f->a);
    collect_all_names(f->lhs, out);
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
      if (f->lhs) collect_all_names(f->lhs, out);
      if (f->rhs) collect_all_names(f->rhs, out);
      return;
  }
}

}  // namespace

HPtr to_nnf(const HPtr& f) { return nnf_rec(f, true); }

HPtr freshen_bound(const HPtr& f, std::vector<std::string>* warnings) {
  Freshener fr;
  FreeVars fv = free_vars(f);
  fr.claimed = fv.trace_vars;
  fr.claimed.insert(fv.time_vars.begin(), fv.time_vars.end());
  fr.warnings = warnings;
  std::map<std::string, std::string> env;
  return fr.walk(f, env);
}

HPtr to_prenex(const HPtr& f) {
  HPtr g = freshen_bound(f, nullptr);
  PrenexPull pp;
  collect_all_names(g, pp.freshener.claimed);
  auto [prefix, matrix] = pp.pull(g);
  return attach_prefix(prefix, matrix);
}

bool is_quantifier_free(const HPtr& f) {
  if (!f) return true;
  if (is_quantifier(f->kind)) return false;
  return is_quantifier_free(f->lhs) && is_quantifier_free(f->rhs);
}

bool is_prenex(const HPtr& f) {
  HPtr g = f;
  while (g && is_quantifier(g->kind)) g = g->lhs;
  return is_quantifier_free(g);
}

QuantifierPrefix quantifier_prefix(const HPtr& f) {
  QuantifierPrefix p;
  HPtr g = f;
  while (g && is_quantifier(g->kind)) {
    p.push_back(PrenexPull::entry_of(g));
    g = g->lhs;
  }
  if (!is_quantifier_free(g))
    throw ShapeError("formula is not in prenex form");
  return p;
}

HPtr prenex_matrix(const HPtr& f) {
  HPtr g = f;
  while (g && is_quantifier(g->kind)) g = g->lhs;
  if (!is_quantifier_free(g))
    throw ShapeError("formula is not in prenex form");
  return g;
}

HPtr attach_prefix(const QuantifierPrefix& prefix, HPtr matrix) {
  HPtr out = std::move(matrix);
  for (auto it = prefix.rbegin(); it != prefix.rend(); ++it) {
    switch (it->sort) {
      case QSort::TraceU:
        out = it->is_exists ? hf::exists_trace(it->var, out)
                            : hf::forall_trace(it->var, out);
        break;
      case QSort::TraceC:
        out = it->is_exists ? hf::exists_ctrace(it->var, out)
                            : hf::forall_ctrace(it->var, out);
        break;
      case QSort::Time:
        out = it->is_exists ? hf::exists_time(it->var, out)
                            : hf::forall_time(it->var, out);
        break;
    }
  }
  return out;
}

HPtr substitute_trace_vars(const HPtr& f,
                           const std::map<std::string, std::string>& sub) {
  if (sub.empty()) return f;
  if (is_quantifier(f->kind)) {
    if (is_trace_quantifier(f->kind) && sub.count(f->a)) {
      auto inner = sub;
      inner.erase(f->a);
      return std::make_shared<const HyperFormula>(
          f->kind, f->a, "", "", substitute_trace_vars(f->lhs, inner),
          nullptr);
    }
    return std::make_shared<const HyperFormula>(
        f->kind, f->a, "", "", substitute_trace_vars(f->lhs, sub), nullptr);
  }
  switch (f->kind) {
    case HKind::Pred: {
      auto it = sub.find(f->b);
      return it == sub.end() ? f : hf::pred(f->a, it->second, f->c);
    }
    case HKind::Less:
    case HKind::TimeEq:
      return f;
    case HKind::Not:
      return hf::not_(substitute_trace_vars(f->lhs, sub));
    default: {
      HPtr l = substitute_trace_vars(f->lhs, sub);
      HPtr r = substitute_trace_vars(f->rhs, sub);
      return std::make_shared<const HyperFormula>(f->kind, "", "", "", l, r);
    }
  }
}

}  // namespace hypertrace
