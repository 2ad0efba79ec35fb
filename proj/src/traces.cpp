#include "hypertrace/traces.hpp"

#include <cctype>
#include <cstring>
#include <numeric>
#include <sstream>

#include "hypertrace/formula.hpp"

namespace hypertrace {

uint64_t lcm_u64(uint64_t a, uint64_t b) {
  if (a == 0 || b == 0) return a | b;
  return a / std::gcd(a, b) * b;
}

namespace {

// Shared canonicalization over any element type with ==.
template <typename T>
void canonicalize_seq(std::vector<T>& prefix, std::vector<T>& period) {
  if (period.empty()) period.push_back(T{});
  // Primitive period: smallest divisor d of |period| with period = w^k.
  size_t n = period.size();
  for (size_t d = 1; d <= n; ++d) {
    if (n % d != 0) continue;
    bool ok = true;
    for (size_t i = d; i < n && ok; ++i) ok = period[i] == period[i % d];
    if (ok) {
      period.resize(d);
      break;
    }
  }
  // Fold the prefix: u·x· (w·x)^ω = u · (x·w)^ω.
  while (!prefix.empty() && prefix.back() == period.back()) {
    prefix.pop_back();
    period.insert(period.begin(), period.back());
    period.pop_back();
  }
}

}  // namespace

UPTrace canonicalize(const UPTrace& t) {
  UPTrace out = t;
  canonicalize_seq(out.prefix, out.period);
  return out;
}

UPSet canonicalize(const UPSet& s) {
  UPSet out = s;
  canonicalize_seq(out.prefix, out.period);
  return out;
}

Valuation value_at(const UPTrace& t, uint64_t index) {
  if (index < t.prefix.size()) return t.prefix[index];
  if (t.period.empty()) return {};
  return t.period[(index - t.prefix.size()) % t.period.size()];
}

UPTrace suffix(const UPTrace& t, uint64_t k) {
  UPTrace out;
  size_t p = t.period.empty() ? 1 : t.period.size();
  if (k < t.prefix.size()) {
    out.prefix.assign(t.prefix.begin() + static_cast<long>(k),
                      t.prefix.end());
    out.period = t.period.empty() ? std::vector<Valuation>{{}} : t.period;
  } else {
    uint64_t rot = (k - t.prefix.size()) % p;
    out.period.reserve(p);
    for (size_t i = 0; i < p; ++i)
      out.period.push_back(value_at(t, t.prefix.size() + rot + i));
  }
  return canonicalize(out);
}

bool agree_on(const UPTrace& a, const UPTrace& b,
              const std::set<std::string>& y) {
  uint64_t l = std::max(a.prefix.size(), b.prefix.size());
  uint64_t p = lcm_u64(a.period.empty() ? 1 : a.period.size(),
                       b.period.empty() ? 1 : b.period.size());
  for (uint64_t i = 0; i < l + p; ++i) {
    Valuation va = value_at(a, i), vb = value_at(b, i);
    for (const auto& prop : y) {
      if (va.count(prop) != vb.count(prop)) return false;
    }
  }
  return true;
}

UPSet support_set(const UPTrace& t, const std::string& prop) {
  UPSet s;
  s.prefix.reserve(t.prefix.size());
  for (const auto& v : t.prefix) s.prefix.push_back(v.count(prop) ? 1 : 0);
  if (t.period.empty()) {
    s.period.push_back(0);
  } else {
    s.period.reserve(t.period.size());
    for (const auto& v : t.period) s.period.push_back(v.count(prop) ? 1 : 0);
  }
  return canonicalize(s);
}

UPTrace from_support_sets(const std::map<std::string, UPSet>& m) {
  uint64_t l = 0, p = 1;
  for (const auto& [prop, s] : m) {
    l = std::max<uint64_t>(l, s.prefix.size());
    p = lcm_u64(p, s.period.empty() ? 1 : s.period.size());
  }
  UPTrace t;
  for (uint64_t i = 0; i < l; ++i) {
    Valuation v;
    for (const auto& [prop, s] : m)
      if (s.contains(i)) v.insert(prop);
    t.prefix.push_back(std::move(v));
  }
  for (uint64_t i = l; i < l + p; ++i) {
    Valuation v;
    for (const auto& [prop, s] : m)
      if (s.contains(i)) v.insert(prop);
    t.period.push_back(std::move(v));
  }
  return canonicalize(t);
}

UPTrace constant_trace(const Valuation& v) {
  UPTrace t;
  t.period.push_back(v);
  return t;
}

void TraceSet::add(const std::string& name, UPTrace t) {
  for (const auto& n : names)
    if (n == name) throw ParseError("duplicate trace name '" + name + "'");
  names.push_back(name);
  traces.push_back(canonicalize(t));
}

bool TraceSet::contains(const UPTrace& t) const {
  UPTrace c = canonicalize(t);
  for (const auto& u : traces)
    if (u == c) return true;
  return false;
}

// ------------------------------------------------------------ file format

namespace {

struct Cursor {
  const std::string& s;
  size_t i = 0;

  void skip() {
    while (i < s.size()) {
      if (isspace(static_cast<unsigned char>(s[i]))) {
        ++i;
      } else if (s[i] == '/' && i + 1 < s.size() && s[i + 1] == '/') {
        while (i < s.size() && s[i] != '\n') ++i;
      } else {
        break;
      }
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
      throw ParseError(std::string("expected '") + c + "' in trace set");
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
    if (start == i) throw ParseError("expected identifier in trace set");
    return s.substr(start, i - start);
  }
  bool done() {
    skip();
    return i >= s.size();
  }
};

Valuation parse_valuation(Cursor& c, const std::set<std::string>& alphabet) {
  c.expect('{');
  Valuation v;
  c.skip();
  if (c.eat('}')) return v;
  while (true) {
    std::string p = c.ident();
    if (!alphabet.count(p))
      throw ParseError("proposition '" + p + "' not declared");
    v.insert(p);
    if (c.eat('}')) break;
    c.eat(',');  // commas optional between props
  }
  return v;
}

}  // namespace

TraceSet parse_trace_set(const std::string& text) {
  Cursor c{text};
  TraceSet ts;
  if (c.eat_word("props")) {
    c.expect(':');
    c.skip();
    if (!c.eat(';')) {
      while (true) {
        ts.alphabet.insert(c.ident());
        if (c.eat(';')) break;
        c.expect(',');
      }
    }
  }
  while (!c.done()) {
    if (!c.eat_word("trace")) throw ParseError("expected 'trace' entry");
    std::string name = c.ident();
    c.expect('=');
    c.expect('[');
    std::vector<Valuation> pre, per;
    bool in_period = false;
    while (true) {
      c.skip();
      if (c.eat(']')) break;
      if (c.eat('|')) {
        if (in_period) throw ParseError("two '|' in one trace");
        in_period = true;
        continue;
      }
      Valuation v = parse_valuation(c, ts.alphabet);
      (in_period ? per : pre).push_back(std::move(v));
    }
    if (!in_period) throw ParseError("trace needs a '|' before its period");
    if (per.empty()) throw ParseError("empty period in trace '" + name + "'");
    ts.add(name, UPTrace{std::move(pre), std::move(per)});
    c.expect(';');
  }
  return ts;
}

std::string render_trace_set(const TraceSet& ts) {
  std::ostringstream out;
  out << "props:";
  bool first = true;
  for (const auto& p : ts.alphabet) {
    out << (first ? " " : ", ") << p;
    first = false;
  }
  out << ";\n";
  auto put_val = [&](const Valuation& v) {
    out << "{";
    bool f = true;
    for (const auto& p : v) {
      out << (f ? "" : ",") << p;
      f = false;
    }
    out << "}";
  };
  for (size_t k = 0; k < ts.traces.size(); ++k) {
    out << "trace " << ts.names[k] << " = [ ";
    for (const auto& v : ts.traces[k].prefix) {
      put_val(v);
      out << " ";
    }
    out << "|";
    for (const auto& v : ts.traces[k].period) {
      out << " ";
      put_val(v);
    }
    out << " ];\n";
  }
  return out.str();
}

}  // namespace hypertrace
