#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace hypertrace {

// A valuation is the set of propositions that hold at a position.
using Valuation = std::set<std::string>;

// Ultimately periodic infinite trace u · v^ω.  Canonical form: primitive
// period (no rotation divisor) and minimal prefix.
struct UPTrace {
  std::vector<Valuation> prefix;
  std::vector<Valuation> period;  // nonempty

  bool operator==(const UPTrace&) const = default;
  bool operator<(const UPTrace& o) const {
    if (prefix != o.prefix) return prefix < o.prefix;
    return period < o.period;
  }
};

// Ultimately periodic subset of the naturals, same shape over bits.
struct UPSet {
  std::vector<char> prefix;
  std::vector<char> period;  // nonempty

  bool operator==(const UPSet&) const = default;
  bool contains(uint64_t i) const {
    if (i < prefix.size()) return prefix[i];
    return period[(i - prefix.size()) % period.size()];
  }
};

UPTrace canonicalize(const UPTrace& t);
UPSet canonicalize(const UPSet& s);

Valuation value_at(const UPTrace& t, uint64_t index);

// τ[k…]
UPTrace suffix(const UPTrace& t, uint64_t k);

// Exact equality on Y-projections, decided up to maxPrefix + lcm(periods).
bool agree_on(const UPTrace& a, const UPTrace& b,
              const std::set<std::string>& y);

UPSet support_set(const UPTrace& t, const std::string& prop);

// Unique trace whose per-proposition supports are as given (canonical).
UPTrace from_support_sets(const std::map<std::string, UPSet>& m);

// Constant trace v^ω.
UPTrace constant_trace(const Valuation& v);

// Named finite set of UP traces over a shared alphabet.
struct TraceSet {
  std::set<std::string> alphabet;
  std::vector<std::string> names;  // unique, parallel to traces
  std::vector<UPTrace> traces;

  void add(const std::string& name, UPTrace t);
  bool contains(const UPTrace& t) const;  // up to canonical form
  size_t size() const { return traces.size(); }
};

// Trace and time assignments evaluated against a structure.
struct Assignment {
  std::map<std::string, UPTrace> trace_part;
  std::map<std::string, uint64_t> time_part;
};

// Textual trace-set format:
//   props: a, b;
//   trace t0 = [ {a,b} {} | {a} ];
// '|' splits prefix from period; the prefix may be empty.
TraceSet parse_trace_set(const std::string& text);
std::string render_trace_set(const TraceSet& ts);

uint64_t lcm_u64(uint64_t a, uint64_t b);

}  // namespace hypertrace
