#include "doctest.h"

#include <random>

#include "hypertrace/formula.hpp"
#include "hypertrace/traces.hpp"

using namespace hypertrace;

namespace {

UPTrace make(std::vector<Valuation> pre, std::vector<Valuation> per) {
  return UPTrace{std::move(pre), std::move(per)};
}

// Unrolls k extra copies of the period into the prefix; denotes the same word.
UPTrace unroll(const UPTrace& t, int k) {
  UPTrace out = t;
  for (int i = 0; i < k; ++i)
    out.prefix.insert(out.prefix.end(), t.period.begin(), t.period.end());
  return out;
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
  return t;
}

UPSet random_upset(std::mt19937_64& rng, int max_pre, int max_per) {
  std::uniform_int_distribution<int> pre_len(0, max_pre), per_len(1, max_per);
  UPSet s;
  int np = pre_len(rng), nq = per_len(rng);
  for (int i = 0; i < np; ++i) s.prefix.push_back(rng() & 1);
  for (int i = 0; i < nq; ++i) s.period.push_back(rng() & 1);
  return s;
}

}  // namespace

TEST_CASE("value_at looks up prefix then folds into the period") {
  UPTrace t = make({{"a"}}, {{}});
  CHECK(value_at(t, 0) == Valuation{"a"});
  CHECK(value_at(t, 7) == Valuation{});
  UPTrace both = make({}, {{"secret", "pub"}});
  for (uint64_t i : {0, 3, 11})
    CHECK(value_at(both, i) == Valuation{"secret", "pub"});
}

TEST_CASE("canonicalize removes rotation divisors and folds the prefix") {
  UPTrace t1 = canonicalize(make({}, {{"a"}, {"a"}}));
  CHECK(t1.prefix.empty());
  CHECK(t1.period == std::vector<Valuation>{{"a"}});

  UPTrace t2 = canonicalize(make({{"a"}}, {{"a"}}));
  CHECK(t2.prefix.empty());
  CHECK(t2.period == std::vector<Valuation>{{"a"}});

  // u x (w x)^ω = u (x w)^ω: prefix [{}], period [{a} {}] folds by rotation.
  UPTrace t3 = canonicalize(make({{}}, {{"a"}, {}}));
  CHECK(t3.prefix.empty());
  CHECK(t3.period == std::vector<Valuation>{{}, {"a"}});
}

TEST_CASE("canonicalize preserves the denoted word") {
  std::mt19937_64 rng(12345);
  for (int it = 0; it < 300; ++it) {
    UPTrace t = random_trace(rng, {"a", "b"}, 3, 4);
    UPTrace c = canonicalize(t);
    uint64_t bound = std::max(t.prefix.size(), c.prefix.size()) +
                     2 * lcm_u64(t.period.size(), c.period.size());
    for (uint64_t i = 0; i < bound; ++i) CHECK(value_at(t, i) == value_at(c, i));
  }
}

TEST_CASE("double-unrolled traces canonicalize back to the original") {
  std::mt19937_64 rng(4242);
  for (int it = 0; it < 300; ++it) {
    UPTrace t = canonicalize(random_trace(rng, {"a"}, 2, 3));
    CHECK(canonicalize(unroll(t, 2)) == t);
  }
}

TEST_CASE("agree_on compares exactly up to the joint period") {
  UPTrace t = make({{"a"}}, {{}});
  UPTrace u = make({}, {{"a"}, {}});
  // Positions: t = {a} {} {} ...  u = {a} {} {a} {} ...; they differ at 2.
  CHECK_FALSE(agree_on(t, u, {"a"}));
  CHECK(agree_on(t, u, {}));       // empty comparison set
  CHECK(agree_on(t, t, {"a"}));    // reflexive
}

TEST_CASE("agree_on is an equivalence relation for a fixed set") {
  std::mt19937_64 rng(1331);
  std::vector<std::string> props{"a", "b"};
  std::set<std::string> y{"a"};
  for (int it = 0; it < 200; ++it) {
    UPTrace x = random_trace(rng, props, 2, 3);
    UPTrace z = random_trace(rng, props, 2, 3);
    UPTrace w = random_trace(rng, props, 2, 3);
    CHECK(agree_on(x, x, y));
    CHECK(agree_on(x, z, y) == agree_on(z, x, y));
    if (agree_on(x, z, y) && agree_on(z, w, y)) CHECK(agree_on(x, w, y));
  }
}

TEST_CASE("agree_on over the full alphabet is canonical equality") {
  std::mt19937_64 rng(777);
  std::vector<std::string> props{"a", "b"};
  for (int it = 0; it < 200; ++it) {
    UPTrace x = random_trace(rng, props, 2, 3);
    UPTrace y = (it % 3 == 0) ? unroll(x, 1) : random_trace(rng, props, 2, 3);
    bool eq = canonicalize(x) == canonicalize(y);
    CHECK(agree_on(x, y, {"a", "b"}) == eq);
  }
}

TEST_CASE("support_set frozen examples") {
  UPTrace all_a = make({}, {{"a"}});
  UPSet s1 = support_set(all_a, "a");
  CHECK(s1.prefix.empty());
  CHECK(s1.period == std::vector<char>{1});

  UPTrace one_a = make({{"a"}}, {{}});
  UPSet s2 = support_set(one_a, "a");
  CHECK(s2.prefix == std::vector<char>{1});
  CHECK(s2.period == std::vector<char>{0});
}

TEST_CASE("from_support_sets frozen examples") {
  UPSet full{{}, {1}}, empty{{}, {0}};
  CHECK(from_support_sets({{"a", empty}, {"b", empty}}) ==
        canonicalize(make({}, {{}})));
  CHECK(from_support_sets({{"a", full}, {"b", empty}}) ==
        canonicalize(make({}, {{"a"}})));
}

TEST_CASE("support_set and from_support_sets are mutually inverse") {
  std::mt19937_64 rng(999);
  std::vector<std::string> props{"a", "b"};
  for (int it = 0; it < 500; ++it) {
    std::map<std::string, UPSet> m;
    for (const auto& p : props) m[p] = canonicalize(random_upset(rng, 2, 3));
    UPTrace t = from_support_sets(m);
    for (const auto& p : props) CHECK(support_set(t, p) == m[p]);

    UPTrace u = canonicalize(random_trace(rng, props, 2, 3));
    std::map<std::string, UPSet> back;
    for (const auto& p : props) back[p] = support_set(u, p);
    CHECK(from_support_sets(back) == u);
  }
}

TEST_CASE("suffix shifts indices") {
  std::mt19937_64 rng(31337);
  for (int it = 0; it < 200; ++it) {
    UPTrace t = random_trace(rng, {"a", "b"}, 3, 3);
    uint64_t k = rng() % 6;
    UPTrace s = suffix(t, k);
    for (uint64_t i = 0; i < 12; ++i) CHECK(value_at(s, i) == value_at(t, k + i));
  }
}

TEST_CASE("trace set file format round trips") {
  std::string text =
      "props: a, b;\n"
      "trace t0 = [ {a,b} {} | {a} ];\n"
      "trace t1 = [ | {} ];\n";
  TraceSet ts = parse_trace_set(text);
  CHECK(ts.size() == 2);
  CHECK(ts.alphabet == std::set<std::string>{"a", "b"});
  CHECK(ts.traces[0].prefix == std::vector<Valuation>{{"a", "b"}, {}});
  CHECK(ts.traces[0].period == std::vector<Valuation>{{"a"}});
  CHECK(ts.traces[1] == canonicalize(UPTrace{{}, {{}}}));

  TraceSet again = parse_trace_set(render_trace_set(ts));
  CHECK(again.alphabet == ts.alphabet);
  CHECK(again.names == ts.names);
  CHECK(again.traces == ts.traces);
}

TEST_CASE("trace set format rejects malformed input") {
  CHECK_THROWS_AS(parse_trace_set("props: a;\ntrace t = [ {a} ];"),
                  ParseError);
  CHECK_THROWS_AS(parse_trace_set("props: a;\ntrace t = [ | ];"), ParseError);
  CHECK_THROWS_AS(parse_trace_set("props: a;\ntrace t = [ {b} | {} ];"),
                  ParseError);
  CHECK_THROWS_AS(
      parse_trace_set("props: a;\ntrace t = [ | {} ];\ntrace t = [ | {} ];"),
      ParseError);
}
