#include "hypertrace/automata.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <set>
#include <sstream>

namespace hypertrace {

namespace {

void sort_unique(std::vector<std::pair<Letter, int>>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

void finalize(NBW& a) {
  for (auto& row : a.out) sort_unique(row);
  std::sort(a.initial.begin(), a.initial.end());
  a.initial.erase(std::unique(a.initial.begin(), a.initial.end()),
                  a.initial.end());
}

void check_tracks(const NBW& a, const AutomataLimits& limits) {
  if (static_cast<int>(a.tracks.size()) > limits.max_tracks)
    throw ResourceError("track budget exceeded: " +
                        std::to_string(a.tracks.size()) + " tracks");
}

std::vector<int> scc_ids(const NBW& a, int& count) {
  int n = a.n;
  std::vector<std::vector<int>> fwd(n), rev(n);
  for (int q = 0; q < n; ++q)
    for (const auto& [l, d] : a.out[q]) {
      fwd[q].push_back(d);
      rev[d].push_back(q);
    }
  std::vector<char> seen(n, 0);
  std::vector<int> order;
  order.reserve(n);
  for (int s = 0; s < n; ++s) {
    if (seen[s]) continue;
    std::vector<std::pair<int, size_t>> stack{{s, 0}};
    seen[s] = 1;
    while (!stack.empty()) {
      auto& [q, idx] = stack.back();
      if (idx < fwd[q].size()) {
        int d = fwd[q][idx++];
        if (!seen[d]) {
          seen[d] = 1;
          stack.push_back({d, 0});
        }
      } else {
        order.push_back(q);
        stack.pop_back();
      }
    }
  }
  std::vector<int> comp(n, -1);
  count = 0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if (comp[*it] != -1) continue;
    std::vector<int> stack{*it};
    comp[*it] = count;
    while (!stack.empty()) {
      int q = stack.back();
      stack.pop_back();
      for (int d : rev[q])
        if (comp[d] == -1) {
          comp[d] = count;
          stack.push_back(d);
        }
    }
    ++count;
  }
  return comp;
}

NBW restrict_states(const NBW& a, const std::vector<char>& keep) {
  NBW b;
  b.tracks = a.tracks;
  std::vector<int> remap(a.n, -1);
  for (int q = 0; q < a.n; ++q)
    if (keep[q]) remap[q] = b.n++;
  b.out.resize(b.n);
  b.accepting.assign(b.n, 0);
  for (int q = 0; q < a.n; ++q) {
    if (remap[q] < 0) continue;
    b.accepting[remap[q]] = a.accepting[q];
    for (const auto& [l, d] : a.out[q])
      if (remap[d] >= 0) b.out[remap[q]].push_back({l, remap[d]});
  }
  for (int q : a.initial)
    if (remap[q] >= 0) b.initial.push_back(remap[q]);
  finalize(b);
  return b;
}

}  // namespace

int NBW::track_index(const std::string& name) const {
  for (size_t i = 0; i < tracks.size(); ++i)
    if (tracks[i].name == name) return static_cast<int>(i);
  return -1;
}

NBW simplify(const NBW& a0) {
  NBW a = a0;
  finalize(a);
  std::vector<char> reach(a.n, 0);
  std::vector<int> stack = a.initial;
  for (int q : stack) reach[q] = 1;
  while (!stack.empty()) {
    int q = stack.back();
    stack.pop_back();
    for (const auto& [l, d] : a.out[q])
      if (!reach[d]) {
        reach[d] = 1;
        stack.push_back(d);
      }
  }
  // Productive states can reach an SCC with an internal edge and an
  // accepting state; accepting runs settle in exactly such components.
  int nscc = 0;
  std::vector<int> comp = scc_ids(a, nscc);
  std::vector<char> has_edge(std::max(nscc, 1), 0), has_acc(std::max(nscc, 1), 0);
  for (int q = 0; q < a.n; ++q) {
    if (a.accepting[q]) has_acc[comp[q]] = 1;
    for (const auto& [l, d] : a.out[q])
      if (comp[q] == comp[d]) has_edge[comp[q]] = 1;
  }
  std::vector<char> productive(a.n, 0);
  {
    std::vector<std::vector<int>> rev(a.n);
    for (int q = 0; q < a.n; ++q)
      for (const auto& [l, d] : a.out[q]) rev[d].push_back(q);
    std::vector<int> st;
    for (int q = 0; q < a.n; ++q)
      if (has_edge[comp[q]] && has_acc[comp[q]]) {
        productive[q] = 1;
        st.push_back(q);
      }
    while (!st.empty()) {
      int q = st.back();
      st.pop_back();
      for (int p : rev[q])
        if (!productive[p]) {
          productive[p] = 1;
          st.push_back(p);
        }
    }
  }
  std::vector<char> keep(a.n, 0);
  for (int q = 0; q < a.n; ++q) keep[q] = reach[q] && productive[q];
  NBW b = restrict_states(a, keep);

  // Acceptance saturation: if every cycle inside a component passes through
  // an accepting state (the non-accepting part is acyclic), then a run
  // trapped there visits accepting states infinitely often anyway, and the
  // whole component can be marked accepting.  This keeps such automata
  // structurally weak.
  {
    int nscc2 = 0;
    std::vector<int> comp2 = scc_ids(b, nscc2);
    std::vector<std::vector<int>> members(std::max(nscc2, 1));
    for (int q = 0; q < b.n; ++q) members[comp2[q]].push_back(q);
    for (int c = 0; c < nscc2; ++c) {
      bool any_acc = false, all_acc = true, internal = false;
      for (int q : members[c]) {
        any_acc |= b.accepting[q] != 0;
        all_acc &= b.accepting[q] != 0;
        for (const auto& [l, d] : b.out[q]) internal |= comp2[d] == c;
      }
      if (!any_acc || all_acc || !internal) continue;
      // is the non-accepting induced subgraph acyclic?
      std::vector<int> color;  // per member index
      std::map<int, int> idx;
      std::vector<int> nonacc;
      for (int q : members[c])
        if (!b.accepting[q]) {
          idx[q] = static_cast<int>(nonacc.size());
          nonacc.push_back(q);
        }
      color.assign(nonacc.size(), 0);
      bool cyclic = false;
      auto dfs = [&](auto&& self, int u) -> void {
        color[u] = 1;
        for (const auto& [l, d] : b.out[nonacc[u]]) {
          if (comp2[d] != c || b.accepting[d]) continue;
          int v = idx[d];
          if (color[v] == 1) {
            cyclic = true;
            return;
          }
          if (color[v] == 0) self(self, v);
          if (cyclic) return;
        }
        color[u] = 2;
      };
      for (size_t u = 0; u < nonacc.size() && !cyclic; ++u)
        if (color[u] == 0) dfs(dfs, static_cast<int>(u));
      if (!cyclic)
        for (int q : members[c]) b.accepting[q] = 1;
    }
  }

  // Merge states with identical rows until stable.
  while (true) {
    std::map<std::pair<char, std::vector<std::pair<Letter, int>>>, int> sig;
    std::vector<int> remap(b.n);
    bool merged = false;
    for (int q = 0; q < b.n; ++q) {
      auto key = std::make_pair(b.accepting[q], b.out[q]);
      auto [it, fresh] = sig.emplace(key, q);
      remap[q] = it->second;
      if (!fresh) merged = true;
    }
    if (!merged) break;
    NBW c;
    c.tracks = b.tracks;
    std::vector<int> newid(b.n, -1);
    for (int q = 0; q < b.n; ++q)
      if (remap[q] == q) newid[q] = c.n++;
    c.out.resize(c.n);
    c.accepting.assign(c.n, 0);
    for (int q = 0; q < b.n; ++q) {
      if (remap[q] != q) continue;
      c.accepting[newid[q]] = b.accepting[q];
      for (const auto& [l, d] : b.out[q])
        c.out[newid[q]].push_back({l, newid[remap[d]]});
    }
    for (int q : b.initial) c.initial.push_back(newid[remap[q]]);
    finalize(c);
    b = std::move(c);
  }
  return b;
}

bool is_deterministic(const NBW& a) {
  if (a.initial.size() > 1) return false;
  for (int q = 0; q < a.n; ++q)
    for (size_t i = 1; i < a.out[q].size(); ++i)
      if (a.out[q][i].first == a.out[q][i - 1].first) return false;
  return true;
}

bool is_weak(const NBW& a) {
  int nscc = 0;
  std::vector<int> comp = scc_ids(a, nscc);
  std::vector<int> flavor(std::max(nscc, 1), -1);
  for (int q = 0; q < a.n; ++q) {
    int c = comp[q];
    int f = a.accepting[q] ? 1 : 0;
    if (flavor[c] == -1)
      flavor[c] = f;
    else if (flavor[c] != f)
      return false;
  }
  return true;
}

// ---------------------------------------------------------------- products

namespace {

NBW align_tracks(const NBW& a, const std::vector<Track>& target,
                 const AutomataLimits& limits) {
  if (a.tracks == target) return a;
  size_t transitions = 0;
  NBW b;
  b.tracks = target;
  b.n = a.n;
  b.out.resize(b.n);
  b.accepting = a.accepting;
  b.initial = a.initial;
  std::vector<int> pos(a.tracks.size(), -1);
  Letter new_mask = 0;
  for (size_t i = 0; i < target.size(); ++i) {
    bool found = false;
    for (size_t j = 0; j < a.tracks.size(); ++j)
      if (a.tracks[j].name == target[i].name) {
        pos[j] = static_cast<int>(i);
        found = true;
      }
    if (!found) new_mask |= Letter{1} << i;
  }
  std::vector<Letter> fills;
  Letter fill = 0;
  while (true) {
    fills.push_back(fill);
    if (fill == new_mask) break;
    fill = (fill - new_mask) & new_mask;
  }
  for (int q = 0; q < a.n; ++q) {
    for (const auto& [l, d] : a.out[q]) {
      Letter base = 0;
      for (size_t j = 0; j < a.tracks.size(); ++j)
        if (l & (Letter{1} << j)) base |= Letter{1} << pos[j];
      for (Letter fi : fills) {
        if (++transitions > limits.transition_budget)
          throw ResourceError("transition budget exceeded in track alignment");
        b.out[q].push_back({base | fi, d});
      }
    }
  }
  finalize(b);
  return b;
}

std::vector<Track> merge_tracks(const NBW& a, const NBW& b,
                                const AutomataLimits& limits) {
  std::vector<Track> t = a.tracks;
  for (const auto& tr : b.tracks) {
    bool found = false;
    for (const auto& have : t)
      if (have.name == tr.name) {
        if (have.first_order != tr.first_order)
          throw SortError("track '" + tr.name + "' sort mismatch");
        found = true;
      }
    if (!found) t.push_back(tr);
  }
  std::sort(t.begin(), t.end(),
            [](const Track& x, const Track& y) { return x.name < y.name; });
  if (static_cast<int>(t.size()) > limits.max_tracks)
    throw ResourceError("track budget exceeded in product");
  return t;
}

bool all_accepting(const NBW& a) {
  for (int q = 0; q < a.n; ++q)
    if (!a.accepting[q]) return false;
  return true;
}

struct RawProduct {
  NBW aut;
  std::vector<std::pair<int, int>> origin;
};

RawProduct raw_product(const NBW& a, const NBW& b,
                       const AutomataLimits& limits) {
  size_t transitions = 0;
  RawProduct out;
  out.aut.tracks = a.tracks;
  std::map<std::pair<int, int>, int> id;
  std::vector<std::pair<int, int>> todo;
  auto get = [&](int qa, int qb) {
    auto key = std::make_pair(qa, qb);
    auto it = id.find(key);
    if (it != id.end()) return it->second;
    int k = out.aut.n++;
    id.emplace(key, k);
    out.aut.out.emplace_back();
    out.origin.push_back(key);
    todo.push_back(key);
    return k;
  };
  for (int qa : a.initial)
    for (int qb : b.initial) out.aut.initial.push_back(get(qa, qb));
  while (!todo.empty()) {
    auto [qa, qb] = todo.back();
    todo.pop_back();
    int q = id[{qa, qb}];
    for (const auto& [la, da] : a.out[qa])
      for (const auto& [lb, db] : b.out[qb]) {
        if (la != lb) continue;
        int dest = get(da, db);
        if (++transitions > limits.transition_budget)
          throw ResourceError("transition budget exceeded in product");
        out.aut.out[q].push_back({la, dest});
      }
  }
  out.aut.accepting.assign(out.aut.n, 0);
  return out;
}

NBW buchi_product(const NBW& a, const NBW& b, const AutomataLimits& limits) {
  size_t transitions = 0;
  NBW p;
  p.tracks = a.tracks;
  std::map<std::tuple<int, int, int>, int> id;
  std::vector<std::tuple<int, int, int>> todo;
  auto get = [&](int qa, int qb, int phase) {
    auto key = std::make_tuple(qa, qb, phase);
    auto it = id.find(key);
    if (it != id.end()) return it->second;
    int k = p.n++;
    id.emplace(key, k);
    p.out.emplace_back();
    p.accepting.push_back(phase == 1 && a.accepting[qa] ? 1 : 0);
    todo.push_back(key);
    return k;
  };
  for (int qa : a.initial)
    for (int qb : b.initial) p.initial.push_back(get(qa, qb, 1));
  while (!todo.empty()) {
    auto [qa, qb, phase] = todo.back();
    todo.pop_back();
    int q = id[{qa, qb, phase}];
    for (const auto& [la, da] : a.out[qa])
      for (const auto& [lb, db] : b.out[qb]) {
        if (la != lb) continue;
        int next_phase =
            phase == 1 ? (a.accepting[qa] ? 2 : 1) : (b.accepting[qb] ? 1 : 2);
        int dest = get(da, db, next_phase);
        if (++transitions > limits.transition_budget)
          throw ResourceError("transition budget exceeded in product");
        p.out[q].push_back({la, dest});
      }
  }
  finalize(p);
  return p;
}

// Weak × weak through the co-Büchi view: synchronous product with bad set
// "either side rejecting", then the two-copy construction that turns
// "eventually bad-free" into a structurally weak Büchi condition.
NBW weak_product(const NBW& a, const NBW& b, const AutomataLimits& limits) {
  RawProduct rp = raw_product(a, b, limits);
  const NBW& base = rp.aut;
  auto bad = [&](int q) {
    auto [qa, qb] = rp.origin[q];
    return !a.accepting[qa] || !b.accepting[qb];
  };
  NBW w;
  w.tracks = base.tracks;
  w.n = 2 * base.n;
  w.out.resize(w.n);
  w.accepting.assign(w.n, 0);
  for (int q = 0; q < base.n; ++q) {
    w.accepting[base.n + q] = 1;
    for (const auto& [l, d] : base.out[q]) {
      w.out[q].push_back({l, d});
      if (!bad(d)) {
        w.out[q].push_back({l, base.n + d});
        w.out[base.n + q].push_back({l, base.n + d});
      }
    }
  }
  for (int q : base.initial) {
    w.initial.push_back(q);
    if (!bad(q)) w.initial.push_back(base.n + q);
  }
  finalize(w);
  return w;
}

}  // namespace

NBW intersect(const NBW& a0, const NBW& b0, const AutomataLimits& limits) {
  std::vector<Track> t = merge_tracks(a0, b0, limits);
  NBW a = align_tracks(a0, t, limits), b = align_tracks(b0, t, limits);
  if (all_accepting(b)) {
    RawProduct rp = raw_product(a, b, limits);
    for (int q = 0; q < rp.aut.n; ++q)
      rp.aut.accepting[q] = a.accepting[rp.origin[q].first];
    finalize(rp.aut);
    return simplify(rp.aut);
  }
  if (all_accepting(a)) {
    RawProduct rp = raw_product(a, b, limits);
    for (int q = 0; q < rp.aut.n; ++q)
      rp.aut.accepting[q] = b.accepting[rp.origin[q].second];
    finalize(rp.aut);
    return simplify(rp.aut);
  }
  if (is_deterministic(a) && is_deterministic(b))
    return simplify(buchi_product(a, b, limits));
  if (is_weak(a) && is_weak(b)) return simplify(weak_product(a, b, limits));
  return simplify(buchi_product(a, b, limits));
}

NBW union_(const NBW& a0, const NBW& b0, const AutomataLimits& limits) {
  std::vector<Track> t = merge_tracks(a0, b0, limits);
  NBW a = align_tracks(a0, t, limits), b = align_tracks(b0, t, limits);
  // First-order tracks present on one side only keep their discipline on
  // the extended side; the sum would otherwise admit invalid encodings.
  for (const auto& tr : t) {
    if (!tr.first_order) continue;
    if (a0.track_index(tr.name) < 0)
      a = align_tracks(impose_fo_discipline(a, tr.name, limits), t, limits);
    if (b0.track_index(tr.name) < 0)
      b = align_tracks(impose_fo_discipline(b, tr.name, limits), t, limits);
  }
  NBW u;
  u.tracks = t;
  u.n = a.n + b.n;
  u.out.resize(u.n);
  u.accepting.assign(u.n, 0);
  for (int q = 0; q < a.n; ++q) {
    u.accepting[q] = a.accepting[q];
    for (const auto& [l, d] : a.out[q]) u.out[q].push_back({l, d});
  }
  for (int q = 0; q < b.n; ++q) {
    u.accepting[a.n + q] = b.accepting[q];
    for (const auto& [l, d] : b.out[q]) u.out[a.n + q].push_back({l, a.n + d});
  }
  u.initial = a.initial;
  for (int q : b.initial) u.initial.push_back(a.n + q);
  finalize(u);
  return simplify(u);
}

NBW project(const NBW& a, const std::string& track) {
  int idx = a.track_index(track);
  if (idx < 0) throw SortError("no track named '" + track + "'");
  NBW b;
  b.tracks = a.tracks;
  b.tracks.erase(b.tracks.begin() + idx);
  b.n = a.n;
  b.out.resize(b.n);
  b.accepting = a.accepting;
  b.initial = a.initial;
  Letter low = (Letter{1} << idx) - 1;
  for (int q = 0; q < a.n; ++q)
    for (const auto& [l, d] : a.out[q]) {
      Letter nl = (l & low) | ((l >> (idx + 1)) << idx);
      b.out[q].push_back({nl, d});
    }
  finalize(b);
  return b;
}

// -------------------------------------------------------------- complement

namespace {

NBW complete_det(const NBW& a, const AutomataLimits& limits) {
  NBW b = a;
  size_t letters = b.letter_count();
  if (static_cast<size_t>(b.n + 1) * letters > limits.transition_budget)
    throw ResourceError("transition budget exceeded completing an automaton");
  bool need_sink = b.initial.empty();
  for (int q = 0; q < b.n && !need_sink; ++q)
    if (b.out[q].size() < letters) need_sink = true;
  if (!need_sink) return b;
  int sink = b.n++;
  b.out.emplace_back();
  b.accepting.push_back(0);
  for (Letter l = 0; l < letters; ++l)
    b.out[sink].push_back({l, sink});
  for (int q = 0; q < sink; ++q) {
    std::vector<char> have(letters, 0);
    for (const auto& [l, d] : b.out[q]) have[l] = 1;
    for (Letter l = 0; l < letters; ++l)
      if (!have[l]) b.out[q].push_back({l, sink});
  }
  if (b.initial.empty()) b.initial.push_back(sink);
  finalize(b);
  return b;
}

// Complement of a complete deterministic automaton: guess the point after
// which the unique run avoids accepting states.
NBW det_complement(const NBW& a0, const AutomataLimits& limits) {
  NBW a = complete_det(a0, limits);
  NBW c;
  c.tracks = a.tracks;
  c.n = 2 * a.n;
  c.out.resize(c.n);
  c.accepting.assign(c.n, 0);
  for (int q = 0; q < a.n; ++q) {
    c.accepting[a.n + q] = 1;
    for (const auto& [l, d] : a.out[q]) {
      c.out[q].push_back({l, d});
      if (!a.accepting[d]) {
        c.out[q].push_back({l, a.n + d});
        c.out[a.n + q].push_back({l, a.n + d});
      }
    }
  }
  for (int q : a.initial) {
    c.initial.push_back(q);
    if (!a.accepting[q]) c.initial.push_back(a.n + q);
  }
  finalize(c);
  return c;
}

// Complement of a weak automaton: viewed as co-Büchi with bad set C (its
// rejecting states), the breakpoint subset construction (S, O) is a
// deterministic automaton whose O-resets happen infinitely often exactly on
// the complement language.
NBW weak_complement(const NBW& a, const AutomataLimits& limits) {
  size_t transitions = 0;
  std::vector<char> is_bad(a.n, 0);
  for (int q = 0; q < a.n; ++q)
    if (!a.accepting[q]) is_bad[q] = 1;
  size_t letters = a.letter_count();

  using Key = std::pair<std::vector<int>, std::vector<int>>;
  std::map<Key, int> id;
  std::vector<Key> states;
  NBW c;
  c.tracks = a.tracks;
  auto get = [&](std::vector<int> s, std::vector<int> o) {
    Key key{std::move(s), std::move(o)};
    auto it = id.find(key);
    if (it != id.end()) return it->second;
    int k = c.n++;
    if (static_cast<size_t>(c.n) > limits.macro_budget)
      throw ResourceError("state budget exceeded in weak complement");
    id.emplace(key, k);
    states.push_back(key);
    c.out.emplace_back();
    c.accepting.push_back(key.second.empty() ? 1 : 0);
    return k;
  };
  std::vector<int> init(a.initial);
  std::sort(init.begin(), init.end());
  get(init, {});
  c.initial.push_back(0);
  for (int q = 0; q < c.n; ++q) {
    Key cur = states[q];
    const std::vector<int>& s = cur.first;
    std::vector<int> o1 = cur.second;
    if (o1.empty()) {
      for (int x : s)
        if (!is_bad[x]) o1.push_back(x);
    }
    for (Letter l = 0; l < letters; ++l) {
      std::set<int> s2, o2;
      for (int x : s)
        for (const auto& [ll, d] : a.out[x])
          if (ll == l) s2.insert(d);
      for (int x : o1)
        for (const auto& [ll, d] : a.out[x])
          if (ll == l && !is_bad[d]) o2.insert(d);
      int dest = get(std::vector<int>(s2.begin(), s2.end()),
                     std::vector<int>(o2.begin(), o2.end()));
      if (++transitions > limits.transition_budget)
        throw ResourceError("transition budget exceeded in weak complement");
      c.out[q].push_back({l, dest});
    }
  }
  finalize(c);
  return c;
}

// Rank-based complement.  Phase one tracks the reachable set; switching in
// assigns everyone the maximal even rank 2n; afterwards each state may keep
// the highest even or highest odd rank below its covering bound (accepting
// states stay even).  O tracks even-ranked runs and must empty infinitely
// often.
NBW rank_complement(const NBW& a, const AutomataLimits& limits) {
  if (a.n > limits.rank_input_cap)
    throw ResourceError("complement state budget exceeded: " +
                        std::to_string(a.n) + " states");
  // Odd ranks only ever sit on non-accepting states, which bounds the
  // ranks needed by twice their count.
  int nonacc = 0;
  for (int q = 0; q < a.n; ++q)
    if (!a.accepting[q]) ++nonacc;
  int maxrank = 2 * std::max(nonacc, 1);
  size_t letters = a.letter_count();
  size_t transitions = 0;
  auto count_transition = [&]() {
    if (++transitions > limits.transition_budget)
      throw ResourceError("transition budget exceeded in rank complement");
  };

  struct Macro {
    std::vector<int> s;
    std::vector<int> o;
    std::vector<int> f;  // parallel to s; empty = phase one
    bool operator<(const Macro& m) const {
      if (s != m.s) return s < m.s;
      if (o != m.o) return o < m.o;
      return f < m.f;
    }
  };
  std::map<Macro, int> id;
  std::vector<Macro> states;
  NBW c;
  c.tracks = a.tracks;
  auto get = [&](Macro m) {
    auto it = id.find(m);
    if (it != id.end()) return it->second;
    int k = c.n++;
    if (static_cast<size_t>(c.n) > limits.macro_budget)
      throw ResourceError("state budget exceeded in rank complement");
    bool accept = m.s.empty() || (!m.f.empty() && m.o.empty());
    id.emplace(m, k);
    states.push_back(std::move(m));
    c.out.emplace_back();
    c.accepting.push_back(accept ? 1 : 0);
    return k;
  };

  std::vector<int> init(a.initial);
  std::sort(init.begin(), init.end());
  c.initial.push_back(get({init, {}, {}}));
  c.initial.push_back(get({init, {}, std::vector<int>(init.size(), maxrank)}));

  for (int q = 0; q < c.n; ++q) {
    Macro cur = states[q];
    for (Letter l = 0; l < letters; ++l) {
      std::set<int> s2set;
      for (int x : cur.s)
        for (const auto& [ll, d] : a.out[x])
          if (ll == l) s2set.insert(d);
      std::vector<int> s2(s2set.begin(), s2set.end());
      if (cur.f.empty() && !cur.s.empty()) {
        count_transition();
        count_transition();
        int wait_dest = get({s2, {}, {}});
        c.out[q].push_back({l, wait_dest});
        int switch_dest = get({s2, {}, std::vector<int>(s2.size(), maxrank)});
        c.out[q].push_back({l, switch_dest});
        continue;
      }
      if (cur.s.empty()) {
        int dead = get({{}, {}, {}});
        c.out[q].push_back({l, dead});
        continue;
      }
      // covering bounds
      std::vector<int> bound(s2.size(), maxrank + 1);
      for (size_t xi = 0; xi < cur.s.size(); ++xi) {
        for (const auto& [ll, d] : a.out[cur.s[xi]]) {
          if (ll != l) continue;
          auto pos = std::lower_bound(s2.begin(), s2.end(), d) - s2.begin();
          bound[pos] = std::min(bound[pos], cur.f[xi]);
        }
      }
      std::vector<std::vector<int>> cand(s2.size());
      bool possible = true;
      for (size_t i = 0; i < s2.size() && possible; ++i) {
        int b = bound[i];
        int top_even = (b % 2 == 0) ? b : b - 1;
        int top_odd = (b % 2 == 1) ? b : b - 1;
        if (a.accepting[s2[i]]) {
          if (top_even < 0)
            possible = false;
          else
            cand[i].push_back(top_even);
        } else {
          if (top_even >= 0) cand[i].push_back(top_even);
          if (top_odd >= 0) cand[i].push_back(top_odd);
          if (cand[i].empty()) possible = false;
        }
      }
      if (!possible) continue;
      if (s2.empty()) {
        c.out[q].push_back({l, get({{}, {}, {}})});
        continue;
      }
      std::set<int> o_img;
      for (int x : cur.o)
        for (const auto& [ll, d] : a.out[x])
          if (ll == l) o_img.insert(d);
      std::vector<size_t> pick(s2.size(), 0);
      while (true) {
        std::vector<int> f2(s2.size());
        for (size_t i = 0; i < s2.size(); ++i) f2[i] = cand[i][pick[i]];
        std::vector<int> o2;
        for (size_t i = 0; i < s2.size(); ++i) {
          if (f2[i] % 2 != 0) continue;
          if (cur.o.empty() || o_img.count(s2[i])) o2.push_back(s2[i]);
        }
        int dest = get({s2, o2, f2});
        count_transition();
        c.out[q].push_back({l, dest});
        size_t i = 0;
        while (i < s2.size() && ++pick[i] == cand[i].size()) pick[i++] = 0;
        if (i == s2.size()) break;
      }
    }
  }
  finalize(c);
  return c;
}

}  // namespace

NBW complement(const NBW& a0, const AutomataLimits& limits) {
  check_tracks(a0, limits);
  NBW a = simplify(a0);
  if (a.initial.empty() || a.n == 0) {
    NBW u;
    u.tracks = a0.tracks;
    u.n = 1;
    u.out.resize(1);
    for (Letter l = 0; l < u.letter_count(); ++l) u.out[0].push_back({l, 0});
    u.accepting = {1};
    u.initial = {0};
    return u;
  }
  if (is_deterministic(a)) return simplify(det_complement(a, limits));
  if (is_weak(a)) return simplify(weak_complement(a, limits));
  return simplify(rank_complement(a, limits));
}

// ------------------------------------------------------------- constraints

NBW impose_fo_discipline(const NBW& a, const std::string& track,
                         const AutomataLimits& limits) {
  NBW s;
  s.tracks = {Track{track, true}};
  s.n = 2;
  s.out.resize(2);
  s.out[0] = {{0, 0}, {1, 1}};
  s.out[1] = {{0, 1}};
  s.accepting = {0, 1};
  s.initial = {0};
  return intersect(a, s, limits);
}

NBW constrain_track_to_constant(const NBW& a, const std::string& track,
                                const UPSet& s0,
                                const AutomataLimits& limits) {
  int idx = a.track_index(track);
  if (idx < 0) throw SortError("no track named '" + track + "'");
  UPSet s = canonicalize(s0);
  size_t l = s.prefix.size(), p = s.period.size();
  NBW c;
  c.tracks = {Track{track, a.tracks[idx].first_order}};
  c.n = static_cast<int>(l + p);
  c.out.resize(c.n);
  c.accepting.assign(c.n, 1);
  c.initial = {0};
  for (size_t i = 0; i < l + p; ++i) {
    Letter bit = (i < l ? s.prefix[i] : s.period[i - l]) ? 1 : 0;
    size_t next = i + 1 < l + p ? i + 1 : l;
    c.out[i].push_back({bit, static_cast<int>(next)});
  }
  return intersect(a, c, limits);
}

// --------------------------------------------------------------- emptiness

bool accepts(const NBW& a, const LassoWord& w) {
  if (w.cycle.empty()) throw EvalError("lasso cycle must be nonempty");
  for (Letter l : w.prefix)
    if (l >= a.letter_count()) throw SortError("letter outside the alphabet");
  for (Letter l : w.cycle)
    if (l >= a.letter_count()) throw SortError("letter outside the alphabet");
  size_t pre = w.prefix.size(), cyc = w.cycle.size();
  size_t total = pre + cyc;
  auto letter_at = [&](size_t pos) {
    return pos < pre ? w.prefix[pos] : w.cycle[pos - pre];
  };
  auto next_pos = [&](size_t pos) { return pos + 1 < total ? pos + 1 : pre; };
  std::vector<char> seen(static_cast<size_t>(a.n) * total, 0);
  std::vector<std::pair<int, size_t>> stack;
  auto push = [&](int q, size_t pos) {
    size_t k = static_cast<size_t>(q) * total + pos;
    if (!seen[k]) {
      seen[k] = 1;
      stack.push_back({q, pos});
    }
  };
  for (int q : a.initial) push(q, 0);
  while (!stack.empty()) {
    auto [q, pos] = stack.back();
    stack.pop_back();
    Letter l = letter_at(pos);
    for (const auto& [ll, d] : a.out[q])
      if (ll == l) push(d, next_pos(pos));
  }
  for (int q = 0; q < a.n; ++q) {
    if (!a.accepting[q]) continue;
    for (size_t pos = pre; pos < total; ++pos) {
      if (!seen[static_cast<size_t>(q) * total + pos]) continue;
      std::vector<char> vis(static_cast<size_t>(a.n) * total, 0);
      std::queue<std::pair<int, size_t>> bfs;
      bfs.push({q, pos});
      while (!bfs.empty()) {
        auto [x, xp] = bfs.front();
        bfs.pop();
        Letter l = letter_at(xp);
        size_t np = next_pos(xp);
        for (const auto& [ll, d] : a.out[x]) {
          if (ll != l) continue;
          if (d == q && np == pos) return true;
          size_t k = static_cast<size_t>(d) * total + np;
          if (!vis[k]) {
            vis[k] = 1;
            bfs.push({d, np});
          }
        }
      }
    }
  }
  return false;
}

std::optional<LassoWord> is_empty(const NBW& a0) {
  NBW a = simplify(a0);
  if (a.initial.empty() || a.n == 0) return std::nullopt;
  // Accepting states on cycles are those inside components with an internal
  // edge; find the shortest path to one and close a cycle through it.
  int nscc = 0;
  std::vector<int> comp = scc_ids(a, nscc);
  std::vector<char> has_edge(std::max(nscc, 1), 0);
  for (int q = 0; q < a.n; ++q)
    for (const auto& [l, d] : a.out[q])
      if (comp[q] == comp[d]) has_edge[comp[q]] = 1;
  std::vector<int> parent(a.n, -1);
  std::vector<Letter> via(a.n, 0);
  std::vector<char> seen(a.n, 0);
  std::queue<int> bfs;
  for (int q : a.initial) {
    seen[q] = 1;
    bfs.push(q);
  }
  int target = -1;
  while (!bfs.empty()) {
    int q = bfs.front();
    bfs.pop();
    if (a.accepting[q] && has_edge[comp[q]]) {
      target = q;
      break;
    }
    for (const auto& [l, d] : a.out[q]) {
      if (!seen[d]) {
        seen[d] = 1;
        parent[d] = q;
        via[d] = l;
        bfs.push(d);
      }
    }
  }
  if (target == -1) return std::nullopt;
  LassoWord w;
  {
    std::vector<Letter> rev;
    for (int q = target; parent[q] != -1; q = parent[q]) rev.push_back(via[q]);
    w.prefix.assign(rev.rbegin(), rev.rend());
  }
  // shortest cycle target -> target
  std::vector<int> cpar(a.n, -2);  // -2 unvisited, -1 adjacent to target
  std::vector<Letter> cvia(a.n, 0);
  std::queue<int> cb;
  std::vector<Letter> cycle;
  for (const auto& [l, d] : a.out[target]) {
    if (d == target) {
      cycle = {l};
      break;
    }
    if (cpar[d] == -2) {
      cpar[d] = -1;
      cvia[d] = l;
      cb.push(d);
    }
  }
  while (cycle.empty() && !cb.empty()) {
    int q = cb.front();
    cb.pop();
    bool done = false;
    for (const auto& [l, d] : a.out[q]) {
      if (d == target) {
        std::vector<Letter> rev{l};
        for (int x = q; x != -1; x = cpar[x]) rev.push_back(cvia[x]);
        cycle.assign(rev.rbegin(), rev.rend());
        done = true;
        break;
      }
      if (cpar[d] == -2) {
        cpar[d] = q;
        cvia[d] = l;
        cb.push(d);
      }
    }
    if (done) break;
  }
  if (cycle.empty()) return std::nullopt;
  w.cycle = std::move(cycle);
  if (!accepts(a0, w))
    throw EvalError("internal: emptiness witness failed verification");
  return w;
}

UPSet lasso_track_set(const NBW& a, const LassoWord& w,
                      const std::string& track) {
  int idx = a.track_index(track);
  if (idx < 0) throw SortError("no track named '" + track + "'");
  UPSet s;
  for (Letter l : w.prefix) s.prefix.push_back((l >> idx) & 1);
  for (Letter l : w.cycle) s.period.push_back((l >> idx) & 1);
  if (s.period.empty()) s.period.push_back(0);
  return canonicalize(s);
}

std::string to_dot(const NBW& a) {
  std::ostringstream out;
  out << "digraph nbw {\n  rankdir=LR;\n  node [shape=circle];\n";
  out << "  init [shape=point];\n";
  for (int q = 0; q < a.n; ++q)
    if (a.accepting[q]) out << "  s" << q << " [shape=doublecircle];\n";
  for (int q : a.initial) out << "  init -> s" << q << ";\n";
  for (int q = 0; q < a.n; ++q) {
    for (const auto& [l, d] : a.out[q]) {
      out << "  s" << q << " -> s" << d << " [label=\"";
      if (a.tracks.empty()) {
        out << "()";
      } else {
        for (size_t i = 0; i < a.tracks.size(); ++i) {
          if (i) out << ",";
          out << a.tracks[i].name << "=" << ((l >> i) & 1);
        }
      }
      out << "\"];\n";
    }
  }
  out << "}\n";
  return out.str();
}

// ----------------------------------------------------------------- fromS1S

namespace {

NBW atom_automaton(const std::vector<Track>& tracks,
                   const std::vector<std::vector<std::pair<Letter, int>>>& out,
                   std::vector<char> accepting, std::vector<int> initial) {
  NBW a;
  a.tracks = tracks;
  a.n = static_cast<int>(out.size());
  a.out = out;
  a.accepting = std::move(accepting);
  a.initial = std::move(initial);
  finalize(a);
  return a;
}

NBW member_atom(const std::string& so, const std::string& fo) {
  std::vector<Track> tr;
  int so_bit, fo_bit;
  if (so < fo) {
    tr = {Track{so, false}, Track{fo, true}};
    so_bit = 0;
    fo_bit = 1;
  } else {
    tr = {Track{fo, true}, Track{so, false}};
    fo_bit = 0;
    so_bit = 1;
  }
  Letter fo_mask = Letter{1} << fo_bit, so_mask = Letter{1} << so_bit;
  std::vector<std::vector<std::pair<Letter, int>>> out(2);
  for (Letter l = 0; l < 4; ++l) {
    if (!(l & fo_mask)) {
      out[0].push_back({l, 0});
      out[1].push_back({l, 1});
    } else if (l & so_mask) {
      out[0].push_back({l, 1});
    }
  }
  return atom_automaton(tr, out, {0, 1}, {0});
}

NBW eq_atom(const std::string& x, const std::string& y) {
  if (x == y) {
    std::vector<std::vector<std::pair<Letter, int>>> out(2);
    out[0] = {{0, 0}, {1, 1}};
    out[1] = {{0, 1}};
    return atom_automaton({Track{x, true}}, out, {0, 1}, {0});
  }
  std::vector<Track> tr{Track{std::min(x, y), true},
                        Track{std::max(x, y), true}};
  std::vector<std::vector<std::pair<Letter, int>>> out(2);
  out[0] = {{0, 0}, {3, 1}};
  out[1] = {{0, 1}};
  return atom_automaton(tr, out, {0, 1}, {0});
}

NBW succ_atom(const std::string& x, const std::string& y) {
  if (x == y) {
    std::vector<std::vector<std::pair<Letter, int>>> out(1);
    out[0] = {{0, 0}};
    return atom_automaton({Track{x, true}}, out, {0}, {0});
  }
  bool x_first = x < y;
  std::vector<Track> tr{Track{x_first ? x : y, true},
                        Track{x_first ? y : x, true}};
  Letter xm = x_first ? 1 : 2, ym = x_first ? 2 : 1;
  std::vector<std::vector<std::pair<Letter, int>>> out(3);
  out[0] = {{0, 0}, {xm, 1}};
  out[1] = {{ym, 2}};
  out[2] = {{0, 2}};
  return atom_automaton(tr, out, {0, 0, 1}, {0});
}

NBW leq_atom(const std::string& x, const std::string& y, bool strict) {
  if (x == y) {
    if (!strict) return eq_atom(x, x);
    std::vector<std::vector<std::pair<Letter, int>>> out(1);
    out[0] = {{0, 0}};
    return atom_automaton({Track{x, true}}, out, {0}, {0});
  }
  bool x_first = x < y;
  std::vector<Track> tr{Track{x_first ? x : y, true},
                        Track{x_first ? y : x, true}};
  Letter xm = x_first ? 1 : 2, ym = x_first ? 2 : 1;
  std::vector<std::vector<std::pair<Letter, int>>> out(3);
  out[0] = {{0, 0}, {xm, 1}};
  if (!strict) out[0].push_back({static_cast<Letter>(xm | ym), 2});
  out[1] = {{0, 1}, {ym, 2}};
  out[2] = {{0, 2}};
  return atom_automaton(tr, out, {0, 0, 1}, {0});
}

NBW eq_zero_atom(const std::string& x) {
  std::vector<std::vector<std::pair<Letter, int>>> out(2);
  out[0] = {{1, 1}};
  out[1] = {{0, 1}};
  return atom_automaton({Track{x, true}}, out, {0, 1}, {0});
}

NBW succ_closed_atom(const std::string& z) {
  // once the bit holds it holds forever
  std::vector<std::vector<std::pair<Letter, int>>> out(2);
  out[0] = {{0, 0}, {1, 1}};
  out[1] = {{1, 1}};
  return atom_automaton({Track{z, false}}, out, {1, 1}, {0});
}

NBW subset_atom(const std::string& x, const std::string& y) {
  if (x == y) {
    std::vector<std::vector<std::pair<Letter, int>>> out(1);
    out[0] = {{0, 0}, {1, 0}};
    return atom_automaton({Track{x, false}}, out, {1}, {0});
  }
  bool x_first = x < y;
  std::vector<Track> tr{Track{x_first ? x : y, false},
                        Track{x_first ? y : x, false}};
  Letter xm = x_first ? 1 : 2, ym = x_first ? 2 : 1;
  std::vector<std::vector<std::pair<Letter, int>>> out(1);
  for (Letter l = 0; l < 4; ++l)
    if (!(l & xm) || (l & ym)) out[0].push_back({l, 0});
  return atom_automaton(tr, out, {1}, {0});
}

NBW trackless(bool accept_everything) {
  NBW a;
  a.n = 1;
  a.out.resize(1);
  if (accept_everything) a.out[0].push_back({0, 0});
  a.accepting = {static_cast<char>(accept_everything ? 1 : 0)};
  a.initial = {0};
  return a;
}

bool upset_subset(const UPSet& x, const UPSet& y) {
  uint64_t bound =
      std::max(x.prefix.size(), y.prefix.size()) +
      lcm_u64(x.period.empty() ? 1 : x.period.size(),
              y.period.empty() ? 1 : y.period.size());
  for (uint64_t i = 0; i < bound; ++i)
    if (x.contains(i) && !y.contains(i)) return false;
  return true;
}

bool upset_succ_closed(const UPSet& s) {
  uint64_t bound = s.prefix.size() + s.period.size() + 1;
  for (uint64_t i = 0; i < bound; ++i)
    if (s.contains(i) && !s.contains(i + 1)) return false;
  return true;
}

// Safety automaton over one membership track shadowing a fixed set: at every
// position the track bit must imply (or be implied by) the set bit.
NBW subset_with_constant(const UPSet& s0, const std::string& so,
                         bool constant_on_left) {
  UPSet s = canonicalize(s0);
  size_t l = s.prefix.size(), p = s.period.size();
  std::vector<std::vector<std::pair<Letter, int>>> out(l + p);
  for (size_t k = 0; k < l + p; ++k) {
    bool bit = k < l ? s.prefix[k] != 0 : s.period[k - l] != 0;
    int next = static_cast<int>(k + 1 < l + p ? k + 1 : l);
    for (Letter b = 0; b < 2; ++b) {
      bool track = b != 0;
      // constant_on_left: s ⊆ track, else track ⊆ s
      bool ok = constant_on_left ? (!bit || track) : (!track || bit);
      if (ok) out[k].push_back({b, next});
    }
  }
  return atom_automaton({Track{so, false}}, out,
                        std::vector<char>(l + p, 1), {0});
}

// Membership of a first-order position in a fixed ultimately periodic set:
// a lasso-shaped safety automaton over the position track alone.
NBW member_of_constant(const UPSet& s0, const std::string& fo) {
  UPSet s = canonicalize(s0);
  size_t l = s.prefix.size(), p = s.period.size();
  int done = static_cast<int>(l + p);
  std::vector<std::vector<std::pair<Letter, int>>> out(l + p + 1);
  for (size_t k = 0; k < l + p; ++k) {
    size_t next = k + 1 < l + p ? k + 1 : l;
    out[k].push_back({0, static_cast<int>(next)});
    if (k < l ? s.prefix[k] : s.period[k - l])
      out[k].push_back({1, done});
  }
  out[done].push_back({0, done});
  std::vector<char> acc(l + p + 1, 0);
  acc[done] = 1;
  return atom_automaton({Track{fo, true}}, out, acc, {0});
}

struct S1SBuilder {
  const AutomataLimits& limits;
  const std::map<std::string, UPSet>* constants = nullptr;

  NBW build(const SPtr& f) {
    s1s_abbrev::Recognized rec;
    if (s1s_abbrev::recognize(f, rec)) {
      using AK = s1s_abbrev::AbbrevKind;
      const UPSet* cx = nullptr;
      const UPSet* cy = nullptr;
      if (constants) {
        auto ix = constants->find(rec.x);
        if (ix != constants->end()) cx = &ix->second;
        auto iy = constants->find(rec.y);
        if (iy != constants->end()) cy = &iy->second;
      }
      switch (rec.kind) {
        case AK::Less: return leq_atom(rec.x, rec.y, true);
        case AK::Leq: return leq_atom(rec.x, rec.y, false);
        case AK::EqZero: return eq_zero_atom(rec.x);
        case AK::SuccClosed:
          if (cx) return trackless(upset_succ_closed(*cx));
          return succ_closed_atom(rec.x);
        case AK::Subset:
          if (cx && cy) return trackless(upset_subset(*cx, *cy));
          if (cx) return subset_with_constant(*cx, rec.y, true);
          if (cy) return subset_with_constant(*cy, rec.x, false);
          return subset_atom(rec.x, rec.y);
      }
    }
    switch (f->kind) {
      case SKind::Member: {
        if (constants) {
          auto it = constants->find(f->a);
          if (it != constants->end())
            return member_of_constant(it->second, f->b);
        }
        return member_atom(f->a, f->b);
      }
      case SKind::Eq: return eq_atom(f->a, f->b);
      case SKind::Succ: return succ_atom(f->a, f->b);
      case SKind::Or: return union_(build(f->lhs), build(f->rhs), limits);
      case SKind::And: return intersect(build(f->lhs), build(f->rhs), limits);
      case SKind::Not: {
        if (f->lhs->kind == SKind::Not) return build(f->lhs->lhs);
        NBW inner = build(f->lhs);
        NBW c = complement(inner, limits);
        for (const auto& t : inner.tracks)
          if (t.first_order) c = impose_fo_discipline(c, t.name, limits);
        return simplify(c);
      }
      case SKind::Exists1:
      case SKind::Exists2: {
        NBW inner = build(f->lhs);
        if (inner.track_index(f->a) < 0) return inner;  // vacuous binder
        NBW p = project(inner, f->a);
        if (f->kind == SKind::Exists1) {
          std::vector<Track> remaining = p.tracks;
          for (const auto& t : remaining)
            if (t.first_order) p = impose_fo_discipline(p, t.name, limits);
        }
        return simplify(p);
      }
      case SKind::Forall1:
      case SKind::Forall2: {
        SPtr ex = f->kind == SKind::Forall1
                      ? sf::exists1(f->a, sf::not_(f->lhs))
                      : sf::exists2(f->a, sf::not_(f->lhs));
        return build(sf::not_(ex));
      }
    }
    throw ShapeError("unreachable");
  }
};

}  // namespace

NBW from_s1s(const SPtr& f, const AutomataLimits& limits,
             const std::map<std::string, UPSet>* constants) {
  s1s_free_vars(f);  // sort consistency
  S1SBuilder b{limits, constants};
  NBW a = simplify(b.build(f));
  check_tracks(a, limits);
  return a;
}

}  // namespace hypertrace
