#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hypertrace/formula.hpp"
#include "hypertrace/traces.hpp"

namespace hypertrace {

// One track per variable: second-order tracks carry membership bits, while
// first-order tracks follow the singleton discipline (exactly one set bit in
// any valid encoding).
struct Track {
  std::string name;
  bool first_order = false;
  bool operator==(const Track&) const = default;
};

using Letter = uint32_t;  // bit i = tracks[i]

struct AutomataLimits {
  int max_tracks = 16;
  int rank_input_cap = 12;       // complement falls back to an error beyond
  size_t macro_budget = 200000;  // constructed-state cap for subset spaces
  size_t transition_budget = 20000000;
};

// Nondeterministic Büchi automaton over bit-vector letters.
struct NBW {
  std::vector<Track> tracks;  // sorted by name
  int n = 0;
  std::vector<std::vector<std::pair<Letter, int>>> out;  // sorted, unique
  std::vector<int> initial;
  std::vector<char> accepting;

  size_t letter_count() const { return size_t{1} << tracks.size(); }
  int track_index(const std::string& name) const;
};

// Finite presentation of an ultimately periodic word.
struct LassoWord {
  std::vector<Letter> prefix;
  std::vector<Letter> cycle;  // nonempty
};

// Reachable/productive pruning plus merging of indistinguishable states.
NBW simplify(const NBW& a);

bool is_deterministic(const NBW& a);
bool is_weak(const NBW& a);  // every SCC uniformly accepting or rejecting

// Language complement.  Deterministic input goes through the two-copy
// construction, weak input through a breakpoint determinization, and the
// general case through the rank-based construction (ranks up to 2·|states|,
// acceptance through the odd-rank tracking set); the general path refuses
// automata above limits.rank_input_cap.
NBW complement(const NBW& a, const AutomataLimits& limits = {});

NBW intersect(const NBW& a, const NBW& b, const AutomataLimits& limits = {});
NBW union_(const NBW& a, const NBW& b, const AutomataLimits& limits = {});
NBW project(const NBW& a, const std::string& track);

// L(result) = L(a) ∩ { words whose track equals the characteristic sequence
// of s }, via product with the (prefix+period)-state automaton of s.
NBW constrain_track_to_constant(const NBW& a, const std::string& track,
                                const UPSet& s,
                                const AutomataLimits& limits = {});

// Intersection with the singleton-discipline automaton for a track.
NBW impose_fo_discipline(const NBW& a, const std::string& track,
                         const AutomataLimits& limits = {});

// Empty-language test; a witness lasso (verified by accepts) otherwise.
std::optional<LassoWord> is_empty(const NBW& a);

bool accepts(const NBW& a, const LassoWord& w);

std::string to_dot(const NBW& a);

// Büchi automaton for an S1S formula: L = encodings of satisfying
// assignments.  Second-order tracks carry membership bits; first-order
// tracks the singleton encoding of the value.  order-abbreviation expansions
// are recognized and built directly.  Entries of `constants` pin
// second-order variables to fixed sets at the atom level, so those
// variables never become tracks.
NBW from_s1s(const SPtr& f, const AutomataLimits& limits = {},
             const std::map<std::string, UPSet>* constants = nullptr);

// Track value extraction from an emptiness witness.
UPSet lasso_track_set(const NBW& a, const LassoWord& w,
                      const std::string& track);

}  // namespace hypertrace
