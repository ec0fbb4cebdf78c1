#pragma once
// Difference measurement between models and the closeness ordering.
//
// A DiffVector records the five change sets between a base model and an
// updated model — added edges, removed edges, relabeled states, added states,
// removed states — plus the per-state label delta for each relabeled state.
// Model m1 is at least as close to the base as m2 when every change set of m1
// is contained in the corresponding set of m2, and, whenever both relabel
// exactly the same states, each per-state label delta of m1 is contained in
// m2's delta for that state.

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <utility>

#include "json.hpp"

#include "ctlrepair/kripke.hpp"

namespace ctlrepair {

struct LabelDelta {
  std::set<std::string> added;    // atoms in L'(s) but not L(s)
  std::set<std::string> removed;  // atoms in L(s) but not L'(s)

  // The symmetric difference diff(L(s), L'(s)) as a plain atom set. Both
  // deltas in a comparison share the same base label, so an atom common to two
  // symmetric differences always moved in the same direction — plain set
  // containment is exact.
  std::set<std::string> symmetric() const;

  bool operator==(const LabelDelta&) const = default;
};

struct DiffVector {
  std::set<std::pair<std::string, std::string>> added_edges;    // R' - R
  std::set<std::pair<std::string, std::string>> removed_edges;  // R - R'
  std::set<std::string> relabeled_states;  // {s in S∩S' : L(s) != L'(s)}
  std::set<std::string> added_states;      // S' - S
  std::set<std::string> removed_states;    // S - S'
  std::map<std::string, LabelDelta> label_deltas;  // keys = relabeled_states

  bool empty() const;
  // Total number of elementary changes; used only for deterministic output
  // ordering, never for closeness decisions.
  std::size_t total_size() const;

  bool operator==(const DiffVector&) const = default;
};

DiffVector compute_diff(const KripkeModel& base, const KripkeModel& other);

// True iff m1 is at least as close to base as m2 (see header comment). The
// DiffVector overloads expect both diffs computed against the same base.
bool closer_or_equal(const DiffVector& d1, const DiffVector& d2);
bool closer_or_equal(const KripkeModel& base, const KripkeModel& m1, const KripkeModel& m2);

bool strictly_closer(const DiffVector& d1, const DiffVector& d2);
bool strictly_closer(const KripkeModel& base, const KripkeModel& m1, const KripkeModel& m2);

nlohmann::json diff_to_json(const DiffVector& d);

}  // namespace ctlrepair
