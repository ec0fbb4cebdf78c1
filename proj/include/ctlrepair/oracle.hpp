#pragma once
// Brute-force reference implementations for cross-checking the checker and
// the update engine, usable only at desk scale. Everything here trades speed
// for literal-mindedness: the model space is enumerated one primitive edit at
// a time, and formulas are evaluated by unfolding actual paths instead of
// computing fixpoints. Guards are hard errors, not timeouts — past them the
// search is astronomically large and must refuse, not crawl.

#include <cstddef>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "ctlrepair/formula.hpp"
#include "ctlrepair/kripke.hpp"

namespace ctlrepair {

class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bounds for exhaustive enumeration.
struct EditBudget {
  std::size_t max_ops = 0;
  std::size_t allow_new_states = 0;
  std::set<std::string> atom_universe;
};

// Every model reachable from `base` by at most b.max_ops primitive edits
// (same preconditions as apply_pu1..apply_pu5), each exactly once up to
// canonical form, in deterministic order: breadth-first by edit count, then
// by canonical key. The output for budget k is a prefix of the output for
// budget k+1. Relabelings and fresh-state labels range over subsets of
// b.atom_universe restricted to the model's own universe.
//
// Guards: |S| + allow_new_states <= 6, |atom_universe| <= 3, max_ops <= 3.
std::vector<KripkeModel> enumerate_models(const KripkeModel& base, const EditBudget& b);

// The models in the enumerated universe that keep the start state, satisfy f
// there (per brute_force_check), and are minimal under the closeness
// ordering within that universe — an antichain, sorted by (diff size,
// canonical key). A satisfied input yields exactly the base model.
std::vector<KripkeModel> brute_force_admissible(const PointedModel& base, const FormulaPtr& f,
                                                const EditBudget& b);

// Path-unfolding evaluation: enumerates every maximal path shape from the
// relevant states — simple stems closed by a back edge (lassos) and simple
// stems ending in a deadlock — and applies the path clauses directly.
// Agrees with checker.check on its guarded domain.
//
// Guards: |S| <= 6, formula depth <= 4.
bool brute_force_check(const PointedModel& pm, const FormulaPtr& f);

}  // namespace ctlrepair
