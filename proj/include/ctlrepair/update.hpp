#pragma once
// Minimal-change model repair: given a model that violates a CTL formula,
// produce nearby variants that satisfy it.
//
// Edits are expressed through five primitive operations:
//   PU1 add a transition        PU2 remove a transition
//   PU3 replace a state label   PU4 add a fresh state
//   PU5 remove an isolated state
// A candidate repair is a model plus the primitive trace that produced it,
// its diff against the base, and two quality flags: `admissible` (no other
// emitted candidate is strictly closer to the base) and `committed`
// (admissible, and no other candidate's set of unchanged reachable states
// strictly contains this one's).
//
// The general engine (ctl_update) works in rounds: each round inspects why
// the normalized formula currently fails and branches on every primitive
// repair that can remove that particular obstruction (relabel a witness
// state, cut a witness edge, wire toward a satisfying region, or grow a
// fresh state). Rounds repeat until the formula holds, a recursion cap is
// hit, or the candidate budget is exhausted; every emitted candidate is
// re-verified by the checker, including any side constraints.

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ctlrepair/checker.hpp"
#include "ctlrepair/diff.hpp"
#include "ctlrepair/formula.hpp"
#include "ctlrepair/kripke.hpp"
#include "json.hpp"

namespace ctlrepair {

class UpdateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ── Primitive operations ────────────────────────────────────────────────────
// Each returns the edited model and throws UpdateError when its precondition
// fails. None of them may touch the dummy root or the initial-state set.

// PU1: add the transition from -> to (must not exist yet).
KripkeModel apply_pu1(const KripkeModel& m, const std::string& from, const std::string& to);
// PU2: remove the transition from -> to (must exist).
KripkeModel apply_pu2(const KripkeModel& m, const std::string& from, const std::string& to);
// PU3: replace the label of `state` with `label` (subset of the atom
// universe; must differ from the current label).
KripkeModel apply_pu3(const KripkeModel& m, const std::string& state,
                      const std::set<std::string>& label);
// PU4: add a new state with the given label and no transitions.
KripkeModel apply_pu4(const KripkeModel& m, const std::string& name,
                      const std::set<std::string>& label);
// PU5: remove a non-initial state that has no incident transitions.
KripkeModel apply_pu5(const KripkeModel& m, const std::string& state);

struct TraceStep {
  std::string op;  // "PU1" .. "PU5"
  nlohmann::json args;
};

nlohmann::json trace_to_json(const std::vector<TraceStep>& trace);

// ── Label search ────────────────────────────────────────────────────────────

// Labels reachable from `label` by flipping a subset-minimal set of the
// formula's atoms (restricted to the declared universe) such that the result
// satisfies the propositional formula f. At most `cap` labels, preferring
// fewer flips, then lexicographically smaller flip sets. Throws UpdateError
// when no label over the universe satisfies f (e.g. it hinges on an
// undeclared atom).
std::vector<std::set<std::string>> minimal_assignments(const std::set<std::string>& label,
                                                       const FormulaPtr& f,
                                                       const std::set<std::string>& atoms,
                                                       std::size_t cap = 16);

// ── Update engine ───────────────────────────────────────────────────────────

struct UpdateCandidate {
  KripkeModel model;
  std::string start;  // the repaired start state (unrenamed by the edits)
  std::vector<TraceStep> trace;
  DiffVector diff;  // base -> model
  // Base-reachable states that are still reachable and carry the same label.
  std::set<std::string> unchanged_reachable;
  bool admissible = false;
  bool committed = false;
};

struct UpdateConfig {
  std::size_t max_new_states = 2;
  // Longest primitive trace explored; 0 means 3 * formula size.
  std::size_t recursion_cap = 0;
  std::size_t max_candidates = 256;
  std::size_t min_assignments_cap = 16;
  std::size_t max_expansions = 20000;
  // Keep only committed candidates (drivers drop the rest after flagging).
  bool committed = false;
  // Additional formulas every candidate must satisfy at the start state(s).
  std::vector<FormulaPtr> constraints;
};

struct UpdateResult {
  std::vector<UpdateCandidate> candidates;
  // True when caps cut the search short (more repairs may exist).
  bool budget_exhausted = false;
};

// Single-start repair search. Emits every distinct verified repair found
// within the caps, flagged and sorted by (diff size, canonical form). A model
// that already satisfies f yields exactly the identity candidate.
UpdateResult ctl_update(const PointedModel& pm, const FormulaPtr& f,
                        const UpdateConfig& cfg = {});

// Shape-checked entry points, one per connective. Each requires f to have
// the stated form (after stripping nothing — the outermost operator is
// inspected as written) and runs the same verified search as ctl_update.
UpdateResult update_prop(const PointedModel& pm, const FormulaPtr& f,
                         const UpdateConfig& cfg = {});  // propositional f
UpdateResult update_ex(const PointedModel& pm, const FormulaPtr& f,
                       const UpdateConfig& cfg = {});  // EX g
UpdateResult update_af(const PointedModel& pm, const FormulaPtr& f,
                       const UpdateConfig& cfg = {});  // AF g
UpdateResult update_eu(const PointedModel& pm, const FormulaPtr& f,
                       const UpdateConfig& cfg = {});  // E[g1 U g2]
UpdateResult update_and(const PointedModel& pm, const FormulaPtr& f,
                        const UpdateConfig& cfg = {});  // g1 & g2
UpdateResult update_or(const PointedModel& pm, const FormulaPtr& f,
                       const UpdateConfig& cfg = {});  // g1 | g2
UpdateResult update_not(const PointedModel& pm, const FormulaPtr& f,
                        const UpdateConfig& cfg = {});  // !g

// Multi-start driver: repairs each violated initial state in ascending order,
// composing the per-start repairs, then verifies candidates at every initial
// state. Flags and order are recomputed over the composed set.
UpdateResult update_model(const KripkeModel& m, const FormulaPtr& f,
                          const UpdateConfig& cfg = {});

// One-pass repair construction for formulas in the single-quantifier class
// (no mixed A/E nesting), driven by a witness report: cut every invalid
// successor (AX), disconnect invalid regions (AG/AF/AU), or wire the start
// to a valid state or path head (EX/EG/EF/EU). Every result is
// checker-verified. When the report lacks a witness for some subformula the
// construction cannot run and the call falls back to the general engine.
std::vector<UpdateCandidate> fast_path_aeclass(const PointedModel& pm, const FormulaPtr& f,
                                               const WitnessReport& report,
                                               const UpdateConfig& cfg = {});
// Convenience overload: computes the witness report itself.
std::vector<UpdateCandidate> fast_path_aeclass(const PointedModel& pm, const FormulaPtr& f,
                                               const UpdateConfig& cfg = {});

// Committed repairs for goals AF g with propositional g, built directly:
// relabel the state shared by the most g-avoiding lassos (excluding the
// start, ties lexicographically), or cut the start's first step into such a
// lasso when the severed state stays on a valid path.
std::vector<UpdateCandidate> update_af_committed(const PointedModel& pm, const FormulaPtr& f,
                                                 const UpdateConfig& cfg = {});

// Keep only candidates not strictly dominated by another in the set
// (pairwise diff comparison against `base`). Survivors are re-flagged
// admissible and sorted by (diff size, canonical form).
std::vector<UpdateCandidate> filter_admissible(const PointedModel& base,
                                               std::vector<UpdateCandidate> candidates);

// Among already-admissible candidates, keep those whose unchanged-reachable
// set (relative to `base`) is not strictly contained in another's. Survivor
// sets form an antichain under strict inclusion.
std::vector<UpdateCandidate> filter_committed(const PointedModel& base,
                                              std::vector<UpdateCandidate> candidates);

// Recompute the admissible/committed flags of `candidates` against each
// other (pairwise dominance; then strict-inclusion maximality of the
// unchanged-reachable sets among the admissible) and sort by (diff size,
// canonical form).
void flag_and_sort(std::vector<UpdateCandidate>& candidates);

// Base-reachable states still reachable and identically labeled in `other`,
// where reachability unions over all initial states.
std::set<std::string> unchanged_reachable(const KripkeModel& base, const KripkeModel& other);
// Same, with reachability taken from the base's start state on both sides.
std::set<std::string> unchanged_reachable(const PointedModel& base, const KripkeModel& other);
std::set<std::string> unchanged_reachable(const PointedModel& base, const UpdateCandidate& cand);

}  // namespace ctlrepair
