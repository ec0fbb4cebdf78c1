#pragma once
// CTL model checking by fixpoint labeling, plus valid-witness detection for
// AEClass formulas.
//
// Path semantics: a path is a maximal sequence of transitions — either
// infinite, or finite and ending at a state with no successors. Consequences
// at a deadlocked state s: AX/AG/AF-style obligations over successors hold
// vacuously only for AX; AG g, AF g, EG g, and EF g all reduce to g(s) (the
// single maximal path from s is [s]); E[f1 U f2] and A[f1 U f2] reduce to
// f2(s); EX g is false. The textbook dualities (AG/EF, AF/EG, AX/EX, AU/EU)
// hold on every model under this convention, serial or not.

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ctlrepair/formula.hpp"
#include "ctlrepair/kripke.hpp"

namespace ctlrepair {

class CheckError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Propositional evaluation of f against a plain atom set (atoms absent from
// the set are false). Throws CheckError when f contains a temporal operator.
bool label_satisfies(const std::set<std::string>& label, const FormulaPtr& f);

struct SatLabeling {
  // Printed subformula -> satisfying states, for every distinct subformula.
  std::map<std::string, std::set<std::string>> by_formula;
  // Satisfying states of the whole checked formula.
  std::set<std::string> root;
};

// Bottom-up fixpoint labeling over all 15 connectives directly (no normalize
// detour), so callers can inspect Sat per original subformula. Atoms not in
// the model's universe are everywhere-false.
SatLabeling sat_set(const KripkeModel& m, const FormulaPtr& f);

std::set<std::string> sat_states(const KripkeModel& m, const FormulaPtr& f);

bool check(const KripkeModel& m, const std::string& state, const FormulaPtr& f);
bool check(const PointedModel& pm, const FormulaPtr& f);

// For goals of the form AG psi with propositional psi: the reachable states
// whose label violates psi. Throws CheckError on any other formula shape.
std::set<std::string> false_states(const KripkeModel& m, const std::string& start,
                                   const FormulaPtr& f);

// One atomic AEClass subformula's witnesses. AX/EX forms report valid states;
// the six path forms report valid paths as lassos:
//   AX g : successors s of s0 with L(s) |= g
//   EX g : any state s with L(s) |= g
//   AG g : paths from s0 with every state's label satisfying g
//   AF g : paths from s0 with some position >= 1 label-satisfying g
//   A[f1 U f2] : paths from s0 with a label-level f2 hit whose prefix
//                label-satisfies f1
//   EG g : paths from any s'0 != s0 staying label-inside g, provided
//          L(s0) |= g
//   EF g : paths from any s'0 != s0 with a position >= 1 g-hit
//   E[f1 U f2] : like A[U] but from any s'0 != s0, provided L(s0) |= f1
// Lassos represent infinite paths only; a formula witnessed solely by
// dead-end paths reports none (callers fall back to the general engine).
struct WitnessEntry {
  FormulaPtr subformula;
  std::set<std::string> valid_states;
  std::vector<Lasso> valid_paths;
  bool is_state_form = false;  // AX/EX

  bool has_witness() const {
    return is_state_form ? !valid_states.empty() : !valid_paths.empty();
  }
};

struct WitnessReport {
  std::vector<WitnessEntry> entries;

  // True when every atomic subformula has a valid state or path.
  bool complete() const;
};

// Witness detection for an AEClass formula. On small models (|S| <= 8) path
// entries enumerate every simple lasso satisfying the clause; on larger
// models they are extracted constructively (each extraction removes an edge
// of the found lasso from a scratch copy and retries), capped at
// max_paths_per_formula. Throws CheckError when f is not in AEClass.
WitnessReport find_witness(const PointedModel& pm, const FormulaPtr& f,
                           std::size_t max_paths_per_formula = 64);

}  // namespace ctlrepair
