#pragma once
// Kripke model data structure, serialization, reachability, and DOT export.
//
// Model document (line-oriented text; '#' starts a comment):
//   atoms: p q r
//   state <name> [: atom atom ...]
//   init: <name> <name> ...
//   trans: <from> -> <to>
// JSON equivalent: {"atoms": [...], "states": {name: [atoms]}, "init": [...],
// "trans": [[from, to], ...]}. Both round-trip bit-exactly under canonical
// ordering (lexicographic by state name, then target name).
//
// Reserved names: "#" is the internal dummy root used to make initial-state
// edits measurable; names starting with "_u" are reserved for fresh states
// created during update. Both are rejected in input documents.

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace ctlrepair {

struct DiffVector;  // diff.hpp

inline constexpr const char* kDummyName = "#";
inline constexpr const char* kFreshPrefix = "_u";

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// M = (S, R, L) with declared atom universe AP and nonempty Init(S) ⊆ S.
// S is the key set of `labels`; L(s) ⊆ atoms for every s.
struct KripkeModel {
  std::set<std::string> atoms;
  std::map<std::string, std::set<std::string>> labels;
  std::set<std::pair<std::string, std::string>> trans;
  std::set<std::string> init;
};

struct PointedModel {
  KripkeModel model;
  std::string start;
};

// Finite representation of an infinite path: stem then a repeating loop.
// The loop is nonempty; consecutive pairs (stem steps, stem→loop head, loop
// steps, loop tail→loop head) are all transitions.
struct Lasso {
  std::vector<std::string> stem;
  std::vector<std::string> loop;
};

bool has_state(const KripkeModel& m, const std::string& name);
bool has_dummy(const KripkeModel& m);

// Throws ModelError when any type invariant fails (undeclared atom, dangling
// transition endpoint, empty or unknown init, reserved name).
void validate_model(const KripkeModel& m);

KripkeModel parse_model(const std::string& text);
KripkeModel parse_model_json(const std::string& text);
KripkeModel model_from_json(const nlohmann::json& j);
nlohmann::json model_to_json(const KripkeModel& m);

// Canonical text document; parse_model(serialize_model(m)) == m.
std::string serialize_model(const KripkeModel& m);

// States reachable from `from` (inclusive) by graph search; the dummy root is
// never part of the result — it is bookkeeping, not a model state.
std::set<std::string> reachable_states(const KripkeModel& m, const std::string& from);
std::set<std::string> reachable_states(const PointedModel& pm);

// Adds the dummy root "#" with an edge to each initial state (no label, no
// incoming edges). Errors if a dummy is already present.
KripkeModel with_dummy(const KripkeModel& m);

// Removes the dummy root and its edges; initial states become the dummy's
// successors. Identity when no dummy is present.
KripkeModel strip_dummy(const KripkeModel& m);

std::set<std::string> successors(const KripkeModel& m, const std::string& s);
std::set<std::string> predecessors(const KripkeModel& m, const std::string& s);

// DOT digraph. The dummy root is omitted. With a highlight diff (computed
// base→this-model): added edges/states are styled bold green, removed ones are
// rendered as dashed ghosts, relabeled states are restyled.
std::string export_dot(const KripkeModel& m, const DiffVector* highlight = nullptr);

// Deterministic serialization for dedup/name-based identity (includes the
// dummy when present, unlike the text format).
std::string canonical_key(const KripkeModel& m);

// FNV-1a 64-bit hash of canonical_key.
std::uint64_t model_hash(const KripkeModel& m);

}  // namespace ctlrepair
