#include "ctlrepair/update.hpp"

#include <algorithm>
#include <deque>
#include <map>

namespace ctlrepair {

// ── Primitive operations ────────────────────────────────────────────────────

namespace {

void require_plain_state(const KripkeModel& m, const std::string& s, const char* op) {
  if (!has_state(m, s))
    throw UpdateError(std::string(op) + ": unknown state '" + s + "'");
  if (s == kDummyName)
    throw UpdateError(std::string(op) + ": the dummy root cannot be edited");
}

}  // namespace

KripkeModel apply_pu1(const KripkeModel& m, const std::string& from, const std::string& to) {
  require_plain_state(m, from, "PU1");
  require_plain_state(m, to, "PU1");
  if (m.trans.count({from, to}))
    throw UpdateError("PU1: transition " + from + " -> " + to + " already exists");
  KripkeModel out = m;
  out.trans.insert({from, to});
  return out;
}

KripkeModel apply_pu2(const KripkeModel& m, const std::string& from, const std::string& to) {
  require_plain_state(m, from, "PU2");
  require_plain_state(m, to, "PU2");
  if (!m.trans.count({from, to}))
    throw UpdateError("PU2: transition " + from + " -> " + to + " does not exist");
  KripkeModel out = m;
  out.trans.erase({from, to});
  return out;
}

KripkeModel apply_pu3(const KripkeModel& m, const std::string& state,
                      const std::set<std::string>& label) {
  require_plain_state(m, state, "PU3");
  for (const auto& a : label) {
    if (!m.atoms.count(a))
      throw UpdateError("PU3: atom '" + a + "' is not in the model's universe");
  }
  if (m.labels.at(state) == label)
    throw UpdateError("PU3: label of '" + state + "' is unchanged");
  KripkeModel out = m;
  out.labels[state] = label;
  return out;
}

KripkeModel apply_pu4(const KripkeModel& m, const std::string& name,
                      const std::set<std::string>& label) {
  if (name.empty() || name == kDummyName)
    throw UpdateError("PU4: invalid state name");
  if (has_state(m, name)) throw UpdateError("PU4: state '" + name + "' already exists");
  for (const auto& a : label) {
    if (!m.atoms.count(a))
      throw UpdateError("PU4: atom '" + a + "' is not in the model's universe");
  }
  KripkeModel out = m;
  out.labels[name] = label;
  return out;
}

KripkeModel apply_pu5(const KripkeModel& m, const std::string& state) {
  require_plain_state(m, state, "PU5");
  if (m.init.count(state)) throw UpdateError("PU5: cannot remove the initial state '" + state + "'");
  for (const auto& [from, to] : m.trans) {
    if (from == state || to == state)
      throw UpdateError("PU5: state '" + state + "' still has transitions");
  }
  KripkeModel out = m;
  out.labels.erase(state);
  return out;
}

nlohmann::json trace_to_json(const std::vector<TraceStep>& trace) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& step : trace) out.push_back({{"op", step.op}, {"args", step.args}});
  return out;
}

// ── Label search ────────────────────────────────────────────────────────────

namespace {

// Same contract as minimal_assignments, except an unsatisfiable formula
// yields an empty list instead of an error (the engine treats it as a branch
// that simply offers nothing).
std::vector<std::set<std::string>> minimal_assignments_impl(const std::set<std::string>& label,
                                                            const FormulaPtr& f,
                                                            const std::set<std::string>& atoms,
                                                            std::size_t cap) {
  if (!is_propositional(f))
    throw UpdateError("minimal_assignments requires a propositional formula");
  std::vector<std::string> togglable;
  for (const auto& a : formula_atoms(f)) {
    if (atoms.count(a)) togglable.push_back(a);
  }
  if (togglable.size() > 12)
    throw UpdateError("assignment search over " + std::to_string(togglable.size()) +
                      " atoms is too large");

  // Every flip set, ordered by size then lexicographically by content.
  std::vector<std::vector<std::string>> flips;
  for (std::size_t mask = 0; mask < (std::size_t{1} << togglable.size()); ++mask) {
    std::vector<std::string> flip;
    for (std::size_t i = 0; i < togglable.size(); ++i) {
      if (mask & (std::size_t{1} << i)) flip.push_back(togglable[i]);
    }
    flips.push_back(std::move(flip));
  }
  std::sort(flips.begin(), flips.end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  });

  std::vector<std::set<std::string>> kept_flips;
  std::vector<std::set<std::string>> out;
  for (const auto& flip : flips) {
    if (out.size() >= cap) break;
    std::set<std::string> candidate = label;
    for (const auto& a : flip) {
      if (candidate.count(a))
        candidate.erase(a);
      else
        candidate.insert(a);
    }
    if (!label_satisfies(candidate, f)) continue;
    std::set<std::string> flip_set(flip.begin(), flip.end());
    bool dominated = false;
    for (const auto& kept : kept_flips) {
      if (std::includes(flip_set.begin(), flip_set.end(), kept.begin(), kept.end())) {
        dominated = true;
        break;
      }
    }
    if (dominated) continue;
    kept_flips.push_back(std::move(flip_set));
    out.push_back(std::move(candidate));
  }
  return out;
}

}  // namespace

std::vector<std::set<std::string>> minimal_assignments(const std::set<std::string>& label,
                                                       const FormulaPtr& f,
                                                       const std::set<std::string>& atoms,
                                                       std::size_t cap) {
  auto out = minimal_assignments_impl(label, f, atoms, cap);
  if (out.empty())
    throw UpdateError("no label over the atom universe satisfies " + print_formula(f));
  return out;
}

// ── Update engine ───────────────────────────────────────────────────────────

namespace {

struct EngineState {
  KripkeModel model;
  std::vector<TraceStep> trace;
  std::size_t new_states = 0;
};

using Branches = std::vector<EngineState>;

nlohmann::json edge_args(const std::string& from, const std::string& to) {
  return {{"from", from}, {"to", to}};
}

nlohmann::json label_args(const std::string& state, const std::set<std::string>& label) {
  return {{"state", state}, {"label", label}};
}

struct Engine {
  const UpdateConfig& cfg;

  bool desk_scale(const KripkeModel& m) const { return m.labels.size() <= 8; }

  std::set<std::string> all_states(const KripkeModel& m) const {
    std::set<std::string> out;
    for (const auto& [name, label] : m.labels) out.insert(name);
    return out;
  }

  std::string fresh_name(const KripkeModel& m) const {
    for (std::size_t k = 1;; ++k) {
      std::string name = kFreshPrefix + std::to_string(k);
      if (!has_state(m, name)) return name;
    }
  }

  void branch_pu1(Branches& out, const EngineState& st, const std::string& from,
                  const std::string& to) const {
    if (st.model.trans.count({from, to})) return;
    EngineState next = st;
    next.model.trans.insert({from, to});
    next.trace.push_back({"PU1", edge_args(from, to)});
    out.push_back(std::move(next));
  }

  void branch_pu2(Branches& out, const EngineState& st, const std::string& from,
                  const std::string& to) const {
    if (!st.model.trans.count({from, to})) return;
    EngineState next = st;
    next.model.trans.erase({from, to});
    next.trace.push_back({"PU2", edge_args(from, to)});
    out.push_back(std::move(next));
  }

  void branch_pu3(Branches& out, const EngineState& st, const std::string& state,
                  const std::set<std::string>& label) const {
    if (st.model.labels.at(state) == label) return;
    EngineState next = st;
    next.model.labels[state] = label;
    next.trace.push_back({"PU3", label_args(state, label)});
    out.push_back(std::move(next));
  }

  // PU4 plus the PU1 that wires the fresh state in; a dangling fresh state
  // can never contribute to satisfaction.
  void branch_pu4_wire(Branches& out, const EngineState& st, const std::string& from,
                       const std::set<std::string>& label) const {
    if (st.new_states >= cfg.max_new_states) return;
    std::string name = fresh_name(st.model);
    EngineState next = st;
    next.model.labels[name] = label;
    next.model.trans.insert({from, name});
    next.trace.push_back({"PU4", label_args(name, label)});
    next.trace.push_back({"PU1", edge_args(from, name)});
    next.new_states += 1;
    out.push_back(std::move(next));
  }

  std::vector<std::set<std::string>> fresh_labels(const KripkeModel& m,
                                                  const FormulaPtr& g) const {
    if (is_propositional(g))
      return minimal_assignments_impl({}, g, m.atoms, cfg.min_assignments_cap);
    return {{}};
  }

  // One round of branches aimed at the reason f currently fails at s.
  Branches expand(const EngineState& st, const std::string& s, const FormulaPtr& f) const {
    if (is_propositional(f)) return expand_prop(st, s, f);
    switch (f->op) {
      case Op::And: {
        Branches out;
        if (!check(st.model, s, f->lhs)) append(out, expand(st, s, f->lhs));
        if (!check(st.model, s, f->rhs)) append(out, expand(st, s, f->rhs));
        return out;
      }
      case Op::Or: {
        Branches out = expand(st, s, f->lhs);
        append(out, expand(st, s, f->rhs));
        return out;
      }
      case Op::EX:
        return expand_ex(st, s, f->lhs);
      case Op::AF:
        return expand_af(st, s, f->lhs);
      case Op::EU:
        return expand_eu(st, s, f->lhs, f->rhs);
      case Op::Not:
        return expand_not(st, s, f->lhs);
      default:
        // Outside the normalized core; rewrite and retry.
        return expand(st, s, normalize(f));
    }
  }

  Branches expand_not(const EngineState& st, const std::string& s, const FormulaPtr& inner) const {
    switch (inner->op) {
      case Op::EX:  // AX !g in disguise: every successor must fail g.
        return expand_ax(st, s, inner->lhs);
      case Op::AF:  // EG !g: keep one maximal path inside !g.
        return expand_eg(st, s, normalize(f_not(inner->lhs)));
      case Op::EU:
        return expand_not_eu(st, s, inner->lhs, inner->rhs);
      case Op::And:
        return expand(st, s,
                      f_or(normalize(f_not(inner->lhs)), normalize(f_not(inner->rhs))));
      case Op::Or:
        return expand(st, s,
                      f_and(normalize(f_not(inner->lhs)), normalize(f_not(inner->rhs))));
      case Op::True:
        return {};  // unsatisfiable
      default:
        return expand(st, s, normalize(f_not(inner)));
    }
  }

  Branches expand_prop(const EngineState& st, const std::string& s, const FormulaPtr& f) const {
    Branches out;
    for (const auto& label : minimal_assignments_impl(st.model.labels.at(s), f, st.model.atoms,
                                                      cfg.min_assignments_cap))
      branch_pu3(out, st, s, label);
    return out;
  }

  // EX g fails at s: no successor satisfies g.
  Branches expand_ex(const EngineState& st, const std::string& s, const FormulaPtr& g) const {
    const KripkeModel& m = st.model;
    Branches out;
    for (const auto& t : successors(m, s)) {
      if (!check(m, t, g)) append(out, expand(st, t, g));
    }
    std::set<std::string> wire = desk_scale(m) ? all_states(m) : sat_states(m, g);
    for (const auto& y : wire) branch_pu1(out, st, s, y);
    for (const auto& label : fresh_labels(m, g)) branch_pu4_wire(out, st, s, label);
    return out;
  }

  // !EX g fails at s: some successor satisfies g; neutralize the first.
  Branches expand_ax(const EngineState& st, const std::string& s, const FormulaPtr& g) const {
    const KripkeModel& m = st.model;
    for (const auto& t : successors(m, s)) {
      if (!check(m, t, g)) continue;
      Branches out;
      branch_pu2(out, st, s, t);
      append(out, expand(st, t, normalize(f_not(g))));
      return out;
    }
    return {};
  }

  // AF g fails at s: walk the lexicographically least path that stays where
  // g is avoidable, then break it.
  Branches expand_af(const EngineState& st, const std::string& s, const FormulaPtr& g) const {
    const KripkeModel& m = st.model;
    std::set<std::string> region = sat_states(m, f_unary(Op::EG, f_not(g)));
    if (!region.count(s)) return {};

    std::vector<std::string> walk;
    std::set<std::string> on_walk;
    std::vector<std::pair<std::string, std::string>> witness_edges;
    std::optional<std::string> dead_end;
    std::string x = s;
    while (true) {
      walk.push_back(x);
      on_walk.insert(x);
      std::set<std::string> nexts = successors(m, x);
      if (nexts.empty()) {
        dead_end = x;
        break;
      }
      std::string pick;
      for (const auto& t : nexts) {
        if (region.count(t)) {
          pick = t;
          break;
        }
      }
      if (pick.empty()) break;  // defensively: should not happen inside the region
      witness_edges.push_back({x, pick});
      if (on_walk.count(pick)) break;  // lasso closed
      x = pick;
    }

    Branches out;
    std::set<std::string> targets =
        sat_states(m, g).empty() ? reachable_states(m, s) : on_walk;
    for (const auto& t : targets) {
      if (!check(m, t, g)) append(out, expand(st, t, g));
    }
    for (const auto& [a, b] : witness_edges) branch_pu2(out, st, a, b);
    if (dead_end) {
      std::set<std::string> wire = desk_scale(m) ? all_states(m) : sat_states(m, g);
      for (const auto& t : wire) branch_pu1(out, st, *dead_end, t);
      for (const auto& label : fresh_labels(m, g)) branch_pu4_wire(out, st, *dead_end, label);
    }
    return out;
  }

  // EG g (written !AF !g) fails at s: grow or close off a g-region path.
  Branches expand_eg(const EngineState& st, const std::string& s, const FormulaPtr& g) const {
    const KripkeModel& m = st.model;
    if (!check(m, s, g)) return expand(st, s, g);

    std::set<std::string> G = sat_states(m, g);
    std::set<std::string> R;  // g-states reachable from s without leaving G
    std::deque<std::string> queue{s};
    R.insert(s);
    while (!queue.empty()) {
      std::string x = queue.front();
      queue.pop_front();
      for (const auto& t : successors(m, x)) {
        if (G.count(t) && R.insert(t).second) queue.push_back(t);
      }
    }

    Branches out;
    std::set<std::string> frontier;
    for (const auto& x : R) {
      for (const auto& t : successors(m, x)) {
        if (!G.count(t)) {
          frontier.insert(t);
          branch_pu2(out, st, x, t);  // deadlocking inside g is a finite all-g path
        }
      }
    }
    if (desk_scale(m)) {
      // Only states the walk can actually visit are worth relabeling; an
      // unreachable state never helps and would perturb what the repair
      // must leave alone.
      std::set<std::string> reach = reachable_states(m, s);
      for (const auto& t : reach) {
        if (!G.count(t)) frontier.insert(t);
      }
    }
    for (const auto& t : frontier) append(out, expand(st, t, g));
    std::set<std::string> wire = desk_scale(m) ? all_states(m) : G;
    for (const auto& x : R) {
      for (const auto& y : wire) branch_pu1(out, st, x, y);
    }
    for (const auto& label : fresh_labels(m, g)) {
      for (const auto& x : R) branch_pu4_wire(out, st, x, label);
    }
    return out;
  }

  // E[f1 U f2] fails at s.
  Branches expand_eu(const EngineState& st, const std::string& s, const FormulaPtr& f1,
                     const FormulaPtr& f2) const {
    const KripkeModel& m = st.model;
    if (!check(m, s, f1) && !check(m, s, f2)) {
      Branches out = expand(st, s, f1);
      append(out, expand(st, s, f2));
      return out;
    }

    // s satisfies f1; the reachable f1-region never meets f2.
    std::set<std::string> F1 = sat_states(m, f1);
    std::set<std::string> R{s};
    std::deque<std::string> queue{s};
    while (!queue.empty()) {
      std::string x = queue.front();
      queue.pop_front();
      for (const auto& t : successors(m, x)) {
        if (F1.count(t) && R.insert(t).second) queue.push_back(t);
      }
    }

    Branches out;
    std::set<std::string> frontier;
    for (const auto& x : R) {
      append(out, expand(st, x, f2));
      for (const auto& t : successors(m, x)) {
        if (!R.count(t)) frontier.insert(t);
      }
    }
    for (const auto& t : frontier) {
      append(out, expand(st, t, f1));
      append(out, expand(st, t, f2));
    }
    std::set<std::string> wire = desk_scale(m) ? all_states(m) : sat_states(m, f2);
    for (const auto& x : R) {
      for (const auto& y : wire) branch_pu1(out, st, x, y);
    }
    for (const auto& label : fresh_labels(m, f2)) {
      for (const auto& x : R) branch_pu4_wire(out, st, x, label);
    }
    return out;
  }

  // !E[f1 U f2] fails at s: a witness stem reaches f2 through f1; break it.
  Branches expand_not_eu(const EngineState& st, const std::string& s, const FormulaPtr& f1,
                         const FormulaPtr& f2) const {
    const KripkeModel& m = st.model;
    std::vector<std::string> stem = witness_stem(m, s, f1, f2);
    if (stem.empty()) return {};

    Branches out;
    append(out, expand(st, stem.back(), normalize(f_not(f2))));
    if (f1->op != Op::True) {
      for (std::size_t j = 0; j + 1 < stem.size(); ++j)
        append(out, expand(st, stem[j], normalize(f_not(f1))));
    }
    for (std::size_t j = 0; j + 1 < stem.size(); ++j) branch_pu2(out, st, stem[j], stem[j + 1]);
    return out;
  }

  // Shortest path s = x0 .. xn with xn in Sat(f2) and x0..xn-1 in
  // Sat(f1) \ Sat(f2); BFS over sorted successors makes it the
  // lexicographically least among the shortest.
  static std::vector<std::string> witness_stem(const KripkeModel& m, const std::string& s,
                                               const FormulaPtr& f1, const FormulaPtr& f2) {
    std::set<std::string> F1 = sat_states(m, f1);
    std::set<std::string> F2 = sat_states(m, f2);
    if (F2.count(s)) return {s};
    if (!F1.count(s)) return {};
    std::map<std::string, std::string> parent{{s, ""}};
    std::deque<std::string> queue{s};
    while (!queue.empty()) {
      std::string x = queue.front();
      queue.pop_front();
      for (const auto& t : successors(m, x)) {
        if (parent.count(t)) continue;
        parent[t] = x;
        if (F2.count(t)) {
          std::vector<std::string> stem;
          for (std::string cur = t; !cur.empty(); cur = parent[cur]) stem.push_back(cur);
          std::reverse(stem.begin(), stem.end());
          return stem;
        }
        if (F1.count(t)) queue.push_back(t);
      }
    }
    return {};
  }

  static void append(Branches& out, Branches more) {
    for (auto& b : more) out.push_back(std::move(b));
  }
};

UpdateCandidate make_candidate(const PointedModel& base, EngineState st) {
  UpdateCandidate c;
  c.start = base.start;
  c.diff = compute_diff(base.model, st.model);
  c.unchanged_reachable = unchanged_reachable(base, st.model);
  c.model = std::move(st.model);
  c.trace = std::move(st.trace);
  return c;
}

bool satisfies_constraints(const KripkeModel& m, const std::string& start,
                           const UpdateConfig& cfg) {
  for (const auto& c : cfg.constraints) {
    if (!check(m, start, c)) return false;
  }
  return true;
}

// A repair may not disturb what stays out of the start's view: base states
// that were unreachable must stay present, and must keep their labels for as
// long as they remain unreachable (a repair may wire into a dormant region
// and relabel there — the relabeled state is then part of the visible
// repair). Every candidate state unreachable from the start must already
// exist in the base. `base_reach` and `cand_reach` are the respective
// reachable sets (from the start, or unioned over initial states for
// whole-model updates).
bool preserves_unreachable(const KripkeModel& base, const std::set<std::string>& base_reach,
                           const KripkeModel& cand, const std::set<std::string>& cand_reach) {
  for (const auto& [name, label] : base.labels) {
    if (name == kDummyName || base_reach.count(name)) continue;
    auto it = cand.labels.find(name);
    if (it == cand.labels.end()) return false;
    if (!cand_reach.count(name) && it->second != label) return false;
  }
  for (const auto& [name, label] : cand.labels) {
    if (name == kDummyName || cand_reach.count(name)) continue;
    if (!base.labels.count(name)) return false;
  }
  return true;
}

// Deterministic final order: smallest diff first, canonical form as the tie
// break.
void sort_candidates(std::vector<UpdateCandidate>& candidates) {
  std::vector<std::pair<std::string, UpdateCandidate>> keyed;
  keyed.reserve(candidates.size());
  for (auto& c : candidates) keyed.push_back({canonical_key(c.model), std::move(c)});
  std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
    std::size_t sa = a.second.diff.total_size(), sb = b.second.diff.total_size();
    if (sa != sb) return sa < sb;
    return a.first < b.first;
  });
  candidates.clear();
  for (auto& [key, c] : keyed) candidates.push_back(std::move(c));
}

// Drop everything but committed candidates when the configuration asks for
// committed-only output.
void apply_committed_mode(std::vector<UpdateCandidate>& candidates, const UpdateConfig& cfg) {
  if (!cfg.committed) return;
  candidates.erase(std::remove_if(candidates.begin(), candidates.end(),
                                  [](const UpdateCandidate& c) { return !c.committed; }),
                   candidates.end());
}

}  // namespace

namespace {

std::set<std::string> common_unchanged(const KripkeModel& base,
                                       const std::set<std::string>& base_reach,
                                       const KripkeModel& other,
                                       const std::set<std::string>& other_reach) {
  std::set<std::string> out;
  for (const auto& s : base_reach) {
    if (!other_reach.count(s)) continue;
    auto it = other.labels.find(s);
    if (it != other.labels.end() && it->second == base.labels.at(s)) out.insert(s);
  }
  return out;
}

std::set<std::string> init_reachable(const KripkeModel& m) {
  std::set<std::string> out;
  for (const auto& i : m.init) {
    auto r = reachable_states(m, i);
    out.insert(r.begin(), r.end());
  }
  return out;
}

}  // namespace

std::set<std::string> unchanged_reachable(const KripkeModel& base, const KripkeModel& other) {
  return common_unchanged(base, init_reachable(base), other, init_reachable(other));
}

std::set<std::string> unchanged_reachable(const PointedModel& base, const KripkeModel& other) {
  std::set<std::string> other_reach;
  if (has_state(other, base.start)) other_reach = reachable_states(other, base.start);
  return common_unchanged(base.model, reachable_states(base.model, base.start), other,
                          other_reach);
}

std::set<std::string> unchanged_reachable(const PointedModel& base, const UpdateCandidate& cand) {
  return unchanged_reachable(base, cand.model);
}

void flag_and_sort(std::vector<UpdateCandidate>& candidates) {
  for (auto& c : candidates) {
    c.admissible = true;
    for (const auto& other : candidates) {
      if (strictly_closer(other.diff, c.diff)) {
        c.admissible = false;
        break;
      }
    }
  }
  // Committed: no other admissible candidate keeps a strictly larger set of
  // unchanged reachable states (strict superset, not merely bigger).
  for (auto& c : candidates) {
    c.committed = c.admissible;
    if (!c.committed) continue;
    const auto& mine = c.unchanged_reachable;
    for (const auto& other : candidates) {
      if (!other.admissible) continue;
      const auto& theirs = other.unchanged_reachable;
      if (mine.size() < theirs.size() &&
          std::includes(theirs.begin(), theirs.end(), mine.begin(), mine.end())) {
        c.committed = false;
        break;
      }
    }
  }
  sort_candidates(candidates);
}

std::vector<UpdateCandidate> filter_admissible(const PointedModel& base,
                                               std::vector<UpdateCandidate> candidates) {
  for (auto& c : candidates) c.diff = compute_diff(base.model, c.model);
  std::vector<bool> dominated(candidates.size(), false);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    for (const auto& other : candidates) {
      if (strictly_closer(other.diff, candidates[i].diff)) {
        dominated[i] = true;
        break;
      }
    }
  }
  std::vector<UpdateCandidate> out;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (dominated[i]) continue;
    candidates[i].admissible = true;
    out.push_back(std::move(candidates[i]));
  }
  sort_candidates(out);
  return out;
}

std::vector<UpdateCandidate> filter_committed(const PointedModel& base,
                                              std::vector<UpdateCandidate> candidates) {
  for (auto& c : candidates) c.unchanged_reachable = unchanged_reachable(base, c.model);
  std::vector<bool> contained(candidates.size(), false);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& mine = candidates[i].unchanged_reachable;
    for (const auto& other : candidates) {
      const auto& theirs = other.unchanged_reachable;
      if (mine.size() < theirs.size() &&
          std::includes(theirs.begin(), theirs.end(), mine.begin(), mine.end())) {
        contained[i] = true;
        break;
      }
    }
  }
  std::vector<UpdateCandidate> out;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (contained[i]) continue;
    candidates[i].committed = true;
    out.push_back(std::move(candidates[i]));
  }
  sort_candidates(out);
  return out;
}

UpdateResult ctl_update(const PointedModel& pm, const FormulaPtr& f, const UpdateConfig& cfg) {
  if (has_dummy(pm.model)) throw UpdateError("update operates on dummy-free models");
  if (!has_state(pm.model, pm.start))
    throw UpdateError("unknown start state '" + pm.start + "'");

  FormulaPtr goal = normalize(f);
  std::size_t cap = cfg.recursion_cap ? cfg.recursion_cap : 3 * formula_size(goal);
  UpdateResult result;

  if (check(pm.model, pm.start, goal)) {
    if (satisfies_constraints(pm.model, pm.start, cfg)) {
      UpdateCandidate c = make_candidate(pm, {pm.model, {}, 0});
      c.admissible = c.committed = true;
      result.candidates.push_back(std::move(c));
    }
    return result;
  }

  Engine engine{cfg};
  std::deque<EngineState> queue;
  queue.push_back({pm.model, {}, 0});
  std::set<std::string> visited{canonical_key(pm.model)};
  std::set<std::string> emitted_keys;
  std::vector<UpdateCandidate> emitted;
  std::set<std::string> base_reach = reachable_states(pm.model, pm.start);
  std::size_t expansions = 0;

  while (!queue.empty()) {
    if (expansions >= cfg.max_expansions || emitted.size() >= cfg.max_candidates) {
      result.budget_exhausted = true;
      break;
    }
    EngineState st = std::move(queue.front());
    queue.pop_front();
    ++expansions;
    for (auto& b : engine.expand(st, pm.start, goal)) {
      std::string key = canonical_key(b.model);
      if (!visited.insert(key).second) continue;
      if (check(b.model, pm.start, goal)) {
        if (!satisfies_constraints(b.model, pm.start, cfg)) continue;
        if (!preserves_unreachable(pm.model, base_reach, b.model,
                                   reachable_states(b.model, pm.start)))
          continue;
        if (emitted_keys.insert(key).second) emitted.push_back(make_candidate(pm, std::move(b)));
      } else if (b.trace.size() < cap) {
        queue.push_back(std::move(b));
      }
    }
  }

  result.candidates = std::move(emitted);
  flag_and_sort(result.candidates);
  apply_committed_mode(result.candidates, cfg);
  if (result.candidates.size() > cfg.max_candidates) {
    result.candidates.resize(cfg.max_candidates);
    result.budget_exhausted = true;
  }
  return result;
}

namespace {

UpdateResult shaped_update(const PointedModel& pm, const FormulaPtr& f, const UpdateConfig& cfg,
                           bool shape_ok, const char* expected) {
  if (!shape_ok)
    throw UpdateError(std::string("expected ") + expected + ", got " + print_formula(f));
  return ctl_update(pm, f, cfg);
}

}  // namespace

UpdateResult update_prop(const PointedModel& pm, const FormulaPtr& f, const UpdateConfig& cfg) {
  return shaped_update(pm, f, cfg, is_propositional(f), "a propositional formula");
}

UpdateResult update_ex(const PointedModel& pm, const FormulaPtr& f, const UpdateConfig& cfg) {
  return shaped_update(pm, f, cfg, f->op == Op::EX, "EX g");
}

UpdateResult update_af(const PointedModel& pm, const FormulaPtr& f, const UpdateConfig& cfg) {
  return shaped_update(pm, f, cfg, f->op == Op::AF, "AF g");
}

UpdateResult update_eu(const PointedModel& pm, const FormulaPtr& f, const UpdateConfig& cfg) {
  return shaped_update(pm, f, cfg, f->op == Op::EU, "E[g1 U g2]");
}

UpdateResult update_and(const PointedModel& pm, const FormulaPtr& f, const UpdateConfig& cfg) {
  return shaped_update(pm, f, cfg, f->op == Op::And, "a conjunction");
}

UpdateResult update_or(const PointedModel& pm, const FormulaPtr& f, const UpdateConfig& cfg) {
  return shaped_update(pm, f, cfg, f->op == Op::Or, "a disjunction");
}

UpdateResult update_not(const PointedModel& pm, const FormulaPtr& f, const UpdateConfig& cfg) {
  return shaped_update(pm, f, cfg, f->op == Op::Not, "a negation");
}

UpdateResult update_model(const KripkeModel& m, const FormulaPtr& f, const UpdateConfig& cfg) {
  KripkeModel base = strip_dummy(m);
  validate_model(base);
  FormulaPtr goal = normalize(f);
  UpdateResult result;

  struct Partial {
    KripkeModel model;
    std::vector<TraceStep> trace;
  };
  std::vector<Partial> partials{{base, {}}};

  // Committedness is judged on the composed result, never on the per-start
  // intermediates (the reachable-set comparison spans all initial states).
  UpdateConfig sub_cfg = cfg;
  sub_cfg.committed = false;

  for (const auto& start : base.init) {
    std::vector<Partial> next;
    std::set<std::string> seen;
    for (const auto& p : partials) {
      if (check(p.model, start, goal)) {
        if (seen.insert(canonical_key(p.model)).second) next.push_back(p);
        continue;
      }
      UpdateResult sub = ctl_update({p.model, start}, f, sub_cfg);
      result.budget_exhausted = result.budget_exhausted || sub.budget_exhausted;
      for (auto& c : sub.candidates) {
        std::string key = canonical_key(c.model);
        if (!seen.insert(key).second) continue;
        Partial np;
        np.model = std::move(c.model);
        np.trace = p.trace;
        np.trace.insert(np.trace.end(), c.trace.begin(), c.trace.end());
        next.push_back(std::move(np));
      }
    }
    if (next.size() > cfg.max_candidates) {
      next.resize(cfg.max_candidates);
      result.budget_exhausted = true;
    }
    partials = std::move(next);
    if (partials.empty()) return result;  // some initial state is unrepairable
  }

  std::set<std::string> base_reach = init_reachable(base);
  for (auto& p : partials) {
    bool good = true;
    for (const auto& start : base.init) {
      if (!check(p.model, start, goal) || !satisfies_constraints(p.model, start, cfg)) {
        good = false;
        break;
      }
    }
    if (!good) continue;
    if (!preserves_unreachable(base, base_reach, p.model, init_reachable(p.model))) continue;
    UpdateCandidate c;
    c.start = base.init.empty() ? std::string() : *base.init.begin();
    c.diff = compute_diff(base, p.model);
    c.unchanged_reachable = unchanged_reachable(base, p.model);
    c.model = std::move(p.model);
    c.trace = std::move(p.trace);
    result.candidates.push_back(std::move(c));
  }
  flag_and_sort(result.candidates);
  apply_committed_mode(result.candidates, cfg);
  if (result.candidates.size() > cfg.max_candidates) {
    result.candidates.resize(cfg.max_candidates);
    result.budget_exhausted = true;
  }
  return result;
}

// ── Witness-driven fast path ────────────────────────────────────────────────

namespace {

std::set<std::string> label_sat_states(const KripkeModel& m, const FormulaPtr& g) {
  std::set<std::string> out;
  for (const auto& [name, label] : m.labels) {
    if (name != kDummyName && label_satisfies(label, g)) out.insert(name);
  }
  return out;
}

std::set<std::string> lasso_states(const Lasso& l) {
  std::set<std::string> out(l.stem.begin(), l.stem.end());
  out.insert(l.loop.begin(), l.loop.end());
  return out;
}

std::string lasso_head(const Lasso& l) { return l.stem.empty() ? l.loop[0] : l.stem[0]; }

// The per-entry repair, as an edited model plus trace; nullopt when the entry
// needs no repair or offers none.
struct EntryRepair {
  KripkeModel model;
  std::vector<TraceStep> trace;
};

void cut_edge(EntryRepair& r, const std::string& from, const std::string& to) {
  r.model.trans.erase({from, to});
  r.trace.push_back({"PU2", edge_args(from, to)});
}

void add_edge(EntryRepair& r, const std::string& from, const std::string& to) {
  r.model.trans.insert({from, to});
  r.trace.push_back({"PU1", edge_args(from, to)});
}

std::vector<EntryRepair> entry_repairs(const KripkeModel& m, const std::string& s0,
                                       const WitnessEntry& e) {
  const FormulaPtr& part = e.subformula;
  std::vector<EntryRepair> out;
  switch (part->op) {
    case Op::AX: {
      EntryRepair r{m, {}};
      for (const auto& t : successors(m, s0)) {
        if (!e.valid_states.count(t)) cut_edge(r, s0, t);
      }
      if (!r.trace.empty()) out.push_back(std::move(r));
      break;
    }
    case Op::EX: {
      for (const auto& v : e.valid_states) {
        if (m.trans.count({s0, v})) continue;
        EntryRepair r{m, {}};
        add_edge(r, s0, v);
        out.push_back(std::move(r));
      }
      break;
    }
    case Op::AG: {
      // Disconnect every reachable violating state: drop edges that leave
      // the region where the operand holds.
      std::set<std::string> good = label_sat_states(m, part->lhs);
      if (!good.count(s0)) break;
      EntryRepair r{m, {}};
      std::set<std::string> seen{s0};
      std::deque<std::string> queue{s0};
      while (!queue.empty()) {
        std::string x = queue.front();
        queue.pop_front();
        for (const auto& t : successors(m, x)) {
          if (good.count(t)) {
            if (seen.insert(t).second) queue.push_back(t);
          } else {
            cut_edge(r, x, t);
          }
        }
      }
      if (!r.trace.empty()) out.push_back(std::move(r));
      break;
    }
    case Op::AF:
    case Op::AU: {
      // Keep the valid paths; cut steps that escape them without reaching
      // the target.
      const FormulaPtr& target = part->op == Op::AF ? part->lhs : part->rhs;
      std::set<std::string> hit = label_sat_states(m, target);
      std::set<std::string> keep;
      for (const auto& l : e.valid_paths) {
        auto states = lasso_states(l);
        keep.insert(states.begin(), states.end());
      }
      EntryRepair r{m, {}};
      std::set<std::string> sources = keep;
      sources.insert(s0);
      for (const auto& x : sources) {
        for (const auto& t : successors(m, x)) {
          if (!keep.count(t) && !hit.count(t)) cut_edge(r, x, t);
        }
      }
      if (!r.trace.empty()) out.push_back(std::move(r));
      break;
    }
    case Op::EG:
    case Op::EF:
    case Op::EU: {
      std::set<std::string> heads;
      for (const auto& l : e.valid_paths) heads.insert(lasso_head(l));
      for (const auto& h : heads) {
        if (m.trans.count({s0, h})) continue;
        EntryRepair r{m, {}};
        add_edge(r, s0, h);
        out.push_back(std::move(r));
      }
      break;
    }
    default:
      break;
  }
  return out;
}

}  // namespace

std::vector<UpdateCandidate> fast_path_aeclass(const PointedModel& pm, const FormulaPtr& f,
                                               const WitnessReport& report,
                                               const UpdateConfig& cfg) {
  auto parts = classify_aeclass(f);
  if (parts && check(pm.model, pm.start, f)) {
    UpdateCandidate c;
    c.model = pm.model;
    c.start = pm.start;
    c.diff = compute_diff(pm.model, pm.model);
    c.unchanged_reachable = unchanged_reachable(pm, pm.model);
    c.admissible = c.committed = true;
    return {c};
  }
  // The one-pass construction needs a witness for every part; without one
  // (or outside the supported class) only the general search applies.
  if (!parts || !report.complete()) return ctl_update(pm, f, cfg).candidates;

  std::vector<EntryRepair> pool;
  EntryRepair combined{pm.model, {}};
  bool combined_grew = false;
  for (const auto& e : report.entries) {
    if (check(pm.model, pm.start, e.subformula)) continue;
    auto repairs = entry_repairs(pm.model, pm.start, e);
    for (auto& r : repairs) pool.push_back(r);
    if (!repairs.empty()) {
      // Fold the first repair of each failing part into one joint candidate.
      auto joint = entry_repairs(combined.model, pm.start, e);
      if (!joint.empty()) {
        combined.model = std::move(joint.front().model);
        combined.trace.insert(combined.trace.end(), joint.front().trace.begin(),
                              joint.front().trace.end());
        combined_grew = true;
      }
    }
  }
  if (combined_grew) pool.push_back(std::move(combined));

  std::vector<UpdateCandidate> out;
  std::set<std::string> seen;
  for (auto& r : pool) {
    if (!check(r.model, pm.start, f)) continue;
    if (!satisfies_constraints(r.model, pm.start, cfg)) continue;
    std::string key = canonical_key(r.model);
    if (!seen.insert(key).second) continue;
    UpdateCandidate c;
    c.start = pm.start;
    c.diff = compute_diff(pm.model, r.model);
    c.unchanged_reachable = unchanged_reachable(pm, r.model);
    c.model = std::move(r.model);
    c.trace = std::move(r.trace);
    out.push_back(std::move(c));
  }
  if (out.empty()) return ctl_update(pm, f, cfg).candidates;
  flag_and_sort(out);
  apply_committed_mode(out, cfg);
  return out;
}

std::vector<UpdateCandidate> fast_path_aeclass(const PointedModel& pm, const FormulaPtr& f,
                                               const UpdateConfig& cfg) {
  if (!classify_aeclass(f)) return ctl_update(pm, f, cfg).candidates;
  return fast_path_aeclass(pm, f, find_witness(pm, f), cfg);
}

// ── Direct committed repairs for AF goals ───────────────────────────────────

std::vector<UpdateCandidate> update_af_committed(const PointedModel& pm, const FormulaPtr& f,
                                                 const UpdateConfig& cfg) {
  if (f->op != Op::AF || !is_propositional(f->lhs))
    throw UpdateError("update_af_committed requires a goal AF g with propositional g");
  const KripkeModel& m = pm.model;
  const FormulaPtr& g = f->lhs;

  if (check(m, pm.start, f)) {
    UpdateCandidate c;
    c.model = m;
    c.start = pm.start;
    c.diff = compute_diff(m, m);
    c.unchanged_reachable = unchanged_reachable(pm, m);
    c.admissible = c.committed = true;
    return {c};
  }

  // The g-avoiding lassos from the start are exactly the valid paths of
  // AG !g.
  WitnessReport avoid = find_witness(pm, f_unary(Op::AG, normalize(f_not(g))));
  const std::vector<Lasso>& bad = avoid.entries.front().valid_paths;
  WitnessReport valid = find_witness(pm, f);
  std::set<std::string> valid_states;
  for (const auto& l : valid.entries.front().valid_paths) {
    auto states = lasso_states(l);
    valid_states.insert(states.begin(), states.end());
  }

  std::vector<KripkeModel> models;
  std::vector<std::vector<TraceStep>> traces;

  // Case 1: relabel the non-start state shared by the most bad lassos.
  std::map<std::string, std::size_t> occurrences;
  for (const auto& l : bad) {
    std::set<std::string> later(l.loop.begin(), l.loop.end());
    for (std::size_t i = 1; i < l.stem.size(); ++i) later.insert(l.stem[i]);
    later.erase(pm.start);
    for (const auto& s : later) occurrences[s] += 1;
  }
  std::string best;
  std::size_t best_count = 0;
  for (const auto& [s, n] : occurrences) {
    if (n > best_count) {
      best = s;
      best_count = n;
    }
  }
  if (!best.empty()) {
    for (const auto& label : minimal_assignments_impl(m.labels.at(best), g, m.atoms,
                                                      cfg.min_assignments_cap)) {
      if (label == m.labels.at(best)) continue;
      models.push_back(apply_pu3(m, best, label));
      traces.push_back({{"PU3", label_args(best, label)}});
    }
  }

  // Case 2: cut the first step of a bad lasso when its target still sits on
  // a valid path.
  std::set<std::string> first_steps;
  for (const auto& l : bad) {
    std::vector<std::string> seq = l.stem;
    seq.insert(seq.end(), l.loop.begin(), l.loop.end());
    if (seq.size() >= 2 && seq[0] == pm.start) first_steps.insert(seq[1]);
  }
  for (const auto& s1 : first_steps) {
    if (!valid_states.count(s1)) continue;
    if (!m.trans.count({pm.start, s1})) continue;
    models.push_back(apply_pu2(m, pm.start, s1));
    traces.push_back({{"PU2", edge_args(pm.start, s1)}});
  }

  std::vector<UpdateCandidate> out;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < models.size(); ++i) {
    if (!check(models[i], pm.start, f)) continue;
    if (!satisfies_constraints(models[i], pm.start, cfg)) continue;
    std::string key = canonical_key(models[i]);
    if (!seen.insert(key).second) continue;
    UpdateCandidate c;
    c.start = pm.start;
    c.diff = compute_diff(m, models[i]);
    c.unchanged_reachable = unchanged_reachable(pm, models[i]);
    c.model = std::move(models[i]);
    c.trace = std::move(traces[i]);
    out.push_back(std::move(c));
  }
  flag_and_sort(out);
  return out;
}

}  // namespace ctlrepair
