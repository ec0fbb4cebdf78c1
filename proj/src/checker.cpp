#include "ctlrepair/checker.hpp"

#include <algorithm>
#include <deque>
#include <functional>

namespace ctlrepair {

namespace {

using StateSet = std::set<std::string>;

bool label_sat(const std::set<std::string>& label, const Formula* f) {
  switch (f->op) {
    case Op::True: return true;
    case Op::False: return false;
    case Op::Atom: return label.count(f->atom) != 0;
    case Op::Not: return !label_sat(label, f->lhs.get());
    case Op::And: return label_sat(label, f->lhs.get()) && label_sat(label, f->rhs.get());
    case Op::Or: return label_sat(label, f->lhs.get()) || label_sat(label, f->rhs.get());
    case Op::Implies:
      return !label_sat(label, f->lhs.get()) || label_sat(label, f->rhs.get());
    default:
      throw CheckError("label_satisfies requires a propositional formula");
  }
}

}  // namespace

bool label_satisfies(const std::set<std::string>& label, const FormulaPtr& f) {
  if (!is_propositional(f))
    throw CheckError("label_satisfies requires a propositional formula, got " +
                     print_formula(f));
  return label_sat(label, f.get());
}

namespace {

struct SatContext {
  const KripkeModel& m;
  StateSet all_states;
  std::map<std::string, StateSet> memo;  // printed subformula -> Sat

  explicit SatContext(const KripkeModel& model) : m(model) {
    for (const auto& [name, label] : m.labels) all_states.insert(name);
  }

  StateSet succ(const std::string& s) const { return successors(m, s); }

  bool deadlocked(const std::string& s) const {
    auto it = m.trans.lower_bound({s, ""});
    return it == m.trans.end() || it->first != s;
  }

  StateSet complement(const StateSet& x) const {
    StateSet out;
    for (const auto& s : all_states) {
      if (!x.count(s)) out.insert(s);
    }
    return out;
  }

  const StateSet& eval(const FormulaPtr& f) {
    std::string key = print_formula(f);
    auto found = memo.find(key);
    if (found != memo.end()) return found->second;
    StateSet out;
    switch (f->op) {
      case Op::True:
        out = all_states;
        break;
      case Op::False:
        break;
      case Op::Atom:
        for (const auto& [name, label] : m.labels) {
          if (label.count(f->atom)) out.insert(name);
        }
        break;
      case Op::Not:
        out = complement(eval(f->lhs));
        break;
      case Op::And: {
        const StateSet& a = eval(f->lhs);
        const StateSet& b = eval(f->rhs);
        for (const auto& s : a) {
          if (b.count(s)) out.insert(s);
        }
        break;
      }
      case Op::Or: {
        out = eval(f->lhs);
        const StateSet& b = eval(f->rhs);
        out.insert(b.begin(), b.end());
        break;
      }
      case Op::Implies: {
        out = complement(eval(f->lhs));
        const StateSet& b = eval(f->rhs);
        out.insert(b.begin(), b.end());
        break;
      }
      case Op::EX: {
        const StateSet& g = eval(f->lhs);
        for (const auto& s : all_states) {
          for (const auto& t : succ(s)) {
            if (g.count(t)) {
              out.insert(s);
              break;
            }
          }
        }
        break;
      }
      case Op::AX: {
        const StateSet& g = eval(f->lhs);
        for (const auto& s : all_states) {
          StateSet ts = succ(s);
          bool all = true;
          for (const auto& t : ts) {
            if (!g.count(t)) {
              all = false;
              break;
            }
          }
          if (all) out.insert(s);
        }
        break;
      }
      case Op::EF:
        out = lfp_eu(all_states, eval(f->lhs));
        break;
      case Op::EU:
        out = lfp_eu(eval(f->lhs), eval(f->rhs));
        break;
      case Op::EG:
        out = gfp_eg(eval(f->lhs));
        break;
      case Op::AG:
        out = gfp_ag(eval(f->lhs));
        break;
      case Op::AF:
        out = lfp_af(eval(f->lhs));
        break;
      case Op::AU:
        out = lfp_au(eval(f->lhs), eval(f->rhs));
        break;
    }
    return memo.emplace(std::move(key), std::move(out)).first->second;
  }

  // E[f1 U f2]: least fixpoint X = F2 ∪ (F1 ∩ pre∃(X)).
  StateSet lfp_eu(const StateSet& f1, const StateSet& f2) {
    StateSet x = f2;
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& s : f1) {
        if (x.count(s)) continue;
        for (const auto& t : succ(s)) {
          if (x.count(t)) {
            x.insert(s);
            changed = true;
            break;
          }
        }
      }
    }
    return x;
  }

  // A[f1 U f2]: least fixpoint X = F2 ∪ (F1 ∩ {s : succ ≠ ∅ ∧ succ ⊆ X}).
  // A deadlocked state satisfies it only through f2 (its one maximal path
  // is the singleton).
  StateSet lfp_au(const StateSet& f1, const StateSet& f2) {
    StateSet x = f2;
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& s : f1) {
        if (x.count(s)) continue;
        StateSet ts = succ(s);
        if (ts.empty()) continue;
        bool all = true;
        for (const auto& t : ts) {
          if (!x.count(t)) {
            all = false;
            break;
          }
        }
        if (all) {
          x.insert(s);
          changed = true;
        }
      }
    }
    return x;
  }

  // EG g: greatest fixpoint X = G ∩ ({s : succ ∩ X ≠ ∅} ∪ {s : succ = ∅}).
  // A deadlocked g-state keeps EG g via its finite maximal path.
  StateSet gfp_eg(const StateSet& g) {
    StateSet x = g;
    bool changed = true;
    while (changed) {
      changed = false;
      for (auto it = x.begin(); it != x.end();) {
        StateSet ts = succ(*it);
        bool keep = ts.empty();
        for (const auto& t : ts) {
          if (x.count(t)) {
            keep = true;
            break;
          }
        }
        if (keep) {
          ++it;
        } else {
          it = x.erase(it);
          changed = true;
        }
      }
    }
    return x;
  }

  // AG g: greatest fixpoint X = G ∩ {s : succ ⊆ X}.
  StateSet gfp_ag(const StateSet& g) {
    StateSet x = g;
    bool changed = true;
    while (changed) {
      changed = false;
      for (auto it = x.begin(); it != x.end();) {
        bool keep = true;
        for (const auto& t : succ(*it)) {
          if (!x.count(t)) {
            keep = false;
            break;
          }
        }
        if (keep) {
          ++it;
        } else {
          it = x.erase(it);
          changed = true;
        }
      }
    }
    return x;
  }

  // AF g: least fixpoint X = G ∪ {s : succ ≠ ∅ ∧ succ ⊆ X}.
  StateSet lfp_af(const StateSet& g) {
    StateSet x = g;
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& s : all_states) {
        if (x.count(s)) continue;
        StateSet ts = succ(s);
        if (ts.empty()) continue;
        bool all = true;
        for (const auto& t : ts) {
          if (!x.count(t)) {
            all = false;
            break;
          }
        }
        if (all) {
          x.insert(s);
          changed = true;
        }
      }
    }
    return x;
  }
};

}  // namespace

SatLabeling sat_set(const KripkeModel& m, const FormulaPtr& f) {
  SatContext ctx(m);
  SatLabeling out;
  out.root = ctx.eval(f);
  out.by_formula = std::move(ctx.memo);
  return out;
}

std::set<std::string> sat_states(const KripkeModel& m, const FormulaPtr& f) {
  SatContext ctx(m);
  return ctx.eval(f);
}

bool check(const KripkeModel& m, const std::string& state, const FormulaPtr& f) {
  if (!has_state(m, state)) throw CheckError("unknown state '" + state + "'");
  return sat_states(m, f).count(state) != 0;
}

bool check(const PointedModel& pm, const FormulaPtr& f) {
  return check(pm.model, pm.start, f);
}

std::set<std::string> false_states(const KripkeModel& m, const std::string& start,
                                   const FormulaPtr& f) {
  if (f->op != Op::AG || !is_propositional(f->lhs))
    throw CheckError("false_states requires a goal of the form AG psi with propositional psi");
  std::set<std::string> out;
  for (const auto& s : reachable_states(m, start)) {
    if (!label_satisfies(m.labels.at(s), f->lhs)) out.insert(s);
  }
  return out;
}

// ── Witness detection ───────────────────────────────────────────────────────

namespace {

// States occurring at positions >= 1 of the infinite path stem ++ loop^ω.
// Every loop state recurs, so only the very head (stem front, or loop front
// when the stem is empty) can be position-0-only.
std::set<std::string> position_one_plus(const Lasso& l) {
  std::set<std::string> out(l.loop.begin(), l.loop.end());
  for (std::size_t i = 1; i < l.stem.size(); ++i) out.insert(l.stem[i]);
  return out;
}

std::vector<std::string> first_unroll(const Lasso& l) {
  std::vector<std::string> seq = l.stem;
  seq.insert(seq.end(), l.loop.begin(), l.loop.end());
  return seq;
}

// Clause predicate for one lasso against one atomic path-form subformula.
// s0_label is the label of the violated model's start state.
bool lasso_matches(const KripkeModel& m, const Lasso& l, const FormulaPtr& part,
                   const std::set<std::string>& s0_label) {
  auto lab = [&](const std::string& s) -> const std::set<std::string>& {
    return m.labels.at(s);
  };
  switch (part->op) {
    case Op::AG:
    case Op::EG: {
      if (part->op == Op::EG && !label_satisfies(s0_label, part->lhs)) return false;
      for (const auto& s : first_unroll(l)) {
        if (!label_satisfies(lab(s), part->lhs)) return false;
      }
      return true;
    }
    case Op::AF:
    case Op::EF: {
      for (const auto& s : position_one_plus(l)) {
        if (label_satisfies(lab(s), part->lhs)) return true;
      }
      return false;
    }
    case Op::AU:
    case Op::EU: {
      if (part->op == Op::EU && !label_satisfies(s0_label, part->lhs)) return false;
      auto seq = first_unroll(l);
      for (std::size_t t = 0; t < seq.size(); ++t) {
        if (!label_satisfies(lab(seq[t]), part->rhs)) continue;
        bool prefix_ok = true;
        for (std::size_t u = 0; u < t; ++u) {
          if (!label_satisfies(lab(seq[u]), part->lhs)) {
            prefix_ok = false;
            break;
          }
        }
        if (prefix_ok) return true;
      }
      return false;
    }
    default:
      return false;
  }
}

// All simple lassos (simple path plus one back-edge) from `start`.
void enumerate_simple_lassos(const KripkeModel& m, const std::string& start,
                             std::vector<Lasso>& out) {
  std::vector<std::string> path;
  std::function<void()> dfs = [&]() {
    const std::string& tip = path.back();
    for (const auto& t : successors(m, tip)) {
      auto pos = std::find(path.begin(), path.end(), t);
      if (pos != path.end()) {
        Lasso l;
        l.stem.assign(path.begin(), pos);
        l.loop.assign(pos, path.end());
        out.push_back(std::move(l));
      } else {
        path.push_back(t);
        dfs();
        path.pop_back();
      }
    }
  };
  path.push_back(start);
  dfs();
}

// BFS shortest path from any state in `from` to `target` within `allowed`
// (lexicographically least among the shortest). Returns empty when
// unreachable. The path includes its endpoint(s).
std::vector<std::string> bfs_path(const KripkeModel& m, const std::vector<std::string>& from,
                                  const std::string& target,
                                  const std::set<std::string>* allowed) {
  std::map<std::string, std::string> parent;
  std::deque<std::string> queue;
  for (const auto& s : from) {
    if (allowed && !allowed->count(s) && s != target) continue;
    if (!parent.count(s)) {
      parent[s] = "";
      queue.push_back(s);
    }
  }
  while (!queue.empty()) {
    std::string s = queue.front();
    queue.pop_front();
    if (s == target) {
      std::vector<std::string> path;
      for (std::string cur = s; !cur.empty(); cur = parent[cur]) path.push_back(cur);
      std::reverse(path.begin(), path.end());
      return path;
    }
    for (const auto& t : successors(m, s)) {
      if (allowed && !allowed->count(t) && t != target) continue;
      if (!parent.count(t)) {
        parent[t] = s;
        queue.push_back(t);
      }
    }
  }
  return {};
}

// Shortest cycle through some state reachable from `from` within `allowed`:
// returns the cycle as [u, ..., last] with (last, u) a transition. Empty when
// no cycle is reachable.
std::vector<std::string> find_reachable_cycle(const KripkeModel& m, const std::string& from,
                                              const std::set<std::string>* allowed,
                                              std::vector<std::string>* stem_out) {
  // Reachable set from `from` within allowed (inclusive of `from` only if allowed).
  std::set<std::string> reach;
  std::deque<std::string> queue;
  if (!allowed || allowed->count(from)) {
    reach.insert(from);
    queue.push_back(from);
  }
  while (!queue.empty()) {
    std::string s = queue.front();
    queue.pop_front();
    for (const auto& t : successors(m, s)) {
      if (allowed && !allowed->count(t)) continue;
      if (reach.insert(t).second) queue.push_back(t);
    }
  }
  for (const auto& u : reach) {
    // Cycle u -> ... -> u within allowed: BFS from u's successors back to u.
    std::vector<std::string> starts;
    for (const auto& t : successors(m, u)) {
      if (t == u) {
        if (stem_out) *stem_out = bfs_path(m, {from}, u, allowed);
        return {u};
      }
      if (!allowed || allowed->count(t)) starts.push_back(t);
    }
    auto back = bfs_path(m, starts, u, allowed);
    if (!back.empty()) {
      if (stem_out) *stem_out = bfs_path(m, {from}, u, allowed);
      std::vector<std::string> cycle = {u};
      cycle.insert(cycle.end(), back.begin(), back.end() - 1);
      return cycle;
    }
  }
  return {};
}

// Constructive extraction of one valid lasso for a path-form clause from
// `start`. Returns nullopt when none exists in (possibly scratch-reduced) m.
std::optional<Lasso> extract_lasso(const KripkeModel& m, const std::string& start,
                                   const FormulaPtr& part,
                                   const std::set<std::string>& s0_label) {
  auto prop_states = [&](const FormulaPtr& g) {
    std::set<std::string> out;
    for (const auto& [name, label] : m.labels) {
      if (name != kDummyName && label_satisfies(label, g)) out.insert(name);
    }
    return out;
  };
  auto build = [](std::vector<std::string> stem, std::vector<std::string> loop) {
    Lasso l;
    // The stem produced by the helpers includes the loop head; drop it.
    if (!stem.empty()) stem.pop_back();
    l.stem = std::move(stem);
    l.loop = std::move(loop);
    return l;
  };

  switch (part->op) {
    case Op::AG:
    case Op::EG: {
      if (part->op == Op::EG && !label_satisfies(s0_label, part->lhs)) return std::nullopt;
      auto g = prop_states(part->lhs);
      if (!g.count(start)) return std::nullopt;
      std::vector<std::string> stem;
      auto cycle = find_reachable_cycle(m, start, &g, &stem);
      if (cycle.empty() || stem.empty()) return std::nullopt;
      return build(stem, cycle);
    }
    case Op::AF:
    case Op::EF: {
      auto h = prop_states(part->lhs);
      // Reach some h-state z at position >= 1, then continue to any cycle.
      for (const auto& z : h) {
        std::vector<std::string> starts;
        for (const auto& t : successors(m, start)) starts.push_back(t);
        auto to_z = bfs_path(m, starts, z, nullptr);
        if (to_z.empty()) continue;
        std::vector<std::string> tail_stem;
        auto cycle = find_reachable_cycle(m, z, nullptr, &tail_stem);
        if (cycle.empty() || tail_stem.empty()) continue;
        std::vector<std::string> stem = {start};
        stem.insert(stem.end(), to_z.begin(), to_z.end());
        stem.insert(stem.end(), tail_stem.begin() + 1, tail_stem.end());
        return build(stem, cycle);
      }
      return std::nullopt;
    }
    case Op::AU:
    case Op::EU: {
      if (part->op == Op::EU && !label_satisfies(s0_label, part->lhs)) return std::nullopt;
      auto f1 = prop_states(part->lhs);
      auto f2 = prop_states(part->rhs);
      std::vector<std::string> to_hit;  // path start..z with prefix in f1, z in f2
      if (f2.count(start)) {
        to_hit = {start};
      } else if (f1.count(start)) {
        for (const auto& z : f2) {
          auto p = bfs_path(m, {start}, z, &f1);
          if (!p.empty()) {
            to_hit = p;
            break;
          }
        }
      }
      if (to_hit.empty()) return std::nullopt;
      std::vector<std::string> tail_stem;
      auto cycle = find_reachable_cycle(m, to_hit.back(), nullptr, &tail_stem);
      if (cycle.empty() || tail_stem.empty()) return std::nullopt;
      std::vector<std::string> stem = to_hit;
      stem.insert(stem.end(), tail_stem.begin() + 1, tail_stem.end());
      return build(stem, cycle);
    }
    default:
      return std::nullopt;
  }
}

bool is_a_form(Op op) { return op == Op::AX || op == Op::AG || op == Op::AF || op == Op::AU; }

}  // namespace

bool WitnessReport::complete() const {
  for (const auto& e : entries) {
    if (!e.has_witness()) return false;
  }
  return !entries.empty();
}

WitnessReport find_witness(const PointedModel& pm, const FormulaPtr& f,
                           std::size_t max_paths_per_formula) {
  auto parts = classify_aeclass(f);
  if (!parts) throw CheckError("find_witness requires an AEClass formula");
  const KripkeModel& m = pm.model;
  const auto& s0_label = m.labels.at(pm.start);

  WitnessReport report;
  for (const auto& part : *parts) {
    WitnessEntry entry;
    entry.subformula = part;
    if (part->op == Op::AX) {
      entry.is_state_form = true;
      for (const auto& t : successors(m, pm.start)) {
        if (t != kDummyName && label_satisfies(m.labels.at(t), part->lhs))
          entry.valid_states.insert(t);
      }
    } else if (part->op == Op::EX) {
      entry.is_state_form = true;
      for (const auto& [name, label] : m.labels) {
        if (name != kDummyName && label_satisfies(label, part->lhs))
          entry.valid_states.insert(name);
      }
    } else {
      std::vector<std::string> starts;
      if (is_a_form(part->op)) {
        starts.push_back(pm.start);
      } else {
        for (const auto& [name, label] : m.labels) {
          if (name != pm.start && name != kDummyName) starts.push_back(name);
        }
      }
      if (m.labels.size() <= 8) {
        for (const auto& start : starts) {
          std::vector<Lasso> lassos;
          enumerate_simple_lassos(m, start, lassos);
          for (auto& l : lassos) {
            if (entry.valid_paths.size() >= max_paths_per_formula) break;
            if (lasso_matches(m, l, part, s0_label)) entry.valid_paths.push_back(std::move(l));
          }
        }
      } else {
        for (const auto& start : starts) {
          KripkeModel scratch = m;
          while (entry.valid_paths.size() < max_paths_per_formula) {
            auto l = extract_lasso(scratch, start, part, s0_label);
            if (!l) break;
            // Disconnect the found loop in the scratch copy so the next
            // extraction finds a different path; the reported lasso itself
            // uses only original edges.
            const auto& loop = l->loop;
            std::string from = loop.back();
            std::string to = loop.front();
            if (loop.size() > 1) {
              from = loop[0];
              to = loop[1];
            }
            entry.valid_paths.push_back(std::move(*l));
            scratch.trans.erase({from, to});
          }
        }
      }
    }
    report.entries.push_back(std::move(entry));
  }
  return report;
}

}  // namespace ctlrepair
