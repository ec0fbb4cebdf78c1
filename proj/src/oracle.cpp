#include "ctlrepair/oracle.hpp"

#include <algorithm>
#include <map>
#include <utility>

#include "ctlrepair/diff.hpp"
#include "ctlrepair/update.hpp"

namespace ctlrepair {

// ── Model enumeration ───────────────────────────────────────────────────────

namespace {

std::string next_fresh(const KripkeModel& m) {
  for (std::size_t k = 1;; ++k) {
    std::string name = kFreshPrefix + std::to_string(k);
    if (!has_state(m, name)) return name;
  }
}

std::size_t fresh_count(const KripkeModel& m) {
  std::size_t n = 0;
  for (const auto& [name, label] : m.labels) {
    if (name.rfind(kFreshPrefix, 0) == 0) ++n;
  }
  return n;
}

// All subsets of the usable relabeling universe, smallest first.
std::vector<std::set<std::string>> label_universe(const KripkeModel& m, const EditBudget& b) {
  std::vector<std::string> atoms;
  for (const auto& a : b.atom_universe) {
    if (m.atoms.count(a)) atoms.push_back(a);
  }
  std::vector<std::set<std::string>> out;
  for (std::size_t mask = 0; mask < (std::size_t{1} << atoms.size()); ++mask) {
    std::set<std::string> label;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      if (mask & (std::size_t{1} << i)) label.insert(atoms[i]);
    }
    out.push_back(std::move(label));
  }
  return out;
}

// Every model one primitive edit away from m, honoring the preconditions.
std::vector<KripkeModel> single_edits(const KripkeModel& m,
                                      const std::vector<std::set<std::string>>& labels,
                                      const EditBudget& b) {
  std::vector<KripkeModel> out;
  for (const auto& [from, fl] : m.labels) {
    if (from == kDummyName) continue;
    for (const auto& [to, tl] : m.labels) {
      if (to == kDummyName || m.trans.count({from, to})) continue;
      out.push_back(apply_pu1(m, from, to));
    }
  }
  for (const auto& [from, to] : m.trans) {
    if (from == kDummyName || to == kDummyName) continue;
    out.push_back(apply_pu2(m, from, to));
  }
  for (const auto& [s, current] : m.labels) {
    if (s == kDummyName) continue;
    for (const auto& label : labels) {
      if (label != current) out.push_back(apply_pu3(m, s, label));
    }
  }
  if (fresh_count(m) < b.allow_new_states) {
    std::string name = next_fresh(m);
    for (const auto& label : labels) out.push_back(apply_pu4(m, name, label));
  }
  for (const auto& [s, label] : m.labels) {
    if (s == kDummyName || m.init.count(s)) continue;
    bool isolated = true;
    for (const auto& [from, to] : m.trans) {
      if (from == s || to == s) isolated = false;
    }
    if (isolated) out.push_back(apply_pu5(m, s));
  }
  return out;
}

void require_enumerable(const KripkeModel& base, const EditBudget& b) {
  if (b.max_ops > 3)
    throw OracleError("edit budget " + std::to_string(b.max_ops) + " exceeds the limit of 3");
  if (base.labels.size() + b.allow_new_states > 6)
    throw OracleError("state space of " +
                      std::to_string(base.labels.size() + b.allow_new_states) +
                      " exceeds the limit of 6");
  if (b.atom_universe.size() > 3)
    throw OracleError("atom universe of " + std::to_string(b.atom_universe.size()) +
                      " exceeds the limit of 3");
}

}  // namespace

std::vector<KripkeModel> enumerate_models(const KripkeModel& base, const EditBudget& b) {
  require_enumerable(base, b);
  std::vector<std::set<std::string>> labels = label_universe(base, b);

  std::vector<KripkeModel> out{base};
  std::set<std::string> seen{canonical_key(base)};
  std::vector<KripkeModel> level{base};
  for (std::size_t ops = 0; ops < b.max_ops; ++ops) {
    // Collect the next level keyed by canonical form so each model appears
    // once and the emission order is independent of discovery order.
    std::map<std::string, KripkeModel> next;
    for (const auto& m : level) {
      for (auto& edited : single_edits(m, labels, b)) {
        std::string key = canonical_key(edited);
        if (!seen.count(key) && !next.count(key)) next.emplace(std::move(key), std::move(edited));
      }
    }
    level.clear();
    for (auto& [key, m] : next) {
      seen.insert(key);
      out.push_back(m);
      level.push_back(std::move(m));
    }
  }
  return out;
}

// ── Path-unfolding evaluation ───────────────────────────────────────────────

namespace {

int formula_depth(const FormulaPtr& f) {
  switch (f->op) {
    case Op::True:
    case Op::False:
    case Op::Atom:
      return 0;
    case Op::Not:
    case Op::AX:
    case Op::EX:
    case Op::AG:
    case Op::EG:
    case Op::AF:
    case Op::EF:
      return 1 + formula_depth(f->lhs);
    default:
      return 1 + std::max(formula_depth(f->lhs), formula_depth(f->rhs));
  }
}

// One maximal path shape: a stem of distinct states, either ending at a
// deadlocked state (loop_start < 0) or closed by a back edge from the last
// state to states[loop_start]. The represented path visits exactly the
// states in the vector — the stem once, the loop forever.
struct PathShape {
  std::vector<std::string> states;
  int loop_start = -1;
};

class PathEvaluator {
 public:
  explicit PathEvaluator(const KripkeModel& m) : m_(m) {}

  bool eval(const std::string& s, const FormulaPtr& f) {
    auto key = std::make_pair(f.get(), s);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    bool value = compute(s, f);
    memo_.emplace(std::move(key), value);
    return value;
  }

 private:
  bool compute(const std::string& s, const FormulaPtr& f) {
    switch (f->op) {
      case Op::True:
        return true;
      case Op::False:
        return false;
      case Op::Atom:
        return m_.labels.at(s).count(f->atom) > 0;
      case Op::Not:
        return !eval(s, f->lhs);
      case Op::And:
        return eval(s, f->lhs) && eval(s, f->rhs);
      case Op::Or:
        return eval(s, f->lhs) || eval(s, f->rhs);
      case Op::Implies:
        return !eval(s, f->lhs) || eval(s, f->rhs);
      case Op::AX: {
        for (const auto& t : successors(m_, s)) {
          if (!eval(t, f->lhs)) return false;
        }
        return true;
      }
      case Op::EX: {
        for (const auto& t : successors(m_, s)) {
          if (eval(t, f->lhs)) return true;
        }
        return false;
      }
      case Op::AG:
        return all_paths(s, [&](const PathShape& p) { return globally(p, f->lhs); });
      case Op::EG:
        return some_path(s, [&](const PathShape& p) { return globally(p, f->lhs); });
      case Op::AF:
        return all_paths(s, [&](const PathShape& p) { return finally(p, f->lhs); });
      case Op::EF:
        return some_path(s, [&](const PathShape& p) { return finally(p, f->lhs); });
      case Op::AU:
        return all_paths(s, [&](const PathShape& p) { return until(p, f->lhs, f->rhs); });
      case Op::EU:
        return some_path(s, [&](const PathShape& p) { return until(p, f->lhs, f->rhs); });
    }
    return false;  // unreachable
  }

  bool globally(const PathShape& p, const FormulaPtr& g) {
    for (const auto& s : p.states) {
      if (!eval(s, g)) return false;
    }
    return true;
  }

  bool finally(const PathShape& p, const FormulaPtr& g) {
    for (const auto& s : p.states) {
      if (eval(s, g)) return true;
    }
    return false;
  }

  // Scan positions left to right: a hit decides true, a broken prefix
  // decides false. Running off the end is false either way — a finite path
  // never reached the target, and a lasso would only repeat positions
  // already seen to fail.
  bool until(const PathShape& p, const FormulaPtr& f1, const FormulaPtr& f2) {
    for (const auto& s : p.states) {
      if (eval(s, f2)) return true;
      if (!eval(s, f1)) return false;
    }
    return false;
  }

  template <typename Pred>
  bool all_paths(const std::string& s, Pred pred) {
    for (const auto& p : paths_from(s)) {
      if (!pred(p)) return false;
    }
    return true;
  }

  template <typename Pred>
  bool some_path(const std::string& s, Pred pred) {
    for (const auto& p : paths_from(s)) {
      if (pred(p)) return true;
    }
    return false;
  }

  const std::vector<PathShape>& paths_from(const std::string& s) {
    auto it = paths_.find(s);
    if (it != paths_.end()) return it->second;
    std::vector<PathShape> shapes;
    std::vector<std::string> path{s};
    std::set<std::string> on_path{s};
    collect(path, on_path, shapes);
    return paths_.emplace(s, std::move(shapes)).first->second;
  }

  void collect(std::vector<std::string>& path, std::set<std::string>& on_path,
               std::vector<PathShape>& out) {
    std::set<std::string> next = successors(m_, path.back());
    if (next.empty()) {
      out.push_back({path, -1});
      return;
    }
    for (const auto& t : next) {
      if (on_path.count(t)) {
        int at = static_cast<int>(std::find(path.begin(), path.end(), t) - path.begin());
        out.push_back({path, at});
      } else {
        path.push_back(t);
        on_path.insert(t);
        collect(path, on_path, out);
        path.pop_back();
        on_path.erase(t);
      }
    }
  }

  const KripkeModel& m_;
  std::map<std::pair<const Formula*, std::string>, bool> memo_;
  std::map<std::string, std::vector<PathShape>> paths_;
};

}  // namespace

bool brute_force_check(const PointedModel& pm, const FormulaPtr& f) {
  if (pm.model.labels.size() > 6)
    throw OracleError("model with " + std::to_string(pm.model.labels.size()) +
                      " states exceeds the limit of 6");
  if (formula_depth(f) > 4)
    throw OracleError("formula depth " + std::to_string(formula_depth(f)) +
                      " exceeds the limit of 4");
  if (!has_state(pm.model, pm.start))
    throw OracleError("unknown start state '" + pm.start + "'");
  PathEvaluator ev(pm.model);
  return ev.eval(pm.start, f);
}

// ── Admissibility by exhaustion ─────────────────────────────────────────────

std::vector<KripkeModel> brute_force_admissible(const PointedModel& base, const FormulaPtr& f,
                                                const EditBudget& b) {
  std::vector<KripkeModel> satisfying;
  std::vector<DiffVector> diffs;
  for (auto& m : enumerate_models(base.model, b)) {
    if (has_state(m, base.start) && brute_force_check({m, base.start}, f)) {
      diffs.push_back(compute_diff(base.model, m));
      satisfying.push_back(std::move(m));
    }
  }

  std::vector<bool> dominated(satisfying.size(), false);
  for (std::size_t i = 0; i < satisfying.size(); ++i) {
    for (std::size_t j = 0; j < satisfying.size(); ++j) {
      if (i != j && strictly_closer(diffs[j], diffs[i])) {
        dominated[i] = true;
        break;
      }
    }
  }

  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < satisfying.size(); ++i) {
    if (!dominated[i]) order.push_back(i);
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t c) {
    if (diffs[a].total_size() != diffs[c].total_size())
      return diffs[a].total_size() < diffs[c].total_size();
    return canonical_key(satisfying[a]) < canonical_key(satisfying[c]);
  });
  std::vector<KripkeModel> out;
  for (std::size_t i : order) out.push_back(std::move(satisfying[i]));
  return out;
}

}  // namespace ctlrepair
