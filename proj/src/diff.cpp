#include "ctlrepair/diff.hpp"

#include <algorithm>

namespace ctlrepair {

namespace {

template <typename Set>
bool subset(const Set& a, const Set& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

}  // namespace

std::set<std::string> LabelDelta::symmetric() const {
  std::set<std::string> out = added;
  out.insert(removed.begin(), removed.end());
  return out;
}

bool DiffVector::empty() const {
  return added_edges.empty() && removed_edges.empty() && relabeled_states.empty() &&
         added_states.empty() && removed_states.empty();
}

std::size_t DiffVector::total_size() const {
  std::size_t n = added_edges.size() + removed_edges.size() + added_states.size() +
                  removed_states.size();
  for (const auto& [state, delta] : label_deltas)
    n += delta.added.size() + delta.removed.size();
  return n;
}

DiffVector compute_diff(const KripkeModel& base, const KripkeModel& other) {
  DiffVector d;
  for (const auto& e : other.trans) {
    if (!base.trans.count(e)) d.added_edges.insert(e);
  }
  for (const auto& e : base.trans) {
    if (!other.trans.count(e)) d.removed_edges.insert(e);
  }
  for (const auto& [name, label] : other.labels) {
    auto it = base.labels.find(name);
    if (it == base.labels.end()) {
      d.added_states.insert(name);
      continue;
    }
    if (it->second == label) continue;
    d.relabeled_states.insert(name);
    LabelDelta delta;
    for (const auto& a : label) {
      if (!it->second.count(a)) delta.added.insert(a);
    }
    for (const auto& a : it->second) {
      if (!label.count(a)) delta.removed.insert(a);
    }
    d.label_deltas[name] = std::move(delta);
  }
  for (const auto& [name, label] : base.labels) {
    if (!other.labels.count(name)) d.removed_states.insert(name);
  }
  return d;
}

bool closer_or_equal(const DiffVector& d1, const DiffVector& d2) {
  if (!subset(d1.added_edges, d2.added_edges)) return false;
  if (!subset(d1.removed_edges, d2.removed_edges)) return false;
  if (!subset(d1.relabeled_states, d2.relabeled_states)) return false;
  if (!subset(d1.added_states, d2.added_states)) return false;
  if (!subset(d1.removed_states, d2.removed_states)) return false;
  if (d1.relabeled_states == d2.relabeled_states) {
    for (const auto& [state, delta] : d1.label_deltas) {
      if (!subset(delta.symmetric(), d2.label_deltas.at(state).symmetric())) return false;
    }
  }
  return true;
}

bool closer_or_equal(const KripkeModel& base, const KripkeModel& m1, const KripkeModel& m2) {
  return closer_or_equal(compute_diff(base, m1), compute_diff(base, m2));
}

bool strictly_closer(const DiffVector& d1, const DiffVector& d2) {
  return closer_or_equal(d1, d2) && !closer_or_equal(d2, d1);
}

bool strictly_closer(const KripkeModel& base, const KripkeModel& m1, const KripkeModel& m2) {
  DiffVector d1 = compute_diff(base, m1);
  DiffVector d2 = compute_diff(base, m2);
  return strictly_closer(d1, d2);
}

nlohmann::json diff_to_json(const DiffVector& d) {
  nlohmann::json j;
  j["added_edges"] = nlohmann::json::array();
  for (const auto& [from, to] : d.added_edges) j["added_edges"].push_back({from, to});
  j["removed_edges"] = nlohmann::json::array();
  for (const auto& [from, to] : d.removed_edges) j["removed_edges"].push_back({from, to});
  j["relabeled"] = nlohmann::json::object();
  for (const auto& [state, delta] : d.label_deltas)
    j["relabeled"][state] = {{"added", delta.added}, {"removed", delta.removed}};
  j["added_states"] = d.added_states;
  j["removed_states"] = d.removed_states;
  return j;
}

}  // namespace ctlrepair
