#include "ctlrepair/kripke.hpp"

#include <sstream>

#include "ctlrepair/diff.hpp"

namespace ctlrepair {

namespace {

bool valid_name_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9') || c == '_' || c == '.';
}

bool is_reserved(const std::string& name) {
  return name == kDummyName || name.rfind(kFreshPrefix, 0) == 0;
}

// The text format is for hand-authored models, so it refuses both reserved
// spellings: the dummy '#' and the fresh-state prefix the updater mints from.
// JSON is also the engine's own output format — repair candidates legitimately
// contain fresh '_u<k>' states — so JSON input accepts those and only rejects
// the dummy, which is never serialized.
void check_input_name(const std::string& name, const char* what, int line,
                      bool allow_fresh = false) {
  std::string where = line >= 0 ? " (line " + std::to_string(line) + ")" : "";
  if (name.empty())
    throw ModelError(std::string("empty ") + what + " name" + where);
  for (char c : name) {
    if (!valid_name_char(c))
      throw ModelError(std::string(what) + " name '" + name +
                       "' has characters outside [A-Za-z0-9_.]" + where);
  }
  if (name == kDummyName || (!allow_fresh && is_reserved(name)))
    throw ModelError(std::string(what) + " name '" + name + "' is reserved" + where);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

bool has_state(const KripkeModel& m, const std::string& name) {
  return m.labels.count(name) != 0;
}

bool has_dummy(const KripkeModel& m) { return has_state(m, kDummyName); }

void validate_model(const KripkeModel& m) {
  if (m.init.empty()) throw ModelError("model has no initial states");
  for (const auto& s : m.init) {
    if (!has_state(m, s)) throw ModelError("initial state '" + s + "' is not a state");
  }
  for (const auto& [name, label] : m.labels) {
    for (const auto& a : label) {
      if (!m.atoms.count(a))
        throw ModelError("state '" + name + "' labeled with undeclared atom '" + a + "'");
    }
  }
  for (const auto& [from, to] : m.trans) {
    if (!has_state(m, from) || !has_state(m, to))
      throw ModelError("transition " + from + " -> " + to + " has an unknown endpoint");
  }
  if (has_dummy(m)) {
    if (!m.labels.at(kDummyName).empty())
      throw ModelError("dummy state must have an empty label");
    std::set<std::string> succ;
    for (const auto& [from, to] : m.trans) {
      if (to == kDummyName) throw ModelError("dummy state must have no incoming edges");
      if (from == kDummyName) succ.insert(to);
    }
    if (succ != m.init)
      throw ModelError("dummy state's successors must be exactly the initial states");
  }
}

KripkeModel parse_model(const std::string& text) {
  KripkeModel m;
  struct PendingState {
    std::string name;
    std::vector<std::string> label;
    int line;
  };
  std::vector<PendingState> states;
  std::vector<std::pair<std::string, int>> init_names;
  std::vector<std::tuple<std::string, std::string, int>> edges;

  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    if (size_t hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.rfind("atoms:", 0) == 0) {
      for (const auto& a : split_ws(line.substr(6))) {
        check_input_name(a, "atom", lineno);
        m.atoms.insert(a);
      }
    } else if (line.rfind("state", 0) == 0 &&
               (line.size() == 5 || line[5] == ' ' || line[5] == '\t')) {
      std::string rest = trim(line.substr(5));
      std::string name_part = rest;
      std::vector<std::string> label;
      if (size_t colon = rest.find(':'); colon != std::string::npos) {
        name_part = trim(rest.substr(0, colon));
        label = split_ws(rest.substr(colon + 1));
      }
      auto name_toks = split_ws(name_part);
      if (name_toks.size() != 1)
        throw ModelError("state line needs exactly one name (line " +
                         std::to_string(lineno) + ")");
      states.push_back({name_toks[0], label, lineno});
    } else if (line.rfind("init:", 0) == 0) {
      for (const auto& s : split_ws(line.substr(5))) init_names.push_back({s, lineno});
    } else if (line.rfind("trans:", 0) == 0) {
      std::string rest = line.substr(6);
      size_t arrow = rest.find("->");
      if (arrow == std::string::npos || rest.find("->", arrow + 2) != std::string::npos)
        throw ModelError("transition line needs exactly one '->' (line " +
                         std::to_string(lineno) + ")");
      auto from = split_ws(rest.substr(0, arrow));
      auto to = split_ws(rest.substr(arrow + 2));
      if (from.size() != 1 || to.size() != 1)
        throw ModelError("transition line needs one name each side of '->' (line " +
                         std::to_string(lineno) + ")");
      edges.push_back({from[0], to[0], lineno});
    } else {
      throw ModelError("unknown directive (line " + std::to_string(lineno) + "): " + line);
    }
  }

  for (const auto& st : states) {
    check_input_name(st.name, "state", st.line);
    if (has_state(m, st.name))
      throw ModelError("duplicate state '" + st.name + "' (line " +
                       std::to_string(st.line) + ")");
    std::set<std::string> label;
    for (const auto& a : st.label) {
      if (!m.atoms.count(a))
        throw ModelError("state '" + st.name + "' labeled with undeclared atom '" + a +
                         "' (line " + std::to_string(st.line) + ")");
      label.insert(a);
    }
    m.labels[st.name] = std::move(label);
  }
  for (const auto& [s, line] : init_names) {
    if (!has_state(m, s))
      throw ModelError("initial state '" + s + "' is not a state (line " +
                       std::to_string(line) + ")");
    m.init.insert(s);
  }
  for (const auto& [from, to, line] : edges) {
    if (!has_state(m, from) || !has_state(m, to))
      throw ModelError("transition " + from + " -> " + to +
                       " has an unknown endpoint (line " + std::to_string(line) + ")");
    m.trans.insert({from, to});
  }
  validate_model(m);
  return m;
}

KripkeModel model_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ModelError("model JSON must be an object");
  for (const auto& key : {"atoms", "states", "init"}) {
    if (!j.contains(key)) throw ModelError(std::string("model JSON missing key '") + key + "'");
  }
  KripkeModel m;
  try {
    for (const auto& a : j.at("atoms")) {
      std::string name = a.get<std::string>();
      check_input_name(name, "atom", -1);
      m.atoms.insert(name);
    }
    for (const auto& [name, label] : j.at("states").items()) {
      check_input_name(name, "state", -1, /*allow_fresh=*/true);
      if (has_state(m, name)) throw ModelError("duplicate state '" + name + "'");
      std::set<std::string> atoms;
      for (const auto& a : label) atoms.insert(a.get<std::string>());
      m.labels[name] = std::move(atoms);
    }
    for (const auto& s : j.at("init")) m.init.insert(s.get<std::string>());
    if (j.contains("trans")) {
      for (const auto& e : j.at("trans")) {
        if (!e.is_array() || e.size() != 2)
          throw ModelError("each transition must be a [from, to] pair");
        m.trans.insert({e.at(0).get<std::string>(), e.at(1).get<std::string>()});
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ModelError(std::string("malformed model JSON: ") + e.what());
  }
  validate_model(m);
  return m;
}

KripkeModel parse_model_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ModelError(std::string("model JSON parse error: ") + e.what());
  }
  return model_from_json(j);
}

nlohmann::json model_to_json(const KripkeModel& m) {
  nlohmann::json j;
  j["atoms"] = m.atoms;
  j["states"] = nlohmann::json::object();
  for (const auto& [name, label] : m.labels) j["states"][name] = label;
  j["init"] = m.init;
  j["trans"] = nlohmann::json::array();
  for (const auto& [from, to] : m.trans) j["trans"].push_back({from, to});
  return j;
}

std::string serialize_model(const KripkeModel& m) {
  std::ostringstream out;
  out << "atoms:";
  for (const auto& a : m.atoms) out << ' ' << a;
  out << '\n';
  for (const auto& [name, label] : m.labels) {
    out << "state " << name;
    if (!label.empty()) {
      out << " :";
      for (const auto& a : label) out << ' ' << a;
    }
    out << '\n';
  }
  out << "init:";
  for (const auto& s : m.init) out << ' ' << s;
  out << '\n';
  for (const auto& [from, to] : m.trans) out << "trans: " << from << " -> " << to << '\n';
  return out.str();
}

std::set<std::string> reachable_states(const KripkeModel& m, const std::string& from) {
  if (!has_state(m, from)) throw ModelError("unknown state '" + from + "'");
  std::set<std::string> seen = {from};
  std::vector<std::string> frontier = {from};
  while (!frontier.empty()) {
    std::string s = frontier.back();
    frontier.pop_back();
    auto it = m.trans.lower_bound({s, ""});
    for (; it != m.trans.end() && it->first == s; ++it) {
      if (seen.insert(it->second).second) frontier.push_back(it->second);
    }
  }
  seen.erase(kDummyName);
  return seen;
}

std::set<std::string> reachable_states(const PointedModel& pm) {
  return reachable_states(pm.model, pm.start);
}

KripkeModel with_dummy(const KripkeModel& m) {
  if (has_dummy(m)) throw ModelError("model already has a dummy state");
  KripkeModel out = m;
  out.labels[kDummyName] = {};
  for (const auto& s : m.init) out.trans.insert({kDummyName, s});
  return out;
}

KripkeModel strip_dummy(const KripkeModel& m) {
  if (!has_dummy(m)) return m;
  KripkeModel out = m;
  std::set<std::string> new_init;
  for (auto it = out.trans.begin(); it != out.trans.end();) {
    if (it->first == kDummyName) {
      new_init.insert(it->second);
      it = out.trans.erase(it);
    } else if (it->second == kDummyName) {
      it = out.trans.erase(it);
    } else {
      ++it;
    }
  }
  out.labels.erase(kDummyName);
  if (!new_init.empty()) out.init = std::move(new_init);
  return out;
}

std::set<std::string> successors(const KripkeModel& m, const std::string& s) {
  if (!has_state(m, s)) throw ModelError("unknown state '" + s + "'");
  std::set<std::string> out;
  auto it = m.trans.lower_bound({s, ""});
  for (; it != m.trans.end() && it->first == s; ++it) out.insert(it->second);
  return out;
}

std::set<std::string> predecessors(const KripkeModel& m, const std::string& s) {
  if (!has_state(m, s)) throw ModelError("unknown state '" + s + "'");
  std::set<std::string> out;
  for (const auto& [from, to] : m.trans) {
    if (to == s) out.insert(from);
  }
  return out;
}

namespace {

std::string dot_label(const std::string& name, const std::set<std::string>& atoms) {
  std::string text = name + "\\n{";
  bool first = true;
  for (const auto& a : atoms) {
    if (!first) text += ",";
    text += a;
    first = false;
  }
  return text + "}";
}

}  // namespace

std::string export_dot(const KripkeModel& m, const DiffVector* highlight) {
  std::ostringstream out;
  out << "digraph kripke {\n  rankdir=LR;\n  node [shape=ellipse];\n";
  for (const auto& [name, label] : m.labels) {
    if (name == kDummyName) continue;
    out << "  \"" << name << "\" [label=\"" << dot_label(name, label) << "\"";
    if (m.init.count(name)) out << ", peripheries=2";
    if (highlight) {
      if (highlight->added_states.count(name))
        out << ", color=forestgreen, penwidth=2";
      else if (highlight->relabeled_states.count(name))
        out << ", style=filled, fillcolor=lightgoldenrod";
    }
    out << "];\n";
  }
  if (highlight) {
    for (const auto& name : highlight->removed_states) {
      if (name == kDummyName || has_state(m, name)) continue;
      out << "  \"" << name << "\" [label=\"" << name
          << "\", style=dashed, color=crimson, fontcolor=crimson];\n";
    }
  }
  for (const auto& [from, to] : m.trans) {
    if (from == kDummyName || to == kDummyName) continue;
    out << "  \"" << from << "\" -> \"" << to << "\"";
    if (highlight && highlight->added_edges.count({from, to}))
      out << " [color=forestgreen, penwidth=2]";
    out << ";\n";
  }
  if (highlight) {
    for (const auto& [from, to] : highlight->removed_edges) {
      if (from == kDummyName || to == kDummyName) continue;
      out << "  \"" << from << "\" -> \"" << to << "\" [style=dashed, color=crimson];\n";
    }
  }
  out << "}\n";
  return out.str();
}

std::string canonical_key(const KripkeModel& m) { return model_to_json(m).dump(); }

std::uint64_t model_hash(const KripkeModel& m) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : canonical_key(m)) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace ctlrepair
