#include "ctlrepair/cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"

#include "ctlrepair/checker.hpp"
#include "ctlrepair/diff.hpp"
#include "ctlrepair/formula.hpp"
#include "ctlrepair/kripke.hpp"
#include "ctlrepair/oracle.hpp"
#include "ctlrepair/update.hpp"

namespace ctlrepair {

namespace {

// Exit codes (see cli.hpp): 0 satisfied, 1 violated/repaired, 2 input error,
// 3 unsatisfiable, 4 budget exhausted.
constexpr int kOk = 0;
constexpr int kViolated = 1;
constexpr int kInputError = 2;
constexpr int kUnsatisfiable = 3;
constexpr int kBudget = 4;

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Text or JSON by extension.
KripkeModel load_model(const std::string& path) {
  std::string text = read_file(path);
  try {
    if (path.size() >= 5 && path.substr(path.size() - 5) == ".json")
      return parse_model_json(text);
    return parse_model(text);
  } catch (const std::exception& e) {
    throw InputError(path + ": " + e.what());
  }
}

FormulaPtr load_formula(const std::string& text, const std::string& file) {
  std::string source = text;
  if (!file.empty()) source = read_file(file);
  if (source.empty()) throw InputError("no formula given (argument or --formula-file)");
  try {
    return parse_formula(source);
  } catch (const std::exception& e) {
    throw InputError(std::string("formula: ") + e.what());
  }
}

std::vector<FormulaPtr> load_constraints(const std::string& path) {
  std::vector<FormulaPtr> out;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    std::string::size_type hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse_formula(line));
    } catch (const std::exception& e) {
      throw InputError(path + ": " + e.what());
    }
  }
  return out;
}

std::string hash_string(const KripkeModel& m) {
  std::ostringstream buf;
  buf << "0x" << std::hex << std::setw(16) << std::setfill('0') << model_hash(m);
  return buf.str();
}

std::string join(const std::set<std::string>& names) {
  std::string out;
  for (const auto& n : names) {
    if (!out.empty()) out += " ";
    out += n;
  }
  return out.empty() ? "(none)" : out;
}

std::set<std::string> init_reachable(const KripkeModel& m) {
  std::set<std::string> out;
  for (const auto& s : m.init) {
    for (const auto& t : reachable_states(m, s)) out.insert(t);
  }
  return out;
}

// ── Bounded satisfiability probe ────────────────────────────────────────────
//
// Is there any model with at most three states over the formula's atoms that
// satisfies f somewhere? States and state sets are bitmasks, so the sweep
// over every labeling and edge relation stays cheap. Returns nullopt when
// the formula has more than three atoms (out of probe range).

unsigned eval_mask(const FormulaPtr& f, const std::vector<unsigned>& atom_masks,
                   const std::map<std::string, std::size_t>& atom_index,
                   const std::vector<unsigned>& succ, unsigned all) {
  auto states_with_successor_in = [&](unsigned target) {
    unsigned out = 0;
    for (std::size_t i = 0; i < succ.size(); ++i) {
      if (succ[i] & target) out |= 1u << i;
    }
    return out;
  };
  auto states_with_all_successors_in = [&](unsigned target) {
    unsigned out = 0;
    for (std::size_t i = 0; i < succ.size(); ++i) {
      if ((succ[i] & ~target) == 0) out |= 1u << i;  // vacuous at deadlocks
    }
    return out;
  };
  auto deadlocks = [&] {
    unsigned out = 0;
    for (std::size_t i = 0; i < succ.size(); ++i) {
      if (succ[i] == 0) out |= 1u << i;
    }
    return out;
  };
  auto rec = [&](const FormulaPtr& g) {
    return eval_mask(g, atom_masks, atom_index, succ, all);
  };

  switch (f->op) {
    case Op::True:
      return all;
    case Op::False:
      return 0;
    case Op::Atom: {
      auto it = atom_index.find(f->atom);
      return it == atom_index.end() ? 0 : atom_masks[it->second];
    }
    case Op::Not:
      return all & ~rec(f->lhs);
    case Op::And:
      return rec(f->lhs) & rec(f->rhs);
    case Op::Or:
      return rec(f->lhs) | rec(f->rhs);
    case Op::Implies:
      return (all & ~rec(f->lhs)) | rec(f->rhs);
    case Op::EX:
      return states_with_successor_in(rec(f->lhs));
    case Op::AX:
      return states_with_all_successors_in(rec(f->lhs));
    case Op::EF: {
      unsigned g = rec(f->lhs), z = g;
      for (;;) {
        unsigned next = z | states_with_successor_in(z);
        if (next == z) return z;
        z = next;
      }
    }
    case Op::AF: {
      unsigned g = rec(f->lhs), z = g;
      for (;;) {
        unsigned next = z | (states_with_all_successors_in(z) & ~deadlocks());
        if (next == z) return z;
        z = next;
      }
    }
    case Op::EG: {
      unsigned g = rec(f->lhs), z = g;
      for (;;) {
        unsigned next = z & (states_with_successor_in(z) | deadlocks());
        if (next == z) return z;
        z = next;
      }
    }
    case Op::AG: {
      unsigned g = rec(f->lhs), z = g;
      for (;;) {
        unsigned next = z & states_with_all_successors_in(z);
        if (next == z) return z;
        z = next;
      }
    }
    case Op::EU: {
      unsigned f1 = rec(f->lhs), f2 = rec(f->rhs), z = f2;
      for (;;) {
        unsigned next = z | (f1 & states_with_successor_in(z));
        if (next == z) return z;
        z = next;
      }
    }
    case Op::AU: {
      unsigned f1 = rec(f->lhs), f2 = rec(f->rhs), z = f2;
      for (;;) {
        unsigned next = z | (f1 & states_with_all_successors_in(z) & ~deadlocks());
        if (next == z) return z;
        z = next;
      }
    }
  }
  return 0;  // unreachable
}

std::optional<bool> exists_bounded_model(const FormulaPtr& f) {
  std::vector<std::string> atoms;
  for (const auto& a : formula_atoms(f)) atoms.push_back(a);
  if (atoms.size() > 3) return std::nullopt;
  std::map<std::string, std::size_t> atom_index;
  for (std::size_t i = 0; i < atoms.size(); ++i) atom_index[atoms[i]] = i;

  for (unsigned n = 1; n <= 3; ++n) {
    unsigned all = (1u << n) - 1;
    std::vector<unsigned> atom_masks(atoms.size());
    // Each atom's extension ranges over all subsets of the n states.
    std::size_t label_configs = std::size_t{1} << (atoms.size() * n);
    for (std::size_t lc = 0; lc < label_configs; ++lc) {
      for (std::size_t i = 0; i < atoms.size(); ++i)
        atom_masks[i] = static_cast<unsigned>((lc >> (i * n)) & all);
      std::vector<unsigned> succ(n);
      std::size_t edge_configs = std::size_t{1} << (n * n);
      for (std::size_t ec = 0; ec < edge_configs; ++ec) {
        for (unsigned i = 0; i < n; ++i)
          succ[i] = static_cast<unsigned>((ec >> (i * n)) & all);
        if (eval_mask(f, atom_masks, atom_index, succ, all) != 0) return true;
      }
    }
  }
  return false;
}

// ── Subcommand: check ───────────────────────────────────────────────────────

int cmd_check(const std::string& model_path, const FormulaPtr& f, std::ostream& out) {
  KripkeModel m = load_model(model_path);
  SatLabeling sat = sat_set(m, f);

  out << "formula: " << print_formula(f) << "\n";
  out << "sat states (" << sat.root.size() << "/" << m.labels.size()
      << "): " << join(sat.root) << "\n";

  std::set<std::string> failing;
  for (const auto& s : m.init) {
    if (!sat.root.count(s)) failing.insert(s);
  }
  if (failing.empty()) {
    out << "verdict: satisfied\n";
    return kOk;
  }
  out << "verdict: violated at " << join(failing) << "\n";

  // For invariant-shaped goals, name the reachable states that break them:
  // AG psi -> reachable states where psi fails, !EF g -> reachable states
  // where g holds.
  std::optional<std::set<std::string>> offending;
  std::set<std::string> reach = init_reachable(m);
  if (f->op == Op::AG) {
    const std::set<std::string>& ok = sat_states(m, f->lhs);
    offending.emplace();
    for (const auto& s : reach) {
      if (!ok.count(s)) offending->insert(s);
    }
  } else if (f->op == Op::Not && f->lhs->op == Op::EF) {
    const std::set<std::string>& bad = sat_states(m, f->lhs->lhs);
    offending.emplace();
    for (const auto& s : reach) {
      if (bad.count(s)) offending->insert(s);
    }
  }
  if (offending) out << "offending: " << join(*offending) << "\n";
  return kViolated;
}

// ── Subcommand: update ──────────────────────────────────────────────────────

struct UpdateFlags {
  bool committed = false;
  bool enumerate_all = false;
  std::size_t max_candidates = 256;
  std::size_t max_new_states = 2;
  std::string constraints_file;
  std::string out_dir;
  std::string format = "json";
  std::string report_json;
};

nlohmann::json candidate_to_json(const UpdateCandidate& c) {
  return {{"model", model_to_json(c.model)},
          {"trace", trace_to_json(c.trace)},
          {"diff", diff_to_json(c.diff)},
          {"unchanged_reachable", c.unchanged_reachable},
          {"admissible", c.admissible},
          {"committed", c.committed}};
}

int cmd_update(const std::string& model_path, const FormulaPtr& f, const UpdateFlags& flags,
               std::ostream& out, std::ostream& err) {
  using clock = std::chrono::steady_clock;
  auto ms_since = [](clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(clock::now() - t0).count();
  };

  RunReport report;
  auto t0 = clock::now();
  KripkeModel m = load_model(model_path);
  UpdateConfig cfg;
  cfg.max_candidates =
      flags.enumerate_all ? std::numeric_limits<std::size_t>::max() : flags.max_candidates;
  cfg.max_new_states = flags.max_new_states;
  if (!flags.constraints_file.empty()) cfg.constraints = load_constraints(flags.constraints_file);
  report.timing_ms["parse"] = ms_since(t0);

  out << "formula: " << print_formula(f) << "\n";

  // Already satisfied everywhere: nothing to repair.
  t0 = clock::now();
  bool satisfied = true;
  for (const auto& s : m.init) {
    if (!check(m, s, f)) satisfied = false;
  }
  report.timing_ms["check"] = ms_since(t0);
  if (satisfied) {
    report.verdict = "satisfied";
    out << "verdict: satisfied (no changes needed)\n";
  } else {
    t0 = clock::now();
    UpdateResult r = update_model(m, f, cfg);
    report.timing_ms["search"] = ms_since(t0);

    // Every candidate is emitted with its admissibility flag — dominated
    // repairs are still informative — and --committed narrows the output to
    // the committed slice.
    t0 = clock::now();
    std::vector<const UpdateCandidate*> survivors;
    report.generated = r.candidates.size();
    for (const auto& c : r.candidates) {
      if (c.admissible) ++report.admissible;
      if (!flags.committed || c.committed) survivors.push_back(&c);
    }
    if (flags.committed) report.committed = survivors.size();
    report.timing_ms["filter"] = ms_since(t0);

    if (survivors.empty()) {
      // Distinguish a goal nothing can satisfy from a search that ran out of
      // room: probe for any small model of the formula.
      std::optional<bool> satisfiable = exists_bounded_model(f);
      if (satisfiable.has_value() && !*satisfiable) {
        report.verdict = "unsatisfiable";
        out << "verdict: unsatisfiable (no model with up to 3 states satisfies the goal)\n";
      } else {
        report.verdict = "budget-exhausted";
        out << "verdict: budget exhausted (the goal is satisfiable, but no candidate was "
               "found within the configured caps)\n";
      }
    } else {
      report.verdict = "repaired";
      out << "verdict: repaired\n";
    }

    out << "generated: " << report.generated << "\n";
    out << "admissible: " << report.admissible << "\n";
    if (report.committed) out << "committed: " << *report.committed << "\n";
    if (r.budget_exhausted)
      out << "note: the search hit a cap; the candidate set may be incomplete\n";

    // Candidate documents: one file per survivor under --out, otherwise a
    // single document on stdout.
    t0 = clock::now();
    if (!flags.out_dir.empty()) {
      std::filesystem::create_directories(flags.out_dir);
      std::size_t index = 0;
      for (const UpdateCandidate* c : survivors) {
        std::ostringstream name;
        name << "candidate_" << std::setw(3) << std::setfill('0') << ++index
             << (flags.format == "dot" ? ".dot" : ".json");
        std::filesystem::path path = std::filesystem::path(flags.out_dir) / name.str();
        std::ofstream file(path);
        if (flags.format == "dot") {
          file << export_dot(c->model, &c->diff);
        } else {
          nlohmann::json doc = candidate_to_json(*c);
          doc["formula"] = print_formula(f);
          doc["base_model_hash"] = hash_string(m);
          file << doc.dump(2) << "\n";
        }
        report.written.push_back(path.string());
        out << "wrote: " << path.string() << "\n";
      }
    } else if (!survivors.empty()) {
      if (flags.format == "dot") {
        for (const UpdateCandidate* c : survivors) out << export_dot(c->model, &c->diff);
      } else {
        nlohmann::json doc;
        doc["formula"] = print_formula(f);
        doc["base_model_hash"] = hash_string(m);
        doc["candidates"] = nlohmann::json::array();
        for (const UpdateCandidate* c : survivors) doc["candidates"].push_back(candidate_to_json(*c));
        out << doc.dump(2) << "\n";
      }
    }
    report.timing_ms["write"] = ms_since(t0);
  }

  if (!flags.report_json.empty()) {
    std::ofstream file(flags.report_json);
    if (!file) throw InputError("cannot write '" + flags.report_json + "'");
    file << report_to_json(report).dump(2) << "\n";
  }
  for (const auto& [phase, t] : report.timing_ms)
    err << "timing " << phase << ": " << std::fixed << std::setprecision(1) << t << " ms\n";

  if (report.verdict == "satisfied") return kOk;
  if (report.verdict == "repaired") return kViolated;
  if (report.verdict == "unsatisfiable") return kUnsatisfiable;
  return kBudget;
}

// ── Subcommands: diff, export, oracle ───────────────────────────────────────

int cmd_diff(const std::string& base_path, const std::string& other_path, std::ostream& out) {
  DiffVector d = compute_diff(load_model(base_path), load_model(other_path));
  out << diff_to_json(d).dump(2) << "\n";
  return kOk;
}

int cmd_export(const std::string& model_path, const std::string& base_path, std::ostream& out) {
  KripkeModel m = load_model(model_path);
  if (base_path.empty()) {
    out << export_dot(m);
  } else {
    DiffVector d = compute_diff(load_model(base_path), m);
    out << export_dot(m, &d);
  }
  return kOk;
}

int cmd_oracle(const std::string& model_path, const std::string& formula_text,
               std::size_t budget, std::size_t allow_new, std::string start, std::ostream& out) {
  KripkeModel m = load_model(model_path);
  EditBudget b{budget, allow_new, m.atoms};
  if (formula_text.empty()) {
    auto stream = enumerate_models(m, b);
    out << "models: " << stream.size() << "\n";
    for (const auto& em : stream) out << canonical_key(em) << "\n";
    return kOk;
  }
  FormulaPtr f = load_formula(formula_text, "");
  if (start.empty()) start = *m.init.begin();
  out << "verdict at " << start << ": "
      << (brute_force_check({m, start}, f) ? "satisfied" : "violated") << "\n";
  auto minimal = brute_force_admissible({m, start}, f, b);
  out << "minimal: " << minimal.size() << "\n";
  for (const auto& em : minimal) {
    out << "---\n" << serialize_model(em);
  }
  return kOk;
}

}  // namespace

nlohmann::json report_to_json(const RunReport& r) {
  nlohmann::json j;
  j["verdict"] = r.verdict;
  j["generated"] = r.generated;
  j["admissible"] = r.admissible;
  if (r.committed) j["committed"] = *r.committed;
  j["timing_ms"] = r.timing_ms;
  j["written"] = r.written;
  return j;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"CTL model checking and minimal-change model repair", "ctl-repair"};
  app.require_subcommand(1);

  std::string model_path, formula_text, formula_file;

  CLI::App* check_cmd = app.add_subcommand("check", "Check a formula against a model");
  check_cmd->add_option("model", model_path, "model document (text or JSON)")->required();
  check_cmd->add_option("formula", formula_text, "CTL formula");
  check_cmd->add_option("--formula-file", formula_file, "read the formula from a file");

  UpdateFlags flags;
  CLI::App* update_cmd =
      app.add_subcommand("update", "Repair a model until the formula holds");
  update_cmd->add_option("model", model_path, "model document (text or JSON)")->required();
  update_cmd->add_option("formula", formula_text, "CTL formula");
  update_cmd->add_option("--formula-file", formula_file, "read the formula from a file");
  update_cmd->add_flag("--committed", flags.committed,
                       "keep only candidates whose unchanged reachable set is maximal");
  update_cmd->add_option("--constraints", flags.constraints_file,
                         "file of extra formulas every candidate must satisfy");
  update_cmd->add_option("--max-candidates", flags.max_candidates,
                         "stop after this many candidates (default 256)");
  update_cmd->add_option("--max-new-states", flags.max_new_states,
                         "fresh states the repair may introduce (default 2)");
  update_cmd->add_flag("--enumerate-all", flags.enumerate_all,
                       "disable the candidate cap (fixture-scale runs)");
  update_cmd->add_option("--out", flags.out_dir, "write one candidate document per file here");
  update_cmd->add_option("--format", flags.format, "candidate document format (default json)")
      ->check(CLI::IsMember({"json", "dot"}));
  update_cmd->add_option("--report-json", flags.report_json, "also write the run report here");

  std::string other_path;
  CLI::App* diff_cmd = app.add_subcommand("diff", "Show the difference between two models");
  diff_cmd->add_option("base", model_path, "base model")->required();
  diff_cmd->add_option("other", other_path, "updated model")->required();

  std::string export_base;
  CLI::App* export_cmd = app.add_subcommand("export", "Render a model as DOT");
  export_cmd->add_option("model", model_path, "model document")->required();
  export_cmd->add_option("--diff", export_base, "highlight changes against this base model");

  std::size_t oracle_budget = 1, oracle_new = 0;
  std::string oracle_start;
  CLI::App* oracle_cmd =
      app.add_subcommand("oracle", "Brute-force reference search (debugging)");
  oracle_cmd->group("");  // hidden
  oracle_cmd->add_option("model", model_path, "model document")->required();
  oracle_cmd->add_option("formula", formula_text, "CTL formula");
  oracle_cmd->add_option("--budget", oracle_budget, "maximum number of edits");
  oracle_cmd->add_option("--allow-new", oracle_new, "fresh states the search may add");
  oracle_cmd->add_option("--start", oracle_start, "start state (default: first initial state)");

  try {
    std::vector<const char*> argv{"ctl-repair"};
    for (const auto& a : args) argv.push_back(a.c_str());
    app.parse(static_cast<int>(argv.size()), argv.data());

    if (*check_cmd) return cmd_check(model_path, load_formula(formula_text, formula_file), out);
    if (*update_cmd)
      return cmd_update(model_path, load_formula(formula_text, formula_file), flags, out, err);
    if (*diff_cmd) return cmd_diff(model_path, other_path, out);
    if (*export_cmd) return cmd_export(model_path, export_base, out);
    if (*oracle_cmd)
      return cmd_oracle(model_path, formula_text, oracle_budget, oracle_new, oracle_start, out);
    return kInputError;
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
}

}  // namespace ctlrepair
