#pragma once
// Command-line surface: `check`, `update`, `diff`, and `export` subcommands
// tying parsing, checking, repair, diffing, and DOT export together, plus a
// hidden `oracle` subcommand exposing the brute-force reference search for
// debugging.
//
// Exit codes are a total function of the outcome class:
//   0  the goal is already satisfied (or the command simply succeeded)
//   1  the goal is violated (`check`) / repairs were produced (`update`)
//   2  input error: unreadable file, parse failure, bad flags
//   3  the goal is unsatisfiable (no model of bounded size satisfies it)
//   4  search budget exhausted without producing a candidate

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace ctlrepair {

// Summary of one `update` invocation. Candidate counts never increase across
// filter stages. Timings are the only run-dependent field; every other byte
// of the report is a deterministic function of the inputs and flags.
struct RunReport {
  std::string verdict;  // satisfied | repaired | unsatisfiable | budget-exhausted
  std::size_t generated = 0;
  std::size_t admissible = 0;
  std::optional<std::size_t> committed;
  std::map<std::string, double> timing_ms;
  std::vector<std::string> written;
};

nlohmann::json report_to_json(const RunReport& r);

// Runs one invocation; `args` excludes the program name. Normal output goes
// to `out`, diagnostics and timings to `err`. Returns the exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ctlrepair
