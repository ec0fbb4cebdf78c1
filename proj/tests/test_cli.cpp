// Tests for the command-line surface: subcommand verdicts and exit codes,
// offending-state reporting, candidate documents and their files, the
// unsatisfiable/budget distinction, determinism of the output bytes, and the
// hidden brute-force subcommand.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ctlrepair/checker.hpp"
#include "ctlrepair/cli.hpp"
#include "ctlrepair/kripke.hpp"

using namespace ctlrepair;

namespace {

struct RunResult {
  int code;
  std::string out;
  std::string err;
};

RunResult run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string fixture(const std::string& name) {
  return std::string(CTLREPAIR_FIXTURE_DIR) + "/" + name;
}

std::filesystem::path scratch_dir() {
  auto dir = std::filesystem::temp_directory_path() / "ctlrepair_cli_tests";
  std::filesystem::create_directories(dir);
  return dir;
}

std::string write_scratch(const std::string& name, const std::string& content) {
  auto path = scratch_dir() / name;
  std::ofstream(path) << content;
  return path.string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// The stdout of `update` is a few report lines followed by one JSON document.
nlohmann::json document_of(const std::string& out) {
  auto pos = out.find('{');
  REQUIRE(pos != std::string::npos);
  return nlohmann::json::parse(out.substr(pos));
}

bool doc_contains_model(const nlohmann::json& doc, const KripkeModel& m) {
  std::string key = canonical_key(m);
  for (const auto& c : doc.at("candidates")) {
    if (canonical_key(model_from_json(c.at("model"))) == key) return true;
  }
  return false;
}

const char* kOvenGoal = "!EF (Start & EG !Heat)";

}  // namespace

TEST_CASE("check reports satisfaction, violations, and offending states") {
  SUBCASE("violated invariant with the offending pair") {
    RunResult r = run({"check", fixture("microwave.txt"), kOvenGoal});
    CHECK(r.code == 1);
    CHECK(r.out.find("verdict: violated at s1") != std::string::npos);
    CHECK(r.out.find("offending: s2 s5") != std::string::npos);
  }

  SUBCASE("invariant goals name the failing states directly") {
    RunResult r = run({"check", fixture("example1.txt"), "AG p"});
    CHECK(r.code == 1);
    CHECK(r.out.find("offending: s1 s2") != std::string::npos);
  }

  SUBCASE("satisfied goals exit cleanly") {
    RunResult r = run({"check", fixture("example1.txt"), "EX p"});
    CHECK(r.code == 0);
    CHECK(r.out.find("verdict: satisfied") != std::string::npos);
  }

  SUBCASE("input problems exit 2") {
    CHECK(run({"check", fixture("no_such_file.txt"), "p"}).code == 2);
    CHECK(run({"check", fixture("example1.txt"), "AG ("}).code == 2);
    CHECK(run({"check", fixture("example1.txt")}).code == 2);  // no formula
    CHECK(run({"frobnicate"}).code == 2);
  }
}

TEST_CASE("update repairs the oven and documents every candidate") {
  RunResult r = run({"update", fixture("microwave.txt"), kOvenGoal});
  REQUIRE(r.code == 1);
  CHECK(r.out.find("verdict: repaired") != std::string::npos);

  nlohmann::json doc = document_of(r.out);
  CHECK(doc.at("formula").get<std::string>().find("EF") != std::string::npos);
  CHECK(doc.at("base_model_hash").get<std::string>().substr(0, 2) == "0x");
  REQUIRE(doc.at("candidates").size() >= 2);

  std::ifstream fig12(fixture("microwave_fig12.txt")), fig13(fixture("microwave_fig13.txt"));
  std::ostringstream b12, b13;
  b12 << fig12.rdbuf();
  b13 << fig13.rdbuf();
  CHECK(doc_contains_model(doc, parse_model(b12.str())));
  CHECK(doc_contains_model(doc, parse_model(b13.str())));

  // Every emitted candidate re-checks against the goal.
  FormulaPtr goal = parse_formula(kOvenGoal);
  for (const auto& c : doc.at("candidates")) {
    KripkeModel m = model_from_json(c.at("model"));
    CHECK(check(m, "s1", goal));
    CHECK(c.contains("trace"));
    CHECK(c.contains("diff"));
    CHECK(c.contains("unchanged_reachable"));
    CHECK(c.contains("admissible"));
    CHECK(c.contains("committed"));
  }
}

TEST_CASE("update separates satisfied, unsatisfiable, and budget outcomes") {
  SUBCASE("already satisfied") {
    RunResult r = run({"update", fixture("example1.txt"), "EX p"});
    CHECK(r.code == 0);
    CHECK(r.out.find("verdict: satisfied") != std::string::npos);
    CHECK(r.out.find("candidates") == std::string::npos);  // zero repairs
  }

  SUBCASE("no model of any shape satisfies the goal") {
    std::string tiny = write_scratch("tiny.txt",
                                     "atoms: p\n"
                                     "state s : p\n"
                                     "init: s\n"
                                     "trans: s -> s\n");
    RunResult r = run({"update", tiny, "AG (p & !p)"});
    CHECK(r.code == 3);
    CHECK(r.out.find("verdict: unsatisfiable") != std::string::npos);
  }

  SUBCASE("satisfiable goal out of the model's reach exhausts the budget") {
    std::string stuck = write_scratch("stuck.txt",
                                      "atoms: q\n"
                                      "state s : q\n"
                                      "init: s\n"
                                      "trans: s -> s\n");
    // p is not in the model's universe, so no edit sequence can introduce it,
    // yet small models satisfying EX p exist.
    RunResult r = run({"update", stuck, "EX p"});
    CHECK(r.code == 4);
    CHECK(r.out.find("verdict: budget exhausted") != std::string::npos);
  }
}

TEST_CASE("update writes candidate files and an honest report") {
  auto out_dir = scratch_dir() / "oven_out";
  std::filesystem::remove_all(out_dir);
  std::string report_path = (scratch_dir() / "report.json").string();

  RunResult r = run({"update", fixture("microwave.txt"), kOvenGoal, "--out", out_dir.string(),
                     "--report-json", report_path});
  REQUIRE(r.code == 1);

  nlohmann::json report = nlohmann::json::parse(slurp(report_path));
  CHECK(report.at("verdict") == "repaired");
  std::size_t generated = report.at("generated").get<std::size_t>();
  std::size_t admissible = report.at("admissible").get<std::size_t>();
  CHECK(generated >= admissible);
  CHECK(admissible >= 1);

  auto written = report.at("written");
  REQUIRE(written.size() == generated);
  for (const auto& path : written) {
    REQUIRE(std::filesystem::exists(path.get<std::string>()));
  }

  nlohmann::json first = nlohmann::json::parse(slurp(written[0].get<std::string>()));
  CHECK(first.contains("formula"));
  CHECK(first.contains("base_model_hash"));
  CHECK(first.contains("model"));
  CHECK(first.contains("trace"));
  CHECK(first.contains("diff"));

  SUBCASE("committed narrows the survivors") {
    auto committed_dir = scratch_dir() / "oven_committed";
    std::filesystem::remove_all(committed_dir);
    RunResult rc = run({"update", fixture("microwave.txt"), kOvenGoal, "--committed", "--out",
                        committed_dir.string(), "--report-json", report_path});
    REQUIRE(rc.code == 1);
    nlohmann::json creport = nlohmann::json::parse(slurp(report_path));
    std::size_t committed = creport.at("committed").get<std::size_t>();
    CHECK(committed >= 1);
    CHECK(committed <= creport.at("admissible").get<std::size_t>());
    CHECK(creport.at("written").size() == committed);
  }

  SUBCASE("dot format renders one graph per survivor") {
    auto dot_dir = scratch_dir() / "oven_dot";
    std::filesystem::remove_all(dot_dir);
    RunResult rd = run({"update", fixture("microwave.txt"), kOvenGoal, "--out", dot_dir.string(),
                        "--format", "dot"});
    REQUIRE(rd.code == 1);
    bool found = false;
    for (const auto& entry : std::filesystem::directory_iterator(dot_dir)) {
      CHECK(entry.path().extension() == ".dot");
      CHECK(slurp(entry.path().string()).find("digraph") != std::string::npos);
      found = true;
    }
    CHECK(found);
  }
}

TEST_CASE("constraints restrict which repairs survive") {
  std::string keep_heat = write_scratch("constraints.txt", "EF Heat\n# comment line\n\n");
  RunResult r = run({"update", fixture("microwave.txt"), kOvenGoal, "--constraints", keep_heat});
  REQUIRE(r.code == 1);
  FormulaPtr side = parse_formula("EF Heat");
  nlohmann::json doc = document_of(r.out);
  for (const auto& c : doc.at("candidates")) {
    CHECK(check(model_from_json(c.at("model")), "s1", side));
  }

  // An impossible side condition leaves the satisfiable goal unrepairable.
  std::string impossible = write_scratch("impossible.txt", "false\n");
  RunResult blocked =
      run({"update", fixture("microwave.txt"), kOvenGoal, "--constraints", impossible});
  CHECK(blocked.code == 4);
  CHECK(blocked.out.find("budget exhausted") != std::string::npos);
}

TEST_CASE("identical invocations produce identical bytes") {
  std::vector<std::string> args{"update", fixture("microwave.txt"), kOvenGoal};
  RunResult a = run(args);
  RunResult b = run(args);
  CHECK(a.code == b.code);
  CHECK(a.out == b.out);

  RunResult c1 = run({"check", fixture("afs1.txt"), "AG !Server.belief_valid"});
  RunResult c2 = run({"check", fixture("afs1.txt"), "AG !Server.belief_valid"});
  CHECK(c1.out == c2.out);

  // Reports match except for the timing field.
  std::string r1 = (scratch_dir() / "r1.json").string();
  std::string r2 = (scratch_dir() / "r2.json").string();
  run({"update", fixture("example1.txt"), "AG p", "--report-json", r1});
  run({"update", fixture("example1.txt"), "AG p", "--report-json", r2});
  nlohmann::json j1 = nlohmann::json::parse(slurp(r1));
  nlohmann::json j2 = nlohmann::json::parse(slurp(r2));
  j1.erase("timing_ms");
  j2.erase("timing_ms");
  CHECK(j1 == j2);
}

TEST_CASE("diff and export wrap the model tooling") {
  SUBCASE("diff prints the five change sets") {
    RunResult r = run({"diff", fixture("figure8_m.txt"), fixture("figure8_m1.txt")});
    REQUIRE(r.code == 0);
    nlohmann::json j = nlohmann::json::parse(r.out);
    CHECK(j.at("added_edges") == nlohmann::json::array({{"s0", "s2"}}));
    CHECK(j.at("removed_edges").empty());
    CHECK(j.at("relabeled").empty());
  }

  SUBCASE("self-diff is empty") {
    RunResult r = run({"diff", fixture("example1.txt"), fixture("example1.txt")});
    REQUIRE(r.code == 0);
    nlohmann::json j = nlohmann::json::parse(r.out);
    CHECK(j.at("added_edges").empty());
    CHECK(j.at("removed_edges").empty());
    CHECK(j.at("added_states").empty());
    CHECK(j.at("removed_states").empty());
  }

  SUBCASE("export renders DOT, optionally highlighting a diff") {
    RunResult plain = run({"export", fixture("microwave.txt")});
    REQUIRE(plain.code == 0);
    CHECK(plain.out.rfind("digraph", 0) == 0);

    RunResult marked =
        run({"export", fixture("microwave_fig12.txt"), "--diff", fixture("microwave.txt")});
    REQUIRE(marked.code == 0);
    CHECK(marked.out.find("dashed") != std::string::npos);  // the removed edge
  }

  SUBCASE("input problems exit 2") {
    CHECK(run({"diff", fixture("example1.txt"), "missing.txt"}).code == 2);
    CHECK(run({"export", "missing.txt"}).code == 2);
  }
}

TEST_CASE("formulas load from files and models from JSON") {
  std::string goal_file = write_scratch("goal.txt", "AG p");
  RunResult from_file = run({"check", fixture("example1.txt"), "--formula-file", goal_file});
  RunResult inline_arg = run({"check", fixture("example1.txt"), "AG p"});
  CHECK(from_file.code == 1);
  CHECK(from_file.out == inline_arg.out);

  RunResult json_model = run({"check", fixture("example1.json"), "AG p"});
  CHECK(json_model.code == 1);
  CHECK(json_model.out == inline_arg.out);
}

TEST_CASE("the hidden brute-force subcommand enumerates and searches") {
  RunResult help = run({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("update") != std::string::npos);
  CHECK(help.out.find("oracle") == std::string::npos);  // hidden

  RunResult stream = run({"oracle", fixture("example1.txt"), "--budget", "1"});
  REQUIRE(stream.code == 0);
  CHECK(stream.out.find("models: ") != std::string::npos);

  RunResult minimal = run({"oracle", fixture("example1.txt"), "AG p", "--budget", "2"});
  REQUIRE(minimal.code == 0);
  CHECK(minimal.out.find("verdict at s0: violated") != std::string::npos);
  CHECK(minimal.out.find("minimal: ") != std::string::npos);
  CHECK(minimal.out.find("---") != std::string::npos);

  // Guards surface as input errors.
  CHECK(run({"oracle", fixture("microwave.txt"), "--budget", "1"}).code == 2);
}
