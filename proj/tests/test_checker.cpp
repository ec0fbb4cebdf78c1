#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <fstream>
#include <sstream>

#include "ctlrepair/checker.hpp"
#include "ctlrepair/formula.hpp"
#include "ctlrepair/kripke.hpp"

using namespace ctlrepair;

namespace {

KripkeModel load(const std::string& name) {
  std::ifstream in(std::string(CTLREPAIR_FIXTURE_DIR) + "/" + name);
  REQUIRE_MESSAGE(in.good(), "missing fixture ", name);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

FormulaPtr P(const std::string& text) { return parse_formula(text); }

bool holds(const KripkeModel& m, const std::string& s, const std::string& f) {
  return check(m, s, P(f));
}

std::string lasso_head(const Lasso& l) { return l.stem.empty() ? l.loop[0] : l.stem[0]; }

// Structural validity: consecutive pairs, stem->loop junction, and the loop
// back edge are all transitions.
void check_lasso_wellformed(const KripkeModel& m, const Lasso& l) {
  REQUIRE(!l.loop.empty());
  std::vector<std::string> seq = l.stem;
  seq.insert(seq.end(), l.loop.begin(), l.loop.end());
  for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
    CAPTURE(seq[i]);
    CAPTURE(seq[i + 1]);
    CHECK(m.trans.count({seq[i], seq[i + 1]}) == 1);
  }
  CHECK(m.trans.count({l.loop.back(), l.loop.front()}) == 1);
}

}  // namespace

TEST_CASE("propositional evaluation against a label") {
  std::set<std::string> label{"p", "q"};
  CHECK(label_satisfies(label, P("p & q")));
  CHECK_FALSE(label_satisfies(label, P("r")));
  CHECK(label_satisfies(label, P("r -> p")));
  CHECK(label_satisfies(label, P("!r")));
  CHECK(label_satisfies(label, P("true")));
  CHECK_FALSE(label_satisfies(label, P("false")));
  CHECK_THROWS_AS(label_satisfies(label, P("AG p")), CheckError);
}

TEST_CASE("hand-evaluated formulas on the three-state example") {
  KripkeModel m = load("example1.txt");

  CHECK_FALSE(holds(m, "s0", "AG p"));
  CHECK(holds(m, "s0", "EG p"));  // loop on s0 forever
  CHECK_FALSE(holds(m, "s0", "AG q"));
  CHECK(holds(m, "s0", "AG (q | r)"));
  CHECK(holds(m, "s0", "EF r"));
  CHECK(holds(m, "s0", "AF q"));
  CHECK_FALSE(holds(m, "s0", "AF r"));  // the s0 self-loop never reaches r
  CHECK(holds(m, "s0", "E[p U r]"));
  CHECK_FALSE(holds(m, "s0", "A[p U r]"));
  CHECK(holds(m, "s0", "AX (q | r)"));
  CHECK_FALSE(holds(m, "s0", "AX r"));
  CHECK(holds(m, "s0", "EX r"));
  CHECK(holds(m, "s1", "AG (q & r)"));
  CHECK(holds(m, "s2", "AG r"));               // both s2 and s1 carry r
  CHECK_FALSE(holds(m, "s2", "A[r U q]"));     // the s2 self-loop never reaches q
  CHECK(holds(m, "s2", "E[r U q]"));

  PointedModel pm{m, "s0"};
  CHECK(check(pm, P("EF r")));
  CHECK_THROWS_AS(check(m, "nope", P("p")), CheckError);
}

TEST_CASE("unknown atoms are false everywhere") {
  KripkeModel m = load("example1.txt");
  CHECK(sat_states(m, P("mystery")).empty());
  CHECK(holds(m, "s0", "AG !mystery"));
  CHECK_FALSE(holds(m, "s0", "EF mystery"));
}

TEST_CASE("oven violates the no-false-start property and the repairs restore it") {
  KripkeModel oven = load("microwave.txt");
  FormulaPtr prop = P("!EF(Start & EG !Heat)");

  CHECK(sat_states(oven, P("EG !Heat")) ==
        std::set<std::string>{"s1", "s2", "s3", "s5"});
  CHECK(sat_states(oven, P("Start & EG !Heat")) == std::set<std::string>{"s2", "s5"});
  CHECK_FALSE(check(oven, "s1", prop));

  CHECK(check(load("microwave_fig12.txt"), "s1", prop));
  CHECK(check(load("microwave_fig13.txt"), "s1", prop));

  SatLabeling lab = sat_set(oven, prop);
  CHECK(lab.root == sat_states(oven, prop));
  CHECK(lab.by_formula.at("EG !Heat") == std::set<std::string>{"s1", "s2", "s3", "s5"});
  CHECK(lab.by_formula.count("Start & EG !Heat") == 1);
}

TEST_CASE("constants and tautologies") {
  KripkeModel m = load("microwave.txt");
  std::set<std::string> all;
  for (const auto& [name, label] : m.labels) all.insert(name);
  CHECK(sat_states(m, P("Start | !Start")) == all);
  CHECK(sat_states(m, P("AG true")) == all);
  CHECK(sat_states(m, P("EF false")).empty());
  CHECK(sat_states(m, P("A[true U Heat]")) == sat_states(m, P("AF Heat")));
}

TEST_CASE("false_states lists reachable violations of AG psi") {
  KripkeModel afs1 = load("afs1.txt");
  KripkeModel wd = with_dummy(afs1);
  FormulaPtr goal = P("AG (Server.belief_valid -> Client.belief_valid)");
  CHECK(false_states(wd, kDummyName, goal) ==
        std::set<std::string>{"19", "20", "23", "24", "7", "8"});

  KripkeModel oven = load("microwave.txt");
  CHECK(false_states(oven, "s1", P("AG !Error")) == std::set<std::string>{"s2", "s5"});
  // Unreachable violations don't count.
  KripkeModel island = parse_model(
      "atoms: p\nstate a\nstate b : p\ninit: a\ntrans: a -> a\ntrans: b -> a\n");
  CHECK(false_states(island, "a", P("AG !p")).empty());
  CHECK(false_states(island, "b", P("AG !p")) == std::set<std::string>{"b"});

  CHECK_THROWS_AS(false_states(oven, "s1", P("EF Error")), CheckError);
  CHECK_THROWS_AS(false_states(oven, "s1", P("AG EX Error")), CheckError);
}

TEST_CASE("deadlocked states: the one maximal path is the singleton") {
  KripkeModel m = parse_model(
      "atoms: p q\n"
      "state a : p\n"
      "state b : p\n"
      "state c : q\n"
      "init: a\n"
      "trans: a -> b\n"
      "trans: a -> c\n"
      "trans: c -> c\n");
  // b is deadlocked.
  CHECK(holds(m, "b", "AX q"));       // vacuous: no successors
  CHECK(holds(m, "b", "AX false"));
  CHECK_FALSE(holds(m, "b", "EX true"));
  CHECK(holds(m, "b", "AG p"));
  CHECK(holds(m, "b", "EG p"));
  CHECK(holds(m, "b", "AF p"));
  CHECK(holds(m, "b", "EF p"));
  CHECK_FALSE(holds(m, "b", "AF q"));
  CHECK_FALSE(holds(m, "b", "E[p U q]"));
  CHECK(holds(m, "b", "A[q U p]"));
  // The finite path a -> b counts: AG p holds at a even though c fails p.
  CHECK_FALSE(holds(m, "a", "AG p"));  // a -> c -> c... falsifies
  CHECK(holds(m, "a", "EG p"));        // a -> b is maximal and all-p
  CHECK_FALSE(holds(m, "a", "AF q"));  // a -> b never reaches q
  CHECK(holds(m, "a", "EF q"));
}

TEST_CASE("dualities hold on serial and non-serial models alike") {
  const char* duals[][2] = {
      {"AG %", "!EF !%"},
      {"AF %", "!EG !%"},
      {"AX %", "!EX !%"},
      {"EG %", "!AF !%"},
  };
  auto instantiate = [](std::string tpl, const std::string& g) {
    for (std::size_t at = tpl.find('%'); at != std::string::npos; at = tpl.find('%'))
      tpl.replace(at, 1, "(" + g + ")");
    return tpl;
  };
  KripkeModel serial = load("example1.txt");
  KripkeModel dead = parse_model(
      "atoms: p q\nstate a : p\nstate b : p\nstate c : q\ninit: a\n"
      "trans: a -> b\ntrans: a -> c\ntrans: c -> a\n");
  for (const KripkeModel* m : {&serial, &dead}) {
    for (const auto& g : {"p", "q", "p & !q", "EF q"}) {
      for (const auto& pair : duals) {
        FormulaPtr lhs = P(instantiate(pair[0], g));
        FormulaPtr rhs = P(instantiate(pair[1], g));
        CHECK(sat_states(*m, lhs) == sat_states(*m, rhs));
      }
      // A[f U g] against its release-style expansion.
      std::string f = "p";
      FormulaPtr au = P("A[" + f + " U " + std::string(g) + "]");
      FormulaPtr expanded = P("!(E[!(" + std::string(g) + ") U (!(" + f + ") & !(" +
                              std::string(g) + "))] | EG !(" + std::string(g) + "))");
      CHECK(sat_states(*m, au) == sat_states(*m, expanded));
    }
  }
}

TEST_CASE("checking commutes with normalization") {
  const char* formulas[] = {
      "AG p", "AF q", "A[p U r]", "E[!q U (p -> r)]", "AX (p & q)", "EG !p",
      "!EF(p & EG !q)", "A[q U A[r U p]]", "EF EG p", "AG (p -> EF q)",
  };
  for (const char* fixture : {"example1.txt", "figure10.txt", "figure8_m.txt"}) {
    KripkeModel m = load(fixture);
    for (const char* text : formulas) {
      FormulaPtr f = P(text);
      FormulaPtr n = normalize(f);
      for (const auto& [state, label] : m.labels) {
        CAPTURE(fixture);
        CAPTURE(text);
        CAPTURE(state);
        CHECK(check(m, state, f) == check(m, state, n));
      }
    }
  }
}

TEST_CASE("witnesses for next-step formulas are states") {
  KripkeModel m = load("figure10.txt");
  PointedModel pm{m, "s0"};

  CHECK_FALSE(check(pm, P("EX (p & q)")));
  WitnessReport rep = find_witness(pm, P("EX (p & q)"));
  REQUIRE(rep.entries.size() == 1);
  CHECK(rep.entries[0].is_state_form);
  CHECK(rep.entries[0].valid_states == std::set<std::string>{"s3"});
  CHECK(rep.entries[0].has_witness());
  CHECK(rep.complete());

  WitnessReport ax = find_witness(pm, P("AX q"));
  REQUIRE(ax.entries.size() == 1);
  CHECK(ax.entries[0].valid_states == std::set<std::string>{"s1"});

  // No state satisfies p & r anywhere: no witness, report incomplete.
  KripkeModel ex1 = load("example1.txt");
  WitnessReport none = find_witness({ex1, "s0"}, P("EX (p & r)"));
  CHECK_FALSE(none.entries[0].has_witness());
  CHECK_FALSE(none.complete());

  CHECK_THROWS_AS(find_witness(pm, P("AG EX p")), CheckError);
  CHECK_THROWS_AS(find_witness(pm, P("p")), CheckError);
}

TEST_CASE("witnesses for path formulas are well-formed lassos") {
  KripkeModel oven = load("microwave.txt");
  PointedModel pm{oven, "s1"};

  WitnessReport ag = find_witness(pm, P("AG !Error"));
  REQUIRE(ag.entries.size() == 1);
  CHECK_FALSE(ag.entries[0].is_state_form);
  CHECK(ag.entries[0].has_witness());
  for (const Lasso& l : ag.entries[0].valid_paths) {
    check_lasso_wellformed(oven, l);
    CHECK(lasso_head(l) == "s1");  // universal-path witnesses start at s0
    std::vector<std::string> seq = l.stem;
    seq.insert(seq.end(), l.loop.begin(), l.loop.end());
    for (const auto& s : seq) CHECK(label_satisfies(oven.labels.at(s), P("!Error")));
  }

  // EG needs the start label itself to pass, and its paths start elsewhere.
  WitnessReport eg = find_witness(pm, P("EG !Start"));
  CHECK(eg.entries[0].has_witness());
  for (const Lasso& l : eg.entries[0].valid_paths) {
    check_lasso_wellformed(oven, l);
    CHECK(lasso_head(l) != "s1");
  }
  CHECK_FALSE(find_witness(pm, P("EG Close")).entries[0].has_witness());  // s1 lacks Close

  WitnessReport af = find_witness(pm, P("AF Heat"));
  CHECK(af.entries[0].has_witness());
  for (const Lasso& l : af.entries[0].valid_paths) {
    std::set<std::string> later(l.loop.begin(), l.loop.end());
    for (std::size_t i = 1; i < l.stem.size(); ++i) later.insert(l.stem[i]);
    bool hit = false;
    for (const auto& s : later) hit = hit || oven.labels.at(s).count("Heat");
    CHECK(hit);
  }

  WitnessReport au = find_witness(pm, P("A[!Heat U Start]"));
  CHECK(au.entries[0].has_witness());
  for (const Lasso& l : au.entries[0].valid_paths) {
    std::vector<std::string> seq = l.stem;
    seq.insert(seq.end(), l.loop.begin(), l.loop.end());
    bool ok = false;
    for (std::size_t t = 0; t < seq.size() && !ok; ++t) {
      if (!oven.labels.at(seq[t]).count("Start")) continue;
      ok = true;
      for (std::size_t u = 0; u < t; ++u) ok = ok && !oven.labels.at(seq[u]).count("Heat");
    }
    CHECK(ok);
  }

  // Composite AEClass formula: one entry per conjunct, in order.
  WitnessReport both = find_witness(pm, P("AG !Error & EX Close"));
  REQUIRE(both.entries.size() == 2);
  CHECK_FALSE(both.entries[0].is_state_form);
  CHECK(both.entries[1].is_state_form);
  CHECK(both.complete());
}

TEST_CASE("every formula witnessed by an EG lasso really holds after wiring it in") {
  KripkeModel oven = load("microwave.txt");
  PointedModel pm{oven, "s1"};
  WitnessReport eg = find_witness(pm, P("EG !Start"));
  REQUIRE(eg.entries[0].has_witness());
  for (const Lasso& l : eg.entries[0].valid_paths) {
    KripkeModel wired = oven;
    wired.trans.insert({"s1", lasso_head(l)});
    CHECK(check(wired, "s1", P("EG !Start")));
  }
}

TEST_CASE("witness extraction scales past the exhaustive regime") {
  KripkeModel afs1 = load("afs1.txt");
  PointedModel pm{afs1, "11"};

  WitnessReport ag = find_witness(pm, P("AG !Server.belief_valid"), 8);
  REQUIRE(ag.entries.size() == 1);
  CHECK(ag.entries[0].has_witness());
  CHECK(ag.entries[0].valid_paths.size() <= 8);
  for (const Lasso& l : ag.entries[0].valid_paths) {
    check_lasso_wellformed(afs1, l);
    CHECK(lasso_head(l) == "11");
    std::vector<std::string> seq = l.stem;
    seq.insert(seq.end(), l.loop.begin(), l.loop.end());
    for (const auto& s : seq) CHECK_FALSE(afs1.labels.at(s).count("Server.belief_valid"));
  }

  WitnessReport ef = find_witness(pm, P("EF Server.belief_valid"), 4);
  CHECK(ef.entries[0].has_witness());
  CHECK(ef.entries[0].valid_paths.size() <= 4);
  for (const Lasso& l : ef.entries[0].valid_paths) {
    check_lasso_wellformed(afs1, l);
    CHECK(lasso_head(l) != "11");
  }
}

TEST_CASE("dead-end-only witnesses are not reported as lassos") {
  // The only all-p path from a is the finite a -> b; no lasso exists.
  KripkeModel m = parse_model(
      "atoms: p q\n"
      "state a : p\n"
      "state b : p\n"
      "state c : q\n"
      "init: a\n"
      "trans: a -> b\n"
      "trans: a -> c\n"
      "trans: c -> c\n");
  CHECK(check(m, "a", P("EG p")));  // true via the maximal finite path
  WitnessReport eg = find_witness({m, "a"}, P("EG p"));
  CHECK_FALSE(eg.entries[0].has_witness());
  // From c every lasso stays in c, which fails p.
  WitnessReport ag = find_witness({m, "c"}, P("AG p"));
  CHECK_FALSE(ag.entries[0].has_witness());
}
