#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ctlrepair/formula.hpp"

#include <string>
#include <vector>

using namespace ctlrepair;

namespace {

FormulaPtr P(const std::string& text) { return parse_formula(text); }

bool same(const std::string& a, const std::string& b) {
  return formula_equal(P(a), P(b));
}

}  // namespace

TEST_CASE("parse: basic productions") {
  auto f = P("AG p");
  REQUIRE(f->op == Op::AG);
  REQUIRE(f->lhs->op == Op::Atom);
  CHECK(f->lhs->atom == "p");

  auto u = P("E[p U q]");
  REQUIRE(u->op == Op::EU);
  CHECK(u->lhs->atom == "p");
  CHECK(u->rhs->atom == "q");

  CHECK(P("true")->op == Op::True);
  CHECK(P("false")->op == Op::False);
  CHECK(P("A[p U q]")->op == Op::AU);
}

TEST_CASE("parse: oven safety property structure") {
  auto f = P("!EF(Start & EG !Heat)");
  REQUIRE(f->op == Op::Not);
  REQUIRE(f->lhs->op == Op::EF);
  auto conj = f->lhs->lhs;
  REQUIRE(conj->op == Op::And);
  CHECK(conj->lhs->atom == "Start");
  REQUIRE(conj->rhs->op == Op::EG);
  REQUIRE(conj->rhs->lhs->op == Op::Not);
  CHECK(conj->rhs->lhs->lhs->atom == "Heat");
}

TEST_CASE("parse: precedence and associativity") {
  // unary > & > | > ->, with -> right-associative.
  auto f = P("p & q | r -> s");
  REQUIRE(f->op == Op::Implies);
  REQUIRE(f->lhs->op == Op::Or);
  CHECK(f->lhs->lhs->op == Op::And);
  CHECK(f->rhs->atom == "s");

  auto r = P("p -> q -> r");
  REQUIRE(r->op == Op::Implies);
  CHECK(r->lhs->atom == "p");
  CHECK(r->rhs->op == Op::Implies);

  CHECK(same("!p & q", "(!p) & q"));
  CHECK(same("AX p & q", "(AX p) & q"));
  CHECK(same("EF p | EG q", "(EF p) | (EG q)"));
  CHECK_FALSE(same("!p & q", "!(p & q)"));
}

TEST_CASE("parse: unicode aliases") {
  CHECK(same("\xC2\xACp", "!p"));
  CHECK(same("p \xE2\x88\xA7 q", "p & q"));
  CHECK(same("p \xE2\x88\xA8 q", "p | q"));
  CHECK(same("p \xE2\x86\x92 q", "p -> q"));
  CHECK(same("\xC2\xAC(p \xE2\x88\xA7 q) \xE2\x86\x92 r", "!(p & q) -> r"));
}

TEST_CASE("parse: identifiers and keyword boundaries") {
  CHECK(P("Server.belief_valid")->atom == "Server.belief_valid");
  // Maximal munch: no space means a single identifier, not an operator.
  CHECK(P("AGp")->op == Op::Atom);
  // A and E are ordinary atoms unless immediately followed by '['.
  CHECK(P("A")->op == Op::Atom);
  CHECK(P("E & A")->op == Op::And);
  CHECK(P("A [p U q]")->op == Op::AU);
  // Nested untils.
  auto f = P("A[E[p U q] U r]");
  REQUIRE(f->op == Op::AU);
  CHECK(f->lhs->op == Op::EU);
  CHECK(f->rhs->atom == "r");
  // Until operands take full formulas up to the top-level U.
  auto g = P("A[p -> q U r | s]");
  CHECK(g->lhs->op == Op::Implies);
  CHECK(g->rhs->op == Op::Or);
}

TEST_CASE("parse: errors carry positions") {
  CHECK_THROWS_AS(P(""), ParseError);
  CHECK_THROWS_AS(P("   "), ParseError);
  CHECK_THROWS_AS(P("p &"), ParseError);
  CHECK_THROWS_AS(P("(p"), ParseError);
  CHECK_THROWS_AS(P("A[p q]"), ParseError);
  CHECK_THROWS_AS(P("A[U q]"), ParseError);
  CHECK_THROWS_AS(P("p q"), ParseError);
  CHECK_THROWS_AS(P("U"), ParseError);
  CHECK_THROWS_AS(P("p @ q"), ParseError);
  try {
    P("p @ q");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.position == 2);
  }
}

TEST_CASE("factories validate atom names") {
  CHECK_THROWS_AS(f_atom(""), std::invalid_argument);
  CHECK_THROWS_AS(f_atom("a b"), std::invalid_argument);
  CHECK_THROWS_AS(f_unary(Op::And, f_true()), std::invalid_argument);
  CHECK_THROWS_AS(f_binary(Op::EX, f_true(), f_true()), std::invalid_argument);
}

TEST_CASE("print/parse round-trip") {
  const std::vector<std::string> corpus = {
      "p",
      "true",
      "false",
      "!p",
      "!!p",
      "p & q & r",
      "p & (q & r)",
      "(p | q) & r",
      "p | q & r",
      "p -> q -> r",
      "(p -> q) -> r",
      "AX p",
      "EX (p & q)",
      "AG (p -> q)",
      "EF (Start & EG !Heat)",
      "!EF(Start & EG !Heat)",
      "A[p U q]",
      "E[p & q U r | s]",
      "A[E[p U q] U EG r]",
      "E[true U !p]",
      "!(E[!q U (!p & !q)] | !AF q)",
      "AF AG p",
      "Server.belief_valid -> Client.belief_valid",
  };
  for (const auto& text : corpus) {
    CAPTURE(text);
    auto f = P(text);
    auto printed = print_formula(f);
    CAPTURE(printed);
    CHECK(formula_equal(P(printed), f));
  }
}

TEST_CASE("normalize: rewrite targets") {
  CHECK(formula_equal(normalize(P("AF p")), P("AF p")));
  CHECK(formula_equal(normalize(P("AG p")), P("!E[true U !p]")));
  CHECK(formula_equal(normalize(P("AX p")), P("!EX !p")));
  CHECK(formula_equal(normalize(P("EF p")), P("E[true U p]")));
  CHECK(formula_equal(normalize(P("EG !p")), P("!AF p")));
  CHECK(formula_equal(normalize(P("EG p")), P("!AF !p")));
  CHECK(formula_equal(normalize(P("p -> q")), P("!p | q")));
  CHECK(formula_equal(normalize(P("!!p")), P("p")));
  CHECK(formula_equal(normalize(P("!!!p")), P("!p")));
  CHECK(formula_equal(normalize(P("A[p U q]")),
                      P("!(E[!q U (!p & !q)] | !AF q)")));
}

TEST_CASE("normalize: output stays in the core fragment") {
  const std::vector<std::string> corpus = {
      "AG(p -> q)", "A[p U q]", "EG(p | AX q)", "!EF(Start & EG !Heat)",
      "AF p & E[p U q]", "!(p -> AG q)", "A[AX p U EF q]",
  };
  for (const auto& text : corpus) {
    CAPTURE(text);
    auto n = normalize(P(text));
    // Core fragment: True/False/Atom/Not/And/Or/EX/EU/AF only.
    std::vector<const Formula*> stack = {n.get()};
    while (!stack.empty()) {
      const Formula* cur = stack.back();
      stack.pop_back();
      bool core = cur->op == Op::True || cur->op == Op::False ||
                  cur->op == Op::Atom || cur->op == Op::Not ||
                  cur->op == Op::And || cur->op == Op::Or ||
                  cur->op == Op::EX || cur->op == Op::EU || cur->op == Op::AF;
      CHECK(core);
      if (cur->lhs) stack.push_back(cur->lhs.get());
      if (cur->rhs) stack.push_back(cur->rhs.get());
    }
    // Idempotence.
    CHECK(formula_equal(normalize(n), n));
  }
}

TEST_CASE("is_propositional") {
  CHECK(is_propositional(P("p & !q")));
  CHECK(is_propositional(P("p -> q | false")));
  CHECK_FALSE(is_propositional(P("EX p")));
  CHECK_FALSE(is_propositional(P("AG(p -> q)")));
}

TEST_CASE("classify_aeclass") {
  auto one = classify_aeclass(P("EX(p & q)"));
  REQUIRE(one.has_value());
  REQUIRE(one->size() == 1);
  CHECK(formula_equal((*one)[0], P("EX(p & q)")));

  auto two = classify_aeclass(P("AG p & EF q"));
  REQUIRE(two.has_value());
  REQUIRE(two->size() == 2);
  CHECK(formula_equal((*two)[0], P("AG p")));
  CHECK(formula_equal((*two)[1], P("EF q")));

  auto three = classify_aeclass(P("AG p | E[p U q] & AF r"));
  REQUIRE(three.has_value());
  CHECK(three->size() == 3);

  // Nested temporal operators and bare propositional parts are outside the class.
  CHECK_FALSE(classify_aeclass(P("AG(EX p)")).has_value());
  CHECK_FALSE(classify_aeclass(P("p")).has_value());
  CHECK_FALSE(classify_aeclass(P("AG p & p")).has_value());
  CHECK_FALSE(classify_aeclass(P("AG p -> EF q")).has_value());
  CHECK_FALSE(classify_aeclass(P("!AG p")).has_value());
}

TEST_CASE("formula_size") {
  CHECK(formula_size(P("p")) == 1);
  CHECK(formula_size(P("AG p")) == 2);
  CHECK(formula_size(P("E[p U q]")) == 3);
  CHECK(formula_size(P("!EF(Start & EG !Heat)")) == 7);
}

TEST_CASE("formula_atoms and formula_equal") {
  auto atoms = formula_atoms(P("!EF(Start & EG !Heat)"));
  CHECK(atoms == std::set<std::string>{"Start", "Heat"});
  CHECK(formula_atoms(P("true")).empty());

  CHECK(formula_equal(P("p & q"), P("(p) & (q)")));
  CHECK_FALSE(formula_equal(P("p & q"), P("q & p")));
  CHECK_FALSE(formula_equal(P("p"), P("q")));
}
