#pragma once
// CTL formula AST, parser, canonical printer, and normalization.
//
// Surface syntax (ASCII, with Unicode aliases for the propositional connectives):
//   formula := implies
//   implies := or ("->" implies)?                  right-associative
//   or      := and ("|" and)*
//   and     := unary ("&" unary)*
//   unary   := "!" unary | "AX" unary | "EX" unary | "AG" unary | "EG" unary
//            | "AF" unary | "EF" unary
//            | "A" "[" formula "U" formula "]" | "E" "[" formula "U" formula "]"
//            | "(" formula ")" | "true" | "false" | atom
//   atom    := nonempty identifier over [A-Za-z0-9_.]

#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace ctlrepair {

enum class Op {
  True, False, Atom,
  Not, And, Or, Implies,
  AX, EX, AG, EG, AF, EF, AU, EU,
};

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

// Immutable AST node. Unary operators use lhs; binary operators use lhs/rhs.
struct Formula {
  Op op;
  std::string atom;  // Op::Atom only
  FormulaPtr lhs;
  FormulaPtr rhs;
};

FormulaPtr f_true();
FormulaPtr f_false();
FormulaPtr f_atom(const std::string& name);
FormulaPtr f_not(FormulaPtr f);
FormulaPtr f_and(FormulaPtr a, FormulaPtr b);
FormulaPtr f_or(FormulaPtr a, FormulaPtr b);
FormulaPtr f_implies(FormulaPtr a, FormulaPtr b);
FormulaPtr f_unary(Op op, FormulaPtr f);               // AX EX AG EG AF EF, Not
FormulaPtr f_binary(Op op, FormulaPtr a, FormulaPtr b);  // AU EU, And Or Implies

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, size_t position)
      : std::runtime_error(message + " (at position " + std::to_string(position) + ")"),
        position(position) {}
  size_t position;
};

FormulaPtr parse_formula(const std::string& text);

// Canonical printer; parse_formula(print_formula(f)) reproduces f exactly.
std::string print_formula(const FormulaPtr& f);

// Rewrites to the core fragment {propositional connectives, EX, EU, AF, Not}:
//   AX f          -> !EX !f
//   EF f          -> E[true U f]
//   EG f          -> !AF !f
//   AG f          -> !E[true U !f]
//   A[f1 U f2]    -> !(E[!f2 U (!f1 & !f2)] | EG !f2)
//   f1 -> f2      -> !f1 | f2
// plus double-negation elimination. Idempotent and semantics-preserving.
FormulaPtr normalize(const FormulaPtr& f);

bool is_propositional(const FormulaPtr& f);

// AST node count: Atom p = 1, AG p = 2, E[p U q] = 3.
int formula_size(const FormulaPtr& f);

std::set<std::string> formula_atoms(const FormulaPtr& f);

bool formula_equal(const FormulaPtr& a, const FormulaPtr& b);

// AEClass: conjunctions/disjunctions of AX/EX/AG/EG/AF/EF/A[U]/E[U] whose
// operands are propositional. Returns the atomic temporal subformulas in
// left-to-right order, or nullopt when the formula is outside the class.
std::optional<std::vector<FormulaPtr>> classify_aeclass(const FormulaPtr& f);

}  // namespace ctlrepair
