#include "ctlrepair/formula.hpp"

#include <cctype>
#include <map>

namespace ctlrepair {

namespace {

FormulaPtr make(Op op, std::string atom, FormulaPtr lhs, FormulaPtr rhs) {
  auto node = std::make_shared<Formula>();
  node->op = op;
  node->atom = std::move(atom);
  node->lhs = std::move(lhs);
  node->rhs = std::move(rhs);
  return node;
}

bool is_atom_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}

}  // namespace

FormulaPtr f_true() { return make(Op::True, "", nullptr, nullptr); }
FormulaPtr f_false() { return make(Op::False, "", nullptr, nullptr); }

FormulaPtr f_atom(const std::string& name) {
  if (name.empty()) throw std::invalid_argument("atom name must be nonempty");
  for (char c : name) {
    if (!is_atom_char(c))
      throw std::invalid_argument("atom name '" + name + "' has characters outside [A-Za-z0-9_.]");
  }
  return make(Op::Atom, name, nullptr, nullptr);
}

FormulaPtr f_not(FormulaPtr f) { return make(Op::Not, "", std::move(f), nullptr); }
FormulaPtr f_and(FormulaPtr a, FormulaPtr b) { return make(Op::And, "", std::move(a), std::move(b)); }
FormulaPtr f_or(FormulaPtr a, FormulaPtr b) { return make(Op::Or, "", std::move(a), std::move(b)); }
FormulaPtr f_implies(FormulaPtr a, FormulaPtr b) {
  return make(Op::Implies, "", std::move(a), std::move(b));
}

FormulaPtr f_unary(Op op, FormulaPtr f) {
  switch (op) {
    case Op::Not: case Op::AX: case Op::EX: case Op::AG:
    case Op::EG: case Op::AF: case Op::EF:
      return make(op, "", std::move(f), nullptr);
    default:
      throw std::invalid_argument("f_unary: not a unary operator");
  }
}

FormulaPtr f_binary(Op op, FormulaPtr a, FormulaPtr b) {
  switch (op) {
    case Op::And: case Op::Or: case Op::Implies: case Op::AU: case Op::EU:
      return make(op, "", std::move(a), std::move(b));
    default:
      throw std::invalid_argument("f_binary: not a binary operator");
  }
}

// ── Parser ──────────────────────────────────────────────────────────────────

namespace {

enum class Tok { End, LParen, RParen, LBrack, RBrack, Not, And, Or, Implies, Ident };

struct Token {
  Tok kind;
  std::string text;  // Ident only
  size_t pos;
};

class Lexer {
 public:
  explicit Lexer(const std::string& text) : text_(text) { advance(); }

  const Token& peek() const { return current_; }

  Token take() {
    Token t = current_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
    current_.pos = pos_;
    if (pos_ >= text_.size()) {
      current_ = {Tok::End, "", pos_};
      return;
    }
    char c = text_[pos_];
    switch (c) {
      case '(': current_ = {Tok::LParen, "", pos_++}; return;
      case ')': current_ = {Tok::RParen, "", pos_++}; return;
      case '[': current_ = {Tok::LBrack, "", pos_++}; return;
      case ']': current_ = {Tok::RBrack, "", pos_++}; return;
      case '!': current_ = {Tok::Not, "", pos_++}; return;
      case '&': current_ = {Tok::And, "", pos_++}; return;
      case '|': current_ = {Tok::Or, "", pos_++}; return;
      case '-':
        if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '>') {
          current_ = {Tok::Implies, "", pos_};
          pos_ += 2;
          return;
        }
        throw ParseError("unknown token '-'", pos_);
      default: break;
    }
    // Unicode aliases: ¬ (C2 AC), ∧ (E2 88 A7), ∨ (E2 88 A8), → (E2 86 92).
    if (text_.compare(pos_, 2, "\xC2\xAC") == 0) {
      current_ = {Tok::Not, "", pos_};
      pos_ += 2;
      return;
    }
    if (text_.compare(pos_, 3, "\xE2\x88\xA7") == 0) {
      current_ = {Tok::And, "", pos_};
      pos_ += 3;
      return;
    }
    if (text_.compare(pos_, 3, "\xE2\x88\xA8") == 0) {
      current_ = {Tok::Or, "", pos_};
      pos_ += 3;
      return;
    }
    if (text_.compare(pos_, 3, "\xE2\x86\x92") == 0) {
      current_ = {Tok::Implies, "", pos_};
      pos_ += 3;
      return;
    }
    if (is_atom_char(c)) {
      size_t start = pos_;
      while (pos_ < text_.size() && is_atom_char(text_[pos_])) ++pos_;
      current_ = {Tok::Ident, text_.substr(start, pos_ - start), start};
      return;
    }
    throw ParseError("unknown token '" + std::string(1, c) + "'", pos_);
  }

  const std::string& text_;
  Token current_;
  size_t pos_ = 0;
};

class Parser {
 public:
  explicit Parser(const std::string& text) : lex_(text) {}

  FormulaPtr parse() {
    FormulaPtr f = parse_implies();
    if (lex_.peek().kind != Tok::End)
      throw ParseError("unexpected trailing input", lex_.peek().pos);
    return f;
  }

 private:
  FormulaPtr parse_implies() {
    FormulaPtr lhs = parse_or();
    if (lex_.peek().kind == Tok::Implies) {
      lex_.take();
      return f_implies(std::move(lhs), parse_implies());
    }
    return lhs;
  }

  FormulaPtr parse_or() {
    FormulaPtr f = parse_and();
    while (lex_.peek().kind == Tok::Or) {
      lex_.take();
      f = f_or(std::move(f), parse_and());
    }
    return f;
  }

  FormulaPtr parse_and() {
    FormulaPtr f = parse_unary();
    while (lex_.peek().kind == Tok::And) {
      lex_.take();
      f = f_and(std::move(f), parse_unary());
    }
    return f;
  }

  FormulaPtr parse_unary() {
    Token t = lex_.take();
    switch (t.kind) {
      case Tok::Not:
        return f_not(parse_unary());
      case Tok::LParen: {
        FormulaPtr f = parse_implies();
        expect(Tok::RParen, "')'");
        return f;
      }
      case Tok::Ident: {
        if (t.text == "true") return f_true();
        if (t.text == "false") return f_false();
        if (t.text == "AX") return f_unary(Op::AX, parse_unary());
        if (t.text == "EX") return f_unary(Op::EX, parse_unary());
        if (t.text == "AG") return f_unary(Op::AG, parse_unary());
        if (t.text == "EG") return f_unary(Op::EG, parse_unary());
        if (t.text == "AF") return f_unary(Op::AF, parse_unary());
        if (t.text == "EF") return f_unary(Op::EF, parse_unary());
        if ((t.text == "A" || t.text == "E") && lex_.peek().kind == Tok::LBrack)
          return parse_until(t.text == "A" ? Op::AU : Op::EU);
        if (t.text == "U")
          throw ParseError("'U' is only valid inside A[..U..] / E[..U..]", t.pos);
        return f_atom(t.text);
      }
      default:
        throw ParseError("expected a formula", t.pos);
    }
  }

  // The identifier "U" can never continue an or/and/implies chain, so a plain
  // parse_implies stops right in front of the top-level 'U'. That makes nested
  // untils like A[E[p U q] U r] work without extra state.
  FormulaPtr parse_until(Op op) {
    expect(Tok::LBrack, "'['");
    FormulaPtr lhs = parse_implies();
    Token u = lex_.take();
    if (u.kind != Tok::Ident || u.text != "U")
      throw ParseError("expected 'U'", u.pos);
    FormulaPtr rhs = parse_implies();
    expect(Tok::RBrack, "']'");
    return f_binary(op, std::move(lhs), std::move(rhs));
  }

  void expect(Tok kind, const std::string& what) {
    const Token& p = lex_.peek();
    if (p.kind != kind) throw ParseError("expected " + what, p.pos);
    lex_.take();
  }

  Lexer lex_;
};

}  // namespace

FormulaPtr parse_formula(const std::string& text) {
  if (text.find_first_not_of(" \t\r\n") == std::string::npos)
    throw ParseError("empty formula", 0);
  return Parser(text).parse();
}

// ── Printer ─────────────────────────────────────────────────────────────────

namespace {

int precedence(Op op) {
  switch (op) {
    case Op::Implies: return 1;
    case Op::Or: return 2;
    case Op::And: return 3;
    case Op::Not: case Op::AX: case Op::EX: case Op::AG:
    case Op::EG: case Op::AF: case Op::EF: return 4;
    default: return 5;  // atoms, constants, bracketed until forms
  }
}

void print_rec(const FormulaPtr& f, int parent_prec, std::string& out) {
  int prec = precedence(f->op);
  bool paren = prec < parent_prec;
  if (paren) out += '(';
  switch (f->op) {
    case Op::True: out += "true"; break;
    case Op::False: out += "false"; break;
    case Op::Atom: out += f->atom; break;
    case Op::Not:
      out += '!';
      print_rec(f->lhs, 4, out);
      break;
    case Op::AX: case Op::EX: case Op::AG: case Op::EG: case Op::AF: case Op::EF: {
      switch (f->op) {
        case Op::AX: out += "AX "; break;
        case Op::EX: out += "EX "; break;
        case Op::AG: out += "AG "; break;
        case Op::EG: out += "EG "; break;
        case Op::AF: out += "AF "; break;
        default: out += "EF "; break;
      }
      print_rec(f->lhs, 4, out);
      break;
    }
    case Op::And:
      print_rec(f->lhs, 3, out);
      out += " & ";
      print_rec(f->rhs, 4, out);
      break;
    case Op::Or:
      print_rec(f->lhs, 2, out);
      out += " | ";
      print_rec(f->rhs, 3, out);
      break;
    case Op::Implies:
      print_rec(f->lhs, 2, out);
      out += " -> ";
      print_rec(f->rhs, 1, out);
      break;
    case Op::AU: case Op::EU:
      out += (f->op == Op::AU) ? "A[" : "E[";
      print_rec(f->lhs, 0, out);
      out += " U ";
      print_rec(f->rhs, 0, out);
      out += ']';
      break;
  }
  if (paren) out += ')';
}

}  // namespace

std::string print_formula(const FormulaPtr& f) {
  std::string out;
  print_rec(f, 0, out);
  return out;
}

// ── Normalization ───────────────────────────────────────────────────────────

FormulaPtr normalize(const FormulaPtr& f) {
  switch (f->op) {
    case Op::True:
    case Op::False:
    case Op::Atom:
      return f;
    case Op::Not: {
      FormulaPtr inner = normalize(f->lhs);
      if (inner->op == Op::Not) return inner->lhs;
      return f_not(inner);
    }
    case Op::And:
      return f_and(normalize(f->lhs), normalize(f->rhs));
    case Op::Or:
      return f_or(normalize(f->lhs), normalize(f->rhs));
    case Op::Implies:
      return normalize(f_or(f_not(f->lhs), f->rhs));
    case Op::EX:
      return f_unary(Op::EX, normalize(f->lhs));
    case Op::AX:
      return normalize(f_not(f_unary(Op::EX, f_not(f->lhs))));
    case Op::EF:
      return f_binary(Op::EU, f_true(), normalize(f->lhs));
    case Op::AF:
      return f_unary(Op::AF, normalize(f->lhs));
    case Op::EG:
      return normalize(f_not(f_unary(Op::AF, f_not(f->lhs))));
    case Op::AG:
      return normalize(f_not(f_binary(Op::EU, f_true(), f_not(f->lhs))));
    case Op::EU:
      return f_binary(Op::EU, normalize(f->lhs), normalize(f->rhs));
    case Op::AU: {
      // A[f1 U f2] == !(E[!f2 U (!f1 & !f2)] | EG !f2)
      FormulaPtr n1 = f_not(f->lhs);
      FormulaPtr n2 = f_not(f->rhs);
      FormulaPtr eu = f_binary(Op::EU, n2, f_and(n1, f_not(f->rhs)));
      FormulaPtr eg = f_unary(Op::EG, f_not(f->rhs));
      return normalize(f_not(f_or(eu, eg)));
    }
  }
  throw std::logic_error("normalize: unhandled operator");
}

bool is_propositional(const FormulaPtr& f) {
  switch (f->op) {
    case Op::True: case Op::False: case Op::Atom:
      return true;
    case Op::Not:
      return is_propositional(f->lhs);
    case Op::And: case Op::Or: case Op::Implies:
      return is_propositional(f->lhs) && is_propositional(f->rhs);
    default:
      return false;
  }
}

int formula_size(const FormulaPtr& f) {
  int n = 1;
  if (f->lhs) n += formula_size(f->lhs);
  if (f->rhs) n += formula_size(f->rhs);
  return n;
}

std::set<std::string> formula_atoms(const FormulaPtr& f) {
  std::set<std::string> out;
  std::vector<const Formula*> stack = {f.get()};
  while (!stack.empty()) {
    const Formula* cur = stack.back();
    stack.pop_back();
    if (cur->op == Op::Atom) out.insert(cur->atom);
    if (cur->lhs) stack.push_back(cur->lhs.get());
    if (cur->rhs) stack.push_back(cur->rhs.get());
  }
  return out;
}

bool formula_equal(const FormulaPtr& a, const FormulaPtr& b) {
  if (a.get() == b.get()) return true;
  if (a->op != b->op || a->atom != b->atom) return false;
  if (static_cast<bool>(a->lhs) != static_cast<bool>(b->lhs)) return false;
  if (static_cast<bool>(a->rhs) != static_cast<bool>(b->rhs)) return false;
  if (a->lhs && !formula_equal(a->lhs, b->lhs)) return false;
  if (a->rhs && !formula_equal(a->rhs, b->rhs)) return false;
  return true;
}

namespace {

bool is_atomic_aeclass(const FormulaPtr& f) {
  switch (f->op) {
    case Op::AX: case Op::EX: case Op::AG: case Op::EG: case Op::AF: case Op::EF:
      return is_propositional(f->lhs);
    case Op::AU: case Op::EU:
      return is_propositional(f->lhs) && is_propositional(f->rhs);
    default:
      return false;
  }
}

bool collect_aeclass(const FormulaPtr& f, std::vector<FormulaPtr>& out) {
  if (is_atomic_aeclass(f)) {
    out.push_back(f);
    return true;
  }
  if (f->op == Op::And || f->op == Op::Or)
    return collect_aeclass(f->lhs, out) && collect_aeclass(f->rhs, out);
  return false;
}

}  // namespace

std::optional<std::vector<FormulaPtr>> classify_aeclass(const FormulaPtr& f) {
  std::vector<FormulaPtr> parts;
  if (!collect_aeclass(f, parts)) return std::nullopt;
  return parts;
}

}  // namespace ctlrepair
