// logic.hpp -- alternating-time temporal logic: syntax tree, parser, pretty
// printer, fragment classification, basic-subformula closure.
//
// Concrete grammar (precedence low to high: ->  |  &  U  unary):
//   f  := g ('->' f)?
//   g  := h ('|' h)*
//   h  := u ('&' u)*
//   u  := w ('U' u)?                   (right associative)
//   w  := '!' w | 'X' w | 'F' w | 'G' w
//       | '<<' ids '>>' w | '[[' ids ']]' w | 'E' w | 'A' w
//       | 'true' | 'false' | prop | '(' f ')'
// 'E' abbreviates the quantifier over all agents, 'A' the one over none.
// '[[..]]' is the dual quantifier (semantically "not << >> not").
#pragma once

#include <memory>
#include <string>
#include <vector>

#include "pdmc/base.hpp"
#include "pdmc/system_model.hpp"

namespace pdmc {

enum class FKind {
  True,
  Prop,
  Not,
  And,
  Or,
  Imply,
  Next,
  Until,
  Release,  // dual of Until; produced by normalization, also parseable as R
  Finally,
  Globally,
  Quant,   // <<A>> psi
  DQuant,  // [[A]] psi
};

struct FNode;
using FRef = std::shared_ptr<const FNode>;

struct FNode {
  FKind kind;
  Id prop = kNoId;          // Prop
  std::vector<Id> agents;   // Quant / DQuant, sorted
  FRef a, b;                // operands (b only for Until and binary booleans)
};

inline FRef f_true() { return std::make_shared<FNode>(FNode{FKind::True}); }
inline FRef f_prop(Id p) {
  return std::make_shared<FNode>(FNode{FKind::Prop, p});
}
inline FRef f_un(FKind k, FRef x) {
  return std::make_shared<FNode>(FNode{k, kNoId, {}, std::move(x)});
}
inline FRef f_not(FRef x) { return f_un(FKind::Not, std::move(x)); }
inline FRef f_bin(FKind k, FRef x, FRef y) {
  return std::make_shared<FNode>(
      FNode{k, kNoId, {}, std::move(x), std::move(y)});
}
inline FRef f_quant(std::vector<Id> agents, FRef x, bool dual = false) {
  sort_unique(agents);
  return std::make_shared<FNode>(FNode{dual ? FKind::DQuant : FKind::Quant,
                                       kNoId, std::move(agents), std::move(x)});
}
inline FRef negate(FRef x) { return f_not(std::move(x)); }

inline std::size_t ast_size(const FRef& f) {
  std::size_t n = 1;
  if (f->a) n += ast_size(f->a);
  if (f->b) n += ast_size(f->b);
  return n;
}

inline bool structural_equal(const FRef& x, const FRef& y) {
  if (x.get() == y.get()) return true;
  if (x->kind != y->kind || x->prop != y->prop || x->agents != y->agents)
    return false;
  if (!!x->a != !!y->a || !!x->b != !!y->b) return false;
  if (x->a && !structural_equal(x->a, y->a)) return false;
  if (x->b && !structural_equal(x->b, y->b)) return false;
  return true;
}

// Signature-free canonical serialization; used as a map key.
inline std::string formula_key(const FRef& f) {
  switch (f->kind) {
    case FKind::True: return "t";
    case FKind::Prop: return "p" + std::to_string(f->prop);
    case FKind::Not: return "!(" + formula_key(f->a) + ")";
    case FKind::And:
      return "(" + formula_key(f->a) + "&" + formula_key(f->b) + ")";
    case FKind::Or:
      return "(" + formula_key(f->a) + "|" + formula_key(f->b) + ")";
    case FKind::Imply:
      return "(" + formula_key(f->a) + ">" + formula_key(f->b) + ")";
    case FKind::Next: return "X(" + formula_key(f->a) + ")";
    case FKind::Until:
      return "(" + formula_key(f->a) + "U" + formula_key(f->b) + ")";
    case FKind::Release:
      return "(" + formula_key(f->a) + "R" + formula_key(f->b) + ")";
    case FKind::Finally: return "F(" + formula_key(f->a) + ")";
    case FKind::Globally: return "G(" + formula_key(f->a) + ")";
    case FKind::Quant:
    case FKind::DQuant: {
      std::string s = f->kind == FKind::Quant ? "Q{" : "D{";
      for (Id a : f->agents) s += std::to_string(a) + ",";
      return s + "}(" + formula_key(f->a) + ")";
    }
  }
  return "?";
}

// ---------------------------------------------------------------------------
// fragment classification

inline bool is_temporal(FKind k) {
  return k == FKind::Next || k == FKind::Until || k == FKind::Release ||
         k == FKind::Finally || k == FKind::Globally;
}
inline bool is_quant(FKind k) {
  return k == FKind::Quant || k == FKind::DQuant;
}

// State formula: no temporal operator outside the scope of a quantifier.
inline bool is_state_formula(const FRef& f) {
  if (is_temporal(f->kind)) return false;
  if (is_quant(f->kind)) return true;  // anything below is a path formula
  bool ok = true;
  if (f->a) ok = ok && is_state_formula(f->a);
  if (f->b) ok = ok && is_state_formula(f->b);
  return ok;
}

// ATL proper: every temporal operator sits immediately under a quantifier and
// every quantifier wraps exactly one temporal operator whose operands are
// again ATL.
inline bool is_atl(const FRef& f) {
  switch (f->kind) {
    case FKind::True:
    case FKind::Prop:
      return true;
    case FKind::Not:
      return is_atl(f->a);
    case FKind::And:
    case FKind::Or:
    case FKind::Imply:
      return is_atl(f->a) && is_atl(f->b);
    case FKind::Next:
    case FKind::Until:
    case FKind::Release:
    case FKind::Finally:
    case FKind::Globally:
      return false;  // bare temporal operator
    case FKind::Quant:
    case FKind::DQuant: {
      const FRef& body = f->a;
      switch (body->kind) {
        case FKind::Next:
        case FKind::Finally:
        case FKind::Globally:
          return is_atl(body->a);
        case FKind::Until:
        case FKind::Release:
          return is_atl(body->a) && is_atl(body->b);
        default:
          return false;
      }
    }
  }
  return false;
}

// X-bounded fragment: state formula whose only temporal operator is X.
// Returns the maximal X-nesting depth, or -1 when outside the fragment.
inline int x_depth(const FRef& f) {
  switch (f->kind) {
    case FKind::True:
    case FKind::Prop:
      return 0;
    case FKind::Until:
    case FKind::Release:
    case FKind::Finally:
    case FKind::Globally:
      return -1;
    case FKind::Next: {
      int d = x_depth(f->a);
      return d < 0 ? -1 : d + 1;
    }
    default: {
      int da = f->a ? x_depth(f->a) : 0;
      int db = f->b ? x_depth(f->b) : 0;
      if (da < 0 || db < 0) return -1;
      return std::max(da, db);
    }
  }
}

// All quantified subformulas, innermost first (post-order), deduplicated.
inline void basic_subformulas_rec(const FRef& f, std::vector<FRef>& out) {
  if (f->a) basic_subformulas_rec(f->a, out);
  if (f->b) basic_subformulas_rec(f->b, out);
  if (is_quant(f->kind)) {
    for (const auto& g : out)
      if (structural_equal(f, g)) return;
    out.push_back(f);
  }
}
inline std::vector<FRef> basic_subformulas(const FRef& f) {
  std::vector<FRef> out;
  basic_subformulas_rec(f, out);
  return out;
}

// Double-negation elimination; semantics-preserving convenience pass.
inline FRef simplify_double_neg(const FRef& f) {
  if (f->kind == FKind::Not && f->a->kind == FKind::Not)
    return simplify_double_neg(f->a->a);
  FNode n = *f;
  if (n.a) n.a = simplify_double_neg(n.a);
  if (n.b) n.b = simplify_double_neg(n.b);
  return std::make_shared<FNode>(std::move(n));
}

// ---------------------------------------------------------------------------
// pretty printer (inverse of the parser)

inline int f_prec(FKind k) {
  switch (k) {
    case FKind::Imply: return 0;
    case FKind::Or: return 1;
    case FKind::And: return 2;
    case FKind::Until:
    case FKind::Release: return 3;
    default: return 4;
  }
}

inline std::string pretty(const FRef& f, const Signature& sig) {
  auto wrap = [&](const FRef& x, int need) {
    std::string s = pretty(x, sig);
    if (f_prec(x->kind) < need) return "(" + s + ")";
    return s;
  };
  switch (f->kind) {
    case FKind::True: return "true";
    case FKind::Prop: return sig.props.at(f->prop);
    case FKind::Not: return "!" + wrap(f->a, 4);
    case FKind::And: return wrap(f->a, 3) + " & " + wrap(f->b, 3);
    case FKind::Or: return wrap(f->a, 2) + " | " + wrap(f->b, 2);
    case FKind::Imply: return wrap(f->a, 1) + " -> " + wrap(f->b, 0);
    case FKind::Next: return "X " + wrap(f->a, 4);
    case FKind::Until: return wrap(f->a, 4) + " U " + wrap(f->b, 3);
    case FKind::Release: return wrap(f->a, 4) + " R " + wrap(f->b, 3);
    case FKind::Finally: return "F " + wrap(f->a, 4);
    case FKind::Globally: return "G " + wrap(f->a, 4);
    case FKind::Quant:
    case FKind::DQuant: {
      std::string s = f->kind == FKind::Quant ? "<<" : "[[";
      for (std::size_t i = 0; i < f->agents.size(); ++i)
        s += (i ? "," : "") + sig.agents.at(f->agents[i]);
      s += f->kind == FKind::Quant ? ">>" : "]]";
      return s + " " + wrap(f->a, 4);
    }
  }
  return "?";
}

// ---------------------------------------------------------------------------
// parser

namespace detail {

struct FormulaParser {
  const std::string& text;
  const Signature& sig;
  std::size_t pos = 0;

  [[noreturn]] void err(const std::string& msg) const {
    fail(ErrorKind::Syntax,
         "formula position " + std::to_string(pos) + ": " + msg);
  }
  void skip_ws() {
    while (pos < text.size() &&
           std::isspace(static_cast<unsigned char>(text[pos])))
      ++pos;
  }
  bool eat(const std::string& tok) {
    skip_ws();
    if (text.compare(pos, tok.size(), tok) == 0) {
      // identifier-like tokens must not swallow a prefix of a longer word
      if (std::isalpha(static_cast<unsigned char>(tok[0])) &&
          pos + tok.size() < text.size() &&
          (std::isalnum(static_cast<unsigned char>(text[pos + tok.size()])) ||
           text[pos + tok.size()] == '_'))
        return false;
      pos += tok.size();
      return true;
    }
    return false;
  }
  std::string ident() {
    skip_ws();
    std::size_t start = pos;
    while (pos < text.size() &&
           (std::isalnum(static_cast<unsigned char>(text[pos])) ||
            text[pos] == '_'))
      ++pos;
    if (pos == start) err("expected an identifier");
    return text.substr(start, pos - start);
  }

  std::vector<Id> agent_list(const std::string& close) {
    std::vector<Id> out;
    skip_ws();
    if (eat(close)) return out;  // empty coalition
    while (true) {
      std::string name = ident();
      auto it = sig.agent_index.find(name);
      if (it == sig.agent_index.end())
        fail(ErrorKind::Input, "unknown agent in quantifier: " + name);
      out.push_back(it->second);
      if (eat(close)) break;
      if (!eat(",")) err("expected `,` or `" + close + "`");
    }
    return out;
  }

  FRef parse_imply() {
    FRef lhs = parse_or();
    if (eat("->")) return f_bin(FKind::Imply, lhs, parse_imply());
    return lhs;
  }
  FRef parse_or() {
    FRef lhs = parse_and();
    while (eat("|")) lhs = f_bin(FKind::Or, lhs, parse_and());
    return lhs;
  }
  FRef parse_and() {
    FRef lhs = parse_until();
    while (eat("&")) lhs = f_bin(FKind::And, lhs, parse_until());
    return lhs;
  }
  FRef parse_until() {
    FRef lhs = parse_unary();
    if (eat("U")) return f_bin(FKind::Until, lhs, parse_until());
    if (eat("R")) return f_bin(FKind::Release, lhs, parse_until());
    return lhs;
  }
  FRef parse_unary() {
    if (eat("!")) return f_not(parse_unary());
    if (eat("X")) return f_un(FKind::Next, parse_unary());
    if (eat("F")) return f_un(FKind::Finally, parse_unary());
    if (eat("G")) return f_un(FKind::Globally, parse_unary());
    if (eat("<<")) {
      auto agents = agent_list(">>");
      return f_quant(std::move(agents), parse_unary());
    }
    if (eat("[[")) {
      auto agents = agent_list("]]");
      return f_quant(std::move(agents), parse_unary(), /*dual=*/true);
    }
    if (eat("E")) {
      std::vector<Id> all;
      for (Id a = 0; a < sig.agents.size(); ++a) all.push_back(a);
      return f_quant(std::move(all), parse_unary());
    }
    if (eat("A")) return f_quant({}, parse_unary());
    if (eat("true")) return f_true();
    if (eat("false")) return f_not(f_true());
    if (eat("(")) {
      FRef inner = parse_imply();
      if (!eat(")")) err("expected `)`");
      return inner;
    }
    std::string name = ident();
    auto it = sig.prop_index.find(name);
    if (it == sig.prop_index.end())
      fail(ErrorKind::Input, "unknown proposition: " + name);
    return f_prop(it->second);
  }
};

}  // namespace detail

inline FRef parse_formula(const std::string& text, const Signature& sig) {
  detail::FormulaParser p{text, sig};
  FRef f = p.parse_imply();
  p.skip_ws();
  if (p.pos != text.size()) p.err("trailing input");
  return f;
}

// One formula per nonempty line; `#` starts a comment.
inline std::vector<FRef> parse_formula_lines(const std::string& text,
                                             const Signature& sig) {
  std::vector<FRef> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    bool blank = true;
    for (char c : line)
      if (!std::isspace(static_cast<unsigned char>(c))) blank = false;
    if (blank) continue;
    out.push_back(parse_formula(line, sig));
  }
  return out;
}

}  // namespace pdmc
