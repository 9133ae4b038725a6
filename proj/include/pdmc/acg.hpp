// acg.hpp -- alternating parity automata over game structures, and the
// translation from ATL state formulas.
//
// A state carries a max-parity color and one transition expression: a positive
// boolean combination of atoms (q', mode, team) meaning "spawn q' on the
// successors the coalition `team` selects under `mode`" (Box: some available
// team decision covers ALL consistent successors; Diamond: every available
// team decision leaves SOME consistent successor).  Branching on the current
// node's label is part of the expression (IfProp nodes), so one expression per
// state covers the whole alphabet and alphabets never need enumerating.
// Discharged and failed obligations are the constants true/false; membership
// games turn them into terminal sink positions, and runs simply stop along
// branches whose obligations are discharged.
//
// The ATL translation keeps one state per distinct normalized subformula that
// is ever spawned (quantified subformulas and next-operands), colors until
// unfoldings 1 and everything else 0.
#pragma once

#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pdmc/base.hpp"
#include "pdmc/logic.hpp"

namespace pdmc {

enum class AtomMode { Box, Diamond };

struct ParityAcg {
  struct Pb {
    enum Kind { True_, False_, Atom_, And_, Or_, IfProp_ };
    Kind kind = True_;
    Id q = kNoId;                 // Atom_: spawned state
    AtomMode mode = AtomMode::Box;
    std::vector<Id> team;         // Atom_: sorted agent ids
    Id prop = kNoId;              // IfProp_: proposition tested on the label
    int a = -1, b = -1;           // And_/Or_ operands; IfProp_ then/else
  };

  std::vector<Pb> pool;       // shared expression DAG (children precede parents)
  std::vector<int> delta;     // per state: root expression index
  std::vector<int> color;     // per state: max-parity color
  std::vector<std::string> tag;  // per state: human-readable origin
  Id init = 0;

  std::size_t num_states() const { return delta.size(); }

  Id add_state(int c, std::string t) {
    delta.push_back(-1);
    color.push_back(c);
    tag.push_back(std::move(t));
    return static_cast<Id>(delta.size() - 1);
  }

  int mk(Pb n) {
    pool.push_back(std::move(n));
    return static_cast<int>(pool.size()) - 1;
  }
  int mk_true() { return mk(Pb{Pb::True_}); }
  int mk_false() { return mk(Pb{Pb::False_}); }
  int mk_atom(Id q, AtomMode m, std::vector<Id> team) {
    Pb n{Pb::Atom_};
    n.q = q;
    n.mode = m;
    n.team = std::move(team);
    return mk(std::move(n));
  }
  int mk_and(int x, int y) {
    Pb n{Pb::And_};
    n.a = x;
    n.b = y;
    return mk(std::move(n));
  }
  int mk_or(int x, int y) {
    Pb n{Pb::Or_};
    n.a = x;
    n.b = y;
    return mk(std::move(n));
  }
  int mk_ifprop(Id p, int then_e, int else_e) {
    Pb n{Pb::IfProp_};
    n.prop = p;
    n.a = then_e;
    n.b = else_e;
    return mk(std::move(n));
  }

  // number of distinct colors in use
  int index() const {
    std::vector<int> cs = color;
    sort_unique(cs);
    return static_cast<int>(cs.size());
  }

  // distinct (state, mode, team) triples occurring in transition expressions
  std::vector<Pb> atoms() const {
    std::vector<Pb> out;
    for (const Pb& n : pool) {
      if (n.kind != Pb::Atom_) continue;
      bool dup = false;
      for (const Pb& m : out)
        if (m.q == n.q && m.mode == n.mode && m.team == n.team) {
          dup = true;
          break;
        }
      if (!dup) out.push_back(n);
    }
    return out;
  }

  std::size_t size() const { return num_states() + atoms().size(); }
};

namespace detail {

// Negation normal form: negations pushed onto literals, implications expanded,
// F/G rewritten to Until/Release with a constant operand, quantifier flavors
// flipped when a negation crosses them.
inline FRef to_nnf(const FRef& f, bool pos) {
  switch (f->kind) {
    case FKind::True:
      return pos ? f_true() : f_not(f_true());
    case FKind::Prop:
      return pos ? f_prop(f->prop) : f_not(f_prop(f->prop));
    case FKind::Not:
      return to_nnf(f->a, !pos);
    case FKind::And:
      return f_bin(pos ? FKind::And : FKind::Or, to_nnf(f->a, pos),
                   to_nnf(f->b, pos));
    case FKind::Or:
      return f_bin(pos ? FKind::Or : FKind::And, to_nnf(f->a, pos),
                   to_nnf(f->b, pos));
    case FKind::Imply:
      return f_bin(pos ? FKind::Or : FKind::And, to_nnf(f->a, !pos),
                   to_nnf(f->b, pos));
    case FKind::Quant:
    case FKind::DQuant: {
      // flavor of the result: negation swaps <<A>> and [[A]]
      bool quant = (f->kind == FKind::Quant) == pos;
      const FRef& body = f->a;
      FRef nb;
      switch (body->kind) {
        case FKind::Next:
          nb = f_un(FKind::Next, to_nnf(body->a, pos));
          break;
        case FKind::Until:
          nb = f_bin(pos ? FKind::Until : FKind::Release, to_nnf(body->a, pos),
                     to_nnf(body->b, pos));
          break;
        case FKind::Release:
          nb = f_bin(pos ? FKind::Release : FKind::Until, to_nnf(body->a, pos),
                     to_nnf(body->b, pos));
          break;
        case FKind::Finally:
          nb = pos ? f_bin(FKind::Until, f_true(), to_nnf(body->a, true))
                   : f_bin(FKind::Release, f_not(f_true()),
                           to_nnf(body->a, false));
          break;
        case FKind::Globally:
          nb = pos ? f_bin(FKind::Release, f_not(f_true()),
                           to_nnf(body->a, true))
                   : f_bin(FKind::Until, f_true(), to_nnf(body->a, false));
          break;
        default:
          fail(ErrorKind::Fragment,
               "quantifier body is not a single temporal operator: " +
                   formula_key(body));
      }
      return f_quant(f->agents, std::move(nb), !quant);
    }
    default:
      fail(ErrorKind::Fragment,
           "temporal operator outside any quantifier: " + formula_key(f));
  }
}

class AcgBuilder {
 public:
  AcgBuilder(const Signature& sig) : sig_(sig) {}

  ParityAcg build(const FRef& phi) {
    acg_.init = state_of(to_nnf(phi, true));
    return std::move(acg_);
  }

 private:
  const Signature& sig_;
  ParityAcg acg_;
  std::unordered_map<std::string, Id> state_memo_;
  std::unordered_map<std::string, int> expr_memo_;

  // State checking the NNF state formula f at a node.
  Id state_of(const FRef& f) {
    std::string key = formula_key(f);
    auto it = state_memo_.find(key);
    if (it != state_memo_.end()) return it->second;
    int c = is_quant(f->kind) && f->a->kind == FKind::Until ? 1 : 0;
    Id q = acg_.add_state(c, pretty(f, sig_));
    state_memo_.emplace(std::move(key), q);
    if (is_quant(f->kind)) {
      AtomMode m =
          f->kind == FKind::Quant ? AtomMode::Box : AtomMode::Diamond;
      const FRef& body = f->a;
      switch (body->kind) {
        case FKind::Next:
          acg_.delta[q] = acg_.mk_atom(state_of(body->a), m, f->agents);
          break;
        case FKind::Until: {
          int hold = expr_of(body->a), goal = expr_of(body->b);
          acg_.delta[q] = acg_.mk_or(
              goal, acg_.mk_and(hold, acg_.mk_atom(q, m, f->agents)));
          break;
        }
        case FKind::Release: {
          int hold = expr_of(body->a), goal = expr_of(body->b);
          acg_.delta[q] = acg_.mk_and(
              goal, acg_.mk_or(hold, acg_.mk_atom(q, m, f->agents)));
          break;
        }
        default:
          fail(ErrorKind::Fragment,
               "normalized quantifier body must be X, U or R: " +
                   formula_key(body));
      }
    } else {
      acg_.delta[q] = expr_of(f);
    }
    return q;
  }

  // Obligation expression for the NNF state formula f at the current node.
  int expr_of(const FRef& f) {
    std::string key = formula_key(f);
    auto it = expr_memo_.find(key);
    if (it != expr_memo_.end()) return it->second;
    int e;
    switch (f->kind) {
      case FKind::True:
        e = acg_.mk_true();
        break;
      case FKind::Prop:
        e = acg_.mk_ifprop(f->prop, acg_.mk_true(), acg_.mk_false());
        break;
      case FKind::Not:
        // NNF literal: !true or !p
        if (f->a->kind == FKind::True) {
          e = acg_.mk_false();
        } else if (f->a->kind == FKind::Prop) {
          e = acg_.mk_ifprop(f->a->prop, acg_.mk_false(), acg_.mk_true());
        } else {
          fail(ErrorKind::Fragment,
               "negation not at a literal after normalization: " +
                   formula_key(f));
        }
        break;
      case FKind::And:
        e = acg_.mk_and(expr_of(f->a), expr_of(f->b));
        break;
      case FKind::Or:
        e = acg_.mk_or(expr_of(f->a), expr_of(f->b));
        break;
      case FKind::Quant:
      case FKind::DQuant:
        // the state's transition already expresses "f holds here"
        e = acg_.delta[state_of(f)];
        break;
      default:
        fail(ErrorKind::Fragment,
             "temporal operator outside any quantifier: " + formula_key(f));
    }
    expr_memo_.emplace(std::move(key), e);
    return e;
  }
};

}  // namespace detail

// Translate an ATL state formula into an equivalent alternating automaton.
// Colors are within {0, 1} (index at most 2) and the state count is bounded
// by 2 * ast_size(phi).
inline ParityAcg atl_to_acg(const FRef& phi, const Signature& sig) {
  if (!is_atl(phi))
    fail(ErrorKind::Fragment, "not an ATL state formula: " + formula_key(phi));
  return detail::AcgBuilder(sig).build(phi);
}

// Complement: swap and/or, true/false, box/diamond, shift every color by one.
// The result accepts exactly the structures the input rejects.
inline ParityAcg dualize(const ParityAcg& a) {
  ParityAcg d = a;
  for (ParityAcg::Pb& n : d.pool) {
    switch (n.kind) {
      case ParityAcg::Pb::True_: n.kind = ParityAcg::Pb::False_; break;
      case ParityAcg::Pb::False_: n.kind = ParityAcg::Pb::True_; break;
      case ParityAcg::Pb::And_: n.kind = ParityAcg::Pb::Or_; break;
      case ParityAcg::Pb::Or_: n.kind = ParityAcg::Pb::And_; break;
      case ParityAcg::Pb::Atom_:
        n.mode =
            n.mode == AtomMode::Box ? AtomMode::Diamond : AtomMode::Box;
        break;
      case ParityAcg::Pb::IfProp_: break;  // condition unchanged, branches
                                           // are dualized by this same pass
    }
  }
  for (int& c : d.color) ++c;
  for (std::string& t : d.tag) t = "~(" + t + ")";
  return d;
}

namespace detail {

inline std::string pb_to_string(const ParityAcg& a, int e,
                                const Signature& sig) {
  const ParityAcg::Pb& n = a.pool[e];
  switch (n.kind) {
    case ParityAcg::Pb::True_: return "true";
    case ParityAcg::Pb::False_: return "false";
    case ParityAcg::Pb::Atom_: {
      std::string s = "(q";
      s += std::to_string(n.q);
      s += n.mode == AtomMode::Box ? ",box,{" : ",dia,{";
      for (std::size_t i = 0; i < n.team.size(); ++i)
        s += (i ? "," : "") + sig.agents.at(n.team[i]);
      return s + "})";
    }
    case ParityAcg::Pb::And_:
      return "(" + pb_to_string(a, n.a, sig) + " & " +
             pb_to_string(a, n.b, sig) + ")";
    case ParityAcg::Pb::Or_:
      return "(" + pb_to_string(a, n.a, sig) + " | " +
             pb_to_string(a, n.b, sig) + ")";
    case ParityAcg::Pb::IfProp_:
      return "(" + sig.props.at(n.prop) + " ? " +
             pb_to_string(a, n.a, sig) + " : " + pb_to_string(a, n.b, sig) +
             ")";
  }
  return "?";
}

}  // namespace detail

inline std::string dump_acg(const ParityAcg& a, const Signature& sig) {
  std::string out = "acg: " + std::to_string(a.num_states()) +
                    " states, init q" + std::to_string(a.init) + ", " +
                    std::to_string(a.atoms().size()) + " atoms, index " +
                    std::to_string(a.index()) + "\n";
  for (Id q = 0; q < a.num_states(); ++q) {
    out += "  q" + std::to_string(q) + " color " +
           std::to_string(a.color[q]) + "  [" + a.tag[q] + "]\n";
    out += "    delta = " + detail::pb_to_string(a, a.delta[q], sig) + "\n";
  }
  return out;
}

}  // namespace pdmc
