// atlstar.hpp -- alternating-automaton translation for branching formulas
// whose quantifier bodies are arbitrary linear-time formulas.
//
// Nested strategic subformulas inside a path body are replaced by fresh
// guessed label propositions; each body then is plain LTL and runs through a
// materialized deterministic parity word automaton embedded in the usual
// box/diamond branching skeleton.  For every guessed proposition the result
// carries a consistency monitor holding at every node: where the proposition
// is guessed true the defining subformula's automaton starts, where it is
// guessed false the negation's automaton starts.  A tree over the original
// labels satisfies the formula exactly when some way of adding the guessed
// propositions is accepted.
//
// Determinization is budgeted: a path body whose word automaton needs more
// than `budget` states raises a guard error instead of attempting the
// general doubly exponential construction.
#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pdmc/acg.hpp"
#include "pdmc/logic.hpp"
#include "pdmc/system_model.hpp"
#include "pdmc/word_automata.hpp"

namespace pdmc {

struct StarAcg {
  ParityAcg acg;
  Signature sig;                 // input signature plus guessed propositions
  std::vector<Id> guess_props;   // ids of the guessed propositions in `sig`
  std::size_t path_automata = 0;     // distinct quantified path bodies
  std::size_t max_path_states = 0;   // largest materialized word automaton
};

namespace detail {

// Negation normal form over the full syntax: negations pushed to literals,
// implications expanded, F/G rewritten to U/R, quantifier flavors flipped
// when a negation crosses them.  Unlike to_nnf, quantifier bodies may be
// arbitrary path formulas.
inline FRef star_nnf(const FRef& f, bool pos) {
  switch (f->kind) {
    case FKind::True:
      return pos ? f_true() : f_not(f_true());
    case FKind::Prop:
      return pos ? f_prop(f->prop) : f_not(f_prop(f->prop));
    case FKind::Not:
      return star_nnf(f->a, !pos);
    case FKind::And:
      return f_bin(pos ? FKind::And : FKind::Or, star_nnf(f->a, pos),
                   star_nnf(f->b, pos));
    case FKind::Or:
      return f_bin(pos ? FKind::Or : FKind::And, star_nnf(f->a, pos),
                   star_nnf(f->b, pos));
    case FKind::Imply:
      return f_bin(pos ? FKind::Or : FKind::And, star_nnf(f->a, !pos),
                   star_nnf(f->b, pos));
    case FKind::Next:
      return f_un(FKind::Next, star_nnf(f->a, pos));
    case FKind::Until:
      return f_bin(pos ? FKind::Until : FKind::Release, star_nnf(f->a, pos),
                   star_nnf(f->b, pos));
    case FKind::Release:
      return f_bin(pos ? FKind::Release : FKind::Until, star_nnf(f->a, pos),
                   star_nnf(f->b, pos));
    case FKind::Finally:
      return pos ? f_bin(FKind::Until, f_true(), star_nnf(f->a, true))
                 : f_bin(FKind::Release, f_not(f_true()),
                         star_nnf(f->a, false));
    case FKind::Globally:
      return pos ? f_bin(FKind::Release, f_not(f_true()),
                         star_nnf(f->a, true))
                 : f_bin(FKind::Until, f_true(), star_nnf(f->a, false));
    case FKind::Quant:
    case FKind::DQuant: {
      bool quant = (f->kind == FKind::Quant) == pos;
      return f_quant(f->agents, star_nnf(f->a, pos), !quant);
    }
  }
  fail(ErrorKind::Fragment, "unknown formula node");
}

inline void collect_props(const FRef& f, std::vector<Id>& out) {
  if (f->kind == FKind::Prop) out.push_back(f->prop);
  if (f->a) collect_props(f->a, out);
  if (f->b) collect_props(f->b, out);
}

class StarBuilder {
 public:
  StarBuilder(const Signature& sig, std::size_t budget)
      : budget_(budget), ext_(sig) {}

  StarAcg run(const FRef& phi) {
    if (!is_state_formula(phi))
      fail(ErrorKind::Fragment, "top-level formula must be a state formula");
    FRef nf = star_nnf(phi, true);
    int root = expr_of(nf);
    // Monitor bodies may discover deeper nested subformulas; the vector
    // grows while this loop runs.
    for (std::size_t i = 0; i < monitors_.size(); ++i) {
      FRef def = monitors_[i].def;
      int pe = expr_of(def);
      int ne = expr_of(star_nnf(def, false));
      monitors_[i].pos_expr = pe;
      monitors_[i].neg_expr = ne;
    }
    Id q0 = acg_.add_state(0, pretty(nf, ext_));
    if (monitors_.empty()) {
      acg_.delta[q0] = root;
    } else {
      // Everywhere-state: at every node each guessed proposition must agree
      // with its defining subformula, in both directions.
      Id u = acg_.add_state(0, "label-guess consistency");
      int cons = mtrue();
      for (const Monitor& mo : monitors_)
        cons = mand(cons, mif(mo.prop, mo.pos_expr, mo.neg_expr));
      acg_.delta[u] = mand(cons, matom(u, AtomMode::Box, {}));
      acg_.delta[q0] = mand(root, acg_.delta[u]);
    }
    acg_.init = q0;

    StarAcg out;
    out.acg = std::move(acg_);
    out.sig = std::move(ext_);
    out.sig.finish();
    out.guess_props = std::move(guesses_);
    out.path_automata = paths_.size();
    out.max_path_states = max_path_states_;
    return out;
  }

 private:
  // Too many distinct propositions in one path body would make the
  // materialized letter table explode (2^n columns).
  static constexpr std::size_t kMaxPathProps = 12;

  struct Monitor {
    Id prop;
    FRef def;  // the replaced subformula, in negation normal form
    int pos_expr = -1, neg_expr = -1;
  };

  // A deterministic parity word automaton over the subsets of `props`,
  // materialized as a dense table.
  struct PathAut {
    std::vector<Id> props;  // sorted; mask bit i = props[i] present
    int init = 0;
    std::vector<int> color;
    std::vector<std::vector<int>> next;  // [state][mask]
  };

  std::size_t budget_;
  Signature ext_;
  ParityAcg acg_;
  std::vector<Id> guesses_;
  std::vector<Monitor> monitors_;
  std::unordered_map<std::string, Id> bprop_memo_;
  std::unordered_map<std::string, int> expr_memo_;
  std::unordered_map<std::string, Id> skel_memo_;
  std::unordered_map<std::string, std::size_t> path_memo_;
  std::vector<PathAut> paths_;
  std::size_t max_path_states_ = 0;

  // Local structural sharing on top of the plain expression pool.
  int true_e_ = -1, false_e_ = -1;
  std::map<std::pair<int, int>, int> and_memo_, or_memo_;
  std::map<std::tuple<Id, int, int>, int> if_memo_;
  std::map<std::tuple<Id, int, std::vector<Id>>, int> atom_memo_;

  int mtrue() {
    if (true_e_ < 0) true_e_ = acg_.mk_true();
    return true_e_;
  }
  int mfalse() {
    if (false_e_ < 0) false_e_ = acg_.mk_false();
    return false_e_;
  }
  int mand(int a, int b) {
    if (a == true_e_ && true_e_ >= 0) return b;
    if (b == true_e_ && true_e_ >= 0) return a;
    if ((a == false_e_ || b == false_e_) && false_e_ >= 0) return mfalse();
    if (a > b) std::swap(a, b);
    auto it = and_memo_.find({a, b});
    if (it != and_memo_.end()) return it->second;
    int e = acg_.mk_and(a, b);
    and_memo_.emplace(std::make_pair(a, b), e);
    return e;
  }
  int mor(int a, int b) {
    if (a == false_e_ && false_e_ >= 0) return b;
    if (b == false_e_ && false_e_ >= 0) return a;
    if ((a == true_e_ || b == true_e_) && true_e_ >= 0) return mtrue();
    if (a > b) std::swap(a, b);
    auto it = or_memo_.find({a, b});
    if (it != or_memo_.end()) return it->second;
    int e = acg_.mk_or(a, b);
    or_memo_.emplace(std::make_pair(a, b), e);
    return e;
  }
  int mif(Id p, int then_e, int else_e) {
    if (then_e == else_e) return then_e;
    auto key = std::make_tuple(p, then_e, else_e);
    auto it = if_memo_.find(key);
    if (it != if_memo_.end()) return it->second;
    int e = acg_.mk_ifprop(p, then_e, else_e);
    if_memo_.emplace(std::move(key), e);
    return e;
  }
  int matom(Id q, AtomMode m, const std::vector<Id>& team) {
    auto key = std::make_tuple(q, static_cast<int>(m), team);
    auto it = atom_memo_.find(key);
    if (it != atom_memo_.end()) return it->second;
    int e = acg_.mk_atom(q, m, team);
    atom_memo_.emplace(std::move(key), e);
    return e;
  }

  // ---- guessed propositions -----------------------------------------------

  Id bprop(const FRef& f) {
    std::string key = formula_key(f);
    auto it = bprop_memo_.find(key);
    if (it != bprop_memo_.end()) return it->second;
    Id p = static_cast<Id>(ext_.props.size());
    ext_.props.push_back("@b" + std::to_string(guesses_.size()));
    ext_.finish();
    bprop_memo_.emplace(std::move(key), p);
    guesses_.push_back(p);
    monitors_.push_back(Monitor{p, f, -1, -1});
    return p;
  }

  // Replace maximal strategic subformulas of an NNF path formula by guessed
  // propositions; the result is pure LTL over the extended propositions.
  FRef substitute(const FRef& f) {
    switch (f->kind) {
      case FKind::True:
      case FKind::Prop:
      case FKind::Not:  // NNF literal
        return f;
      case FKind::And:
      case FKind::Or:
      case FKind::Until:
      case FKind::Release:
        return f_bin(f->kind, substitute(f->a), substitute(f->b));
      case FKind::Next:
        return f_un(FKind::Next, substitute(f->a));
      case FKind::Quant:
      case FKind::DQuant:
        return f_prop(bprop(f));
      default:
        fail(ErrorKind::Fragment,
             "unnormalized operator in a path formula: " + formula_key(f));
    }
  }

  // ---- path word automata -------------------------------------------------

  std::size_t path_of(const FRef& psi) {
    std::string key = formula_key(psi);
    auto it = path_memo_.find(key);
    if (it != path_memo_.end()) return it->second;

    PathAut pa;
    collect_props(psi, pa.props);
    sort_unique(pa.props);
    if (pa.props.size() > kMaxPathProps)
      fail(ErrorKind::Guard,
           "path body mentions " + std::to_string(pa.props.size()) +
               " propositions; the letter table is capped at 2^" +
               std::to_string(kMaxPathProps));

    Nbw<std::vector<Id>> nbw = ltl_to_nbw(
        psi, ext_, std::max<std::size_t>(budget_ * 4, std::size_t{1} << 12));
    Dpw<std::vector<Id>> dpw =
        piterman_determinize<std::vector<Id>, VecHash<Id>>(nbw, budget_ + 8);

    const std::size_t nletters = std::size_t{1} << pa.props.size();
    std::vector<std::vector<Id>> letters(nletters);
    for (std::size_t mask = 0; mask < nletters; ++mask)
      for (std::size_t i = 0; i < pa.props.size(); ++i)
        if (mask >> i & 1) letters[mask].push_back(pa.props[i]);

    std::vector<int> disc{dpw.init};
    std::unordered_map<int, int> index{{dpw.init, 0}};
    for (std::size_t qi = 0; qi < disc.size(); ++qi) {
      pa.color.push_back(dpw.color(disc[qi]));
      pa.next.emplace_back(nletters, 0);
      for (std::size_t mask = 0; mask < nletters; ++mask) {
        int t = dpw.step(disc[qi], letters[mask]);
        auto [it2, fresh] = index.try_emplace(t, static_cast<int>(disc.size()));
        if (fresh) {
          disc.push_back(t);
          if (disc.size() > budget_)
            fail(ErrorKind::Guard,
                 "path automaton needs more than " + std::to_string(budget_) +
                     " states after determinization: " + formula_key(psi));
        }
        pa.next[qi][mask] = it2->second;
      }
    }
    max_path_states_ = std::max(max_path_states_, disc.size());

    std::size_t id = paths_.size();
    paths_.push_back(std::move(pa));
    path_memo_.emplace(std::move(key), id);
    return id;
  }

  // ---- branching skeleton -------------------------------------------------

  static std::string skel_key(std::size_t pi, int d, AtomMode m,
                              const std::vector<Id>& team) {
    std::string k = std::to_string(pi) + "/" + std::to_string(d) +
                    (m == AtomMode::Box ? "B" : "D");
    for (Id a : team) k += "," + std::to_string(a);
    return k;
  }

  Id skel_state(std::size_t pi, int d, AtomMode m, const std::vector<Id>& team) {
    std::string key = skel_key(pi, d, m, team);
    auto it = skel_memo_.find(key);
    if (it != skel_memo_.end()) return it->second;
    Id q = acg_.add_state(paths_[pi].color[d],
                          "word " + std::to_string(pi) + " state " +
                              std::to_string(d));
    skel_memo_.emplace(std::move(key), q);  // before delta: self references
    acg_.delta[q] = skel_expr(pi, d, m, team);
    return q;
  }

  // Decision tree over the body's propositions resolving the node label,
  // each leaf spawning the stepped automaton state through one atom.
  int skel_expr(std::size_t pi, int d, AtomMode m, const std::vector<Id>& team) {
    return skel_tree(pi, d, m, team, 0, 0);
  }
  int skel_tree(std::size_t pi, int d, AtomMode m, const std::vector<Id>& team,
                std::size_t i, std::size_t mask) {
    const PathAut& pa = paths_[pi];
    if (i == pa.props.size()) {
      int d2 = pa.next[d][mask];
      return matom(skel_state(pi, d2, m, team), m, team);
    }
    Id p = pa.props[i];
    int without = skel_tree(pi, d, m, team, i + 1, mask);
    int with = skel_tree(pi, d, m, team, i + 1, mask | (std::size_t{1} << i));
    return mif(p, with, without);
  }

  // ---- state-formula skeleton ---------------------------------------------

  int quant_expr(const FRef& f) {
    AtomMode m = f->kind == FKind::Quant ? AtomMode::Box : AtomMode::Diamond;
    FRef psi = substitute(f->a);
    std::size_t pi = path_of(psi);
    return skel_expr(pi, paths_[pi].init, m, f->agents);
  }

  int expr_of(const FRef& f) {
    std::string key = formula_key(f);
    auto it = expr_memo_.find(key);
    if (it != expr_memo_.end()) return it->second;
    int e;
    switch (f->kind) {
      case FKind::True:
        e = mtrue();
        break;
      case FKind::Prop:
        e = mif(f->prop, mtrue(), mfalse());
        break;
      case FKind::Not:
        if (f->a->kind == FKind::True) {
          e = mfalse();
        } else if (f->a->kind == FKind::Prop) {
          e = mif(f->a->prop, mfalse(), mtrue());
        } else {
          fail(ErrorKind::Fragment,
               "negation not at a literal after normalization: " +
                   formula_key(f));
        }
        break;
      case FKind::And:
        e = mand(expr_of(f->a), expr_of(f->b));
        break;
      case FKind::Or:
        e = mor(expr_of(f->a), expr_of(f->b));
        break;
      case FKind::Quant:
      case FKind::DQuant:
        // a state-formula body makes the quantifier vacuous
        e = is_state_formula(f->a) ? expr_of(f->a) : quant_expr(f);
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

// Translate an arbitrary state formula into an alternating automaton over
// the labels extended with guessed propositions: a tree satisfies the
// formula exactly when some guessed extension of its labeling is accepted.
// Path bodies run through determinized word automata, each capped at
// `budget` states.
inline StarAcg atlstar_to_acg(const FRef& phi, const Signature& sig,
                              std::size_t budget = 256) {
  return detail::StarBuilder(sig, budget).run(phi);
}

}  // namespace pdmc
