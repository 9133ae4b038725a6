// eval.hpp -- ground-truth explicit-state evaluation.
//
// Two evaluators share the satisfaction semantics:
//   * finite game structures: full ATL via controllable-predecessor fixpoints
//     (memoryless strategies suffice for each single fixpoint objective);
//   * pruned trees: the X-bounded fragment, with decision availability taken
//     relative to the children actually retained at each node.
// Everything downstream that claims correctness is cross-checked against
// these; they are deliberately simple rather than fast.
#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "pdmc/logic.hpp"
#include "pdmc/system_model.hpp"

namespace pdmc {
namespace detail {

inline Decision project(const Decision& d, const std::vector<Id>& team) {
  Decision out;
  out.reserve(team.size());
  for (Id a : team) out.push_back(d[a]);
  return out;
}

class FiniteEval {
 public:
  explicit FiniteEval(const FiniteCgs& g) : g_(g) {}

  std::vector<char> sat(const FRef& f) {
    std::string key = formula_key(f);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    std::vector<char> v = compute(f);
    memo_.emplace(std::move(key), v);
    return v;
  }

 private:
  const FiniteCgs& g_;
  std::unordered_map<std::string, std::vector<char>> memo_;

  std::vector<char> all(char b) const {
    return std::vector<char>(g_.num_states(), b);
  }
  static std::vector<char> neg(std::vector<char> v) {
    for (auto& x : v) x = !x;
    return v;
  }

  std::vector<Decision> available(Id s, const std::vector<Id>& team) const {
    std::vector<Decision> seen;
    for (const auto& e : g_.rows[s]) {
      Decision p = project(e.decision, team);
      bool dup = false;
      for (const auto& q : seen)
        if (q == p) { dup = true; break; }
      if (!dup) seen.push_back(std::move(p));
    }
    return seen;
  }

  // states from which some available team decision forces the successor into Z
  std::vector<char> cpre(const std::vector<Id>& team,
                         const std::vector<char>& Z) const {
    std::vector<char> out = all(0);
    for (Id s = 0; s < g_.num_states(); ++s) {
      for (const auto& da : available(s, team)) {
        bool good = true;
        for (const auto& e : g_.rows[s])
          if (project(e.decision, team) == da && !Z[e.target]) {
            good = false;
            break;
          }
        if (good) {
          out[s] = 1;
          break;
        }
      }
    }
    return out;
  }

  static std::vector<char> v_and(const std::vector<char>& a,
                                 const std::vector<char>& b) {
    std::vector<char> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] && b[i];
    return out;
  }
  static std::vector<char> v_or(const std::vector<char>& a,
                                const std::vector<char>& b) {
    std::vector<char> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] || b[i];
    return out;
  }

  // least fixpoint  Z = S2 | (S1 & CPre(Z))
  std::vector<char> fix_until(const std::vector<Id>& team,
                              const std::vector<char>& S1,
                              const std::vector<char>& S2) const {
    std::vector<char> Z = S2;
    while (true) {
      std::vector<char> nz = v_or(S2, v_and(S1, cpre(team, Z)));
      if (nz == Z) return Z;
      Z = std::move(nz);
    }
  }
  // greatest fixpoint  Z = S2 & (S1 | CPre(Z))   (release shape; G via S1=false)
  std::vector<char> fix_release(const std::vector<Id>& team,
                                const std::vector<char>& S1,
                                const std::vector<char>& S2) const {
    std::vector<char> Z = S2;
    while (true) {
      std::vector<char> nz = v_and(S2, v_or(S1, cpre(team, Z)));
      if (nz == Z) return Z;
      Z = std::move(nz);
    }
  }

  std::vector<char> quant(const std::vector<Id>& team, const FRef& body,
                          bool dual) {
    // dual quantifier: negate the path formula, evaluate, negate the result
    switch (body->kind) {
      case FKind::Next: {
        std::vector<char> s = sat(body->a);
        if (dual) return neg(cpre(team, neg(std::move(s))));
        return cpre(team, s);
      }
      case FKind::Until: {
        std::vector<char> s1 = sat(body->a), s2 = sat(body->b);
        if (dual)
          return neg(fix_release(team, neg(std::move(s1)), neg(std::move(s2))));
        return fix_until(team, s1, s2);
      }
      case FKind::Release: {
        std::vector<char> s1 = sat(body->a), s2 = sat(body->b);
        if (dual)
          return neg(fix_until(team, neg(std::move(s1)), neg(std::move(s2))));
        return fix_release(team, s1, s2);
      }
      case FKind::Finally: {
        std::vector<char> s = sat(body->a);
        if (dual) return neg(fix_release(team, all(0), neg(std::move(s))));
        return fix_until(team, all(1), s);
      }
      case FKind::Globally: {
        std::vector<char> s = sat(body->a);
        if (dual) return neg(fix_until(team, all(1), neg(std::move(s))));
        return fix_release(team, all(0), s);
      }
      default:
        if (is_state_formula(body)) return sat(body);  // vacuous quantifier
        fail(ErrorKind::Fragment,
             "path formula not in the ATL fragment: " + formula_key(body));
    }
  }

  std::vector<char> compute(const FRef& f) {
    switch (f->kind) {
      case FKind::True: return all(1);
      case FKind::Prop: {
        std::vector<char> out = all(0);
        for (Id s = 0; s < g_.num_states(); ++s)
          out[s] = sorted_contains(g_.labels[s], f->prop);
        return out;
      }
      case FKind::Not: return neg(sat(f->a));
      case FKind::And: return v_and(sat(f->a), sat(f->b));
      case FKind::Or: return v_or(sat(f->a), sat(f->b));
      case FKind::Imply: return v_or(neg(sat(f->a)), sat(f->b));
      case FKind::Quant: return quant(f->agents, f->a, false);
      case FKind::DQuant: return quant(f->agents, f->a, true);
      default:
        fail(ErrorKind::Fragment,
             "temporal operator outside any quantifier: " + formula_key(f));
    }
  }
};

class TreeEval {
 public:
  explicit TreeEval(const PrunedTree& t) : t_(t) {}

  std::vector<char> sat(const FRef& f) {
    std::string key = formula_key(f);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    std::vector<char> v = compute(f);
    memo_.emplace(std::move(key), v);
    return v;
  }

 private:
  const PrunedTree& t_;
  std::unordered_map<std::string, std::vector<char>> memo_;

  std::vector<char> all(char b) const {
    return std::vector<char>(t_.nodes.size(), b);
  }

  // <<A>> X psi at a node: some team decision, available relative to the
  // retained children, whose consistent retained successors all satisfy psi.
  // [[A]] X psi: for every such decision some consistent retained successor
  // satisfies psi.
  std::vector<char> quant_next(const std::vector<Id>& team,
                               const std::vector<char>& S, bool dual) const {
    std::vector<char> out = all(0);
    for (std::size_t n = 0; n < t_.nodes.size(); ++n) {
      const auto& node = t_.nodes[n];
      const auto& kind = t_.kind_of(node);
      auto child_at = [&](Id dir) -> int {
        for (const auto& [d, c] : node.kids)
          if (d == dir) return c;
        return -1;
      };
      std::vector<Decision> cands;
      for (const auto& [d, dir] : kind.decision_dirs) {
        if (child_at(dir) < 0) continue;
        Decision p = project(d, team);
        bool dup = false;
        for (const auto& q : cands)
          if (q == p) { dup = true; break; }
        if (!dup) cands.push_back(std::move(p));
      }
      bool verdict = dual;  // exists-form starts false, forall-form true
      for (const auto& cand : cands) {
        bool all_good = true, some_good = false;
        for (const auto& [d, dir] : kind.decision_dirs) {
          int c = child_at(dir);
          if (c < 0 || project(d, team) != cand) continue;
          if (S[c]) some_good = true;
          else all_good = false;
        }
        if (!dual && all_good) { verdict = true; break; }
        if (dual && !some_good) { verdict = false; break; }
      }
      out[n] = verdict;
    }
    return out;
  }

  std::vector<char> compute(const FRef& f) {
    switch (f->kind) {
      case FKind::True: return all(1);
      case FKind::Prop: {
        std::vector<char> out = all(0);
        for (std::size_t n = 0; n < t_.nodes.size(); ++n)
          out[n] = sorted_contains(t_.kind_of(t_.nodes[n]).label, f->prop);
        return out;
      }
      case FKind::Not: {
        std::vector<char> v = sat(f->a);
        for (auto& x : v) x = !x;
        return v;
      }
      case FKind::And: {
        std::vector<char> a = sat(f->a), b = sat(f->b);
        for (std::size_t i = 0; i < a.size(); ++i) a[i] = a[i] && b[i];
        return a;
      }
      case FKind::Or: {
        std::vector<char> a = sat(f->a), b = sat(f->b);
        for (std::size_t i = 0; i < a.size(); ++i) a[i] = a[i] || b[i];
        return a;
      }
      case FKind::Imply: {
        std::vector<char> a = sat(f->a), b = sat(f->b);
        for (std::size_t i = 0; i < a.size(); ++i) a[i] = !a[i] || b[i];
        return a;
      }
      case FKind::Quant:
      case FKind::DQuant: {
        bool dual = f->kind == FKind::DQuant;
        const FRef& body = f->a;
        if (body->kind == FKind::Next)
          return quant_next(f->agents, sat(body->a), dual);
        if (is_state_formula(body)) return sat(body);
        fail(ErrorKind::Fragment,
             "tree evaluation covers only X under quantifiers: " +
                 formula_key(body));
      }
      default:
        fail(ErrorKind::Fragment,
             "temporal operator outside any quantifier: " + formula_key(f));
    }
  }
};

}  // namespace detail

// Per-state ATL evaluation on a finite game structure.
inline std::vector<char> eval_finite(const FiniteCgs& g, const FRef& f) {
  if (!is_state_formula(f))
    fail(ErrorKind::Fragment, "top-level formula must be a state formula");
  return detail::FiniteEval(g).sat(f);
}

inline bool eval_finite_init(const FiniteCgs& g, const FRef& f) {
  return eval_finite(g, f)[g.init_state];
}

// Root verdict of an X-bounded state formula on a pruned tree.  The X-nesting
// must fit inside the tree depth, otherwise leaf values would leak into the
// answer.
inline bool eval_finite(const PrunedTree& t, const FRef& f, int horizon = -1) {
  if (!is_state_formula(f))
    fail(ErrorKind::Fragment, "top-level formula must be a state formula");
  int d = x_depth(f);
  if (d < 0)
    fail(ErrorKind::Fragment,
         "tree evaluation supports only the X-bounded fragment");
  int limit = horizon >= 0 ? std::min<int>(horizon, t.depth) : t.depth;
  if (d > limit)
    fail(ErrorKind::Fragment,
         "X-nesting " + std::to_string(d) + " exceeds the evaluated depth " +
             std::to_string(limit));
  return detail::TreeEval(t).sat(f)[0];
}

}  // namespace pdmc
