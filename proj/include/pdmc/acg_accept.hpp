// acg_accept.hpp -- membership of a finite game structure in the language of
// an alternating parity automaton.
//
// Acceptance is decided by a finite max-parity game.  The automaton player
// resolves disjunctions, picks the coalition decision behind every box atom
// and the consistent successor behind every diamond atom; the pathfinder
// resolves conjunctions and the remaining choices.  State positions inherit
// the automaton color, every auxiliary position has color 0, and each cycle
// of the arena passes through a state position, so plays mirror runs.
#pragma once

#include <vector>

#include "pdmc/acg.hpp"
#include "pdmc/base.hpp"
#include "pdmc/eval.hpp"
#include "pdmc/parity_game.hpp"
#include "pdmc/system_model.hpp"

namespace pdmc {
namespace detail {

class AcgMembership {
 public:
  AcgMembership(const ParityAcg& a, const FiniteCgs& g) : a_(a), g_(g) {}

  bool run() {
    int root = pos({kState, a_.init, g_.init_state});
    while (next_ < keys_.size()) expand(static_cast<Id>(next_++));
    ParitySolution sol = solve_parity_game(game_);
    return sol.winner[root] == 0;
  }

 private:
  // key layouts (first component):
  static constexpr Id kState = 0;  // {kState, q, s}
  static constexpr Id kExpr = 1;   // {kExpr, pb, s}
  static constexpr Id kPick = 2;   // {kPick, pb, pick, s}

  const ParityAcg& a_;
  const FiniteCgs& g_;
  ParityGame game_;
  Interner<std::vector<Id>, VecHash<Id>> keys_;
  Interner<Decision, VecHash<Id>> picks_;
  std::size_t next_ = 0;

  int pos(const std::vector<Id>& key) {
    std::size_t before = keys_.size();
    Id id = keys_.intern(key);
    if (id == before) {
      int owner = 0, priority = 0;
      if (key[0] == kState) {
        priority = a_.color[key[1]];
      } else {
        const ParityAcg::Pb& n = a_.pool[key[1]];
        bool box = n.mode == AtomMode::Box;
        switch (n.kind) {
          case ParityAcg::Pb::True_: owner = 1; break;   // pathfinder stuck
          case ParityAcg::Pb::False_: owner = 0; break;  // automaton stuck
          case ParityAcg::Pb::And_: owner = 1; break;
          case ParityAcg::Pb::Or_: owner = 0; break;
          case ParityAcg::Pb::IfProp_: owner = 0; break;
          case ParityAcg::Pb::Atom_:
            // choosing the team decision vs. resolving it
            if (key[0] == kExpr) owner = box ? 0 : 1;
            else owner = box ? 1 : 0;
            break;
        }
      }
      game_.add(owner, priority);
    }
    return static_cast<int>(id);
  }

  void expand(Id v) {
    std::vector<Id> key = keys_.value(v);  // copy: interning may reallocate
    if (key[0] == kState) {
      Id q = key[1], s = key[2];
      game_.link(v, pos({kExpr, static_cast<Id>(a_.delta[q]), s}));
      return;
    }
    const ParityAcg::Pb& n = a_.pool[key[1]];
    if (key[0] == kExpr) {
      Id s = key.back();
      switch (n.kind) {
        case ParityAcg::Pb::True_:
        case ParityAcg::Pb::False_:
          break;  // terminal
        case ParityAcg::Pb::And_:
        case ParityAcg::Pb::Or_:
          game_.link(v, pos({kExpr, static_cast<Id>(n.a), s}));
          game_.link(v, pos({kExpr, static_cast<Id>(n.b), s}));
          break;
        case ParityAcg::Pb::IfProp_: {
          int br = sorted_contains(g_.labels[s], n.prop) ? n.a : n.b;
          game_.link(v, pos({kExpr, static_cast<Id>(br), s}));
          break;
        }
        case ParityAcg::Pb::Atom_: {
          std::vector<Decision> seen;
          for (const auto& e : g_.rows[s]) {
            Decision p = project(e.decision, n.team);
            bool dup = false;
            for (const auto& o : seen)
              if (o == p) { dup = true; break; }
            if (dup) continue;
            seen.push_back(p);
            game_.link(v, pos({kPick, key[1], picks_.intern(p), s}));
          }
          break;
        }
      }
      return;
    }
    // kPick: resolve the chosen team decision against consistent successors
    Id s = key[3];
    Decision da = picks_.value(key[2]);
    std::vector<Id> targets;
    for (const auto& e : g_.rows[s]) {
      if (project(e.decision, n.team) != da) continue;
      bool dup = false;
      for (Id t : targets)
        if (t == e.target) { dup = true; break; }
      if (dup) continue;
      targets.push_back(e.target);
      game_.link(v, pos({kState, n.q, e.target}));
    }
  }
};

}  // namespace detail

// Does the automaton accept the game structure, read from its initial state?
inline bool acg_accepts(const ParityAcg& a, const FiniteCgs& g) {
  return detail::AcgMembership(a, g).run();
}

}  // namespace pdmc
