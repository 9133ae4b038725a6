// emptiness.hpp -- emptiness of parity tree automata with pushdown storage.
//
// The automaton and an adversarial pathfinder play on configurations: the
// automaton picks a transition (committing to an input letter), the
// pathfinder picks a direction, and the replacement word of that direction
// is applied to the stack.  The language is nonempty iff the automaton wins
// the resulting parity game from the initial configuration, so emptiness
// reduces to solving a pushdown parity game.
//
// The unbounded stack is handled level by level.  A finite-game position
// carries, besides the control state and the top symbol, a promise vector:
// for every color c, the set of states in which the current frame may be
// popped after an excursion whose maximal color is c.  When a push happens,
// player 0 proposes the promise vector for the new frame and player 1 either
// enters the new level or challenges the proposal by jumping to a promised
// return scenario (emitting the excursion color on the way).  Promise
// vectors inside a level are folded as colors are visited, so a pop checks
// the component at index 0.
//
// Proposing over all vectors is exponential, so player 0 draws proposals
// from a finite pool.  Restricting the proposer is sound for any pool: a
// winning strategy in the restricted game stitches into a winning strategy
// on real configurations.  The pool starts with the empty and the full
// vector and grows by reading canonical vectors off the solved arena (the
// sets of return states player 0 actually wins below, per context and
// color).  The same machinery runs on the dual game -- owners flipped,
// colors shifted by one -- whose player 0 certifies emptiness.  Each round
// is a plain finite parity game; the first side whose player 0 wins the root
// settles the verdict, and a round without growth on a side freezes that
// side.  If both sides freeze undecided the solver refuses with a resource
// error rather than guess.

#pragma once

#include <algorithm>
#include <cstdint>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "pdmc/base.hpp"
#include "pdmc/npta.hpp"
#include "pdmc/parity_game.hpp"

namespace pdmc {

struct EmptinessOpts {
  std::size_t max_positions = 1u << 21;  // per arena, either side
  std::size_t max_rounds = 200;          // solve rounds, both sides combined
  std::size_t max_pool = 2048;           // proposal vectors per side
  std::size_t max_contexts = 1u << 15;   // push contexts per side
  int witness_depth = 4;
  std::size_t witness_nodes = 400;
};

enum class TreeEmptiness { Empty, NonEmpty };

// One node of a witness tree prefix: the letter read, the automaton state,
// the index of the transition used at this node, and one child per
// direction (-1 where the prefix was cut).
struct WitnessNode {
  UpsilonLetter letter;
  int state = 0;
  int move = -1;
  std::vector<int> kids;
};

struct EmptinessResult {
  TreeEmptiness verdict = TreeEmptiness::Empty;
  std::size_t rounds = 0;
  std::size_t positions = 0;  // largest arena solved
  std::size_t pool = 0;       // proposal vectors accumulated, both sides
  std::size_t contexts = 0;   // push contexts demanded, both sides
  std::vector<WitnessNode> witness;  // nonempty iff NonEmpty
};

namespace detail {

// Survey of the automaton reachable from the initial head: distinct state
// colors (for dense recoloring) and the states that pop transitions can
// enter (the universe promise sets draw from).
struct NptaSurvey {
  std::vector<int> colors;        // distinct, ascending
  std::vector<Id> pop_universe;   // sorted
};

inline NptaSurvey survey_npta(const ParityNpta& p, std::size_t head_cap) {
  NptaSurvey sv;
  std::vector<int> colors;
  std::vector<Id> uni;
  Interner<std::vector<Id>, VecHash<Id>> seen;
  std::vector<std::pair<int, Id>> work{{p.init, p.stack_symbols}};
  seen.intern({static_cast<Id>(p.init), p.stack_symbols});
  colors.push_back(p.color(p.init));
  while (!work.empty()) {
    auto [s, g] = work.back();
    work.pop_back();
    if (seen.size() > head_cap)
      fail(ErrorKind::Guard, "automaton survey exceeds the head cap");
    for (const TreeMove& tm : p.moves(s, g)) {
      for (const auto& [r, beta] : tm.kids) {
        colors.push_back(p.color(r));
        std::vector<Id> tops;
        if (beta.empty()) {
          if (g == p.stack_symbols) {
            tops.push_back(g);
          } else {
            uni.push_back(static_cast<Id>(r));
            for (Id ng = 0; ng <= p.stack_symbols; ++ng) tops.push_back(ng);
          }
        } else {
          tops.push_back(beta.front());
        }
        for (Id ng : tops) {
          std::vector<Id> key{static_cast<Id>(r), ng};
          std::size_t before = seen.size();
          if (seen.intern(key) == before) work.push_back({r, ng});
        }
      }
    }
  }
  sort_unique(colors);
  sort_unique(uni);
  sv.colors = std::move(colors);
  sv.pop_universe = std::move(uni);
  return sv;
}

// One side of the emptiness engine: the level game for the automaton's own
// objective (flip = false) or for the pathfinder's (flip = true; owners
// swap and every color shifts up by one, so the dual player 0 pursues
// exactly the plays the primal player 0 loses).
class LevelGame {
 public:
  LevelGame(const ParityNpta& p, const NptaSurvey& sv, bool flip,
            const EmptinessOpts& opts)
      : p_(p), flip_(flip), opts_(opts), uni_(sv.pop_universe) {
    // dense recoloring preserving parity and relative order
    int next = -1;
    for (int c : sv.colors) {
      if (next < 0) next = c % 2;
      else if (next % 2 != c % 2) ++next;
      recolor_[c] = next;
    }
    d_ = (next < 0 ? 0 : next) + (flip_ ? 1 : 0);

    empty_set_ = sets_.intern({});
    full_set_ = sets_.intern(uni_);
    std::vector<Id> ev(d_ + 1, empty_set_);
    empty_vec_ = vecs_.intern(ev);
    add_pool(empty_vec_);
    // Proposals claiming too much at an odd color hand the challenger a
    // winning jump loop, so besides the full vector the pool is seeded with
    // shapes that keep odd claims selective: full up to a color cap, full on
    // even colors only, and every single-scenario vector.
    for (int e = 0; e <= d_; ++e) {
      std::vector<Id> v(d_ + 1, empty_set_);
      for (int c = 0; c <= e; ++c) v[c] = full_set_;
      add_pool(vecs_.intern(v));
    }
    {
      std::vector<Id> v(d_ + 1, empty_set_);
      for (int c = 0; c <= d_; c += 2) v[c] = full_set_;
      add_pool(vecs_.intern(v));
    }
    for (int c = 0; c <= d_; ++c) {
      for (Id r : uni_) {
        std::vector<Id> v(d_ + 1, empty_set_);
        v[c] = sets_.intern({r});
        add_pool(vecs_.intern(v));
      }
    }
  }

  // Build the arena from the current pool, solve it, and read canonical
  // proposal vectors off the solution.  Returns {root won by player 0,
  // pool grew}.
  std::pair<bool, bool> round() {
    build();
    sol_ = solve_parity_game(game_);
    bool grew = false;
    for (std::size_t ci = 0; ci < ctxs_.size(); ++ci) {
      const auto& ctx = ctxs_.value(ci);
      Id gamma = ctx[0], vec = ctx[1];
      std::vector<Id> comp(d_ + 1);
      for (int c = 0; c <= d_; ++c) {
        Id folded = norm(vec, c);
        std::vector<Id> states;
        for (Id r : uni_) {
          auto pos = positions_.find(chk_key(r, gamma, folded));
          if (pos && sol_.winner[*pos] == 0) states.push_back(r);
        }
        comp[c] = sets_.intern(states);
      }
      // the canonical vector of this context, plus color-capped variants so
      // a strategy that never risks high excursions is not forced to offer
      // them as jumps
      if (add_pool(vecs_.intern(comp))) grew = true;
      std::vector<Id> capped(d_ + 1, empty_set_);
      for (int e = 0; e <= d_; ++e) {
        capped[e] = comp[e];
        if (add_pool(vecs_.intern(capped))) grew = true;
      }
    }
    return {sol_.winner[root_] == 0, grew};
  }

  // Stall breaker: widen the pool with pairwise unions of what it already
  // holds.  Sound for any pool; only reached when neither side certified.
  bool escalate() {
    bool grew = false;
    std::vector<Id> snapshot = pool_;
    for (std::size_t i = 0; i < snapshot.size(); ++i) {
      for (std::size_t j = i + 1; j < snapshot.size(); ++j) {
        const auto& a = vecs_.value(snapshot[i]);
        const auto& b = vecs_.value(snapshot[j]);
        std::vector<Id> u(d_ + 1);
        for (int c = 0; c <= d_; ++c)
          u[c] = sets_.intern(set_union(sets_.value(a[c]), sets_.value(b[c])));
        if (add_pool(vecs_.intern(u))) grew = true;
      }
    }
    return grew;
  }

  std::size_t arena_size() const { return game_.positions.size(); }
  std::size_t pool_size() const { return pool_.size(); }
  std::size_t context_count() const { return ctxs_.size(); }

  // Expand a witness tree prefix from the solved primal arena.  Follows the
  // player-0 strategy through transition and proposal choices and descends
  // every direction, maintaining the real stack as a list of frame records
  // so that pops resume at the matching promise context.
  std::vector<WitnessNode> witness() {
    struct Frame {
      Id sym;   // frame symbol
      Id vec;   // promise vector active for this frame
      int run;  // maximal color seen while this frame was topmost
    };
    std::vector<WitnessNode> out;
    struct Task {
      int slot;
      int s;
      Id top;
      Id vec;
      int run;
      std::vector<Frame> below;
      int depth;
    };
    std::vector<Task> work;
    out.push_back({});
    work.push_back({0, p_.init, p_.stack_symbols, empty_vec_, 0, {}, 0});
    while (!work.empty()) {
      Task t = std::move(work.back());
      work.pop_back();
      auto pos = positions_.find(chk_key(t.s, t.top, t.vec));
      if (!pos || sol_.winner[*pos] != 0)
        fail(ErrorKind::Guard, "witness replay left the winning region");
      int dir_pos = sol_.strategy[*pos];
      const auto& dk = positions_.value(dir_pos);
      // {kDir, s, top, folded vec, move index}
      int mi = static_cast<int>(dk[4]);
      const TreeMove& tm = p_.moves(t.s, t.top)[mi];
      Id folded = dk[3];
      int run = std::max(t.run, gcolor(t.s));

      WitnessNode node;
      node.letter = tm.letter;
      node.state = t.s;
      node.move = mi;
      node.kids.assign(tm.kids.size(), -1);
      if (t.depth >= opts_.witness_depth) {
        out[t.slot] = std::move(node);
        continue;
      }

      for (std::size_t i = 0; i < tm.kids.size(); ++i) {
        if (out.size() >= opts_.witness_nodes) break;
        const auto& [r, beta] = tm.kids[i];
        Task kid;
        kid.slot = static_cast<int>(out.size());
        kid.s = r;
        kid.depth = t.depth + 1;
        kid.below = t.below;
        if (beta.empty()) {
          if (t.top == p_.stack_symbols) {  // bottom is never popped
            kid.top = t.top;
            kid.vec = folded;
            kid.run = run;
          } else {  // pop: resume below under the folded promise
            Frame fr = kid.below.back();
            kid.below.pop_back();
            kid.top = fr.sym;
            kid.vec = norm(fr.vec, run);
            kid.run = std::max(fr.run, run);
          }
        } else {
          // rewrite, then push the rest of the word following the strategy
          // through the proposal positions
          Id below_sym;
          Id below_vec = folded;
          int j;
          if (t.top == p_.stack_symbols) {
            below_sym = t.top;
            j = static_cast<int>(beta.size());
          } else {
            below_sym = beta.back();
            j = static_cast<int>(beta.size()) - 1;
          }
          int below_run = run;
          if (j == 0) {  // plain top rewrite
            kid.top = beta[0];
            kid.vec = folded;
            kid.run = run;
          } else {
            while (true) {
              auto pk = positions_.find(
                  prop_key(t.s, t.top, mi, static_cast<Id>(i), j, below_sym,
                           below_vec));
              if (!pk || sol_.winner[*pk] != 0)
                fail(ErrorKind::Guard,
                     "witness replay left the winning region");
              int choice = sol_.strategy[*pk];
              Id proposal = positions_.value(choice)[8];
              kid.below.push_back({below_sym, below_vec, below_run});
              below_sym = beta[j - 1];
              below_vec = proposal;
              below_run = 0;
              if (--j == 0) break;
            }
            kid.top = beta[0];
            kid.vec = below_vec;
            kid.run = 0;
          }
        }
        node.kids[i] = kid.slot;
        out.push_back({});
        work.push_back(std::move(kid));
      }
      out[t.slot] = std::move(node);
    }
    return out;
  }

 private:
  enum Tag : Id { kChk = 0, kDir = 1, kProp = 2, kChoice = 3, kRet = 4 };

  const ParityNpta& p_;
  bool flip_;
  EmptinessOpts opts_;
  std::vector<Id> uni_;
  std::unordered_map<int, int> recolor_;
  int d_ = 0;

  Interner<std::vector<Id>, VecHash<Id>> sets_;  // sorted state sets
  Interner<std::vector<Id>, VecHash<Id>> vecs_;  // d_+1 set ids
  Id empty_set_ = 0, full_set_ = 0, empty_vec_ = 0;
  std::unordered_map<std::uint64_t, Id> norm_memo_;

  std::vector<Id> pool_;  // proposal vector ids
  std::unordered_set<Id> pool_seen_;
  Interner<std::vector<Id>, VecHash<Id>> ctxs_;  // {below symbol, below vec}

  ParityGame game_;
  Interner<std::vector<Id>, VecHash<Id>> positions_;
  std::vector<Id> worklist_;
  ParitySolution sol_;
  int root_ = 0, sink_win_ = 0, sink_lose_ = 0;

  int gcolor(int s) const {
    auto it = recolor_.find(p_.color(s));
    if (it == recolor_.end())
      fail(ErrorKind::Guard, "state color missing from the survey");
    return it->second + (flip_ ? 1 : 0);
  }

  bool add_pool(Id vec) {
    if (pool_seen_.count(vec)) return false;
    if (pool_.size() >= opts_.max_pool)
      fail(ErrorKind::Guard, "proposal pool limit exceeded");
    pool_seen_.insert(vec);
    pool_.push_back(vec);
    return true;
  }

  Id norm(Id vec, int c) {
    if (c == 0) return vec;
    std::uint64_t key = (static_cast<std::uint64_t>(vec) << 16) |
                        static_cast<std::uint64_t>(c);
    auto it = norm_memo_.find(key);
    if (it != norm_memo_.end()) return it->second;
    const auto& v = vecs_.value(vec);
    std::vector<Id> folded(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
      folded[i] = v[std::max<std::size_t>(i, static_cast<std::size_t>(c))];
    Id id = vecs_.intern(folded);
    norm_memo_[key] = id;
    return id;
  }

  bool in_set(Id set, Id r) const {
    const auto& s = sets_.value(set);
    return std::binary_search(s.begin(), s.end(), r);
  }

  std::vector<Id> chk_key(int s, Id top, Id vec) const {
    return {kChk, static_cast<Id>(s), top, vec};
  }
  std::vector<Id> prop_key(int s, Id top, int mi, Id dir, int j, Id bsym,
                           Id bvec) const {
    return {kProp, static_cast<Id>(s), top, static_cast<Id>(mi), dir,
            static_cast<Id>(j), bsym, bvec};
  }

  int pos_of(const std::vector<Id>& key) {
    std::size_t before = positions_.size();
    Id id = positions_.intern(key);
    if (id == before) {
      if (positions_.size() >= opts_.max_positions)
        fail(ErrorKind::Guard, "arena position limit exceeded");
      int owner = 0, prio = 0;
      switch (key[0]) {
        case kChk:
          owner = flip_ ? 1 : 0;
          prio = gcolor(static_cast<int>(key[1]));
          break;
        case kDir:
          owner = flip_ ? 0 : 1;
          break;
        case kProp:
          owner = 0;
          break;
        case kChoice:
          owner = 1;
          break;
        case kRet:
          owner = 0;
          prio = static_cast<int>(key[4]);
          break;
      }
      int gid = game_.add(owner, prio);
      (void)gid;
      worklist_.push_back(id);
      if (key[0] == kProp) demand(key[6], key[7]);
    }
    return static_cast<int>(id);
  }

  // Contexts seen at proposal positions; justification positions for every
  // (color, return state) are rooted so the canonical vectors can be read
  // off the solution.
  void demand(Id bsym, Id bvec) {
    std::size_t before = ctxs_.size();
    Id id = ctxs_.intern({bsym, bvec});
    if (id != before) return;
    if (ctxs_.size() >= opts_.max_contexts)
      fail(ErrorKind::Guard, "push context limit exceeded");
    for (int c = 0; c <= d_; ++c) {
      Id folded = norm(bvec, c);
      for (Id r : uni_) pos_of(chk_key(static_cast<int>(r), bsym, folded));
    }
  }

  void build() {
    game_ = ParityGame{};
    positions_ = {};
    worklist_.clear();
    sink_win_ = game_.add(1, 0);   // player 1 stuck: player 0 wins
    sink_lose_ = game_.add(0, 0);  // player 0 stuck: player 0 loses
    positions_.intern({kRet + 1, 0});  // burn ids 0/1 to match the sinks
    positions_.intern({kRet + 1, 1});
    root_ = pos_of(chk_key(p_.init, p_.stack_symbols, empty_vec_));
    // re-demand contexts from earlier rounds so their justification
    // positions exist even if the new arena reaches them differently
    Interner<std::vector<Id>, VecHash<Id>> old_ctxs = std::move(ctxs_);
    ctxs_ = {};
    for (std::size_t i = 0; i < old_ctxs.size(); ++i) {
      const auto& c = old_ctxs.value(i);
      demand(c[0], c[1]);
    }
    while (!worklist_.empty()) {
      Id id = worklist_.back();
      worklist_.pop_back();
      std::vector<Id> key = positions_.value(id);  // copy: interner grows
      expand(static_cast<int>(id), key);
    }
  }

  void expand(int id, const std::vector<Id>& key) {
    switch (key[0]) {
      case kChk: {
        int s = static_cast<int>(key[1]);
        Id top = key[2];
        Id folded = norm(key[3], gcolor(s));
        const auto& mv = p_.moves(s, top);
        for (std::size_t mi = 0; mi < mv.size(); ++mi)
          game_.link(id, pos_of({kDir, key[1], top, folded,
                                 static_cast<Id>(mi)}));
        break;  // no transition: stuck, the automaton loses here
      }
      case kDir: {
        int s = static_cast<int>(key[1]);
        Id top = key[2], vec = key[3];
        int mi = static_cast<int>(key[4]);
        const TreeMove& tm = p_.moves(s, top)[mi];
        for (std::size_t i = 0; i < tm.kids.size(); ++i) {
          const auto& [r, beta] = tm.kids[i];
          if (beta.empty()) {
            if (top == p_.stack_symbols) {
              game_.link(id, pos_of(chk_key(r, top, vec)));
            } else {
              game_.link(id, in_set(vecs_.value(vec)[0], static_cast<Id>(r))
                                 ? sink_win_
                                 : sink_lose_);
            }
          } else if (beta.size() == 1 && top != p_.stack_symbols) {
            game_.link(id, pos_of(chk_key(r, beta[0], vec)));
          } else {
            Id bsym = top == p_.stack_symbols ? top : beta.back();
            int j = static_cast<int>(beta.size()) -
                    (top == p_.stack_symbols ? 0 : 1);
            game_.link(id, pos_of(prop_key(s, top, mi, static_cast<Id>(i), j,
                                           bsym, vec)));
          }
        }
        break;
      }
      case kProp: {
        for (Id t : pool_) {
          std::vector<Id> ck = key;
          ck[0] = kChoice;
          ck.push_back(t);
          game_.link(id, pos_of(ck));
        }
        break;
      }
      case kChoice: {
        int s = static_cast<int>(key[1]);
        Id top = key[2];
        int mi = static_cast<int>(key[3]);
        Id dir = key[4];
        int j = static_cast<int>(key[5]);
        Id bsym = key[6], bvec = key[7], proposal = key[8];
        const TreeMove& tm = p_.moves(s, top)[mi];
        const StackWord& beta = tm.kids[dir].second;
        int r = tm.kids[dir].first;
        // inside: the next frame of the word, or the final control
        if (j == 1) {
          game_.link(id, pos_of(chk_key(r, beta[0], proposal)));
        } else {
          game_.link(id, pos_of(prop_key(s, top, mi, dir, j - 1, beta[j - 1],
                                         proposal)));
        }
        // challenges: jump to a promised return scenario
        const auto& pv = vecs_.value(proposal);
        for (int c = 0; c <= d_; ++c) {
          for (Id ret : sets_.value(pv[c])) {
            Id folded = norm(bvec, c);
            game_.link(id, pos_of({kRet, ret, bsym, folded,
                                   static_cast<Id>(c)}));
          }
        }
        break;
      }
      case kRet: {
        game_.link(id, pos_of(chk_key(static_cast<int>(key[1]), key[2],
                                      key[3])));
        break;
      }
      default:
        break;  // sink placeholders
    }
  }
};

}  // namespace detail

inline EmptinessResult check_emptiness(const ParityNpta& p,
                                       const EmptinessOpts& opts = {}) {
  detail::NptaSurvey sv = detail::survey_npta(p, opts.max_positions);
  detail::LevelGame primal(p, sv, false, opts);
  detail::LevelGame dual(p, sv, true, opts);
  EmptinessResult res;
  bool primal_live = true, dual_live = true;
  while (res.rounds < opts.max_rounds) {
    if (primal_live) {
      ++res.rounds;
      auto [won, grew] = primal.round();
      res.positions = std::max(res.positions, primal.arena_size());
      if (won) {
        res.verdict = TreeEmptiness::NonEmpty;
        res.pool = primal.pool_size() + dual.pool_size();
        res.contexts = primal.context_count() + dual.context_count();
        if (opts.witness_nodes > 0) res.witness = primal.witness();
        return res;
      }
      primal_live = grew;
    }
    if (dual_live) {
      ++res.rounds;
      auto [won, grew] = dual.round();
      res.positions = std::max(res.positions, dual.arena_size());
      if (won) {
        res.verdict = TreeEmptiness::Empty;
        res.pool = primal.pool_size() + dual.pool_size();
        res.contexts = primal.context_count() + dual.context_count();
        return res;
      }
      dual_live = grew;
    }
    if (!primal_live && !dual_live) {
      primal_live = primal.escalate();
      dual_live = dual.escalate();
      if (!primal_live && !dual_live)
        fail(ErrorKind::Guard,
             "proposal pools stabilized without settling emptiness");
    }
  }
  fail(ErrorKind::Guard, "emptiness round limit exceeded");
}

}  // namespace pdmc
