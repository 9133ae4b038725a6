// parity_game.hpp -- finite max-parity games and a Zielonka solver with
// strategy extraction.
//
// Player 0 wins a play iff the maximal priority seen infinitely often is
// even.  A player stuck at their own position loses immediately; the solver
// totalizes internally (dead ends get an edge into the opponent's paradise),
// so callers may freely leave dead ends in the arena.
#pragma once

#include <vector>

#include "pdmc/base.hpp"

namespace pdmc {

struct ParityGame {
  struct Pos {
    int owner = 0;  // 0 or 1
    int priority = 0;
    std::vector<int> moves;  // successor position indices
  };
  std::vector<Pos> positions;

  int add(int owner, int priority) {
    positions.push_back({owner, priority, {}});
    return static_cast<int>(positions.size()) - 1;
  }
  void link(int from, int to) { positions[from].moves.push_back(to); }
};

struct ParitySolution {
  std::vector<int> winner;    // per position
  std::vector<int> strategy;  // winning move target for the owner at
                              // positions where owner == winner, else -1
};

namespace detail {

// Classic recursive Zielonka over a total game (every position has a move
// inside every subgame that arises, which attractor removal guarantees).
class Zielonka {
 public:
  explicit Zielonka(const ParityGame& g) : g_(g) {
    std::size_t n = g.positions.size();
    winner_.assign(n, -1);
    strat_.assign(n, -1);
  }

  ParitySolution run() {
    std::vector<char> all(g_.positions.size(), 1);
    solve(all);
    return {winner_, strat_};
  }

 private:
  const ParityGame& g_;
  std::vector<int> winner_, strat_;

  // Attractor of `seed` for `player` inside `sub`; records the pulling move
  // for attracted positions owned by `player` (seeds keep their strategy).
  std::vector<char> attract(const std::vector<char>& sub,
                            const std::vector<char>& seed, int player) {
    std::size_t n = g_.positions.size();
    std::vector<char> in = seed;
    std::vector<int> todo;
    for (std::size_t v = 0; v < n; ++v)
      if (in[v]) todo.push_back(static_cast<int>(v));
    std::vector<int> degree(n, 0);  // remaining escapes of opponent positions
    std::vector<std::vector<int>> preds(n);
    for (std::size_t v = 0; v < n; ++v)
      if (sub[v])
        for (int u : g_.positions[v].moves)
          if (sub[u]) {
            preds[u].push_back(static_cast<int>(v));
            if (g_.positions[v].owner != player) ++degree[v];
          }

    while (!todo.empty()) {
      int u = todo.back();
      todo.pop_back();
      for (int v : preds[u]) {
        if (in[v]) continue;
        if (g_.positions[v].owner == player) {
          in[v] = 1;
          strat_[v] = u;
          todo.push_back(v);
        } else if (--degree[v] == 0) {
          in[v] = 1;
          todo.push_back(v);
        }
      }
    }
    return in;
  }

  void solve(const std::vector<char>& sub) {
    int d = -1;
    for (std::size_t v = 0; v < g_.positions.size(); ++v)
      if (sub[v]) d = std::max(d, g_.positions[v].priority);
    if (d < 0) return;
    int i = d & 1;  // player favored by the top priority

    std::vector<char> top(g_.positions.size(), 0);
    for (std::size_t v = 0; v < g_.positions.size(); ++v)
      if (sub[v] && g_.positions[v].priority == d) top[v] = 1;

    std::vector<char> a = attract(sub, top, i);
    std::vector<char> rest = sub;
    for (std::size_t v = 0; v < rest.size(); ++v)
      if (a[v]) rest[v] = 0;
    solve(rest);

    std::vector<char> opp(g_.positions.size(), 0);
    bool opp_any = false;
    for (std::size_t v = 0; v < rest.size(); ++v)
      if (rest[v] && winner_[v] == (1 - i)) {
        opp[v] = 1;
        opp_any = true;
      }

    if (!opp_any) {
      // all of sub is won by i: positions of the top set stay inside sub,
      // attracted ones follow the recorded pulling moves
      for (std::size_t v = 0; v < sub.size(); ++v) {
        if (!sub[v] || !a[v]) continue;
        winner_[v] = static_cast<int>(i);
        if (top[v] && g_.positions[v].owner == i)
          for (int u : g_.positions[v].moves)
            if (sub[u]) {
              strat_[v] = u;
              break;
            }
      }
      return;
    }

    std::vector<char> b = attract(sub, opp, 1 - i);
    std::vector<char> rest2 = sub;
    for (std::size_t v = 0; v < rest2.size(); ++v)
      if (b[v]) rest2[v] = 0;
    solve(rest2);
    for (std::size_t v = 0; v < b.size(); ++v)
      if (b[v]) winner_[v] = 1 - i;
  }
};

}  // namespace detail

inline ParitySolution solve_parity_game(const ParityGame& g) {
  std::size_t n = g.positions.size();
  ParityGame total = g;
  int sink_even = -1, sink_odd = -1;
  for (std::size_t v = 0; v < n; ++v) {
    if (!total.positions[v].moves.empty()) continue;
    if (total.positions[v].owner == 0) {
      if (sink_odd < 0) {
        sink_odd = total.add(1, 1);
        total.link(sink_odd, sink_odd);
      }
      total.link(static_cast<int>(v), sink_odd);
    } else {
      if (sink_even < 0) {
        sink_even = total.add(0, 0);
        total.link(sink_even, sink_even);
      }
      total.link(static_cast<int>(v), sink_even);
    }
  }
  ParitySolution s = detail::Zielonka(total).run();
  s.winner.resize(n);
  s.strategy.resize(n);
  for (std::size_t v = 0; v < n; ++v)
    if (s.winner[v] != g.positions[v].owner ||
        s.strategy[v] >= static_cast<int>(n))
      s.strategy[v] = -1;
  return s;
}

}  // namespace pdmc
