// system_model.hpp -- open pushdown multi-agent systems and their finite
// cousins.
//
// A Pms is the textual-format object: control states, a stack alphabet with an
// implicit never-popped bottom symbol, and a decision table
//     delta : Q x (Gamma + bottom) x full-decisions  ->  (Q x Gamma*) or undef
// The induced infinite concurrent game structure is never materialised; the
// pieces everybody else needs are the per-(q, top) successor lists in a fixed
// canonical order (file declaration order, first occurrence wins), the
// environment/system classification of each (q, top), and bounded unwindings
// with their environment prunings.
//
// Conventions used throughout:
//   * stack words are stored top-first and never contain the bottom symbol;
//   * a Config stores the whole stack top-first with the bottom sentinel as
//     its last element, so the empty stack is the one-element vector;
//   * decisions are vectors "action id per agent" in agent declaration order.
#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <functional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pdmc/base.hpp"

namespace pdmc {

inline constexpr const char* kEnvName = "env";

struct Signature {
  std::vector<std::string> agents;
  std::vector<std::string> actions;
  std::vector<std::string> props;

  std::unordered_map<std::string, Id> agent_index;
  std::unordered_map<std::string, Id> action_index;
  std::unordered_map<std::string, Id> prop_index;

  void finish() {
    agent_index.clear();
    action_index.clear();
    prop_index.clear();
    for (Id i = 0; i < agents.size(); ++i) agent_index[agents[i]] = i;
    for (Id i = 0; i < actions.size(); ++i) action_index[actions[i]] = i;
    for (Id i = 0; i < props.size(); ++i) prop_index[props[i]] = i;
  }
  bool has_env() const { return agent_index.count(kEnvName) != 0; }
  Id env_id() const { return agent_index.at(kEnvName); }
  Id agent(const std::string& name) const {
    auto it = agent_index.find(name);
    if (it == agent_index.end()) fail(ErrorKind::Input, "unknown agent: " + name);
    return it->second;
  }
};

using Decision = std::vector<Id>;   // one action id per agent
using StackWord = std::vector<Id>;  // top-first, bottom-free

enum class Owner { System, Environment };

// Target of one delta entry: replacement word for the popped top symbol.  For
// the bottom symbol the word is pushed above it (the bottom never moves).
struct PmsTarget {
  Id state;
  StackWord push;
  bool operator==(const PmsTarget& o) const {
    return state == o.state && push == o.push;
  }
};

struct Pms {
  Signature sig;
  std::vector<std::string> state_names;
  std::vector<std::vector<Id>> labels;  // per state, sorted prop ids
  Id init_state = 0;
  Id stack_symbols = 0;  // |Gamma|; the bottom sentinel is id stack_symbols

  Id bottom() const { return stack_symbols; }
  bool is_bottom(Id g) const { return g == stack_symbols; }

  struct Entry {
    Decision decision;
    PmsTarget target;
  };
  // rows_[q * (stack_symbols+1) + g] = entries in file declaration order
  std::vector<std::vector<Entry>> rows_;
  std::vector<std::unordered_map<Decision, Id, VecHash<Id>>> row_index_;

  std::size_t row_id(Id q, Id g) const {
    return static_cast<std::size_t>(q) * (stack_symbols + 1) + g;
  }
  const std::vector<Entry>& row(Id q, Id g) const { return rows_[row_id(q, g)]; }

  std::size_t num_states() const { return state_names.size(); }

  void init_tables() {
    std::size_t n = num_states() * (stack_symbols + 1);
    rows_.assign(n, {});
    row_index_.assign(n, {});
    succ_cache_.assign(n, {});
    succ_done_.assign(n, 0);
  }

  // Returns false on duplicate (q, g, decision).
  bool add_entry(Id q, Id g, const Decision& d, PmsTarget t) {
    auto& idx = row_index_[row_id(q, g)];
    if (idx.count(d)) return false;
    idx.emplace(d, static_cast<Id>(rows_[row_id(q, g)].size()));
    rows_[row_id(q, g)].push_back(Entry{d, std::move(t)});
    return true;
  }

  const PmsTarget* lookup(Id q, Id g, const Decision& d) const {
    const auto& idx = row_index_[row_id(q, g)];
    auto it = idx.find(d);
    if (it == idx.end()) return nullptr;
    return &rows_[row_id(q, g)][it->second].target;
  }

  // Size measure of the decision table: entries plus pushed word lengths.
  std::size_t delta_size() const {
    std::size_t s = 0;
    for (const auto& r : rows_)
      for (const auto& e : r) s += 1 + e.target.push.size();
    return s;
  }

  // ---- canonical successor lists ------------------------------------------

  // Distinct (state, word) targets of (q, g), in first-occurrence order of the
  // declaration sequence.  This order fixes the direction numbering used by
  // the bottom-completion encoding and every tree automaton downstream.
  const std::vector<PmsTarget>& next_successors(Id q, Id g) const {
    std::size_t r = row_id(q, g);
    if (!succ_done_[r]) {
      std::vector<PmsTarget> out;
      for (const auto& e : rows_[r]) {
        bool seen = false;
        for (const auto& t : out)
          if (t == e.target) { seen = true; break; }
        if (!seen) out.push_back(e.target);
      }
      succ_cache_[r] = std::move(out);
      succ_done_[r] = 1;
    }
    return succ_cache_[r];
  }

  // Direction (index into next_successors) of each declared entry.
  std::vector<Id> entry_directions(Id q, Id g) const {
    const auto& succ = next_successors(q, g);
    std::vector<Id> dirs;
    dirs.reserve(row(q, g).size());
    for (const auto& e : row(q, g)) {
      for (Id i = 0; i < succ.size(); ++i)
        if (succ[i] == e.target) { dirs.push_back(i); break; }
    }
    return dirs;
  }

  std::size_t branching_degree() const {
    std::size_t k = 1;
    for (Id q = 0; q < num_states(); ++q)
      for (Id g = 0; g <= stack_symbols; ++g)
        k = std::max(k, next_successors(q, g).size());
    return k;
  }

  // ---- control classification ---------------------------------------------

  // Number of distinct projections of the defined decisions onto the given
  // agent subset (sorted agent ids).
  std::size_t available_subdecisions(Id q, Id g,
                                     const std::vector<Id>& team) const {
    std::vector<Decision> seen;
    for (const auto& e : row(q, g)) {
      Decision proj;
      proj.reserve(team.size());
      for (Id a : team) proj.push_back(e.decision[a]);
      bool dup = false;
      for (const auto& s : seen)
        if (s == proj) { dup = true; break; }
      if (!dup) seen.push_back(std::move(proj));
    }
    return seen.size();
  }

  // A pair is System when the environment is passive there (a unique env
  // action is available); otherwise it must be environment-controlled (a
  // unique joint action of everybody else).  Deterministic pairs satisfy both
  // readings and land on System, which induces the same trees.
  Owner classify_control(Id q, Id g) const {
    if (row(q, g).empty())
      fail(ErrorKind::Input,
           "no decision defined at (" + state_names[q] + ", " +
               stack_symbol_name(g) + ")");
    if (!sig.has_env()) return Owner::System;
    Id env = sig.env_id();
    if (available_subdecisions(q, g, {env}) == 1) return Owner::System;
    std::vector<Id> others;
    for (Id a = 0; a < sig.agents.size(); ++a)
      if (a != env) others.push_back(a);
    if (available_subdecisions(q, g, others) == 1) return Owner::Environment;
    fail(ErrorKind::NotOpen,
         "(" + state_names[q] + ", " + stack_symbol_name(g) +
             ") is neither environment-controlled nor environment-passive");
  }

  std::string stack_symbol_name(Id g) const {
    if (is_bottom(g)) return "$";
    return stack_names.at(g);
  }
  std::vector<std::string> stack_names;

  // Checks required by the definition: some decision defined at every pair.
  void validate_total() const {
    for (Id q = 0; q < num_states(); ++q)
      for (Id g = 0; g <= stack_symbols; ++g)
        if (row(q, g).empty())
          fail(ErrorKind::Input,
               "no transition declared at (" + state_names[q] + ", " +
                   stack_symbol_name(g) + ")");
  }
  void validate_open() const {
    for (Id q = 0; q < num_states(); ++q)
      for (Id g = 0; g <= stack_symbols; ++g) (void)classify_control(q, g);
  }

 private:
  mutable std::vector<std::vector<PmsTarget>> succ_cache_;
  mutable std::vector<char> succ_done_;
};

// ---------------------------------------------------------------------------
// configurations of the induced structure

struct Config {
  Id state;
  std::vector<Id> stack;  // top-first; last element is always the bottom

  bool operator==(const Config& o) const {
    return state == o.state && stack == o.stack;
  }
};

inline Config initial_config(const Pms& m) {
  return Config{m.init_state, {m.bottom()}};
}

inline Id top_symbol(const Config& c) { return c.stack.front(); }

// Applies one delta target to a configuration.
inline Config apply_target(const Pms& m, const Config& c, const PmsTarget& t) {
  Config out;
  out.state = t.state;
  out.stack = t.push;
  std::size_t keep_from = m.is_bottom(top_symbol(c)) ? 0 : 1;
  out.stack.insert(out.stack.end(), c.stack.begin() + keep_from, c.stack.end());
  return out;
}

inline std::optional<Config> step(const Pms& m, const Config& c,
                                  const Decision& d) {
  const PmsTarget* t = m.lookup(c.state, top_symbol(c), d);
  if (!t) return std::nullopt;
  return apply_target(m, c, *t);
}

// ---------------------------------------------------------------------------
// finite concurrent game structures (used by the logic oracle and the random
// cross-validation corpora; no stack, same decision conventions)

struct FiniteCgs {
  Signature sig;
  std::vector<std::string> state_names;
  std::vector<std::vector<Id>> labels;
  Id init_state = 0;

  struct Entry {
    Decision decision;
    Id target;
  };
  std::vector<std::vector<Entry>> rows;  // per state, declaration order
  std::vector<std::unordered_map<Decision, Id, VecHash<Id>>> row_index;

  std::size_t num_states() const { return state_names.size(); }
  void init_tables() {
    rows.assign(num_states(), {});
    row_index.assign(num_states(), {});
  }
  bool add_entry(Id q, const Decision& d, Id target) {
    if (row_index[q].count(d)) return false;
    row_index[q].emplace(d, static_cast<Id>(rows[q].size()));
    rows[q].push_back(Entry{d, target});
    return true;
  }
  const Id* lookup(Id q, const Decision& d) const {
    auto it = row_index[q].find(d);
    if (it == row_index[q].end()) return nullptr;
    return &rows[q][it->second].target;
  }

  std::size_t available_subdecisions(Id q, const std::vector<Id>& team) const {
    std::vector<Decision> seen;
    for (const auto& e : rows[q]) {
      Decision proj;
      for (Id a : team) proj.push_back(e.decision[a]);
      bool dup = false;
      for (const auto& s : seen)
        if (s == proj) { dup = true; break; }
      if (!dup) seen.push_back(std::move(proj));
    }
    return seen.size();
  }

  Owner classify_control(Id q) const {
    if (rows[q].empty())
      fail(ErrorKind::Input, "state without decisions: " + state_names[q]);
    if (!sig.has_env()) return Owner::System;
    Id env = sig.env_id();
    if (available_subdecisions(q, {env}) == 1) return Owner::System;
    std::vector<Id> others;
    for (Id a = 0; a < sig.agents.size(); ++a)
      if (a != env) others.push_back(a);
    if (available_subdecisions(q, others) == 1) return Owner::Environment;
    fail(ErrorKind::NotOpen, "state not open: " + state_names[q]);
  }

  std::vector<Id> distinct_successors(Id q) const {
    std::vector<Id> out;
    for (const auto& e : rows[q]) {
      bool seen = false;
      for (Id t : out)
        if (t == e.target) { seen = true; break; }
      if (!seen) out.push_back(e.target);
    }
    return out;
  }
};

// ---------------------------------------------------------------------------
// bounded unwindings and environment prunings
//
// Nodes remember which "source kind" they came from (a (q, top) pair for a
// Pms, a state for a FiniteCgs) so the tree evaluator can reconstruct decision
// availability relative to the retained children.

struct TreeKind {
  std::vector<Id> label;
  Owner owner = Owner::System;
  std::size_t full_degree = 0;
  // For each declared decision: (decision, direction).  Directions index the
  // canonical successor list of the kind.
  std::vector<std::pair<Decision, Id>> decision_dirs;
};

struct PrunedTree {
  struct Node {
    Id kind;  // index into kinds
    std::vector<std::pair<Id, int>> kids;  // (direction, child node) sorted by direction; -1 child = frontier
  };
  std::vector<TreeKind> kinds;
  std::vector<Node> nodes;  // nodes[0] is the root; children appear after parents
  std::size_t arity = 1;    // max full_degree over kinds (k_S for a Pms source)
  int depth = 0;

  const TreeKind& kind_of(const Node& n) const { return kinds[n.kind]; }
};

namespace detail {

struct ConfigHash {
  std::size_t operator()(const Config& c) const {
    std::size_t h = std::hash<Id>{}(c.state);
    for (Id g : c.stack) h = hash_mix(h, g);
    return h;
  }
};

}  // namespace detail

// Maximal unwinding of a Pms to the given depth.  Nodes at depth `depth` are
// leaves (no children recorded).
inline PrunedTree unwind_bounded(const Pms& m, int depth,
                                 bool force_all_system = false) {
  PrunedTree t;
  t.depth = depth;
  Interner<std::vector<Id>, VecHash<Id>> kind_ids;  // key: {q, g}
  auto kind_for = [&](Id q, Id g) -> Id {
    Id k = kind_ids.intern({q, g});
    if (k == t.kinds.size()) {
      TreeKind tk;
      tk.label = m.labels[q];
      tk.owner = force_all_system ? Owner::System : m.classify_control(q, g);
      tk.full_degree = m.next_successors(q, g).size();
      const auto& dirs = m.entry_directions(q, g);
      const auto& row = m.row(q, g);
      for (std::size_t i = 0; i < row.size(); ++i)
        tk.decision_dirs.emplace_back(row[i].decision, dirs[i]);
      t.kinds.push_back(std::move(tk));
      t.arity = std::max(t.arity, t.kinds.back().full_degree);
    }
    return k;
  };

  struct Item {
    Config cfg;
    int node;
    int depth;
  };
  std::vector<Item> work;
  Config c0 = initial_config(m);
  t.nodes.push_back({kind_for(c0.state, top_symbol(c0)), {}});
  work.push_back({c0, 0, 0});
  while (!work.empty()) {
    Item it = work.back();
    work.pop_back();
    if (it.depth == depth) continue;
    const auto& succ = m.next_successors(it.cfg.state, top_symbol(it.cfg));
    for (Id dir = 0; dir < succ.size(); ++dir) {
      Config nc = apply_target(m, it.cfg, succ[dir]);
      int idx = static_cast<int>(t.nodes.size());
      t.nodes.push_back({kind_for(nc.state, top_symbol(nc)), {}});
      t.nodes[it.node].kids.emplace_back(dir, idx);
      work.push_back({nc, idx, it.depth + 1});
    }
    std::sort(t.nodes[it.node].kids.begin(), t.nodes[it.node].kids.end());
  }
  return t;
}

inline PrunedTree unwind_bounded(const FiniteCgs& g, int depth,
                                 bool force_all_system = false) {
  PrunedTree t;
  t.depth = depth;
  std::vector<Id> kind_of_state(g.num_states(), kNoId);
  auto kind_for = [&](Id q) -> Id {
    if (kind_of_state[q] != kNoId) return kind_of_state[q];
    TreeKind tk;
    tk.label = g.labels[q];
    tk.owner = force_all_system ? Owner::System : g.classify_control(q);
    auto succ = g.distinct_successors(q);
    tk.full_degree = succ.size();
    for (const auto& e : g.rows[q]) {
      for (Id i = 0; i < succ.size(); ++i)
        if (succ[i] == e.target) {
          tk.decision_dirs.emplace_back(e.decision, i);
          break;
        }
    }
    kind_of_state[q] = static_cast<Id>(t.kinds.size());
    t.kinds.push_back(std::move(tk));
    t.arity = std::max(t.arity, t.kinds.back().full_degree);
    return kind_of_state[q];
  };

  struct Item {
    Id state;
    int node;
    int depth;
  };
  std::vector<Item> work;
  t.nodes.push_back({kind_for(g.init_state), {}});
  work.push_back({g.init_state, 0, 0});
  while (!work.empty()) {
    Item it = work.back();
    work.pop_back();
    if (it.depth == depth) continue;
    auto succ = g.distinct_successors(it.state);
    for (Id dir = 0; dir < succ.size(); ++dir) {
      int idx = static_cast<int>(t.nodes.size());
      t.nodes.push_back({kind_for(succ[dir]), {}});
      t.nodes[it.node].kids.emplace_back(dir, idx);
      work.push_back({succ[dir], idx, it.depth + 1});
    }
    std::sort(t.nodes[it.node].kids.begin(), t.nodes[it.node].kids.end());
  }
  return t;
}

// Number of prunings of a maximal bounded unwinding: at every environment
// node any nonempty subset of children may be retained, independently.  The
// count is the plain product over environment nodes (choices inside discarded
// subtrees are counted; the universal oracle is insensitive to the
// duplication this causes).
inline double count_prunings(const PrunedTree& t, double cap = 1e18) {
  double total = 1;
  for (const auto& n : t.nodes) {
    if (t.kind_of(n).owner == Owner::Environment && !n.kids.empty()) {
      double choices = std::pow(2.0, static_cast<double>(n.kids.size())) - 1.0;
      total *= choices;
      if (total > cap) return cap;
    }
  }
  return total;
}

// Extracts the subtree selected by `keep`: keep[i] is the retained-children
// bitmask for node i (only consulted at environment nodes; all-ones keeps
// everything).  Produces a fresh compact tree.
inline PrunedTree apply_pruning(const PrunedTree& t,
                                const std::vector<std::uint64_t>& keep) {
  PrunedTree out;
  out.kinds = t.kinds;
  out.arity = t.arity;
  out.depth = t.depth;
  struct Item {
    int src;
    int dst;
  };
  out.nodes.push_back({t.nodes[0].kind, {}});
  std::vector<Item> work{{0, 0}};
  while (!work.empty()) {
    Item it = work.back();
    work.pop_back();
    const auto& n = t.nodes[it.src];
    bool env = t.kind_of(n).owner == Owner::Environment;
    for (std::size_t i = 0; i < n.kids.size(); ++i) {
      if (env && !(keep[it.src] >> i & 1)) continue;
      int idx = static_cast<int>(out.nodes.size());
      out.nodes.push_back({t.nodes[n.kids[i].second].kind, {}});
      out.nodes[it.dst].kids.emplace_back(n.kids[i].first, idx);
      work.push_back({n.kids[i].second, idx});
    }
    std::sort(out.nodes[it.dst].kids.begin(), out.nodes[it.dst].kids.end());
  }
  return out;
}

// Streams every pruning of the maximal tree `t` through `fn`.  Raises a guard
// error if the count exceeds `limit`.  Returns the number emitted.
inline std::size_t enumerate_prunings(
    const PrunedTree& t, const std::function<void(const PrunedTree&)>& fn,
    std::size_t limit = 1u << 20) {
  double count = count_prunings(t, static_cast<double>(limit) + 1);
  if (count > static_cast<double>(limit))
    fail(ErrorKind::Guard, "pruning enumeration exceeds limit");

  std::vector<int> env_nodes;
  for (int i = 0; i < static_cast<int>(t.nodes.size()); ++i)
    if (t.kind_of(t.nodes[i]).owner == Owner::Environment &&
        !t.nodes[i].kids.empty())
      env_nodes.push_back(i);
  for (int i : env_nodes)
    if (t.nodes[i].kids.size() > 63)
      fail(ErrorKind::Guard, "environment node fan-out too large to enumerate");

  std::vector<std::uint64_t> keep(t.nodes.size(), ~0ull);
  // odometer over nonempty subsets at each environment node
  std::vector<std::uint64_t> cur(env_nodes.size(), 1);
  std::size_t emitted = 0;
  while (true) {
    for (std::size_t i = 0; i < env_nodes.size(); ++i) keep[env_nodes[i]] = cur[i];
    fn(apply_pruning(t, keep));
    ++emitted;
    std::size_t j = 0;
    for (; j < env_nodes.size(); ++j) {
      std::uint64_t full =
          (t.nodes[env_nodes[j]].kids.size() == 64)
              ? ~0ull
              : ((1ull << t.nodes[env_nodes[j]].kids.size()) - 1);
      if (cur[j] < full) {
        ++cur[j];
        break;
      }
      cur[j] = 1;
    }
    if (j == env_nodes.size()) break;
    if (env_nodes.empty()) break;
  }
  return emitted;
}

// ---------------------------------------------------------------------------
// bottom-completion encoding: a pruning becomes a complete k-ary tree whose
// missing positions carry a dedicated blank label.  Level-order storage.

struct BotTree {
  std::size_t k = 1;
  int depth = 0;
  // level-order; nullopt = blank position
  std::vector<std::optional<std::vector<Id>>> labels;

  static std::size_t size_for(std::size_t k, int depth) {
    std::size_t total = 0, level = 1;
    for (int d = 0; d <= depth; ++d) {
      total += level;
      level *= k;
    }
    return total;
  }
  std::size_t child(std::size_t pos, std::size_t dir) const {
    return pos * k + 1 + dir;
  }
};

inline BotTree bot_completion_encode(const PrunedTree& t, std::size_t k) {
  BotTree out;
  out.k = k;
  out.depth = t.depth;
  out.labels.assign(BotTree::size_for(k, t.depth), std::nullopt);
  struct Item {
    int node;
    std::size_t pos;
  };
  std::vector<Item> work{{0, 0}};
  out.labels[0] = t.kind_of(t.nodes[0]).label;
  while (!work.empty()) {
    Item it = work.back();
    work.pop_back();
    for (const auto& [dir, kid] : t.nodes[it.node].kids) {
      std::size_t cpos = out.child(it.pos, dir);
      out.labels[cpos] = t.kind_of(t.nodes[kid]).label;
      work.push_back({kid, cpos});
    }
  }
  return out;
}

// Reconstructs the pruning from the blank pattern, relative to the maximal
// tree it was cut from.  Positions that are blank in the encoding but present
// in the maximal tree were pruned away.
inline PrunedTree bot_completion_decode(const PrunedTree& maximal,
                                        const BotTree& enc) {
  std::vector<std::uint64_t> keep(maximal.nodes.size(), 0);
  struct Item {
    int node;
    std::size_t pos;
  };
  std::vector<Item> work{{0, 0}};
  while (!work.empty()) {
    Item it = work.back();
    work.pop_back();
    const auto& kids = maximal.nodes[it.node].kids;
    for (std::size_t i = 0; i < kids.size(); ++i) {
      std::size_t cpos = enc.child(it.pos, kids[i].first);
      if (cpos < enc.labels.size() && enc.labels[cpos].has_value()) {
        keep[it.node] |= 1ull << i;
        work.push_back({kids[i].second, cpos});
      }
    }
  }
  return apply_pruning(maximal, keep);
}

// Blank positions must be closed under descendants.
inline bool bot_region_suffix_closed(const BotTree& enc) {
  for (std::size_t pos = 0; pos < enc.labels.size(); ++pos) {
    if (enc.labels[pos].has_value()) continue;
    for (std::size_t dir = 0; dir < enc.k; ++dir) {
      std::size_t c = enc.child(pos, dir);
      if (c < enc.labels.size() && enc.labels[c].has_value()) return false;
    }
  }
  return true;
}

}  // namespace pdmc
