// npta.hpp -- nondeterministic parity tree automata over complete k-ary
// trees, with and without a pushdown store.
//
// The transition interface is option-based: moves(state, top) lists every
// enabled (letter, successor tuple) pair, where a tuple assigns each of the k
// directions a successor state and a replacement word for the popped top
// symbol (same convention as PmsTarget: top-first, bottom-free, and at the
// bottom sentinel the word is pushed above it).  Stack-free automata read a
// letter instead and return bare state tuples.
//
// Besides the two shells this header builds the three automata the checker
// composes:
//   * build_pwf        -- accepts annotated bottom-completed environment
//                         prunings whose move annotations are locally
//                         justified against an alternating automaton;
//   * build_acc_nta    -- runs a deterministic parity word automaton down
//                         every branch, with blank subtrees auto-accepted;
//   * intersect / project -- product with a register pair that turns the two
//                         parity conditions into one, and letter projection.
#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <memory>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pdmc/acg.hpp"
#include "pdmc/annotations.hpp"
#include "pdmc/base.hpp"
#include "pdmc/system_model.hpp"
#include "pdmc/word_automata.hpp"

namespace pdmc {

// ---------------------------------------------------------------------------
// shells

struct TreeMove {
  UpsilonLetter letter;
  // per direction: successor state and replacement word for the popped top
  std::vector<std::pair<int, StackWord>> kids;

  bool operator==(const TreeMove& o) const {
    return letter == o.letter && kids == o.kids;
  }
};

struct ParityNpta {
  int arity = 1;
  int init = 0;
  Id stack_symbols = 0;  // bottom sentinel id = stack_symbols
  std::function<int(int)> color;
  std::function<std::size_t()> num_states;  // discovered so far
  std::function<const std::vector<TreeMove>&(int, Id)> moves;  // (state, top)
};

struct ParityNta {
  int arity = 1;
  int init = 0;
  std::function<int(int)> color;
  std::function<std::size_t()> num_states;
  // all successor tuples enabled on this letter
  std::function<std::vector<std::vector<int>>(int, const UpsilonLetter&)>
      moves;
};

// Reachable-size measures.  Pops are followed conservatively (any symbol may
// be exposed), so the numbers upper-bound the truly reachable part.
struct NptaStats {
  std::size_t heads = 0;     // distinct (state, top) pairs visited
  std::size_t entries = 0;   // total moves over those heads
  std::size_t push_len = 0;  // total replacement-word length over all moves
  std::size_t states = 0;    // states discovered by the traversal
  int max_color = 0;
};

inline NptaStats measure_npta(const ParityNpta& p,
                              std::size_t head_cap = 1u << 20) {
  NptaStats st;
  std::vector<Id> tops(p.stack_symbols + 1);
  for (Id g = 0; g <= p.stack_symbols; ++g) tops[g] = g;

  Interner<std::vector<Id>, VecHash<Id>> seen;       // {state, top}
  Interner<std::vector<Id>, VecHash<Id>> states;     // {state}
  std::vector<std::vector<Id>> work;
  work.push_back({static_cast<Id>(p.init), p.stack_symbols});
  seen.intern(work.back());
  while (!work.empty()) {
    std::vector<Id> head = work.back();
    work.pop_back();
    if (seen.size() > head_cap)
      fail(ErrorKind::Guard, "tree automaton traversal exceeds head cap");
    int q = static_cast<int>(head[0]);
    Id g = head[1];
    std::size_t sb = states.size();
    if (states.intern({head[0]}) == sb)
      st.max_color = std::max(st.max_color, p.color(q));
    ++st.heads;
    const auto& mv = p.moves(q, g);
    st.entries += mv.size();
    for (const TreeMove& t : mv) {
      for (const auto& [s, beta] : t.kids) {
        st.push_len += beta.size();
        std::vector<Id> nexts;
        if (beta.empty()) {
          nexts = tops;  // pop: anything may be exposed
        } else {
          nexts.push_back(beta.front());
        }
        for (Id ng : nexts) {
          std::vector<Id> nh{static_cast<Id>(s), ng};
          std::size_t before = seen.size();
          if (seen.intern(nh) == before) work.push_back(nh);
        }
        sb = states.size();
        if (states.intern({static_cast<Id>(s)}) == sb)
          st.max_color = std::max(st.max_color, p.color(s));
      }
    }
  }
  st.states = states.size();
  return st;
}

// ---------------------------------------------------------------------------
// decision consistency
//
// A direction set X (indices into next_successors(q, g), nonempty) is
// consistent with an obligation of mode/team at (q, g) when
//   Box:     some available team decision has exactly X as the directions of
//            the full decisions extending it;
//   Diamond: every available team decision has a consistent direction inside
//            X, and a choice of one such direction per team decision can
//            cover X (each x in X needs its own witness decision).

namespace detail {

struct TeamView {
  std::vector<Decision> sub;                // distinct team projections
  std::vector<std::vector<Id>> dirs;        // per projection: sorted directions
};

inline TeamView team_view(const Pms& m, Id q, Id g,
                          const std::vector<Id>& team) {
  TeamView v;
  const auto& row = m.row(q, g);
  const auto dirs = m.entry_directions(q, g);
  for (std::size_t i = 0; i < row.size(); ++i) {
    Decision proj;
    proj.reserve(team.size());
    for (Id a : team) proj.push_back(row[i].decision[a]);
    std::size_t at = v.sub.size();
    for (std::size_t j = 0; j < v.sub.size(); ++j)
      if (v.sub[j] == proj) { at = j; break; }
    if (at == v.sub.size()) {
      v.sub.push_back(std::move(proj));
      v.dirs.emplace_back();
    }
    v.dirs[at].push_back(dirs[i]);
  }
  for (auto& d : v.dirs) sort_unique(d);
  return v;
}

// Matching saturating the X side of the bipartite graph "x compatible with
// team decision j iff x is one of j's directions".
inline bool saturates(const std::vector<std::vector<Id>>& dec_dirs,
                      const std::vector<Id>& X) {
  std::vector<int> owner(dec_dirs.size(), -1);  // decision -> index into X
  std::function<bool(int, std::vector<char>&)> tryx =
      [&](int xi, std::vector<char>& used) {
        for (std::size_t j = 0; j < dec_dirs.size(); ++j) {
          if (used[j] || !sorted_contains(dec_dirs[j], X[xi])) continue;
          used[j] = 1;
          if (owner[j] < 0 || tryx(owner[j], used)) {
            owner[j] = xi;
            return true;
          }
        }
        return false;
      };
  for (std::size_t xi = 0; xi < X.size(); ++xi) {
    std::vector<char> used(dec_dirs.size(), 0);
    if (!tryx(static_cast<int>(xi), used)) return false;
  }
  return true;
}

}  // namespace detail

inline bool move_consistent(const Pms& m, Id q, Id g, AtomMode mode,
                            const std::vector<Id>& team,
                            const std::vector<Id>& X) {
  if (X.empty()) return false;
  std::size_t k = m.next_successors(q, g).size();
  for (Id x : X)
    if (x >= k) return false;
  detail::TeamView v = detail::team_view(m, q, g, team);
  if (mode == AtomMode::Box) {
    for (const auto& d : v.dirs)
      if (d == X) return true;
    return false;
  }
  for (const auto& d : v.dirs) {
    bool hit = false;
    for (Id x : X)
      if (sorted_contains(d, x)) { hit = true; break; }
    if (!hit) return false;
  }
  return detail::saturates(v.dirs, X);
}

inline bool move_consistent(const Pms& m, Id q, Id g, const Move& eta,
                            const AtomTable& at, const std::vector<Id>& X) {
  return move_consistent(m, q, g, at.mode(eta.atom), at.team(eta.atom), X);
}

// Every consistent direction set for the given mode/team at (q, g).
inline std::vector<std::vector<Id>> consistent_direction_sets(
    const Pms& m, Id q, Id g, AtomMode mode, const std::vector<Id>& team) {
  std::vector<std::vector<Id>> out;
  std::size_t k = m.next_successors(q, g).size();
  if (mode == AtomMode::Box) {
    detail::TeamView v = detail::team_view(m, q, g, team);
    for (const auto& d : v.dirs) {
      bool dup = false;
      for (const auto& o : out)
        if (o == d) { dup = true; break; }
      if (!dup) out.push_back(d);
    }
    return out;
  }
  if (k > 12)
    fail(ErrorKind::Guard, "direction set enumeration over fan-out > 12");
  for (std::uint64_t mask = 1; mask < (1ull << k); ++mask) {
    std::vector<Id> X;
    for (std::size_t i = 0; i < k; ++i)
      if (mask >> i & 1) X.push_back(static_cast<Id>(i));
    if (move_consistent(m, q, g, mode, team, X)) out.push_back(std::move(X));
  }
  return out;
}

// ---------------------------------------------------------------------------
// annotation splitting
//
// All ways to distribute the moves of `an` over the k = |next_successors|
// directions such that every move's direction set is consistent.  Moves are
// independent, so the result is the cartesian product of the per-move
// consistent direction sets; a tuple assigns direction i the annotation
// { eta : i in X_eta }.

// Keep only the inclusion-minimal sets of a menu.  A smaller direction set
// spawns fewer downstream obligations, and every consistent set contains a
// minimal consistent one, so dropping the non-minimal choices changes neither
// acceptance after projection nor emptiness of the final product.
inline void keep_minimal_sets(std::vector<std::vector<Id>>& sets) {
  auto subset = [](const std::vector<Id>& a, const std::vector<Id>& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
  };
  std::vector<std::vector<Id>> out;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    bool keep = true;
    for (std::size_t j = 0; j < sets.size() && keep; ++j)
      if (j != i && subset(sets[j], sets[i]) && sets[j] != sets[i]) keep = false;
    // among equal sets (none here: menus are deduped) keep the first
    if (keep) out.push_back(sets[i]);
  }
  sets = std::move(out);
}

inline std::vector<std::vector<Annotation>> cons_tuples(const Pms& m, Id q,
                                                        Id g,
                                                        const Annotation& an,
                                                        const AtomTable& at) {
  std::size_t k = m.next_successors(q, g).size();
  std::vector<std::vector<std::vector<Id>>> choices;  // per move
  choices.reserve(an.size());
  for (const Move& eta : an) {
    auto sets = consistent_direction_sets(m, q, g, at.mode(eta.atom),
                                          at.team(eta.atom));
    if (sets.empty()) return {};
    keep_minimal_sets(sets);
    choices.push_back(std::move(sets));
  }
  std::vector<std::vector<Annotation>> out;
  std::vector<std::size_t> pick(an.size(), 0);
  while (true) {
    if (out.size() >= (1u << 14))
      fail(ErrorKind::Guard, "annotation split enumeration exceeds 16384");
    std::vector<Annotation> tuple(k);
    for (std::size_t mi = 0; mi < an.size(); ++mi)
      for (Id dir : choices[mi][pick[mi]]) tuple[dir].push_back(an[mi]);
    out.push_back(std::move(tuple));  // moves were sorted, so each part is too
    std::size_t j = 0;
    for (; j < pick.size(); ++j) {
      if (++pick[j] < choices[j].size()) break;
      pick[j] = 0;
    }
    if (j == pick.size()) break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// the well-formedness automaton
//
// States are (pms state, expected inherited annotation, phase) with four
// phases: the root, live nodes (must read a real letter), optional nodes
// (free to be blank from here on), and blank nodes (read the filler forever).
// A live or root node reading (label, own, inh) must have inh equal to the
// expected annotation; own must justify exactly the obligations passed down
// (targets of inh, or the automaton's initial state at the root), each via a
// minimal satisfying atom set of its transition expression under the label;
// own is then split consistently over the real successors.  System nodes keep
// every successor live; environment nodes pick one live successor and leave
// the rest optional.  Directions beyond the local fan-out pad with blanks.
// All states have color 0: acceptance is plain survival.

namespace detail {

enum PwfPhase : Id { kPwfLive = 0, kPwfAny = 1, kPwfBlank = 2, kPwfRoot = 3 };

// Atoms occurring in expression e once label branches are resolved.
inline void collect_expr_atoms(const ParityAcg& a, const AtomTable& at, int e,
                               const std::vector<Id>& label,
                               std::vector<Id>& out) {
  const ParityAcg::Pb& n = a.pool[e];
  switch (n.kind) {
    case ParityAcg::Pb::True_:
    case ParityAcg::Pb::False_:
      return;
    case ParityAcg::Pb::Atom_:
      out.push_back(at.pool_atom[e]);
      return;
    case ParityAcg::Pb::And_:
    case ParityAcg::Pb::Or_:
      collect_expr_atoms(a, at, n.a, label, out);
      collect_expr_atoms(a, at, n.b, label, out);
      return;
    case ParityAcg::Pb::IfProp_:
      collect_expr_atoms(a, at, sorted_contains(label, n.prop) ? n.a : n.b,
                         label, out);
      return;
  }
}

// Minimal atom sets satisfying e under the label.  Discharged expressions
// yield the empty set; unsatisfiable ones yield nothing.
inline std::vector<std::vector<Id>> minimal_models(const ParityAcg& a,
                                                   const AtomTable& at, int e,
                                                   const std::vector<Id>& label) {
  std::vector<Id> atoms;
  collect_expr_atoms(a, at, e, label, atoms);
  sort_unique(atoms);
  if (atoms.size() > 16)
    fail(ErrorKind::Guard, "transition expression over more than 16 atoms");
  std::vector<std::uint64_t> masks;
  masks.reserve(1ull << atoms.size());
  for (std::uint64_t mk = 0; mk < (1ull << atoms.size()); ++mk)
    masks.push_back(mk);
  std::stable_sort(masks.begin(), masks.end(),
                   [](std::uint64_t x, std::uint64_t y) {
                     return __builtin_popcountll(x) < __builtin_popcountll(y);
                   });
  std::vector<std::vector<Id>> out;
  std::vector<std::uint64_t> kept;
  for (std::uint64_t mk : masks) {
    bool covered = false;
    for (std::uint64_t km : kept)
      if ((km & mk) == km) { covered = true; break; }
    if (covered) continue;
    std::vector<Id> set;
    for (std::size_t i = 0; i < atoms.size(); ++i)
      if (mk >> i & 1) set.push_back(atoms[i]);
    if (pb_models(a, at, e, label, set)) {
      kept.push_back(mk);
      out.push_back(std::move(set));
    }
  }
  return out;
}

struct PwfCore {
  Pms m;
  ParityAcg a;
  AtomTable at;
  std::vector<Id> guess_props;  // sorted; labels range over 2^guess freely
  bool all_system = false;
  int k = 1;
  Id empty_ann = 0;

  Interner<std::vector<Id>, VecHash<Id>> anns;  // flattened (q, atom) pairs
  std::vector<Annotation> ann_of;
  Interner<std::vector<Id>, VecHash<Id>> states;  // {q, annId, phase}
  std::unordered_map<std::uint64_t, std::vector<TreeMove>> moves_memo;
  std::unordered_map<std::uint64_t, std::vector<std::vector<Id>>> cons_memo;

  PwfCore(const Pms& pm, const ParityAcg& pa, std::vector<Id> guess,
          bool force_system)
      : m(pm), a(pa), at(pa), guess_props(std::move(guess)),
        all_system(force_system) {
    sort_unique(guess_props);
    if (guess_props.size() > 10)
      fail(ErrorKind::Guard, "more than 10 guessed label propositions");
    k = static_cast<int>(m.branching_degree());
    empty_ann = intern_ann({});
  }

  Id intern_ann(const Annotation& an) {
    std::vector<Id> flat;
    flat.reserve(an.size() * 2);
    for (const Move& mv : an) {
      flat.push_back(mv.q);
      flat.push_back(mv.atom);
    }
    Id id = anns.intern(flat);
    if (id == ann_of.size()) ann_of.push_back(an);
    return id;
  }

  Id state_id(Id q, Id annId, Id phase) {
    Id id = states.intern({q, annId, phase});
    if (states.size() > (1u << 20))
      fail(ErrorKind::Guard, "well-formedness automaton state explosion");
    return id;
  }

  const std::vector<std::vector<Id>>& splits(Id q, Id g, Id annId) {
    std::uint64_t key =
        ((static_cast<std::uint64_t>(q) * (m.stack_symbols + 1) + g) << 32) |
        annId;
    auto it = cons_memo.find(key);
    if (it != cons_memo.end()) return it->second;
    std::vector<std::vector<Id>> ids;
    for (const auto& tuple : cons_tuples(m, q, g, ann_of[annId], at)) {
      std::vector<Id> t;
      t.reserve(tuple.size());
      for (const Annotation& part : tuple) t.push_back(intern_ann(part));
      ids.push_back(std::move(t));
    }
    return cons_memo.emplace(key, std::move(ids)).first->second;
  }

  const std::vector<TreeMove>& moves(int s, Id g) {
    std::uint64_t key =
        static_cast<std::uint64_t>(s) * (m.stack_symbols + 1) + g;
    auto it = moves_memo.find(key);
    if (it != moves_memo.end()) return it->second;

    const std::vector<Id> st = states.value(s);  // copy: states grows below
    Id q = st[0], annId = st[1], phase = st[2];
    std::vector<TreeMove> out;

    if (phase == kPwfBlank || phase == kPwfAny) {
      TreeMove blank;
      blank.letter.bot = true;
      Id bs = state_id(q, empty_ann, kPwfBlank);
      blank.kids.assign(k, {static_cast<int>(bs), {}});
      out.push_back(std::move(blank));
    }
    if (phase != kPwfBlank) live_moves(q, g, annId, phase == kPwfRoot, out);
    return moves_memo.emplace(key, std::move(out)).first->second;
  }

  void live_moves(Id q, Id g, Id annId, bool root,
                  std::vector<TreeMove>& out) {
    const Annotation inh = ann_of[annId];  // copy: ann_of grows below
    std::vector<Id> obligations =
        root ? std::vector<Id>{a.init} : cod(inh, at);
    Owner owner = all_system ? Owner::System : m.classify_control(q, g);
    const std::vector<PmsTarget> succ = m.next_successors(q, g);
    std::size_t kl = succ.size();

    // letters range over the guessed propositions freely
    for (std::uint64_t bmask = 0; bmask < (1ull << guess_props.size());
         ++bmask) {
      std::vector<Id> label = m.labels[q];
      for (std::size_t i = 0; i < guess_props.size(); ++i)
        if (bmask >> i & 1) label.push_back(guess_props[i]);
      sort_unique(label);

      // per obligation: minimal satisfying atom sets under this label
      std::vector<std::vector<std::vector<Id>>> menus;
      bool dead = false;
      for (Id qa : obligations) {
        auto models = minimal_models(a, at, a.delta[qa], label);
        if (models.empty()) { dead = true; break; }
        menus.push_back(std::move(models));
      }
      if (dead) continue;

      std::vector<std::size_t> pick(menus.size(), 0);
      while (true) {
        Annotation own;
        for (std::size_t oi = 0; oi < menus.size(); ++oi)
          for (Id atom : menus[oi][pick[oi]])
            own.push_back(Move{obligations[oi], atom});
        std::sort(own.begin(), own.end());
        Id ownId = intern_ann(own);

        for (const std::vector<Id>& parts : splits(q, g, ownId)) {
          emit_moves(q, g, label, inh, parts, succ, owner, out);
        }

        std::size_t j = 0;
        for (; j < pick.size(); ++j) {
          if (++pick[j] < menus[j].size()) break;
          pick[j] = 0;
        }
        if (j == pick.size()) break;
      }
      if (out.size() > (1u << 18))
        fail(ErrorKind::Guard, "well-formedness automaton move explosion");
    }
  }

  void emit_moves(Id q, Id g, const std::vector<Id>& label,
                  const Annotation& inh, const std::vector<Id>& parts,
                  const std::vector<PmsTarget>& succ, Owner owner,
                  std::vector<TreeMove>& out) {
    std::size_t kl = succ.size();
    UpsilonLetter letter;
    letter.label = label;
    letter.inh = inh;
    Annotation own;
    for (Id part : parts)
      for (const Move& mv : ann_of[part]) own.push_back(mv);
    std::sort(own.begin(), own.end());
    own.erase(std::unique(own.begin(), own.end()), own.end());
    letter.own = std::move(own);

    auto kid = [&](std::size_t i, Id phase) -> std::pair<int, StackWord> {
      return {static_cast<int>(state_id(succ[i].state, parts[i], phase)),
              succ[i].push};
    };
    auto pad = [&](TreeMove& tm) {
      Id bs = state_id(q, empty_ann, kPwfBlank);
      while (tm.kids.size() < static_cast<std::size_t>(k))
        tm.kids.push_back({static_cast<int>(bs), {}});
    };

    if (owner == Owner::System) {
      TreeMove tm;
      tm.letter = letter;
      for (std::size_t i = 0; i < kl; ++i) tm.kids.push_back(kid(i, kPwfLive));
      pad(tm);
      out.push_back(std::move(tm));
    } else {
      for (std::size_t j = 0; j < kl; ++j) {
        TreeMove tm;
        tm.letter = letter;
        for (std::size_t i = 0; i < kl; ++i)
          tm.kids.push_back(kid(i, i == j ? kPwfLive : kPwfAny));
        pad(tm);
        out.push_back(std::move(tm));
      }
    }
  }
};

}  // namespace detail

// Tree automaton accepting the annotated bottom-completion encodings of the
// environment prunings of `m` that carry a locally justified move annotation
// for the alternating automaton `a`.  With `force_all_system` every pair is
// treated as system-controlled, so the only accepted pruning shape is the full
// unwinding.  `guess_props` lists extra label propositions whose truth is
// guessed freely at every node (used by the bounded star fragment; empty for
// plain checking).  Throws NotOpen when some pair is neither
// environment-controlled nor environment-passive.
inline ParityNpta build_pwf(const Pms& m, const ParityAcg& a,
                            std::vector<Id> guess_props = {},
                            bool force_all_system = false) {
  m.validate_total();
  auto core = std::make_shared<detail::PwfCore>(m, a, std::move(guess_props),
                                                force_all_system);
  // classification errors (NotOpen) should surface at construction
  if (!force_all_system) m.validate_open();

  ParityNpta p;
  p.arity = core->k;
  p.stack_symbols = m.stack_symbols;
  p.init = static_cast<int>(
      core->state_id(m.init_state, core->empty_ann, detail::kPwfRoot));
  p.color = [](int) { return 0; };
  p.num_states = [core]() { return core->states.size(); };
  p.moves = [core](int s, Id g) -> const std::vector<TreeMove>& {
    return core->moves(s, g);
  };
  return p;
}

// ---------------------------------------------------------------------------
// branch acceptance

// Runs the deterministic word automaton down every branch of a k-ary tree.
// Blank letters jump to an accepting sink (blank subtrees impose nothing);
// all directions receive the same successor.
inline ParityNta build_acc_nta(const Dpw<UpsilonLetter>& b, int k) {
  auto core = std::make_shared<Dpw<UpsilonLetter>>(b);
  ParityNta t;
  t.arity = k;
  t.init = core->init + 1;  // state 0 is the sink
  t.color = [core](int s) { return s == 0 ? 0 : core->color(s - 1); };
  t.num_states = [core]() { return core->num_states() + 1; };
  t.moves = [core, k](int s, const UpsilonLetter& l) {
    std::vector<std::vector<int>> out;
    if (s == 0 || l.bot) {
      out.push_back(std::vector<int>(k, 0));
    } else {
      out.push_back(std::vector<int>(k, core->step(s - 1, l) + 1));
    }
    return out;
  };
  return t;
}

// ---------------------------------------------------------------------------
// product
//
// Both components must accept.  The conjunction of two parity conditions is a
// Streett condition -- one pair per odd color o of either component, demanding
// that whenever o recurs, some strictly larger color of the same component
// recurs too -- and a Streett condition folds back into parity with an index
// appearance record: a permutation of the pairs in which every pair whose
// larger-color set was just hit moves to the front.  A step emits an even
// color graded by the deepest position hit favorably, or an odd color graded
// by the deepest position hit unfavorably; in the limit the pairs that stop
// being satisfied sink behind the recurring ones, so the dominant parity of
// the emitted colors matches the conjunction.  Pairs are registered lazily
// the first time their odd color shows up on the branch; unseen colors can
// never recur, so late registration at the deepest position is harmless.

namespace detail {

// Deterministic conjunction monitor.  Memory states (permutations of
// registered pairs) are interned; `step` advances one transition on the pair
// of component colors and reports the emitted product color.
struct IarConj {
  static constexpr int kColorSpan = 4096;  // per-component color limit
  static constexpr std::size_t kMaxPairs = 12;

  Interner<std::vector<Id>, VecHash<Id>> mems;

  IarConj() { mems.intern({}); }

  static Id pair_id(int comp, int color) {
    return static_cast<Id>(comp) * kColorSpan + static_cast<Id>(color);
  }

  std::pair<Id, int> step(Id mem, int c1, int c2) {
    if (c1 < 0 || c1 >= kColorSpan || c2 < 0 || c2 >= kColorSpan)
      fail(ErrorKind::Guard, "component color outside the product range");
    const std::vector<Id> cur = mems.value(mem);  // copy: interner grows
    const int cs[2] = {c1, c2};
    // deepest favorable / unfavorable hits, 1-based front-to-back
    std::size_t fpos = 0, epos = 0;
    std::vector<char> fhit(cur.size(), 0);
    for (std::size_t i = 0; i < cur.size(); ++i) {
      int comp = static_cast<int>(cur[i] / kColorSpan);
      int o = static_cast<int>(cur[i] % kColorSpan);
      if (cs[comp] > o) {
        fhit[i] = 1;
        fpos = i + 1;
      } else if (cs[comp] == o) {
        epos = i + 1;
      }
    }
    std::vector<Id> fresh;
    for (int comp = 0; comp < 2; ++comp) {
      if (cs[comp] % 2 == 0) continue;
      Id pid = pair_id(comp, cs[comp]);
      if (std::find(cur.begin(), cur.end(), pid) == cur.end()) {
        fresh.push_back(pid);
        epos = cur.size() + fresh.size();
      }
    }
    int out = fpos >= epos ? static_cast<int>(2 * fpos + 2)
                           : static_cast<int>(2 * epos + 1);
    std::vector<Id> next;
    next.reserve(cur.size() + fresh.size());
    for (std::size_t i = 0; i < cur.size(); ++i)
      if (fhit[i]) next.push_back(cur[i]);
    for (std::size_t i = 0; i < cur.size(); ++i)
      if (!fhit[i]) next.push_back(cur[i]);
    next.insert(next.end(), fresh.begin(), fresh.end());
    if (next.size() > kMaxPairs)
      fail(ErrorKind::Guard, "product tracks too many parity pairs");
    return {mems.intern(next), out};
  }
};

struct ProductCore {
  ParityNpta p;
  ParityNta t;
  IarConj iar;
  Interner<std::vector<Id>, VecHash<Id>> states;  // {sp, st, mem, emitted}
  std::unordered_map<std::uint64_t, std::vector<TreeMove>> memo;

  ProductCore(ParityNpta pp, ParityNta tt)
      : p(std::move(pp)), t(std::move(tt)) {}

  int state_id(int sp, int st, Id mem, int out) {
    Id id = states.intern({static_cast<Id>(sp), static_cast<Id>(st), mem,
                           static_cast<Id>(out)});
    if (states.size() > (1u << 21))
      fail(ErrorKind::Guard, "product automaton state explosion");
    return static_cast<int>(id);
  }

  const std::vector<TreeMove>& moves(int s, Id g) {
    std::uint64_t key =
        static_cast<std::uint64_t>(s) * (p.stack_symbols + 1) + g;
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    const std::vector<Id> st = states.value(s);  // copy: states grows below
    int sp = static_cast<int>(st[0]), stt = static_cast<int>(st[1]);
    Id mem = st[2];
    std::vector<TreeMove> out;
    for (const TreeMove& pm : p.moves(sp, g)) {
      for (const auto& tuple : t.moves(stt, pm.letter)) {
        TreeMove tm;
        tm.letter = pm.letter;
        for (std::size_t i = 0; i < pm.kids.size(); ++i) {
          auto [nmem, emitted] =
              iar.step(mem, p.color(pm.kids[i].first), t.color(tuple[i]));
          tm.kids.push_back(
              {state_id(pm.kids[i].first, tuple[i], nmem, emitted),
               pm.kids[i].second});
        }
        out.push_back(std::move(tm));
      }
    }
    return memo.emplace(key, std::move(out)).first->second;
  }
};

}  // namespace detail

inline ParityNpta intersect(const ParityNpta& p, const ParityNta& t) {
  if (p.arity != t.arity)
    fail(ErrorKind::Input, "product of tree automata with different arities");
  auto core = std::make_shared<detail::ProductCore>(p, t);
  ParityNpta out;
  out.arity = p.arity;
  out.stack_symbols = p.stack_symbols;
  {
    auto [mem, emitted] =
        core->iar.step(0, p.color(p.init), t.color(t.init));
    out.init = core->state_id(p.init, t.init, mem, emitted);
  }
  out.color = [core](int s) {
    return static_cast<int>(core->states.value(s)[3]);
  };
  out.num_states = [core]() { return core->states.size(); };
  out.moves = [core](int s, Id g) -> const std::vector<TreeMove>& {
    return core->moves(s, g);
  };
  return out;
}

// ---------------------------------------------------------------------------
// projection

namespace detail {

struct ProjectCore {
  ParityNpta p;
  std::vector<Id> keep;
  bool keep_ann;
  std::unordered_map<std::uint64_t, std::vector<TreeMove>> memo;

  ProjectCore(ParityNpta pp, std::vector<Id> kp, bool ka)
      : p(std::move(pp)), keep(std::move(kp)), keep_ann(ka) {
    sort_unique(keep);
  }

  const std::vector<TreeMove>& moves(int s, Id g) {
    std::uint64_t key =
        static_cast<std::uint64_t>(s) * (p.stack_symbols + 1) + g;
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    std::vector<TreeMove> out;
    for (const TreeMove& pm : p.moves(s, g)) {
      TreeMove tm;
      tm.kids = pm.kids;
      tm.letter.bot = pm.letter.bot;
      for (Id pr : pm.letter.label)
        if (sorted_contains(keep, pr)) tm.letter.label.push_back(pr);
      if (keep_ann) {
        tm.letter.own = pm.letter.own;
        tm.letter.inh = pm.letter.inh;
      }
      bool dup = false;
      for (const TreeMove& o : out)
        if (o == tm) { dup = true; break; }
      if (!dup) out.push_back(std::move(tm));
    }
    return memo.emplace(key, std::move(out)).first->second;
  }
};

}  // namespace detail

// Keeps only the listed label propositions (and optionally the annotations);
// everything else is absorbed into nondeterminism.  States, colors and stack
// behavior are untouched, so emptiness is preserved in both directions.
inline ParityNpta project(const ParityNpta& p, std::vector<Id> keep_props,
                          bool keep_annotations = false) {
  auto core = std::make_shared<detail::ProjectCore>(
      p, std::move(keep_props), keep_annotations);
  ParityNpta out;
  out.arity = p.arity;
  out.stack_symbols = p.stack_symbols;
  out.init = p.init;
  out.color = p.color;
  out.num_states = p.num_states;
  out.moves = [core](int s, Id g) -> const std::vector<TreeMove>& {
    return core->moves(s, g);
  };
  return out;
}

}  // namespace pdmc
