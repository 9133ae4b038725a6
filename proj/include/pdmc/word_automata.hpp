// word_automata.hpp -- word automata running along a single tree branch.
//
// Three shells: nondeterministic Buchi (Nbw), nondeterministic co-parity
// (CoParityNw: accepts iff SOME run's maximal infinitely recurring color is
// ODD), and deterministic total parity (Dpw: accepts iff the maximal
// infinitely recurring color is EVEN).  Letters stay symbolic everywhere -- a
// transition is a function of the concrete letter value, so an automaton
// never enumerates its alphabet; deterministic constructions materialise
// their state space lazily and memoise per letter.
//
// The two named constructions:
//   build_violation_nw  -- runs over annotation letters and hunts for an
//                          embedded obligation trace whose color record is
//                          bad; its complement certifies a branch clean.
//   codeterminize       -- deterministic complement of a CoParityNw.  Inputs
//                          whose colors all lie in {1,2} (the common case
//                          here) go through a breakpoint subset construction
//                          directly; everything else is converted to Buchi
//                          and determinised via Safra/Piterman trees, then
//                          complemented by a parity shift.
#pragma once

#include <climits>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pdmc/acg.hpp"
#include "pdmc/annotations.hpp"
#include "pdmc/base.hpp"
#include "pdmc/logic.hpp"

namespace pdmc {

// ---------------------------------------------------------------------------
// shells

template <class Letter>
struct Nbw {
  int init = 0;
  std::vector<char> accepting;  // per state
  std::function<std::vector<int>(int, const Letter&)> delta;
  std::size_t num_states() const { return accepting.size(); }
};

template <class Letter>
struct CoParityNw {
  int init = 0;
  std::vector<int> color;  // per state; accepted iff some run max-recurs odd
  std::function<std::vector<int>(int, const Letter&)> delta;
  std::size_t num_states() const { return color.size(); }
};

template <class Letter>
struct Dpw {
  int init = 0;
  std::function<int(int, const Letter&)> step;  // deterministic and total
  std::function<int(int)> color;
  std::function<std::size_t()> num_states;  // discovered so far
};

// A Buchi automaton is the co-parity automaton with colors {0,1}: a run
// max-recurs 1 exactly when it visits accepting states infinitely often.
template <class Letter>
CoParityNw<Letter> nbw_to_coparity(const Nbw<Letter>& n) {
  CoParityNw<Letter> b;
  b.init = n.init;
  b.color.resize(n.num_states());
  for (std::size_t q = 0; q < n.num_states(); ++q)
    b.color[q] = n.accepting[q] ? 1 : 0;
  b.delta = n.delta;
  return b;
}

// ---------------------------------------------------------------------------
// violation word automaton
//
// States: a wait state plus one state per (automaton state, atom) move.  The
// automaton idles in wait, nondeterministically picks up a move from the
// letter's own annotation, and then follows it: the move must reappear in the
// next letter's inherited annotation (the branch direction really was one the
// move spawned along), and the next move must continue at the atom's target
// state.  A trace whose obligation is discharged without a successor move
// simply dies -- no violation along that branch.  Colors are the source
// states' colors; the wait state gets an even color (2 when the automaton's
// colors lie in {1,2}, keeping the whole thing co-Buchi-shaped; 0 otherwise).

inline CoParityNw<UpsilonLetter> build_violation_nw(const ParityAcg& a) {
  auto acg = std::make_shared<ParityAcg>(a);
  auto at = std::make_shared<AtomTable>(*acg);
  const std::size_t na = at->size();

  bool cobuchi = true;
  for (std::size_t q = 0; q < a.num_states(); ++q)
    if (a.color[q] != 1 && a.color[q] != 2) cobuchi = false;

  CoParityNw<UpsilonLetter> b;
  b.init = 0;
  b.color.assign(1 + a.num_states() * na, 0);
  b.color[0] = cobuchi ? 2 : 0;  // transient, so any even color is faithful
  for (std::size_t q = 0; q < a.num_states(); ++q)
    for (std::size_t t = 0; t < na; ++t)
      b.color[1 + q * na + t] = a.color[q];

  b.delta = [acg, at, na](int s, const UpsilonLetter& l) {
    std::vector<int> out;
    if (l.bot) return out;  // the branch left the pruned tree: no trace
    if (s == 0) {
      out.push_back(0);
      for (const Move& m : l.own)
        out.push_back(static_cast<int>(1 + m.q * na + m.atom));
      return out;
    }
    const Id q = static_cast<Id>((s - 1) / na);
    const Id t = static_cast<Id>((s - 1) % na);
    if (!std::binary_search(l.inh.begin(), l.inh.end(), Move{q, t}))
      return out;  // the branch is not a direction this move spawned along
    const Id tgt = at->target(t);
    for (const Move& m : l.own)
      if (m.q == tgt) out.push_back(static_cast<int>(1 + m.q * na + m.atom));
    return out;
  };
  return b;
}

// ---------------------------------------------------------------------------
// deterministic constructions

namespace detail {

// Breakpoint subset construction for a co-parity automaton whose colors all
// lie in {1,2}.  Such an automaton accepts iff some run eventually avoids
// color 2, so it is a nondeterministic co-Buchi automaton with bad set
// "color 2".  States (S, O): S tracks all runs, O the runs clean since the
// last breakpoint; O running empty is the breakpoint.  Reading the breakpoint
// flag as parity color 2 (else 1) yields a deterministic automaton for the
// COMPLEMENT: breakpoints recur iff no run stays clean forever.
template <class Letter, class LetterHash>
class BreakpointCore {
 public:
  BreakpointCore(const CoParityNw<Letter>& b, std::size_t cap)
      : b_(b), cap_(cap) {
    std::vector<Id> s{static_cast<Id>(b_.init)};
    init_ = intern(s, clean(s));
  }

  int init_state() const { return init_; }
  int color(int s) const { return colors_[s]; }
  std::size_t size() const { return colors_.size(); }

  int step(int s, const Letter& a) {
    auto hit = memo_[s].find(a);
    if (hit != memo_[s].end()) return hit->second;
    const std::vector<Id>& key = states_.value(static_cast<Id>(s));
    auto cut = std::find(key.begin(), key.end(), kNoId);
    std::vector<Id> sset(key.begin(), cut), oset(cut + 1, key.end());

    std::vector<Id> s2 = post(sset, a);
    std::vector<Id> o2;
    if (oset.empty()) {
      o2 = clean(s2);  // breakpoint just happened: restart from scratch
    } else {
      for (Id q : post(oset, a))
        if (b_.color[q] != 2) o2.push_back(q);
    }
    int succ = intern(s2, o2);
    memo_[s].emplace(a, succ);
    return succ;
  }

 private:
  CoParityNw<Letter> b_;
  std::size_t cap_;
  int init_;
  Interner<std::vector<Id>, VecHash<Id>> states_;
  std::vector<int> colors_;
  std::vector<std::unordered_map<Letter, int, LetterHash>> memo_;

  std::vector<Id> post(const std::vector<Id>& set, const Letter& a) {
    std::vector<Id> out;
    for (Id q : set)
      for (int q2 : b_.delta(static_cast<int>(q), a))
        out.push_back(static_cast<Id>(q2));
    sort_unique(out);
    return out;
  }
  std::vector<Id> clean(const std::vector<Id>& set) const {
    std::vector<Id> out;
    for (Id q : set)
      if (b_.color[q] != 2) out.push_back(q);
    return out;
  }
  int intern(const std::vector<Id>& s, const std::vector<Id>& o) {
    std::vector<Id> key = s;
    key.push_back(kNoId);
    key.insert(key.end(), o.begin(), o.end());
    Id id = states_.intern(key);
    if (id == colors_.size()) {
      if (states_.size() > cap_)
        fail(ErrorKind::Guard, "breakpoint construction exceeded " +
                                   std::to_string(cap_) + " states");
      colors_.push_back(o.empty() ? 2 : 1);
      memo_.emplace_back();
    }
    return static_cast<int>(id);
  }
};

// Safra/Piterman tree determinisation of a Buchi automaton.  A state is an
// ordered tree of labelled nodes kept in seniority order (rank 0 the oldest;
// parents are always senior to their children).  One letter step: update all
// labels by the transition relation, spawn a youngest child per node holding
// its accepting part, restore disjointness (a state belongs to the oldest
// sibling claiming it) and nesting, remove empty nodes (a RED event at their
// rank), collapse nodes whose children cover them (a GREEN event: the node's
// whole label took an accepting hop since the node was created), and compact
// ranks.  The emitted color reports the most senior event, red beating green
// at equal rank; runs where some rank is eventually never red but green
// infinitely often are exactly the words the input accepts.  Internally the
// natural formulation is min-parity; colors are flipped to the max-parity
// convention used everywhere else before they leave this class.
template <class Letter, class LetterHash>
class SafraCore {
 public:
  SafraCore(const Nbw<Letter>& n, std::size_t cap) : n_(n), cap_(cap) {
    neutral_ = 4 * static_cast<int>(n_.num_states() ? n_.num_states() : 1) + 1;
    std::vector<SNode> root(1);
    root[0].parent = -1;
    root[0].label = {static_cast<Id>(n_.init)};
    init_ = intern(trees_.intern(flatten(root)), 1);
  }

  int init_state() const { return init_; }
  int color(int s) const { return colors_[s]; }
  std::size_t size() const { return colors_.size(); }

  int step(int s, const Letter& a) {
    auto hit = memo_[s].find(a);
    if (hit != memo_[s].end()) return hit->second;
    Id tree = states_.value(static_cast<Id>(s))[0];
    auto [t2, c2] = tree_step(tree, a);
    int succ = intern(t2, c2);
    memo_[s].emplace(a, succ);
    return succ;
  }

 private:
  struct SNode {
    int parent = -1;
    std::vector<Id> label;
  };

  Nbw<Letter> n_;
  std::size_t cap_;
  int neutral_;
  int init_;
  Interner<std::vector<Id>, VecHash<Id>> trees_;   // flattened trees
  Interner<std::vector<Id>, VecHash<Id>> states_;  // {tree, last color}
  std::vector<int> colors_;
  std::vector<std::unordered_map<Letter, int, LetterHash>> memo_;

  static std::vector<Id> flatten(const std::vector<SNode>& t) {
    std::vector<Id> out;
    for (const SNode& nd : t) {
      out.push_back(static_cast<Id>(nd.parent + 1));
      out.insert(out.end(), nd.label.begin(), nd.label.end());
      out.push_back(kNoId);
    }
    return out;
  }
  static std::vector<SNode> unflatten(const std::vector<Id>& flat) {
    std::vector<SNode> t;
    std::size_t i = 0;
    while (i < flat.size()) {
      SNode nd;
      nd.parent = static_cast<int>(flat[i++]) - 1;
      while (flat[i] != kNoId) nd.label.push_back(flat[i++]);
      ++i;
      t.push_back(std::move(nd));
    }
    return t;
  }

  std::vector<Id> post(const std::vector<Id>& set, const Letter& a) {
    std::vector<Id> out;
    for (Id q : set)
      for (int q2 : n_.delta(static_cast<int>(q), a))
        out.push_back(static_cast<Id>(q2));
    sort_unique(out);
    return out;
  }

  std::pair<Id, int> tree_step(Id treeId, const Letter& a) {
    std::vector<SNode> t = unflatten(trees_.value(treeId));
    int e_red = INT_MAX, f_green = INT_MAX;

    for (SNode& nd : t) nd.label = post(nd.label, a);

    const int oldn = static_cast<int>(t.size());
    for (int r = 0; r < oldn; ++r) {
      std::vector<Id> kid;
      for (Id q : t[r].label)
        if (n_.accepting[q]) kid.push_back(q);
      if (!kid.empty()) {
        SNode nd;
        nd.parent = r;
        nd.label = std::move(kid);
        t.push_back(std::move(nd));
      }
    }

    // nesting and older-sibling priority, cascading in rank order
    for (int r = 1; r < static_cast<int>(t.size()); ++r) {
      const std::vector<Id>& par = t[t[r].parent].label;
      std::vector<Id> keep;
      for (Id q : t[r].label) {
        if (!sorted_contains(par, q)) continue;
        bool claimed = false;
        for (int s = 0; s < r && !claimed; ++s)
          if (t[s].parent == t[r].parent && sorted_contains(t[s].label, q))
            claimed = true;
        if (!claimed) keep.push_back(q);
      }
      t[r].label = std::move(keep);
    }

    std::vector<char> removed(t.size(), 0);
    for (int r = 0; r < static_cast<int>(t.size()); ++r)
      if (t[r].label.empty()) {
        removed[r] = 1;
        e_red = std::min(e_red, r);
      }

    for (int r = 0; r < static_cast<int>(t.size()); ++r) {
      if (removed[r]) continue;
      std::vector<Id> u;
      for (int c = 0; c < static_cast<int>(t.size()); ++c)
        if (!removed[c] && t[c].parent == r) u = set_union(u, t[c].label);
      if (!u.empty() && u == t[r].label) {
        f_green = std::min(f_green, r);
        for (int c = r + 1; c < static_cast<int>(t.size()); ++c) {
          int p = t[c].parent;
          while (p != -1 && p != r) p = t[p].parent;
          if (p == r) removed[c] = 1;
        }
      }
    }

    std::vector<int> newrank(t.size(), -1);
    std::vector<SNode> out;
    for (int r = 0; r < static_cast<int>(t.size()); ++r) {
      if (removed[r]) continue;
      newrank[r] = static_cast<int>(out.size());
      SNode nd;
      nd.parent = t[r].parent == -1 ? -1 : newrank[t[r].parent];
      nd.label = std::move(t[r].label);
      out.push_back(std::move(nd));
    }

    int emitted = neutral_;
    if (f_green != INT_MAX) emitted = std::min(emitted, 2 * f_green + 2);
    if (e_red != INT_MAX) emitted = std::min(emitted, 2 * e_red + 1);
    return {trees_.intern(flatten(out)), neutral_ + 1 - emitted};
  }

  int intern(Id tree, int c) {
    Id id = states_.intern({tree, static_cast<Id>(c)});
    if (id == colors_.size()) {
      if (states_.size() > cap_)
        fail(ErrorKind::Guard, "tree determinisation exceeded " +
                                   std::to_string(cap_) + " states");
      colors_.push_back(c);
      memo_.emplace_back();
    }
    return static_cast<int>(id);
  }
};

}  // namespace detail

template <class Letter, class LetterHash = std::hash<Letter>>
Dpw<Letter> piterman_determinize(const Nbw<Letter>& n,
                                 std::size_t state_cap = 1u << 18) {
  auto core =
      std::make_shared<detail::SafraCore<Letter, LetterHash>>(n, state_cap);
  Dpw<Letter> d;
  d.init = core->init_state();
  d.step = [core](int s, const Letter& a) { return core->step(s, a); };
  d.color = [core](int s) { return core->color(s); };
  d.num_states = [core] { return core->size(); };
  return d;
}

// Equivalent Buchi automaton for a co-parity one.  The run is split into a
// finite discarded prefix and a tail partitioned into segments; the
// automaton tracks the maximal color of the open segment and may close a
// segment exactly when its maximum is odd, flagging the closure.  Closures
// recurring forever pin the maximal recurring color odd: past the last
// non-recurring color every closed segment's maximum is a recurring color,
// and segments containing the overall maximum close with exactly it.  The
// prefix phase matters: colors seen before the guessed tail start (say an
// even color above everything recurring) must not be folded into the first
// segment's maximum.
template <class Letter>
Nbw<Letter> coparity_to_nbw(const CoParityNw<Letter>& b) {
  auto bp = std::make_shared<CoParityNw<Letter>>(b);
  auto cv = std::make_shared<std::vector<int>>(b.color);
  sort_unique(*cv);
  const int m = static_cast<int>(cv->size()) + 2;  // mode 0 prefix, 1 empty
  const int n = static_cast<int>(b.num_states());

  Nbw<Letter> out;
  out.accepting.assign(static_cast<std::size_t>(2 * n * m), 0);
  for (int s = 1; s < 2 * n * m; s += 2) out.accepting[s] = 1;
  const auto enc = [cv](int c) {  // segment-max value -> mode index
    return static_cast<int>(std::lower_bound(cv->begin(), cv->end(), c) -
                            cv->begin()) +
           2;
  };
  out.init = (b.init * m) * 2;  // prefix phase
  out.delta = [bp, cv, m, enc](int s, const Letter& a) {
    const int mode = (s >> 1) % m, q = (s >> 1) / m;
    std::vector<int> res;
    for (int q2 : bp->delta(q, a)) {
      const int c2 = bp->color[q2];
      if (mode == 0) {
        res.push_back((q2 * m) * 2);            // stay in the prefix
        res.push_back((q2 * m + enc(c2)) * 2);  // the tail starts here
        if (c2 % 2 == 1) res.push_back((q2 * m + 1) * 2 + 1);
      } else {
        const int m2 = mode == 1 ? c2 : std::max((*cv)[mode - 2], c2);
        res.push_back((q2 * m + enc(m2)) * 2);  // extend the open segment
        if (m2 % 2 == 1) res.push_back((q2 * m + 1) * 2 + 1);  // close it
      }
    }
    sort_unique(res);
    return res;
  };
  return out;
}

enum class CodetPath {
  Auto,          // breakpoint when the colors allow it, trees otherwise
  ForceGeneral,  // always the tree pipeline (cross-checking)
};

// Deterministic parity automaton for the COMPLEMENT of the co-parity input.
template <class Letter, class LetterHash = std::hash<Letter>>
Dpw<Letter> codeterminize(const CoParityNw<Letter>& b,
                          std::size_t state_cap = 1u << 18,
                          CodetPath path = CodetPath::Auto) {
  bool cobuchi = true;
  for (int c : b.color)
    if (c != 1 && c != 2) cobuchi = false;
  if (cobuchi && path == CodetPath::Auto) {
    auto core = std::make_shared<detail::BreakpointCore<Letter, LetterHash>>(
        b, state_cap);
    Dpw<Letter> d;
    d.init = core->init_state();
    d.step = [core](int s, const Letter& a) { return core->step(s, a); };
    d.color = [core](int s) { return core->color(s); };
    d.num_states = [core] { return core->size(); };
    return d;
  }
  Dpw<Letter> d =
      piterman_determinize<Letter, LetterHash>(coparity_to_nbw(b), state_cap);
  Dpw<Letter> out = d;
  out.color = [base = d.color](int s) { return base(s) + 1; };
  return out;
}

// ---------------------------------------------------------------------------
// LTL tableau (for the bounded star tier and for test fodder)
//
// Letters are sorted sets of proposition ids.  States are obligation sets
// plus a round-robin counter over the until subformulas; a transition
// discharges, defers, or branches obligations against the letter, and the
// counter advances when its until either fired or is not pending, flashing an
// accepting bit on wrap-around.

namespace detail {

inline FRef ltl_nnf(const FRef& f, bool pos) {
  switch (f->kind) {
    case FKind::True:
      return pos ? f_true() : f_not(f_true());
    case FKind::Prop:
      return pos ? f_prop(f->prop) : f_not(f_prop(f->prop));
    case FKind::Not:
      return ltl_nnf(f->a, !pos);
    case FKind::And:
      return f_bin(pos ? FKind::And : FKind::Or, ltl_nnf(f->a, pos),
                   ltl_nnf(f->b, pos));
    case FKind::Or:
      return f_bin(pos ? FKind::Or : FKind::And, ltl_nnf(f->a, pos),
                   ltl_nnf(f->b, pos));
    case FKind::Imply:
      return f_bin(pos ? FKind::Or : FKind::And, ltl_nnf(f->a, !pos),
                   ltl_nnf(f->b, pos));
    case FKind::Next:
      return f_un(FKind::Next, ltl_nnf(f->a, pos));
    case FKind::Until:
      return f_bin(pos ? FKind::Until : FKind::Release, ltl_nnf(f->a, pos),
                   ltl_nnf(f->b, pos));
    case FKind::Release:
      return f_bin(pos ? FKind::Release : FKind::Until, ltl_nnf(f->a, pos),
                   ltl_nnf(f->b, pos));
    case FKind::Finally:
      return pos ? f_bin(FKind::Until, f_true(), ltl_nnf(f->a, true))
                 : f_bin(FKind::Release, f_not(f_true()), ltl_nnf(f->a, false));
    case FKind::Globally:
      return pos ? f_bin(FKind::Release, f_not(f_true()), ltl_nnf(f->a, true))
                 : f_bin(FKind::Until, f_true(), ltl_nnf(f->a, false));
    default:
      fail(ErrorKind::Fragment,
           "strategy quantifier inside a pure path formula: " +
               formula_key(f));
  }
}

class LtlTableau {
 public:
  LtlTableau(const FRef& f, const Signature& sig, std::size_t cap)
      : sig_(sig), budget_(cap, "ltl tableau") {
    root_ = fid(ltl_nnf(f, true));
    collect_untils(root_);
    if (untils_.size() > 60)
      fail(ErrorKind::Guard, "too many until subformulas for one word");
  }

  Nbw<std::vector<Id>> build() {
    const std::size_t nprops = sig_.props.size();
    if (nprops > 16)
      fail(ErrorKind::Guard, "letter alphabet too large to enumerate");
    const std::uint32_t nletters = 1u << nprops;
    const int nu = static_cast<int>(untils_.size());

    auto table = std::make_shared<std::vector<std::vector<std::vector<int>>>>();
    std::vector<char> accepting;

    Interner<std::vector<Id>, VecHash<Id>> states;
    std::vector<Id> obs0;
    if (forms_[root_]->kind != FKind::True) obs0.push_back(root_);
    Id start = states.intern(key(obs_.intern(obs0), 0, 0));
    accepting.push_back(nu == 0 ? 1 : 0);
    table->emplace_back(nletters);

    for (Id s = 0; s < states.size(); ++s) {
      const std::vector<Id> k = states.value(s);
      const std::vector<Id> obs = obs_.value(k[0]);  // copy: interner grows
      const int ci = static_cast<int>(k[1]);
      for (std::uint32_t mask = 0; mask < nletters; ++mask) {
        std::vector<int> succs;
        for (const auto& [nxt, fired] : expand_set(obs, mask)) {
          bool ok = nu != 0 && (((fired >> ci) & 1) != 0 ||
                                !sorted_contains(obs, untils_[ci]));
          int c2 = ci, flash = 0;
          if (ok) {
            c2 = ci + 1;
            if (c2 == nu) {
              c2 = 0;
              flash = 1;
            }
          }
          Id t = states.intern(key(obs_.intern(nxt), c2, flash));
          if (t == accepting.size()) {
            budget_.charge();
            accepting.push_back(static_cast<char>(nu == 0 ? 1 : flash));
            table->emplace_back(nletters);
          }
          succs.push_back(static_cast<int>(t));
        }
        sort_unique(succs);
        (*table)[s][mask] = std::move(succs);
      }
    }

    Nbw<std::vector<Id>> out;
    out.init = static_cast<int>(start);
    out.accepting = std::move(accepting);
    const std::size_t np = nprops;
    out.delta = [table, np](int s, const std::vector<Id>& letter) {
      std::uint32_t mask = 0;
      for (Id p : letter) {
        if (p >= np) fail(ErrorKind::Input, "letter mentions an unknown prop");
        mask |= 1u << p;
      }
      return (*table)[s][mask];
    };
    return out;
  }

 private:
  using Branch = std::pair<std::vector<Id>, std::uint64_t>;

  const Signature& sig_;
  Budget budget_;
  Id root_;
  std::vector<FRef> forms_;
  std::unordered_map<std::string, Id> findex_;
  std::vector<Id> untils_;  // pool ids, fired-bit position = index here
  Interner<std::vector<Id>, VecHash<Id>> obs_;
  std::unordered_map<std::uint64_t, std::vector<Branch>> expand_memo_;

  static std::vector<Id> key(Id obset, int ci, int flash) {
    return {obset, static_cast<Id>(ci), static_cast<Id>(flash)};
  }

  Id fid(const FRef& f) {
    std::string k = formula_key(f);
    auto it = findex_.find(k);
    if (it != findex_.end()) return it->second;
    Id id = static_cast<Id>(forms_.size());
    forms_.push_back(f);
    findex_.emplace(std::move(k), id);
    return id;
  }

  void collect_untils(Id id) {
    const FRef f = forms_[id];  // copy: fid() below may grow forms_
    if (f->kind == FKind::Until && !sorted_contains(untils_, id))
      untils_.push_back(id);
    if (f->a && f->kind != FKind::Not) collect_untils(fid(f->a));
    if (f->b) collect_untils(fid(f->b));
    sort_unique(untils_);
  }

  // branches for one obligation under one letter (by value: recursive calls
  // may rehash the memo table underneath any reference we handed out)
  std::vector<Branch> expand_one(Id id, std::uint32_t mask) {
    const std::uint64_t mk = (static_cast<std::uint64_t>(id) << 32) | mask;
    auto it = expand_memo_.find(mk);
    if (it != expand_memo_.end()) return it->second;
    const FRef f = forms_[id];  // copy: fid() below may grow forms_
    std::vector<Branch> out;
    switch (f->kind) {
      case FKind::True:
        out.push_back({{}, 0});
        break;
      case FKind::Prop:
        if (mask & (1u << f->prop)) out.push_back({{}, 0});
        break;
      case FKind::Not:  // literal or the constant false, by normal form
        if (f->a->kind == FKind::Prop && !(mask & (1u << f->a->prop)))
          out.push_back({{}, 0});
        break;
      case FKind::And:
        out = combine(expand_one(fid(f->a), mask), expand_one(fid(f->b), mask));
        break;
      case FKind::Or: {
        out = expand_one(fid(f->a), mask);
        append(out, expand_one(fid(f->b), mask));
        break;
      }
      case FKind::Next:
        if (f->a->kind == FKind::True)
          out.push_back({{}, 0});  // X true imposes nothing tomorrow
        else
          out.push_back({{fid(f->a)}, 0});
        break;
      case FKind::Until: {
        std::uint64_t bit = 1ull << until_index(id);
        for (Branch br : expand_one(fid(f->b), mask)) {
          br.second |= bit;
          out.push_back(std::move(br));
        }
        append(out, combine(expand_one(fid(f->a), mask), {{{id}, 0}}));
        break;
      }
      case FKind::Release: {
        const std::vector<Branch> goal = expand_one(fid(f->b), mask);
        out = combine(goal, expand_one(fid(f->a), mask));  // released now
        append(out, combine(goal, {{{id}, 0}}));           // carried on
        break;
      }
      default:
        fail(ErrorKind::Fragment, "unexpected operator in a word obligation");
    }
    dedup(out);
    expand_memo_.emplace(mk, out);
    return out;
  }

  std::vector<Branch> expand_set(const std::vector<Id>& obs,
                                 std::uint32_t mask) {
    std::vector<Branch> acc{{{}, 0}};
    for (Id id : obs) {
      acc = combine(acc, expand_one(id, mask));
      if (acc.empty()) break;
    }
    return acc;
  }

  std::size_t until_index(Id id) const {
    return static_cast<std::size_t>(
        std::lower_bound(untils_.begin(), untils_.end(), id) -
        untils_.begin());
  }

  static std::vector<Branch> combine(const std::vector<Branch>& xs,
                                     const std::vector<Branch>& ys) {
    std::vector<Branch> out;
    for (const Branch& x : xs)
      for (const Branch& y : ys) {
        Branch b{set_union(x.first, y.first), x.second | y.second};
        out.push_back(std::move(b));
      }
    dedup(out);
    return out;
  }
  static void append(std::vector<Branch>& xs, const std::vector<Branch>& ys) {
    xs.insert(xs.end(), ys.begin(), ys.end());
    dedup(xs);
  }
  static void dedup(std::vector<Branch>& xs) {
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  }
};

}  // namespace detail

inline Nbw<std::vector<Id>> ltl_to_nbw(const FRef& f, const Signature& sig,
                                       std::size_t state_cap = 1u << 12) {
  return detail::LtlTableau(f, sig, state_cap).build();
}

}  // namespace pdmc
