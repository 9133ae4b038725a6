// annotations.hpp -- move annotations and the structured letters read by the
// tree automata downstream of an alternating automaton.
//
// A move (q, atom) records that state q discharged part of its obligation via
// `atom` = (spawned state, box/diamond, team), indexed against a fixed atom
// table derived deterministically from the automaton (pool scan order), so
// independently constructed tables over the same automaton agree on ids.  A
// letter is either the pruning filler (bot) or a label set plus two move
// annotations: the node's own moves and the moves inherited along the branch
// from its parent's split.
#pragma once

#include <string>
#include <vector>

#include "pdmc/acg.hpp"
#include "pdmc/base.hpp"

namespace pdmc {

struct AtomTable {
  std::vector<ParityAcg::Pb> atoms;  // deduped Atom_ entries, scan order
  std::vector<Id> pool_atom;         // per pool node: atom id or kNoId

  explicit AtomTable(const ParityAcg& a) {
    pool_atom.assign(a.pool.size(), kNoId);
    for (std::size_t e = 0; e < a.pool.size(); ++e) {
      const ParityAcg::Pb& n = a.pool[e];
      if (n.kind != ParityAcg::Pb::Atom_) continue;
      Id found = kNoId;
      for (std::size_t i = 0; i < atoms.size(); ++i)
        if (atoms[i].q == n.q && atoms[i].mode == n.mode &&
            atoms[i].team == n.team) {
          found = static_cast<Id>(i);
          break;
        }
      if (found == kNoId) {
        found = static_cast<Id>(atoms.size());
        atoms.push_back(n);
      }
      pool_atom[e] = found;
    }
  }

  std::size_t size() const { return atoms.size(); }
  Id target(Id atom) const { return atoms[atom].q; }
  AtomMode mode(Id atom) const { return atoms[atom].mode; }
  const std::vector<Id>& team(Id atom) const { return atoms[atom].team; }
};

struct Move {
  Id q = 0;     // state owning the obligation
  Id atom = 0;  // how it was discharged
  bool operator==(const Move& o) const { return q == o.q && atom == o.atom; }
  bool operator<(const Move& o) const {
    return q != o.q ? q < o.q : atom < o.atom;
  }
};

using Annotation = std::vector<Move>;  // sorted, duplicate-free

inline std::vector<Id> dom(const Annotation& an) {
  std::vector<Id> out;
  for (const Move& m : an) out.push_back(m.q);
  sort_unique(out);
  return out;
}
inline std::vector<Id> cod(const Annotation& an, const AtomTable& at) {
  std::vector<Id> out;
  for (const Move& m : an) out.push_back(at.target(m.atom));
  sort_unique(out);
  return out;
}
// atoms used by q's moves in an, sorted
inline std::vector<Id> atoms_of(const Annotation& an, Id q) {
  std::vector<Id> out;
  for (const Move& m : an)
    if (m.q == q) out.push_back(m.atom);
  sort_unique(out);
  return out;
}

struct UpsilonLetter {
  bool bot = false;
  std::vector<Id> label;  // sorted proposition ids
  Annotation own, inh;

  bool operator==(const UpsilonLetter& o) const {
    return bot == o.bot && label == o.label && own == o.own && inh == o.inh;
  }
};

struct UpsilonHash {
  std::size_t operator()(const UpsilonLetter& l) const {
    std::size_t h = l.bot ? 0x9e37 : 0x79b9;
    for (Id p : l.label) h = hash_mix(h, p);
    h = hash_mix(h, 0xffff);
    for (const Move& m : l.own) h = hash_mix(hash_mix(h, m.q), m.atom);
    h = hash_mix(h, 0xfffe);
    for (const Move& m : l.inh) h = hash_mix(hash_mix(h, m.q), m.atom);
    return h;
  }
};

// Does the atom set `atoms_sorted` (the moves recorded for one state) satisfy
// the transition expression `e` under the given node label?
inline bool pb_models(const ParityAcg& a, const AtomTable& at, int e,
                      const std::vector<Id>& label,
                      const std::vector<Id>& atoms_sorted) {
  const ParityAcg::Pb& n = a.pool[e];
  switch (n.kind) {
    case ParityAcg::Pb::True_: return true;
    case ParityAcg::Pb::False_: return false;
    case ParityAcg::Pb::Atom_:
      return sorted_contains(atoms_sorted, at.pool_atom[e]);
    case ParityAcg::Pb::And_:
      return pb_models(a, at, n.a, label, atoms_sorted) &&
             pb_models(a, at, n.b, label, atoms_sorted);
    case ParityAcg::Pb::Or_:
      return pb_models(a, at, n.a, label, atoms_sorted) ||
             pb_models(a, at, n.b, label, atoms_sorted);
    case ParityAcg::Pb::IfProp_:
      return pb_models(a, at, sorted_contains(label, n.prop) ? n.a : n.b,
                       label, atoms_sorted);
  }
  return false;
}

inline std::string annotation_to_string(const Annotation& an) {
  std::string s = "{";
  for (std::size_t i = 0; i < an.size(); ++i) {
    if (i) s += ",";
    s += "(q" + std::to_string(an[i].q) + ",a" + std::to_string(an[i].atom) +
         ")";
  }
  return s + "}";
}

}  // namespace pdmc

// Letters key hash maps throughout the word-automaton constructions.
template <>
struct std::hash<pdmc::UpsilonLetter> : pdmc::UpsilonHash {};
