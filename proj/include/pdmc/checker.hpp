// checker.hpp -- end-to-end verdicts for pushdown multi-agent systems.
//
// Two independent deciders share this header:
//
//   * the automata pipeline: translate the formula's negation into an
//     alternating automaton, run its violating-path word automaton through
//     determinization, conjoin the pruning-tree automaton of the system with
//     the branch acceptance automaton, and decide emptiness of the product.
//     The system satisfies the formula under every environment pruning
//     exactly when the product is empty;
//
//   * the bounded explicit-state oracle: unwind the system to a fixed depth,
//     enumerate every environment pruning and evaluate the formula on each
//     tree directly.  Exact for step-bounded formulas, used to cross-check
//     the pipeline.
//
// `model` mode runs the same pipeline with every state treated as
// system-controlled, so the full unwinding is the only admissible tree.
#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pdmc/acg.hpp"
#include "pdmc/atlstar.hpp"
#include "pdmc/emptiness.hpp"
#include "pdmc/eval.hpp"
#include "pdmc/logic.hpp"
#include "pdmc/npta.hpp"
#include "pdmc/system_model.hpp"
#include "pdmc/word_automata.hpp"

namespace pdmc {

enum class CheckMode { Module, Model };

inline const char* mode_name(CheckMode m) {
  return m == CheckMode::Module ? "module" : "model";
}

// Per-stage sizes and timings of one pipeline run.  Size fields are
// deterministic across repeated runs; timing fields are not.
struct CheckStats {
  // formula and translation
  std::size_t formula_ast = 0;
  bool star_path = false;          // path bodies ran through word automata
  std::size_t guessed_props = 0;   // labeling extension propositions
  std::size_t path_automata = 0;   // distinct determinized path bodies
  std::size_t max_path_states = 0;
  std::size_t acg_states = 0;
  std::size_t acg_index = 0;
  std::size_t acg_atoms = 0;
  std::size_t acg_state_bound = 0;  // 2 * AST size; direct translation only
  // violating-path word automaton and its determinization
  std::size_t word_states = 0;
  std::size_t word_colors = 0;
  std::size_t det_states = 0;      // discovered during the run
  std::size_t det_index = 0;       // distinct colors among discovered states
  std::size_t det_bound_base = 0;  // word_states * word_colors
  // system
  std::size_t pms_states = 0;
  std::size_t pms_stack_symbols = 0;
  std::size_t pms_delta = 0;  // transition entries plus pushed word lengths
  std::size_t arity = 0;      // branching degree of the unwinding
  // pruning-tree automaton
  std::size_t pwf_states = 0;
  std::size_t pwf_heads = 0;
  std::size_t pwf_moves = 0;
  std::size_t pwf_push_len = 0;
  std::size_t rho_norm = 0;   // pwf_moves + pwf_push_len
  std::size_t pwf_index = 0;  // distinct acceptance colors (always 1)
  // product and emptiness
  std::size_t product_states = 0;  // discovered during the emptiness run
  std::size_t empt_rounds = 0;
  std::size_t empt_positions = 0;
  std::size_t empt_pool = 0;
  std::size_t empt_contexts = 0;
  // timings (milliseconds)
  double ms_translate = 0, ms_word = 0, ms_pwf = 0, ms_product = 0,
         ms_emptiness = 0, ms_total = 0;
};

// Equality of every size field (the determinism contract; timings excluded).
inline bool same_sizes(const CheckStats& a, const CheckStats& b) {
  return a.formula_ast == b.formula_ast && a.star_path == b.star_path &&
         a.guessed_props == b.guessed_props &&
         a.path_automata == b.path_automata &&
         a.max_path_states == b.max_path_states &&
         a.acg_states == b.acg_states && a.acg_index == b.acg_index &&
         a.acg_atoms == b.acg_atoms &&
         a.acg_state_bound == b.acg_state_bound &&
         a.word_states == b.word_states && a.word_colors == b.word_colors &&
         a.det_states == b.det_states && a.det_index == b.det_index &&
         a.det_bound_base == b.det_bound_base &&
         a.pms_states == b.pms_states &&
         a.pms_stack_symbols == b.pms_stack_symbols &&
         a.pms_delta == b.pms_delta && a.arity == b.arity &&
         a.pwf_states == b.pwf_states && a.pwf_heads == b.pwf_heads &&
         a.pwf_moves == b.pwf_moves && a.pwf_push_len == b.pwf_push_len &&
         a.rho_norm == b.rho_norm && a.pwf_index == b.pwf_index &&
         a.product_states == b.product_states &&
         a.empt_rounds == b.empt_rounds &&
         a.empt_positions == b.empt_positions &&
         a.empt_pool == b.empt_pool && a.empt_contexts == b.empt_contexts;
}

struct CheckOpts {
  CheckMode mode = CheckMode::Module;
  std::size_t star_budget = 256;  // max states per determinized path body
  bool force_star = false;        // route plain formulas through path bodies
  std::size_t det_cap = std::size_t{1} << 18;
  std::size_t measure_cap = std::size_t{1} << 20;
  EmptinessOpts emptiness{};
  bool want_certificate = true;
  bool dump_acg = false;
  bool dump_npta = false;
  bool dump_dpw = false;
};

struct Verdict {
  bool satisfiedReactively = false;
  CheckMode mode = CheckMode::Module;
  CheckStats stats{};
  // Violating-tree prefix replayed from the winning strategy; present
  // exactly when the product was nonempty and a certificate was requested.
  std::optional<std::vector<WitnessNode>> certificate{};
  // Debug dumps, filled on request.
  std::string debug_acg, debug_npta, debug_dpw;
};

namespace detail {

using CheckClock = std::chrono::steady_clock;

inline double ms_since(CheckClock::time_point t0) {
  return std::chrono::duration<double, std::milli>(CheckClock::now() - t0)
      .count();
}

// Re-throws library errors with the pipeline stage prepended, so a failure
// report always names the stage that outgrew its budget or rejected input.
template <class F>
auto check_stage(const char* stage, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const PdmcError& e) {
    throw PdmcError(e.kind, std::string(stage) + ": " + e.what());
  }
}

inline std::string letter_text(const UpsilonLetter& l, const Signature& sig) {
  if (l.bot) return "(blank)";
  std::string out = "{";
  bool first = true;
  for (Id p : l.label) {
    if (!first) out += ",";
    first = false;
    out += p < sig.props.size() ? sig.props[p] : "?" + std::to_string(p);
  }
  out += "}";
  return out;
}

inline std::string dump_dpw_text(const Dpw<UpsilonLetter>& d) {
  std::size_t n = d.num_states();
  std::string out = "deterministic parity word automaton: " +
                    std::to_string(n) + " states discovered\n";
  for (std::size_t s = 0; s < n && s < 512; ++s)
    out += "  state " + std::to_string(s) +
           ": color " + std::to_string(d.color(static_cast<int>(s))) + "\n";
  if (n > 512) out += "  ...\n";
  return out;
}

inline std::string dump_npta_text(const ParityNpta& p, const Pms& m,
                                  const Signature& sig) {
  auto top_name = [&](Id g) { return m.stack_symbol_name(g); };
  std::string out = "tree automaton: arity " + std::to_string(p.arity) + "\n";
  std::vector<std::pair<int, Id>> work{{p.init, p.stack_symbols}};
  std::vector<std::pair<int, Id>> seen = work;
  std::size_t lines = 0;
  for (std::size_t qi = 0; qi < work.size() && lines < 800; ++qi) {
    auto [s, g] = work[qi];
    const auto& mv = p.moves(s, g);
    out += "head (state " + std::to_string(s) + ", top " + top_name(g) +
           "): " + std::to_string(mv.size()) + " moves\n";
    ++lines;
    for (const TreeMove& t : mv) {
      out += "  " + letter_text(t.letter, sig) + " ->";
      for (const auto& [kid, beta] : t.kids) {
        out += " (" + std::to_string(kid);
        if (beta.empty()) {
          out += ", pop)";
        } else {
          out += ",";
          for (Id b : beta) out += " " + top_name(b);
          out += ")";
        }
        if (!beta.empty()) {
          std::pair<int, Id> h{kid, beta.front()};
          bool dup = false;
          for (const auto& x : seen)
            if (x == h) { dup = true; break; }
          if (!dup && seen.size() < 256) {
            seen.push_back(h);
            work.push_back(h);
          }
        }
      }
      out += "\n";
      if (++lines >= 800) break;
    }
  }
  if (lines >= 800) out += "...\n";
  return out;
}

}  // namespace detail

// Indented rendering of a certificate tree (one node per line).
inline std::string certificate_text(const std::vector<WitnessNode>& w,
                                    const Signature& sig) {
  std::string out;
  if (w.empty()) return out;
  struct Item {
    std::size_t node;
    int depth;
  };
  std::vector<Item> stack{{0, 0}};
  while (!stack.empty()) {
    Item it = stack.back();
    stack.pop_back();
    const WitnessNode& n = w[it.node];
    out.append(static_cast<std::size_t>(2 * it.depth), ' ');
    out += detail::letter_text(n.letter, sig);
    out += "  [state " + std::to_string(n.state) + ", move " +
           std::to_string(n.move) + "]\n";
    for (auto rit = n.kids.rbegin(); rit != n.kids.rend(); ++rit)
      if (*rit >= 0)
        stack.push_back({static_cast<std::size_t>(*rit), it.depth + 1});
  }
  return out;
}

namespace detail {

inline Verdict run_check(const Pms& pms, const FRef& phi,
                         const CheckOpts& opts) {
  const auto t0 = CheckClock::now();
  Verdict v;
  v.mode = opts.mode;
  CheckStats& st = v.stats;

  if (!is_state_formula(phi))
    fail(ErrorKind::Fragment,
         "input: top-level formula must be a state formula");
  check_stage("system validation", [&] {
    pms.validate_total();
    if (opts.mode == CheckMode::Module) pms.validate_open();
    return 0;
  });

  st.formula_ast = ast_size(phi);
  st.pms_states = pms.num_states();
  st.pms_stack_symbols = pms.stack_symbols;
  st.pms_delta = pms.delta_size();

  // 1) alternating automaton accepting exactly the violating trees
  const auto tr0 = CheckClock::now();
  Signature sig = pms.sig;
  ParityAcg violating;
  std::vector<Id> guesses;
  if (is_atl(phi) && !opts.force_star) {
    violating = check_stage(
        "translation", [&] { return dualize(atl_to_acg(phi, pms.sig)); });
    st.acg_state_bound = 2 * st.formula_ast;
  } else {
    StarAcg s = check_stage("translation", [&] {
      return atlstar_to_acg(negate(phi), pms.sig, opts.star_budget);
    });
    violating = std::move(s.acg);
    sig = std::move(s.sig);
    guesses = std::move(s.guess_props);
    st.star_path = true;
    st.guessed_props = guesses.size();
    st.path_automata = s.path_automata;
    st.max_path_states = s.max_path_states;
  }
  st.acg_states = violating.num_states();
  st.acg_index = static_cast<std::size_t>(violating.index());
  st.acg_atoms = violating.atoms().size();
  st.ms_translate = ms_since(tr0);
  if (opts.dump_acg) v.debug_acg = dump_acg(violating, sig);

  // 2) violating-path word automaton, then its deterministic complement
  //    restricted to well-annotated branches
  const auto w0 = CheckClock::now();
  auto word = check_stage("violation word automaton",
                          [&] { return build_violation_nw(violating); });
  st.word_states = word.num_states();
  {
    std::vector<int> cs = word.color;
    sort_unique(cs);
    st.word_colors = cs.size();
  }
  st.det_bound_base = st.word_states * st.word_colors;
  auto det = check_stage("determinization", [&] {
    return codeterminize<UpsilonLetter>(word, opts.det_cap);
  });
  st.ms_word = ms_since(w0);

  // 3) pruning-tree automaton of the system
  const auto p0 = CheckClock::now();
  const std::size_t k = pms.branching_degree();
  st.arity = k;
  auto pwf = check_stage("pruning-tree automaton", [&] {
    return build_pwf(pms, violating, guesses,
                     opts.mode == CheckMode::Model);
  });
  NptaStats ps = check_stage("pruning-tree automaton", [&] {
    return measure_npta(pwf, opts.measure_cap);
  });
  st.pwf_states = pwf.num_states();
  st.pwf_heads = ps.heads;
  st.pwf_moves = ps.entries;
  st.pwf_push_len = ps.push_len;
  st.rho_norm = ps.entries + ps.push_len;
  st.pwf_index = static_cast<std::size_t>(ps.max_color) + 1;
  st.ms_pwf = ms_since(p0);

  // 4) product with branch acceptance, projected back to the system labels
  const auto pr0 = CheckClock::now();
  auto acc = build_acc_nta(det, static_cast<int>(k));
  auto product =
      check_stage("product", [&] { return intersect(pwf, acc); });
  std::vector<Id> keep;
  keep.reserve(pms.sig.props.size());
  for (Id p = 0; p < pms.sig.props.size(); ++p) keep.push_back(p);
  auto projected = project(product, std::move(keep));
  st.ms_product = ms_since(pr0);

  // 5) emptiness of the product decides the verdict
  const auto e0 = CheckClock::now();
  EmptinessOpts eo = opts.emptiness;
  if (!opts.want_certificate) eo.witness_nodes = 0;
  EmptinessResult er = check_stage(
      "emptiness", [&] { return check_emptiness(projected, eo); });
  st.ms_emptiness = ms_since(e0);

  st.det_states = det.num_states();
  {
    std::vector<int> cs;
    for (std::size_t s = 0; s < st.det_states; ++s)
      cs.push_back(det.color(static_cast<int>(s)));
    sort_unique(cs);
    st.det_index = cs.size();
  }
  st.product_states = projected.num_states();
  st.empt_rounds = er.rounds;
  st.empt_positions = er.positions;
  st.empt_pool = er.pool;
  st.empt_contexts = er.contexts;

  v.satisfiedReactively = er.verdict == TreeEmptiness::Empty;
  if (er.verdict == TreeEmptiness::NonEmpty && opts.want_certificate)
    v.certificate = std::move(er.witness);

  if (opts.dump_dpw) v.debug_dpw = dump_dpw_text(det);
  if (opts.dump_npta) v.debug_npta = dump_npta_text(projected, pms, sig);
  st.ms_total = ms_since(t0);
  return v;
}

}  // namespace detail

// Does every environment pruning of the system's unwinding satisfy the
// formula?  True exactly when the violating-tree product is empty.
inline Verdict module_check(const Pms& pms, const FRef& phi,
                            CheckOpts opts = {}) {
  opts.mode = CheckMode::Module;
  return detail::run_check(pms, phi, opts);
}

// Does the full unwinding itself satisfy the formula?  Same pipeline with
// every state treated as system-controlled.
inline Verdict model_check(const Pms& pms, const FRef& phi,
                           CheckOpts opts = {}) {
  opts.mode = CheckMode::Model;
  return detail::run_check(pms, phi, opts);
}

// ---------------------------------------------------------------------------
// bounded explicit-state oracle

// Both directions are reported because they are not each other's
// complements: "some pruning violates phi" does not mean "every pruning
// satisfies not-phi".
struct OracleVerdict {
  bool holds = false;           // phi satisfied by every pruning
  bool negation_holds = false;  // !phi satisfied by every pruning
  std::size_t prunings = 0;
  int depth = 0;
};

// Exact decision for step-bounded formulas: unwind to `depth`, enumerate
// every environment pruning, evaluate the formula on each tree.  Formulas
// whose step nesting fits inside the depth are insensitive to anything
// below it, so the bounded answer is the real one.
inline OracleVerdict oracle_module_check(const Pms& pms, const FRef& phi,
                                         int depth,
                                         bool force_all_system = false,
                                         std::size_t pruning_limit = std::size_t{1}
                                                                     << 20) {
  if (!is_state_formula(phi))
    fail(ErrorKind::Fragment,
         "oracle: top-level formula must be a state formula");
  int d = x_depth(phi);
  if (d < 0)
    fail(ErrorKind::Fragment,
         "oracle: only step-bounded formulas (no U/R/F/G) are supported");
  if (d > depth)
    fail(ErrorKind::Fragment,
         "oracle: step nesting " + std::to_string(d) +
             " exceeds the unwinding depth " + std::to_string(depth));
  pms.validate_total();
  if (!force_all_system) pms.validate_open();

  PrunedTree t = unwind_bounded(pms, depth, force_all_system);
  OracleVerdict out;
  out.depth = depth;
  out.holds = true;
  out.negation_holds = true;
  FRef nphi = negate(phi);
  out.prunings = enumerate_prunings(
      t,
      [&](const PrunedTree& pt) {
        if (!eval_finite(pt, phi)) out.holds = false;
        if (!eval_finite(pt, nphi)) out.negation_holds = false;
      },
      pruning_limit);
  return out;
}

}  // namespace pdmc
