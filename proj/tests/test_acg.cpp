// Alternating automata: translation from ATL, dualization, and the
// membership game, cross-checked against the fixpoint evaluator.
#include <random>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "pdmc/acg.hpp"
#include "pdmc/acg_accept.hpp"
#include "pdmc/eval.hpp"
#include "pdmc/pms_parser.hpp"
#include "testutil.hpp"

using namespace pdmc;

namespace {

// Every total two-state structure over 2 agents x 2 actions x 1 prop: all
// four decisions defined, each target free, each state label free.
std::vector<FiniteCgs> exhaustive_two_state() {
  Signature sig = testutil::make_sig(2, 2, 1, false);
  auto pool = testutil::all_decisions(2, 2);
  std::vector<FiniteCgs> out;
  for (int targets = 0; targets < 64; ++targets) {  // 4 + 2 free target bits
    for (int lab = 0; lab < 4; ++lab) {
      FiniteCgs g;
      g.sig = sig;
      g.state_names = {"s0", "s1"};
      g.labels.assign(2, {});
      if (lab & 1) g.labels[0].push_back(0);
      if (lab & 2) g.labels[1].push_back(0);
      g.init_state = 0;
      g.init_tables();
      int t = targets;
      for (Id s = 0; s < 2; ++s)
        for (std::size_t d = 0; d < pool.size(); ++d) {
          if (s == 1 && d >= 2) break;  // halve the sweep: s1 keeps 2 rows
          g.add_entry(s, pool[d], static_cast<Id>(t & 1));
          t >>= 1;
        }
      out.push_back(std::move(g));
    }
  }
  return out;
}

}  // namespace

TEST_CASE("single literal formulas build one-state automata") {
  Signature sig = testutil::make_sig(2, 2, 2, false);
  FRef p = parse_formula("p0", sig);
  ParityAcg a = atl_to_acg(p, sig);
  REQUIRE(a.num_states() == 1);
  REQUIRE(a.atoms().empty());
  REQUIRE(a.index() == 1);

  FRef np = parse_formula("!p0", sig);
  REQUIRE(atl_to_acg(np, sig).num_states() == 1);
  REQUIRE(atl_to_acg(f_true(), sig).num_states() == 1);

  std::mt19937 rng(4501);
  testutil::CgsOpts o;
  for (int i = 0; i < 40; ++i) {
    FiniteCgs g = testutil::random_cgs(rng, o);
    bool has_p = sorted_contains(g.labels[g.init_state], Id{0});
    REQUIRE(acg_accepts(a, g) == has_p);
    REQUIRE(acg_accepts(atl_to_acg(np, sig), g) == !has_p);
    REQUIRE(acg_accepts(atl_to_acg(f_true(), sig), g));
    // the dual of a literal automaton accepts exactly the complement
    REQUIRE(acg_accepts(dualize(a), g) == !has_p);
  }
}

TEST_CASE("next formula shape: two states, one box atom") {
  Signature sig = testutil::make_sig(2, 2, 1, false);
  ParityAcg a = atl_to_acg(parse_formula("<<a0>>X p0", sig), sig);
  REQUIRE(a.num_states() == 2);
  auto atoms = a.atoms();
  REQUIRE(atoms.size() == 1);
  REQUIRE(atoms[0].mode == AtomMode::Box);
  REQUIRE(atoms[0].team == std::vector<Id>{0});
  REQUIRE(atoms[0].q == 1);  // the p0 dispatch state
  REQUIRE(a.init == 0);
  REQUIRE(a.index() <= 2);

  ParityAcg d = dualize(a);
  REQUIRE(d.atoms().size() == 1);
  REQUIRE(d.atoms()[0].mode == AtomMode::Diamond);
}

TEST_CASE("next formulas agree with the oracle on an exhaustive class") {
  Signature sig = testutil::make_sig(2, 2, 1, false);
  std::vector<FRef> formulas = {
      parse_formula("<<a0>>X p0", sig),   parse_formula("[[a0]]X p0", sig),
      parse_formula("<<a0,a1>>X p0", sig), parse_formula("<<>>X p0", sig),
      parse_formula("<<a1>>X !p0", sig),
  };
  std::vector<ParityAcg> built;
  for (const FRef& f : formulas) built.push_back(atl_to_acg(f, sig));
  for (const FiniteCgs& g : exhaustive_two_state()) {
    for (std::size_t i = 0; i < formulas.size(); ++i) {
      bool want = eval_finite_init(g, formulas[i]);
      REQUIRE(acg_accepts(built[i], g) == want);
      REQUIRE(acg_accepts(dualize(built[i]), g) == !want);
    }
  }
}

TEST_CASE("coffee machine depth-zero projection matches the oracle") {
  Pms m = parse_pms_file(std::string(PDMC_FIXTURE_DIR) + "/coffee.pms");
  FiniteCgs g = testutil::finite_projection(m);

  struct Case {
    const char* text;
    bool expect;
  };
  // the environment can demand white coffee forever, so the brewer alone
  // cannot force black delivery
  std::vector<Case> cases = {
      {"<<br>> F black", false},
      {"<<env,br>> F black", true},
      {"<<>> G !rej", false},
      {"<<env>> F rej", true},
      {"<<br,mp>> G !white", true},
      {"[[br]] G !black", true},  // complement of the first case
      {"[[env]] F black", false},
  };
  for (const auto& c : cases) {
    FRef f = parse_formula(c.text, g.sig);
    bool oracle = eval_finite_init(g, f);
    REQUIRE(oracle == c.expect);
    ParityAcg a = atl_to_acg(f, g.sig);
    REQUIRE(acg_accepts(a, g) == oracle);
    REQUIRE(acg_accepts(dualize(a), g) == !oracle);
  }
}

TEST_CASE("release operator round trip") {
  Signature sig = testutil::make_sig(2, 2, 2, false);
  FRef f = parse_formula("<<a0>>(p0 R p1)", sig);
  REQUIRE(is_atl(f));
  ParityAcg a = atl_to_acg(f, sig);
  std::mt19937 rng(4502);
  testutil::CgsOpts o;
  for (int i = 0; i < 60; ++i) {
    FiniteCgs g = testutil::random_cgs(rng, o);
    REQUIRE(acg_accepts(a, g) == eval_finite_init(g, f));
  }
}

TEST_CASE("dualize is an involution up to a uniform color shift") {
  Signature sig = testutil::make_sig(2, 2, 2, false);
  std::mt19937 rng(4503);
  for (int i = 0; i < 25; ++i) {
    FRef f = testutil::random_atl(rng, sig, 8);
    ParityAcg a = atl_to_acg(f, sig);
    ParityAcg dd = dualize(dualize(a));
    REQUIRE(dd.num_states() == a.num_states());
    for (Id q = 0; q < a.num_states(); ++q)
      REQUIRE(dd.color[q] == a.color[q] + 2);
    REQUIRE(dd.pool.size() == a.pool.size());
    for (std::size_t e = 0; e < a.pool.size(); ++e) {
      REQUIRE(dd.pool[e].kind == a.pool[e].kind);
      REQUIRE(dd.pool[e].mode == a.pool[e].mode);
      REQUIRE(dd.pool[e].team == a.pool[e].team);
    }
    testutil::CgsOpts o;
    FiniteCgs g = testutil::random_cgs(rng, o);
    REQUIRE(acg_accepts(dd, g) == acg_accepts(a, g));
  }
}

TEST_CASE("translation agrees with the oracle on five hundred random pairs") {
  std::mt19937 rng(4504);
  testutil::CgsOpts o;  // 2..4 states, 2 agents, 2 actions, 2 props
  for (int i = 0; i < 500; ++i) {
    FiniteCgs g = testutil::random_cgs(rng, o);
    FRef f = testutil::random_atl(rng, g.sig, 8);
    REQUIRE(is_atl(f));
    ParityAcg a = atl_to_acg(f, g.sig);
    REQUIRE(a.index() <= 2);
    REQUIRE(a.num_states() <= 2 * ast_size(f));
    bool got = acg_accepts(a, g);
    REQUIRE(got == eval_finite_init(g, f));
    REQUIRE(acg_accepts(dualize(a), g) == !got);
  }
}

TEST_CASE("formulas outside the fragment are rejected") {
  Signature sig = testutil::make_sig(2, 2, 2, false);
  for (const char* text : {"F p0", "<<a0>>p0", "<<a0>>(X p0 & X p1)",
                           "<<a0>>X F p0"}) {
    FRef f = parse_formula(text, sig);
    try {
      atl_to_acg(f, sig);
      FAIL("expected rejection of: " << text);
    } catch (const PdmcError& e) {
      REQUIRE(e.kind == ErrorKind::Fragment);
    }
  }
}

TEST_CASE("construction and membership are deterministic") {
  Signature sig = testutil::make_sig(2, 2, 2, false);
  FRef f = parse_formula("<<a0>>(p0 U p1) & [[a1]]G p0", sig);
  ParityAcg a1 = atl_to_acg(f, sig), a2 = atl_to_acg(f, sig);
  REQUIRE(dump_acg(a1, sig) == dump_acg(a2, sig));
  std::mt19937 rng(4505);
  testutil::CgsOpts o;
  FiniteCgs g = testutil::random_cgs(rng, o);
  bool first = acg_accepts(a1, g);
  for (int i = 0; i < 5; ++i) REQUIRE(acg_accepts(a1, g) == first);
  REQUIRE(acg_accepts(a2, g) == first);
}

TEST_CASE("dump lists every state with color and transition text") {
  Signature sig = testutil::make_sig(2, 2, 2, false);
  ParityAcg a = atl_to_acg(parse_formula("<<a0>>(p0 U p1)", sig), sig);
  std::string d = dump_acg(a, sig);
  REQUIRE(d.find("acg: 1 states") == 0);
  REQUIRE(d.find("color 1") != std::string::npos);   // until state is odd
  REQUIRE(d.find("box,{a0}") != std::string::npos);
  REQUIRE(d.find("p1 ?") != std::string::npos);
}
