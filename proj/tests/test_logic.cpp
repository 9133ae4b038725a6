// Formula parsing, classification, and the ground-truth evaluators.
#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "pdmc/eval.hpp"
#include "pdmc/logic.hpp"
#include "pdmc/pms_parser.hpp"
#include "testutil.hpp"

using namespace pdmc;
using testutil::CgsOpts;
using testutil::random_cgs;

static Signature coffee_sig() {
  Signature sig;
  sig.agents = {"env", "br", "mp"};
  sig.actions = {"go"};
  sig.props = {"choice", "reqb", "reqw", "rej", "black", "white", "milk"};
  sig.finish();
  return sig;
}

TEST_CASE("parser handles the coffee properties") {
  Signature sig = coffee_sig();
  FRef f = parse_formula("<<br>> F black", sig);
  REQUIRE(f->kind == FKind::Quant);
  REQUIRE(f->agents == std::vector<Id>{1});
  REQUIRE(f->a->kind == FKind::Finally);
  REQUIRE(f->a->a->kind == FKind::Prop);

  FRef g = parse_formula("A G (!reqw & !rej) -> <<br>> F black", sig);
  REQUIRE(g->kind == FKind::Imply);
  REQUIRE(g->a->kind == FKind::Quant);
  REQUIRE(g->a->agents.empty());
  REQUIRE(g->a->a->kind == FKind::Globally);
  REQUIRE(structural_equal(g->b, f));

  REQUIRE(parse_formula("true", sig)->kind == FKind::True);

  FRef e = parse_formula("E X choice", sig);
  REQUIRE(e->kind == FKind::Quant);
  REQUIRE(e->agents == std::vector<Id>{0, 1, 2});

  FRef d = parse_formula("[[br,mp]] G reqb", sig);
  REQUIRE(d->kind == FKind::DQuant);
  REQUIRE(d->agents == std::vector<Id>{1, 2});
}

TEST_CASE("parser precedence and associativity") {
  Signature sig = coffee_sig();
  // unary > U > & > | > ->
  FRef f = parse_formula("!reqb U rej & black | white -> milk", sig);
  REQUIRE(f->kind == FKind::Imply);
  REQUIRE(f->a->kind == FKind::Or);
  REQUIRE(f->a->a->kind == FKind::And);
  REQUIRE(f->a->a->a->kind == FKind::Until);
  REQUIRE(f->a->a->a->a->kind == FKind::Not);
  // U is right associative
  FRef u = parse_formula("reqb U rej U black", sig);
  REQUIRE(u->kind == FKind::Until);
  REQUIRE(u->b->kind == FKind::Until);
  // -> is right associative
  FRef i = parse_formula("reqb -> rej -> black", sig);
  REQUIRE(i->kind == FKind::Imply);
  REQUIRE(i->b->kind == FKind::Imply);
}

TEST_CASE("parser rejects malformed input") {
  Signature sig = coffee_sig();
  auto bad = [&](const std::string& text, ErrorKind k) {
    try {
      parse_formula(text, sig);
      FAIL("expected failure on: " + text);
    } catch (const PdmcError& e) {
      REQUIRE(e.kind == k);
    }
  };
  bad("reqb &", ErrorKind::Syntax);
  bad("(reqb", ErrorKind::Syntax);
  bad("reqb reqw", ErrorKind::Syntax);
  bad("<<br reqb", ErrorKind::Syntax);
  bad("nosuchprop", ErrorKind::Input);
  bad("<<nobody>> X reqb", ErrorKind::Input);
}

TEST_CASE("round trip through the pretty printer") {
  Signature sig = coffee_sig();
  for (const char* text :
       {"true", "!reqb", "reqb U rej U black", "(reqb U rej) U black",
        "A G (!reqw & !rej) -> <<br>> F black", "[[env]] X (reqb | reqw)",
        "<<>> G (reqb -> <<br,mp>> F white)", "!(reqb & rej)"}) {
    FRef f = parse_formula(text, sig);
    REQUIRE(structural_equal(f, parse_formula(pretty(f, sig), sig)));
  }
  std::mt19937 rng(5);
  for (int i = 0; i < 300; ++i) {
    FRef f = testutil::random_atl(rng, sig, 10);
    REQUIRE(structural_equal(f, parse_formula(pretty(f, sig), sig)));
  }
}

TEST_CASE("fragment classification") {
  Signature sig = coffee_sig();
  auto f = [&](const char* t) { return parse_formula(t, sig); };
  REQUIRE(is_state_formula(f("reqb & !rej")));
  REQUIRE(is_state_formula(f("<<br>> F black")));
  REQUIRE_FALSE(is_state_formula(f("X reqb")));
  REQUIRE_FALSE(is_state_formula(f("reqb U rej")));
  REQUIRE(is_state_formula(f("<<br>> (X reqb & G rej)")));  // ATL*, still a state formula

  REQUIRE(is_atl(f("<<br>> F black")));
  REQUIRE(is_atl(f("A G (!reqw & !rej) -> <<br>> F black")));
  REQUIRE(is_atl(f("[[env]] X (reqb U rej)")) == false);  // bare U operand
  REQUIRE(is_atl(f("[[env]] X <<br>> (reqb U rej)")));
  REQUIRE_FALSE(is_atl(f("<<br>> (X reqb & G rej)")));
  REQUIRE_FALSE(is_atl(f("<<br>> black")));  // quantifier without temporal operator

  REQUIRE(x_depth(f("reqb")) == 0);
  REQUIRE(x_depth(f("<<br>> X reqb")) == 1);
  REQUIRE(x_depth(f("<<br>> X ([[env]] X reqb & <<>> X reqw)")) == 2);
  REQUIRE(x_depth(f("<<br>> F black")) == -1);
}

TEST_CASE("basic subformulas come innermost first") {
  Signature sig = coffee_sig();
  REQUIRE(basic_subformulas(parse_formula("reqb", sig)).empty());

  FRef f = parse_formula("<<env>> X <<br>> X reqb", sig);
  auto bs = basic_subformulas(f);
  REQUIRE(bs.size() == 2);
  REQUIRE(structural_equal(bs[0], parse_formula("<<br>> X reqb", sig)));
  REQUIRE(structural_equal(bs[1], f));

  FRef g = parse_formula("A G (!reqw & !rej) -> <<br>> F black", sig);
  auto bg = basic_subformulas(g);
  REQUIRE(bg.size() == 2);
  REQUIRE(bg[0]->kind == FKind::Quant);  // A G (...)
  REQUIRE(structural_equal(bg[1], parse_formula("<<br>> F black", sig)));

  // duplicates collapse
  FRef h = parse_formula("<<br>> X reqb | !<<br>> X reqb", sig);
  REQUIRE(basic_subformulas(h).size() == 1);
}

// ---------------------------------------------------------------------------
// finite-structure evaluation

// 2 states, agent a0 alone steers: action x0 stays in s0, x1 goes to s1.
static FiniteCgs steering_cgs() {
  FiniteCgs g;
  g.sig = testutil::make_sig(2, 2, 1, false);
  g.state_names = {"s0", "s1"};
  g.labels = {{}, {0}};  // p0 only at s1
  g.init_state = 0;
  g.init_tables();
  for (Id other = 0; other < 2; ++other) {
    g.add_entry(0, {0, other}, 0);
    g.add_entry(0, {1, other}, 1);
    g.add_entry(1, {0, other}, 1);
    g.add_entry(1, {1, other}, 1);
  }
  return g;
}

TEST_CASE("steering agent decides X") {
  FiniteCgs g = steering_cgs();
  auto f = [&](const char* t) { return parse_formula(t, g.sig); };
  REQUIRE(eval_finite_init(g, f("<<a0>> X p0")));
  REQUIRE_FALSE(eval_finite_init(g, f("<<a1>> X p0")));  // a1 cannot force it
  REQUIRE_FALSE(eval_finite_init(g, f("A X p0")));
  REQUIRE(eval_finite_init(g, f("E X p0")));
  REQUIRE(eval_finite_init(g, f("<<a0>> F p0")));
  REQUIRE(eval_finite_init(g, f("<<a0>> G !p0")));
  REQUIRE_FALSE(eval_finite_init(g, f("<<a1>> G !p0")));
  // dual quantifier: a1 cannot avoid a0 keeping the play in !p0
  REQUIRE(eval_finite_init(g, f("[[a1]] X !p0")));
  REQUIRE(eval_finite_init(g, f("[[a1]] F p0")) ==
          eval_finite_init(g, f("!<<a1>> G !p0")));
}

TEST_CASE("evaluation distributes over negation pointwise") {
  std::mt19937 rng(17);
  CgsOpts o;
  o.max_states = 5;
  for (int iter = 0; iter < 120; ++iter) {
    FiniteCgs g = random_cgs(rng, o);
    FRef f = testutil::random_atl(rng, g.sig, 8);
    auto pos = eval_finite(g, f);
    auto neg = eval_finite(g, negate(f));
    for (std::size_t s = 0; s < pos.size(); ++s)
      REQUIRE(static_cast<bool>(pos[s]) == !neg[s]);
    // double negation elimination is semantics preserving
    auto simp = eval_finite(g, simplify_double_neg(negate(negate(f))));
    REQUIRE(simp == pos);
  }
}

TEST_CASE("quantifiers over the full and empty coalitions match a CTL checker") {
  std::mt19937 rng(29);
  CgsOpts o;
  o.max_states = 5;
  o.props = 2;
  for (int iter = 0; iter < 50; ++iter) {
    FiniteCgs g = random_cgs(rng, o);
    for (int j = 0; j < 4; ++j) {
      FRef f = testutil::random_atl(rng, g.sig, 8, testutil::TeamMode::CtlOnly);
      auto ours = eval_finite(g, f);
      auto ctl = testutil::ctl_eval(g, f);
      REQUIRE(ours == ctl);
    }
  }
}

TEST_CASE("state formulas only at the top level") {
  FiniteCgs g = steering_cgs();
  REQUIRE_THROWS_AS(eval_finite(g, parse_formula("X p0", g.sig)), PdmcError);
  try {
    eval_finite(g, parse_formula("<<a0>> (X p0 & G p0)", g.sig));
    FAIL("expected fragment error");
  } catch (const PdmcError& e) {
    REQUIRE(e.kind == ErrorKind::Fragment);
  }
}

// ---------------------------------------------------------------------------
// pruned-tree evaluation

TEST_CASE("universal next over retained children") {
  // one env node with two children, labels {p} and {}
  Pms m = parse_pms(
      "agents: env, sys\n"
      "actions: go, stop\n"
      "props: p\n"
      "init: s\n"
      "label t: p\n"
      "trans s $ [env=go, sys=go] -> t keep\n"
      "trans s $ [env=stop, sys=go] -> u keep\n"
      "trans t $ [env=go, sys=go] -> t keep\n"
      "trans u $ [env=go, sys=go] -> u keep\n");
  PrunedTree full = unwind_bounded(m, 1);
  FRef f = parse_formula("A X p", m.sig);
  REQUIRE_FALSE(eval_finite(full, f));
  std::vector<std::uint64_t> keep(full.nodes.size(), ~0ull);
  keep[0] = 1;  // retain only the {p} child
  REQUIRE(eval_finite(apply_pruning(full, keep), f));
  keep[0] = 2;  // retain only the {} child
  REQUIRE_FALSE(eval_finite(apply_pruning(full, keep), f));
}

TEST_CASE("tree evaluation rejects unsupported fragments") {
  Pms m = parse_pms(
      "agents: env\n"
      "actions: go\n"
      "props: p\n"
      "init: s\n"
      "trans s $ [env=go] -> s keep\n");
  PrunedTree t = unwind_bounded(m, 2);
  REQUIRE_THROWS_AS(eval_finite(t, parse_formula("<<env>> F p", m.sig)),
                    PdmcError);
  // X-nesting 3 does not fit depth 2
  REQUIRE_THROWS_AS(
      eval_finite(t, parse_formula("A X A X A X p", m.sig)), PdmcError);
  REQUIRE_NOTHROW(eval_finite(t, parse_formula("A X A X p", m.sig)));
}

TEST_CASE("maximal unwinding agrees with direct evaluation on X formulas") {
  std::mt19937 rng(41);
  CgsOpts o;
  o.max_states = 4;
  o.agents = 2;
  o.actions = 2;
  for (int iter = 0; iter < 150; ++iter) {
    FiniteCgs g = random_cgs(rng, o);
    PrunedTree t = unwind_bounded(g, 3);
    for (int j = 0; j < 3; ++j) {
      FRef f = testutil::random_xbounded(rng, g.sig, 3, 9);
      bool via_tree = eval_finite(t, f);
      bool direct = eval_finite_init(g, f);
      REQUIRE(via_tree == direct);
    }
  }
}

TEST_CASE("coffee machine X-bounded spot checks") {
  Pms m = parse_pms_file(std::string(PDMC_FIXTURE_DIR) + "/coffee.pms");
  PrunedTree t = unwind_bounded(m, 2);
  auto f = [&](const char* s) { return parse_formula(s, m.sig); };
  // on the maximal tree the environment may request white immediately
  REQUIRE_FALSE(eval_finite(t, f("A X !reqw")));
  REQUIRE(eval_finite(t, f("E X reqw")));
  // brewer pours at will: after any request it can reach served-or-request
  REQUIRE(eval_finite(t, f("A X (reqb | reqw | rej)")));
  REQUIRE(eval_finite(t, f("A X A X (black | milk | reqb | reqw | choice)")));
  // pruning away everything but the rejection keeps the tree legal
  std::vector<std::uint64_t> keep(t.nodes.size(), ~0ull);
  keep[0] = 1ull << 4;  // only the rejb child of the root
  PrunedTree p = apply_pruning(t, keep);
  REQUIRE(eval_finite(p, f("A X (reqb & rej)")));
}
