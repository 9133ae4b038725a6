// Pushdown system core: parsing, classification, canonical successor order,
// bounded unwindings, pruning enumeration, blank-completion encoding.
#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "pdmc/pms_parser.hpp"
#include "pdmc/system_model.hpp"

using namespace pdmc;

static Pms load_coffee() {
  return parse_pms_file(std::string(PDMC_FIXTURE_DIR) + "/coffee.pms");
}

static Id state_of(const Pms& m, const std::string& name) {
  for (Id q = 0; q < m.num_states(); ++q)
    if (m.state_names[q] == name) return q;
  FAIL("no state " + name);
  return kNoId;
}

static Decision dec(const Pms& m, std::vector<std::string> names) {
  Decision d;
  for (auto& n : names) d.push_back(m.sig.action_index.at(n));
  return d;
}

TEST_CASE("coffee fixture parses and validates") {
  Pms m = load_coffee();
  REQUIRE(m.num_states() == 8);
  REQUIRE(m.stack_symbols == 1);
  REQUIRE(m.sig.agents == std::vector<std::string>{"env", "br", "mp"});
  REQUIRE_NOTHROW(m.validate_open());
  REQUIRE(m.state_names[m.init_state] == "choice");
  // labels: rejb carries both the request and the rejection flag
  Id rejb = state_of(m, "rejb");
  REQUIRE(m.labels[rejb] ==
          std::vector<Id>{m.sig.prop_index.at("reqb"), m.sig.prop_index.at("rej")});
}

TEST_CASE("coffee successor list at the selection state, empty stack") {
  Pms m = load_coffee();
  Id choice = state_of(m, "choice");
  Id g = 0;
  const auto& succ = m.next_successors(choice, m.bottom());
  REQUIRE(succ.size() == 6);
  auto expect = [&](std::size_t i, const std::string& st, StackWord w) {
    REQUIRE(m.state_names[succ[i].state] == st);
    REQUIRE(succ[i].push == w);
  };
  expect(0, "reqb", {g});
  expect(1, "reqb", {});
  expect(2, "reqw", {g});
  expect(3, "reqw", {});
  expect(4, "rejb", {});
  expect(5, "rejw", {});
  REQUIRE(m.branching_degree() == 6);
}

TEST_CASE("coffee control classification") {
  Pms m = load_coffee();
  Id g = 0;
  REQUIRE(m.classify_control(state_of(m, "choice"), m.bottom()) ==
          Owner::Environment);
  REQUIRE(m.classify_control(state_of(m, "choice"), g) == Owner::Environment);
  REQUIRE(m.classify_control(state_of(m, "reqb"), m.bottom()) == Owner::System);
  REQUIRE(m.classify_control(state_of(m, "milkst"), g) == Owner::System);
  REQUIRE(m.classify_control(state_of(m, "black"), m.bottom()) == Owner::System);
}

TEST_CASE("step implements the three transition cases") {
  Pms m = load_coffee();
  Id choice = state_of(m, "choice");
  Id reqb = state_of(m, "reqb");
  Id g = 0;
  Config c0 = initial_config(m);
  REQUIRE(c0.stack == std::vector<Id>{m.bottom()});

  // bottom on top: pushed word sits above the preserved bottom
  auto c1 = step(m, c0, dec(m, {"b+", "ign", "ign"}));
  REQUIRE(c1.has_value());
  REQUIRE(c1->state == reqb);
  REQUIRE(c1->stack == std::vector<Id>{g, m.bottom()});

  // plain symbol on top: replaced by the target word (pop here)
  Config c2{choice, {g, m.bottom()}};
  auto c3 = step(m, c2, dec(m, {"b-", "ign", "ign"}));
  REQUIRE(c3.has_value());
  REQUIRE(c3->state == reqb);
  REQUIRE(c3->stack == std::vector<Id>{m.bottom()});

  // undefined decision models the halt symbol
  REQUIRE_FALSE(step(m, c0, dec(m, {"pour", "ign", "ign"})).has_value());
}

TEST_CASE("stack stays well formed along random walks") {
  Pms m = load_coffee();
  std::mt19937 rng(7);
  for (int run = 0; run < 20; ++run) {
    Config c = initial_config(m);
    for (int i = 0; i < 200; ++i) {
      const auto& row = m.row(c.state, top_symbol(c));
      const auto& e = row[rng() % row.size()];
      auto n = step(m, c, e.decision);
      REQUIRE(n.has_value());
      c = *n;
      REQUIRE_FALSE(c.stack.empty());
      REQUIRE(c.stack.back() == m.bottom());
      for (std::size_t j = 0; j + 1 < c.stack.size(); ++j)
        REQUIRE(c.stack[j] != m.bottom());
    }
  }
}

TEST_CASE("single-agent system is system-controlled everywhere") {
  Pms m = parse_pms(
      "agents: env\n"
      "actions: a\n"
      "props: p\n"
      "stack: x\n"
      "init: s\n"
      "label s: p\n"
      "trans s $ [env=a] -> s push x\n"
      "trans s x [env=a] -> s pop\n");
  REQUIRE(m.classify_control(0, m.bottom()) == Owner::System);
  REQUIRE(m.classify_control(0, 0) == Owner::System);
}

TEST_CASE("two free agents make a pair neither controlled nor passive") {
  Pms m = parse_pms(
      "agents: env, sys\n"
      "actions: a, b\n"
      "init: s\n"
      "trans s $ [env=a, sys=a] -> s keep\n"
      "trans s $ [env=a, sys=b] -> t keep\n"
      "trans s $ [env=b, sys=a] -> u keep\n"
      "trans s $ [env=b, sys=b] -> v keep\n"
      "trans t $ [env=a, sys=a] -> t keep\n"
      "trans u $ [env=a, sys=a] -> u keep\n"
      "trans v $ [env=a, sys=a] -> v keep\n");
  REQUIRE_THROWS_AS(m.classify_control(0, m.bottom()), PdmcError);
  try {
    m.validate_open();
    FAIL("expected rejection");
  } catch (const PdmcError& e) {
    REQUIRE(e.kind == ErrorKind::NotOpen);
  }
}

TEST_CASE("duplicate targets collapse in the successor list") {
  Pms m = parse_pms(
      "agents: env, sys\n"
      "actions: a, b\n"
      "init: s\n"
      "trans s $ [env=a, sys=a] -> t keep\n"
      "trans s $ [env=b, sys=a] -> t keep\n"
      "trans t $ [env=a, sys=a] -> t keep\n");
  REQUIRE(m.next_successors(0, m.bottom()).size() == 1);
  REQUIRE(m.branching_degree() == 1);
}

TEST_CASE("parser rejects bad inputs with line positions") {
  auto expect_err = [](const std::string& text, ErrorKind kind,
                       const std::string& needle) {
    try {
      parse_pms(text);
      FAIL("expected error containing: " + needle);
    } catch (const PdmcError& e) {
      REQUIRE(e.kind == kind);
      REQUIRE(std::string(e.what()).find(needle) != std::string::npos);
    }
  };
  std::string head =
      "agents: env\nactions: a\nstack: x\ninit: s\n";
  expect_err(head + "trans s $ [env=a] -> s push x\n"
                    "trans s x [env=a] -> s keep\n"
                    "trans s x [env=a] -> s pop\n",
             ErrorKind::Input, "line 7: duplicate decision");
  expect_err(head + "trans s $ [env=a] -> s push $\n", ErrorKind::Input,
             "bottom symbol cannot be pushed");
  expect_err(head + "trans s $ [env=zap] -> s keep\n", ErrorKind::Input,
             "unknown action");
  expect_err(head + "trans s $ [env=a] -> t keep\n", ErrorKind::Input,
             "no transition declared");  // (t, x) and (t, $) rows missing
  expect_err(head + "trans s $ env=a -> s keep\n", ErrorKind::Syntax,
             "decision block");
  expect_err("agents: env\nactions: a\ninit: s\n"
             "trans s $ [env=*, env=a] -> s keep\n",
             ErrorKind::Input, "assigned twice");
}

TEST_CASE("star expansion follows action declaration order") {
  Pms m = parse_pms(
      "agents: env, sys\n"
      "actions: a, b, c\n"
      "init: s\n"
      "trans s $ [env=*, sys=a] -> t keep\n"
      "trans s $ [env=a, sys=b] -> u keep\n"
      "trans s $ [env=a, sys=c] -> u keep\n"
      "trans t $ [env=a, sys=*] -> t keep\n"
      "trans u $ [env=a, sys=*] -> u keep\n");
  // (s,$): env free over a,b,c with sys=a, plus (a,b),(a,c) -> u
  REQUIRE(m.row(0, m.bottom()).size() == 5);
  const auto& row = m.row(0, m.bottom());
  REQUIRE(row[0].decision == Decision{0, 0});
  REQUIRE(row[1].decision == Decision{1, 0});
  REQUIRE(row[2].decision == Decision{2, 0});
  // env has 3 available actions, sys has 3 (a, b, c at env=a): open fails
  REQUIRE_THROWS_AS(m.validate_open(), PdmcError);
}

TEST_CASE("round trip through the writer preserves the table") {
  Pms m = load_coffee();
  Pms m2 = parse_pms(write_pms(m));
  REQUIRE(m2.num_states() == m.num_states());
  REQUIRE(m2.delta_size() == m.delta_size());
  REQUIRE(m2.branching_degree() == m.branching_degree());
  for (Id q = 0; q < m.num_states(); ++q)
    for (Id g = 0; g <= m.stack_symbols; ++g) {
      auto a = m.next_successors(q, g);
      auto b = m2.next_successors(state_of(m2, m.state_names[q]), g);
      REQUIRE(a.size() == b.size());
    }
}

// ---------------------------------------------------------------------------
// unwindings and prunings

TEST_CASE("depth-zero unwinding is a single root") {
  Pms m = load_coffee();
  PrunedTree t = unwind_bounded(m, 0);
  REQUIRE(t.nodes.size() == 1);
  REQUIRE(t.nodes[0].kids.empty());
  REQUIRE(t.kind_of(t.nodes[0]).label ==
          std::vector<Id>{m.sig.prop_index.at("choice")});
}

TEST_CASE("coffee depth-1 unwinding has six children in canonical order") {
  Pms m = load_coffee();
  PrunedTree t = unwind_bounded(m, 1);
  REQUIRE(t.nodes.size() == 7);
  REQUIRE(t.nodes[0].kids.size() == 6);
  for (Id d = 0; d < 6; ++d) REQUIRE(t.nodes[0].kids[d].first == d);
  REQUIRE(t.arity == 6);
  REQUIRE(t.kind_of(t.nodes[0]).owner == Owner::Environment);
}

TEST_CASE("deterministic chain unwinds to a path") {
  Pms m = parse_pms(
      "agents: env\n"
      "actions: a\n"
      "stack: x\n"
      "init: s\n"
      "trans s $ [env=a] -> s push x\n"
      "trans s x [env=a] -> s push x\n");
  PrunedTree t = unwind_bounded(m, 5);
  REQUIRE(t.nodes.size() == 6);
  for (int i = 0; i < 5; ++i) REQUIRE(t.nodes[i].kids.size() == 1);
}

TEST_CASE("pruning counts: coffee depth 1 gives 63") {
  Pms m = load_coffee();
  PrunedTree t = unwind_bounded(m, 1);
  REQUIRE(count_prunings(t) == 63.0);
  std::size_t seen = 0;
  bool saw_maximal = false;
  std::size_t n = enumerate_prunings(t, [&](const PrunedTree& p) {
    ++seen;
    REQUIRE(p.nodes[0].kids.size() >= 1);
    if (p.nodes.size() == t.nodes.size()) saw_maximal = true;
  });
  REQUIRE(n == 63);
  REQUIRE(seen == 63);
  REQUIRE(saw_maximal);
}

TEST_CASE("no environment nodes means a single pruning") {
  Pms m = parse_pms(
      "agents: env\n"
      "actions: a, b\n"
      "init: s\n"
      "trans s $ [env=a] -> s keep\n");
  PrunedTree t = unwind_bounded(m, 3);
  std::size_t n = enumerate_prunings(t, [](const PrunedTree&) {});
  REQUIRE(n == 1);
}

TEST_CASE("enumeration refuses oversized products") {
  Pms m = load_coffee();
  PrunedTree t = unwind_bounded(m, 4);  // thousands of env nodes
  try {
    enumerate_prunings(t, [](const PrunedTree&) {}, 10000);
    FAIL("expected a guard error");
  } catch (const PdmcError& e) {
    REQUIRE(e.kind == ErrorKind::Guard);
  }
}

// Random trees: the stream length equals the product over environment nodes
// of (2^children - 1), checked against an independently coded subset walk.
namespace {

PrunedTree random_tree(std::mt19937& rng, int max_depth) {
  PrunedTree t;
  t.depth = max_depth;
  struct Item {
    int node;
    int depth;
  };
  auto add_node = [&](Owner o, std::size_t degree) {
    TreeKind k;
    k.owner = o;
    k.full_degree = degree;
    t.kinds.push_back(k);
    t.nodes.push_back({static_cast<Id>(t.kinds.size() - 1), {}});
    t.arity = std::max(t.arity, degree);
    return static_cast<int>(t.nodes.size() - 1);
  };
  int env_budget = 20;
  std::function<int(int)> build = [&](int depth) {
    std::size_t degree = depth == max_depth ? 0 : rng() % 4;
    Owner o = (rng() % 2 == 0 && env_budget > 0) ? Owner::Environment
                                                 : Owner::System;
    if (o == Owner::Environment && degree > 0) --env_budget;
    int me = add_node(o, degree);
    for (std::size_t d = 0; d < degree; ++d) {
      int kid = build(depth + 1);
      t.nodes[me].kids.emplace_back(static_cast<Id>(d), kid);
    }
    return me;
  };
  build(0);
  return t;
}

double walk_count(const PrunedTree& t) {
  std::vector<int> env_nodes;
  for (int i = 0; i < static_cast<int>(t.nodes.size()); ++i)
    if (t.kind_of(t.nodes[i]).owner == Owner::Environment &&
        !t.nodes[i].kids.empty())
      env_nodes.push_back(i);
  double total = 1;
  for (int i : env_nodes) {
    double subsets = 0;
    std::uint64_t full = (1ull << t.nodes[i].kids.size()) - 1;
    for (std::uint64_t s = 1; s <= full; ++s) subsets += 1;
    total *= subsets;
  }
  return total;
}

}  // namespace

TEST_CASE("pruning count formula matches a direct subset walk") {
  std::mt19937 rng(11);
  for (int iter = 0; iter < 50; ++iter) {
    PrunedTree t = random_tree(rng, 3);
    double direct = walk_count(t);
    REQUIRE(count_prunings(t, 1e30) == direct);
    if (direct <= 600) {
      std::size_t n = enumerate_prunings(t, [&](const PrunedTree& p) {
        for (std::size_t i = 0; i < p.nodes.size(); ++i) {
          const auto& k = p.kind_of(p.nodes[i]);
          if (k.owner == Owner::System)
            REQUIRE(p.nodes[i].kids.size() == k.full_degree);
          else if (k.full_degree > 0)
            REQUIRE(p.nodes[i].kids.size() >= 1);
        }
      });
      REQUIRE(static_cast<double>(n) == direct);
    }
  }
}

// ---------------------------------------------------------------------------
// blank-completion encoding

namespace {

bool same_tree(const PrunedTree& a, const PrunedTree& b) {
  if (a.nodes.size() != b.nodes.size()) return false;
  for (std::size_t i = 0; i < a.nodes.size(); ++i) {
    if (a.nodes[i].kind != b.nodes[i].kind) return false;
    if (a.nodes[i].kids != b.nodes[i].kids) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("maximal unary tree encodes without blanks") {
  Pms m = parse_pms(
      "agents: env\n"
      "actions: a\n"
      "init: s\n"
      "trans s $ [env=a] -> s keep\n");
  PrunedTree t = unwind_bounded(m, 4);
  BotTree e = bot_completion_encode(t, 1);
  for (const auto& l : e.labels) REQUIRE(l.has_value());
}

TEST_CASE("discarded branches turn into blank subtrees") {
  Pms m = load_coffee();
  PrunedTree t = unwind_bounded(m, 2);
  // keep only the b+ branch at the root; every other root child goes blank
  std::vector<std::uint64_t> keep(t.nodes.size(), ~0ull);
  keep[0] = 1;
  PrunedTree p = apply_pruning(t, keep);
  BotTree e = bot_completion_encode(p, 6);
  REQUIRE(e.labels[0].has_value());
  int blank_children = 0;
  for (std::size_t d = 0; d < 6; ++d)
    if (!e.labels[e.child(0, d)].has_value()) ++blank_children;
  REQUIRE(blank_children == 5);
  REQUIRE(bot_region_suffix_closed(e));
  // the retained child is the black-coffee request with a banked token
  REQUIRE(*e.labels[e.child(0, 0)] ==
          std::vector<Id>{m.sig.prop_index.at("reqb")});
}

TEST_CASE("encode then decode is the identity on prunings") {
  Pms m = load_coffee();
  PrunedTree t = unwind_bounded(m, 2);
  std::size_t k = m.branching_degree();
  std::mt19937 rng(23);
  // random keep masks rather than the full 63^n stream
  for (int iter = 0; iter < 200; ++iter) {
    std::vector<std::uint64_t> keep(t.nodes.size());
    for (auto& k2 : keep) k2 = 1 + rng() % 63;
    PrunedTree p = apply_pruning(t, keep);
    BotTree e = bot_completion_encode(p, k);
    REQUIRE(bot_region_suffix_closed(e));
    PrunedTree back = bot_completion_decode(t, e);
    REQUIRE(same_tree(p, back));
  }
}

TEST_CASE("decode recovers every depth-1 coffee pruning") {
  Pms m = load_coffee();
  PrunedTree t = unwind_bounded(m, 1);
  enumerate_prunings(t, [&](const PrunedTree& p) {
    BotTree e = bot_completion_encode(p, 6);
    REQUIRE(same_tree(p, bot_completion_decode(t, e)));
  });
}
