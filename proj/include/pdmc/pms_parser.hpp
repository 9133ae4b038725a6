// pms_parser.hpp -- the line-oriented textual format for pushdown systems.
//
//   agents: env, br, mp
//   actions: b, w, pour
//   props: reqb, black
//   stack: g
//   init: choice
//   label choice: choice
//   trans choice $ [env=b, br=*, mp=*] -> reqb push g
//
// `$` names the stack bottom (never declared, never pushable).  States come
// into existence on first mention; id order is first-mention order.  `*` in a
// decision expands over all actions in declaration order, leftmost agent
// slowest, so repeated loads yield bit-identical tables.  Operations desugar
// against the declared top symbol:
//   push x...    top in Gamma: replacement = x... top   |  top $: x...
//   pop          replacement = empty
//   rewrite x... replacement = x...
//   keep         top in Gamma: replacement = top        |  top $: empty
#pragma once

#include <cctype>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pdmc/base.hpp"
#include "pdmc/system_model.hpp"

namespace pdmc {
namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t pos = s.find(',', start);
    if (pos == std::string::npos) pos = s.size();
    std::string piece = trim(s.substr(start, pos - start));
    if (!piece.empty()) out.push_back(piece);
    start = pos + 1;
  }
  return out;
}

inline std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

[[noreturn]] inline void perr(ErrorKind k, int line, const std::string& msg) {
  fail(k, "line " + std::to_string(line) + ": " + msg);
}

}  // namespace detail

inline Pms parse_pms(const std::string& text) {
  using namespace detail;
  Pms m;
  Interner<std::string> state_ids;
  bool have_agents = false, have_actions = false, have_stack = false;
  bool have_init = false, have_props = false;
  std::string init_name;
  int init_line = 0;
  struct RawLabel {
    std::string state;
    std::vector<std::string> props;
    int line;
  };
  struct RawTrans {
    std::string src, top, dst, op;
    std::vector<std::string> opargs;
    std::vector<std::pair<std::string, std::string>> assign;  // agent=action|*
    int line;
  };
  std::vector<RawLabel> raw_labels;
  std::vector<RawTrans> raw_trans;

  std::istringstream in(text);
  std::string line;
  int ln = 0;
  while (std::getline(in, line)) {
    ++ln;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.rfind("trans", 0) == 0 &&
        (line.size() == 5 || std::isspace(static_cast<unsigned char>(line[5])))) {
      std::size_t lb = line.find('[');
      std::size_t rb = line.find(']');
      if (lb == std::string::npos || rb == std::string::npos || rb < lb)
        perr(ErrorKind::Syntax, ln, "trans line needs a [..] decision block");
      auto head = split_ws(line.substr(5, lb - 5));
      if (head.size() != 2)
        perr(ErrorKind::Syntax, ln, "expected `trans <state> <top> [..] -> ..`");
      auto tail = split_ws(line.substr(rb + 1));
      if (tail.size() < 3 || tail[0] != "->")
        perr(ErrorKind::Syntax, ln, "expected `-> <state> <op>` after decision");
      RawTrans t;
      t.src = head[0];
      t.top = head[1];
      t.dst = tail[1];
      t.op = tail[2];
      t.opargs.assign(tail.begin() + 3, tail.end());
      for (const auto& piece : split_commas(line.substr(lb + 1, rb - lb - 1))) {
        std::size_t eq = piece.find('=');
        if (eq == std::string::npos)
          perr(ErrorKind::Syntax, ln, "decision entry must be agent=action");
        t.assign.emplace_back(trim(piece.substr(0, eq)),
                              trim(piece.substr(eq + 1)));
      }
      t.line = ln;
      raw_trans.push_back(std::move(t));
      continue;
    }

    std::size_t colon = line.find(':');
    if (colon == std::string::npos)
      perr(ErrorKind::Syntax, ln, "unrecognized line");
    std::string key = trim(line.substr(0, colon));
    std::string val = trim(line.substr(colon + 1));

    if (key == "agents") {
      if (have_agents) perr(ErrorKind::Syntax, ln, "duplicate agents line");
      m.sig.agents = split_commas(val);
      have_agents = true;
    } else if (key == "actions") {
      if (have_actions) perr(ErrorKind::Syntax, ln, "duplicate actions line");
      m.sig.actions = split_commas(val);
      have_actions = true;
    } else if (key == "props") {
      if (have_props) perr(ErrorKind::Syntax, ln, "duplicate props line");
      m.sig.props = split_commas(val);
      have_props = true;
    } else if (key == "stack") {
      if (have_stack) perr(ErrorKind::Syntax, ln, "duplicate stack line");
      m.stack_names = split_commas(val);
      have_stack = true;
    } else if (key == "init") {
      if (have_init) perr(ErrorKind::Syntax, ln, "duplicate init line");
      init_name = val;
      init_line = ln;
      have_init = true;
    } else if (key.rfind("label", 0) == 0) {
      auto parts = split_ws(key);
      if (parts.size() != 2 || parts[0] != "label")
        perr(ErrorKind::Syntax, ln, "expected `label <state>: props`");
      raw_labels.push_back({parts[1], split_commas(val), ln});
    } else {
      perr(ErrorKind::Syntax, ln, "unknown directive: " + key);
    }
  }

  if (!have_agents) fail(ErrorKind::Syntax, "missing agents line");
  if (!have_actions) fail(ErrorKind::Syntax, "missing actions line");
  if (!have_init) fail(ErrorKind::Syntax, "missing init line");
  if (!have_stack) m.stack_names = {};
  if (!have_props) m.sig.props = {};
  if (m.sig.agents.empty()) fail(ErrorKind::Input, "agent set must be nonempty");
  if (m.sig.actions.empty())
    fail(ErrorKind::Input, "action set must be nonempty");
  m.sig.finish();
  if (m.sig.agents.size() != m.sig.agent_index.size())
    fail(ErrorKind::Input, "duplicate agent name");
  if (m.sig.actions.size() != m.sig.action_index.size())
    fail(ErrorKind::Input, "duplicate action name");
  if (m.sig.props.size() != m.sig.prop_index.size())
    fail(ErrorKind::Input, "duplicate proposition name");

  m.stack_symbols = static_cast<Id>(m.stack_names.size());
  std::unordered_map<std::string, Id> stack_index;
  for (Id i = 0; i < m.stack_symbols; ++i) {
    if (m.stack_names[i] == "$")
      fail(ErrorKind::Input, "`$` is reserved for the stack bottom");
    if (!stack_index.emplace(m.stack_names[i], i).second)
      fail(ErrorKind::Input, "duplicate stack symbol " + m.stack_names[i]);
  }
  auto stack_sym = [&](const std::string& s, int line, bool allow_bottom) -> Id {
    if (s == "$") {
      if (!allow_bottom)
        perr(ErrorKind::Input, line, "the bottom symbol cannot be pushed");
      return m.bottom();
    }
    auto it = stack_index.find(s);
    if (it == stack_index.end())
      perr(ErrorKind::Input, line, "unknown stack symbol: " + s);
    return it->second;
  };

  // states in first-mention order: init, then label lines, then trans lines
  m.init_state = state_ids.intern(init_name);
  for (const auto& l : raw_labels) state_ids.intern(l.state);
  for (const auto& t : raw_trans) {
    state_ids.intern(t.src);
    state_ids.intern(t.dst);
  }
  m.state_names.clear();
  for (Id i = 0; i < state_ids.size(); ++i)
    m.state_names.push_back(state_ids.value(i));
  m.labels.assign(m.state_names.size(), {});
  (void)init_line;

  std::vector<char> labeled(m.state_names.size(), 0);
  for (const auto& l : raw_labels) {
    Id q = *state_ids.find(l.state);
    if (labeled[q])
      perr(ErrorKind::Syntax, l.line, "duplicate label line for " + l.state);
    labeled[q] = 1;
    for (const auto& p : l.props) {
      auto it = m.sig.prop_index.find(p);
      if (it == m.sig.prop_index.end())
        perr(ErrorKind::Input, l.line, "unknown proposition: " + p);
      m.labels[q].push_back(it->second);
    }
    sort_unique(m.labels[q]);
  }

  m.init_tables();
  for (const auto& t : raw_trans) {
    Id src = *state_ids.find(t.src);
    Id dst = *state_ids.find(t.dst);
    Id top = stack_sym(t.top, t.line, /*allow_bottom=*/true);

    StackWord beta;
    if (t.op == "push") {
      if (t.opargs.empty())
        perr(ErrorKind::Syntax, t.line, "push needs at least one symbol");
      for (const auto& s : t.opargs)
        beta.push_back(stack_sym(s, t.line, false));
      if (!m.is_bottom(top)) beta.push_back(top);
    } else if (t.op == "pop") {
      if (!t.opargs.empty()) perr(ErrorKind::Syntax, t.line, "pop takes no arguments");
    } else if (t.op == "rewrite") {
      if (t.opargs.empty())
        perr(ErrorKind::Syntax, t.line, "rewrite needs at least one symbol (use pop)");
      for (const auto& s : t.opargs)
        beta.push_back(stack_sym(s, t.line, false));
    } else if (t.op == "keep") {
      if (!t.opargs.empty()) perr(ErrorKind::Syntax, t.line, "keep takes no arguments");
      if (!m.is_bottom(top)) beta.push_back(top);
    } else {
      perr(ErrorKind::Syntax, t.line, "unknown operation: " + t.op);
    }

    // decision block: every agent exactly once, `*` ranging over all actions
    std::vector<std::vector<Id>> choices(m.sig.agents.size());
    std::vector<char> seen(m.sig.agents.size(), 0);
    for (const auto& [agent, action] : t.assign) {
      auto it = m.sig.agent_index.find(agent);
      if (it == m.sig.agent_index.end())
        perr(ErrorKind::Input, t.line, "unknown agent: " + agent);
      if (seen[it->second])
        perr(ErrorKind::Input, t.line, "agent assigned twice: " + agent);
      seen[it->second] = 1;
      if (action == "*") {
        for (Id a = 0; a < m.sig.actions.size(); ++a)
          choices[it->second].push_back(a);
      } else {
        auto ai = m.sig.action_index.find(action);
        if (ai == m.sig.action_index.end())
          perr(ErrorKind::Input, t.line, "unknown action: " + action);
        choices[it->second].push_back(ai->second);
      }
    }
    for (Id a = 0; a < m.sig.agents.size(); ++a)
      if (!seen[a])
        perr(ErrorKind::Input, t.line,
             "decision must assign agent " + m.sig.agents[a]);

    // odometer, leftmost agent slowest
    Decision d(m.sig.agents.size());
    std::vector<std::size_t> pos(m.sig.agents.size(), 0);
    while (true) {
      for (Id a = 0; a < m.sig.agents.size(); ++a) d[a] = choices[a][pos[a]];
      if (!m.add_entry(src, top, d, PmsTarget{dst, beta}))
        perr(ErrorKind::Input, t.line, "duplicate decision at this (state, top)");
      int a = static_cast<int>(m.sig.agents.size()) - 1;
      for (; a >= 0; --a) {
        if (++pos[a] < choices[a].size()) break;
        pos[a] = 0;
      }
      if (a < 0) break;
    }
  }

  m.validate_total();
  return m;
}

// Round-trippable emission (star expansion and line interleaving are lost;
// the decision table and all canonical orders are preserved).
inline std::string write_pms(const Pms& m) {
  std::ostringstream out;
  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) s += ", ";
      s += v[i];
    }
    return s;
  };
  out << "agents: " << join(m.sig.agents) << "\n";
  out << "actions: " << join(m.sig.actions) << "\n";
  if (!m.sig.props.empty()) out << "props: " << join(m.sig.props) << "\n";
  if (!m.stack_names.empty()) out << "stack: " << join(m.stack_names) << "\n";
  out << "init: " << m.state_names[m.init_state] << "\n";
  for (Id q = 0; q < m.num_states(); ++q) {
    if (m.labels[q].empty()) continue;
    out << "label " << m.state_names[q] << ":";
    for (std::size_t i = 0; i < m.labels[q].size(); ++i)
      out << (i ? ", " : " ") << m.sig.props[m.labels[q][i]];
    out << "\n";
  }
  for (Id q = 0; q < m.num_states(); ++q) {
    for (Id g = 0; g <= m.stack_symbols; ++g) {
      for (const auto& e : m.row(q, g)) {
        out << "trans " << m.state_names[q] << " " << m.stack_symbol_name(g)
            << " [";
        for (Id a = 0; a < m.sig.agents.size(); ++a)
          out << (a ? ", " : "") << m.sig.agents[a] << "="
              << m.sig.actions[e.decision[a]];
        out << "] -> " << m.state_names[e.target.state];
        const auto& beta = e.target.push;
        if (beta.empty()) {
          out << (m.is_bottom(g) ? " keep" : " pop");
        } else if (!m.is_bottom(g) && beta.size() == 1 && beta[0] == g) {
          out << " keep";
        } else {
          out << " rewrite";
          for (Id s : beta) out << " " << m.stack_names[s];
        }
        out << "\n";
      }
    }
  }
  return out.str();
}

inline Pms parse_pms_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Input, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_pms(buf.str());
  } catch (PdmcError& e) {
    throw PdmcError(e.kind, path + ": " + e.what());
  }
}

}  // namespace pdmc
