// Copyright 2026 The NGSI Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ngsi/grammar.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace ngsi {

std::vector<Nonterminal> ProductionRule::children() const {
  std::vector<Nonterminal> out;
  for (const Symbol& s : rhs) {
    if (const auto* nt = std::get_if<Nonterminal>(&s)) out.push_back(*nt);
  }
  return out;
}

std::size_t ProductionRule::terminal_count() const {
  return static_cast<std::size_t>(std::count_if(
      rhs.begin(), rhs.end(),
      [](const Symbol& s) { return std::holds_alternative<TokenId>(s); }));
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Grammar::Grammar(std::vector<std::string> nonterminal_names,
                 std::string_view start, const std::vector<RuleSpec>& rules)
    : nonterminal_names_(std::move(nonterminal_names)) {
  std::set<std::string_view> seen_names;
  for (const auto& n : nonterminal_names_) {
    if (!seen_names.insert(n).second) {
      throw GrammarError("duplicate nonterminal name '" + n + "'");
    }
  }
  start_ = nonterminal(start);
  rules_by_lhs_.resize(nonterminal_names_.size());

  std::set<std::string_view> seen_labels;
  for (const RuleSpec& spec : rules) {
    if (spec.rhs.empty()) {
      throw GrammarError("rule " + spec.label + " has an empty rhs");
    }
    if (!seen_labels.insert(spec.label).second) {
      throw GrammarError("duplicate rule label " + spec.label);
    }
    ProductionRule r;
    r.id = static_cast<RuleId>(rules_.size());
    r.label = spec.label;
    r.lhs = nonterminal(spec.lhs);
    for (const std::string& sym : spec.rhs) {
      if (auto nt = find_nonterminal(sym)) {
        r.rhs.emplace_back(*nt);
        continue;
      }
      auto tok = find_token(sym);
      if (!tok) {
        tok = static_cast<TokenId>(vocabulary_.size());
        vocabulary_.push_back(sym);
      }
      r.rhs.emplace_back(*tok);
    }
    rules_by_lhs_[idx(r.lhs)].push_back(r.id);
    rules_.push_back(std::move(r));
  }

  std::string table;
  for (const auto& r : rules_) {
    table += r.label + '\t' + rule_to_string(r) + '\n';
  }
  grammar_fingerprint_ = fnv1a64(table);
  std::string vocab;
  for (const auto& t : vocabulary_) vocab += t + '\n';
  vocab_fingerprint_ = fnv1a64(vocab);
}

const std::string& Grammar::nonterminal_name(Nonterminal nt) const {
  if (idx(nt) >= nonterminal_names_.size()) {
    throw GrammarError("unknown nonterminal id " + std::to_string(idx(nt)));
  }
  return nonterminal_names_[idx(nt)];
}

std::optional<Nonterminal> Grammar::find_nonterminal(
    std::string_view name) const {
  auto it = std::find(nonterminal_names_.begin(), nonterminal_names_.end(),
                      name);
  if (it == nonterminal_names_.end()) return std::nullopt;
  return static_cast<Nonterminal>(it - nonterminal_names_.begin());
}

Nonterminal Grammar::nonterminal(std::string_view name) const {
  if (auto nt = find_nonterminal(name)) return *nt;
  throw GrammarError("unknown nonterminal '" + std::string(name) + "'");
}

const std::string& Grammar::token_text(TokenId t) const {
  if (idx(t) >= vocabulary_.size()) {
    throw GrammarError("unknown token id " + std::to_string(idx(t)));
  }
  return vocabulary_[idx(t)];
}

std::optional<TokenId> Grammar::find_token(std::string_view text) const {
  auto it = std::find(vocabulary_.begin(), vocabulary_.end(), text);
  if (it == vocabulary_.end()) return std::nullopt;
  return static_cast<TokenId>(it - vocabulary_.begin());
}

TokenId Grammar::token(std::string_view text) const {
  if (auto t = find_token(text)) return *t;
  throw GrammarError("unknown token '" + std::string(text) + "'");
}

const ProductionRule& Grammar::rule(RuleId id) const {
  if (idx(id) >= rules_.size()) {
    throw GrammarError("unknown rule id " + std::to_string(idx(id)));
  }
  return rules_[idx(id)];
}

std::optional<RuleId> Grammar::find_rule(std::string_view label) const {
  for (const auto& r : rules_) {
    if (r.label == label) return r.id;
  }
  return std::nullopt;
}

RuleId Grammar::rule(std::string_view label) const {
  if (auto r = find_rule(label)) return *r;
  throw GrammarError("unknown rule label '" + std::string(label) + "'");
}

std::span<const RuleId> Grammar::rules_for(Nonterminal nt) const {
  if (idx(nt) >= rules_by_lhs_.size()) {
    throw GrammarError("unknown nonterminal id " + std::to_string(idx(nt)));
  }
  return rules_by_lhs_[idx(nt)];
}

TokenSeq Grammar::tokenize(std::string_view text) const {
  TokenSeq out;
  std::istringstream in{std::string(text)};
  std::string word;
  while (in >> word) out.push_back(token(word));
  return out;
}

std::string Grammar::detokenize(TokenSpan tokens) const {
  std::string out;
  for (TokenId t : tokens) {
    if (!out.empty()) out += ' ';
    out += token_text(t);
  }
  return out;
}

std::string Grammar::rule_to_string(const ProductionRule& r) const {
  std::string out = nonterminal_name(r.lhs) + " ->";
  for (const Symbol& s : r.rhs) {
    out += ' ';
    if (const auto* t = std::get_if<TokenId>(&s)) {
      out += '"' + token_text(*t) + '"';
    } else {
      out += nonterminal_name(std::get<Nonterminal>(s));
    }
  }
  return out;
}

std::vector<std::string> builtin_nonterminal_names() {
  return {"Stmt", "SimpStmt", "AExpr", "ATerm",
          "AFactor", "BExpr", "Var", "Const"};
}

std::vector<RuleSpec> builtin_rule_specs() {
  std::vector<RuleSpec> r = {
      {"S1", "Stmt", {"SimpStmt", ";", "Stmt"}},
      {"S2", "Stmt", {"SimpStmt", ";"}},
      {"A1", "SimpStmt", {"Var", "=", "AExpr"}},
      {"I1", "SimpStmt",
       {"if", "BExpr", "then", "Stmt", "else", "Stmt", "endif"}},
      {"W1", "SimpStmt", {"while", "BExpr", "do", "Stmt", "endwhile"}},
      {"E1", "AExpr", {"ATerm", "+", "AExpr"}},
      {"E2", "AExpr", {"ATerm", "-", "AExpr"}},
      {"E3", "AExpr", {"ATerm"}},
      {"T1", "ATerm", {"AFactor", "*", "ATerm"}},
      {"T2", "ATerm", {"AFactor"}},
      {"F1", "AFactor", {"(", "AExpr", ")"}},
      {"F2", "AFactor", {"Var"}},
      {"F3", "AFactor", {"Const"}},
      {"B1", "BExpr", {"AExpr", "<", "AExpr"}},
      {"B2", "BExpr", {"AExpr", "==", "AExpr"}},
      {"B3", "BExpr", {"not", "BExpr"}},
      {"B4", "BExpr", {"(", "BExpr", "and", "BExpr", ")"}},
  };
  for (int i = 0; i < 5; ++i) {
    r.push_back({"V" + std::to_string(i + 1), "Var", {"v" + std::to_string(i)}});
  }
  for (int i = 0; i < 10; ++i) {
    r.push_back({"C" + std::to_string(i + 1), "Const", {std::to_string(i)}});
  }
  return r;
}

const Grammar& builtin_grammar() {
  static const Grammar g(builtin_nonterminal_names(), "Stmt",
                         builtin_rule_specs());
  return g;
}

std::string_view to_string(GrammarDefect::Kind kind) {
  switch (kind) {
    case GrammarDefect::Kind::kUnreachable: return "unreachable";
    case GrammarDefect::Kind::kNonproductive: return "nonproductive";
    case GrammarDefect::Kind::kDuplicate: return "duplicate";
  }
  return "?";
}

std::vector<GrammarDefect> validate_grammar(const Grammar& g) {
  std::vector<GrammarDefect> defects;
  const std::size_t n = g.nonterminal_count();

  std::vector<bool> reachable(n, false);
  std::vector<Nonterminal> work{g.start()};
  reachable[idx(g.start())] = true;
  while (!work.empty()) {
    Nonterminal nt = work.back();
    work.pop_back();
    for (RuleId id : g.rules_for(nt)) {
      for (Nonterminal c : g.rule(id).children()) {
        if (!reachable[idx(c)]) {
          reachable[idx(c)] = true;
          work.push_back(c);
        }
      }
    }
  }

  std::vector<bool> productive(n, false);
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& r : g.rules()) {
      if (productive[idx(r.lhs)]) continue;
      auto kids = r.children();
      if (std::all_of(kids.begin(), kids.end(),
                      [&](Nonterminal c) { return productive[idx(c)]; })) {
        productive[idx(r.lhs)] = true;
        changed = true;
      }
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    auto nt = static_cast<Nonterminal>(i);
    const auto& name = g.nonterminal_name(nt);
    if (!reachable[i]) {
      defects.push_back({GrammarDefect::Kind::kUnreachable, name,
                         "not reachable from " +
                             g.nonterminal_name(g.start())});
    }
    if (!productive[i]) {
      defects.push_back({GrammarDefect::Kind::kNonproductive, name,
                         g.rules_for(nt).empty()
                             ? "no rules"
                             : "derives no terminal string"});
    }
    auto ids = g.rules_for(nt);
    for (std::size_t a = 0; a < ids.size(); ++a) {
      for (std::size_t b = a + 1; b < ids.size(); ++b) {
        if (g.rule(ids[a]).rhs == g.rule(ids[b]).rhs) {
          defects.push_back({GrammarDefect::Kind::kDuplicate, name,
                             g.rule(ids[a]).label + " and " +
                                 g.rule(ids[b]).label});
        }
      }
    }
  }
  return defects;
}

}  // namespace ngsi
