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

#include "ngsi/decomposer.hpp"

#include <optional>

namespace ngsi {
namespace {

struct Nesting {
  std::vector<bool> opens;
  std::vector<bool> closes;

  explicit Nesting(const Grammar& g)
      : opens(g.token_count(), false), closes(g.token_count(), false) {
    for (const char* t : {"(", "if", "while"}) {
      if (auto id = g.find_token(t)) opens[idx(*id)] = true;
    }
    for (const char* t : {")", "endif", "endwhile"}) {
      if (auto id = g.find_token(t)) closes[idx(*id)] = true;
    }
  }
};

DecompositionFailure fail(const Grammar& g, const ProductionRule& rule,
                          const std::string& what) {
  return {rule.label + " (" + g.rule_to_string(rule) + "): " + what};
}

}  // namespace

Decomposition decompose(TokenSpan d, const ProductionRule& rule,
                        const Grammar& g) {
  // Nesting tables are per grammar; the shipped grammar is the common case.
  static const Nesting builtin_nesting(builtin_grammar());
  std::optional<Nesting> local;
  const Nesting* nesting = &builtin_nesting;
  if (&g != &builtin_grammar()) nesting = &local.emplace(g);

  if (d.empty()) return fail(g, rule, "empty input");

  Components parts;
  std::size_t pos = 0;
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::size_t open_component = kNone;  // start of the pending component

  for (const Symbol& sym : rule.rhs) {
    if (std::holds_alternative<Nonterminal>(sym)) {
      if (open_component != kNone) {
        throw GrammarError("rule " + rule.label +
                           " has adjacent nonterminals; no delimiter to split");
      }
      open_component = pos;
      continue;
    }
    const TokenId want = std::get<TokenId>(sym);
    if (open_component == kNone) {
      if (pos >= d.size() || d[pos] != want) {
        return fail(g, rule, "expected '" + g.token_text(want) + "' at token " +
                                 std::to_string(pos));
      }
      ++pos;
      continue;
    }
    int level = 0;
    std::size_t j = open_component;
    for (; j < d.size(); ++j) {
      const TokenId t = d[j];
      if (level == 0 && t == want) break;
      if (nesting->opens[idx(t)]) ++level;
      if (nesting->closes[idx(t)] && --level < 0) {
        return fail(g, rule, "unbalanced '" + g.token_text(t) +
                                 "' at token " + std::to_string(j));
      }
    }
    if (j == d.size()) {
      return fail(g, rule, "no top-level '" + g.token_text(want) + "'");
    }
    if (j == open_component) {
      return fail(g, rule, "empty component before '" + g.token_text(want) +
                               "'");
    }
    parts.push_back(d.subspan(open_component, j - open_component));
    open_component = kNone;
    pos = j + 1;
  }

  if (open_component != kNone) {
    if (open_component >= d.size()) {
      return fail(g, rule, "empty trailing component");
    }
    parts.push_back(d.subspan(open_component));
  } else if (pos != d.size()) {
    return fail(g, rule, std::to_string(d.size() - pos) + " leftover tokens");
  }
  return parts;
}

}  // namespace ngsi
