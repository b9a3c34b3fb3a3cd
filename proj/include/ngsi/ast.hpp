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

// Rule-application trees. Nodes store only rule ids; terminals are implied
// by the rule, so equality is structural and the text form is canonical.

#ifndef NGSI_AST_HPP_
#define NGSI_AST_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ngsi/grammar.hpp"

namespace ngsi {

struct Ast {
  RuleId rule{};
  // One child per rhs nonterminal of `rule`, in rhs order.
  std::vector<Ast> children;

  friend bool operator==(const Ast&, const Ast&) = default;
};

class AstError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Throws AstError unless every node has the right number of children and
// every child's rule has the lhs its parent's rhs asks for. When `root` is
// given the root rule's lhs must equal it.
void check_ast(const Ast& t, std::optional<Nonterminal> root = std::nullopt,
               const Grammar& g = builtin_grammar());

// Terminal yield of the derivation.
TokenSeq pretty_print(const Ast& t, const Grammar& g = builtin_grammar());

// Node count of the longest root-to-leaf path; a leaf rule has depth 1.
int depth(const Ast& t);
std::size_t node_count(const Ast& t);

bool ast_equal(const Ast& a, const Ast& b);

// Parenthesized pre-order rule labels: (S2 (A1 (V1) (E3 (T2 (F3 (C2)))))).
std::string serialize(const Ast& t, const Grammar& g = builtin_grammar());
// Throws AstError on malformed text or a tree violating the invariants.
Ast deserialize(std::string_view text, const Grammar& g = builtin_grammar());

std::vector<RuleId> preorder(const Ast& t);
// Rebuilds a tree from its pre-order rule list. Throws AstError if the list
// is not exactly one well-formed tree rooted at `root`.
Ast from_preorder(std::span<const RuleId> rules, Nonterminal root,
                  const Grammar& g = builtin_grammar());

}  // namespace ngsi

#endif  // NGSI_AST_HPP_
