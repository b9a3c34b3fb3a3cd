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

// Hand-coded inverse of a rule application: splits a token sequence into
// one component per rhs nonterminal of a chosen rule.

#ifndef NGSI_DECOMPOSER_HPP_
#define NGSI_DECOMPOSER_HPP_

#include <string>
#include <variant>
#include <vector>

#include "ngsi/grammar.hpp"

namespace ngsi {

// Recoverable: the engine reacts by trying another rule.
struct DecompositionFailure {
  std::string reason;
};

// Components are views into the input sequence.
using Components = std::vector<TokenSpan>;
using Decomposition = std::variant<Components, DecompositionFailure>;

// Single left-to-right scan. A terminal following a nonterminal is matched
// at its first occurrence at nesting level zero relative to the component
// start (nesting opened by "(", "if", "while" and closed by ")", "endif",
// "endwhile"); leading terminals must match in place; trailing terminals
// must end the input. Components are never empty.
Decomposition decompose(TokenSpan d, const ProductionRule& rule,
                        const Grammar& g = builtin_grammar());

}  // namespace ngsi

#endif  // NGSI_DECOMPOSER_HPP_
