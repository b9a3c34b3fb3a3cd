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

// Deterministic recursive-descent parser for the shipped grammar. It is the
// ground truth for training labels and the oracle the guided engine is
// tested against; it shares no code with the decomposer.

#ifndef NGSI_REFERENCE_PARSER_HPP_
#define NGSI_REFERENCE_PARSER_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

#include "ngsi/ast.hpp"
#include "ngsi/grammar.hpp"

namespace ngsi {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t furthest)
      : std::runtime_error(what), furthest_(furthest) {}
  // Index of the furthest token the parser reached.
  std::size_t furthest() const { return furthest_; }

 private:
  std::size_t furthest_;
};

// The unique tree rooted at `nt` whose yield is `d`. Throws ParseError
// when no derivation exists (including empty input).
Ast reference_parse(TokenSpan d, Nonterminal nt);

}  // namespace ngsi

#endif  // NGSI_REFERENCE_PARSER_HPP_
