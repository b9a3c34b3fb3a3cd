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

// Exhaustive baseline: iterative deepening depth-first search over leftmost
// derivations from the start symbol, accepting the first tree whose yield
// is exactly the input.

#ifndef NGSI_SEARCH_HPP_
#define NGSI_SEARCH_HPP_

#include <cstdint>
#include <optional>
#include <string_view>

#include "ngsi/ast.hpp"
#include "ngsi/grammar.hpp"

namespace ngsi {

struct SearchConfig {
  int max_depth = 64;
  double time_limit_seconds = 3600.0;
};

enum class SearchStatus { kFound, kTimeout, kExhausted };

std::string_view to_string(SearchStatus s);

struct SearchResult {
  SearchStatus status = SearchStatus::kExhausted;
  std::optional<Ast> tree;
  int depth_limit = 0;  // last limit tried
  std::uint64_t expansions = 0;
};

// Partial derivations are pruned when a fixed terminal disagrees with the
// input or when the shortest completion of the pending symbols is longer
// than the unread input. Rules are tried in id order, leftmost nonterminal
// first.
SearchResult iddfs_parse(TokenSpan d, const SearchConfig& cfg,
                         const Grammar& g = builtin_grammar());

}  // namespace ngsi

#endif  // NGSI_SEARCH_HPP_
