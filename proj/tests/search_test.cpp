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

#include <doctest.h>

#include <chrono>

#include "ngsi/ast.hpp"
#include "ngsi/search.hpp"
#include "support.hpp"

using namespace ngsi;
using namespace ngsi::testing;

TEST_CASE("shortest program is found at depth limit 6") {
  SearchResult r = iddfs_parse(toks("v0 = 1 ;"), SearchConfig{});
  REQUIRE(r.status == SearchStatus::kFound);
  REQUIRE(r.tree.has_value());
  CHECK(serialize(*r.tree) == "(S2 (A1 (V1) (E3 (T2 (F3 (C2))))))");
  CHECK(r.depth_limit == 6);
  CHECK(r.expansions > 0);
  CHECK(to_string(SearchStatus::kFound) == "found");
  CHECK(to_string(SearchStatus::kTimeout) == "timeout");
  CHECK(to_string(SearchStatus::kExhausted) == "unparseable");
}

TEST_CASE("depth-6 corpus is solved exactly") {
  for (const Program& p : sample_many(SampleBucket{4, 12, 6, 6}, 100, 71)) {
    SearchResult r = iddfs_parse(p.tokens, SearchConfig{64, 3600.0});
    REQUIRE(r.tree.has_value());
    CHECK(ast_equal(*r.tree, p.tree));
    CHECK(r.depth_limit == 6);
  }
}

TEST_CASE("agreement with the generator on short programs") {
  for (const Program& p : sample_many(SampleBucket{4, 14, 1, 36}, 200, 72)) {
    SearchResult r = iddfs_parse(p.tokens, SearchConfig{64, 3600.0});
    REQUIRE(r.tree.has_value());
    CHECK(ast_equal(*r.tree, p.tree));
    CHECK(pretty_print(*r.tree) == p.tokens);
    // Iterative deepening stops at the first limit that admits the tree.
    CHECK(r.depth_limit == depth(p.tree));
  }
}

TEST_CASE("exhaustion and limits") {
  SearchResult bad = iddfs_parse(toks("v0 = ;"), SearchConfig{20, 60.0});
  CHECK(bad.status == SearchStatus::kExhausted);
  CHECK_FALSE(bad.tree.has_value());
  CHECK(bad.depth_limit == 20);

  // The tree needs depth 6, so a cap of 5 exhausts.
  SearchResult shallow = iddfs_parse(toks("v0 = 1 ;"), SearchConfig{5, 60.0});
  CHECK(shallow.status == SearchStatus::kExhausted);

  CHECK_THROWS_AS(iddfs_parse(TokenSeq{}, SearchConfig{}),
                  std::invalid_argument);
  CHECK_THROWS_AS(iddfs_parse(toks("v0 = 1 ;"), SearchConfig{0, 1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(iddfs_parse(toks("v0 = 1 ;"), SearchConfig{10, 0.0}),
                  std::invalid_argument);
}

TEST_CASE("pathological input hits the time limit") {
  auto progs = sample_many(SampleBucket{40, 40, 1, 88}, 1, 73);
  auto start = std::chrono::steady_clock::now();
  SearchResult r = iddfs_parse(progs[0].tokens, SearchConfig{88, 0.05});
  double s = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                           start)
                 .count();
  CHECK(r.status == SearchStatus::kTimeout);
  CHECK_FALSE(r.tree.has_value());
  CHECK(s < 1.0);
}
