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

#ifndef NGSI_TESTS_SUPPORT_HPP_
#define NGSI_TESTS_SUPPORT_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include "ngsi/ast.hpp"
#include "ngsi/grammar.hpp"
#include "ngsi/random.hpp"
#include "ngsi/sampler.hpp"

namespace ngsi::testing {

inline TokenSeq toks(std::string_view text) {
  return builtin_grammar().tokenize(text);
}

inline Ast tree(std::string_view text) { return deserialize(text); }

inline Nonterminal nt(std::string_view name) {
  return builtin_grammar().nonterminal(name);
}

inline RuleId rule(std::string_view label) {
  return builtin_grammar().rule(label);
}

// Programs drawn from `bucket` with a per-test seed, independent of the
// seeds the library uses internally.
inline std::vector<Program> sample_many(const SampleBucket& bucket, int n,
                                        std::uint64_t seed) {
  std::vector<Program> out;
  Rng rng = make_rng(seed, SeedStream::kGeneration, {0x7e57});
  for (int i = 0; i < n; ++i) out.push_back(sample_program(bucket, rng));
  return out;
}

// All subtrees in pre-order.
inline void collect_subtrees(const Ast& t, std::vector<const Ast*>& out) {
  out.push_back(&t);
  for (const Ast& c : t.children) collect_subtrees(c, out);
}

// Fresh per-process scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir() {
  static const std::filesystem::path dir = [] {
    auto d = std::filesystem::temp_directory_path() /
             ("ngsi-test-" + std::to_string(::getpid()));
    std::filesystem::remove_all(d);
    std::filesystem::create_directories(d);
    return d;
  }();
  return dir;
}

}  // namespace ngsi::testing

#endif  // NGSI_TESTS_SUPPORT_HPP_
