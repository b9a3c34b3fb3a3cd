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

#include "ngsi/guider.hpp"

namespace ngsi {

GuiderModel GuiderModel::initialize(const Grammar& g, int embed_dim,
                                    int hidden_dim, std::uint64_t seed) {
  if (embed_dim < 1 || hidden_dim < 1) {
    throw std::invalid_argument("model dimensions must be positive");
  }
  Rng rng = make_rng(seed, SeedStream::kInit);
  GuiderModel m;
  m.params = GuiderParams<float>::initialize(
      static_cast<int>(g.token_count()), embed_dim, hidden_dim,
      static_cast<int>(g.rule_count()), rng);
  m.grammar_fingerprint = g.grammar_fingerprint();
  m.vocab_fingerprint = g.vocab_fingerprint();
  return m;
}

void GuiderModel::check_compatible(const Grammar& g) const {
  if (grammar_fingerprint != g.grammar_fingerprint() ||
      vocab_fingerprint != g.vocab_fingerprint()) {
    throw std::invalid_argument("model/grammar mismatch: fingerprints differ");
  }
  if (params.vocab_size() != static_cast<int>(g.token_count()) ||
      params.rule_count() != static_cast<int>(g.rule_count())) {
    throw std::invalid_argument("model/grammar mismatch: shapes differ");
  }
}

}  // namespace ngsi
