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

#ifndef NGSI_RANDOM_HPP_
#define NGSI_RANDOM_HPP_

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace ngsi {

using Rng = std::mt19937_64;

// Disjoint seed streams. Every draw is seeded from (seed, stream, indices)
// so that training, held-out and evaluation programs never share a seed.
enum class SeedStream : std::uint32_t {
  kGeneration = 0x47454e31,  // "GEN1"
  kTraining = 0x54524e31,    // "TRN1"
  kHeldOut = 0x484c4431,     // "HLD1"
  kEvaluation = 0x45564c31,  // "EVL1"
  kInit = 0x494e4931,        // "INI1"
};

inline Rng make_rng(std::uint64_t seed, SeedStream stream,
                    std::initializer_list<std::uint64_t> indices = {}) {
  std::vector<std::uint32_t> words;
  words.push_back(static_cast<std::uint32_t>(seed));
  words.push_back(static_cast<std::uint32_t>(seed >> 32));
  words.push_back(static_cast<std::uint32_t>(stream));
  for (std::uint64_t i : indices) {
    words.push_back(static_cast<std::uint32_t>(i));
    words.push_back(static_cast<std::uint32_t>(i >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

}  // namespace ngsi

#endif  // NGSI_RANDOM_HPP_
