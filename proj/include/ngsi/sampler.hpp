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

// Random program generation under length/depth budgets, training-pair
// extraction and the curriculum schedule.

#ifndef NGSI_SAMPLER_HPP_
#define NGSI_SAMPLER_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ngsi/ast.hpp"
#include "ngsi/grammar.hpp"
#include "ngsi/random.hpp"

namespace ngsi {

// Inclusive token-count and depth ranges.
struct SampleBucket {
  int min_length = 4;
  int max_length = 15;
  int min_depth = 1;
  int max_depth = 9;
  std::uint64_t seed = 0;

  // Throws std::invalid_argument unless min <= max and min_length >= 4.
  void validate() const;
  std::string to_string() const;  // "min_len:max_len:min_depth:max_depth"
  static SampleBucket parse(const std::string& text);

  friend bool operator==(const SampleBucket&, const SampleBucket&) = default;
};

class SamplerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Program {
  TokenSeq tokens;
  Ast tree;
};

struct TrainingPair {
  TokenSeq input;  // yield of the subtree
  Nonterminal nt{};
  RuleId label{};
};

// Longest program the sampler's derivation tables cover.
inline constexpr int kMaxSampleLength = 48;

// Weighted derivation counts of the shipped grammar, indexed by
// (nonterminal, yield length, depth). Leaf alternatives of one nonterminal
// (the five variables, the ten digits) share unit weight, so counts are over
// tree shapes and rule choice among interchangeable leaves is uniform.
class DerivationCounts {
 public:
  static const DerivationCounts& instance();

  // Number of weighted trees with exactly this yield length and depth.
  double exact(Nonterminal nt, int length, int depth) const;
  // ... with depth <= `depth`.
  double at_most(Nonterminal nt, int length, int depth) const;
  bool feasible(int length, int depth) const;  // rooted at the start symbol

  // Uniform (over weighted shapes) tree with the given yield length and
  // exact depth. Throws SamplerError when none exists.
  Ast sample_exact(Nonterminal nt, int length, int depth, Rng& rng) const;

  int max_length() const { return max_length_; }
  int max_depth() const { return max_depth_; }

 private:
  DerivationCounts(const Grammar& g, int max_length);

  // Per-rule suffix tables over the rhs nonterminals: for children k..end
  // with total yield length m, `le` counts assignments with every child of
  // depth <= d and `ex` those where additionally some child has depth d.
  struct RuleTable {
    RuleId rule{};
    int lhs = 0;
    int terminals = 0;
    double weight = 1.0;
    std::vector<int> kids;
    std::vector<double> le;
    std::vector<double> ex;
  };

  std::size_t at(int nt, int length, int depth) const;
  std::size_t suffix_at(std::size_t k, int length, int depth) const;
  Ast sample_at_most(Nonterminal nt, int length, int depth, Rng& rng) const;
  void sample_children(const RuleTable& rt, std::size_t k, int remaining,
                       int depth, bool need_exact, Rng& rng,
                       std::vector<Ast>& out) const;

  const Grammar& g_;
  int max_length_;
  int max_depth_;
  std::vector<double> exact_;
  std::vector<double> at_most_;
  std::vector<RuleTable> rule_tables_;
};

// A program whose length and depth lie inside the bucket. The (length,
// depth) cell is drawn uniformly among feasible lengths, then feasible
// depths; the tree is drawn uniformly among shapes of that cell. Throws
// SamplerError naming the bucket when no program fits it.
Program sample_program(const SampleBucket& bucket, Rng& rng);

// One pair per AST node, in pre-order.
std::vector<TrainingPair> extract_training_pairs(
    const Ast& t, const Grammar& g = builtin_grammar());

// Curriculum stages (non-decreasing budgets up to length 15 / depth 9),
// repeated three times.
std::vector<SampleBucket> curriculum_schedule(int stages);

inline constexpr int kCurriculumRepeats = 3;

}  // namespace ngsi

#endif  // NGSI_SAMPLER_HPP_
