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

// Recursive guided inference: at each node a rule selector proposes a
// distribution over the rules of the node's nonterminal, the decomposer
// splits the tokens for the chosen rule, and each component is inferred
// recursively.

#ifndef NGSI_INFERENCE_HPP_
#define NGSI_INFERENCE_HPP_

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ngsi/ast.hpp"
#include "ngsi/grammar.hpp"
#include "ngsi/guider.hpp"

namespace ngsi {

class RuleSelector {
 public:
  virtual ~RuleSelector() = default;
  // One probability per rule id; zero for rules whose lhs is not `nt`.
  virtual std::vector<double> distribution(TokenSpan d,
                                           Nonterminal nt) const = 0;
};

// The trained GRU guider. Input projections are precomputed once per model.
class NeuralGuider final : public RuleSelector {
 public:
  explicit NeuralGuider(GuiderModel model,
                        const Grammar& g = builtin_grammar());
  std::vector<double> distribution(TokenSpan d, Nonterminal nt) const override;
  RowVector<float> encode(TokenSpan d) const;
  const GuiderModel& model() const { return model_; }

 private:
  GuiderModel model_;
  const Grammar& g_;
  Matrix<float> proj_z_, proj_r_, proj_h_;
};

// Point mass on the root rule the reference parser assigns; uniform over
// the applicable rules when the tokens do not parse as `nt`.
class OracleSelector final : public RuleSelector {
 public:
  std::vector<double> distribution(TokenSpan d, Nonterminal nt) const override;
};

enum class InferMode { kGreedy, kFallback, kBeam };

std::string_view to_string(InferMode mode);
InferMode parse_infer_mode(std::string_view text);

struct InferConfig {
  InferMode mode = InferMode::kFallback;
  int beam_width = 4;
  int max_recursion_depth = 64;
  bool verify_reconstruction = true;

  void validate() const;
};

enum class InferErrorKind {
  kEmptyInput,
  kUnparseable,
  kDepthLimit,
  kInconsistentParse,
};

std::string_view to_string(InferErrorKind kind);

class InferenceError : public std::runtime_error {
 public:
  InferenceError(InferErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  InferErrorKind kind() const { return kind_; }

 private:
  InferErrorKind kind_;
};

// greedy: argmax rule at every node, any failure is fatal.
// fallback: rules in descending probability, backtracking over failed
//   decompositions and failed subtrees.
// beam: at every node the beam_width most probable decomposable rules are
//   expanded and up to beam_width subtrees are kept per node, ranked by
//   summed log-probability.
// Throws InferenceError.
Ast infer(TokenSpan d, Nonterminal nt, const RuleSelector& selector,
          const InferConfig& cfg, const Grammar& g = builtin_grammar());

// Sum over nodes of log p(node rule | node yield, node nonterminal).
double tree_score(const Ast& t, const RuleSelector& selector,
                  const Grammar& g = builtin_grammar());

struct InferRow {
  std::size_t line = 0;  // 1-based line in the corpus file
  TokenSeq tokens;
  std::optional<Ast> tree;
  std::string error;  // error kind when tree is empty
  double seconds = 0.0;
};

// One row per nonblank corpus line (tokens, optionally followed by a tab
// and anything else). A failing line yields an error row and processing
// continues. Throws std::runtime_error when the file cannot be read.
std::vector<InferRow> infer_file(const std::filesystem::path& corpus,
                                 const RuleSelector& selector,
                                 const InferConfig& cfg,
                                 const Grammar& g = builtin_grammar());

// infer_file over lines already in memory; line numbers count all lines.
std::vector<InferRow> infer_lines(const std::vector<std::string>& lines,
                                  const RuleSelector& selector,
                                  const InferConfig& cfg,
                                  const Grammar& g = builtin_grammar());

}  // namespace ngsi

#endif  // NGSI_INFERENCE_HPP_
