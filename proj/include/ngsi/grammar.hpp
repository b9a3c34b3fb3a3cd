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

// Context-free grammar for the WHILE-style language parsed by the library:
// nonterminals, the terminal vocabulary and the production rule table.

#ifndef NGSI_GRAMMAR_HPP_
#define NGSI_GRAMMAR_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace ngsi {

enum class TokenId : std::uint16_t {};
enum class Nonterminal : std::uint8_t {};
enum class RuleId : std::uint16_t {};

template <class Id>
constexpr std::size_t idx(Id id) {
  return static_cast<std::size_t>(id);
}

using TokenSeq = std::vector<TokenId>;
using TokenSpan = std::span<const TokenId>;

// One right-hand-side symbol.
using Symbol = std::variant<TokenId, Nonterminal>;

class GrammarError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProductionRule {
  RuleId id{};
  std::string label;  // e.g. "S1", "C10"
  Nonterminal lhs{};
  std::vector<Symbol> rhs;

  // Nonterminals of the rhs in order; one AST child per entry.
  std::vector<Nonterminal> children() const;
  std::size_t terminal_count() const;
};

// Textual rule description used to build a grammar. Any rhs symbol equal
// to a declared nonterminal name is a nonterminal, everything else is a
// terminal.
struct RuleSpec {
  std::string label;
  std::string lhs;
  std::vector<std::string> rhs;
};

class Grammar {
 public:
  // Throws GrammarError on unknown lhs, empty rhs, duplicate labels or
  // duplicate nonterminal names. Semantic defects (unreachable,
  // nonproductive, duplicate rules) are reported by validate_grammar().
  Grammar(std::vector<std::string> nonterminal_names, std::string_view start,
          const std::vector<RuleSpec>& rules);

  Nonterminal start() const { return start_; }

  std::size_t nonterminal_count() const { return nonterminal_names_.size(); }
  const std::string& nonterminal_name(Nonterminal nt) const;
  std::optional<Nonterminal> find_nonterminal(std::string_view name) const;
  Nonterminal nonterminal(std::string_view name) const;  // throws if unknown

  std::size_t token_count() const { return vocabulary_.size(); }
  const std::string& token_text(TokenId t) const;
  std::optional<TokenId> find_token(std::string_view text) const;
  TokenId token(std::string_view text) const;  // throws if unknown

  std::size_t rule_count() const { return rules_.size(); }
  const std::vector<ProductionRule>& rules() const { return rules_; }
  const ProductionRule& rule(RuleId id) const;
  std::optional<RuleId> find_rule(std::string_view label) const;
  RuleId rule(std::string_view label) const;  // throws if unknown

  // Rules whose lhs is `nt`, in rule-id order. Throws for unknown `nt`.
  std::span<const RuleId> rules_for(Nonterminal nt) const;

  // Whitespace-separated terminals to token ids; throws on unknown text.
  TokenSeq tokenize(std::string_view text) const;
  std::string detokenize(TokenSpan tokens) const;

  // "<lhs> -> <rhs symbols>"
  std::string rule_to_string(const ProductionRule& r) const;

  // FNV-1a over the rule table / vocabulary text. Models record both so a
  // model is never loaded against a different grammar.
  std::uint64_t grammar_fingerprint() const { return grammar_fingerprint_; }
  std::uint64_t vocab_fingerprint() const { return vocab_fingerprint_; }

 private:
  std::vector<std::string> nonterminal_names_;
  Nonterminal start_{};
  std::vector<std::string> vocabulary_;
  std::vector<ProductionRule> rules_;
  std::vector<std::vector<RuleId>> rules_by_lhs_;
  std::uint64_t grammar_fingerprint_ = 0;
  std::uint64_t vocab_fingerprint_ = 0;
};

// The rule specs of the shipped grammar (also used by tests to derive
// deliberately broken grammars).
std::vector<RuleSpec> builtin_rule_specs();
std::vector<std::string> builtin_nonterminal_names();

// Process-wide immutable instance of the shipped grammar.
const Grammar& builtin_grammar();

struct GrammarDefect {
  enum class Kind { kUnreachable, kNonproductive, kDuplicate };
  Kind kind;
  std::string nonterminal;
  std::string detail;
};

std::string_view to_string(GrammarDefect::Kind kind);

std::vector<GrammarDefect> validate_grammar(const Grammar& g);

std::uint64_t fnv1a64(std::string_view bytes,
                      std::uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace ngsi

#endif  // NGSI_GRAMMAR_HPP_
