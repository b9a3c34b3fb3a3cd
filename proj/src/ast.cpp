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

#include "ngsi/ast.hpp"

#include <algorithm>
#include <cctype>

namespace ngsi {
namespace {

void check_node(const Ast& t, std::optional<Nonterminal> want,
                const Grammar& g) {
  if (idx(t.rule) >= g.rule_count()) {
    throw AstError("rule id " + std::to_string(idx(t.rule)) +
                   " is not in the grammar");
  }
  const ProductionRule& r = g.rule(t.rule);
  if (want && r.lhs != *want) {
    throw AstError("node " + r.label + " has lhs " +
                   g.nonterminal_name(r.lhs) + ", expected " +
                   g.nonterminal_name(*want));
  }
  auto kids = r.children();
  if (kids.size() != t.children.size()) {
    throw AstError("node " + r.label + " has " +
                   std::to_string(t.children.size()) + " children, expected " +
                   std::to_string(kids.size()));
  }
  for (std::size_t i = 0; i < kids.size(); ++i) {
    check_node(t.children[i], kids[i], g);
  }
}

void emit_yield(const Ast& t, const Grammar& g, TokenSeq& out) {
  const ProductionRule& r = g.rule(t.rule);
  std::size_t child = 0;
  for (const Symbol& s : r.rhs) {
    if (const auto* tok = std::get_if<TokenId>(&s)) {
      out.push_back(*tok);
    } else {
      emit_yield(t.children[child++], g, out);
    }
  }
}

void emit_text(const Ast& t, const Grammar& g, std::string& out) {
  out += '(';
  out += g.rule(t.rule).label;
  for (const Ast& c : t.children) {
    out += ' ';
    emit_text(c, g, out);
  }
  out += ')';
}

class TextReader {
 public:
  TextReader(std::string_view text, const Grammar& g) : text_(text), g_(g) {}

  Ast read_tree() {
    skip_space();
    expect('(');
    skip_space();
    std::size_t begin = pos_;
    while (pos_ < text_.size() && text_[pos_] != '(' && text_[pos_] != ')' &&
           !std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
    std::string_view label = text_.substr(begin, pos_ - begin);
    auto rule = g_.find_rule(label);
    if (!rule) fail("unknown rule label '" + std::string(label) + "'");
    Ast t{*rule, {}};
    for (;;) {
      skip_space();
      if (pos_ < text_.size() && text_[pos_] == '(') {
        t.children.push_back(read_tree());
      } else {
        break;
      }
    }
    expect(')');
    return t;
  }

  void finish() {
    skip_space();
    if (pos_ != text_.size()) fail("trailing characters");
  }

 private:
  void skip_space() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }
  void expect(char c) {
    if (pos_ >= text_.size() || text_[pos_] != c) {
      fail(std::string("expected '") + c + "'");
    }
    ++pos_;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw AstError("AST text: " + what + " at offset " + std::to_string(pos_));
  }

  std::string_view text_;
  const Grammar& g_;
  std::size_t pos_ = 0;
};

void emit_preorder(const Ast& t, std::vector<RuleId>& out) {
  out.push_back(t.rule);
  for (const Ast& c : t.children) emit_preorder(c, out);
}

Ast build_preorder(std::span<const RuleId> rules, std::size_t& pos,
                   Nonterminal want, const Grammar& g) {
  if (pos >= rules.size()) throw AstError("pre-order list ended early");
  RuleId id = rules[pos++];
  const ProductionRule& r = g.rule(id);
  if (r.lhs != want) {
    throw AstError("pre-order rule " + r.label + " does not expand " +
                   g.nonterminal_name(want));
  }
  Ast t{id, {}};
  for (Nonterminal c : r.children()) {
    t.children.push_back(build_preorder(rules, pos, c, g));
  }
  return t;
}

}  // namespace

void check_ast(const Ast& t, std::optional<Nonterminal> root,
               const Grammar& g) {
  check_node(t, root, g);
}

TokenSeq pretty_print(const Ast& t, const Grammar& g) {
  check_node(t, std::nullopt, g);
  TokenSeq out;
  emit_yield(t, g, out);
  return out;
}

int depth(const Ast& t) {
  int deepest = 0;
  for (const Ast& c : t.children) deepest = std::max(deepest, depth(c));
  return 1 + deepest;
}

std::size_t node_count(const Ast& t) {
  std::size_t n = 1;
  for (const Ast& c : t.children) n += node_count(c);
  return n;
}

bool ast_equal(const Ast& a, const Ast& b) { return a == b; }

std::string serialize(const Ast& t, const Grammar& g) {
  check_node(t, std::nullopt, g);
  std::string out;
  emit_text(t, g, out);
  return out;
}

Ast deserialize(std::string_view text, const Grammar& g) {
  TextReader reader(text, g);
  Ast t = reader.read_tree();
  reader.finish();
  check_node(t, std::nullopt, g);
  return t;
}

std::vector<RuleId> preorder(const Ast& t) {
  std::vector<RuleId> out;
  emit_preorder(t, out);
  return out;
}

Ast from_preorder(std::span<const RuleId> rules, Nonterminal root,
                  const Grammar& g) {
  std::size_t pos = 0;
  Ast t = build_preorder(rules, pos, root, g);
  if (pos != rules.size()) throw AstError("pre-order list has extra rules");
  return t;
}

}  // namespace ngsi
