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

#include "ngsi/reference_parser.hpp"

#include <algorithm>
#include <array>
#include <optional>

namespace ngsi {
namespace {

// Token and rule ids of the shipped grammar, resolved once by name.
struct Symbols {
  Nonterminal stmt, simp_stmt, aexpr, aterm, afactor, bexpr, var, cnst;
  TokenId semi, assign, kw_if, kw_then, kw_else, kw_endif, kw_while, kw_do,
      kw_endwhile, plus, minus, times, lparen, rparen, less, equal, kw_not,
      kw_and;
  std::array<TokenId, 5> vars;
  std::array<TokenId, 10> digits;
  RuleId s1, s2, a1, i1, w1, e1, e2, e3, t1, t2, f1, f2, f3, b1, b2, b3, b4;
  std::array<RuleId, 5> var_rules;
  std::array<RuleId, 10> const_rules;

  explicit Symbols(const Grammar& g) {
    stmt = g.nonterminal("Stmt");
    simp_stmt = g.nonterminal("SimpStmt");
    aexpr = g.nonterminal("AExpr");
    aterm = g.nonterminal("ATerm");
    afactor = g.nonterminal("AFactor");
    bexpr = g.nonterminal("BExpr");
    var = g.nonterminal("Var");
    cnst = g.nonterminal("Const");
    semi = g.token(";");
    assign = g.token("=");
    kw_if = g.token("if");
    kw_then = g.token("then");
    kw_else = g.token("else");
    kw_endif = g.token("endif");
    kw_while = g.token("while");
    kw_do = g.token("do");
    kw_endwhile = g.token("endwhile");
    plus = g.token("+");
    minus = g.token("-");
    times = g.token("*");
    lparen = g.token("(");
    rparen = g.token(")");
    less = g.token("<");
    equal = g.token("==");
    kw_not = g.token("not");
    kw_and = g.token("and");
    for (int i = 0; i < 5; ++i) {
      vars[i] = g.token("v" + std::to_string(i));
      var_rules[i] = g.rule("V" + std::to_string(i + 1));
    }
    for (int i = 0; i < 10; ++i) {
      digits[i] = g.token(std::to_string(i));
      const_rules[i] = g.rule("C" + std::to_string(i + 1));
    }
    s1 = g.rule("S1");
    s2 = g.rule("S2");
    a1 = g.rule("A1");
    i1 = g.rule("I1");
    w1 = g.rule("W1");
    e1 = g.rule("E1");
    e2 = g.rule("E2");
    e3 = g.rule("E3");
    t1 = g.rule("T1");
    t2 = g.rule("T2");
    f1 = g.rule("F1");
    f2 = g.rule("F2");
    f3 = g.rule("F3");
    b1 = g.rule("B1");
    b2 = g.rule("B2");
    b3 = g.rule("B3");
    b4 = g.rule("B4");
  }
};

const Symbols& symbols() {
  static const Symbols s(builtin_grammar());
  return s;
}

class Parser {
 public:
  explicit Parser(TokenSpan d) : d_(d), s_(symbols()) {}

  std::optional<Ast> parse(Nonterminal nt) {
    if (nt == s_.stmt) return stmt();
    if (nt == s_.simp_stmt) return simp_stmt();
    if (nt == s_.aexpr) return aexpr();
    if (nt == s_.aterm) return aterm();
    if (nt == s_.afactor) return afactor();
    if (nt == s_.bexpr) return bexpr();
    if (nt == s_.var) return var();
    if (nt == s_.cnst) return cnst();
    throw GrammarError("unknown nonterminal id " + std::to_string(idx(nt)));
  }

  std::size_t pos() const { return pos_; }
  std::size_t furthest() const { return std::max(furthest_, pos_); }

 private:
  bool at_end() const { return pos_ >= d_.size(); }
  bool peek(TokenId t) const { return !at_end() && d_[pos_] == t; }

  bool accept(TokenId t) {
    if (!peek(t)) {
      furthest_ = std::max(furthest_, pos_);
      return false;
    }
    ++pos_;
    return true;
  }

  std::optional<Ast> stmt() {
    auto first = simp_stmt();
    if (!first || !accept(s_.semi)) return std::nullopt;
    if (at_end() || peek(s_.kw_else) || peek(s_.kw_endif) ||
        peek(s_.kw_endwhile)) {
      return Ast{s_.s2, {std::move(*first)}};
    }
    auto rest = stmt();
    if (!rest) return std::nullopt;
    return Ast{s_.s1, {std::move(*first), std::move(*rest)}};
  }

  std::optional<Ast> simp_stmt() {
    if (accept(s_.kw_if)) {
      auto cond = bexpr();
      if (!cond || !accept(s_.kw_then)) return std::nullopt;
      auto yes = stmt();
      if (!yes || !accept(s_.kw_else)) return std::nullopt;
      auto no = stmt();
      if (!no || !accept(s_.kw_endif)) return std::nullopt;
      return Ast{s_.i1, {std::move(*cond), std::move(*yes), std::move(*no)}};
    }
    if (accept(s_.kw_while)) {
      auto cond = bexpr();
      if (!cond || !accept(s_.kw_do)) return std::nullopt;
      auto body = stmt();
      if (!body || !accept(s_.kw_endwhile)) return std::nullopt;
      return Ast{s_.w1, {std::move(*cond), std::move(*body)}};
    }
    auto target = var();
    if (!target || !accept(s_.assign)) return std::nullopt;
    auto value = aexpr();
    if (!value) return std::nullopt;
    return Ast{s_.a1, {std::move(*target), std::move(*value)}};
  }

  std::optional<Ast> aexpr() {
    auto head = aterm();
    if (!head) return std::nullopt;
    RuleId rule = s_.e3;
    if (accept(s_.plus)) {
      rule = s_.e1;
    } else if (accept(s_.minus)) {
      rule = s_.e2;
    } else {
      return Ast{s_.e3, {std::move(*head)}};
    }
    auto tail = aexpr();
    if (!tail) return std::nullopt;
    return Ast{rule, {std::move(*head), std::move(*tail)}};
  }

  std::optional<Ast> aterm() {
    auto head = afactor();
    if (!head) return std::nullopt;
    if (!accept(s_.times)) return Ast{s_.t2, {std::move(*head)}};
    auto tail = aterm();
    if (!tail) return std::nullopt;
    return Ast{s_.t1, {std::move(*head), std::move(*tail)}};
  }

  std::optional<Ast> afactor() {
    if (accept(s_.lparen)) {
      auto inner = aexpr();
      if (!inner || !accept(s_.rparen)) return std::nullopt;
      return Ast{s_.f1, {std::move(*inner)}};
    }
    if (auto v = var()) return Ast{s_.f2, {std::move(*v)}};
    if (auto c = cnst()) return Ast{s_.f3, {std::move(*c)}};
    return std::nullopt;
  }

  std::optional<Ast> bexpr() {
    if (accept(s_.kw_not)) {
      auto inner = bexpr();
      if (!inner) return std::nullopt;
      return Ast{s_.b3, {std::move(*inner)}};
    }
    if (peek(s_.lparen)) {
      // "( BExpr and BExpr )" and a comparison whose left operand is
      // parenthesized share the prefix; try the conjunction first.
      std::size_t mark = pos_;
      ++pos_;
      if (auto lhs = bexpr(); lhs && accept(s_.kw_and)) {
        if (auto rhs = bexpr(); rhs && accept(s_.rparen)) {
          return Ast{s_.b4, {std::move(*lhs), std::move(*rhs)}};
        }
      }
      furthest_ = std::max(furthest_, pos_);
      pos_ = mark;
    }
    auto lhs = aexpr();
    if (!lhs) return std::nullopt;
    RuleId rule{};
    if (accept(s_.less)) {
      rule = s_.b1;
    } else if (accept(s_.equal)) {
      rule = s_.b2;
    } else {
      return std::nullopt;
    }
    auto rhs = aexpr();
    if (!rhs) return std::nullopt;
    return Ast{rule, {std::move(*lhs), std::move(*rhs)}};
  }

  std::optional<Ast> var() {
    for (std::size_t i = 0; i < s_.vars.size(); ++i) {
      if (accept(s_.vars[i])) return Ast{s_.var_rules[i], {}};
    }
    return std::nullopt;
  }

  std::optional<Ast> cnst() {
    for (std::size_t i = 0; i < s_.digits.size(); ++i) {
      if (accept(s_.digits[i])) return Ast{s_.const_rules[i], {}};
    }
    return std::nullopt;
  }

  TokenSpan d_;
  const Symbols& s_;
  std::size_t pos_ = 0;
  std::size_t furthest_ = 0;
};

}  // namespace

Ast reference_parse(TokenSpan d, Nonterminal nt) {
  const Grammar& g = builtin_grammar();
  if (d.empty()) throw ParseError("unparseable: empty input", 0);
  Parser p(d);
  auto tree = p.parse(nt);
  if (tree && p.pos() == d.size()) return std::move(*tree);
  std::size_t at = tree ? p.pos() : p.furthest();
  std::string near = at < d.size() ? "'" + g.token_text(d[at]) + "'"
                                   : std::string("end of input");
  throw ParseError("unparseable as " + g.nonterminal_name(nt) +
                       ": stuck at token " + std::to_string(at) + " (" +
                       near + ")",
                   at);
}

}  // namespace ngsi
