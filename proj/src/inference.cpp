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

#include "ngsi/inference.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "ngsi/decomposer.hpp"
#include "ngsi/reference_parser.hpp"

namespace ngsi {
namespace {

// Applicable rules of `nt` by descending probability, ties by rule id.
std::vector<RuleId> ranked_rules(const std::vector<double>& dist,
                                 Nonterminal nt, const Grammar& g) {
  auto ids = g.rules_for(nt);
  std::vector<RuleId> out(ids.begin(), ids.end());
  std::stable_sort(out.begin(), out.end(), [&](RuleId a, RuleId b) {
    return dist[idx(a)] > dist[idx(b)];
  });
  return out;
}

double log_prob(double p) {
  return p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity();
}

bool same_tokens(TokenSpan a, const TokenSeq& b) {
  return std::equal(a.begin(), a.end(), b.begin(), b.end());
}

class Engine {
 public:
  Engine(const RuleSelector& sel, const InferConfig& cfg, const Grammar& g)
      : sel_(sel), cfg_(cfg), g_(g) {}

  Ast greedy(TokenSpan d, Nonterminal nt, int level) {
    if (level > cfg_.max_recursion_depth) {
      throw InferenceError(InferErrorKind::kDepthLimit,
                           "recursion depth limit " +
                               std::to_string(cfg_.max_recursion_depth) +
                               " exceeded");
    }
    auto dist = sel_.distribution(d, nt);
    RuleId best = ranked_rules(dist, nt, g_).front();
    const ProductionRule& rule = g_.rule(best);
    auto parts = decompose(d, rule, g_);
    if (auto* failure = std::get_if<DecompositionFailure>(&parts)) {
      throw InferenceError(InferErrorKind::kUnparseable,
                           "cannot decompose '" + g_.detokenize(d) +
                               "' with " + failure->reason);
    }
    const auto& comps = std::get<Components>(parts);
    auto kids = rule.children();
    Ast t{best, {}};
    for (std::size_t i = 0; i < kids.size(); ++i) {
      t.children.push_back(greedy(comps[i], kids[i], level + 1));
    }
    return t;
  }

  std::optional<Ast> fallback(TokenSpan d, Nonterminal nt, int level) {
    if (level > cfg_.max_recursion_depth) {
      depth_limit_hit_ = true;
      return std::nullopt;
    }
    auto dist = sel_.distribution(d, nt);
    for (RuleId id : ranked_rules(dist, nt, g_)) {
      const ProductionRule& rule = g_.rule(id);
      auto parts = decompose(d, rule, g_);
      if (std::holds_alternative<DecompositionFailure>(parts)) continue;
      const auto& comps = std::get<Components>(parts);
      auto kids = rule.children();
      Ast t{id, {}};
      bool ok = true;
      for (std::size_t i = 0; i < kids.size() && ok; ++i) {
        auto child = fallback(comps[i], kids[i], level + 1);
        if (child) {
          t.children.push_back(std::move(*child));
        } else {
          ok = false;
        }
      }
      if (!ok) continue;
      if (cfg_.verify_reconstruction && !same_tokens(d, pretty_print(t, g_))) {
        continue;
      }
      return t;
    }
    return std::nullopt;
  }

  struct Scored {
    Ast tree;
    double score;
  };

  std::vector<Scored> beam(TokenSpan d, Nonterminal nt, int level) {
    if (level > cfg_.max_recursion_depth) {
      depth_limit_hit_ = true;
      return {};
    }
    const auto width = static_cast<std::size_t>(cfg_.beam_width);
    auto dist = sel_.distribution(d, nt);
    std::vector<Scored> found;
    std::size_t expanded = 0;
    for (RuleId id : ranked_rules(dist, nt, g_)) {
      if (expanded == width) break;
      const ProductionRule& rule = g_.rule(id);
      auto parts = decompose(d, rule, g_);
      if (std::holds_alternative<DecompositionFailure>(parts)) continue;
      ++expanded;
      const auto& comps = std::get<Components>(parts);
      auto kids = rule.children();

      // Partial assignments of the children seen so far, best first.
      std::vector<Scored> partial{{Ast{id, {}}, log_prob(dist[idx(id)])}};
      for (std::size_t i = 0; i < kids.size() && !partial.empty(); ++i) {
        auto options = beam(comps[i], kids[i], level + 1);
        std::vector<Scored> next;
        for (const Scored& p : partial) {
          for (const Scored& o : options) {
            Scored s{p.tree, p.score + o.score};
            s.tree.children.push_back(o.tree);
            next.push_back(std::move(s));
          }
        }
        keep_best(next, width);
        partial = std::move(next);
      }
      for (Scored& s : partial) {
        if (cfg_.verify_reconstruction &&
            !same_tokens(d, pretty_print(s.tree, g_))) {
          continue;
        }
        found.push_back(std::move(s));
      }
    }
    keep_best(found, width);
    return found;
  }

  bool depth_limit_hit() const { return depth_limit_hit_; }

 private:
  static void keep_best(std::vector<Scored>& v, std::size_t width) {
    std::stable_sort(v.begin(), v.end(), [](const Scored& a, const Scored& b) {
      return a.score > b.score;
    });
    if (v.size() > width) v.resize(width);
  }

  const RuleSelector& sel_;
  const InferConfig& cfg_;
  const Grammar& g_;
  bool depth_limit_hit_ = false;
};

}  // namespace

NeuralGuider::NeuralGuider(GuiderModel model, const Grammar& g)
    : model_(std::move(model)), g_(g) {
  model_.check_compatible(g);
  const auto& p = model_.params;
  proj_z_ = p.embedding * p.w_z;
  proj_r_ = p.embedding * p.w_r;
  proj_h_ = p.embedding * p.w_h;
}

RowVector<float> NeuralGuider::encode(TokenSpan d) const {
  const auto& p = model_.params;
  detail::check_tokens(d, p.vocab_size());
  RowVector<float> h = RowVector<float>::Zero(p.hidden_dim());
  RowVector<float> z, r, c;
  for (TokenId t : d) {
    const auto row = static_cast<Eigen::Index>(idx(t));
    z.noalias() = proj_z_.row(row) + p.b_z;
    z.noalias() += h * p.u_z;
    r.noalias() = proj_r_.row(row) + p.b_r;
    r.noalias() += h * p.u_r;
    z = detail::sigmoid(z.array()).matrix();
    r = detail::sigmoid(r.array()).matrix();
    c.noalias() = proj_h_.row(row) + p.b_h;
    c.noalias() += r.cwiseProduct(h) * p.u_h;
    c = c.array().tanh().matrix();
    h += z.cwiseProduct(c - h);
  }
  return h;
}

std::vector<double> NeuralGuider::distribution(TokenSpan d,
                                               Nonterminal nt) const {
  auto probs = detail::masked_softmax<float>(
      rule_logits<float>(encode(d), model_.params), g_.rules_for(nt));
  return {probs.begin(), probs.end()};
}

std::vector<double> OracleSelector::distribution(TokenSpan d,
                                                 Nonterminal nt) const {
  const Grammar& g = builtin_grammar();
  std::vector<double> out(g.rule_count(), 0.0);
  try {
    out[idx(reference_parse(d, nt).rule)] = 1.0;
  } catch (const ParseError&) {
    auto ids = g.rules_for(nt);
    for (RuleId r : ids) out[idx(r)] = 1.0 / static_cast<double>(ids.size());
  }
  return out;
}

std::string_view to_string(InferMode mode) {
  switch (mode) {
    case InferMode::kGreedy: return "greedy";
    case InferMode::kFallback: return "fallback";
    case InferMode::kBeam: return "beam";
  }
  return "?";
}

InferMode parse_infer_mode(std::string_view text) {
  if (text == "greedy") return InferMode::kGreedy;
  if (text == "fallback") return InferMode::kFallback;
  if (text == "beam") return InferMode::kBeam;
  throw std::invalid_argument("unknown inference mode '" + std::string(text) +
                              "'");
}

void InferConfig::validate() const {
  if (beam_width < 1) throw std::invalid_argument("beam_width must be >= 1");
  if (max_recursion_depth < 1) {
    throw std::invalid_argument("max_recursion_depth must be >= 1");
  }
}

std::string_view to_string(InferErrorKind kind) {
  switch (kind) {
    case InferErrorKind::kEmptyInput: return "empty_input";
    case InferErrorKind::kUnparseable: return "unparseable";
    case InferErrorKind::kDepthLimit: return "depth_limit";
    case InferErrorKind::kInconsistentParse: return "inconsistent_parse";
  }
  return "?";
}

Ast infer(TokenSpan d, Nonterminal nt, const RuleSelector& selector,
          const InferConfig& cfg, const Grammar& g) {
  cfg.validate();
  if (d.empty()) {
    throw InferenceError(InferErrorKind::kEmptyInput, "empty input");
  }
  Engine engine(selector, cfg, g);
  auto no_parse = [&]() {
    if (engine.depth_limit_hit()) {
      return InferenceError(InferErrorKind::kDepthLimit,
                            "no parse within the recursion depth limit");
    }
    return InferenceError(InferErrorKind::kUnparseable,
                          "no parse as " + g.nonterminal_name(nt));
  };

  switch (cfg.mode) {
    case InferMode::kGreedy: {
      Ast t = engine.greedy(d, nt, 1);
      if (cfg.verify_reconstruction && !same_tokens(d, pretty_print(t, g))) {
        throw InferenceError(InferErrorKind::kInconsistentParse,
                             "inferred tree does not reconstruct the input");
      }
      return t;
    }
    case InferMode::kFallback: {
      auto t = engine.fallback(d, nt, 1);
      if (!t) throw no_parse();
      return std::move(*t);
    }
    case InferMode::kBeam: {
      auto found = engine.beam(d, nt, 1);
      if (found.empty()) throw no_parse();
      return std::move(found.front().tree);
    }
  }
  throw std::logic_error("unhandled inference mode");
}

double tree_score(const Ast& t, const RuleSelector& selector,
                  const Grammar& g) {
  TokenSeq yield = pretty_print(t, g);
  double s = log_prob(selector.distribution(yield, g.rule(t.rule).lhs)[idx(t.rule)]);
  for (const Ast& c : t.children) s += tree_score(c, selector, g);
  return s;
}

std::vector<InferRow> infer_lines(const std::vector<std::string>& lines,
                                  const RuleSelector& selector,
                                  const InferConfig& cfg, const Grammar& g) {
  std::vector<InferRow> rows;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    line = line.substr(0, line.find('\t'));
    if (line.find_first_not_of(" \r\n") == std::string_view::npos) continue;
    InferRow row;
    row.line = i + 1;
    try {
      row.tokens = g.tokenize(line);
    } catch (const GrammarError&) {
      row.error = "unknown_token";
      rows.push_back(std::move(row));
      continue;
    }
    auto start = std::chrono::steady_clock::now();
    try {
      row.tree = infer(row.tokens, g.start(), selector, cfg, g);
    } catch (const InferenceError& e) {
      row.error = std::string(to_string(e.kind()));
    }
    row.seconds = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - start)
                      .count();
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<InferRow> infer_file(const std::filesystem::path& corpus,
                                 const RuleSelector& selector,
                                 const InferConfig& cfg, const Grammar& g) {
  std::ifstream in(corpus);
  if (!in) throw std::runtime_error("cannot read corpus " + corpus.string());
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  if (in.bad()) throw std::runtime_error("error reading " + corpus.string());
  return infer_lines(lines, selector, cfg, g);
}

}  // namespace ngsi
