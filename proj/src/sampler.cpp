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

#include "ngsi/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ngsi {
namespace {

std::size_t pick_weighted(const std::vector<double>& weights, Rng& rng) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) throw SamplerError("no derivation carries weight");
  double u = std::uniform_real_distribution<double>(0.0, total)(rng);
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    if (u < weights[i]) return i;
    u -= weights[i];
  }
  // Rounding can leave u marginally above the last positive weight.
  for (std::size_t i = weights.size(); i-- > 0;) {
    if (weights[i] > 0.0) return i;
  }
  throw SamplerError("no derivation carries weight");
}

void collect_pairs(const Ast& t, const Grammar& g,
                   std::vector<TrainingPair>& out) {
  out.push_back({pretty_print(t, g), g.rule(t.rule).lhs, t.rule});
  for (const Ast& c : t.children) collect_pairs(c, g, out);
}

}  // namespace

void SampleBucket::validate() const {
  if (min_length > max_length || min_depth > max_depth) {
    throw std::invalid_argument("bucket " + to_string() +
                                ": min exceeds max");
  }
  if (min_length < 4) {
    throw std::invalid_argument("bucket " + to_string() +
                                ": programs have at least 4 tokens");
  }
  if (min_depth < 1) {
    throw std::invalid_argument("bucket " + to_string() +
                                ": depth is at least 1");
  }
}

std::string SampleBucket::to_string() const {
  std::ostringstream os;
  os << min_length << ':' << max_length << ':' << min_depth << ':'
     << max_depth;
  return os.str();
}

SampleBucket SampleBucket::parse(const std::string& text) {
  SampleBucket b;
  char c1 = 0, c2 = 0, c3 = 0;
  std::istringstream in(text);
  if (!(in >> b.min_length >> c1 >> b.max_length >> c2 >> b.min_depth >> c3 >>
        b.max_depth) ||
      c1 != ':' || c2 != ':' || c3 != ':' || !(in >> std::ws).eof()) {
    throw std::invalid_argument("bucket '" + text +
                                "' is not min_len:max_len:min_depth:max_depth");
  }
  b.validate();
  return b;
}

const DerivationCounts& DerivationCounts::instance() {
  static const DerivationCounts counts(builtin_grammar(), kMaxSampleLength);
  return counts;
}

std::size_t DerivationCounts::at(int nt, int length, int depth) const {
  return (static_cast<std::size_t>(nt) * (max_length_ + 1) + length) *
             (max_depth_ + 1) +
         depth;
}

std::size_t DerivationCounts::suffix_at(std::size_t k, int length,
                                        int depth) const {
  return (k * (max_length_ + 1) + length) * (max_depth_ + 1) + depth;
}

DerivationCounts::DerivationCounts(const Grammar& g, int max_length)
    : g_(g), max_length_(max_length), max_depth_(2 * max_length + 8) {
  const int L = max_length_;
  const int D = max_depth_;
  const int nts = static_cast<int>(g.nonterminal_count());
  exact_.assign(static_cast<std::size_t>(nts) * (L + 1) * (D + 1), 0.0);
  at_most_.assign(exact_.size(), 0.0);

  std::vector<int> leaf_rules(nts, 0);
  for (const auto& r : g.rules()) {
    if (r.children().empty()) ++leaf_rules[idx(r.lhs)];
  }
  for (const auto& r : g.rules()) {
    RuleTable rt;
    rt.rule = r.id;
    rt.lhs = static_cast<int>(idx(r.lhs));
    rt.terminals = static_cast<int>(r.terminal_count());
    for (Nonterminal c : r.children()) rt.kids.push_back(static_cast<int>(idx(c)));
    if (rt.kids.empty()) rt.weight = 1.0 / leaf_rules[rt.lhs];
    std::size_t size = (rt.kids.size() + 1) * (L + 1) * (D + 1);
    rt.le.assign(size, 0.0);
    rt.ex.assign(size, 0.0);
    for (int d = 0; d <= D; ++d) rt.le[suffix_at(rt.kids.size(), 0, d)] = 1.0;
    rule_tables_.push_back(std::move(rt));
  }

  for (int d = 1; d <= D; ++d) {
    for (const RuleTable& rt : rule_tables_) {
      for (int n = 1; n <= L; ++n) {
        int m = n - rt.terminals;
        if (m < 0) continue;
        double ways = 0.0;
        if (rt.kids.empty()) {
          ways = (d == 1 && m == 0) ? 1.0 : 0.0;
        } else {
          ways = rt.ex[suffix_at(0, m, d - 1)];
        }
        exact_[at(rt.lhs, n, d)] += rt.weight * ways;
      }
    }
    for (int nt = 0; nt < nts; ++nt) {
      for (int n = 0; n <= L; ++n) {
        at_most_[at(nt, n, d)] = at_most_[at(nt, n, d - 1)] + exact_[at(nt, n, d)];
      }
    }
    for (RuleTable& rt : rule_tables_) {
      for (std::size_t k = rt.kids.size(); k-- > 0;) {
        const int c = rt.kids[k];
        for (int m = 0; m <= L; ++m) {
          double le = 0.0, ex = 0.0;
          for (int n = 1; n <= m; ++n) {
            double rest_le = rt.le[suffix_at(k + 1, m - n, d)];
            double rest_ex = rt.ex[suffix_at(k + 1, m - n, d)];
            le += at_most_[at(c, n, d)] * rest_le;
            ex += exact_[at(c, n, d)] * rest_le +
                  at_most_[at(c, n, d - 1)] * rest_ex;
          }
          rt.le[suffix_at(k, m, d)] = le;
          rt.ex[suffix_at(k, m, d)] = ex;
        }
      }
    }
  }
}

double DerivationCounts::exact(Nonterminal nt, int length, int depth) const {
  if (length < 0 || length > max_length_ || depth < 0 || depth > max_depth_) {
    return 0.0;
  }
  return exact_[at(static_cast<int>(idx(nt)), length, depth)];
}

double DerivationCounts::at_most(Nonterminal nt, int length, int depth) const {
  if (length < 0 || length > max_length_ || depth < 0) return 0.0;
  depth = std::min(depth, max_depth_);
  return at_most_[at(static_cast<int>(idx(nt)), length, depth)];
}

bool DerivationCounts::feasible(int length, int depth) const {
  return exact(g_.start(), length, depth) > 0.0;
}

Ast DerivationCounts::sample_exact(Nonterminal nt, int length, int depth,
                                   Rng& rng) const {
  if (exact(nt, length, depth) <= 0.0) {
    throw SamplerError("no " + g_.nonterminal_name(nt) + " of length " +
                       std::to_string(length) + " and depth " +
                       std::to_string(depth));
  }
  std::vector<const RuleTable*> candidates;
  std::vector<double> weights;
  for (RuleId id : g_.rules_for(nt)) {
    const RuleTable& rt = rule_tables_[idx(id)];
    int m = length - rt.terminals;
    double w = 0.0;
    if (m >= 0) {
      if (rt.kids.empty()) {
        w = (depth == 1 && m == 0) ? rt.weight : 0.0;
      } else {
        w = rt.weight * rt.ex[suffix_at(0, m, depth - 1)];
      }
    }
    candidates.push_back(&rt);
    weights.push_back(w);
  }
  const RuleTable& rt = *candidates[pick_weighted(weights, rng)];
  Ast t{rt.rule, {}};
  sample_children(rt, 0, length - rt.terminals, depth - 1, true, rng,
                  t.children);
  return t;
}

Ast DerivationCounts::sample_at_most(Nonterminal nt, int length, int depth,
                                     Rng& rng) const {
  std::vector<double> weights;
  for (int d = 1; d <= depth; ++d) weights.push_back(exact(nt, length, d));
  int d = static_cast<int>(pick_weighted(weights, rng)) + 1;
  return sample_exact(nt, length, d, rng);
}

void DerivationCounts::sample_children(const RuleTable& rt, std::size_t k,
                                       int remaining, int depth,
                                       bool need_exact, Rng& rng,
                                       std::vector<Ast>& out) const {
  if (k == rt.kids.size()) return;
  const int c = rt.kids[k];
  const auto child = static_cast<Nonterminal>(c);

  // Option layout: index 2*(n-1) = child at exactly `depth` (or <= depth
  // when no exactness is required), 2*(n-1)+1 = child below `depth`.
  std::vector<double> weights(2 * static_cast<std::size_t>(remaining), 0.0);
  for (int n = 1; n <= remaining; ++n) {
    double rest_le = rt.le[suffix_at(k + 1, remaining - n, depth)];
    if (need_exact) {
      double rest_ex = rt.ex[suffix_at(k + 1, remaining - n, depth)];
      weights[2 * (n - 1)] = exact(child, n, depth) * rest_le;
      weights[2 * (n - 1) + 1] = at_most(child, n, depth - 1) * rest_ex;
    } else {
      weights[2 * (n - 1)] = at_most(child, n, depth) * rest_le;
    }
  }
  std::size_t choice = pick_weighted(weights, rng);
  int n = static_cast<int>(choice / 2) + 1;
  bool below = choice % 2 == 1;
  if (!need_exact) {
    out.push_back(sample_at_most(child, n, depth, rng));
  } else if (below) {
    out.push_back(sample_at_most(child, n, depth - 1, rng));
  } else {
    out.push_back(sample_exact(child, n, depth, rng));
  }
  sample_children(rt, k + 1, remaining - n, depth, need_exact && below, rng,
                  out);
}

Program sample_program(const SampleBucket& bucket, Rng& rng) {
  bucket.validate();
  const DerivationCounts& counts = DerivationCounts::instance();
  if (bucket.max_length > counts.max_length()) {
    throw SamplerError("bucket " + bucket.to_string() +
                       " exceeds the sampler's length limit of " +
                       std::to_string(counts.max_length()));
  }
  const int max_depth = std::min(bucket.max_depth, counts.max_depth());
  std::vector<int> lengths;
  for (int n = bucket.min_length; n <= bucket.max_length; ++n) {
    for (int d = bucket.min_depth; d <= max_depth; ++d) {
      if (counts.feasible(n, d)) {
        lengths.push_back(n);
        break;
      }
    }
  }
  if (lengths.empty()) {
    throw SamplerError("bucket " + bucket.to_string() +
                       " admits no program of the grammar");
  }
  std::uniform_int_distribution<std::size_t> pick_len(0, lengths.size() - 1);
  const int n = lengths[pick_len(rng)];
  std::vector<int> depths;
  for (int d = bucket.min_depth; d <= max_depth; ++d) {
    if (counts.feasible(n, d)) depths.push_back(d);
  }
  std::uniform_int_distribution<std::size_t> pick_depth(0, depths.size() - 1);
  const int d = depths[pick_depth(rng)];

  const Grammar& g = builtin_grammar();
  Program p;
  p.tree = counts.sample_exact(g.start(), n, d, rng);
  p.tokens = pretty_print(p.tree, g);
  if (static_cast<int>(p.tokens.size()) != n || depth(p.tree) != d) {
    throw std::logic_error("sampler produced a program outside its cell");
  }
  return p;
}

std::vector<TrainingPair> extract_training_pairs(const Ast& t,
                                                 const Grammar& g) {
  std::vector<TrainingPair> out;
  collect_pairs(t, g, out);
  return out;
}

std::vector<SampleBucket> curriculum_schedule(int stages) {
  if (stages < 1) throw std::invalid_argument("stages must be >= 1");
  std::vector<SampleBucket> cycle;
  for (int i = 0; i < stages; ++i) {
    SampleBucket b;
    b.min_length = 5;
    b.min_depth = 1;
    if (stages == 1) {
      b.max_length = 15;
      b.max_depth = 9;
    } else {
      double frac = static_cast<double>(i) / (stages - 1);
      b.max_length = static_cast<int>(std::lround(7.0 + 8.0 * frac));
      // Every program of the shipped grammar has depth >= 6, and the
      // shortest ones above length 5 have depth 7.
      b.max_depth = static_cast<int>(std::lround(7.0 + 2.0 * frac));
    }
    cycle.push_back(b);
  }
  std::vector<SampleBucket> out;
  for (int rep = 0; rep < kCurriculumRepeats; ++rep) {
    for (const SampleBucket& b : cycle) {
      out.push_back(b);
      out.back().seed = out.size() - 1;
    }
  }
  return out;
}

}  // namespace ngsi
