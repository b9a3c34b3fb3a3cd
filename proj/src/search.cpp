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

#include "ngsi/search.hpp"

#include <chrono>
#include <limits>
#include <stdexcept>
#include <vector>

namespace ngsi {
namespace {

struct Timeout {};

// Shortest yield of every nonterminal (fixpoint over the rule table).
std::vector<int> shortest_yields(const Grammar& g) {
  constexpr int kInf = std::numeric_limits<int>::max() / 4;
  std::vector<int> best(g.nonterminal_count(), kInf);
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& r : g.rules()) {
      int len = 0;
      for (const Symbol& s : r.rhs) {
        if (std::holds_alternative<TokenId>(s)) {
          ++len;
        } else {
          len += best[idx(std::get<Nonterminal>(s))];
        }
      }
      if (len < best[idx(r.lhs)]) {
        best[idx(r.lhs)] = len;
        changed = true;
      }
    }
  }
  return best;
}

class Searcher {
 public:
  Searcher(TokenSpan d, const SearchConfig& cfg, const Grammar& g)
      : d_(d),
        g_(g),
        shortest_(shortest_yields(g)),
        deadline_(std::chrono::steady_clock::now() +
                  std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                      std::chrono::duration<double>(cfg.time_limit_seconds))) {}

  bool run(int limit) {
    stack_.clear();
    choices_.clear();
    stack_.push_back({false, static_cast<std::uint16_t>(idx(g_.start())), limit});
    pending_min_ = shortest_[idx(g_.start())];
    return dfs(0);
  }

  const std::vector<RuleId>& choices() const { return choices_; }
  std::uint64_t expansions() const { return expansions_; }

 private:
  struct Item {
    bool terminal;
    std::uint16_t id;
    int budget;  // remaining depth for a nonterminal
  };

  int min_len(const Item& it) const {
    return it.terminal ? 1 : shortest_[it.id];
  }

  bool dfs(std::size_t pos) {
    if ((++expansions_ & 0xfff) == 0 &&
        std::chrono::steady_clock::now() > deadline_) {
      throw Timeout{};
    }
    if (stack_.empty()) return pos == d_.size();
    if (static_cast<long>(d_.size() - pos) < pending_min_) return false;

    const Item top = stack_.back();
    if (top.terminal) {
      if (pos >= d_.size() || idx(d_[pos]) != top.id) return false;
      stack_.pop_back();
      --pending_min_;
      if (dfs(pos + 1)) return true;
      stack_.push_back(top);
      ++pending_min_;
      return false;
    }
    if (top.budget <= 0) return false;

    stack_.pop_back();
    pending_min_ -= min_len(top);
    for (RuleId id : g_.rules_for(static_cast<Nonterminal>(top.id))) {
      const ProductionRule& r = g_.rule(id);
      const std::size_t base = stack_.size();
      for (auto it = r.rhs.rbegin(); it != r.rhs.rend(); ++it) {
        Item child{};
        if (const auto* t = std::get_if<TokenId>(&*it)) {
          child = {true, static_cast<std::uint16_t>(idx(*t)), 0};
        } else {
          child = {false,
                   static_cast<std::uint16_t>(idx(std::get<Nonterminal>(*it))),
                   top.budget - 1};
        }
        pending_min_ += min_len(child);
        stack_.push_back(child);
      }
      choices_.push_back(id);
      if (dfs(pos)) return true;
      choices_.pop_back();
      while (stack_.size() > base) {
        pending_min_ -= min_len(stack_.back());
        stack_.pop_back();
      }
    }
    stack_.push_back(top);
    pending_min_ += min_len(top);
    return false;
  }

  TokenSpan d_;
  const Grammar& g_;
  std::vector<int> shortest_;
  std::chrono::steady_clock::time_point deadline_;
  std::vector<Item> stack_;
  std::vector<RuleId> choices_;
  long pending_min_ = 0;
  std::uint64_t expansions_ = 0;
};

}  // namespace

std::string_view to_string(SearchStatus s) {
  switch (s) {
    case SearchStatus::kFound: return "found";
    case SearchStatus::kTimeout: return "timeout";
    case SearchStatus::kExhausted: return "unparseable";
  }
  return "?";
}

SearchResult iddfs_parse(TokenSpan d, const SearchConfig& cfg,
                         const Grammar& g) {
  if (d.empty()) throw std::invalid_argument("iddfs_parse: empty input");
  if (cfg.max_depth < 1) throw std::invalid_argument("max_depth must be >= 1");
  if (!(cfg.time_limit_seconds > 0.0)) {
    throw std::invalid_argument("time_limit_seconds must be positive");
  }
  Searcher s(d, cfg, g);
  SearchResult result;
  try {
    for (int limit = 1; limit <= cfg.max_depth; ++limit) {
      result.depth_limit = limit;
      if (s.run(limit)) {
        result.status = SearchStatus::kFound;
        result.tree = from_preorder(s.choices(), g.start(), g);
        break;
      }
    }
  } catch (const Timeout&) {
    result.status = SearchStatus::kTimeout;
  }
  result.expansions = s.expansions();
  return result;
}

}  // namespace ngsi
