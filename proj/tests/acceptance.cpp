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

// End-to-end acceptance checks. Prints one PASS/FAIL line per check and
// exits non-zero if any fails. Trains the default guider from scratch.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "gradient_check.hpp"
#include "ngsi/ast.hpp"
#include "ngsi/eval.hpp"
#include "ngsi/inference.hpp"
#include "ngsi/reference_parser.hpp"
#include "ngsi/sampler.hpp"
#include "ngsi/search.hpp"
#include "ngsi/trainer.hpp"
#include "support.hpp"

using namespace ngsi;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int failures = 0;

void report(int id, const std::string& name, bool pass,
            const std::string& detail) {
  if (!pass) ++failures;
  std::printf("%s [%d] %s: %s\n", pass ? "PASS" : "FAIL", id, name.c_str(),
              detail.c_str());
  std::fflush(stdout);
}

void guarded(int id, const std::string& name,
             const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(id, name, false, std::string("threw: ") + e.what());
  }
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<Program> programs(const SampleBucket& b, int n, std::uint64_t tag) {
  return testing::sample_many(b, n, tag);
}

void check_oracle_inference() {
  const Grammar& g = builtin_grammar();
  auto corpus = programs(SampleBucket{4, 40, 1, 12}, 10000, 101);
  OracleSelector oracle;
  int ok = 0;
  auto start = Clock::now();
  for (const Program& p : corpus) {
    try {
      if (ast_equal(infer(p.tokens, g.start(), oracle, InferConfig{}), p.tree)) {
        ++ok;
      }
    } catch (const InferenceError&) {
    }
  }
  double s = seconds_since(start);
  report(1, "oracle-guided inference", ok == 10000 && s < 60.0,
         fmt("%d/10000 exact, %.2f s", ok, s));
}

void check_round_trip() {
  const Grammar& g = builtin_grammar();
  int trees = 0;
  int strings = 0;
  for (const Program& p : programs(SampleBucket{4, 40, 1, 12}, 10000, 102)) {
    if (ast_equal(reference_parse(pretty_print(p.tree), g.start()), p.tree)) {
      ++trees;
    }
    if (pretty_print(reference_parse(p.tokens, g.start())) == p.tokens) {
      ++strings;
    }
  }
  report(2, "print/parse round trip", trees == 10000 && strings == 10000,
         fmt("tree->text->tree %d/10000, text->tree->text %d/10000", trees,
             strings));
}

void check_gradients() {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto prob = testing::make_gradient_problem(seed, 4, 4, 3);
    worst = std::max(worst, testing::max_relative_error<float>(prob));
  }
  report(3, "float32 gradient check", worst < 1e-3,
         fmt("max relative error %.3g over 100 models", worst));
}

GuiderModel check_training() {
  TrainConfig cfg;
  auto start = Clock::now();
  TrainResult r = train(curriculum_schedule(4), cfg);
  double s = seconds_since(start);
  auto heldout =
      draw_pairs(SampleBucket{5, 15, 1, 9}, 2000, 0xacce97, SeedStream::kHeldOut, 0);
  NeuralGuider guider(r.model);
  double acc = step_accuracy(guider, heldout);
  report(4, "curriculum training", acc >= 0.99 && s <= 7200.0,
         fmt("held-out step accuracy %.5f on %zu steps, %.1f s", acc,
             heldout.size(), s));
  return r.model;
}

void check_grid(const NeuralGuider& guider) {
  EvalConfig cfg;
  cfg.methods = {"ngsi"};
  auto rows = evaluate_grid(cfg, &guider);
  double depth11 = 0.0, length30 = 0.0, worst_p95 = 0.0;
  int n11 = 0, n30 = 0;
  for (const EvalRecord& r : rows) {
    if (r.count == 0) continue;
    if (r.depth == 11) depth11 += r.exact_match, ++n11;
    if (r.length == 30) length30 += r.exact_match, ++n30;
    worst_p95 = std::max(worst_p95, r.p95_time_s);
  }
  depth11 /= std::max(n11, 1);
  length30 /= std::max(n30, 1);
  report(5, "trained guider generalization",
         n11 > 0 && n30 > 0 && depth11 >= 0.85 && length30 >= 0.85,
         fmt("depth 11 mean %.4f over %d cells, length 30 mean %.4f over %d "
             "cells",
             depth11, n11, length30, n30));
  report(6, "guided inference latency", worst_p95 < 1.0,
         fmt("largest per-cell p95 %.4f s over %zu cells", worst_p95,
             rows.size()));
}

void check_search(const NeuralGuider& guider) {
  const Grammar& g = builtin_grammar();
  SearchConfig sc{64, 120.0};
  auto shallow = cell_programs(6, 4, 50, 7);
  int found = 0;
  double guided_worst = 0.0;
  auto guided = [&](const Program& p) {
    auto start = Clock::now();
    Ast t = infer(p.tokens, g.start(), guider, InferConfig{});
    guided_worst = std::max(guided_worst, seconds_since(start));
    return ast_equal(t, p.tree);
  };
  bool guided_ok = true;
  for (const Program& p : shallow) {
    auto r = iddfs_parse(p.tokens, sc);
    if (r.tree && ast_equal(*r.tree, p.tree)) ++found;
    guided_ok = guided(p) && guided_ok;
  }
  std::vector<double> t8, t16;
  // Each length is drawn over its full depth range, as the sampler does.
  for (auto [len, out] : {std::pair{8, &t8}, {16, &t16}}) {
    SampleBucket b{len, len, 1, 2 * len + 8};
    for (const Program& p : programs(b, 101, 700 + len)) {
      auto start = Clock::now();
      auto r = iddfs_parse(p.tokens, sc);
      out->push_back(seconds_since(start));
      if (!r.tree) out->back() = sc.time_limit_seconds;
      guided_ok = guided(p) && guided_ok;
    }
  }
  double ratio = median(t16) / median(t8);
  report(7, "search baseline",
         found == static_cast<int>(shallow.size()) && ratio >= 4.0 &&
             guided_ok && guided_worst < 1.0,
         fmt("depth 6: %d/%zu found; median %.3g s (len 16) vs %.3g s (len 8), "
             "ratio %.1f; guided worst %.4f s",
             found, shallow.size(), median(t16), median(t8), ratio,
             guided_worst));
}

void check_masking(const NeuralGuider& guider) {
  const Grammar& g = builtin_grammar();
  Rng rng = make_rng(0x6d61736b, SeedStream::kEvaluation);
  std::uniform_int_distribution<int> len(1, 30);
  std::uniform_int_distribution<int> tok(0, static_cast<int>(g.token_count()) - 1);
  std::uniform_int_distribution<int> nts(0, static_cast<int>(g.nonterminal_count()) - 1);
  double worst_leak = 0.0, worst_sum = 0.0;
  for (int i = 0; i < 10000; ++i) {
    TokenSeq d(len(rng));
    for (auto& t : d) t = static_cast<TokenId>(tok(rng));
    auto n = static_cast<Nonterminal>(nts(rng));
    auto dist = guider.distribution(d, n);
    auto applicable = g.rules_for(n);
    double sum = 0.0;
    for (std::size_t r = 0; r < dist.size(); ++r) {
      bool in = std::find(applicable.begin(), applicable.end(),
                          static_cast<RuleId>(r)) != applicable.end();
      if (in) {
        sum += dist[r];
      } else {
        worst_leak = std::max(worst_leak, std::abs(dist[r]));
      }
    }
    worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
  }
  report(8, "rule masking", worst_leak == 0.0 && worst_sum <= 1e-6,
         fmt("max inapplicable mass %.3g, max |sum - 1| %.3g over 10000 probes",
             worst_leak, worst_sum));
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

void check_determinism() {
  auto dir = testing::scratch_dir() / "determinism";
  std::vector<std::vector<std::string>> outputs;
  for (int round = 0; round < 2; ++round) {
    auto base = dir / std::to_string(round);
    std::filesystem::create_directories(base);
    auto p = [&](const char* f) { return (base / f).string(); };
    std::vector<std::vector<std::string>> cmds{
        {"gen", "--bucket", "5:15:1:9", "--n", "1000", "--seed", "7", "--out",
         p("corpus.txt"), "--pairs", p("pairs.txt")},
        {"train", "--model", p("model.bin"), "--log", p("log.csv"), "--seed",
         "7", "--stages", "2", "--iterations", "100", "--batch", "32",
         "--embed", "16", "--hidden", "32", "--programs-per-stage", "200",
         "--heldout", "50", "--eval-every", "50", "--quiet"},
        {"eval", "--model", p("model.bin"), "--methods",
         "ngsi,ngsi-greedy,ngsi-beam,oracle", "--depths", "8..10", "--lengths",
         "12..16", "--per-cell", "5", "--seed", "7", "--no-timing", "--out",
         p("eval.csv")}};
    for (const auto& args : cmds) {
      std::istringstream in;
      std::ostringstream out, err;
      int code = cli::run(args, in, out, err);
      if (code != 0) {
        throw std::runtime_error(args[0] + " exited " + std::to_string(code) +
                                 ": " + err.str());
      }
    }
    outputs.push_back({slurp(p("corpus.txt")), slurp(p("pairs.txt")),
                       slurp(p("model.bin")), slurp(p("log.csv")),
                       slurp(p("eval.csv"))});
  }
  std::filesystem::remove_all(dir);
  const char* names[] = {"corpus", "pairs", "model", "log", "eval"};
  std::string differing;
  for (std::size_t i = 0; i < outputs[0].size(); ++i) {
    if (outputs[0][i] != outputs[1][i] || outputs[0][i].empty()) {
      differing += std::string(" ") + names[i];
    }
  }
  report(9, "reproducible runs", differing.empty(),
         differing.empty()
             ? "gen, train and eval outputs byte-identical across two runs"
             : "differing or empty:" + differing);
}

}  // namespace

int main() {
  auto start = Clock::now();
  guarded(1, "oracle-guided inference", check_oracle_inference);
  guarded(2, "print/parse round trip", check_round_trip);
  guarded(3, "float32 gradient check", check_gradients);

  std::optional<NeuralGuider> guider;
  guarded(4, "curriculum training", [&] { guider.emplace(check_training()); });
  if (guider) {
    bool grid_done = false;
    guarded(5, "trained guider generalization", [&] {
      check_grid(*guider);
      grid_done = true;
    });
    if (!grid_done) report(6, "guided inference latency", false, "grid failed");
    guarded(7, "search baseline", [&] { check_search(*guider); });
    guarded(8, "rule masking", [&] { check_masking(*guider); });
  } else {
    for (int id : {5, 6, 7, 8}) report(id, "needs a trained guider", false, "skipped");
  }
  guarded(9, "reproducible runs", check_determinism);
  std::printf("%d failed, %.1f s total\n", failures, seconds_since(start));
  return failures == 0 ? 0 : 1;
}
