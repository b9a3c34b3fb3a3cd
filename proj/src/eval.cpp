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

#include "ngsi/eval.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace ngsi {
namespace {

static_assert(SeedStream::kEvaluation != SeedStream::kTraining &&
                  SeedStream::kEvaluation != SeedStream::kHeldOut &&
                  SeedStream::kEvaluation != SeedStream::kGeneration,
              "evaluation draws must not share a seed stream with training");

const std::vector<std::string>& known_methods() {
  static const std::vector<std::string> m{"ngsi",      "ngsi-greedy",
                                          "ngsi-fallback", "ngsi-beam",
                                          "search",    "oracle"};
  return m;
}

struct Outcome {
  bool match = false;
  std::string error;
  double seconds = 0.0;
};

Outcome run_method(const std::string& method, const Program& p,
                   const EvalConfig& cfg, const NeuralGuider* guider) {
  const Grammar& g = builtin_grammar();
  Outcome out;
  auto start = std::chrono::steady_clock::now();
  std::optional<Ast> tree;
  if (method == "search") {
    auto r = iddfs_parse(p.tokens, cfg.search, g);
    if (r.tree) {
      tree = std::move(r.tree);
    } else {
      out.error = std::string(to_string(r.status));
    }
  } else {
    InferConfig ic = cfg.infer;
    if (method == "ngsi-greedy") ic.mode = InferMode::kGreedy;
    if (method == "ngsi-fallback") ic.mode = InferMode::kFallback;
    if (method == "ngsi-beam") ic.mode = InferMode::kBeam;
    static const OracleSelector oracle;
    const RuleSelector* sel = method == "oracle"
                                  ? static_cast<const RuleSelector*>(&oracle)
                                  : guider;
    try {
      tree = infer(p.tokens, g.start(), *sel, ic, g);
    } catch (const InferenceError& e) {
      out.error = std::string(to_string(e.kind()));
    }
  }
  out.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  if (tree) {
    out.match = ast_equal(*tree, p.tree);
    if (!out.match) out.error = "wrong_tree";
  }
  return out;
}

std::string format_errors(const std::map<std::string, int>& errors) {
  std::string out;
  for (const auto& [kind, n] : errors) {
    if (!out.empty()) out += ';';
    out += kind + ':' + std::to_string(n);
  }
  return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(s);
  while (std::getline(in, field, sep)) out.push_back(field);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

void EvalConfig::validate() const {
  if (per_cell < 1) throw std::invalid_argument("per_cell must be >= 1");
  if (min_depth > max_depth || min_length > max_length) {
    throw std::invalid_argument("empty depth or length range");
  }
  if (min_length < 4) {
    throw std::invalid_argument("programs have at least 4 tokens");
  }
  if (max_length > kMaxSampleLength) {
    throw std::invalid_argument("lengths above " +
                                std::to_string(kMaxSampleLength) +
                                " are not supported");
  }
  if (jobs < 1) throw std::invalid_argument("jobs must be >= 1");
  if (methods.empty()) throw std::invalid_argument("no methods given");
  for (const auto& m : methods) {
    if (std::find(known_methods().begin(), known_methods().end(), m) ==
        known_methods().end()) {
      throw std::invalid_argument("unknown method '" + m + "'");
    }
  }
  infer.validate();
}

std::vector<Program> cell_programs(int depth, int length, int count,
                                   std::uint64_t seed) {
  std::vector<Program> out;
  if (!DerivationCounts::instance().feasible(length, depth)) return out;
  SampleBucket bucket{length, length, depth, depth, seed};
  for (int i = 0; i < count; ++i) {
    Rng rng = make_rng(seed, SeedStream::kEvaluation,
                       {static_cast<std::uint64_t>(depth),
                        static_cast<std::uint64_t>(length),
                        static_cast<std::uint64_t>(i)});
    out.push_back(sample_program(bucket, rng));
  }
  return out;
}

EvalRecord evaluate_programs(const std::string& method,
                             const std::vector<Program>& programs,
                             const EvalConfig& cfg,
                             const NeuralGuider* guider) {
  if (method.rfind("ngsi", 0) == 0 && guider == nullptr) {
    throw std::invalid_argument("method " + method + " needs a model");
  }
  EvalRecord rec;
  rec.method = method;
  rec.count = static_cast<int>(programs.size());
  std::vector<double> times;
  int matches = 0;
  for (const Program& p : programs) {
    Outcome o = run_method(method, p, cfg, guider);
    if (o.match) ++matches;
    if (!o.error.empty()) ++rec.errors[o.error];
    times.push_back(o.seconds);
  }
  if (rec.count > 0) {
    rec.exact_match = static_cast<double>(matches) / rec.count;
    if (cfg.record_timing) {
      double sum = 0.0;
      for (double t : times) sum += t;
      rec.mean_time_s = sum / rec.count;
      std::sort(times.begin(), times.end());
      auto rank = static_cast<std::size_t>(std::ceil(0.95 * rec.count));
      rec.p95_time_s = times[std::max<std::size_t>(rank, 1) - 1];
    }
  }
  return rec;
}

std::vector<EvalRecord> evaluate_grid(const EvalConfig& cfg,
                                      const NeuralGuider* guider) {
  cfg.validate();
  struct Cell {
    int depth;
    int length;
  };
  std::vector<Cell> cells;
  for (int d = cfg.min_depth; d <= cfg.max_depth; ++d) {
    for (int n = cfg.min_length; n <= cfg.max_length; ++n) {
      cells.push_back({d, n});
    }
  }
  std::vector<std::vector<EvalRecord>> per_cell(cells.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mu;
  std::exception_ptr error;
  auto worker = [&]() {
    for (std::size_t i; (i = next++) < cells.size();) {
      try {
        auto programs =
            cell_programs(cells[i].depth, cells[i].length, cfg.per_cell, cfg.seed);
        for (const auto& m : cfg.methods) {
          EvalRecord rec = evaluate_programs(m, programs, cfg, guider);
          rec.depth = cells[i].depth;
          rec.length = cells[i].length;
          per_cell[i].push_back(std::move(rec));
        }
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  if (cfg.jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int j = 0; j < cfg.jobs; ++j) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);

  std::vector<EvalRecord> out;
  for (auto& v : per_cell) {
    for (auto& r : v) out.push_back(std::move(r));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const EvalRecord& a, const EvalRecord& b) {
                     return std::tie(a.method, a.depth, a.length) <
                            std::tie(b.method, b.depth, b.length);
                   });
  return out;
}

std::string to_csv(const std::vector<EvalRecord>& records) {
  std::string out =
      "method,depth,length,count,exact_match,mean_time_s,p95_time_s,errors\n";
  char buf[256];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof buf, "%s,%d,%d,%d,%.4f,%.6f,%.6f,",
                  r.method.c_str(), r.depth, r.length, r.count, r.exact_match,
                  r.mean_time_s, r.p95_time_s);
    out += buf;
    out += format_errors(r.errors);
    out += '\n';
  }
  return out;
}

void write_csv(const std::vector<EvalRecord>& records,
               const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  const std::string text = to_csv(records);
  if (!f || !f.write(text.data(), static_cast<std::streamsize>(text.size()))) {
    throw std::runtime_error("cannot write " + path.string());
  }
}

std::vector<EvalRecord> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) ||
      line != "method,depth,length,count,exact_match,mean_time_s,p95_time_s,errors") {
    throw std::runtime_error(path.string() + ": missing CSV header");
  }
  std::vector<EvalRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = split(line, ',');
    if (f.size() != 8) {
      throw std::runtime_error(path.string() + ": malformed row '" + line + "'");
    }
    EvalRecord r;
    r.method = f[0];
    r.depth = std::stoi(f[1]);
    r.length = std::stoi(f[2]);
    r.count = std::stoi(f[3]);
    r.exact_match = std::stod(f[4]);
    r.mean_time_s = std::stod(f[5]);
    r.p95_time_s = std::stod(f[6]);
    if (!f[7].empty()) {
      for (const auto& entry : split(f[7], ';')) {
        auto colon = entry.rfind(':');
        if (colon == std::string::npos) {
          throw std::runtime_error(path.string() + ": bad errors field");
        }
        r.errors[entry.substr(0, colon)] = std::stoi(entry.substr(colon + 1));
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace ngsi
