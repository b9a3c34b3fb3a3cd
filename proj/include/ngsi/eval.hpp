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

// Generalization grid: exact-match rate and latency per (depth, length)
// cell for the guided engine, the search baseline and the oracle.

#ifndef NGSI_EVAL_HPP_
#define NGSI_EVAL_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ngsi/inference.hpp"
#include "ngsi/search.hpp"

namespace ngsi {

struct EvalRecord {
  std::string method;
  int depth = 0;
  int length = 0;
  int count = 0;  // 0 for cells no program of the grammar falls in
  double exact_match = 0.0;
  double mean_time_s = 0.0;
  double p95_time_s = 0.0;
  std::map<std::string, int> errors;

  friend bool operator==(const EvalRecord&, const EvalRecord&) = default;
};

struct EvalConfig {
  // ngsi (uses `infer`), ngsi-greedy, ngsi-fallback, ngsi-beam, search,
  // oracle.
  std::vector<std::string> methods{"ngsi"};
  int min_depth = 6;
  int max_depth = 11;
  int min_length = 15;
  int max_length = 30;
  int per_cell = 100;
  std::uint64_t seed = 1;
  int jobs = 1;
  bool record_timing = true;
  InferConfig infer;
  SearchConfig search{64, 60.0};

  void validate() const;
};

// Programs of one cell, identical for every method and every run with the
// same seed. Empty when the cell is infeasible.
std::vector<Program> cell_programs(int depth, int length, int count,
                                   std::uint64_t seed);

// `guider` may be null when no ngsi method is requested. Records are sorted
// by (method, depth, length).
std::vector<EvalRecord> evaluate_grid(const EvalConfig& cfg,
                                      const NeuralGuider* guider);

// Records over an explicit program list (used for ad-hoc corpora).
EvalRecord evaluate_programs(const std::string& method,
                             const std::vector<Program>& programs,
                             const EvalConfig& cfg,
                             const NeuralGuider* guider);

void write_csv(const std::vector<EvalRecord>& records,
               const std::filesystem::path& path);
std::string to_csv(const std::vector<EvalRecord>& records);
std::vector<EvalRecord> read_csv(const std::filesystem::path& path);

}  // namespace ngsi

#endif  // NGSI_EVAL_HPP_
