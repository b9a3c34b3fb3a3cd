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

// Curriculum training of the guider with minibatch Adam.

#ifndef NGSI_TRAINER_HPP_
#define NGSI_TRAINER_HPP_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ngsi/adam.hpp"
#include "ngsi/guider.hpp"
#include "ngsi/inference.hpp"
#include "ngsi/sampler.hpp"

namespace ngsi {

struct TrainConfig {
  std::uint64_t seed = 1;
  int iterations_per_stage = 2000;
  int batch_size = 64;
  int embed_dim = kDefaultEmbedDim;
  int hidden_dim = kDefaultHiddenDim;
  AdamConfig adam;
  int programs_per_stage = 4000;
  int heldout_programs = 300;
  int eval_every = 250;
  // A stage ends early once held-out step accuracy reaches this value.
  double early_stop_accuracy = 0.995;

  void validate() const;
};

struct TrainLogRow {
  int stage = 0;
  int iteration = 0;  // within the stage, 1-based
  double loss = 0.0;  // mean minibatch loss since the previous row
  double heldout_step_acc = 0.0;
};

struct TrainResult {
  GuiderModel model;
  std::vector<TrainLogRow> log;
};

class TrainingError : public std::runtime_error {
 public:
  TrainingError(int stage, const std::string& what)
      : std::runtime_error("stage " + std::to_string(stage) + ": " + what),
        stage_(stage) {}
  int stage() const { return stage_; }

 private:
  int stage_;
};

// Runs the schedule in order. For every stage a pool of programs is drawn
// from the stage bucket; minibatches pick a nonterminal uniformly and then a
// pair of that nonterminal uniformly. Deterministic for a fixed config.
TrainResult train(const std::vector<SampleBucket>& schedule,
                  const TrainConfig& cfg,
                  const std::function<void(const TrainLogRow&)>& on_log = {});

// Fraction of pairs whose argmax rule equals the label.
double step_accuracy(const NeuralGuider& guider,
                     std::span<const TrainingPair> pairs);

// Pairs of `count` programs drawn from `bucket` on the given seed stream.
std::vector<TrainingPair> draw_pairs(const SampleBucket& bucket, int count,
                                     std::uint64_t seed, SeedStream stream,
                                     std::uint64_t tag);

void write_training_log(const std::vector<TrainLogRow>& log, std::ostream& out);

}  // namespace ngsi

#endif  // NGSI_TRAINER_HPP_
