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

#include "ngsi/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>

namespace ngsi {
namespace {

struct PairPool {
  std::vector<std::vector<TrainingPair>> by_nt;
  std::vector<std::size_t> nonempty;

  PairPool(std::vector<TrainingPair> pairs, std::size_t nonterminals)
      : by_nt(nonterminals) {
    for (auto& p : pairs) by_nt[idx(p.nt)].push_back(std::move(p));
    for (std::size_t i = 0; i < by_nt.size(); ++i) {
      if (!by_nt[i].empty()) nonempty.push_back(i);
    }
  }

  std::vector<TrainingPair> batch(int size, Rng& rng) const {
    std::uniform_int_distribution<std::size_t> pick_nt(0, nonempty.size() - 1);
    std::vector<TrainingPair> out;
    out.reserve(static_cast<std::size_t>(size));
    for (int i = 0; i < size; ++i) {
      const auto& group = by_nt[nonempty[pick_nt(rng)]];
      std::uniform_int_distribution<std::size_t> pick(0, group.size() - 1);
      out.push_back(group[pick(rng)]);
    }
    return out;
  }
};

}  // namespace

void TrainConfig::validate() const {
  if (iterations_per_stage < 0 || batch_size < 1 || embed_dim < 1 ||
      hidden_dim < 1 || programs_per_stage < 1 || heldout_programs < 1 ||
      eval_every < 1) {
    throw std::invalid_argument("invalid training configuration");
  }
}

std::vector<TrainingPair> draw_pairs(const SampleBucket& bucket, int count,
                                     std::uint64_t seed, SeedStream stream,
                                     std::uint64_t tag) {
  std::vector<TrainingPair> out;
  for (int i = 0; i < count; ++i) {
    Rng rng = make_rng(seed, stream, {tag, static_cast<std::uint64_t>(i)});
    Program p = sample_program(bucket, rng);
    auto pairs = extract_training_pairs(p.tree);
    out.insert(out.end(), std::make_move_iterator(pairs.begin()),
               std::make_move_iterator(pairs.end()));
  }
  return out;
}

double step_accuracy(const NeuralGuider& guider,
                     std::span<const TrainingPair> pairs) {
  if (pairs.empty()) return 0.0;
  // Identical (tokens, nonterminal) queries share one evaluation.
  std::map<std::pair<std::size_t, TokenSeq>, std::pair<RuleId, std::size_t>>
      unique;
  for (const TrainingPair& p : pairs) {
    auto [it, fresh] = unique.try_emplace({idx(p.nt), p.input}, p.label, 0);
    ++it->second.second;
  }
  std::size_t correct = 0;
  for (const auto& [key, value] : unique) {
    auto nt = static_cast<Nonterminal>(key.first);
    auto dist = guider.distribution(key.second, nt);
    std::size_t best = idx(builtin_grammar().rules_for(nt).front());
    for (RuleId r : builtin_grammar().rules_for(nt)) {
      if (dist[idx(r)] > dist[best]) best = idx(r);
    }
    if (best == idx(value.first)) correct += value.second;
  }
  return static_cast<double>(correct) / static_cast<double>(pairs.size());
}

TrainResult train(const std::vector<SampleBucket>& schedule,
                  const TrainConfig& cfg,
                  const std::function<void(const TrainLogRow&)>& on_log) {
  cfg.validate();
  const Grammar& g = builtin_grammar();
  TrainResult result;
  result.model =
      GuiderModel::initialize(g, cfg.embed_dim, cfg.hidden_dim, cfg.seed);
  if (cfg.iterations_per_stage == 0) return result;

  auto& params = result.model.params;
  auto adam = make_adam_state(params, cfg.adam);

  for (std::size_t s = 0; s < schedule.size(); ++s) {
    const SampleBucket& bucket = schedule[s];
    const int stage = static_cast<int>(s);
    PairPool pool(draw_pairs(bucket, cfg.programs_per_stage, cfg.seed,
                             SeedStream::kTraining, s),
                  g.nonterminal_count());
    const auto heldout = draw_pairs(bucket, cfg.heldout_programs, cfg.seed,
                                    SeedStream::kHeldOut, s);
    Rng batch_rng = make_rng(cfg.seed, SeedStream::kTraining, {s, 0xba7c4ULL});

    double loss_sum = 0.0;
    int loss_count = 0;
    for (int it = 1; it <= cfg.iterations_per_stage; ++it) {
      auto batch = pool.batch(cfg.batch_size, batch_rng);
      auto lg = loss_and_gradients<float>(batch, params, g);
      if (!std::isfinite(lg.loss)) {
        throw TrainingError(stage, "loss diverged at iteration " +
                                       std::to_string(it));
      }
      try {
        adam_step(adam, params, lg.gradients);
      } catch (const std::domain_error& e) {
        throw TrainingError(stage, e.what());
      }
      loss_sum += lg.loss;
      ++loss_count;

      if (it % cfg.eval_every == 0 || it == cfg.iterations_per_stage) {
        NeuralGuider guider(result.model, g);
        TrainLogRow row{stage, it, loss_sum / loss_count,
                        step_accuracy(guider, heldout)};
        result.log.push_back(row);
        if (on_log) on_log(row);
        loss_sum = 0.0;
        loss_count = 0;
        if (row.heldout_step_acc >= cfg.early_stop_accuracy) break;
      }
    }
  }
  return result;
}

void write_training_log(const std::vector<TrainLogRow>& log, std::ostream& out) {
  out << "stage,iteration,loss,heldout_step_acc\n";
  char buf[128];
  for (const auto& r : log) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.6f,%.6f\n", r.stage, r.iteration,
                  r.loss, r.heldout_step_acc);
    out << buf;
  }
}

}  // namespace ngsi
