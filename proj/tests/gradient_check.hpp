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

// Finite-difference oracle for loss_and_gradients. The reference loss is
// recomputed one example at a time through predict_rule_distribution in
// long double, and differentiated with the fourth-order central stencil.

#ifndef NGSI_TESTS_GRADIENT_CHECK_HPP_
#define NGSI_TESTS_GRADIENT_CHECK_HPP_

#include <algorithm>
#include <cmath>
#include <vector>

#include "ngsi/guider.hpp"
#include "ngsi/sampler.hpp"

namespace ngsi::testing {

using Wide = long double;

inline Wide reference_loss(const std::vector<TrainingPair>& batch,
                           const GuiderParams<Wide>& p) {
  Wide total = 0;
  for (const TrainingPair& ex : batch) {
    total -= std::log(
        predict_rule_distribution<Wide>(ex.input, ex.nt, p)[idx(ex.label)]);
  }
  return total / static_cast<Wide>(batch.size());
}

// Random model with every entry (biases included) uniform in [-0.5, 0.5],
// and a batch of pairs cut from short sampled programs.
struct GradientProblem {
  GuiderParams<float> params;
  std::vector<TrainingPair> batch;
};

inline GradientProblem make_gradient_problem(std::uint64_t seed, int embed,
                                             int hidden, int batch_size) {
  const Grammar& g = builtin_grammar();
  Rng rng = make_rng(seed, SeedStream::kInit, {0x67726164});
  GradientProblem out;
  out.params = GuiderParams<float>::initialize(
      static_cast<int>(g.token_count()), embed, hidden,
      static_cast<int>(g.rule_count()), rng);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (auto& t : out.params.tensors()) {
    for (Eigen::Index i = 0; i < t.data->size(); ++i) {
      t.data->data()[i] = static_cast<float>(u(rng));
    }
  }
  while (static_cast<int>(out.batch.size()) < batch_size) {
    Program p = sample_program(SampleBucket{4, 12, 1, 9}, rng);
    auto pairs = extract_training_pairs(p.tree);
    std::uniform_int_distribution<std::size_t> pick(0, pairs.size() - 1);
    out.batch.push_back(pairs[pick(rng)]);
  }
  return out;
}

// Largest |analytic - numeric| / max(|analytic|, |numeric|) over all
// entries; entries where both vanish are skipped.
template <class S>
double max_relative_error(const GradientProblem& prob) {
  GuiderParams<S> p = prob.params.template cast<S>();
  auto analytic = loss_and_gradients<S>(prob.batch, p).gradients;
  GuiderParams<Wide> wide = prob.params.template cast<Wide>();
  auto at = analytic.tensors();
  auto wt = wide.tensors();
  const Wide h = 1e-3L;
  double worst = 0;
  for (std::size_t k = 0; k < wt.size(); ++k) {
    for (Eigen::Index i = 0; i < wt[k].data->size(); ++i) {
      Wide& x = wt[k].data->data()[i];
      const Wide x0 = x;
      auto at_offset = [&](Wide delta) {
        x = x0 + delta;
        Wide v = reference_loss(prob.batch, wide);
        x = x0;
        return v;
      };
      const Wide f1 = at_offset(h);
      const Wide m1 = at_offset(-h);
      const Wide f2 = at_offset(2 * h);
      const Wide m2 = at_offset(-2 * h);
      const double numeric =
          static_cast<double>((8 * (f1 - m1) - (f2 - m2)) / (12 * h));
      const double a = static_cast<double>(at[k].data->data()[i]);
      const double den = std::max(std::abs(a), std::abs(numeric));
      if (den == 0) continue;
      worst = std::max(worst, std::abs(a - numeric) / den);
    }
  }
  return worst;
}

}  // namespace ngsi::testing

#endif  // NGSI_TESTS_GRADIENT_CHECK_HPP_
