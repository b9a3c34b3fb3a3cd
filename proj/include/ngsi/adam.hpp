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

// Adam with bias correction over any parameter set exposing tensors().

#ifndef NGSI_ADAM_HPP_
#define NGSI_ADAM_HPP_

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace ngsi {

struct AdamConfig {
  double alpha = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.9;
  double epsilon = 1e-8;
};

template <class Params>
struct AdamState {
  AdamConfig config;
  std::int64_t step = 0;
  Params first_moment;
  Params second_moment;
};

template <class Params>
AdamState<Params> make_adam_state(const Params& like,
                                  const AdamConfig& config = {}) {
  return {config, 0, like.zeros_like(), like.zeros_like()};
}

// Throws std::domain_error, leaving params and state untouched, when any
// gradient entry is not finite.
template <class Params>
void adam_step(AdamState<Params>& state, Params& params, const Params& grads) {
  auto g = grads.tensors();
  auto p = params.tensors();
  auto m = state.first_moment.tensors();
  auto v = state.second_moment.tensors();
  static_assert(g.size() == p.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g[i].data->size() != p[i].data->size() ||
        m[i].data->size() != p[i].data->size()) {
      throw std::invalid_argument("adam_step: shape mismatch");
    }
    if (!g[i].data->allFinite()) {
      throw std::domain_error("adam_step: non-finite gradient in " +
                              std::string(g[i].name));
    }
  }
  const AdamConfig& c = state.config;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correct1 = 1.0 - std::pow(c.beta1, t);
  const double correct2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < g.size(); ++i) {
    auto* gd = g[i].data->data();
    auto* pd = p[i].data->data();
    auto* md = m[i].data->data();
    auto* vd = v[i].data->data();
    using S = std::remove_reference_t<decltype(*pd)>;
    const auto n = p[i].data->size();
    for (decltype(p[i].data->size()) k = 0; k < n; ++k) {
      const double grad = gd[k];
      const double mk = c.beta1 * md[k] + (1.0 - c.beta1) * grad;
      const double vk = c.beta2 * vd[k] + (1.0 - c.beta2) * grad * grad;
      md[k] = static_cast<S>(mk);
      vd[k] = static_cast<S>(vk);
      const double update =
          c.alpha * (mk / correct1) / (std::sqrt(vk / correct2) + c.epsilon);
      pd[k] = static_cast<S>(pd[k] - update);
    }
  }
}

}  // namespace ngsi

#endif  // NGSI_ADAM_HPP_
