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

// The neural rule selector: token embedding, GRU encoder and a linear
// classifier over all rules, with logits masked to the rules of the
// requested nonterminal. Templated on the scalar type so gradient checks
// can run in double precision; models are stored and trained in float.

#ifndef NGSI_GUIDER_HPP_
#define NGSI_GUIDER_HPP_

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "ngsi/grammar.hpp"
#include "ngsi/random.hpp"
#include "ngsi/sampler.hpp"

namespace ngsi {

template <class S>
using Matrix = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class S>
using RowVector = Eigen::Matrix<S, 1, Eigen::Dynamic>;

inline constexpr int kDefaultEmbedDim = 64;
inline constexpr int kDefaultHiddenDim = 256;

template <class T>
struct TensorRef {
  std::string_view name;
  T* data;
  int rank;  // 1 for biases (stored as 1 x n), 2 otherwise
};

template <class S>
struct GuiderParams {
  Matrix<S> embedding;  // vocab x d_emb
  // GRU gates: update (z), reset (r) and candidate (h).
  Matrix<S> w_z, w_r, w_h;  // d_emb x d_h
  Matrix<S> u_z, u_r, u_h;  // d_h x d_h
  Matrix<S> b_z, b_r, b_h;  // 1 x d_h
  Matrix<S> classifier_w;   // d_h x rules
  Matrix<S> classifier_b;   // 1 x rules

  static constexpr std::size_t kTensorCount = 12;

  int vocab_size() const { return static_cast<int>(embedding.rows()); }
  int embed_dim() const { return static_cast<int>(embedding.cols()); }
  int hidden_dim() const { return static_cast<int>(u_z.rows()); }
  int rule_count() const { return static_cast<int>(classifier_w.cols()); }

  static GuiderParams zeros(int vocab, int embed_dim, int hidden_dim,
                            int rules) {
    GuiderParams p;
    p.embedding = Matrix<S>::Zero(vocab, embed_dim);
    for (Matrix<S>* w : {&p.w_z, &p.w_r, &p.w_h}) {
      *w = Matrix<S>::Zero(embed_dim, hidden_dim);
    }
    for (Matrix<S>* u : {&p.u_z, &p.u_r, &p.u_h}) {
      *u = Matrix<S>::Zero(hidden_dim, hidden_dim);
    }
    for (Matrix<S>* b : {&p.b_z, &p.b_r, &p.b_h}) {
      *b = Matrix<S>::Zero(1, hidden_dim);
    }
    p.classifier_w = Matrix<S>::Zero(hidden_dim, rules);
    p.classifier_b = Matrix<S>::Zero(1, rules);
    return p;
  }

  // Matrices uniform in [-1/sqrt(d_h), 1/sqrt(d_h)], biases zero.
  static GuiderParams initialize(int vocab, int embed_dim, int hidden_dim,
                                 int rules, Rng& rng) {
    GuiderParams p = zeros(vocab, embed_dim, hidden_dim, rules);
    const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (auto& t : p.tensors()) {
      if (t.rank == 1) continue;
      for (Eigen::Index i = 0; i < t.data->size(); ++i) {
        t.data->data()[i] = static_cast<S>(u(rng));
      }
    }
    return p;
  }

  GuiderParams zeros_like() const {
    return zeros(vocab_size(), embed_dim(), hidden_dim(), rule_count());
  }

  std::array<TensorRef<Matrix<S>>, kTensorCount> tensors() {
    return visit<Matrix<S>>(*this);
  }
  std::array<TensorRef<const Matrix<S>>, kTensorCount> tensors() const {
    return visit<const Matrix<S>>(*this);
  }

  template <class T>
  GuiderParams<T> cast() const {
    GuiderParams<T> out;
    auto dst = out.tensors();
    auto src = tensors();
    for (std::size_t i = 0; i < kTensorCount; ++i) {
      *dst[i].data = src[i].data->template cast<T>();
    }
    return out;
  }

  bool all_finite() const {
    for (const auto& t : tensors()) {
      if (!t.data->allFinite()) return false;
    }
    return true;
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& t : tensors()) n += static_cast<std::size_t>(t.data->size());
    return n;
  }

 private:
  template <class T, class Self>
  static std::array<TensorRef<T>, kTensorCount> visit(Self& p) {
    return {{{"embedding", &p.embedding, 2},
             {"gru.w_z", &p.w_z, 2},
             {"gru.u_z", &p.u_z, 2},
             {"gru.b_z", &p.b_z, 1},
             {"gru.w_r", &p.w_r, 2},
             {"gru.u_r", &p.u_r, 2},
             {"gru.b_r", &p.b_r, 1},
             {"gru.w_h", &p.w_h, 2},
             {"gru.u_h", &p.u_h, 2},
             {"gru.b_h", &p.b_h, 1},
             {"classifier.weight", &p.classifier_w, 2},
             {"classifier.bias", &p.classifier_b, 1}}};
  }
};

namespace detail {

template <class Derived>
auto sigmoid(const Eigen::ArrayBase<Derived>& a) {
  using S = typename Derived::Scalar;
  return (S(1) + (-a).exp()).inverse();
}

inline void check_tokens(TokenSpan d, int vocab) {
  if (d.empty()) throw std::invalid_argument("empty token sequence");
  for (TokenId t : d) {
    if (static_cast<int>(idx(t)) >= vocab) {
      throw std::out_of_range("token id " + std::to_string(idx(t)) +
                              " outside the model vocabulary");
    }
  }
}

// Softmax over `applicable` entries of `logits`; every other entry is 0.
template <class S>
std::vector<S> masked_softmax(const RowVector<S>& logits,
                              std::span<const RuleId> applicable) {
  if (applicable.empty()) {
    throw std::invalid_argument("nonterminal has no rules to choose from");
  }
  std::vector<S> out(static_cast<std::size_t>(logits.size()), S(0));
  S top = -std::numeric_limits<S>::infinity();
  for (RuleId r : applicable) top = std::max(top, logits(idx(r)));
  S total = 0;
  for (RuleId r : applicable) {
    out[idx(r)] = std::exp(logits(idx(r)) - top);
    total += out[idx(r)];
  }
  for (RuleId r : applicable) out[idx(r)] /= total;
  return out;
}

}  // namespace detail

// One GRU step:
//   z = sigmoid(x W_z + h U_z + b_z)
//   r = sigmoid(x W_r + h U_r + b_r)
//   c = tanh(x W_h + (r * h) U_h + b_h)
//   h' = (1 - z) * h + z * c
template <class S>
RowVector<S> recurrent_cell(const RowVector<S>& x, const RowVector<S>& h,
                            const GuiderParams<S>& p) {
  if (x.size() != p.embed_dim() || h.size() != p.hidden_dim()) {
    throw std::invalid_argument("recurrent_cell: dimension mismatch");
  }
  if (!x.allFinite() || !h.allFinite()) {
    throw std::domain_error("recurrent_cell: non-finite input");
  }
  RowVector<S> z =
      detail::sigmoid((x * p.w_z + h * p.u_z + p.b_z).array()).matrix();
  RowVector<S> r =
      detail::sigmoid((x * p.w_r + h * p.u_r + p.b_r).array()).matrix();
  RowVector<S> rh = r.cwiseProduct(h);
  RowVector<S> c = (x * p.w_h + rh * p.u_h + p.b_h).array().tanh().matrix();
  return h + z.cwiseProduct(c - h);
}

// Final hidden state after folding the cell over the embedded tokens,
// starting from h = 0.
template <class S>
RowVector<S> encode(TokenSpan d, const GuiderParams<S>& p) {
  detail::check_tokens(d, p.vocab_size());
  RowVector<S> h = RowVector<S>::Zero(p.hidden_dim());
  for (TokenId t : d) {
    RowVector<S> x = p.embedding.row(idx(t));
    h = recurrent_cell<S>(x, h, p);
  }
  return h;
}

template <class S>
RowVector<S> rule_logits(const RowVector<S>& hidden, const GuiderParams<S>& p) {
  return hidden * p.classifier_w + p.classifier_b;
}

// Probability over all rule ids; rules whose lhs differs from `nt` get
// exactly 0.
template <class S>
std::vector<S> predict_rule_distribution(TokenSpan d, Nonterminal nt,
                                         const GuiderParams<S>& p,
                                         const Grammar& g = builtin_grammar()) {
  if (p.rule_count() != static_cast<int>(g.rule_count())) {
    throw std::invalid_argument("model rule count differs from the grammar");
  }
  return detail::masked_softmax<S>(rule_logits<S>(encode<S>(d, p), p),
                                   g.rules_for(nt));
}

template <class S>
struct LossAndGradients {
  S loss = 0;
  GuiderParams<S> gradients;
};

// Mean masked cross-entropy of the batch labels and its exact gradient.
// Sequences are processed together, sorted by length so that the rows
// still running at step t are a prefix of the batch.
template <class S>
LossAndGradients<S> loss_and_gradients(std::span<const TrainingPair> batch,
                                       const GuiderParams<S>& p,
                                       const Grammar& g = builtin_grammar()) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  if (p.rule_count() != static_cast<int>(g.rule_count())) {
    throw std::invalid_argument("model rule count differs from the grammar");
  }
  for (const TrainingPair& ex : batch) {
    detail::check_tokens(ex.input, p.vocab_size());
    if (g.rule(ex.label).lhs != ex.nt) {
      throw std::invalid_argument("label " + g.rule(ex.label).label +
                                  " does not expand " +
                                  g.nonterminal_name(ex.nt));
    }
  }

  const int rows = static_cast<int>(batch.size());
  const int hidden = p.hidden_dim();
  std::vector<int> order(rows);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return batch[a].input.size() > batch[b].input.size();
  });
  const int steps = static_cast<int>(batch[order[0]].input.size());
  std::vector<int> active(steps, 0);
  for (int i = 0; i < rows; ++i) {
    for (int t = 0; t < static_cast<int>(batch[order[i]].input.size()); ++t) {
      ++active[t];
    }
  }
  auto token_at = [&](int row, int t) {
    return static_cast<Eigen::Index>(idx(batch[order[row]].input[t]));
  };

  // Input projections of the whole vocabulary; x_t W becomes a row gather.
  const Matrix<S> proj_z = p.embedding * p.w_z;
  const Matrix<S> proj_r = p.embedding * p.w_r;
  const Matrix<S> proj_h = p.embedding * p.w_h;

  Matrix<S> state = Matrix<S>::Zero(rows, hidden);
  std::vector<Matrix<S>> h_prev(steps), zs(steps), rs(steps), cs(steps);
  for (int t = 0; t < steps; ++t) {
    const int n = active[t];
    Matrix<S> hp = state.topRows(n);
    Matrix<S> az(n, hidden), ar(n, hidden), ah(n, hidden);
    for (int i = 0; i < n; ++i) {
      const auto tok = token_at(i, t);
      az.row(i) = proj_z.row(tok);
      ar.row(i) = proj_r.row(tok);
      ah.row(i) = proj_h.row(tok);
    }
    az.noalias() += hp * p.u_z;
    az.rowwise() += p.b_z.row(0);
    ar.noalias() += hp * p.u_r;
    ar.rowwise() += p.b_r.row(0);
    Matrix<S> z = detail::sigmoid(az.array()).matrix();
    Matrix<S> r = detail::sigmoid(ar.array()).matrix();
    Matrix<S> rh = r.cwiseProduct(hp);
    ah.noalias() += rh * p.u_h;
    ah.rowwise() += p.b_h.row(0);
    Matrix<S> c = ah.array().tanh().matrix();
    state.topRows(n) = hp + z.cwiseProduct(c - hp);
    h_prev[t] = std::move(hp);
    zs[t] = std::move(z);
    rs[t] = std::move(r);
    cs[t] = std::move(c);
  }

  LossAndGradients<S> out{S(0), p.zeros_like()};
  GuiderParams<S>& grad = out.gradients;

  Matrix<S> logits = state * p.classifier_w;
  logits.rowwise() += p.classifier_b.row(0);
  Matrix<S> dlogits = Matrix<S>::Zero(rows, p.rule_count());
  double total_loss = 0.0;
  for (int i = 0; i < rows; ++i) {
    const TrainingPair& ex = batch[order[i]];
    RowVector<S> row = logits.row(i);
    std::vector<S> prob = detail::masked_softmax<S>(row, g.rules_for(ex.nt));
    total_loss -= std::log(static_cast<double>(prob[idx(ex.label)]));
    for (RuleId r : g.rules_for(ex.nt)) {
      S target = r == ex.label ? S(1) : S(0);
      dlogits(i, idx(r)) = (prob[idx(r)] - target) / S(rows);
    }
  }
  out.loss = static_cast<S>(total_loss / rows);

  grad.classifier_w.noalias() = state.transpose() * dlogits;
  grad.classifier_b = dlogits.colwise().sum();
  Matrix<S> dstate = dlogits * p.classifier_w.transpose();

  Matrix<S> dproj_z = Matrix<S>::Zero(p.vocab_size(), hidden);
  Matrix<S> dproj_r = Matrix<S>::Zero(p.vocab_size(), hidden);
  Matrix<S> dproj_h = Matrix<S>::Zero(p.vocab_size(), hidden);
  for (int t = steps - 1; t >= 0; --t) {
    const int n = active[t];
    const Matrix<S>& hp = h_prev[t];
    const Matrix<S>& z = zs[t];
    const Matrix<S>& r = rs[t];
    const Matrix<S>& c = cs[t];
    Matrix<S> dh = dstate.topRows(n);

    Matrix<S> dz = dh.cwiseProduct(c - hp);
    Matrix<S> dc = dh.cwiseProduct(z);
    Matrix<S> dhp = dh - dh.cwiseProduct(z);

    Matrix<S> dah =
        (dc.array() * (S(1) - c.array().square())).matrix();
    Matrix<S> rh = r.cwiseProduct(hp);
    grad.u_h.noalias() += rh.transpose() * dah;
    Matrix<S> drh = dah * p.u_h.transpose();
    Matrix<S> dr = drh.cwiseProduct(hp);
    dhp += drh.cwiseProduct(r);

    Matrix<S> dar = (dr.array() * r.array() * (S(1) - r.array())).matrix();
    grad.u_r.noalias() += hp.transpose() * dar;
    dhp.noalias() += dar * p.u_r.transpose();

    Matrix<S> daz = (dz.array() * z.array() * (S(1) - z.array())).matrix();
    grad.u_z.noalias() += hp.transpose() * daz;
    dhp.noalias() += daz * p.u_z.transpose();

    grad.b_z += daz.colwise().sum();
    grad.b_r += dar.colwise().sum();
    grad.b_h += dah.colwise().sum();
    for (int i = 0; i < n; ++i) {
      const auto tok = token_at(i, t);
      dproj_z.row(tok) += daz.row(i);
      dproj_r.row(tok) += dar.row(i);
      dproj_h.row(tok) += dah.row(i);
    }
    dstate.topRows(n) = dhp;
  }

  grad.w_z.noalias() = p.embedding.transpose() * dproj_z;
  grad.w_r.noalias() = p.embedding.transpose() * dproj_r;
  grad.w_h.noalias() = p.embedding.transpose() * dproj_h;
  grad.embedding.noalias() = dproj_z * p.w_z.transpose();
  grad.embedding.noalias() += dproj_r * p.w_r.transpose();
  grad.embedding.noalias() += dproj_h * p.w_h.transpose();
  return out;
}

// A float model bound to the grammar it was trained for.
struct GuiderModel {
  GuiderParams<float> params;
  std::uint64_t grammar_fingerprint = 0;
  std::uint64_t vocab_fingerprint = 0;

  static GuiderModel initialize(const Grammar& g, int embed_dim,
                                int hidden_dim, std::uint64_t seed);
  // Throws std::invalid_argument if the fingerprints or shapes disagree
  // with `g`.
  void check_compatible(const Grammar& g) const;
};

}  // namespace ngsi

#endif  // NGSI_GUIDER_HPP_
