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

#include <doctest.h>

#include <cmath>
#include <numeric>

#include "gradient_check.hpp"
#include "ngsi/guider.hpp"
#include "support.hpp"

using namespace ngsi;
using namespace ngsi::testing;

namespace {

const Grammar& G() { return builtin_grammar(); }

GuiderParams<double> zero_model(int embed, int hidden) {
  return GuiderParams<double>::zeros(static_cast<int>(G().token_count()),
                                     embed, hidden,
                                     static_cast<int>(G().rule_count()));
}

GuiderParams<double> random_model(int embed, int hidden, std::uint64_t seed) {
  return make_gradient_problem(seed, embed, hidden, 1)
      .params.template cast<double>();
}

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

// Scalar transcription of the cell with explicit index loops.
std::vector<double> scalar_cell(const std::vector<double>& x,
                                const std::vector<double>& h,
                                const GuiderParams<double>& p) {
  const int de = static_cast<int>(x.size());
  const int dh = static_cast<int>(h.size());
  auto affine = [&](const Matrix<double>& w, const Matrix<double>& u,
                    const Matrix<double>& b, const std::vector<double>& hin,
                    int j) {
    double s = b(0, j);
    for (int i = 0; i < de; ++i) s += x[i] * w(i, j);
    for (int i = 0; i < dh; ++i) s += hin[i] * u(i, j);
    return s;
  };
  std::vector<double> z(dh), r(dh), rh(dh), out(dh);
  for (int j = 0; j < dh; ++j) {
    z[j] = sigmoid(affine(p.w_z, p.u_z, p.b_z, h, j));
    r[j] = sigmoid(affine(p.w_r, p.u_r, p.b_r, h, j));
  }
  for (int j = 0; j < dh; ++j) rh[j] = r[j] * h[j];
  for (int j = 0; j < dh; ++j) {
    double c = std::tanh(affine(p.w_h, p.u_h, p.b_h, rh, j));
    out[j] = (1 - z[j]) * h[j] + z[j] * c;
  }
  return out;
}

}  // namespace

TEST_CASE("recurrent_cell zero-weight cases") {
  auto p = zero_model(3, 4);
  RowVector<double> x(3);
  x << 1.0, -2.0, 0.5;
  RowVector<double> h(4);
  h << 0.2, -0.4, 1.0, 3.0;
  RowVector<double> out = recurrent_cell<double>(x, h, p);
  for (int j = 0; j < 4; ++j) CHECK(out(j) == doctest::Approx(0.5 * h(j)));
  RowVector<double> zero = recurrent_cell<double>(
      x, RowVector<double>::Zero(4), p);
  CHECK(zero.isZero(0));
}

TEST_CASE("recurrent_cell matches a scalar evaluation") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto p = random_model(3, 2, seed);
    Rng rng = make_rng(seed, SeedStream::kGeneration, {5});
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<double> x{u(rng), u(rng), u(rng)};
    std::vector<double> h{u(rng), u(rng)};
    RowVector<double> xe = Eigen::Map<RowVector<double>>(x.data(), 3);
    RowVector<double> he = Eigen::Map<RowVector<double>>(h.data(), 2);
    RowVector<double> got = recurrent_cell<double>(xe, he, p);
    auto want = scalar_cell(x, h, p);
    for (int j = 0; j < 2; ++j) CHECK(got(j) == doctest::Approx(want[j]).epsilon(1e-12));
  }
}

TEST_CASE("recurrent_cell input errors") {
  auto p = zero_model(3, 2);
  RowVector<double> h = RowVector<double>::Zero(2);
  CHECK_THROWS_AS(recurrent_cell<double>(RowVector<double>::Zero(4), h, p),
                  std::invalid_argument);
  RowVector<double> x = RowVector<double>::Zero(3);
  x(1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(recurrent_cell<double>(x, h, p), std::domain_error);
  x(1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(recurrent_cell<double>(x, h, p), std::domain_error);
}

TEST_CASE("encode") {
  auto z = zero_model(4, 6);
  CHECK(encode<double>(toks("v0"), z).isZero(0));

  auto p = random_model(4, 6, 3);
  TokenSeq d = toks("v0 = 1 + v2 ;");
  TokenSeq perm = toks("v2 = 1 + v0 ;");
  CHECK((encode<double>(d, p) - encode<double>(perm, p)).norm() > 1e-6);
  CHECK(encode<double>(d, p) == encode<double>(d, p));

  // Folding the cell by hand gives the same state.
  RowVector<double> h = RowVector<double>::Zero(6);
  for (TokenId t : d) {
    RowVector<double> x = p.embedding.row(idx(t));
    h = recurrent_cell<double>(x, h, p);
  }
  CHECK(h == encode<double>(d, p));

  CHECK_THROWS_AS(encode<double>(TokenSeq{}, p), std::invalid_argument);
  TokenSeq bad{static_cast<TokenId>(G().token_count())};
  CHECK_THROWS_AS(encode<double>(bad, p), std::out_of_range);
}

TEST_CASE("predict_rule_distribution on a zero model") {
  auto z = zero_model(4, 4);
  auto dist = predict_rule_distribution<double>(toks("v0 = 1 ;"), nt("Stmt"), z);
  CHECK(dist[idx(rule("S1"))] == doctest::Approx(0.5));
  CHECK(dist[idx(rule("S2"))] == doctest::Approx(0.5));
  CHECK(std::accumulate(dist.begin(), dist.end(), 0.0) == doctest::Approx(1.0));
  for (std::size_t r = 0; r < dist.size(); ++r) {
    if (G().rules()[r].lhs != nt("Stmt")) CHECK(dist[r] == 0.0);
  }
}

TEST_CASE("masking on random models") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto p = random_model(4, 5, seed);
    auto pf = p.cast<float>();
    for (const Program& prog :
         sample_many(SampleBucket{4, 15, 1, 9}, 3, seed)) {
      for (std::size_t n = 0; n < G().nonterminal_count(); ++n) {
        const auto nt_n = static_cast<Nonterminal>(n);
        auto dist = predict_rule_distribution<float>(prog.tokens, nt_n, pf);
        double mass = 0;
        std::size_t best = 0;
        for (std::size_t r = 0; r < dist.size(); ++r) {
          if (G().rules()[r].lhs != nt_n) {
            CHECK(dist[r] == 0.0f);
          } else {
            CHECK(dist[r] > 0.0f);
            mass += dist[r];
          }
          if (dist[r] > dist[best]) best = r;
        }
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(G().rules()[best].lhs == nt_n);
      }
    }
  }
  auto var = predict_rule_distribution<double>(toks("v3"), nt("Var"),
                                               random_model(4, 4, 1));
  for (std::size_t r = 0; r < var.size(); ++r) {
    const std::string& label = G().rules()[r].label;
    CHECK((var[r] > 0) == (label.size() == 2 && label[0] == 'V'));
  }
}

TEST_CASE("loss on a zero model is the mean log of the choice counts") {
  auto z = zero_model(4, 4);
  std::vector<TrainingPair> batch{
      {toks("v0 = 1 ;"), nt("Stmt"), rule("S2")},
      {toks("1"), nt("Const"), rule("C2")},
      {toks("v0"), nt("Var"), rule("V1")},
      {toks("1 + 2"), nt("AExpr"), rule("E1")}};
  const double want =
      (std::log(2.0) + std::log(10.0) + std::log(5.0) + std::log(3.0)) / 4;
  CHECK(loss_and_gradients<double>(batch, z).loss ==
        doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("loss agrees with the per-example forward pass") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto prob = make_gradient_problem(seed, 5, 7, 9);
    auto p = prob.params.cast<double>();
    double want = 0;
    for (const TrainingPair& ex : prob.batch) {
      want -= std::log(
          predict_rule_distribution<double>(ex.input, ex.nt, p)[idx(ex.label)]);
    }
    want /= static_cast<double>(prob.batch.size());
    CHECK(loss_and_gradients<double>(prob.batch, p).loss ==
          doctest::Approx(want).epsilon(1e-12));
    CHECK(loss_and_gradients<float>(prob.batch, prob.params).loss ==
          doctest::Approx(want).epsilon(1e-5));
  }
}

TEST_CASE("duplicating the batch leaves the loss and gradients unchanged") {
  auto prob = make_gradient_problem(4, 4, 4, 5);
  auto p = prob.params.cast<double>();
  auto twice = prob.batch;
  twice.insert(twice.end(), prob.batch.begin(), prob.batch.end());
  auto a = loss_and_gradients<double>(prob.batch, p);
  auto b = loss_and_gradients<double>(twice, p);
  CHECK(a.loss == doctest::Approx(b.loss).epsilon(1e-12));
  auto at = a.gradients.tensors();
  auto bt = b.gradients.tensors();
  for (std::size_t k = 0; k < at.size(); ++k) {
    CHECK((*at[k].data - *bt[k].data).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("batch gradient is the mean of single-example gradients") {
  auto prob = make_gradient_problem(8, 3, 5, 7);
  auto p = prob.params.cast<double>();
  auto batch = loss_and_gradients<double>(prob.batch, p);
  auto sum = p.zeros_like();
  for (const TrainingPair& ex : prob.batch) {
    std::vector<TrainingPair> one{ex};
    auto g1 = loss_and_gradients<double>(one, p).gradients.tensors();
    auto st = sum.tensors();
    for (std::size_t k = 0; k < st.size(); ++k) *st[k].data += *g1[k].data;
  }
  auto bt = batch.gradients.tensors();
  auto st = sum.tensors();
  for (std::size_t k = 0; k < st.size(); ++k) {
    Matrix<double> mean = *st[k].data / static_cast<double>(prob.batch.size());
    CAPTURE(bt[k].name);
    CHECK((mean - *bt[k].data).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("gradient check against finite differences") {
  double worst_float = 0;
  double worst_double = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto prob = make_gradient_problem(seed, 4, 4, 3);
    worst_float = std::max(worst_float, max_relative_error<float>(prob));
    worst_double = std::max(worst_double, max_relative_error<double>(prob));
  }
  MESSAGE("max relative error float " << worst_float << " double "
                                      << worst_double);
  CHECK(worst_float < 1e-3);
  CHECK(worst_double < 1e-6);
}

TEST_CASE("loss_and_gradients preconditions") {
  auto p = random_model(4, 4, 0);
  CHECK_THROWS_AS(loss_and_gradients<double>({}, p), std::invalid_argument);
  std::vector<TrainingPair> wrong{{toks("v0"), nt("Var"), rule("C1")}};
  CHECK_THROWS_AS(loss_and_gradients<double>(wrong, p), std::invalid_argument);
  std::vector<TrainingPair> empty_input{{TokenSeq{}, nt("Var"), rule("V1")}};
  CHECK_THROWS_AS(loss_and_gradients<double>(empty_input, p),
                  std::invalid_argument);
}

TEST_CASE("initialization") {
  GuiderModel m = GuiderModel::initialize(G(), 8, 16, 5);
  const auto& p = m.params;
  CHECK(p.vocab_size() == static_cast<int>(G().token_count()));
  CHECK(p.embed_dim() == 8);
  CHECK(p.hidden_dim() == 16);
  CHECK(p.rule_count() == static_cast<int>(G().rule_count()));
  const float bound = 1.0f / 4.0f;
  const char* names[] = {"embedding", "gru.w_z", "gru.u_z", "gru.b_z",
                         "gru.w_r",   "gru.u_r", "gru.b_r", "gru.w_h",
                         "gru.u_h",   "gru.b_h", "classifier.weight",
                         "classifier.bias"};
  auto ts = p.tensors();
  std::size_t count = 0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    CHECK(ts[k].name == names[k]);
    count += static_cast<std::size_t>(ts[k].data->size());
    if (ts[k].rank == 1) {
      CHECK(ts[k].data->rows() == 1);
      CHECK(ts[k].data->isZero(0));
    } else {
      CHECK(ts[k].data->cwiseAbs().maxCoeff() <= bound);
      CHECK(ts[k].data->cwiseAbs().maxCoeff() > 0.5f * bound);
    }
  }
  CHECK(count == p.parameter_count());
  CHECK(p.all_finite());

  GuiderModel again = GuiderModel::initialize(G(), 8, 16, 5);
  GuiderModel other = GuiderModel::initialize(G(), 8, 16, 6);
  CHECK(again.params.embedding == p.embedding);
  CHECK(other.params.embedding != p.embedding);
  CHECK_NOTHROW(m.check_compatible(G()));
  m.grammar_fingerprint ^= 1;
  CHECK_THROWS_AS(m.check_compatible(G()), std::invalid_argument);
  CHECK_THROWS_AS(GuiderModel::initialize(G(), 0, 4, 1), std::invalid_argument);
}
