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

#include "ngsi/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>

namespace ngsi {
namespace {

static_assert(std::numeric_limits<float>::is_iec559);

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>(v >> (8 * i)));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>(v >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(std::string bytes) : bytes_(std::move(bytes)) {}

  bool done() const { return pos_ == bytes_.size(); }

  std::string bytes(std::size_t n) {
    need(n);
    std::string out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  std::uint32_t u32() { return static_cast<std::uint32_t>(unsigned_le(4)); }
  std::uint64_t u64() { return unsigned_le(8); }
  float f32() { return std::bit_cast<float>(u32()); }

 private:
  std::uint64_t unsigned_le(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) {
      v |= static_cast<std::uint64_t>(
               static_cast<unsigned char>(bytes_[pos_ + i]))
           << (8 * i);
    }
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) {
      throw ModelError(ModelError::Kind::kFormat,
                       "model file truncated at byte " + std::to_string(pos_));
    }
  }

  std::string bytes_;
  std::size_t pos_ = 0;
};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ModelError(ModelError::Kind::kIo,
                     "cannot open model file " + path.string());
  }
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct RawTensor {
  std::vector<std::uint32_t> dims;
  std::vector<float> values;
};

struct RawModel {
  std::uint64_t grammar_fingerprint = 0;
  std::uint64_t vocab_fingerprint = 0;
  std::vector<std::pair<std::string, RawTensor>> tensors;
};

RawModel parse(std::string bytes, bool with_values) {
  Reader r(std::move(bytes));
  const std::size_t magic_len = std::strlen(kModelMagic);
  if (r.bytes(magic_len) != kModelMagic) {
    throw ModelError(ModelError::Kind::kFormat, "bad model header magic");
  }
  RawModel m;
  m.grammar_fingerprint = r.u64();
  m.vocab_fingerprint = r.u64();
  while (!r.done()) {
    std::uint32_t name_len = r.u32();
    if (name_len == 0 || name_len > 256) {
      throw ModelError(ModelError::Kind::kFormat, "bad tensor name length");
    }
    std::string name = r.bytes(name_len);
    RawTensor t;
    std::uint32_t rank = r.u32();
    if (rank < 1 || rank > 2) {
      throw ModelError(ModelError::Kind::kFormat,
                       "tensor " + name + " has unsupported rank");
    }
    std::uint64_t count = 1;
    for (std::uint32_t i = 0; i < rank; ++i) {
      t.dims.push_back(r.u32());
      count *= t.dims.back();
    }
    if (count > (std::uint64_t{1} << 28)) {
      throw ModelError(ModelError::Kind::kFormat, "tensor " + name + " too large");
    }
    if (with_values) {
      t.values.resize(count);
      for (auto& v : t.values) v = r.f32();
    } else {
      r.bytes(count * 4);
    }
    m.tensors.emplace_back(std::move(name), std::move(t));
  }
  return m;
}

}  // namespace

void save_model(const GuiderModel& m, const std::filesystem::path& path) {
  if (!m.params.all_finite()) {
    throw std::invalid_argument("refusing to save a model with non-finite weights");
  }
  std::string out(kModelMagic);
  put_u64(out, m.grammar_fingerprint);
  put_u64(out, m.vocab_fingerprint);
  for (const auto& t : m.params.tensors()) {
    put_u32(out, static_cast<std::uint32_t>(t.name.size()));
    out.append(t.name);
    put_u32(out, static_cast<std::uint32_t>(t.rank));
    if (t.rank == 2) put_u32(out, static_cast<std::uint32_t>(t.data->rows()));
    put_u32(out, static_cast<std::uint32_t>(t.data->cols()));
    const float* v = t.data->data();
    for (Eigen::Index i = 0; i < t.data->size(); ++i) {
      put_u32(out, std::bit_cast<std::uint32_t>(v[i]));
    }
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f || !f.write(out.data(), static_cast<std::streamsize>(out.size()))) {
    throw ModelError(ModelError::Kind::kIo,
                     "cannot write model file " + path.string());
  }
}

GuiderModel load_model(const std::filesystem::path& path, const Grammar& g) {
  RawModel raw = parse(read_file(path), true);
  if (raw.grammar_fingerprint != g.grammar_fingerprint() ||
      raw.vocab_fingerprint != g.vocab_fingerprint()) {
    throw ModelError(ModelError::Kind::kMismatch,
                     "model/grammar mismatch: " + path.string() +
                         " was trained for a different rule table or vocabulary");
  }
  std::map<std::string, RawTensor*> by_name;
  for (auto& [name, t] : raw.tensors) {
    if (!by_name.emplace(name, &t).second) {
      throw ModelError(ModelError::Kind::kFormat, "duplicate tensor " + name);
    }
  }

  GuiderModel m;
  m.grammar_fingerprint = raw.grammar_fingerprint;
  m.vocab_fingerprint = raw.vocab_fingerprint;
  for (auto& t : m.params.tensors()) {
    auto it = by_name.find(std::string(t.name));
    if (it == by_name.end()) {
      throw ModelError(ModelError::Kind::kFormat,
                       "model file lacks tensor " + std::string(t.name));
    }
    const RawTensor& src = *it->second;
    if (static_cast<int>(src.dims.size()) != t.rank) {
      throw ModelError(ModelError::Kind::kFormat,
                       "tensor " + std::string(t.name) + " has the wrong rank");
    }
    const Eigen::Index rows = t.rank == 2 ? src.dims[0] : 1;
    const Eigen::Index cols = src.dims.back();
    t.data->resize(rows, cols);
    std::copy(src.values.begin(), src.values.end(), t.data->data());
    by_name.erase(it);
  }
  if (!by_name.empty()) {
    throw ModelError(ModelError::Kind::kFormat,
                     "unexpected tensor " + by_name.begin()->first);
  }

  const auto& p = m.params;
  const int e = p.embed_dim();
  const int h = p.hidden_dim();
  auto shape_ok = [](const Matrix<float>& x, Eigen::Index r, Eigen::Index c) {
    return x.rows() == r && x.cols() == c;
  };
  bool ok = shape_ok(p.u_z, h, h) && shape_ok(p.u_r, h, h) &&
            shape_ok(p.u_h, h, h) && shape_ok(p.w_z, e, h) &&
            shape_ok(p.w_r, e, h) && shape_ok(p.w_h, e, h) &&
            shape_ok(p.b_z, 1, h) && shape_ok(p.b_r, 1, h) &&
            shape_ok(p.b_h, 1, h) &&
            shape_ok(p.classifier_w, h, p.rule_count()) &&
            shape_ok(p.classifier_b, 1, p.rule_count());
  if (!ok) {
    throw ModelError(ModelError::Kind::kFormat, "inconsistent tensor shapes");
  }
  if (p.vocab_size() != static_cast<int>(g.token_count()) ||
      p.rule_count() != static_cast<int>(g.rule_count())) {
    throw ModelError(ModelError::Kind::kMismatch,
                     "model/grammar mismatch: vocabulary or rule count differs");
  }
  if (!p.all_finite()) {
    throw ModelError(ModelError::Kind::kFormat, "model has non-finite weights");
  }
  return m;
}

std::vector<TensorInfo> inspect_model(const std::filesystem::path& path) {
  RawModel raw = parse(read_file(path), false);
  std::vector<TensorInfo> out;
  for (auto& [name, t] : raw.tensors) out.push_back({name, t.dims});
  return out;
}

}  // namespace ngsi
