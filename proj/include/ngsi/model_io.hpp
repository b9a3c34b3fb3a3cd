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

// Binary model files:
//   "NGSI1" | grammar fingerprint u64 | vocab fingerprint u64 |
//   tensor records until end of file, each
//     name length u32 | name bytes | rank u32 | dims u32 x rank |
//     row-major float32 values
// All integers and floats little-endian.

#ifndef NGSI_MODEL_IO_HPP_
#define NGSI_MODEL_IO_HPP_

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "ngsi/grammar.hpp"
#include "ngsi/guider.hpp"

namespace ngsi {

class ModelError : public std::runtime_error {
 public:
  enum class Kind { kIo, kFormat, kMismatch };
  ModelError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

inline constexpr char kModelMagic[] = "NGSI1";

void save_model(const GuiderModel& m, const std::filesystem::path& path);

// Refuses files whose fingerprints or tensor shapes do not match `g`.
GuiderModel load_model(const std::filesystem::path& path,
                       const Grammar& g = builtin_grammar());

struct TensorInfo {
  std::string name;
  std::vector<std::uint32_t> dims;
};
// Tensor names and shapes in file order, without grammar checks.
std::vector<TensorInfo> inspect_model(const std::filesystem::path& path);

}  // namespace ngsi

#endif  // NGSI_MODEL_IO_HPP_
