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

#ifndef NGSI_TOOLS_CLI_HPP_
#define NGSI_TOOLS_CLI_HPP_

#include <iosfwd>
#include <string>
#include <vector>

namespace ngsi::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

// Runs one command line; `args` excludes the program name. Data goes to
// `out`, diagnostics to `err`, and `in` feeds infer/search/parse.
int run(const std::vector<std::string>& args, std::istream& in,
        std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

}  // namespace ngsi::cli

#endif  // NGSI_TOOLS_CLI_HPP_
