// Copyright 2026 The PMA-URL Authors.
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


#ifndef PMA_TOOLS_CLI_CLI_H_
#define PMA_TOOLS_CLI_CLI_H_

#include <ostream>

namespace pma::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumeric = 3;

// Parses and runs one command. Reports go to files under --out-dir (default
// "."); `out` receives the primary result and `err` progress and errors.
int Run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pma::cli

#endif  // PMA_TOOLS_CLI_CLI_H_
