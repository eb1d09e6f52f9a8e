// Copyright 2026 The ASV Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Batch command-line front end.

#ifndef ASV_CLI_HPP_
#define ASV_CLI_HPP_

#include <iosfwd>
#include <string>
#include <vector>

#include "asv/config.hpp"

namespace asv {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

// args excludes the program name. Subcommands: simulate, evaluate,
// crossfit, learn, sensitivity, experiment, validate, run.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Executes an assembled configuration; throws asv::Error on failure.
void execute(const RunConfig& config, std::ostream& out);

}  // namespace asv

#endif  // ASV_CLI_HPP_
