// Copyright 2026 The elkit Authors.
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

#ifndef ELKIT_CLI_H_
#define ELKIT_CLI_H_

#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace elkit {

// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;  // usage or validation error
inline constexpr int kExitIo = 2;

// Runs one subcommand. `args` excludes the program name. Data goes to
// `out` (or to files), diagnostics to `err`.
int RunCli(const std::vector<std::string> &args, std::ostream &out,
           std::ostream &err);

// Parses `key = value` lines; '#' starts a comment, blank lines are
// ignored, surrounding quotes are stripped. Throws kInvalidInput on a line
// without '='.
std::vector<std::pair<std::string, std::string>> ParseConfigText(
    std::string_view text);

// Appends `--key=value` for every config entry whose flag is not already on
// the command line. Underscores in keys map to dashes.
std::vector<std::string> ApplyConfig(
    std::vector<std::string> args,
    const std::vector<std::pair<std::string, std::string>> &config);

}  // namespace elkit

#endif  // ELKIT_CLI_H_
