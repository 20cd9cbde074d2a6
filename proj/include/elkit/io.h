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

#ifndef ELKIT_IO_H_
#define ELKIT_IO_H_

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace elkit {

// File helpers that throw Error(kIo) instead of returning bad streams.
std::ifstream OpenInput(const std::filesystem::path &path);
std::ofstream OpenOutput(const std::filesystem::path &path);

std::string ReadFile(const std::filesystem::path &path);
void WriteFile(const std::filesystem::path &path, std::string_view contents);

// Splits on '\t'. Empty fields are preserved.
std::vector<std::string> SplitTabs(std::string_view line);

// Strips a trailing '\r' (CRLF input).
inline std::string_view StripCr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

}  // namespace elkit

#endif  // ELKIT_IO_H_
