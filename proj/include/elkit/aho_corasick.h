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

#ifndef ELKIT_AHO_CORASICK_H_
#define ELKIT_AHO_CORASICK_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace elkit {

// Multi-pattern exact matcher over Unicode scalar values. Patterns are
// matched as raw scalar sequences; no tokenization or normalization.
class AhoCorasick {
 public:
  struct Match {
    size_t start;
    size_t end;      // exclusive
    uint32_t pattern;  // index into patterns()

    friend bool operator==(const Match &, const Match &) = default;
  };

  AhoCorasick() = default;

  // Patterns must be non-empty and distinct; throws kInvalidArgument.
  explicit AhoCorasick(std::vector<std::u32string> patterns);

  const std::vector<std::u32string> &patterns() const { return patterns_; }

  // Every occurrence of every pattern, ordered by (start, end). Runs in
  // O(|text| + #matches) after construction.
  std::vector<Match> FindAll(std::u32string_view text) const;

 private:
  static uint64_t Key(uint32_t node, char32_t c) {
    return (static_cast<uint64_t>(node) << 21) | static_cast<uint64_t>(c);
  }
  int32_t Child(uint32_t node, char32_t c) const;

  struct Node {
    uint32_t fail = 0;
    int32_t output = -1;       // pattern ending exactly here
    int32_t dict_link = -1;    // nearest fail-chain node with an output
    uint32_t depth = 0;
  };

  std::vector<std::u32string> patterns_;
  std::vector<Node> nodes_;
  std::unordered_map<uint64_t, uint32_t> edges_;
};

}  // namespace elkit

#endif  // ELKIT_AHO_CORASICK_H_
