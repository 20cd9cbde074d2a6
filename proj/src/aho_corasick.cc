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

#include "elkit/aho_corasick.h"

#include <algorithm>
#include <deque>

#include "elkit/errors.h"

namespace elkit {

AhoCorasick::AhoCorasick(std::vector<std::u32string> patterns)
    : patterns_(std::move(patterns)) {
  nodes_.emplace_back();
  // Children per node, kept for the breadth-first failure pass.
  std::vector<std::vector<std::pair<char32_t, uint32_t>>> children(1);

  for (size_t p = 0; p < patterns_.size(); ++p) {
    const std::u32string &pattern = patterns_[p];
    if (pattern.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "empty pattern");
    }
    uint32_t node = 0;
    for (char32_t c : pattern) {
      int32_t next = Child(node, c);
      if (next < 0) {
        next = static_cast<int32_t>(nodes_.size());
        Node n;
        n.depth = nodes_[node].depth + 1;
        nodes_.push_back(n);
        children.emplace_back();
        edges_.emplace(Key(node, c), next);
        children[node].emplace_back(c, next);
      }
      node = static_cast<uint32_t>(next);
    }
    if (nodes_[node].output >= 0) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate pattern");
    }
    nodes_[node].output = static_cast<int32_t>(p);
  }

  std::deque<uint32_t> queue;
  for (auto [c, child] : children[0]) queue.push_back(child);
  while (!queue.empty()) {
    uint32_t node = queue.front();
    queue.pop_front();
    for (auto [c, child] : children[node]) {
      uint32_t f = nodes_[node].fail;
      int32_t target = Child(f, c);
      while (target < 0 && f != 0) {
        f = nodes_[f].fail;
        target = Child(f, c);
      }
      uint32_t fail = target >= 0 && static_cast<uint32_t>(target) != child
                          ? static_cast<uint32_t>(target)
                          : 0;
      nodes_[child].fail = fail;
      nodes_[child].dict_link = nodes_[fail].output >= 0
                                    ? static_cast<int32_t>(fail)
                                    : nodes_[fail].dict_link;
      queue.push_back(child);
    }
  }
}

int32_t AhoCorasick::Child(uint32_t node, char32_t c) const {
  auto it = edges_.find(Key(node, c));
  return it == edges_.end() ? -1 : static_cast<int32_t>(it->second);
}

std::vector<AhoCorasick::Match> AhoCorasick::FindAll(
    std::u32string_view text) const {
  std::vector<Match> matches;
  if (nodes_.size() <= 1) return matches;
  uint32_t node = 0;
  for (size_t i = 0; i < text.size(); ++i) {
    char32_t c = text[i];
    int32_t next = Child(node, c);
    while (next < 0 && node != 0) {
      node = nodes_[node].fail;
      next = Child(node, c);
    }
    node = next < 0 ? 0 : static_cast<uint32_t>(next);
    int32_t out = nodes_[node].output >= 0 ? static_cast<int32_t>(node)
                                           : nodes_[node].dict_link;
    while (out >= 0) {
      const Node &n = nodes_[out];
      matches.push_back(Match{i + 1 - n.depth, i + 1,
                              static_cast<uint32_t>(n.output)});
      out = n.dict_link;
    }
  }
  std::sort(matches.begin(), matches.end(), [](const Match &a, const Match &b) {
    return a.start != b.start ? a.start < b.start : a.end < b.end;
  });
  return matches;
}

}  // namespace elkit
