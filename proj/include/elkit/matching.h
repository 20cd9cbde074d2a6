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

#ifndef ELKIT_MATCHING_H_
#define ELKIT_MATCHING_H_

#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "elkit/aho_corasick.h"
#include "elkit/alias_table.h"
#include "elkit/label.h"

namespace elkit {

struct Document {
  std::string doc_id;
  std::string text;
  std::string source;  // e.g. "news", "social"
};

// [start, end) in scalar values, with the covered text.
struct Span {
  size_t start = 0;
  size_t end = 0;
  std::string surface;

  size_t length() const { return end - start; }
  bool Overlaps(const Span &other) const {
    return start < other.end && other.start < end;
  }
  friend bool operator==(const Span &, const Span &) = default;
};

struct MentionCandidate {
  std::string doc_id;
  std::string source;
  Span span;
  // Context window; the mention starts at span.start - context_offset
  // scalars into it.
  std::string context;
  size_t context_offset = 0;
  std::vector<Candidate> candidates;
  std::optional<Label> gold;
};

// Compiled surface matcher. Immutable after construction.
class Matcher {
 public:
  // Throws kInvalidArgument for an empty surface.
  explicit Matcher(const std::set<std::string> &surfaces);

  // All occurrences of every surface, ordered by (start, end).
  std::vector<Span> FindAll(std::string_view text) const;
  std::vector<Span> FindAll(std::u32string_view text) const;

 private:
  std::vector<std::string> surfaces_;
  AhoCorasick automaton_;
};

Matcher CompileMatcher(const std::set<std::string> &surfaces);
Matcher CompileMatcher(const AliasTable &at);

// Greedy longest-first selection: spans are visited by (length desc, start
// asc, surface asc) and kept unless they overlap an already kept span.
// Output is ordered by start.
std::vector<Span> ResolveOverlaps(std::vector<Span> spans);

struct MatchConfig {
  size_t k = 10;
  double max_unlinked = 0.98;
  size_t min_len = 2;
  size_t context_window = 100;
};

// match -> resolve overlaps -> drop short spans -> drop surfaces with
// P(unlinked|m) > max_unlinked -> attach top-k candidates and context.
std::vector<MentionCandidate> GenerateMentions(const Document &doc,
                                               const AliasTable &at,
                                               const Matcher &matcher,
                                               const MatchConfig &config = {});

// JSONL records.
//   Document: {"doc_id":..,"text":..,"source":..}
//   MentionCandidate: {"doc_id":..,"source":..,"start":..,"end":..,
//     "surface":..,"context":..,"context_offset":..,
//     "candidates":[{"entity":"Q1","prior":0.5},..],"gold":"Q1"|"NIL_PER"}
// "gold" is omitted when absent.
std::optional<Document> ParseDocumentLine(std::string_view line);
std::string SerializeMention(const MentionCandidate &mention);
// Throws kInvalidInput with the reason.
MentionCandidate ParseMentionLine(std::string_view line);

std::vector<Document> ReadDocuments(const std::filesystem::path &path);
std::vector<MentionCandidate> ReadMentions(const std::filesystem::path &path);
void WriteMentions(std::span<const MentionCandidate> mentions,
                   const std::filesystem::path &path);

}  // namespace elkit

#endif  // ELKIT_MATCHING_H_
