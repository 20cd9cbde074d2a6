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

#ifndef ELKIT_ALIAS_TABLE_H_
#define ELKIT_ALIAS_TABLE_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "elkit/ids.h"

namespace elkit {

// Internal link in a page. Offsets are scalar-value indices into text.
struct Anchor {
  size_t start = 0;
  size_t end = 0;
  std::string target_title;
};

struct WikiPage {
  std::string title;
  EntityId entity;
  std::string text;
  std::vector<Anchor> anchors;
};

// JSONL record:
//   {"title":"..","entity":"Q1","text":"..",
//    "anchors":[{"start":0,"end":2,"target":".."}]}
// Returns nullopt if malformed, including anchors that are out of range,
// empty or overlapping.
std::optional<WikiPage> ParseWikiPageLine(std::string_view line);
std::string SerializeWikiPage(const WikiPage &page);

struct PageReadResult {
  std::vector<WikiPage> pages;
  uint64_t malformed = 0;
};
PageReadResult ReadWikiPages(const std::filesystem::path &path);

// redirects.tsv: source \t target.
std::map<std::string, std::string> ReadRedirects(
    const std::filesystem::path &path);

struct Candidate {
  EntityId entity;
  double prior = 0.0;

  friend bool operator==(const Candidate &, const Candidate &) = default;
};

struct AliasEntry {
  EntityId entity;
  uint64_t count = 0;
  double prior = 0.0;

  friend bool operator==(const AliasEntry &, const AliasEntry &) = default;
};

struct UnlinkedStats {
  uint64_t linked = 0;
  uint64_t unlinked = 0;

  // unlinked / (unlinked + linked); 0 when both are 0.
  double PUnlinked() const {
    uint64_t total = linked + unlinked;
    return total == 0 ? 0.0
                      : static_cast<double>(unlinked) /
                            static_cast<double>(total);
  }

  friend bool operator==(const UnlinkedStats &, const UnlinkedStats &) =
      default;
};

template <typename T>
using SurfaceMap = std::map<std::string, T, std::less<>>;

// Accumulated link counts: surface -> entity -> count.
using AliasCounts = std::map<std::string, std::map<EntityId, uint64_t>>;

// Surface -> candidates with link-count priors P(e|m). Candidate lists are
// sorted by prior descending, ties by ascending entity id. Immutable.
class AliasTable {
 public:
  AliasTable() = default;

  // Surfaces must be non-empty; zero counts are dropped.
  explicit AliasTable(const AliasCounts &counts,
                      SurfaceMap<UnlinkedStats> unlinked = {});

  size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const SurfaceMap<std::vector<AliasEntry>> &entries() const {
    return entries_;
  }
  const SurfaceMap<UnlinkedStats> &unlinked() const { return unlinked_; }

  bool Contains(std::string_view surface) const;

  // Candidate entries for a surface, or an empty span.
  std::span<const AliasEntry> Lookup(std::string_view surface) const;

  // First min(k, n) candidates. Unknown surface gives an empty list.
  // Throws kInvalidArgument for k == 0.
  std::vector<Candidate> TopK(std::string_view surface, size_t k) const;

  UnlinkedStats Unlinked(std::string_view surface) const;
  double PUnlinked(std::string_view surface) const {
    return Unlinked(surface).PUnlinked();
  }

  AliasCounts Counts() const;

 private:
  SurfaceMap<std::vector<AliasEntry>> entries_;
  SurfaceMap<UnlinkedStats> unlinked_;
};

struct AliasBuildStats {
  uint64_t pages = 0;
  uint64_t redirects = 0;
  uint64_t anchors = 0;
  uint64_t unresolved = 0;   // redirect or anchor target not found
  uint64_t cycles = 0;       // redirect loop or chain deeper than the cap
  uint64_t bad_surface = 0;  // empty or containing tab/newline
};

inline constexpr int kMaxRedirectDepth = 16;

// Resolves a title through redirects to an entity. Follows at most
// kMaxRedirectDepth redirect hops. Returns nullopt for unknown titles,
// loops and overly long chains; `cycle` reports which of those happened.
std::optional<EntityId> ResolveTitle(
    const std::string &title,
    const std::map<std::string, std::string> &redirects,
    const std::map<std::string, EntityId> &title_index, bool *cycle = nullptr);

// Counts one link per page title, redirect source and anchor occurrence,
// then normalizes to priors.
AliasTable BuildAliasTable(std::span<const WikiPage> pages,
                           const std::map<std::string, std::string> &redirects,
                           const std::map<std::string, EntityId> &title_index,
                           AliasBuildStats *stats = nullptr);

// Fills linked/unlinked occurrence statistics for every surface of `at`.
// linked = anchors whose text is exactly the surface; unlinked = leftmost,
// non-overlapping occurrences of the surface in page text that lie wholly
// outside anchors. Summed over pages.
AliasTable CountUnlinked(const AliasTable &at, std::span<const WikiPage> pages);

struct ExtraAlias {
  std::string surface;
  EntityId entity;
  uint64_t count = 0;
};

// Sums counts per (surface, entity), recomputes priors, keeps base
// unlinked statistics.
AliasTable Merge(const AliasTable &base, std::span<const ExtraAlias> extra);

// alias_table.tsv: surface \t entity \t count \t prior (6 decimals).
void WriteAliasTable(const AliasTable &at, const std::filesystem::path &path);
// unlinked.tsv: surface \t linked \t unlinked.
void WriteUnlinked(const AliasTable &at, const std::filesystem::path &path);

// Priors are recomputed from counts. `unlinked_path` may be empty.
AliasTable ReadAliasTable(const std::filesystem::path &alias_path,
                          const std::filesystem::path &unlinked_path = {});

// surface \t entity \t count.
std::vector<ExtraAlias> ReadExtraAliases(const std::filesystem::path &path);

}  // namespace elkit

#endif  // ELKIT_ALIAS_TABLE_H_
