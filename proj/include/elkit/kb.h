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

#ifndef ELKIT_KB_H_
#define ELKIT_KB_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "elkit/ids.h"

namespace elkit {

// A knowledge-base item. Only entity-valued claims are modeled.
struct Entity {
  EntityId id;
  std::string title;        // wiki page title; empty if no page
  std::string description;  // first paragraph of the page
  std::vector<std::string> wikidata_aliases;
  std::map<PropertyId, std::vector<EntityId>> claims;

  // Claim targets for `property`, or an empty list.
  const std::vector<EntityId> &Values(PropertyId property) const;

  friend bool operator==(const Entity &, const Entity &) = default;
};

struct FilterStats {
  uint64_t parsed = 0;
  uint64_t malformed = 0;
  uint64_t duplicates = 0;
  uint64_t filtered_internal = 0;
  uint64_t no_wiki_page = 0;
  uint64_t kept = 0;
  uint64_t dangling_references = 0;

  friend bool operator==(const FilterStats &, const FilterStats &) = default;
};

struct ParsedKb {
  std::vector<Entity> entities;
  FilterStats stats;
};

// Parses one record line:
//   {"id":"Q5","title":"...","description":"...","aliases":[...],
//    "claims":{"P31":["Q1",...],...}}
// Only "id" is required. Returns nullopt for anything malformed. Duplicate
// claim targets are collapsed keeping first occurrence.
std::optional<Entity> ParseEntityLine(std::string_view line);

// Serializes with a fixed field order (id, title, description, aliases,
// claims by ascending property number). Always emits every field.
std::string SerializeEntity(const Entity &entity);

// Streams newline-delimited records. Malformed lines and repeated ids are
// skipped and counted; output keeps input order. Blank lines are ignored.
// Throws kIo if the stream fails for reasons other than end-of-file.
ParsedKb ParseKbLines(std::istream &in);

// QIDs of Wikimedia-internal administrative classes (disambiguation pages,
// templates, categories, modules, project pages and their listed
// subclasses). Sorted, deduplicated.
const std::set<EntityId> &DefaultFilterRoots();

struct InternalFilterResult {
  std::vector<Entity> kept;
  std::vector<EntityId> removed;
};

// Removes every entity whose P31/P279 targets, closed under P279, hit a
// root. Reachability is computed on the claim graph of the input list;
// targets missing from the list are leaves. P279 cycles are fine.
InternalFilterResult FilterWikimediaInternal(
    std::vector<Entity> entities, const std::set<EntityId> &filter_roots);

// Keeps entities that have a wiki page (non-empty title).
std::vector<Entity> RestrictToWiki(std::vector<Entity> entities);

// Immutable entity store partitioned into known and new ids.
class KbSnapshot {
 public:
  KbSnapshot() = default;

  // Builds from entities (ids must be unique) and the id set of the earlier
  // snapshot. `stats` is carried through; dangling references are counted
  // here.
  KbSnapshot(std::vector<Entity> entities, const std::set<EntityId> &known,
             FilterStats stats = {});

  const std::map<EntityId, Entity> &entities() const { return entities_; }
  const std::set<EntityId> &known_ids() const { return known_ids_; }
  const std::set<EntityId> &new_ids() const { return new_ids_; }
  const FilterStats &stats() const { return stats_; }

  size_t size() const { return entities_.size(); }
  bool empty() const { return entities_.empty(); }

  const Entity *Find(EntityId id) const;
  // Throws kNotFound.
  const Entity &Get(EntityId id) const;

  // Title to entity index over all entities with a page. If two entities
  // share a title the one with the smaller id wins.
  std::map<std::string, EntityId> TitleIndex() const;

 private:
  std::map<EntityId, Entity> entities_;
  std::set<EntityId> known_ids_;
  std::set<EntityId> new_ids_;
  FilterStats stats_;
};

KbSnapshot SplitKnownNew(std::vector<Entity> entities,
                         const std::set<EntityId> &known_ids,
                         FilterStats stats = {});

// parse -> filter internal -> restrict to wiki -> split.
KbSnapshot BuildSnapshot(std::istream &dump,
                         const std::set<EntityId> &known_ids,
                         const std::set<EntityId> &filter_roots);

// One QID per line; blank lines and '#' comments ignored. Throws kIo or
// kInvalidInput.
std::set<EntityId> ReadIdFile(const std::filesystem::path &path);

// Snapshot directory: entities.jsonl, known_ids.txt, new_ids.txt, stats.json.
void WriteSnapshot(const KbSnapshot &kb, const std::filesystem::path &dir);
KbSnapshot ReadSnapshot(const std::filesystem::path &dir);

}  // namespace elkit

#endif  // ELKIT_KB_H_
