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

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "elkit/errors.h"
#include "elkit/io.h"
#include "elkit/kb.h"
#include "elkit/random.h"
#include "support/temp_dir.h"

namespace elkit {
namespace {

Entity Make(uint64_t id, std::string title,
            std::map<PropertyId, std::vector<EntityId>> claims = {}) {
  Entity e;
  e.id = EntityId(id);
  e.title = std::move(title);
  e.claims = std::move(claims);
  return e;
}

std::vector<EntityId> Ids(const std::vector<Entity> &entities) {
  std::vector<EntityId> out;
  for (const Entity &e : entities) out.push_back(e.id);
  return out;
}

TEST(ParseKbTest, MapsFieldsDirectly) {
  auto e = ParseEntityLine(
      R"({"id":"Q5","title":"人类","claims":{"P279":["Q215627"]}})");
  ASSERT_TRUE(e.has_value());
  EXPECT_EQ(e->id, EntityId(5));
  EXPECT_EQ(e->title, "人类");
  EXPECT_EQ(e->description, "");
  EXPECT_EQ(e->Values(kSubclassOf), std::vector<EntityId>{EntityId(215627)});
  EXPECT_TRUE(e->Values(kInstanceOf).empty());
}

TEST(ParseKbTest, SkipsMalformedLines) {
  std::istringstream in("not-json\n");
  ParsedKb kb = ParseKbLines(in);
  EXPECT_TRUE(kb.entities.empty());
  EXPECT_EQ(kb.stats.malformed, 1u);
  EXPECT_EQ(kb.stats.parsed, 0u);
}

TEST(ParseKbTest, EmptyStreamGivesZeroStats) {
  std::istringstream in("");
  ParsedKb kb = ParseKbLines(in);
  EXPECT_TRUE(kb.entities.empty());
  EXPECT_EQ(kb.stats, FilterStats{});
}

TEST(ParseKbTest, RejectsBadShapes) {
  for (const char *line :
       {R"({"title":"x"})", R"({"id":"P5"})", R"({"id":5})", R"([1,2])",
        R"({"id":"Q1","claims":{"P31":"Q5"}})",
        R"({"id":"Q1","claims":{"X31":["Q5"]}})",
        R"({"id":"Q1","claims":{"P31":["Q5x"]}})",
        R"({"id":"Q1","aliases":[3]})"}) {
    EXPECT_FALSE(ParseEntityLine(line).has_value()) << line;
  }
}

TEST(ParseKbTest, DuplicateIdsKeepFirst) {
  std::istringstream in(
      "{\"id\":\"Q1\",\"title\":\"a\"}\n\n"
      "{\"id\":\"Q2\",\"title\":\"b\"}\n"
      "{\"id\":\"Q1\",\"title\":\"c\"}\r\n");
  ParsedKb kb = ParseKbLines(in);
  ASSERT_EQ(kb.entities.size(), 2u);
  EXPECT_EQ(kb.entities[0].title, "a");
  EXPECT_EQ(kb.entities[1].id, EntityId(2));
  EXPECT_EQ(kb.stats.duplicates, 1u);
  EXPECT_EQ(kb.stats.parsed, 2u);
}

TEST(ParseKbTest, CollapsesDuplicateClaimTargets) {
  auto e = ParseEntityLine(R"({"id":"Q1","claims":{"P31":["Q5","Q6","Q5"]}})");
  ASSERT_TRUE(e.has_value());
  EXPECT_EQ(e->Values(kInstanceOf),
            (std::vector<EntityId>{EntityId(5), EntityId(6)}));
}

TEST(ParseKbTest, SerializeRoundTrips) {
  Entity e = Make(9, "标题", {{kSubclassOf, {EntityId(3)}},
                              {kInstanceOf, {EntityId(5), EntityId(2)}}});
  e.description = "desc \"quoted\"";
  e.wikidata_aliases = {"x", "y"};
  std::string line = SerializeEntity(e);
  auto back = ParseEntityLine(line);
  ASSERT_TRUE(back.has_value());
  EXPECT_EQ(*back, e);
  EXPECT_EQ(SerializeEntity(*back), line);
  // Properties are emitted in ascending numeric order.
  EXPECT_LT(line.find("\"P31\""), line.find("\"P279\""));
}

TEST(FilterTest, RemovesDisambiguationInstances) {
  std::vector<Entity> es = {Make(1, "a", {{kInstanceOf, {EntityId(4167410)}}}),
                            Make(2, "b", {{kInstanceOf, {EntityId(5)}}})};
  auto r = FilterWikimediaInternal(es, DefaultFilterRoots());
  EXPECT_EQ(Ids(r.kept), std::vector<EntityId>{EntityId(2)});
  EXPECT_EQ(r.removed, std::vector<EntityId>{EntityId(1)});
}

TEST(FilterTest, RemovesTemplateSubclasses) {
  std::vector<Entity> es = {
      Make(1, "a", {{kSubclassOf, {EntityId(11266439)}}}),
      Make(2, "b", {{kInstanceOf, {EntityId(1)}}})};
  auto r = FilterWikimediaInternal(es, DefaultFilterRoots());
  EXPECT_TRUE(r.kept.empty());
  EXPECT_EQ(r.removed.size(), 2u);
}

TEST(FilterTest, KeepsEntitiesOffTheRoots) {
  std::vector<Entity> es = {Make(5, "human", {{kSubclassOf, {EntityId(215627)}}}),
                            Make(42, "x", {{kInstanceOf, {EntityId(5)}}})};
  auto r = FilterWikimediaInternal(es, DefaultFilterRoots());
  EXPECT_EQ(r.kept.size(), 2u);
  EXPECT_TRUE(r.removed.empty());
}

TEST(FilterTest, DefaultRootsContainListedClasses) {
  const auto &roots = DefaultFilterRoots();
  for (uint64_t q : {4167410u, 11266439u, 4167836u, 15184295u, 14204246u,
                     97011660u}) {
    EXPECT_TRUE(roots.count(EntityId(q))) << q;
  }
}

TEST(FilterTest, TerminatesOnCycles) {
  std::vector<Entity> es = {
      Make(1, "a", {{kSubclassOf, {EntityId(2)}}}),
      Make(2, "b", {{kSubclassOf, {EntityId(1)}}}),
      Make(3, "c", {{kInstanceOf, {EntityId(1)}}}),
      Make(4, "d", {{kSubclassOf, {EntityId(4)}}, {kInstanceOf, {EntityId(2)}}})};
  auto r = FilterWikimediaInternal(es, {EntityId(2)});
  // Entity 2 reaches itself through entity 1.
  EXPECT_EQ(r.kept.size(), 0u);
  auto none = FilterWikimediaInternal(es, {EntityId(99)});
  EXPECT_EQ(none.kept.size(), 4u);
}

// Brute-force reachability: repeated relational join until fixpoint.
std::set<EntityId> OracleRemoved(const std::vector<Entity> &es,
                                 const std::set<EntityId> &roots) {
  std::map<EntityId, std::set<EntityId>> reach;
  std::map<EntityId, std::vector<EntityId>> p279;
  for (const Entity &e : es) {
    for (PropertyId p : {kInstanceOf, kSubclassOf}) {
      for (EntityId v : e.Values(p)) reach[e.id].insert(v);
    }
    p279[e.id] = e.Values(kSubclassOf);
  }
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto &[id, set] : reach) {
      std::set<EntityId> add;
      for (EntityId v : set) {
        auto it = p279.find(v);
        if (it == p279.end()) continue;
        for (EntityId w : it->second) {
          if (!set.count(w)) add.insert(w);
        }
      }
      if (!add.empty()) {
        set.insert(add.begin(), add.end());
        changed = true;
      }
    }
  }
  std::set<EntityId> removed;
  for (const auto &[id, set] : reach) {
    for (EntityId r : roots) {
      if (set.count(r)) {
        removed.insert(id);
        break;
      }
    }
  }
  return removed;
}

std::vector<Entity> RandomGraph(SplitMix64 &rng, size_t nodes) {
  std::vector<Entity> es;
  for (size_t i = 0; i < nodes; ++i) {
    Entity e = Make(i + 1, "t");
    size_t edges = rng.Uniform(4);
    for (size_t k = 0; k < edges; ++k) {
      PropertyId p = rng.Bernoulli(0.5) ? kInstanceOf : kSubclassOf;
      // Targets may dangle past the node range.
      EntityId v(rng.Uniform(nodes + 5) + 1);
      auto &vals = e.claims[p];
      if (std::find(vals.begin(), vals.end(), v) == vals.end()) {
        vals.push_back(v);
      }
    }
    es.push_back(std::move(e));
  }
  return es;
}

TEST(FilterPropertyTest, MatchesBruteForceOracle) {
  SplitMix64 rng(123);
  for (int trial = 0; trial < 100; ++trial) {
    size_t n = 1 + rng.Uniform(60);
    auto es = RandomGraph(rng, n);
    std::set<EntityId> roots;
    for (int k = 0; k < 3; ++k) roots.insert(EntityId(rng.Uniform(n + 5) + 1));
    auto r = FilterWikimediaInternal(es, roots);
    std::set<EntityId> removed(r.removed.begin(), r.removed.end());
    ASSERT_EQ(removed, OracleRemoved(es, roots)) << "trial " << trial;
    ASSERT_EQ(r.kept.size() + r.removed.size(), es.size());
  }
}

TEST(FilterPropertyTest, AddingRootsIsMonotone) {
  SplitMix64 rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    size_t n = 2 + rng.Uniform(40);
    auto es = RandomGraph(rng, n);
    std::set<EntityId> roots = {EntityId(rng.Uniform(n) + 1)};
    auto before = FilterWikimediaInternal(es, roots);
    roots.insert(EntityId(rng.Uniform(n) + 1));
    auto after = FilterWikimediaInternal(es, roots);
    std::vector<EntityId> before_ids = Ids(before.kept);
    std::set<EntityId> kept_before(before_ids.begin(), before_ids.end());
    for (EntityId id : Ids(after.kept)) EXPECT_TRUE(kept_before.count(id));
  }
}

TEST(RestrictToWikiTest, KeepsTitledEntities) {
  EXPECT_EQ(Ids(RestrictToWiki({Make(1, "北京"), Make(2, "")})),
            std::vector<EntityId>{EntityId(1)});
  EXPECT_EQ(RestrictToWiki({Make(1, "a"), Make(2, "b")}).size(), 2u);
  EXPECT_TRUE(RestrictToWiki({Make(1, ""), Make(2, "")}).empty());
}

TEST(SplitKnownNewTest, PartitionsIds) {
  KbSnapshot kb = SplitKnownNew({Make(1, "a"), Make(2, "b")}, {EntityId(1)});
  EXPECT_EQ(kb.known_ids(), std::set<EntityId>{EntityId(1)});
  EXPECT_EQ(kb.new_ids(), std::set<EntityId>{EntityId(2)});

  KbSnapshot all_new = SplitKnownNew({Make(1, "a"), Make(2, "b")}, {});
  EXPECT_TRUE(all_new.known_ids().empty());
  EXPECT_EQ(all_new.new_ids().size(), 2u);

  KbSnapshot none_new = SplitKnownNew({Make(1, "a"), Make(2, "b")},
                                      {EntityId(1), EntityId(2), EntityId(3)});
  EXPECT_TRUE(none_new.new_ids().empty());
  EXPECT_EQ(none_new.known_ids().size(), 2u);
}

TEST(KbSnapshotTest, LookupsAndDanglingCount) {
  KbSnapshot kb = SplitKnownNew(
      {Make(1, "a", {{kInstanceOf, {EntityId(2), EntityId(99)}}}),
       Make(2, "b")},
      {});
  EXPECT_EQ(kb.stats().dangling_references, 1u);
  EXPECT_EQ(kb.Get(EntityId(2)).title, "b");
  EXPECT_EQ(kb.Find(EntityId(3)), nullptr);
  try {
    kb.Get(EntityId(3));
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotFound);
  }
}

TEST(KbSnapshotTest, TitleIndexPrefersSmallerId) {
  KbSnapshot kb = SplitKnownNew({Make(7, "same"), Make(3, "same"), Make(4, "")},
                                {});
  auto index = kb.TitleIndex();
  EXPECT_EQ(index.size(), 1u);
  EXPECT_EQ(index.at("same"), EntityId(3));
}

TEST(BuildSnapshotTest, RunsFullPipeline) {
  std::istringstream dump(
      "{\"id\":\"Q1\",\"title\":\"a\",\"claims\":{\"P31\":[\"Q5\"]}}\n"
      "{\"id\":\"Q2\",\"title\":\"dis\",\"claims\":{\"P31\":[\"Q4167410\"]}}\n"
      "{\"id\":\"Q3\"}\n"
      "garbage\n"
      "{\"id\":\"Q4\",\"title\":\"d\"}\n");
  KbSnapshot kb = BuildSnapshot(dump, {EntityId(1)}, DefaultFilterRoots());
  EXPECT_EQ(kb.size(), 2u);
  EXPECT_EQ(kb.stats().parsed, 4u);
  EXPECT_EQ(kb.stats().malformed, 1u);
  EXPECT_EQ(kb.stats().filtered_internal, 1u);
  EXPECT_EQ(kb.stats().no_wiki_page, 1u);
  EXPECT_EQ(kb.stats().kept, 2u);
  EXPECT_EQ(kb.known_ids(), std::set<EntityId>{EntityId(1)});
  EXPECT_EQ(kb.new_ids(), std::set<EntityId>{EntityId(4)});
}

TEST(SnapshotIoTest, WriteReadRoundTrips) {
  testing::TempDir dir;
  Entity a = Make(1, "a", {{kInstanceOf, {EntityId(2)}}});
  a.description = "first paragraph";
  a.wikidata_aliases = {"alias"};
  FilterStats stats;
  stats.parsed = 5;
  stats.malformed = 1;
  KbSnapshot kb = SplitKnownNew({a, Make(2, "b")}, {EntityId(2)}, stats);
  WriteSnapshot(kb, dir.path());
  for (const char *f :
       {"entities.jsonl", "known_ids.txt", "new_ids.txt", "stats.json"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  }
  KbSnapshot back = ReadSnapshot(dir.path());
  EXPECT_EQ(back.entities(), kb.entities());
  EXPECT_EQ(back.known_ids(), kb.known_ids());
  EXPECT_EQ(back.new_ids(), kb.new_ids());
  EXPECT_EQ(back.stats(), kb.stats());
}

TEST(SnapshotIoTest, MissingDirectoryIsIoError) {
  testing::TempDir dir;
  try {
    ReadSnapshot(dir / "nope");
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
  }
}

TEST(ReadIdFileTest, SkipsCommentsAndBlanks) {
  testing::TempDir dir;
  WriteFile(dir / "ids.txt", "# known\nQ1\n\nQ20\r\n");
  EXPECT_EQ(ReadIdFile(dir / "ids.txt"),
            (std::set<EntityId>{EntityId(1), EntityId(20)}));
  WriteFile(dir / "bad.txt", "Q1\nhello\n");
  try {
    ReadIdFile(dir / "bad.txt");
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidInput);
  }
}

}  // namespace
}  // namespace elkit
