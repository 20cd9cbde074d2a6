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
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "elkit/errors.h"
#include "elkit/io.h"
#include "elkit/kb.h"
#include "elkit/random.h"
#include "elkit/sampling.h"
#include "elkit/typing.h"
#include "support/temp_dir.h"

namespace elkit {
namespace {

EntityId Q(uint64_t n) { return EntityId(n); }

MentionCandidate Mention(std::string doc, size_t start, std::string surface,
                         size_t candidates) {
  MentionCandidate m;
  m.doc_id = std::move(doc);
  m.source = "news";
  m.span = Span{start, start + 1, surface};
  m.context = surface;
  m.context_offset = start;
  for (size_t c = 0; c < candidates; ++c) {
    m.candidates.push_back({Q(c + 1), 1.0 / static_cast<double>(candidates)});
  }
  return m;
}

// Surfaces a (1 candidate), b (2), c (3), two examples each.
std::vector<MentionCandidate> AbcPool() {
  std::vector<MentionCandidate> pool;
  size_t cands = 1;
  for (const char *s : {"a", "b", "c"}) {
    pool.push_back(Mention("d2", 0, s, cands));
    pool.push_back(Mention("d1", 5, s, cands));
    ++cands;
  }
  return pool;
}

TEST(SampleFsTest, OneUniformPlusOneAmbiguous) {
  auto pool = AbcPool();
  std::map<std::string, int> uniform_hits;
  for (uint64_t seed = 0; seed < 600; ++seed) {
    FsSample s = SampleFs(pool, 2, seed);
    ASSERT_EQ(s.tasks.size(), 2u);
    EXPECT_EQ(s.uniform_shortfall, 0u);
    EXPECT_EQ(s.ambiguous_shortfall, 0u);
    const std::string &first = s.tasks[0].mention.span.surface;
    const std::string &second = s.tasks[1].mention.span.surface;
    EXPECT_EQ(s.tasks[0].criterion, SamplingCriterion::kUniform);
    EXPECT_EQ(s.tasks[1].criterion, SamplingCriterion::kAmbiguous);
    EXPECT_NE(first, second);
    EXPECT_TRUE(second == "b" || second == "c");
    ++uniform_hits[first];
  }
  for (const char *s : {"a", "b", "c"}) {
    EXPECT_GT(uniform_hits[s], 150) << s;
  }
}

// Recomputes the documented draw sequence with the raw generator.
std::vector<std::string> OracleFs(const std::vector<MentionCandidate> &pool,
                                  size_t n, uint64_t seed) {
  std::map<std::string, std::vector<MentionCandidate>> groups;
  for (const auto &m : pool) groups[m.span.surface].push_back(m);
  for (auto &[s, list] : groups) {
    std::sort(list.begin(), list.end(), [](const auto &x, const auto &y) {
      return std::tie(x.doc_id, x.span.start) < std::tie(y.doc_id, y.span.start);
    });
  }
  SplitMix64 rng(seed);
  std::vector<std::string> all;
  for (const auto &[s, list] : groups) all.push_back(s);
  size_t half = n / 2;
  std::vector<std::string> first;
  for (size_t i = 0; i < std::min(half, all.size()); ++i) {
    size_t j = i + rng.Uniform(all.size() - i);
    std::swap(all[i], all[j]);
    first.push_back(all[i]);
  }
  std::vector<std::string> eligible;
  for (const auto &[s, list] : groups) {
    if (std::find(first.begin(), first.end(), s) == first.end() &&
        list[0].candidates.size() >= 2) {
      eligible.push_back(s);
    }
  }
  std::vector<std::string> second;
  for (size_t i = 0; i < std::min(half, eligible.size()); ++i) {
    size_t j = i + rng.Uniform(eligible.size() - i);
    std::swap(eligible[i], eligible[j]);
    second.push_back(eligible[i]);
  }
  std::vector<std::string> out;
  for (const auto *chosen : {&first, &second}) {
    for (const std::string &s : *chosen) {
      const auto &list = groups.at(s);
      const auto &m = list[rng.Uniform(list.size())];
      out.push_back(m.span.surface + "@" + m.doc_id);
    }
  }
  return out;
}

TEST(SampleFsTest, MatchesDrawSequenceOracle) {
  auto pool = AbcPool();
  for (uint64_t seed = 0; seed < 50; ++seed) {
    FsSample s = SampleFs(pool, 2, seed);
    std::vector<std::string> got;
    for (const auto &t : s.tasks) {
      got.push_back(t.mention.span.surface + "@" + t.mention.doc_id);
    }
    EXPECT_EQ(got, OracleFs(pool, 2, seed)) << "seed " << seed;
  }
}

TEST(SampleFsTest, ZeroGivesEmpty) {
  EXPECT_TRUE(SampleFs(AbcPool(), 0, 1).tasks.empty());
  EXPECT_TRUE(SampleFs({}, 4, 1).tasks.empty());
}

TEST(SampleFsTest, UnambiguousPoolReportsShortfall) {
  std::vector<MentionCandidate> pool = {Mention("d", 0, "x", 1),
                                        Mention("d", 1, "y", 1),
                                        Mention("d", 2, "z", 1)};
  FsSample s = SampleFs(pool, 4, 7);
  EXPECT_EQ(s.tasks.size(), 2u);
  EXPECT_EQ(s.uniform_shortfall, 0u);
  EXPECT_EQ(s.ambiguous_shortfall, 2u);
}

TEST(SampleFsTest, OddSizeIsInvalid) {
  EXPECT_THROW(SampleFs(AbcPool(), 3, 1), Error);
}

TEST(SampleFsTest, IndependentOfPoolOrder) {
  auto pool = AbcPool();
  auto reversed = pool;
  std::reverse(reversed.begin(), reversed.end());
  for (uint64_t seed = 0; seed < 20; ++seed) {
    FsSample a = SampleFs(pool, 2, seed);
    FsSample b = SampleFs(reversed, 2, seed);
    ASSERT_EQ(a.tasks.size(), b.tasks.size());
    for (size_t i = 0; i < a.tasks.size(); ++i) {
      EXPECT_EQ(SerializeTask(a.tasks[i]), SerializeTask(b.tasks[i]));
    }
  }
}

TEST(SampleFsTest, CardsAlignWithCandidates) {
  Entity e;
  e.id = Q(1);
  e.title = "标题";
  e.description = "描述";
  KbSnapshot kb = SplitKnownNew({e}, {});
  FsSample s = SampleFs(AbcPool(), 2, 3, &kb);
  for (const auto &task : s.tasks) {
    ASSERT_EQ(task.cards.size(), task.mention.candidates.size());
    for (size_t i = 0; i < task.cards.size(); ++i) {
      EXPECT_EQ(task.cards[i].entity, task.mention.candidates[i].entity);
      EXPECT_EQ(task.cards[i].prior, task.mention.candidates[i].prior);
    }
    EXPECT_EQ(task.cards[0].title, "标题");
  }
}

TEST(FsFilterAt1Test, DiscardsTopPriorGolds) {
  auto m1 = Mention("d", 0, "a", 3);
  m1.gold = Label::Entity(Q(1));
  auto m2 = Mention("d", 1, "a", 3);
  m2.gold = Label::Entity(Q(2));
  auto m3 = Mention("d", 2, "a", 3);
  m3.gold = Label::Nil(CoarseType::kPer);
  auto m4 = Mention("d", 3, "a", 0);
  m4.gold = Label::Entity(Q(1));
  auto kept = FsFilterAt1(std::vector<MentionCandidate>{m1, m2, m3, m4});
  ASSERT_EQ(kept.size(), 3u);
  EXPECT_EQ(kept[0].span.start, 1u);
  EXPECT_EQ(kept[1].span.start, 2u);
  EXPECT_EQ(kept[2].span.start, 3u);
  for (const auto &m : kept) {
    if (!m.gold->is_nil() && !m.candidates.empty()) {
      EXPECT_NE(m.candidates[0].entity, m.gold->entity());
    }
  }
}

TEST(FsFilterAt1Test, MissingGoldIsInvalid) {
  try {
    FsFilterAt1(std::vector<MentionCandidate>{Mention("d", 0, "a", 2)});
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidInput);
  }
}

// Ten PER entities (ids 1..10) and ten OTHER entities (ids 11..20).
KbSnapshot PerOtherKb() {
  std::vector<Entity> es;
  for (uint64_t i = 1; i <= 20; ++i) {
    Entity e;
    e.id = Q(i);
    e.title = "e" + std::to_string(i);
    if (i <= 10) e.claims[kInstanceOf] = {kPersonRoot};
    es.push_back(e);
  }
  return SplitKnownNew(es, {});
}

std::vector<EntityId> AllIds(const KbSnapshot &kb) {
  std::vector<EntityId> ids;
  for (const auto &[id, e] : kb.entities()) ids.push_back(id);
  return ids;
}

TEST(SampleZsTest, RoundRobinOverTypes) {
  KbSnapshot kb = PerOtherKb();
  auto ids = AllIds(kb);
  for (uint64_t seed = 0; seed < 100; ++seed) {
    ZsSample s = SampleZsEntities(ids, kb, 4, seed);
    ASSERT_EQ(s.entities.size(), 4u);
    EXPECT_EQ(s.uniform_count, 2u);
    EXPECT_EQ(s.shortfall, 0u);
    EXPECT_EQ(CoarseTypeOf(s.entities[2], kb), CoarseType::kPer);
    EXPECT_EQ(CoarseTypeOf(s.entities[3], kb), CoarseType::kOther);
    EXPECT_EQ(std::set<EntityId>(s.entities.begin(), s.entities.end()).size(),
              4u);
  }
}

TEST(SampleZsTest, FullCoverIsPermutationInvariant) {
  KbSnapshot kb = PerOtherKb();
  auto ids = AllIds(kb);
  auto shuffled = ids;
  SplitMix64 rng(1);
  rng.Shuffle(std::span<EntityId>(shuffled));
  ZsSample a = SampleZsEntities(ids, kb, ids.size(), 9);
  ZsSample b = SampleZsEntities(shuffled, kb, ids.size(), 9);
  EXPECT_EQ(a.entities, b.entities);
  std::set<EntityId> cover(a.entities.begin(), a.entities.end());
  EXPECT_EQ(cover, std::set<EntityId>(ids.begin(), ids.end()));
}

TEST(SampleZsTest, ShortfallAndSingleType) {
  KbSnapshot kb = PerOtherKb();
  std::vector<EntityId> per;
  for (uint64_t i = 1; i <= 10; ++i) per.push_back(Q(i));
  ZsSample s = SampleZsEntities(per, kb, 6, 4);
  EXPECT_EQ(s.entities.size(), 6u);
  for (EntityId id : s.entities) {
    EXPECT_EQ(CoarseTypeOf(id, kb), CoarseType::kPer);
  }
  ZsSample all = SampleZsEntities(per, kb, 14, 4);
  EXPECT_EQ(all.entities.size(), 10u);
  EXPECT_EQ(all.shortfall, 4u);
  EXPECT_THROW(SampleZsEntities(per, kb, 1, 4), Error);
}

TEST(SampleZsTest, DiversifiedHalfIsFlat) {
  std::vector<Entity> es;
  const EntityId roots[] = {kPersonRoot, kLocationRoot, kOrganizationRoot,
                            kEventRoot};
  // Types get 30, 3, 30, 30 and 30 (OTHER) entities.
  uint64_t id = 1;
  for (int t = 0; t < 5; ++t) {
    size_t count = t == 1 ? 3 : 30;
    for (size_t i = 0; i < count; ++i) {
      Entity e;
      e.id = Q(id++);
      e.title = "x";
      if (t < 4) e.claims[kInstanceOf] = {roots[t]};
      es.push_back(e);
    }
  }
  KbSnapshot kb = SplitKnownNew(es, {});
  auto ids = AllIds(kb);
  for (uint64_t seed = 0; seed < 20; ++seed) {
    ZsSample s = SampleZsEntities(ids, kb, 40, seed);
    std::map<CoarseType, int> hist;
    for (size_t i = s.uniform_count; i < s.entities.size(); ++i) {
      ++hist[CoarseTypeOf(s.entities[i], kb)];
    }
    int loc = hist[CoarseType::kLoc];
    for (auto [type, count] : hist) {
      if (type == CoarseType::kLoc) continue;
      // Every other type is within one of the rest; LOC is capped by supply.
      EXPECT_GE(count, (20 - loc) / 4) << CoarseTypeName(type);
      EXPECT_LE(count, (20 - loc + 3) / 4) << CoarseTypeName(type);
    }
    std::set<EntityId> uniform(s.entities.begin(),
                               s.entities.begin() + s.uniform_count);
    for (size_t i = s.uniform_count; i < s.entities.size(); ++i) {
      EXPECT_FALSE(uniform.count(s.entities[i]));
    }
  }
}

AnnotationTask MakeTask(size_t i) {
  AnnotationTask t;
  t.mention = Mention("doc" + std::to_string(i), i, "s" + std::to_string(i % 7),
                      1 + i % 3);
  if (i % 2) t.mention.gold = Label::Entity(Q(1));
  t.criterion = i % 2 ? SamplingCriterion::kAmbiguous : SamplingCriterion::kUniform;
  for (const Candidate &c : t.mention.candidates) {
    t.cards.push_back({c.entity, "标题" + std::to_string(i),
                       std::string(300, 'd') + "描述", c.prior});
  }
  return t;
}

TEST(ExportTasksTest, EmptyListGivesEmptyFile) {
  testing::TempDir dir;
  ExportTasks(std::vector<AnnotationTask>{}, dir / "t.jsonl");
  EXPECT_EQ(ReadFile(dir / "t.jsonl"), "");
  EXPECT_TRUE(ImportTasks(dir / "t.jsonl").empty());
}

TEST(ExportTasksTest, SingleTaskRoundTrips) {
  testing::TempDir dir;
  std::vector<AnnotationTask> tasks = {MakeTask(1)};
  ExportTasks(tasks, dir / "t.jsonl", 10);
  auto back = ImportTasks(dir / "t.jsonl");
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].criterion, SamplingCriterion::kAmbiguous);
  EXPECT_EQ(back[0].cards.size(), tasks[0].cards.size());
  EXPECT_EQ(back[0].cards[0].description, std::string(10, 'd'));
  EXPECT_EQ(back[0].cards[0].title, "标题1");
  EXPECT_EQ(SerializeMention(back[0].mention), SerializeMention(tasks[0].mention));
}

TEST(ExportTasksTest, ThousandTasksAreByteStable) {
  testing::TempDir dir;
  std::vector<AnnotationTask> tasks;
  for (size_t i = 0; i < 1000; ++i) tasks.push_back(MakeTask(i));
  ExportTasks(tasks, dir / "a.jsonl");
  auto back = ImportTasks(dir / "a.jsonl");
  ASSERT_EQ(back.size(), 1000u);
  ExportTasks(back, dir / "b.jsonl");
  std::string a = ReadFile(dir / "a.jsonl");
  std::string b = ReadFile(dir / "b.jsonl");
  EXPECT_EQ(std::hash<std::string>()(a), std::hash<std::string>()(b));
  EXPECT_EQ(a, b);
  EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 1000);
}

TEST(ExportTasksTest, RejectsMisalignedCards) {
  AnnotationTask t = MakeTask(2);
  EXPECT_NO_THROW(ParseTaskLine(SerializeTask(t)));
  t.cards.pop_back();
  EXPECT_THROW(ParseTaskLine(SerializeTask(t)), Error);
  EXPECT_THROW(ParseTaskLine("{\"criterion\":\"uniform\"}"), Error);
}

}  // namespace
}  // namespace elkit
