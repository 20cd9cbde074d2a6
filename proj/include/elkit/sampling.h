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

#ifndef ELKIT_SAMPLING_H_
#define ELKIT_SAMPLING_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "elkit/ids.h"
#include "elkit/kb.h"
#include "elkit/matching.h"

namespace elkit {

enum class SamplingCriterion { kUniform, kAmbiguous };

std::string_view SamplingCriterionName(SamplingCriterion c);

struct CandidateCard {
  EntityId entity;
  std::string title;
  std::string description;
  double prior = 0.0;
};

// One mention prepared for annotation. cards[i] describes
// mention.candidates[i].
struct AnnotationTask {
  MentionCandidate mention;
  std::vector<CandidateCard> cards;
  SamplingCriterion criterion = SamplingCriterion::kUniform;
};

struct FsSample {
  std::vector<AnnotationTask> tasks;
  size_t uniform_shortfall = 0;
  size_t ambiguous_shortfall = 0;
};

// Few-shot mention sampling over a matched pool. Half of n surfaces are
// drawn uniformly from all surfaces; the other half uniformly from surfaces
// with at least two candidates that were not drawn in the first half. One
// example is then drawn per chosen surface. Surfaces and per-surface
// examples are ordered canonically first, so the result depends only on
// the pool contents and the seed. Cards are filled from `kb` when given.
// Throws kInvalidArgument for odd n.
FsSample SampleFs(std::span<const MentionCandidate> pool, size_t n,
                  uint64_t seed, const KbSnapshot *kb = nullptr);

// Drops examples whose gold is the highest-prior candidate. NIL golds and
// examples without candidates are kept. Throws kInvalidInput if a gold is
// missing.
std::vector<MentionCandidate> FsFilterAt1(
    std::span<const MentionCandidate> labeled);

struct ZsSample {
  std::vector<EntityId> entities;  // uniform half first, then diversified
  size_t uniform_count = 0;
  size_t shortfall = 0;
};

// n/2 entities uniformly without replacement, the rest by round-robin over
// coarse types (PER, LOC, ORG, EVENT, OTHER; exhausted types skipped), each
// type's pool shuffled by the same generator. Throws kInvalidArgument for
// n < 2.
ZsSample SampleZsEntities(std::span<const EntityId> e_new,
                          const KbSnapshot &kb, size_t n, uint64_t seed);

inline constexpr size_t kDefaultDescriptionBudget = 200;

// Task JSONL:
//   {"mention":{<mention record>},"criterion":"uniform"|"ambiguous",
//    "candidates":[{"entity":"Q1","title":..,"description":..,"prior":..}]}
// Descriptions are cut to `description_budget` scalar values.
std::string SerializeTask(const AnnotationTask &task,
                          size_t description_budget = kDefaultDescriptionBudget);
AnnotationTask ParseTaskLine(std::string_view line);

void ExportTasks(std::span<const AnnotationTask> tasks, std::ostream &out,
                 size_t description_budget = kDefaultDescriptionBudget);
void ExportTasks(std::span<const AnnotationTask> tasks,
                 const std::filesystem::path &path,
                 size_t description_budget = kDefaultDescriptionBudget);
std::vector<AnnotationTask> ImportTasks(const std::filesystem::path &path);

// Cards for a mention's candidates; entities missing from kb get empty text.
std::vector<CandidateCard> MakeCards(const MentionCandidate &mention,
                                     const KbSnapshot *kb);

}  // namespace elkit

#endif  // ELKIT_SAMPLING_H_
