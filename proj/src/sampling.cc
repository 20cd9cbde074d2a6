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

#include "elkit/sampling.h"

#include <algorithm>
#include <map>
#include <ostream>
#include <set>

#include "elkit/errors.h"
#include "elkit/io.h"
#include "elkit/random.h"
#include "elkit/typing.h"
#include "elkit/utf8.h"
#include "json.hpp"

namespace elkit {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view SamplingCriterionName(SamplingCriterion c) {
  return c == SamplingCriterion::kUniform ? "uniform" : "ambiguous";
}

std::vector<CandidateCard> MakeCards(const MentionCandidate &mention,
                                     const KbSnapshot *kb) {
  std::vector<CandidateCard> cards;
  for (const Candidate &c : mention.candidates) {
    CandidateCard card{c.entity, "", "", c.prior};
    if (kb != nullptr) {
      if (const Entity *e = kb->Find(c.entity)) {
        card.title = e->title;
        card.description = e->description;
      }
    }
    cards.push_back(std::move(card));
  }
  return cards;
}

FsSample SampleFs(std::span<const MentionCandidate> pool, size_t n,
                  uint64_t seed, const KbSnapshot *kb) {
  if (n % 2 != 0) {
    throw Error(ErrorCode::kInvalidArgument, "sample size must be even");
  }
  // Canonical grouping: surfaces sorted, examples by (doc_id, start, end).
  std::map<std::string, std::vector<const MentionCandidate *>> groups;
  for (const MentionCandidate &m : pool) groups[m.span.surface].push_back(&m);
  for (auto &[surface, list] : groups) {
    std::stable_sort(list.begin(), list.end(),
                     [](const MentionCandidate *a, const MentionCandidate *b) {
                       if (a->doc_id != b->doc_id) return a->doc_id < b->doc_id;
                       if (a->span.start != b->span.start) {
                         return a->span.start < b->span.start;
                       }
                       return a->span.end < b->span.end;
                     });
  }

  SplitMix64 rng(seed);
  const size_t half = n / 2;
  FsSample sample;

  std::vector<std::string> all;
  for (const auto &[surface, list] : groups) all.push_back(surface);
  std::vector<std::string> uniform = rng.SampleWithoutReplacement(all, half);
  sample.uniform_shortfall = half - uniform.size();

  std::set<std::string> taken(uniform.begin(), uniform.end());
  std::vector<std::string> eligible;
  for (const auto &[surface, list] : groups) {
    if (taken.count(surface)) continue;
    // Candidate lists are per-surface, so any example tells the count.
    size_t max_candidates = 0;
    for (const MentionCandidate *m : list) {
      max_candidates = std::max(max_candidates, m->candidates.size());
    }
    if (max_candidates >= 2) eligible.push_back(surface);
  }
  std::vector<std::string> ambiguous =
      rng.SampleWithoutReplacement(eligible, half);
  sample.ambiguous_shortfall = half - ambiguous.size();

  auto emit = [&](const std::vector<std::string> &surfaces,
                  SamplingCriterion criterion) {
    for (const std::string &surface : surfaces) {
      const auto &list = groups.at(surface);
      const MentionCandidate &chosen = *list[rng.Uniform(list.size())];
      AnnotationTask task;
      task.mention = chosen;
      task.cards = MakeCards(chosen, kb);
      task.criterion = criterion;
      sample.tasks.push_back(std::move(task));
    }
  };
  emit(uniform, SamplingCriterion::kUniform);
  emit(ambiguous, SamplingCriterion::kAmbiguous);
  return sample;
}

std::vector<MentionCandidate> FsFilterAt1(
    std::span<const MentionCandidate> labeled) {
  std::vector<MentionCandidate> kept;
  for (const MentionCandidate &m : labeled) {
    if (!m.gold) {
      throw Error(ErrorCode::kInvalidInput,
                  "example " + m.doc_id + "@" + std::to_string(m.span.start) +
                      " has no gold label");
    }
    bool at1_correct = !m.gold->is_nil() && !m.candidates.empty() &&
                       m.candidates.front().entity == m.gold->entity();
    if (!at1_correct) kept.push_back(m);
  }
  return kept;
}

ZsSample SampleZsEntities(std::span<const EntityId> e_new,
                          const KbSnapshot &kb, size_t n, uint64_t seed) {
  if (n < 2) {
    throw Error(ErrorCode::kInvalidArgument, "ZS sample size must be >= 2");
  }
  std::vector<EntityId> ids(e_new.begin(), e_new.end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

  ZsSample sample;
  if (ids.size() < n) sample.shortfall = n - ids.size();

  SplitMix64 rng(seed);
  const size_t uniform_n = std::min(n / 2, ids.size());
  // Partial Fisher-Yates: the first uniform_n slots are the uniform draw.
  for (size_t i = 0; i < uniform_n; ++i) {
    size_t j = i + rng.Uniform(ids.size() - i);
    std::swap(ids[i], ids[j]);
  }
  sample.entities.assign(ids.begin(), ids.begin() + uniform_n);
  sample.uniform_count = uniform_n;

  std::vector<EntityId> rest(ids.begin() + uniform_n, ids.end());
  std::sort(rest.begin(), rest.end());
  std::array<std::vector<EntityId>, kNumCoarseTypes> by_type;
  for (EntityId id : rest) {
    by_type[static_cast<int>(CoarseTypeOf(id, kb))].push_back(id);
  }
  for (auto &bucket : by_type) rng.Shuffle(std::span<EntityId>(bucket));

  size_t target = std::min(n, ids.size());
  std::array<size_t, kNumCoarseTypes> next{};
  while (sample.entities.size() < target) {
    for (int t = 0; t < kNumCoarseTypes && sample.entities.size() < target;
         ++t) {
      if (next[t] < by_type[t].size()) {
        sample.entities.push_back(by_type[t][next[t]++]);
      }
    }
  }
  return sample;
}

namespace {

ordered_json MentionToJson(const MentionCandidate &m) {
  return ordered_json::parse(SerializeMention(m));
}

}  // namespace

std::string SerializeTask(const AnnotationTask &task,
                          size_t description_budget) {
  ordered_json j;
  j["mention"] = MentionToJson(task.mention);
  j["criterion"] = std::string(SamplingCriterionName(task.criterion));
  ordered_json cards = ordered_json::array();
  for (const CandidateCard &c : task.cards) {
    ordered_json cj;
    cj["entity"] = c.entity.str();
    cj["title"] = c.title;
    cj["description"] = TruncateScalars(c.description, description_budget);
    cj["prior"] = c.prior;
    cards.push_back(std::move(cj));
  }
  j["candidates"] = std::move(cards);
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

AnnotationTask ParseTaskLine(std::string_view line) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(ErrorCode::kInvalidInput, "task record: not a JSON object");
  }
  AnnotationTask task;
  try {
    task.mention = ParseMentionLine(j.at("mention").dump());
    std::string criterion = j.at("criterion").get<std::string>();
    if (criterion == "uniform") {
      task.criterion = SamplingCriterion::kUniform;
    } else if (criterion == "ambiguous") {
      task.criterion = SamplingCriterion::kAmbiguous;
    } else {
      throw Error(ErrorCode::kInvalidInput, "bad criterion " + criterion);
    }
    for (const json &c : j.at("candidates")) {
      task.cards.push_back(
          CandidateCard{ParseEntityId(c.at("entity").get<std::string>()),
                        c.at("title").get<std::string>(),
                        c.at("description").get<std::string>(),
                        c.at("prior").get<double>()});
    }
  } catch (const json::exception &e) {
    throw Error(ErrorCode::kInvalidInput, std::string("task record: ") +
                                              e.what());
  }
  if (task.cards.size() != task.mention.candidates.size()) {
    throw Error(ErrorCode::kInvalidInput,
                "task record: cards do not align with candidates");
  }
  return task;
}

void ExportTasks(std::span<const AnnotationTask> tasks, std::ostream &out,
                 size_t description_budget) {
  for (const AnnotationTask &task : tasks) {
    out << SerializeTask(task, description_budget) << '\n';
  }
  if (!out) throw Error(ErrorCode::kIo, "task export failed");
}

void ExportTasks(std::span<const AnnotationTask> tasks,
                 const std::filesystem::path &path,
                 size_t description_budget) {
  std::ofstream out = OpenOutput(path);
  ExportTasks(tasks, out, description_budget);
}

std::vector<AnnotationTask> ImportTasks(const std::filesystem::path &path) {
  std::ifstream in = OpenInput(path);
  std::vector<AnnotationTask> tasks;
  std::string line;
  while (std::getline(in, line)) {
    std::string_view view = StripCr(line);
    if (view.empty()) continue;
    tasks.push_back(ParseTaskLine(view));
  }
  return tasks;
}

}  // namespace elkit
