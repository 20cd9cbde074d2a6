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

#ifndef ELKIT_EVAL_H_
#define ELKIT_EVAL_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "elkit/ids.h"
#include "elkit/label.h"

namespace elkit {

struct RankedExample {
  std::string id;
  std::string slice;  // grouping key, e.g. the document source
  std::optional<Label> gold;  // absent for unlabeled predictions
  std::vector<EntityId> ranking;
  std::optional<Label> prediction;
};

// JSONL: {"id", "slice", "gold": "Q1" | "NIL_PER", "ranking": [...],
// "prediction": "Q1" | "NIL_PER" | null}; "gold" may be null. Duplicate
// ranking entries are rejected with kInvalidInput. The evaluators throw
// kInvalidInput for an example without gold.
RankedExample ParseRankedExample(std::string_view line);
std::string SerializeRankedExample(const RankedExample &example);
std::vector<RankedExample> ReadRankedExamples(
    const std::filesystem::path &path);

enum class EvalMode { kInKb, kWithNil };
enum class Strictness { kStrict, kLenient };

std::string_view EvalModeName(EvalMode mode);  // "inkb", "withnil"

// In-KB recall: NIL golds are excluded from the denominator. Absent when no
// example has an in-KB gold. Throws kInvalidArgument for k == 0.
std::optional<double> RecallAtK(std::span<const RankedExample> examples,
                                size_t k);

struct SliceReport {
  std::string name;
  uint64_t n_total = 0;
  uint64_t n_scored = 0;
  std::map<size_t, uint64_t> hits;  // K -> examples correct at K

  // hits / n_scored, absent when n_scored == 0.
  std::optional<double> Recall(size_t k) const;
};

struct EvalReport {
  EvalMode mode = EvalMode::kInKb;
  Strictness strictness = Strictness::kStrict;  // With-NIL only
  std::vector<size_t> ks;
  SliceReport overall;
  std::vector<SliceReport> slices;  // sorted by name
};

EvalReport EvaluateInKb(std::span<const RankedExample> examples,
                        std::vector<size_t> ks);

// R@1 over all examples from the predictions. Throws kInvalidInput when a
// prediction is missing.
EvalReport EvaluateWithNil(std::span<const RankedExample> examples,
                           Strictness strictness = Strictness::kStrict);

bool NilCorrect(const Label &gold, const Label &prediction,
                Strictness strictness);

// Percentage of hits / n rounded half-up to one decimal, e.g. "33.3".
std::string FormatPercent(uint64_t hits, uint64_t n);

std::string RenderText(const EvalReport &report);
std::string RenderJson(const EvalReport &report);

}  // namespace elkit

#endif  // ELKIT_EVAL_H_
