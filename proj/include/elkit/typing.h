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

#ifndef ELKIT_TYPING_H_
#define ELKIT_TYPING_H_

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "elkit/ids.h"
#include "elkit/kb.h"

namespace elkit {

enum class CoarseType { kPer = 0, kLoc, kOrg, kEvent, kOther };

inline constexpr int kNumCoarseTypes = 5;
inline constexpr std::array<CoarseType, kNumCoarseTypes> kAllCoarseTypes = {
    CoarseType::kPer, CoarseType::kLoc, CoarseType::kOrg, CoarseType::kEvent,
    CoarseType::kOther};

// "PER", "LOC", "ORG", "EVENT", "OTHER".
std::string_view CoarseTypeName(CoarseType type);
std::optional<CoarseType> ParseCoarseType(std::string_view name);

// Root classes of the coarse types, in precedence order.
inline constexpr EntityId kPersonRoot{215627};
inline constexpr EntityId kLocationRoot{618123};
inline constexpr EntityId kOrganizationRoot{43229};
inline constexpr EntityId kEventRoot{1656682};

// Transitive types of an entity: the P31 targets, closed under P279.
// Throws kNotFound for unknown ids.
std::set<EntityId> TypeClosure(EntityId id, const KbSnapshot &kb);

// First root hit in the order PER, LOC, ORG, EVENT; otherwise OTHER.
CoarseType CoarseTypeOf(EntityId id, const KbSnapshot &kb);
CoarseType CoarseTypeFromClosure(const std::set<EntityId> &closure);

// Property-value pair.
struct TopSnak {
  PropertyId property;
  EntityId value;

  std::string str() const { return property.str() + "-" + value.str(); }
  friend auto operator<=>(const TopSnak &, const TopSnak &) = default;
};

// The most frequent snaks in a KB. Rank 0 is the most frequent.
class TopSnakVocab {
 public:
  TopSnakVocab() = default;

  // Entries must be unique; ranks follow the given order.
  TopSnakVocab(std::vector<TopSnak> entries, std::vector<uint64_t> frequencies);

  size_t size() const { return entries_.size(); }
  const std::vector<TopSnak> &entries() const { return entries_; }
  const std::vector<uint64_t> &frequencies() const { return frequencies_; }
  std::optional<size_t> Rank(const TopSnak &snak) const;

 private:
  std::vector<TopSnak> entries_;
  std::vector<uint64_t> frequencies_;
  std::map<TopSnak, size_t> index_;
};

inline constexpr size_t kDefaultTopSnakCount = 10000;

// Frequency of (p, v) = number of entities with v in claims[p]. Sorted by
// frequency descending, ties by (p, v) numerically ascending. Throws
// kInvalidArgument for size 0 or an empty KB.
TopSnakVocab ExtractTopSnakVocab(const KbSnapshot &kb,
                                 size_t size = kDefaultTopSnakCount);

// Vocabulary ranks of the entity's snaks, ascending.
std::vector<size_t> FineTypeIndices(EntityId id, const KbSnapshot &kb,
                                    const TopSnakVocab &vocab);

// Fraction of `ids` with at least one fine type. Returns 0 for an empty set.
double FineTypeCoverage(std::span<const EntityId> ids, const KbSnapshot &kb,
                        const TopSnakVocab &vocab);

// Precomputed labels for every entity in a snapshot.
struct TypeLabels {
  std::map<EntityId, CoarseType> coarse;
  std::map<EntityId, std::vector<size_t>> fine;
};

TypeLabels ComputeTypeLabels(const KbSnapshot &kb, const TopSnakVocab &vocab);

// topsnaks.tsv: rank \t property \t value \t frequency.
void WriteTopSnaks(const TopSnakVocab &vocab,
                   const std::filesystem::path &path);
TopSnakVocab ReadTopSnaks(const std::filesystem::path &path);

// coarse_types.tsv: entity \t coarse-type-name.
void WriteCoarseTypes(const std::map<EntityId, CoarseType> &types,
                      const std::filesystem::path &path);
std::map<EntityId, CoarseType> ReadCoarseTypes(
    const std::filesystem::path &path);

}  // namespace elkit

#endif  // ELKIT_TYPING_H_
