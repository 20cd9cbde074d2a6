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

#include "elkit/typing.h"

#include <algorithm>
#include <charconv>
#include <string>

#include "elkit/errors.h"
#include "elkit/io.h"

namespace elkit {

std::string_view CoarseTypeName(CoarseType type) {
  switch (type) {
    case CoarseType::kPer: return "PER";
    case CoarseType::kLoc: return "LOC";
    case CoarseType::kOrg: return "ORG";
    case CoarseType::kEvent: return "EVENT";
    case CoarseType::kOther: return "OTHER";
  }
  return "OTHER";
}

std::optional<CoarseType> ParseCoarseType(std::string_view name) {
  for (CoarseType t : kAllCoarseTypes) {
    if (CoarseTypeName(t) == name) return t;
  }
  return std::nullopt;
}

std::set<EntityId> TypeClosure(EntityId id, const KbSnapshot &kb) {
  const Entity &entity = kb.Get(id);
  const std::vector<EntityId> &seed = entity.Values(kInstanceOf);
  std::set<EntityId> closure(seed.begin(), seed.end());
  std::vector<EntityId> frontier(seed.begin(), seed.end());
  while (!frontier.empty()) {
    EntityId node = frontier.back();
    frontier.pop_back();
    const Entity *cls = kb.Find(node);
    if (cls == nullptr) continue;  // dangling: leaf
    for (EntityId parent : cls->Values(kSubclassOf)) {
      if (closure.insert(parent).second) frontier.push_back(parent);
    }
  }
  return closure;
}

CoarseType CoarseTypeFromClosure(const std::set<EntityId> &closure) {
  if (closure.count(kPersonRoot)) return CoarseType::kPer;
  if (closure.count(kLocationRoot)) return CoarseType::kLoc;
  if (closure.count(kOrganizationRoot)) return CoarseType::kOrg;
  if (closure.count(kEventRoot)) return CoarseType::kEvent;
  return CoarseType::kOther;
}

CoarseType CoarseTypeOf(EntityId id, const KbSnapshot &kb) {
  return CoarseTypeFromClosure(TypeClosure(id, kb));
}

TopSnakVocab::TopSnakVocab(std::vector<TopSnak> entries,
                           std::vector<uint64_t> frequencies)
    : entries_(std::move(entries)), frequencies_(std::move(frequencies)) {
  if (frequencies_.size() != entries_.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "TopSnak frequencies and entries differ in length");
  }
  for (size_t i = 0; i < entries_.size(); ++i) {
    if (!index_.emplace(entries_[i], i).second) {
      throw Error(ErrorCode::kInvalidInput,
                  "duplicate TopSnak " + entries_[i].str());
    }
  }
}

std::optional<size_t> TopSnakVocab::Rank(const TopSnak &snak) const {
  auto it = index_.find(snak);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TopSnakVocab ExtractTopSnakVocab(const KbSnapshot &kb, size_t size) {
  if (size == 0) {
    throw Error(ErrorCode::kInvalidArgument, "TopSnak size must be positive");
  }
  if (kb.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "TopSnaks need a non-empty KB");
  }
  // Claim lists are duplicate-free, so each occurrence is a distinct entity.
  std::map<TopSnak, uint64_t> counts;
  for (const auto &[id, e] : kb.entities()) {
    for (const auto &[p, targets] : e.claims) {
      for (EntityId v : targets) ++counts[TopSnak{p, v}];
    }
  }
  std::vector<std::pair<TopSnak, uint64_t>> ranked(counts.begin(),
                                                   counts.end());
  // counts is already ordered by (p, v), so a stable sort keeps the tie-break.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto &a, const auto &b) {
                     return a.second > b.second;
                   });
  if (ranked.size() > size) ranked.resize(size);
  std::vector<TopSnak> entries;
  std::vector<uint64_t> freqs;
  for (const auto &[snak, freq] : ranked) {
    entries.push_back(snak);
    freqs.push_back(freq);
  }
  return TopSnakVocab(std::move(entries), std::move(freqs));
}

std::vector<size_t> FineTypeIndices(EntityId id, const KbSnapshot &kb,
                                    const TopSnakVocab &vocab) {
  const Entity &e = kb.Get(id);
  std::vector<size_t> ranks;
  for (const auto &[p, targets] : e.claims) {
    for (EntityId v : targets) {
      if (auto rank = vocab.Rank(TopSnak{p, v})) ranks.push_back(*rank);
    }
  }
  std::sort(ranks.begin(), ranks.end());
  ranks.erase(std::unique(ranks.begin(), ranks.end()), ranks.end());
  return ranks;
}

double FineTypeCoverage(std::span<const EntityId> ids, const KbSnapshot &kb,
                        const TopSnakVocab &vocab) {
  if (ids.empty()) return 0.0;
  size_t covered = 0;
  for (EntityId id : ids) {
    if (!FineTypeIndices(id, kb, vocab).empty()) ++covered;
  }
  return static_cast<double>(covered) / static_cast<double>(ids.size());
}

TypeLabels ComputeTypeLabels(const KbSnapshot &kb, const TopSnakVocab &vocab) {
  TypeLabels labels;
  for (const auto &[id, e] : kb.entities()) {
    labels.coarse.emplace(id, CoarseTypeOf(id, kb));
    labels.fine.emplace(id, FineTypeIndices(id, kb, vocab));
  }
  return labels;
}

void WriteTopSnaks(const TopSnakVocab &vocab,
                   const std::filesystem::path &path) {
  std::string out;
  for (size_t i = 0; i < vocab.size(); ++i) {
    const TopSnak &s = vocab.entries()[i];
    out += std::to_string(i) + "\t" + s.property.str() + "\t" + s.value.str() +
           "\t" + std::to_string(vocab.frequencies()[i]) + "\n";
  }
  WriteFile(path, out);
}

namespace {

uint64_t ParseCount(const std::string &field, const std::string &where) {
  uint64_t value = 0;
  auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw Error(ErrorCode::kInvalidInput, where + ": bad integer '" + field +
                                              "'");
  }
  return value;
}

}  // namespace

TopSnakVocab ReadTopSnaks(const std::filesystem::path &path) {
  std::ifstream in = OpenInput(path);
  std::vector<TopSnak> entries;
  std::vector<uint64_t> freqs;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = StripCr(line);
    if (view.empty()) continue;
    std::string where = path.filename().string() + ":" + std::to_string(line_no);
    auto fields = SplitTabs(view);
    if (fields.size() != 4) {
      throw Error(ErrorCode::kInvalidInput, where + ": expected 4 fields");
    }
    if (ParseCount(fields[0], where) != entries.size()) {
      throw Error(ErrorCode::kInvalidInput, where + ": ranks not contiguous");
    }
    entries.push_back(
        TopSnak{ParsePropertyId(fields[1]), ParseEntityId(fields[2])});
    freqs.push_back(ParseCount(fields[3], where));
  }
  return TopSnakVocab(std::move(entries), std::move(freqs));
}

void WriteCoarseTypes(const std::map<EntityId, CoarseType> &types,
                      const std::filesystem::path &path) {
  std::string out;
  for (const auto &[id, type] : types) {
    out += id.str() + "\t" + std::string(CoarseTypeName(type)) + "\n";
  }
  WriteFile(path, out);
}

std::map<EntityId, CoarseType> ReadCoarseTypes(
    const std::filesystem::path &path) {
  std::ifstream in = OpenInput(path);
  std::map<EntityId, CoarseType> types;
  std::string line;
  while (std::getline(in, line)) {
    std::string_view view = StripCr(line);
    if (view.empty()) continue;
    auto fields = SplitTabs(view);
    if (fields.size() != 2) {
      throw Error(ErrorCode::kInvalidInput, "coarse_types: expected 2 fields");
    }
    auto type = ParseCoarseType(fields[1]);
    if (!type) {
      throw Error(ErrorCode::kInvalidInput,
                  "coarse_types: unknown type " + fields[1]);
    }
    types[ParseEntityId(fields[0])] = *type;
  }
  return types;
}

}  // namespace elkit
