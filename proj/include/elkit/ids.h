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

#ifndef ELKIT_IDS_H_
#define ELKIT_IDS_H_

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace elkit {

namespace internal {

// Parses `<prefix><decimal digits>` into the numeric part. Rejects empty
// digit strings, signs, and values that overflow 64 bits.
std::optional<uint64_t> ParsePrefixedNumber(char prefix, std::string_view s);

}  // namespace internal

// Wikidata-style identifier with a one-letter prefix. Ordering and equality
// are by numeric value, so Q3 < Q20.
template <char Prefix>
class WikidataId {
 public:
  constexpr WikidataId() = default;
  constexpr explicit WikidataId(uint64_t number) : number_(number) {}

  static std::optional<WikidataId> Parse(std::string_view s) {
    auto n = internal::ParsePrefixedNumber(Prefix, s);
    if (!n) return std::nullopt;
    return WikidataId(*n);
  }

  constexpr uint64_t number() const { return number_; }
  std::string str() const { return Prefix + std::to_string(number_); }

  friend constexpr auto operator<=>(WikidataId, WikidataId) = default;

 private:
  uint64_t number_ = 0;
};

using EntityId = WikidataId<'Q'>;
using PropertyId = WikidataId<'P'>;

// Parses an entity id, throwing kInvalidInput on malformed text.
EntityId ParseEntityId(std::string_view s);
PropertyId ParsePropertyId(std::string_view s);

inline constexpr PropertyId kInstanceOf{31};
inline constexpr PropertyId kSubclassOf{279};

}  // namespace elkit

template <char Prefix>
struct std::hash<elkit::WikidataId<Prefix>> {
  size_t operator()(elkit::WikidataId<Prefix> id) const noexcept {
    return std::hash<uint64_t>()(id.number());
  }
};

#endif  // ELKIT_IDS_H_
