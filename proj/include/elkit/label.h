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

#ifndef ELKIT_LABEL_H_
#define ELKIT_LABEL_H_

#include <optional>
#include <string>
#include <string_view>

#include "elkit/ids.h"
#include "elkit/typing.h"

namespace elkit {

// Either an in-KB entity or NIL tagged with a coarse type. Used for gold
// annotations and predictions. Text form: "Q42" or "NIL_PER".
class Label {
 public:
  static Label Entity(EntityId id) { return Label(id, false, CoarseType::kOther); }
  static Label Nil(CoarseType type) { return Label(EntityId(), true, type); }

  bool is_nil() const { return nil_; }
  EntityId entity() const { return entity_; }
  CoarseType nil_type() const { return nil_type_; }

  std::string str() const {
    return nil_ ? "NIL_" + std::string(CoarseTypeName(nil_type_))
                : entity_.str();
  }

  static std::optional<Label> Parse(std::string_view s) {
    if (s.starts_with("NIL_")) {
      auto type = ParseCoarseType(s.substr(4));
      if (!type) return std::nullopt;
      return Nil(*type);
    }
    auto id = EntityId::Parse(s);
    if (!id) return std::nullopt;
    return Entity(*id);
  }

  friend bool operator==(const Label &a, const Label &b) {
    if (a.nil_ != b.nil_) return false;
    return a.nil_ ? a.nil_type_ == b.nil_type_ : a.entity_ == b.entity_;
  }

 private:
  Label(EntityId id, bool nil, CoarseType type)
      : entity_(id), nil_(nil), nil_type_(type) {}

  EntityId entity_;
  bool nil_;
  CoarseType nil_type_;
};

}  // namespace elkit

#endif  // ELKIT_LABEL_H_
