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

#ifndef ELKIT_UTF8_H_
#define ELKIT_UTF8_H_

#include <string>
#include <string_view>

namespace elkit {

// All text offsets in elkit are Unicode scalar-value indices. Text is kept
// as UTF-8 at API boundaries and decoded to UTF-32 where offsets matter.

// Decodes UTF-8. Invalid sequences decode to U+FFFD one byte at a time.
std::u32string DecodeUtf8(std::string_view s);

std::string EncodeUtf8(std::u32string_view s);

// Number of scalar values in a UTF-8 string.
size_t ScalarLength(std::string_view s);

// Substring [start, end) in scalar values, clipped to the string.
std::string ScalarSubstr(std::string_view s, size_t start, size_t end);

// Truncates to at most `budget` scalar values.
std::string TruncateScalars(std::string_view s, size_t budget);

}  // namespace elkit

#endif  // ELKIT_UTF8_H_
