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

#ifndef ELKIT_ENCODER_H_
#define ELKIT_ENCODER_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "elkit/kb.h"
#include "elkit/matching.h"

namespace elkit {

inline constexpr std::string_view kMentionBegin = "[E1]";
inline constexpr std::string_view kMentionEnd = "[/E1]";
inline constexpr std::string_view kSeparator = "[SEP]";

// Mention in context, wrapped by one [E1] ... [/E1] marker pair.
class MentionInput {
 public:
  // Throws kInvalidInput unless there is exactly one well-ordered pair.
  explicit MentionInput(std::string context_text);

  // Builds the marked context for a matched mention.
  static MentionInput FromCandidate(const MentionCandidate &mention);

  const std::string &text() const { return text_; }
  const std::string &left() const { return left_; }
  const std::string &mention() const { return mention_; }
  const std::string &right() const { return right_; }

 private:
  std::string text_;
  std::string left_, mention_, right_;
};

// Title and first paragraph of an entity page.
class EntityInput {
 public:
  // Throws kInvalidInput for an empty title.
  EntityInput(std::string title, std::string description);
  static EntityInput FromEntity(const Entity &entity);

  const std::string &title() const { return title_; }
  const std::string &description() const { return description_; }
  // title [SEP] description
  std::string text() const;

 private:
  std::string title_;
  std::string description_;
};

// 64-bit FNV-1a over the little-endian bytes of each scalar value, with the
// offset basis xored by `salt`, followed by the SplitMix64 finalizer.
uint64_t HashNgram(std::u32string_view gram, uint64_t salt);

// Appends bucket ids of every character n-gram, n in [1, 3].
void AppendNgramFeatures(std::u32string_view text, uint64_t salt,
                         uint32_t buckets, std::vector<uint32_t> *out);

// Distinct n-gram hashes (n in [1, 3]) of a text, sorted.
std::vector<uint64_t> NgramSet(std::u32string_view text, uint64_t salt = 0);

// Number of shared elements of two sorted sets.
size_t CountShared(std::span<const uint64_t> a, std::span<const uint64_t> b);

// Feature ids as consumed by the encoders. Mention: context n-grams plus
// span n-grams under a second salt. Entity: title [SEP] description
// n-grams plus title n-grams under a second salt.
std::vector<uint32_t> MentionFeatures(const MentionInput &m, uint32_t buckets);
std::vector<uint32_t> EntityFeatures(const EntityInput &e, uint32_t buckets);

// Dense row-major matrix-vector helpers.
struct Linear {
  size_t in = 0;
  size_t out = 0;
  std::vector<double> weight;  // out x in
  std::vector<double> bias;    // out

  Linear() = default;
  Linear(size_t in_dim, size_t out_dim)
      : in(in_dim), out(out_dim), weight(in_dim * out_dim), bias(out_dim) {}

  std::vector<double> Apply(std::span<const double> x) const;
  // Accumulates parameter gradients into `grad` and returns dL/dx.
  std::vector<double> Backward(std::span<const double> x,
                               std::span<const double> dy, Linear *grad) const;

  friend bool operator==(const Linear &, const Linear &) = default;
};

// Hashed n-gram bag encoder: mean of embedding rows, then an affine map.
struct EncoderParams {
  size_t buckets = 0;
  size_t dim = 0;
  std::vector<double> embedding;  // buckets x dim
  Linear projection;              // dim -> dim

  EncoderParams() = default;
  EncoderParams(size_t bucket_count, size_t dimension)
      : buckets(bucket_count),
        dim(dimension),
        embedding(bucket_count * dimension),
        projection(dimension, dimension) {}

  friend bool operator==(const EncoderParams &, const EncoderParams &) =
      default;
};

struct EncoderCache {
  std::vector<double> pooled;  // mean embedding
  std::vector<double> output;
};

EncoderCache EncodeForward(const EncoderParams &enc,
                           std::span<const uint32_t> features);
void EncodeBackward(const EncoderParams &enc,
                    std::span<const uint32_t> features,
                    const EncoderCache &cache, std::span<const double> d_output,
                    EncoderParams *grad);

}  // namespace elkit

#endif  // ELKIT_ENCODER_H_
