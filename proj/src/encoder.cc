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

#include "elkit/encoder.h"

#include <algorithm>

#include "elkit/errors.h"
#include "elkit/utf8.h"

namespace elkit {

namespace {

constexpr uint64_t kContextSalt = 0x636f6e74657874ULL;  // "context"
constexpr uint64_t kSpanSalt = 0x7370616eULL;           // "span"
constexpr uint64_t kEntitySalt = 0x656e74697479ULL;     // "entity"
constexpr uint64_t kTitleSalt = 0x7469746c65ULL;        // "title"

}  // namespace

MentionInput::MentionInput(std::string context_text)
    : text_(std::move(context_text)) {
  size_t begin = text_.find(kMentionBegin);
  size_t end = text_.find(kMentionEnd);
  if (begin == std::string::npos || end == std::string::npos) {
    throw Error(ErrorCode::kInvalidInput, "missing [E1]/[/E1] marker");
  }
  if (text_.find(kMentionBegin, begin + 1) != std::string::npos ||
      text_.find(kMentionEnd, end + 1) != std::string::npos) {
    throw Error(ErrorCode::kInvalidInput, "duplicate mention marker");
  }
  size_t inner = begin + kMentionBegin.size();
  if (end < inner) {
    throw Error(ErrorCode::kInvalidInput, "mention markers out of order");
  }
  left_ = text_.substr(0, begin);
  mention_ = text_.substr(inner, end - inner);
  right_ = text_.substr(end + kMentionEnd.size());
}

MentionInput MentionInput::FromCandidate(const MentionCandidate &m) {
  std::u32string context = DecodeUtf8(m.context);
  size_t start = std::min(context.size(), m.span.start - m.context_offset);
  size_t end = std::min(context.size(), m.span.end - m.context_offset);
  std::u32string_view view(context);
  return MentionInput(EncodeUtf8(view.substr(0, start)) +
                      std::string(kMentionBegin) +
                      EncodeUtf8(view.substr(start, end - start)) +
                      std::string(kMentionEnd) +
                      EncodeUtf8(view.substr(end)));
}

EntityInput::EntityInput(std::string title, std::string description)
    : title_(std::move(title)), description_(std::move(description)) {
  if (title_.empty()) {
    throw Error(ErrorCode::kInvalidInput, "entity input needs a title");
  }
}

EntityInput EntityInput::FromEntity(const Entity &entity) {
  return EntityInput(entity.title.empty() ? entity.id.str() : entity.title,
                     entity.description);
}

std::string EntityInput::text() const {
  return title_ + std::string(kSeparator) + description_;
}

uint64_t HashNgram(std::u32string_view gram, uint64_t salt) {
  uint64_t h = 0xcbf29ce484222325ULL ^ salt;
  for (char32_t c : gram) {
    uint32_t v = static_cast<uint32_t>(c);
    for (int b = 0; b < 4; ++b) {
      h ^= (v >> (8 * b)) & 0xFF;
      h *= 0x100000001b3ULL;
    }
  }
  h = (h ^ (h >> 30)) * 0xBF58476D1CE4E5B9ULL;
  h = (h ^ (h >> 27)) * 0x94D049BB133111EBULL;
  return h ^ (h >> 31);
}

void AppendNgramFeatures(std::u32string_view text, uint64_t salt,
                         uint32_t buckets, std::vector<uint32_t> *out) {
  for (size_t n = 1; n <= 3; ++n) {
    for (size_t i = 0; i + n <= text.size(); ++i) {
      out->push_back(
          static_cast<uint32_t>(HashNgram(text.substr(i, n), salt + n) %
                                buckets));
    }
  }
}

std::vector<uint64_t> NgramSet(std::u32string_view text, uint64_t salt) {
  std::vector<uint64_t> grams;
  for (size_t n = 1; n <= 3; ++n) {
    for (size_t i = 0; i + n <= text.size(); ++i) {
      grams.push_back(HashNgram(text.substr(i, n), salt + n));
    }
  }
  std::sort(grams.begin(), grams.end());
  grams.erase(std::unique(grams.begin(), grams.end()), grams.end());
  return grams;
}

size_t CountShared(std::span<const uint64_t> a, std::span<const uint64_t> b) {
  size_t shared = 0;
  size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) {
      ++i;
    } else if (b[j] < a[i]) {
      ++j;
    } else {
      ++shared;
      ++i;
      ++j;
    }
  }
  return shared;
}

std::vector<uint32_t> MentionFeatures(const MentionInput &m, uint32_t buckets) {
  std::vector<uint32_t> features;
  std::u32string context = DecodeUtf8(m.left() + m.mention() + m.right());
  AppendNgramFeatures(context, kContextSalt, buckets, &features);
  AppendNgramFeatures(DecodeUtf8(m.mention()), kSpanSalt, buckets, &features);
  return features;
}

std::vector<uint32_t> EntityFeatures(const EntityInput &e, uint32_t buckets) {
  std::vector<uint32_t> features;
  AppendNgramFeatures(DecodeUtf8(e.text()), kEntitySalt, buckets, &features);
  AppendNgramFeatures(DecodeUtf8(e.title()), kTitleSalt, buckets, &features);
  return features;
}

std::vector<double> Linear::Apply(std::span<const double> x) const {
  std::vector<double> y(bias);
  for (size_t o = 0; o < out; ++o) {
    const double *row = weight.data() + o * in;
    double acc = 0.0;
    for (size_t i = 0; i < in; ++i) acc += row[i] * x[i];
    y[o] += acc;
  }
  return y;
}

std::vector<double> Linear::Backward(std::span<const double> x,
                                     std::span<const double> dy,
                                     Linear *grad) const {
  std::vector<double> dx(in, 0.0);
  for (size_t o = 0; o < out; ++o) {
    double g = dy[o];
    if (g == 0.0) continue;
    const double *row = weight.data() + o * in;
    double *grow = grad->weight.data() + o * in;
    for (size_t i = 0; i < in; ++i) {
      grow[i] += g * x[i];
      dx[i] += g * row[i];
    }
    grad->bias[o] += g;
  }
  return dx;
}

EncoderCache EncodeForward(const EncoderParams &enc,
                           std::span<const uint32_t> features) {
  EncoderCache cache;
  cache.pooled.assign(enc.dim, 0.0);
  if (!features.empty()) {
    for (uint32_t f : features) {
      const double *row = enc.embedding.data() + size_t{f} * enc.dim;
      for (size_t k = 0; k < enc.dim; ++k) cache.pooled[k] += row[k];
    }
    const double inv = 1.0 / static_cast<double>(features.size());
    for (double &v : cache.pooled) v *= inv;
  }
  cache.output = enc.projection.Apply(cache.pooled);
  return cache;
}

void EncodeBackward(const EncoderParams &enc,
                    std::span<const uint32_t> features,
                    const EncoderCache &cache, std::span<const double> d_output,
                    EncoderParams *grad) {
  std::vector<double> d_pooled =
      enc.projection.Backward(cache.pooled, d_output, &grad->projection);
  if (features.empty()) return;
  const double inv = 1.0 / static_cast<double>(features.size());
  for (uint32_t f : features) {
    double *row = grad->embedding.data() + size_t{f} * enc.dim;
    for (size_t k = 0; k < enc.dim; ++k) row[k] += d_pooled[k] * inv;
  }
}

}  // namespace elkit
