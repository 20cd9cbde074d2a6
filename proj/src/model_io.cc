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

// Model file layout, all integers and doubles little-endian:
//
//   "ELKM"            magic
//   u32 version       1
//   u32 kind          ModelKind
//   f64 scale
//   u32 flags         bit0 encoders, bit1 typing heads, bit2 joint scorer
//   encoders:         u64 buckets, u64 dim, then per side (mention, entity)
//                     embedding, projection weight, projection bias
//   typing heads:     u64 fine_count, then mention coarse, entity coarse,
//                     mention fine, entity fine (weight then bias each)
//   joint scorer:     u64 buckets, weight, f64 bias
//
// Arrays are written without a length prefix; sizes follow from the dims.

#include <bit>
#include <cstring>

#include "elkit/errors.h"
#include "elkit/io.h"
#include "elkit/model.h"

namespace elkit {

namespace {

constexpr char kMagic[4] = {'E', 'L', 'K', 'M'};
constexpr uint32_t kVersion = 1;
constexpr uint32_t kHasEncoders = 1u << 0;
constexpr uint32_t kHasTyping = 1u << 1;
constexpr uint32_t kHasJoint = 1u << 2;
// Guards against absurd allocations from corrupt headers.
constexpr uint64_t kMaxElements = uint64_t{1} << 32;

class Writer {
 public:
  void U32(uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<char>(v >> (8 * i)));
  }
  void U64(uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<char>(v >> (8 * i)));
  }
  void F64(double v) { U64(std::bit_cast<uint64_t>(v)); }
  void Array(std::span<const double> values) {
    for (double v : values) F64(v);
  }
  void Bytes(const char *p, size_t n) { out_.append(p, n); }
  std::string Take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  uint64_t Unsigned(int width) {
    Need(width);
    uint64_t v = 0;
    for (int i = 0; i < width; ++i) {
      v |= uint64_t{static_cast<unsigned char>(bytes_[pos_ + i])} << (8 * i);
    }
    pos_ += width;
    return v;
  }
  uint32_t U32() { return static_cast<uint32_t>(Unsigned(4)); }
  uint64_t U64() { return Unsigned(8); }
  double F64() { return std::bit_cast<double>(U64()); }
  void Array(std::vector<double> *values) {
    Need(values->size() * 8);
    for (double &v : *values) v = F64();
  }
  void Bytes(char *p, size_t n) {
    Need(n);
    std::memcpy(p, bytes_.data() + pos_, n);
    pos_ += n;
  }
  bool AtEnd() const { return pos_ == bytes_.size(); }

 private:
  void Need(size_t n) const {
    if (bytes_.size() - pos_ < n) {
      throw Error(ErrorCode::kInvalidInput, "model file truncated");
    }
  }

  std::string_view bytes_;
  size_t pos_ = 0;
};

uint64_t Dim(Reader &r) {
  uint64_t v = r.U64();
  if (v == 0 || v > kMaxElements) {
    throw Error(ErrorCode::kInvalidInput, "model file has a bad dimension");
  }
  return v;
}

void WriteLinear(const Linear &l, Writer &w) {
  w.Array(l.weight);
  w.Array(l.bias);
}

void ReadLinear(Linear *l, Reader &r) {
  r.Array(&l->weight);
  r.Array(&l->bias);
}

}  // namespace

std::string SerializeModel(const ModelParams &params) {
  Writer w;
  w.Bytes(kMagic, 4);
  w.U32(kVersion);
  w.U32(static_cast<uint32_t>(params.kind));
  w.F64(params.scale);
  uint32_t flags = 0;
  if (params.mention_encoder.dim > 0) flags |= kHasEncoders;
  if (params.typing) flags |= kHasTyping;
  if (params.joint) flags |= kHasJoint;
  w.U32(flags);
  if (flags & kHasEncoders) {
    w.U64(params.mention_encoder.buckets);
    w.U64(params.mention_encoder.dim);
    for (const EncoderParams *enc :
         {&params.mention_encoder, &params.entity_encoder}) {
      w.Array(enc->embedding);
      WriteLinear(enc->projection, w);
    }
  }
  if (params.typing) {
    const TypingHeads &h = *params.typing;
    w.U64(h.fine_count());
    WriteLinear(h.mention_coarse, w);
    WriteLinear(h.entity_coarse, w);
    WriteLinear(h.mention_fine, w);
    WriteLinear(h.entity_fine, w);
  }
  if (params.joint) {
    w.U64(params.joint->buckets);
    w.Array(params.joint->weight);
    w.F64(params.joint->bias);
  }
  return w.Take();
}

ModelParams DeserializeModel(std::string_view bytes) {
  Reader r(bytes);
  char magic[4];
  r.Bytes(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw Error(ErrorCode::kInvalidInput, "not a model file");
  }
  uint32_t version = r.U32();
  if (version != kVersion) {
    throw Error(ErrorCode::kUnsupported,
                "model file version " + std::to_string(version));
  }
  uint32_t kind = r.U32();
  if (kind > static_cast<uint32_t>(ModelKind::kJointScorer)) {
    throw Error(ErrorCode::kInvalidInput, "model file has an unknown kind");
  }
  ModelParams p;
  p.kind = static_cast<ModelKind>(kind);
  p.scale = r.F64();
  uint32_t flags = r.U32();
  if (flags & ~(kHasEncoders | kHasTyping | kHasJoint)) {
    throw Error(ErrorCode::kInvalidInput, "model file has unknown flags");
  }
  if (flags & kHasEncoders) {
    uint64_t buckets = Dim(r);
    uint64_t dim = Dim(r);
    if (buckets * dim > kMaxElements) {
      throw Error(ErrorCode::kInvalidInput, "model file too large");
    }
    for (EncoderParams *enc : {&p.mention_encoder, &p.entity_encoder}) {
      *enc = EncoderParams(buckets, dim);
      r.Array(&enc->embedding);
      ReadLinear(&enc->projection, r);
    }
  }
  if (flags & kHasTyping) {
    if (!(flags & kHasEncoders)) {
      throw Error(ErrorCode::kInvalidInput, "typing heads without encoders");
    }
    uint64_t fine = Dim(r);
    size_t dim = p.mention_encoder.dim;
    TypingHeads h{Linear(dim, kNumCoarseTypes), Linear(dim, kNumCoarseTypes),
                  Linear(dim, fine), Linear(dim, fine)};
    ReadLinear(&h.mention_coarse, r);
    ReadLinear(&h.entity_coarse, r);
    ReadLinear(&h.mention_fine, r);
    ReadLinear(&h.entity_fine, r);
    p.typing = std::move(h);
  }
  if (flags & kHasJoint) {
    JointScorerParams joint;
    joint.buckets = Dim(r);
    joint.weight.assign(joint.buckets + kInteractionFeatures, 0.0);
    r.Array(&joint.weight);
    joint.bias = r.F64();
    p.joint = std::move(joint);
  }
  if (!r.AtEnd()) {
    throw Error(ErrorCode::kInvalidInput, "trailing bytes in model file");
  }
  return p;
}

void SaveModel(const ModelParams &params, const std::filesystem::path &path) {
  WriteFile(path, SerializeModel(params));
}

ModelParams LoadModel(const std::filesystem::path &path) {
  return DeserializeModel(ReadFile(path));
}

}  // namespace elkit
