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

#include "elkit/model.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "elkit/errors.h"
#include "elkit/random.h"
#include "elkit/utf8.h"

namespace elkit {

namespace {

constexpr uint64_t kJointSalt = 0x6a6f696e74ULL;  // "joint"

double Sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double Softplus(double z) {
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double LogSumExp(std::span<const double> x) {
  double m = *std::max_element(x.begin(), x.end());
  double s = 0.0;
  for (double v : x) s += std::exp(v - m);
  return m + std::log(s);
}

std::vector<double> Softmax(std::span<const double> x) {
  double m = *std::max_element(x.begin(), x.end());
  std::vector<double> p(x.size());
  double s = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    p[i] = std::exp(x[i] - m);
    s += p[i];
  }
  for (double &v : p) v /= s;
  return p;
}

double Dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double Norm(std::span<const double> a) { return std::sqrt(Dot(a, a)); }

size_t OverlapBucket(size_t count) {
  if (count == 0) return 0;
  size_t b = 1;
  while (count > 1 && b < kOverlapBuckets - 1) {
    count >>= 1;
    ++b;
  }
  return b;
}

void AppendBlocks(EncoderParams &enc, std::vector<std::span<double>> *out) {
  out->emplace_back(enc.embedding);
  out->emplace_back(enc.projection.weight);
  out->emplace_back(enc.projection.bias);
}

void AppendBlocks(Linear &l, std::vector<std::span<double>> *out) {
  out->emplace_back(l.weight);
  out->emplace_back(l.bias);
}

void FillNormal(std::span<double> values, double stddev, SplitMix64 *rng) {
  for (double &v : values) v = stddev * rng->Normal();
}

void RequireTyping(const ModelParams &params) {
  if (!params.typing) {
    throw Error(ErrorCode::kUnsupported, "model has no typing heads");
  }
}

}  // namespace

std::string_view ModelKindName(ModelKind kind) {
  switch (kind) {
    case ModelKind::kDualEncoder: return "de";
    case ModelKind::kTypedDualEncoder: return "tyde";
    case ModelKind::kJointScorer: return "ca";
  }
  return "de";
}

std::optional<ModelKind> ParseModelKind(std::string_view name) {
  if (name == "de") return ModelKind::kDualEncoder;
  if (name == "tyde") return ModelKind::kTypedDualEncoder;
  if (name == "ca") return ModelKind::kJointScorer;
  return std::nullopt;
}

std::vector<std::span<double>> ModelParams::Blocks() {
  std::vector<std::span<double>> blocks;
  AppendBlocks(mention_encoder, &blocks);
  AppendBlocks(entity_encoder, &blocks);
  if (typing) {
    AppendBlocks(typing->mention_coarse, &blocks);
    AppendBlocks(typing->entity_coarse, &blocks);
    AppendBlocks(typing->mention_fine, &blocks);
    AppendBlocks(typing->entity_fine, &blocks);
  }
  if (joint) {
    blocks.emplace_back(joint->weight);
    blocks.emplace_back(&joint->bias, 1);
  }
  return blocks;
}

std::vector<std::span<const double>> ModelParams::Blocks() const {
  auto mutable_blocks = const_cast<ModelParams *>(this)->Blocks();
  return {mutable_blocks.begin(), mutable_blocks.end()};
}

size_t ModelParams::ParameterCount() const {
  size_t n = 0;
  for (auto block : Blocks()) n += block.size();
  return n;
}

ModelParams ZeroModel(const ModelShape &shape) {
  if (shape.kind != ModelKind::kJointScorer && shape.dim < 2) {
    throw Error(ErrorCode::kInvalidArgument, "embedding dimension must be >= 2");
  }
  if (shape.buckets == 0) {
    throw Error(ErrorCode::kInvalidArgument, "bucket count must be positive");
  }
  ModelParams p;
  p.kind = shape.kind;
  p.scale = shape.scale;
  if (shape.kind == ModelKind::kJointScorer) {
    JointScorerParams joint;
    joint.buckets = shape.buckets;
    joint.weight.assign(shape.buckets + kInteractionFeatures, 0.0);
    p.joint = std::move(joint);
    return p;
  }
  p.mention_encoder = EncoderParams(shape.buckets, shape.dim);
  p.entity_encoder = EncoderParams(shape.buckets, shape.dim);
  if (shape.kind == ModelKind::kTypedDualEncoder) {
    if (shape.fine_count == 0) {
      throw Error(ErrorCode::kInvalidArgument,
                  "typed model needs a non-empty fine type vocabulary");
    }
    p.typing = TypingHeads{Linear(shape.dim, kNumCoarseTypes),
                           Linear(shape.dim, kNumCoarseTypes),
                           Linear(shape.dim, shape.fine_count),
                           Linear(shape.dim, shape.fine_count)};
  }
  return p;
}

ModelParams ZerosLike(const ModelParams &params) {
  ModelParams z = params;
  for (auto block : z.Blocks()) std::fill(block.begin(), block.end(), 0.0);
  return z;
}

ModelParams InitModel(const ModelShape &shape, uint64_t seed) {
  ModelParams p = ZeroModel(shape);
  if (shape.kind == ModelKind::kJointScorer) return p;
  SplitMix64 rng(seed);
  const double proj_std = 1.0 / std::sqrt(static_cast<double>(shape.dim));
  for (EncoderParams *enc : {&p.mention_encoder, &p.entity_encoder}) {
    FillNormal(enc->embedding, 0.1, &rng);
    FillNormal(enc->projection.weight, proj_std, &rng);
  }
  if (p.typing) {
    for (Linear *head : {&p.typing->mention_coarse, &p.typing->entity_coarse,
                         &p.typing->mention_fine, &p.typing->entity_fine}) {
      FillNormal(head->weight, proj_std, &rng);
    }
  }
  return p;
}

PairExample MakePairExample(const ModelParams &params, const MentionInput &m,
                            const EntityInput &e, EntityId id,
                            CoarseType coarse, std::vector<size_t> fine) {
  PairExample ex;
  ex.mention = MentionFeatures(
      m, static_cast<uint32_t>(params.mention_encoder.buckets));
  ex.entity =
      EntityFeatures(e, static_cast<uint32_t>(params.entity_encoder.buckets));
  ex.entity_id = id;
  ex.coarse = coarse;
  ex.fine = std::move(fine);
  return ex;
}

JointExample MakeJointExample(size_t buckets, const MentionInput &m,
                              const EntityInput &e, double label) {
  JointExample ex;
  ex.label = label;
  std::u32string joint =
      DecodeUtf8(m.text() + std::string(kSeparator) + e.text());
  AppendNgramFeatures(joint, kJointSalt, static_cast<uint32_t>(buckets),
                      &ex.ngrams);

  std::u32string entity_text = DecodeUtf8(e.title() + e.description());
  std::vector<uint64_t> span_grams = NgramSet(DecodeUtf8(m.mention()));
  std::vector<uint64_t> entity_grams = NgramSet(entity_text);
  ex.interaction[OverlapBucket(CountShared(span_grams, entity_grams))] = true;

  // Context overlap uses bigrams and trigrams only; unigram overlap is
  // dominated by common characters.
  auto long_grams = [](std::u32string_view text) {
    std::vector<uint64_t> grams = NgramSet(text);
    std::vector<uint64_t> unigrams;
    for (size_t i = 0; i < text.size(); ++i) {
      unigrams.push_back(HashNgram(text.substr(i, 1), 1));
    }
    std::sort(unigrams.begin(), unigrams.end());
    std::vector<uint64_t> out;
    std::set_difference(grams.begin(), grams.end(), unigrams.begin(),
                        unigrams.end(), std::back_inserter(out));
    return out;
  };
  std::vector<uint64_t> context_grams =
      long_grams(DecodeUtf8(m.left() + " " + m.right()));
  std::vector<uint64_t> description_grams =
      long_grams(DecodeUtf8(e.description()));
  ex.interaction[kOverlapBuckets +
                 OverlapBucket(CountShared(context_grams, description_grams))] =
      true;
  return ex;
}

std::vector<double> EncodeMention(const ModelParams &params,
                                  const MentionInput &m) {
  auto features = MentionFeatures(
      m, static_cast<uint32_t>(params.mention_encoder.buckets));
  return EncodeForward(params.mention_encoder, features).output;
}

std::vector<double> EncodeEntity(const ModelParams &params,
                                 const EntityInput &e) {
  auto features =
      EntityFeatures(e, static_cast<uint32_t>(params.entity_encoder.buckets));
  return EncodeForward(params.entity_encoder, features).output;
}

double Sim(std::span<const double> u, std::span<const double> v,
           bool *degenerate) {
  double nu = Norm(u), nv = Norm(v);
  if (degenerate) *degenerate = (nu == 0.0 || nv == 0.0);
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return std::clamp(Dot(u, v) / (nu * nv), -1.0, 1.0);
}

double SoftmaxCrossEntropy(std::span<const double> logits, size_t target) {
  return LogSumExp(logits) - logits[target];
}

namespace {

// Shared forward/backward of the DE and TyDE objectives.
double DualEncoderObjective(const ModelParams &params,
                            std::span<const PairExample> batch,
                            const LossWeights *weights, ModelParams *grad) {
  const size_t n = batch.size();
  if (n == 0) throw Error(ErrorCode::kInvalidBatch, "empty batch");
  {
    std::set<EntityId> ids;
    for (const PairExample &ex : batch) {
      if (!ids.insert(ex.entity_id).second) {
        throw Error(ErrorCode::kInvalidBatch,
                    "entity " + ex.entity_id.str() + " repeated in batch");
      }
    }
  }
  if (weights) {
    RequireTyping(params);
    const size_t fine_count = params.typing->fine_count();
    for (const PairExample &ex : batch) {
      for (size_t f : ex.fine) {
        if (f >= fine_count) {
          throw Error(ErrorCode::kInvalidLabels,
                      "fine type index " + std::to_string(f) +
                          " outside vocabulary of " +
                          std::to_string(fine_count));
        }
      }
    }
  }

  const size_t d = params.mention_encoder.dim;
  std::vector<EncoderCache> mcache(n), ecache(n);
  std::vector<double> mnorm(n), enorm(n);
  for (size_t i = 0; i < n; ++i) {
    mcache[i] = EncodeForward(params.mention_encoder, batch[i].mention);
    ecache[i] = EncodeForward(params.entity_encoder, batch[i].entity);
    mnorm[i] = Norm(mcache[i].output);
    enorm[i] = Norm(ecache[i].output);
  }

  // cos[i][j] between mention i and entity j.
  std::vector<double> cosine(n * n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      if (mnorm[i] == 0.0 || enorm[j] == 0.0) continue;
      cosine[i * n + j] =
          Dot(mcache[i].output, ecache[j].output) / (mnorm[i] * enorm[j]);
    }
  }

  const double inv_n = 1.0 / static_cast<double>(n);
  double de_loss = 0.0;
  std::vector<double> d_cos(n * n, 0.0);
  std::vector<double> logits(n);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) logits[j] = params.scale * cosine[i * n + j];
    de_loss += LogSumExp(logits) - logits[i];
    if (grad) {
      std::vector<double> p = Softmax(logits);
      for (size_t j = 0; j < n; ++j) {
        d_cos[i * n + j] =
            params.scale * inv_n * (p[j] - (i == j ? 1.0 : 0.0));
      }
    }
  }
  de_loss *= inv_n;

  std::vector<std::vector<double>> d_m, d_e;
  if (grad) {
    d_m.assign(n, std::vector<double>(d, 0.0));
    d_e.assign(n, std::vector<double>(d, 0.0));
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = 0; j < n; ++j) {
        double g = d_cos[i * n + j];
        if (g == 0.0 || mnorm[i] == 0.0 || enorm[j] == 0.0) continue;
        const double c = cosine[i * n + j];
        const double inv_uv = 1.0 / (mnorm[i] * enorm[j]);
        const double inv_uu = 1.0 / (mnorm[i] * mnorm[i]);
        const double inv_vv = 1.0 / (enorm[j] * enorm[j]);
        const auto &u = mcache[i].output;
        const auto &v = ecache[j].output;
        for (size_t k = 0; k < d; ++k) {
          d_m[i][k] += g * (v[k] * inv_uv - c * u[k] * inv_uu);
          d_e[j][k] += g * (u[k] * inv_uv - c * v[k] * inv_vv);
        }
      }
    }
  }

  double loss = de_loss;
  if (weights) {
    const TypingHeads &heads = *params.typing;
    const size_t fine_count = heads.fine_count();
    const double inv_f = 1.0 / static_cast<double>(fine_count);
    double ce_mention = 0.0, ce_entity = 0.0;
    double bce_mention = 0.0, bce_entity = 0.0;

    auto coarse_side = [&](const Linear &head, const std::vector<double> &x,
                           size_t target, Linear *head_grad,
                           std::vector<double> *dx) {
      std::vector<double> z = head.Apply(x);
      double ce = SoftmaxCrossEntropy(z, target);
      if (head_grad) {
        std::vector<double> dz = Softmax(z);
        dz[target] -= 1.0;
        for (double &v : dz) v *= weights->coarse * inv_n;
        std::vector<double> back = head.Backward(x, dz, head_grad);
        for (size_t k = 0; k < back.size(); ++k) (*dx)[k] += back[k];
      }
      return ce;
    };
    auto fine_side = [&](const Linear &head, const std::vector<double> &x,
                         const std::vector<size_t> &positives,
                         Linear *head_grad, std::vector<double> *dx) {
      std::vector<double> z = head.Apply(x);
      std::vector<double> y(fine_count, 0.0);
      for (size_t f : positives) y[f] = 1.0;
      double bce = 0.0;
      for (size_t j = 0; j < fine_count; ++j) {
        bce += Softplus(z[j]) - z[j] * y[j];
      }
      if (head_grad) {
        std::vector<double> dz(fine_count);
        for (size_t j = 0; j < fine_count; ++j) {
          dz[j] = (Sigmoid(z[j]) - y[j]) * weights->fine * inv_n * inv_f;
        }
        std::vector<double> back = head.Backward(x, dz, head_grad);
        for (size_t k = 0; k < back.size(); ++k) (*dx)[k] += back[k];
      }
      return bce * inv_f;
    };

    for (size_t i = 0; i < n; ++i) {
      const size_t target = static_cast<size_t>(batch[i].coarse);
      TypingHeads *hg = grad ? &*grad->typing : nullptr;
      ce_mention += coarse_side(heads.mention_coarse, mcache[i].output, target,
                                hg ? &hg->mention_coarse : nullptr,
                                grad ? &d_m[i] : nullptr);
      ce_entity += coarse_side(heads.entity_coarse, ecache[i].output, target,
                               hg ? &hg->entity_coarse : nullptr,
                               grad ? &d_e[i] : nullptr);
      bce_mention += fine_side(heads.mention_fine, mcache[i].output,
                               batch[i].fine, hg ? &hg->mention_fine : nullptr,
                               grad ? &d_m[i] : nullptr);
      bce_entity += fine_side(heads.entity_fine, ecache[i].output,
                              batch[i].fine, hg ? &hg->entity_fine : nullptr,
                              grad ? &d_e[i] : nullptr);
    }
    loss = de_loss + weights->coarse * (ce_mention * inv_n + ce_entity * inv_n) +
           weights->fine * (bce_mention * inv_n + bce_entity * inv_n);
  }

  if (grad) {
    for (size_t i = 0; i < n; ++i) {
      EncodeBackward(params.mention_encoder, batch[i].mention, mcache[i],
                     d_m[i], &grad->mention_encoder);
      EncodeBackward(params.entity_encoder, batch[i].entity, ecache[i], d_e[i],
                     &grad->entity_encoder);
    }
  }
  return loss;
}

double JointLogit(const JointScorerParams &joint, const JointExample &ex) {
  double z = joint.bias;
  if (!ex.ngrams.empty()) {
    double s = 0.0;
    for (uint32_t f : ex.ngrams) s += joint.weight[f];
    z += s / static_cast<double>(ex.ngrams.size());
  }
  for (size_t i = 0; i < kInteractionFeatures; ++i) {
    if (ex.interaction[i]) z += joint.weight[joint.buckets + i];
  }
  return z;
}

}  // namespace

double DeBatchLoss(const ModelParams &params,
                   std::span<const PairExample> batch, ModelParams *grad) {
  return DualEncoderObjective(params, batch, nullptr, grad);
}

double TydeLoss(const ModelParams &params, std::span<const PairExample> batch,
                const LossWeights &weights, ModelParams *grad) {
  return DualEncoderObjective(params, batch, &weights, grad);
}

double JointBceLoss(const ModelParams &params,
                    std::span<const JointExample> batch, ModelParams *grad) {
  if (!params.joint) {
    throw Error(ErrorCode::kUnsupported, "model has no joint scorer");
  }
  if (batch.empty()) throw Error(ErrorCode::kInvalidBatch, "empty batch");
  const JointScorerParams &joint = *params.joint;
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  for (const JointExample &ex : batch) {
    double z = JointLogit(joint, ex);
    loss += Softplus(z) - ex.label * z;
    if (grad) {
      JointScorerParams &g = *grad->joint;
      double dz = (Sigmoid(z) - ex.label) * inv_n;
      g.bias += dz;
      if (!ex.ngrams.empty()) {
        double share = dz / static_cast<double>(ex.ngrams.size());
        for (uint32_t f : ex.ngrams) g.weight[f] += share;
      }
      for (size_t i = 0; i < kInteractionFeatures; ++i) {
        if (ex.interaction[i]) g.weight[joint.buckets + i] += dz;
      }
    }
  }
  return loss * inv_n;
}

TypingScores ComputeTypingScores(const ModelParams &params,
                                 std::span<const double> mention_vec,
                                 std::span<const double> entity_vec,
                                 TypingMode mode) {
  RequireTyping(params);
  const TypingHeads &h = *params.typing;
  std::vector<double> mc = h.mention_coarse.Apply(mention_vec);
  std::vector<double> ec = h.entity_coarse.Apply(entity_vec);
  std::vector<double> mf = h.mention_fine.Apply(mention_vec);
  std::vector<double> ef = h.entity_fine.Apply(entity_vec);
  TypingScores s;
  if (mode == TypingMode::kRaw) {
    s.coarse = Dot(mc, ec);
    s.fine = Dot(mf, ef);
    return s;
  }
  s.coarse = Dot(Softmax(mc), Softmax(ec));
  double acc = 0.0;
  for (size_t j = 0; j < mf.size(); ++j) acc += Sigmoid(mf[j]) * Sigmoid(ef[j]);
  s.fine = acc / static_cast<double>(mf.size());
  return s;
}

TypingScores ComputeTypingScores(const ModelParams &params,
                                 const MentionInput &m, const EntityInput &e,
                                 TypingMode mode) {
  return ComputeTypingScores(params, EncodeMention(params, m),
                             EncodeEntity(params, e), mode);
}

CoarseType PredictMentionCoarse(const ModelParams &params,
                                std::span<const double> mention_vec) {
  RequireTyping(params);
  std::vector<double> z = params.typing->mention_coarse.Apply(mention_vec);
  size_t best = std::max_element(z.begin(), z.end()) - z.begin();
  return static_cast<CoarseType>(best);
}

double JointScore(const ModelParams &params, const JointExample &example) {
  if (!params.joint) {
    throw Error(ErrorCode::kUnsupported, "model has no joint scorer");
  }
  return Sigmoid(JointLogit(*params.joint, example));
}

double JointScore(const ModelParams &params, const MentionInput &m,
                  const EntityInput &e) {
  if (!params.joint) {
    throw Error(ErrorCode::kUnsupported, "model has no joint scorer");
  }
  return JointScore(params, MakeJointExample(params.joint->buckets, m, e));
}

std::string_view StrategyName(Strategy s) {
  switch (s) {
    case Strategy::kSimOnly: return "sim";
    case Strategy::kCoarse: return "coarse";
    case Strategy::kFine: return "fine";
    case Strategy::kBoth: return "both";
  }
  return "sim";
}

std::optional<Strategy> ParseStrategy(std::string_view name) {
  for (Strategy s : {Strategy::kSimOnly, Strategy::kCoarse, Strategy::kFine,
                     Strategy::kBoth}) {
    if (StrategyName(s) == name) return s;
  }
  return std::nullopt;
}

double CombineScore(const ScoreBreakdown &b, Strategy strategy) {
  double score = b.prior * b.sim;
  if (strategy == Strategy::kCoarse || strategy == Strategy::kBoth) {
    if (!b.coarse) {
      throw Error(ErrorCode::kUnsupported, "strategy needs a coarse score");
    }
    score *= *b.coarse;
  }
  if (strategy == Strategy::kFine || strategy == Strategy::kBoth) {
    if (!b.fine) {
      throw Error(ErrorCode::kUnsupported, "strategy needs a fine score");
    }
    score *= *b.fine;
  }
  return score;
}

void SortScored(std::vector<ScoredCandidate> *scored) {
  std::stable_sort(scored->begin(), scored->end(),
                   [](const ScoredCandidate &a, const ScoredCandidate &b) {
                     if (a.score != b.score) return a.score > b.score;
                     return a.entity < b.entity;
                   });
}

Label Predict(std::span<const ScoredCandidate> scored, const NilConfig &config,
              CoarseType nil_type) {
  if (scored.empty()) return Label::Nil(nil_type);
  const ScoredCandidate *best = &scored[0];
  for (const ScoredCandidate &c : scored) {
    if (c.score > best->score ||
        (c.score == best->score && c.entity < best->entity)) {
      best = &c;
    }
  }
  if (std::clamp(best->score, 0.0, 1.0) < config.threshold) {
    return Label::Nil(nil_type);
  }
  return Label::Entity(best->entity);
}

}  // namespace elkit
