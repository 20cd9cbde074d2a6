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

#ifndef ELKIT_MODEL_H_
#define ELKIT_MODEL_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "elkit/encoder.h"
#include "elkit/label.h"
#include "elkit/typing.h"

namespace elkit {

enum class ModelKind : uint32_t {
  kDualEncoder = 0,       // DE
  kTypedDualEncoder = 1,  // TyDE
  kJointScorer = 2,       // CA
};

std::string_view ModelKindName(ModelKind kind);  // "de", "tyde", "ca"
std::optional<ModelKind> ParseModelKind(std::string_view name);

// Coarse and fine typing heads over encoder outputs, mention side (sigma)
// and entity side (rho).
struct TypingHeads {
  Linear mention_coarse;
  Linear entity_coarse;
  Linear mention_fine;
  Linear entity_fine;

  size_t fine_count() const { return mention_fine.out; }
  friend bool operator==(const TypingHeads &, const TypingHeads &) = default;
};

// Interaction buckets of the joint scorer: span/entity overlap and
// context/description overlap, 8 buckets each.
inline constexpr size_t kOverlapBuckets = 8;
inline constexpr size_t kInteractionFeatures = 2 * kOverlapBuckets;

// Joint (cross) scorer: logistic regression over the mean of hashed n-gram
// weights of context [SEP] title [SEP] description plus interaction
// indicators.
struct JointScorerParams {
  size_t buckets = 0;
  std::vector<double> weight;  // buckets + kInteractionFeatures
  double bias = 0.0;

  friend bool operator==(const JointScorerParams &,
                         const JointScorerParams &) = default;
};

struct ModelParams {
  ModelKind kind = ModelKind::kDualEncoder;
  double scale = 20.0;  // softmax temperature on cosine logits
  EncoderParams mention_encoder;
  EncoderParams entity_encoder;
  std::optional<TypingHeads> typing;
  std::optional<JointScorerParams> joint;

  size_t dim() const { return mention_encoder.dim; }

  // Every parameter array in a fixed order (for optimizers and checks).
  std::vector<std::span<double>> Blocks();
  std::vector<std::span<const double>> Blocks() const;
  size_t ParameterCount() const;

  friend bool operator==(const ModelParams &, const ModelParams &) = default;
};

struct ModelShape {
  ModelKind kind = ModelKind::kDualEncoder;
  size_t dim = 256;
  size_t buckets = 1 << 14;
  size_t fine_count = 0;  // TyDE only
  double scale = 20.0;
};

// All parameters zero.
ModelParams ZeroModel(const ModelShape &shape);
// Same shapes, zero values.
ModelParams ZerosLike(const ModelParams &params);
// Seeded Gaussian initialization; biases zero.
ModelParams InitModel(const ModelShape &shape, uint64_t seed);

// Featurized training/eval example for the dual encoders.
struct PairExample {
  std::vector<uint32_t> mention;
  std::vector<uint32_t> entity;
  EntityId entity_id;
  CoarseType coarse = CoarseType::kOther;
  std::vector<size_t> fine;  // TopSnak ranks
};

// Featurized (mention, entity, label) example for the joint scorer.
struct JointExample {
  std::vector<uint32_t> ngrams;
  std::array<bool, kInteractionFeatures> interaction{};
  double label = 0.0;
};

PairExample MakePairExample(const ModelParams &params, const MentionInput &m,
                            const EntityInput &e, EntityId id = EntityId(),
                            CoarseType coarse = CoarseType::kOther,
                            std::vector<size_t> fine = {});
JointExample MakeJointExample(size_t buckets, const MentionInput &m,
                              const EntityInput &e, double label = 0.0);

// phi(m) and psi(e).
std::vector<double> EncodeMention(const ModelParams &params,
                                  const MentionInput &m);
std::vector<double> EncodeEntity(const ModelParams &params,
                                 const EntityInput &e);

// Cosine similarity. A zero vector gives 0 and sets *degenerate.
double Sim(std::span<const double> u, std::span<const double> v,
           bool *degenerate = nullptr);

// Mean over the batch of -log softmax(scale * cos)[i][i]. Throws
// kInvalidBatch on an empty batch or repeated entity ids. When `grad` is
// set, gradients are accumulated into it.
double DeBatchLoss(const ModelParams &params,
                   std::span<const PairExample> batch,
                   ModelParams *grad = nullptr);

struct LossWeights {
  double coarse = 1.0;
  double fine = 1.0;
};

// DE loss + coarse * (CE_mention + CE_entity) + fine * (BCE_mention +
// BCE_entity); each term is a batch mean, BCE also averaged over fine types.
// Both sides are supervised with the gold entity's labels.
double TydeLoss(const ModelParams &params, std::span<const PairExample> batch,
                const LossWeights &weights, ModelParams *grad = nullptr);

// Mean binary cross-entropy of the joint scorer.
double JointBceLoss(const ModelParams &params,
                    std::span<const JointExample> batch,
                    ModelParams *grad = nullptr);

// Softmax cross-entropy of logits against a class (for tests and CE
// oracles).
double SoftmaxCrossEntropy(std::span<const double> logits, size_t target);

enum class TypingMode { kNormalized, kRaw };

struct TypingScores {
  double coarse = 0.0;
  double fine = 0.0;
};

// Normalized: s_c = softmax(mention coarse) . softmax(entity coarse),
// s_f = mean_j sigmoid(mention fine)_j * sigmoid(entity fine)_j.
// Raw: plain dot products of the head outputs.
// Inputs are encoder outputs. Throws kUnsupported without typing heads.
TypingScores ComputeTypingScores(const ModelParams &params,
                                 std::span<const double> mention_vec,
                                 std::span<const double> entity_vec,
                                 TypingMode mode = TypingMode::kNormalized);
TypingScores ComputeTypingScores(const ModelParams &params,
                                 const MentionInput &m, const EntityInput &e,
                                 TypingMode mode = TypingMode::kNormalized);

// Argmax of the mention-side coarse head.
CoarseType PredictMentionCoarse(const ModelParams &params,
                                std::span<const double> mention_vec);

// Joint scorer probability. Throws kUnsupported without joint params.
double JointScore(const ModelParams &params, const JointExample &example);
double JointScore(const ModelParams &params, const MentionInput &m,
                  const EntityInput &e);

struct ScoreBreakdown {
  double prior = 0.0;
  double sim = 0.0;
  std::optional<double> coarse;  // s_c
  std::optional<double> fine;    // s_f
  double combined = 0.0;
};

enum class Strategy { kSimOnly, kCoarse, kFine, kBoth };

std::string_view StrategyName(Strategy s);  // "sim", "coarse", "fine", "both"
std::optional<Strategy> ParseStrategy(std::string_view name);

// prior * sim, times s_c and/or s_f per strategy. Throws kUnsupported when
// a needed typing score is missing.
double CombineScore(const ScoreBreakdown &b, Strategy strategy);

struct ScoredCandidate {
  EntityId entity;
  double score = 0.0;
};

struct NilConfig {
  double threshold = 0.1;
};

// Highest score wins (ties to the smaller id). NIL with `nil_type` when
// there are no candidates or the best score clamped to [0, 1] is below the
// threshold.
Label Predict(std::span<const ScoredCandidate> scored, const NilConfig &config,
              CoarseType nil_type);

// Sorts by score descending, ties by ascending id.
void SortScored(std::vector<ScoredCandidate> *scored);

// Model file: see model_io.cc for the byte layout.
void SaveModel(const ModelParams &params, const std::filesystem::path &path);
ModelParams LoadModel(const std::filesystem::path &path);
std::string SerializeModel(const ModelParams &params);
ModelParams DeserializeModel(std::string_view bytes);

}  // namespace elkit

#endif  // ELKIT_MODEL_H_
