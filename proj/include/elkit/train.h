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

#ifndef ELKIT_TRAIN_H_
#define ELKIT_TRAIN_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "elkit/alias_table.h"
#include "elkit/kb.h"
#include "elkit/matching.h"
#include "elkit/model.h"
#include "elkit/random.h"
#include "elkit/typing.h"

namespace elkit {

struct TrainConfig {
  ModelKind kind = ModelKind::kTypedDualEncoder;
  size_t dim = 256;
  size_t buckets = 1 << 14;
  size_t fine_count = 0;  // 0: take the vocabulary size from the labels
  size_t batch_size = 64;
  size_t steps = 1000;
  double learning_rate = 2e-5;
  double warmup_fraction = 0.1;
  uint64_t seed = 0;
  double scale = 20.0;
  double lambda_coarse = 1.0;
  double lambda_fine = 1.0;
  double negative_keep_rate = 0.2;
  double nil_threshold = 0.1;
  size_t k = 10;  // candidates per mention for negative mining

  // Throws kInvalidArgument on out-of-range values.
  void Validate() const;
};

// Linear warmup 0 -> lr over ceil(warmup_fraction * steps) steps, then
// linear decay to 0 at `steps`.
class LrSchedule {
 public:
  LrSchedule(double lr, double warmup_fraction, size_t steps);
  double At(size_t step) const;
  size_t warmup_steps() const { return warmup_; }

 private:
  double lr_;
  size_t steps_;
  size_t warmup_;
};

class Adam {
 public:
  explicit Adam(const ModelParams &shape, double beta1 = 0.9,
                double beta2 = 0.999, double epsilon = 1e-8);

  // One bias-corrected update of every parameter.
  void Step(ModelParams *params, const ModelParams &grad, double lr);

 private:
  double beta1_, beta2_, epsilon_;
  uint64_t t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

// Called after each step with the step index and the batch loss.
using StepCallback = std::function<void(size_t step, double loss)>;

// Deterministic batches of distinct entities from a stream of seeded
// permutations.
class EntityBatcher {
 public:
  EntityBatcher(std::span<const PairExample> examples, size_t batch_size,
                uint64_t seed);
  std::vector<PairExample> Next();

 private:
  void Refill();

  std::span<const PairExample> examples_;
  size_t batch_size_;
  SplitMix64 rng_;
  std::vector<size_t> queue_;
  size_t head_ = 0;
};

// Trains DE or TyDE (per cfg.kind) on positive pairs, starting from
// `init`. Throws kNumeric with the step index if the loss is not finite.
ModelParams TrainDualEncoder(const TrainConfig &cfg,
                             std::span<const PairExample> examples,
                             ModelParams init,
                             const StepCallback &callback = {});

// Trains the joint scorer with mean BCE over shuffled minibatches.
ModelParams TrainJointScorer(const TrainConfig &cfg,
                             std::span<const JointExample> examples,
                             ModelParams init,
                             const StepCallback &callback = {});

struct TrainingPair {
  size_t mention = 0;  // index into the gold mention list
  EntityId entity;
  int label = 0;

  friend bool operator==(const TrainingPair &, const TrainingPair &) = default;
};

// Positives (m, gold, 1), then each top-k candidate other than the gold as
// (m, c, 0) kept with probability cfg.negative_keep_rate. Mentions without
// an in-KB gold are skipped.
std::vector<TrainingPair> MineTrainingPairs(
    const AliasTable &at, std::span<const MentionCandidate> gold_mentions,
    const TrainConfig &cfg);

std::string SerializeTrainingPairs(std::span<const TrainingPair> pairs);

struct TrainSummary {
  size_t examples = 0;
  size_t skipped = 0;  // gold missing from the KB or labels
  double final_loss = 0.0;
};

// End-to-end training from gold mentions. DE/TyDE use positives only;
// the joint scorer uses mined pairs and needs `at`. Typed models need
// `labels` and the vocabulary size in cfg.fine_count or from `vocab_size`.
ModelParams Train(const TrainConfig &cfg,
                  std::span<const MentionCandidate> gold_mentions,
                  const KbSnapshot &kb, const TypeLabels *labels,
                  size_t vocab_size, const AliasTable *at,
                  TrainSummary *summary = nullptr,
                  const StepCallback &callback = {});

using LossFunction =
    std::function<double(const ModelParams &params, ModelParams *grad)>;

struct GradCheckResult {
  double max_relative_error = 0.0;
  size_t checked = 0;
  size_t skipped = 0;
};

inline constexpr double kGradCheckSkip = 1e-7;

// Central differences on `coordinates` sampled coordinates, half among
// those with a nonzero analytic gradient. Coordinates where both sides are
// below kGradCheckSkip in magnitude are skipped.
GradCheckResult GradCheck(const ModelParams &params, const LossFunction &loss,
                          uint64_t seed, size_t coordinates = 100,
                          double epsilon = 1e-5);

// Random model and batch of the given kind with a loss closure, for
// gradient checks. Parameters, including biases, are all nonzero.
struct GradCheckSetup {
  ModelParams params;
  LossFunction loss;
};
GradCheckSetup SyntheticGradCheck(ModelKind kind, size_t dim, size_t buckets,
                                  size_t batch_size, size_t fine_count,
                                  uint64_t seed);

struct LinkerConfig {
  Strategy strategy = Strategy::kSimOnly;
  TypingMode typing_mode = TypingMode::kNormalized;
  NilConfig nil;
};

// Candidate scoring and prediction over immutable parameters.
class Linker {
 public:
  // `nil_typer` supplies the mention coarse head for NIL typing when the
  // scoring model has none. Throws kUnsupported for a typed strategy on a
  // model without typing heads.
  Linker(const ModelParams &params, const KbSnapshot &kb,
         LinkerConfig config = {}, const ModelParams *nil_typer = nullptr);

  std::vector<ScoreBreakdown> Breakdowns(const MentionCandidate &m) const;
  // Sorted by score descending, ties by ascending id.
  std::vector<ScoredCandidate> Rank(const MentionCandidate &m) const;
  Label Predict(const MentionCandidate &m) const;
  CoarseType NilType(const MentionCandidate &m) const;

 private:
  const ModelParams &params_;
  const KbSnapshot &kb_;
  LinkerConfig config_;
  const ModelParams *nil_typer_;
};

}  // namespace elkit

#endif  // ELKIT_TRAIN_H_
