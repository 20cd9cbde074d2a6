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

#include "elkit/train.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "elkit/errors.h"

namespace elkit {

namespace {

void Require(bool ok, const std::string &what) {
  if (!ok) throw Error(ErrorCode::kInvalidArgument, what);
}

EntityInput EntityInputFor(const KbSnapshot &kb, EntityId id) {
  if (const Entity *e = kb.Find(id)) return EntityInput::FromEntity(*e);
  return EntityInput(id.str(), "");
}

void CheckFinite(double loss, size_t step) {
  if (!std::isfinite(loss)) {
    throw Error(ErrorCode::kNumeric,
                "non-finite loss at step " + std::to_string(step));
  }
}

}  // namespace

void TrainConfig::Validate() const {
  Require(kind == ModelKind::kJointScorer || dim >= 2, "dim must be >= 2");
  Require(buckets > 0, "buckets must be positive");
  Require(batch_size > 0, "batch_size must be positive");
  Require(learning_rate > 0 && std::isfinite(learning_rate),
          "learning_rate must be positive");
  Require(warmup_fraction >= 0 && warmup_fraction <= 1,
          "warmup_fraction must be in [0, 1]");
  Require(scale > 0 && std::isfinite(scale), "scale must be positive");
  Require(lambda_coarse >= 0 && lambda_fine >= 0,
          "loss weights must be non-negative");
  Require(negative_keep_rate >= 0 && negative_keep_rate <= 1,
          "negative_keep_rate must be in [0, 1]");
  Require(nil_threshold >= 0 && nil_threshold <= 1,
          "nil_threshold must be in [0, 1]");
  Require(k > 0, "k must be positive");
}

LrSchedule::LrSchedule(double lr, double warmup_fraction, size_t steps)
    : lr_(lr),
      steps_(steps),
      warmup_(static_cast<size_t>(
          std::ceil(warmup_fraction * static_cast<double>(steps)))) {}

double LrSchedule::At(size_t step) const {
  if (step < warmup_) {
    return lr_ * static_cast<double>(step + 1) / static_cast<double>(warmup_);
  }
  if (step >= steps_) return 0.0;
  return lr_ * static_cast<double>(steps_ - step) /
         static_cast<double>(steps_ - warmup_);
}

Adam::Adam(const ModelParams &shape, double beta1, double beta2,
           double epsilon)
    : beta1_(beta1), beta2_(beta2), epsilon_(epsilon) {
  for (auto block : shape.Blocks()) {
    m_.emplace_back(block.size(), 0.0);
    v_.emplace_back(block.size(), 0.0);
  }
}

void Adam::Step(ModelParams *params, const ModelParams &grad, double lr) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  auto p_blocks = params->Blocks();
  auto g_blocks = grad.Blocks();
  for (size_t b = 0; b < p_blocks.size(); ++b) {
    std::span<double> p = p_blocks[b];
    std::span<const double> g = g_blocks[b];
    std::vector<double> &m = m_[b];
    std::vector<double> &v = v_[b];
    for (size_t i = 0; i < p.size(); ++i) {
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
      p[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + epsilon_);
    }
  }
}

EntityBatcher::EntityBatcher(std::span<const PairExample> examples,
                             size_t batch_size, uint64_t seed)
    : examples_(examples), batch_size_(batch_size), rng_(seed) {
  if (examples.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "no training examples");
  }
}

void EntityBatcher::Refill() {
  queue_.erase(queue_.begin(), queue_.begin() + head_);
  head_ = 0;
  std::vector<size_t> order(examples_.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng_.Shuffle(std::span<size_t>(order));
  queue_.insert(queue_.end(), order.begin(), order.end());
}

std::vector<PairExample> EntityBatcher::Next() {
  const size_t scan = 4 * batch_size_;
  if (queue_.size() - head_ < scan) Refill();
  std::vector<PairExample> batch;
  std::set<EntityId> used;
  std::vector<size_t> deferred;
  size_t scanned = 0;
  while (batch.size() < batch_size_ && scanned < scan &&
         head_ < queue_.size()) {
    size_t idx = queue_[head_++];
    ++scanned;
    if (used.insert(examples_[idx].entity_id).second) {
      batch.push_back(examples_[idx]);
    } else {
      deferred.push_back(idx);
    }
  }
  // Deferred examples go back to the front in their original order.
  for (auto it = deferred.rbegin(); it != deferred.rend(); ++it) {
    queue_[--head_] = *it;
  }
  return batch;
}

ModelParams TrainDualEncoder(const TrainConfig &cfg,
                             std::span<const PairExample> examples,
                             ModelParams init,
                             const StepCallback &callback) {
  cfg.Validate();
  if (cfg.steps == 0) return init;
  const bool typed = cfg.kind == ModelKind::kTypedDualEncoder;
  const LossWeights weights{cfg.lambda_coarse, cfg.lambda_fine};
  ModelParams params = std::move(init);
  Adam adam(params);
  LrSchedule schedule(cfg.learning_rate, cfg.warmup_fraction, cfg.steps);
  EntityBatcher batcher(examples, cfg.batch_size, cfg.seed);
  for (size_t step = 0; step < cfg.steps; ++step) {
    std::vector<PairExample> batch = batcher.Next();
    ModelParams grad = ZerosLike(params);
    double loss = typed ? TydeLoss(params, batch, weights, &grad)
                        : DeBatchLoss(params, batch, &grad);
    CheckFinite(loss, step);
    adam.Step(&params, grad, schedule.At(step));
    if (callback) callback(step, loss);
  }
  return params;
}

ModelParams TrainJointScorer(const TrainConfig &cfg,
                             std::span<const JointExample> examples,
                             ModelParams init,
                             const StepCallback &callback) {
  cfg.Validate();
  if (cfg.steps == 0) return init;
  if (examples.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "no training examples");
  }
  ModelParams params = std::move(init);
  Adam adam(params);
  LrSchedule schedule(cfg.learning_rate, cfg.warmup_fraction, cfg.steps);
  SplitMix64 rng(cfg.seed);
  std::vector<size_t> order;
  size_t pos = 0;
  for (size_t step = 0; step < cfg.steps; ++step) {
    std::vector<JointExample> batch;
    while (batch.size() < std::min(cfg.batch_size, examples.size())) {
      if (pos == order.size()) {
        order.resize(examples.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = i;
        rng.Shuffle(std::span<size_t>(order));
        pos = 0;
      }
      batch.push_back(examples[order[pos++]]);
    }
    ModelParams grad = ZerosLike(params);
    double loss = JointBceLoss(params, batch, &grad);
    CheckFinite(loss, step);
    adam.Step(&params, grad, schedule.At(step));
    if (callback) callback(step, loss);
  }
  return params;
}

std::vector<TrainingPair> MineTrainingPairs(
    const AliasTable &at, std::span<const MentionCandidate> gold_mentions,
    const TrainConfig &cfg) {
  SplitMix64 rng(cfg.seed);
  std::vector<TrainingPair> pairs;
  for (size_t i = 0; i < gold_mentions.size(); ++i) {
    const MentionCandidate &m = gold_mentions[i];
    if (!m.gold || m.gold->is_nil()) continue;
    const EntityId gold = m.gold->entity();
    pairs.push_back({i, gold, 1});
    for (const Candidate &c : at.TopK(m.span.surface, cfg.k)) {
      if (c.entity == gold) continue;
      if (rng.Bernoulli(cfg.negative_keep_rate)) {
        pairs.push_back({i, c.entity, 0});
      }
    }
  }
  return pairs;
}

std::string SerializeTrainingPairs(std::span<const TrainingPair> pairs) {
  std::ostringstream out;
  for (const TrainingPair &p : pairs) {
    out << p.mention << '\t' << p.entity.str() << '\t' << p.label << '\n';
  }
  return out.str();
}

ModelParams Train(const TrainConfig &cfg,
                  std::span<const MentionCandidate> gold_mentions,
                  const KbSnapshot &kb, const TypeLabels *labels,
                  size_t vocab_size, const AliasTable *at,
                  TrainSummary *summary, const StepCallback &callback) {
  cfg.Validate();
  SplitMix64 seeds(cfg.seed);
  const uint64_t init_seed = seeds.Next();
  TrainConfig run = cfg;
  run.seed = seeds.Next();

  ModelShape shape;
  shape.kind = cfg.kind;
  shape.dim = cfg.dim;
  shape.buckets = cfg.buckets;
  shape.scale = cfg.scale;
  TrainSummary local;
  double last_loss = 0.0;
  auto track = [&](size_t step, double loss) {
    last_loss = loss;
    if (callback) callback(step, loss);
  };

  ModelParams result;
  if (cfg.kind == ModelKind::kJointScorer) {
    if (at == nullptr) {
      throw Error(ErrorCode::kInvalidArgument,
                  "joint scorer training needs an alias table");
    }
    std::vector<TrainingPair> pairs = MineTrainingPairs(*at, gold_mentions, cfg);
    std::vector<JointExample> examples;
    for (const TrainingPair &p : pairs) {
      examples.push_back(MakeJointExample(
          cfg.buckets, MentionInput::FromCandidate(gold_mentions[p.mention]),
          EntityInputFor(kb, p.entity), static_cast<double>(p.label)));
    }
    local.examples = examples.size();
    result = TrainJointScorer(run, examples, InitModel(shape, init_seed), track);
  } else {
    const bool typed = cfg.kind == ModelKind::kTypedDualEncoder;
    if (typed) {
      if (labels == nullptr) {
        throw Error(ErrorCode::kInvalidArgument,
                    "typed training needs type labels");
      }
      shape.fine_count = cfg.fine_count ? cfg.fine_count : vocab_size;
    }
    ModelParams init = InitModel(shape, init_seed);
    std::vector<PairExample> examples;
    for (const MentionCandidate &m : gold_mentions) {
      if (!m.gold || m.gold->is_nil() || !kb.Find(m.gold->entity())) {
        ++local.skipped;
        continue;
      }
      const EntityId gold = m.gold->entity();
      CoarseType coarse = CoarseType::kOther;
      std::vector<size_t> fine;
      if (typed) {
        auto c = labels->coarse.find(gold);
        auto f = labels->fine.find(gold);
        if (c == labels->coarse.end()) {
          ++local.skipped;
          continue;
        }
        coarse = c->second;
        if (f != labels->fine.end()) fine = f->second;
      }
      examples.push_back(MakePairExample(init, MentionInput::FromCandidate(m),
                                         EntityInputFor(kb, gold), gold, coarse,
                                         std::move(fine)));
    }
    local.examples = examples.size();
    result = TrainDualEncoder(run, examples, std::move(init), track);
  }
  local.final_loss = last_loss;
  if (summary) *summary = local;
  return result;
}

GradCheckResult GradCheck(const ModelParams &params, const LossFunction &loss,
                          uint64_t seed, size_t coordinates, double epsilon) {
  ModelParams grad = ZerosLike(params);
  loss(params, &grad);

  ModelParams probe = params;
  auto p_blocks = probe.Blocks();
  auto g_blocks = std::as_const(grad).Blocks();
  std::vector<std::pair<size_t, size_t>> all;  // (block, offset)
  std::vector<std::pair<size_t, size_t>> nonzero;
  for (size_t b = 0; b < p_blocks.size(); ++b) {
    for (size_t i = 0; i < p_blocks[b].size(); ++i) {
      all.emplace_back(b, i);
      if (g_blocks[b][i] != 0.0) nonzero.emplace_back(b, i);
    }
  }
  GradCheckResult result;
  if (all.empty()) return result;

  SplitMix64 rng(seed);
  std::vector<std::pair<size_t, size_t>> chosen =
      rng.SampleWithoutReplacement(nonzero, coordinates / 2);
  while (chosen.size() < coordinates) chosen.push_back(all[rng.Uniform(all.size())]);

  for (auto [b, i] : chosen) {
    double &x = p_blocks[b][i];
    const double saved = x;
    x = saved + epsilon;
    double plus = loss(probe, nullptr);
    x = saved - epsilon;
    double minus = loss(probe, nullptr);
    x = saved;
    const double numeric = (plus - minus) / (2.0 * epsilon);
    const double analytic = g_blocks[b][i];
    const double scale = std::max(std::abs(analytic), std::abs(numeric));
    if (scale < kGradCheckSkip) {
      ++result.skipped;
      continue;
    }
    ++result.checked;
    result.max_relative_error = std::max(
        result.max_relative_error, std::abs(analytic - numeric) / scale);
  }
  return result;
}

GradCheckSetup SyntheticGradCheck(ModelKind kind, size_t dim, size_t buckets,
                                  size_t batch_size, size_t fine_count,
                                  uint64_t seed) {
  ModelShape shape;
  shape.kind = kind;
  shape.dim = dim;
  shape.buckets = buckets;
  shape.fine_count = kind == ModelKind::kTypedDualEncoder ? fine_count : 0;
  GradCheckSetup setup;
  setup.params = InitModel(shape, seed);
  SplitMix64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  for (auto block : setup.params.Blocks()) {
    for (double &v : block) {
      if (v == 0.0) v = 0.1 * rng.Normal();
    }
  }
  auto features = [&](size_t n) {
    std::vector<uint32_t> f;
    for (size_t i = 0; i < n; ++i) {
      f.push_back(static_cast<uint32_t>(rng.Uniform(buckets)));
    }
    return f;
  };

  if (kind == ModelKind::kJointScorer) {
    std::vector<JointExample> batch(batch_size);
    for (size_t i = 0; i < batch_size; ++i) {
      batch[i].ngrams = features(12);
      batch[i].interaction[rng.Uniform(kOverlapBuckets)] = true;
      batch[i].interaction[kOverlapBuckets + rng.Uniform(kOverlapBuckets)] =
          true;
      batch[i].label = static_cast<double>(i % 2);
    }
    setup.loss = [batch](const ModelParams &p, ModelParams *g) {
      return JointBceLoss(p, batch, g);
    };
    return setup;
  }

  std::vector<PairExample> batch(batch_size);
  for (size_t i = 0; i < batch_size; ++i) {
    batch[i].mention = features(12);
    batch[i].entity = features(12);
    batch[i].entity_id = EntityId(i + 1);
    batch[i].coarse = static_cast<CoarseType>(rng.Uniform(kNumCoarseTypes));
    for (size_t f = 0; f < fine_count; ++f) {
      if (rng.Bernoulli(0.3)) batch[i].fine.push_back(f);
    }
  }
  if (kind == ModelKind::kTypedDualEncoder) {
    setup.loss = [batch](const ModelParams &p, ModelParams *g) {
      return TydeLoss(p, batch, LossWeights{}, g);
    };
  } else {
    setup.loss = [batch](const ModelParams &p, ModelParams *g) {
      return DeBatchLoss(p, batch, g);
    };
  }
  return setup;
}

Linker::Linker(const ModelParams &params, const KbSnapshot &kb,
               LinkerConfig config, const ModelParams *nil_typer)
    : params_(params), kb_(kb), config_(config), nil_typer_(nil_typer) {
  if (params.kind != ModelKind::kJointScorer &&
      config.strategy != Strategy::kSimOnly && !params.typing) {
    throw Error(ErrorCode::kUnsupported,
                std::string("strategy '") +
                    std::string(StrategyName(config.strategy)) +
                    "' needs a model with typing heads");
  }
}

std::vector<ScoreBreakdown> Linker::Breakdowns(
    const MentionCandidate &m) const {
  std::vector<ScoreBreakdown> out;
  if (m.candidates.empty()) return out;
  MentionInput input = MentionInput::FromCandidate(m);
  if (params_.kind == ModelKind::kJointScorer) {
    for (const Candidate &c : m.candidates) {
      ScoreBreakdown b;
      b.prior = c.prior;
      b.combined = JointScore(params_, input, EntityInputFor(kb_, c.entity));
      out.push_back(b);
    }
    return out;
  }
  std::vector<double> u = EncodeMention(params_, input);
  for (const Candidate &c : m.candidates) {
    std::vector<double> v = EncodeEntity(params_, EntityInputFor(kb_, c.entity));
    ScoreBreakdown b;
    b.prior = c.prior;
    b.sim = Sim(u, v);
    if (params_.typing) {
      TypingScores t = ComputeTypingScores(params_, u, v, config_.typing_mode);
      b.coarse = t.coarse;
      b.fine = t.fine;
    }
    b.combined = CombineScore(b, config_.strategy);
    out.push_back(b);
  }
  return out;
}

std::vector<ScoredCandidate> Linker::Rank(const MentionCandidate &m) const {
  std::vector<ScoreBreakdown> breakdowns = Breakdowns(m);
  std::vector<ScoredCandidate> scored;
  for (size_t i = 0; i < breakdowns.size(); ++i) {
    scored.push_back({m.candidates[i].entity, breakdowns[i].combined});
  }
  SortScored(&scored);
  return scored;
}

CoarseType Linker::NilType(const MentionCandidate &m) const {
  const ModelParams *typer = params_.typing ? &params_ : nil_typer_;
  if (typer == nullptr || !typer->typing) return CoarseType::kOther;
  return PredictMentionCoarse(
      *typer, EncodeMention(*typer, MentionInput::FromCandidate(m)));
}

Label Linker::Predict(const MentionCandidate &m) const {
  std::vector<ScoredCandidate> ranked = Rank(m);
  return elkit::Predict(ranked, config_.nil, NilType(m));
}

}  // namespace elkit
