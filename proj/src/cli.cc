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

#include "elkit/cli.h"

#include <algorithm>
#include <sstream>

#include "CLI11.hpp"
#include "elkit/alias_table.h"
#include "elkit/errors.h"
#include "elkit/eval.h"
#include "elkit/io.h"
#include "elkit/kb.h"
#include "elkit/matching.h"
#include "elkit/model.h"
#include "elkit/sampling.h"
#include "elkit/train.h"
#include "elkit/typing.h"
#include "json.hpp"

namespace elkit {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string Trim(std::string_view s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// Writes to `path`, or to `out` when the path is empty.
class Sink {
 public:
  Sink(const std::string &path, std::ostream &out) {
    if (path.empty()) {
      stream_ = &out;
    } else {
      file_ = OpenOutput(path);
      stream_ = &file_;
    }
  }
  std::ostream &operator*() { return *stream_; }
  void Close(const std::string &what) {
    stream_->flush();
    if (!*stream_) throw Error(ErrorCode::kIo, "failed writing " + what);
  }

 private:
  std::ofstream file_;
  std::ostream *stream_ = nullptr;
};

std::string MentionId(const MentionCandidate &m) {
  return m.doc_id + ":" + std::to_string(m.span.start) + "-" +
         std::to_string(m.span.end);
}

std::vector<size_t> ParseKList(const std::string &text) {
  std::vector<size_t> ks;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = Trim(item);
    if (item.empty() ||
        item.find_first_not_of("0123456789") != std::string::npos) {
      throw Error(ErrorCode::kInvalidArgument, "bad K list '" + text + "'");
    }
    ks.push_back(std::stoull(item));
  }
  if (ks.empty()) throw Error(ErrorCode::kInvalidArgument, "empty K list");
  return ks;
}

TypeLabels LoadTypeLabels(const KbSnapshot &kb, const std::string &types_dir,
                          size_t *vocab_size) {
  TopSnakVocab vocab = ReadTopSnaks(fs::path(types_dir) / "topsnaks.tsv");
  *vocab_size = vocab.size();
  return ComputeTypeLabels(kb, vocab);
}

std::string DefaultUnlinked(const std::string &alias_path) {
  fs::path sibling = fs::path(alias_path).parent_path() / "unlinked.tsv";
  return fs::exists(sibling) ? sibling.string() : "";
}

struct KbOptions {
  std::string dump, known_ids, extra_roots, out;
};

struct TypesOptions {
  std::string kb, out;
  size_t topsnaks = kDefaultTopSnakCount;
};

struct AliasOptions {
  std::string kb, pages, redirects, extra, out;
};

struct MatchOptions {
  std::string alias_table, unlinked, corpus, out;
  MatchConfig config;
};

struct SampleFsOptions {
  std::string mentions, kb, out;
  size_t n = 0;
  uint64_t seed = 0;
  size_t budget = kDefaultDescriptionBudget;
};

struct SampleZsOptions {
  std::string kb, out;
  size_t n = 0;
  uint64_t seed = 0;
};

struct ExportOptions {
  std::string mentions, kb, out, criterion = "uniform";
  size_t budget = kDefaultDescriptionBudget;
};

struct TrainOptions {
  std::string kb, mentions, types, alias_table, unlinked, out, kind = "tyde";
  size_t log_every = 100;
  TrainConfig config;
};

struct PredictOptions {
  std::string model, kb, mentions, out, nil_typer;
  std::string strategy = "sim", typing_mode = "normalized";
  double nil_threshold = 0.1;
};

struct EvaluateOptions {
  std::string input, mode = "inkb", k = "1,10,100", report;
  bool strict = true;
};

struct GradCheckOptions {
  std::string loss = "de";
  uint64_t seed = 0;
  size_t dim = 8, buckets = 64, batch = 3, fine_count = 6, coordinates = 100;
  double epsilon = 1e-5, tolerance = 1e-4;
};

void RunBuildKb(const KbOptions &o, std::ostream &err) {
  std::set<EntityId> known = ReadIdFile(o.known_ids);
  std::set<EntityId> roots = DefaultFilterRoots();
  if (!o.extra_roots.empty()) {
    std::set<EntityId> extra = ReadIdFile(o.extra_roots);
    roots.insert(extra.begin(), extra.end());
  }
  std::ifstream dump = OpenInput(o.dump);
  KbSnapshot kb = BuildSnapshot(dump, known, roots);
  WriteSnapshot(kb, o.out);
  const FilterStats &s = kb.stats();
  err << "parsed " << s.parsed << ", malformed " << s.malformed
      << ", duplicates " << s.duplicates << ", internal "
      << s.filtered_internal << ", no page " << s.no_wiki_page << ", kept "
      << s.kept << " (known " << kb.known_ids().size() << ", new "
      << kb.new_ids().size() << ")\n";
}

void RunBuildTypes(const TypesOptions &o, std::ostream &err) {
  KbSnapshot kb = ReadSnapshot(o.kb);
  TopSnakVocab vocab = ExtractTopSnakVocab(kb, o.topsnaks);
  std::map<EntityId, CoarseType> coarse;
  for (const auto &[id, entity] : kb.entities()) coarse[id] = CoarseTypeOf(id, kb);
  fs::create_directories(o.out);
  WriteTopSnaks(vocab, fs::path(o.out) / "topsnaks.tsv");
  WriteCoarseTypes(coarse, fs::path(o.out) / "coarse_types.tsv");
  std::vector<EntityId> ids;
  for (const auto &[id, entity] : kb.entities()) ids.push_back(id);
  err << "topsnaks " << vocab.size() << ", fine coverage "
      << FineTypeCoverage(ids, kb, vocab) << "\n";
}

void RunBuildAlias(const AliasOptions &o, std::ostream &err) {
  KbSnapshot kb = ReadSnapshot(o.kb);
  PageReadResult pages = ReadWikiPages(o.pages);
  std::map<std::string, std::string> redirects;
  if (!o.redirects.empty()) redirects = ReadRedirects(o.redirects);
  AliasBuildStats stats;
  AliasTable at =
      BuildAliasTable(pages.pages, redirects, kb.TitleIndex(), &stats);
  at = CountUnlinked(at, pages.pages);
  if (!o.extra.empty()) at = Merge(at, ReadExtraAliases(o.extra));
  fs::create_directories(o.out);
  WriteAliasTable(at, fs::path(o.out) / "alias_table.tsv");
  WriteUnlinked(at, fs::path(o.out) / "unlinked.tsv");
  err << "pages " << stats.pages << " (malformed " << pages.malformed
      << "), redirects " << stats.redirects << ", anchors " << stats.anchors
      << ", unresolved " << stats.unresolved << ", cycles " << stats.cycles
      << ", surfaces " << at.size() << "\n";
}

void RunMatch(const MatchOptions &o, std::ostream &out, std::ostream &err) {
  std::string unlinked =
      o.unlinked.empty() ? DefaultUnlinked(o.alias_table) : o.unlinked;
  AliasTable at = ReadAliasTable(o.alias_table, unlinked);
  Matcher matcher = CompileMatcher(at);
  std::vector<MentionCandidate> mentions;
  for (const Document &doc : ReadDocuments(o.corpus)) {
    auto found = GenerateMentions(doc, at, matcher, o.config);
    mentions.insert(mentions.end(), found.begin(), found.end());
  }
  Sink sink(o.out, out);
  for (const MentionCandidate &m : mentions) *sink << SerializeMention(m) << '\n';
  sink.Close("mentions");
  err << "mentions " << mentions.size() << "\n";
}

void RunSampleFs(const SampleFsOptions &o, std::ostream &out,
                 std::ostream &err) {
  std::vector<MentionCandidate> pool = ReadMentions(o.mentions);
  std::optional<KbSnapshot> kb;
  if (!o.kb.empty()) kb = ReadSnapshot(o.kb);
  FsSample sample = SampleFs(pool, o.n, o.seed, kb ? &*kb : nullptr);
  Sink sink(o.out, out);
  ExportTasks(sample.tasks, *sink, o.budget);
  sink.Close("tasks");
  err << "tasks " << sample.tasks.size() << ", uniform shortfall "
      << sample.uniform_shortfall << ", ambiguous shortfall "
      << sample.ambiguous_shortfall << "\n";
}

void RunSampleZs(const SampleZsOptions &o, std::ostream &out,
                 std::ostream &err) {
  KbSnapshot kb = ReadSnapshot(o.kb);
  std::vector<EntityId> pool(kb.new_ids().begin(), kb.new_ids().end());
  ZsSample sample = SampleZsEntities(pool, kb, o.n, o.seed);
  Sink sink(o.out, out);
  for (size_t i = 0; i < sample.entities.size(); ++i) {
    EntityId id = sample.entities[i];
    *sink << id.str() << '\t' << CoarseTypeName(CoarseTypeOf(id, kb)) << '\t'
          << (i < sample.uniform_count ? "uniform" : "diversified") << '\n';
  }
  sink.Close("entities");
  err << "entities " << sample.entities.size() << ", shortfall "
      << sample.shortfall << "\n";
}

void RunExportTasks(const ExportOptions &o, std::ostream &out) {
  SamplingCriterion criterion;
  if (o.criterion == "uniform") {
    criterion = SamplingCriterion::kUniform;
  } else if (o.criterion == "ambiguous") {
    criterion = SamplingCriterion::kAmbiguous;
  } else {
    throw Error(ErrorCode::kInvalidArgument,
                "criterion must be uniform or ambiguous");
  }
  std::optional<KbSnapshot> kb;
  if (!o.kb.empty()) kb = ReadSnapshot(o.kb);
  std::vector<AnnotationTask> tasks;
  for (MentionCandidate &m : ReadMentions(o.mentions)) {
    AnnotationTask task;
    task.cards = MakeCards(m, kb ? &*kb : nullptr);
    task.mention = std::move(m);
    task.criterion = criterion;
    tasks.push_back(std::move(task));
  }
  Sink sink(o.out, out);
  ExportTasks(tasks, *sink, o.budget);
  sink.Close("tasks");
}

void RunTrain(TrainOptions o, std::ostream &err) {
  auto kind = ParseModelKind(o.kind);
  if (!kind) {
    throw Error(ErrorCode::kInvalidArgument, "model must be de, tyde or ca");
  }
  o.config.kind = *kind;
  KbSnapshot kb = ReadSnapshot(o.kb);
  std::vector<MentionCandidate> mentions = ReadMentions(o.mentions);
  std::optional<TypeLabels> labels;
  size_t vocab_size = 0;
  if (*kind == ModelKind::kTypedDualEncoder) {
    if (o.types.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "tyde training needs --types");
    }
    labels = LoadTypeLabels(kb, o.types, &vocab_size);
  }
  std::optional<AliasTable> at;
  if (*kind == ModelKind::kJointScorer) {
    if (o.alias_table.empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "ca training needs --alias-table");
    }
    at = ReadAliasTable(o.alias_table, o.unlinked.empty()
                                           ? DefaultUnlinked(o.alias_table)
                                           : o.unlinked);
  }
  TrainSummary summary;
  auto log = [&](size_t step, double loss) {
    if (o.log_every > 0 && (step % o.log_every == 0 ||
                            step + 1 == o.config.steps)) {
      err << "step " << step << " loss " << loss << "\n";
    }
  };
  ModelParams params =
      Train(o.config, mentions, kb, labels ? &*labels : nullptr, vocab_size,
            at ? &*at : nullptr, &summary, log);
  SaveModel(params, o.out);
  err << "examples " << summary.examples << ", skipped " << summary.skipped
      << ", parameters " << params.ParameterCount() << "\n";
}

struct LoadedLinker {
  KbSnapshot kb;
  ModelParams params;
  std::optional<ModelParams> nil_typer;
  std::optional<Linker> linker;
};

void LoadLinker(const PredictOptions &o, LoadedLinker *l) {
  auto strategy = ParseStrategy(o.strategy);
  if (!strategy) {
    throw Error(ErrorCode::kInvalidArgument,
                "strategy must be sim, coarse, fine or both");
  }
  LinkerConfig config;
  config.strategy = *strategy;
  if (o.typing_mode == "normalized") {
    config.typing_mode = TypingMode::kNormalized;
  } else if (o.typing_mode == "raw") {
    config.typing_mode = TypingMode::kRaw;
  } else {
    throw Error(ErrorCode::kInvalidArgument,
                "typing mode must be normalized or raw");
  }
  if (o.nil_threshold < 0 || o.nil_threshold > 1) {
    throw Error(ErrorCode::kInvalidArgument, "nil threshold must be in [0, 1]");
  }
  config.nil.threshold = o.nil_threshold;
  l->kb = ReadSnapshot(o.kb);
  l->params = LoadModel(o.model);
  if (!o.nil_typer.empty()) l->nil_typer = LoadModel(o.nil_typer);
  l->linker.emplace(l->params, l->kb, config,
                    l->nil_typer ? &*l->nil_typer : nullptr);
}

void RunPredict(const PredictOptions &o, std::ostream &out) {
  LoadedLinker l;
  LoadLinker(o, &l);
  Sink sink(o.out, out);
  for (const MentionCandidate &m : ReadMentions(o.mentions)) {
    RankedExample ex;
    ex.id = MentionId(m);
    ex.slice = m.source;
    ex.gold = m.gold;
    std::vector<ScoredCandidate> ranked = l.linker->Rank(m);
    for (const ScoredCandidate &c : ranked) ex.ranking.push_back(c.entity);
    ex.prediction = Predict(ranked, NilConfig{o.nil_threshold},
                            l.linker->NilType(m));
    *sink << SerializeRankedExample(ex) << '\n';
  }
  sink.Close("predictions");
}

void RunScore(const PredictOptions &o, std::ostream &out) {
  LoadedLinker l;
  LoadLinker(o, &l);
  Sink sink(o.out, out);
  for (const MentionCandidate &m : ReadMentions(o.mentions)) {
    std::vector<ScoreBreakdown> breakdowns = l.linker->Breakdowns(m);
    ordered_json j;
    j["id"] = MentionId(m);
    j["surface"] = m.span.surface;
    ordered_json cands = ordered_json::array();
    for (size_t i = 0; i < breakdowns.size(); ++i) {
      const ScoreBreakdown &b = breakdowns[i];
      ordered_json c;
      c["entity"] = m.candidates[i].entity.str();
      c["prior"] = b.prior;
      c["sim"] = b.sim;
      c["s_c"] = b.coarse ? ordered_json(*b.coarse) : ordered_json(nullptr);
      c["s_f"] = b.fine ? ordered_json(*b.fine) : ordered_json(nullptr);
      c["combined"] = b.combined;
      cands.push_back(std::move(c));
    }
    j["candidates"] = std::move(cands);
    *sink << j.dump() << '\n';
  }
  sink.Close("scores");
}

void RunEvaluate(const EvaluateOptions &o, std::ostream &out) {
  std::vector<RankedExample> examples = ReadRankedExamples(o.input);
  EvalReport report;
  if (o.mode == "inkb") {
    report = EvaluateInKb(examples, ParseKList(o.k));
  } else if (o.mode == "withnil") {
    report = EvaluateWithNil(
        examples, o.strict ? Strictness::kStrict : Strictness::kLenient);
  } else {
    throw Error(ErrorCode::kInvalidArgument, "mode must be inkb or withnil");
  }
  out << RenderText(report);
  if (!o.report.empty()) WriteFile(o.report, RenderJson(report));
}

int RunGradCheck(const GradCheckOptions &o, std::ostream &out) {
  auto kind = ParseModelKind(o.loss);
  if (!kind) {
    throw Error(ErrorCode::kInvalidArgument, "loss must be de, tyde or ca");
  }
  if (o.dim < 2 || o.buckets == 0 || o.batch == 0 || o.fine_count == 0) {
    throw Error(ErrorCode::kInvalidArgument, "dimensions must be positive");
  }
  GradCheckSetup setup = SyntheticGradCheck(*kind, o.dim, o.buckets, o.batch,
                                            o.fine_count, o.seed);
  GradCheckResult r =
      GradCheck(setup.params, setup.loss, o.seed, o.coordinates, o.epsilon);
  bool pass = r.max_relative_error < o.tolerance;
  out << "loss " << o.loss << ": max relative error " << r.max_relative_error
      << " over " << r.checked << " coordinates (" << r.skipped
      << " skipped) " << (pass ? "PASS" : "FAIL") << "\n";
  return pass ? kExitOk : kExitUsage;
}

int ExitCodeFor(const Error &e) {
  return e.code() == ErrorCode::kIo ? kExitIo : kExitUsage;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> ParseConfigText(
    std::string_view text) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::stringstream in{std::string(text)};
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string trimmed = Trim(line);
    if (trimmed.empty() || trimmed[0] == '#') continue;
    size_t eq = trimmed.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kInvalidInput,
                  "config line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = Trim(trimmed.substr(0, eq));
    std::string value = Trim(trimmed.substr(eq + 1));
    size_t hash = value.find(" #");
    if (hash != std::string::npos) value = Trim(value.substr(0, hash));
    if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') &&
        value.back() == value.front()) {
      value = value.substr(1, value.size() - 2);
    }
    if (key.empty()) {
      throw Error(ErrorCode::kInvalidInput,
                  "config line " + std::to_string(line_no) + ": empty key");
    }
    entries.emplace_back(key, value);
  }
  return entries;
}

std::vector<std::string> ApplyConfig(
    std::vector<std::string> args,
    const std::vector<std::pair<std::string, std::string>> &config) {
  std::vector<std::string> given;
  for (const std::string &a : args) {
    if (a.starts_with("--")) given.push_back(a.substr(0, a.find('=')));
  }
  for (const auto &[raw_key, value] : config) {
    std::string key = raw_key;
    std::replace(key.begin(), key.end(), '_', '-');
    std::string flag = "--" + key;
    if (std::find(given.begin(), given.end(), flag) != given.end()) continue;
    args.push_back(flag + "=" + value);
  }
  return args;
}

int RunCli(const std::vector<std::string> &args_in, std::ostream &out,
           std::ostream &err) {
  CLI::App app("Entity linking toolkit: knowledge base and alias table "
               "construction, candidate matching, sampling, training, "
               "prediction and evaluation.",
               "elkit");
  app.require_subcommand(1, 1);
  std::string config_path;
  auto config_flag = [&](CLI::App *sub) {
    sub->add_option("--config", config_path,
                    "key = value file; command-line flags win");
  };

  KbOptions kb_opt;
  CLI::App *build_kb =
      app.add_subcommand("build-kb", "Parse, filter and split a KB dump");
  build_kb->add_option("--dump", kb_opt.dump, "Entity JSONL dump")->required();
  build_kb->add_option("--known-ids", kb_opt.known_ids,
                       "QIDs of the earlier snapshot")
      ->required();
  build_kb->add_option("--extra-roots", kb_opt.extra_roots,
                       "Additional filter-root QIDs");
  build_kb->add_option("--out", kb_opt.out, "Output directory")->required();
  config_flag(build_kb);

  TypesOptions types_opt;
  CLI::App *build_types = app.add_subcommand(
      "build-types", "Compute coarse types and the TopSnak vocabulary");
  build_types->add_option("--kb", types_opt.kb, "KB directory")->required();
  build_types->add_option("--out", types_opt.out, "Output directory")
      ->required();
  build_types->add_option("--topsnaks", types_opt.topsnaks,
                          "Vocabulary size")
      ->capture_default_str();
  config_flag(build_types);

  AliasOptions alias_opt;
  CLI::App *build_alias = app.add_subcommand(
      "build-alias", "Build the alias table and unlinked counts");
  build_alias->add_option("--kb", alias_opt.kb, "KB directory")->required();
  build_alias->add_option("--pages", alias_opt.pages, "Wiki page JSONL")
      ->required();
  build_alias->add_option("--redirects", alias_opt.redirects,
                          "Redirect TSV (source, target)");
  build_alias->add_option("--extra", alias_opt.extra,
                          "Extra aliases TSV (surface, QID, count)");
  build_alias->add_option("--out", alias_opt.out, "Output directory")
      ->required();
  config_flag(build_alias);

  MatchOptions match_opt;
  CLI::App *match =
      app.add_subcommand("match", "Generate mention candidates for a corpus");
  match->add_option("--alias-table", match_opt.alias_table, "alias_table.tsv")
      ->required();
  match->add_option("--unlinked", match_opt.unlinked,
                    "unlinked.tsv (default: next to the alias table)");
  match->add_option("--corpus", match_opt.corpus, "Document JSONL")
      ->required();
  match->add_option("--out", match_opt.out, "Mention JSONL (default stdout)");
  match->add_option("--k", match_opt.config.k, "Candidates per mention")
      ->capture_default_str();
  match->add_option("--max-unlinked", match_opt.config.max_unlinked,
                    "Drop surfaces with a higher P(unlinked|m)")
      ->capture_default_str();
  match->add_option("--min-len", match_opt.config.min_len,
                    "Minimum span length in characters")
      ->capture_default_str();
  match->add_option("--context-window", match_opt.config.context_window,
                    "Context characters on each side")
      ->capture_default_str();
  config_flag(match);

  SampleFsOptions fs_opt;
  CLI::App *sample_fs = app.add_subcommand(
      "sample-fs", "Two-criteria mention sampling into annotation tasks");
  sample_fs->add_option("--mentions", fs_opt.mentions, "Mention JSONL")
      ->required();
  sample_fs->add_option("--n", fs_opt.n, "Number of tasks (even)")
      ->required();
  sample_fs->add_option("--seed", fs_opt.seed, "Random seed")->required();
  sample_fs->add_option("--kb", fs_opt.kb, "KB directory for candidate cards");
  sample_fs->add_option("--out", fs_opt.out, "Task JSONL (default stdout)");
  sample_fs->add_option("--description-budget", fs_opt.budget,
                        "Description length in characters")
      ->capture_default_str();
  config_flag(sample_fs);

  SampleZsOptions zs_opt;
  CLI::App *sample_zs = app.add_subcommand(
      "sample-zs", "Type-balanced sampling of new entities");
  sample_zs->add_option("--kb", zs_opt.kb, "KB directory")->required();
  sample_zs->add_option("--n", zs_opt.n, "Number of entities")->required();
  sample_zs->add_option("--seed", zs_opt.seed, "Random seed")->required();
  sample_zs->add_option("--out", zs_opt.out, "TSV (default stdout)");
  config_flag(sample_zs);

  ExportOptions export_opt;
  CLI::App *export_tasks = app.add_subcommand(
      "export-tasks", "Export mentions as annotation tasks");
  export_tasks->add_option("--mentions", export_opt.mentions, "Mention JSONL")
      ->required();
  export_tasks->add_option("--kb", export_opt.kb,
                           "KB directory for candidate cards");
  export_tasks->add_option("--out", export_opt.out,
                           "Task JSONL (default stdout)");
  export_tasks->add_option("--criterion", export_opt.criterion,
                           "uniform or ambiguous")
      ->capture_default_str();
  export_tasks->add_option("--description-budget", export_opt.budget,
                           "Description length in characters")
      ->capture_default_str();
  config_flag(export_tasks);

  TrainOptions train_opt;
  TrainConfig &tc = train_opt.config;
  CLI::App *train = app.add_subcommand("train", "Train a DE, TyDE or CA model");
  train->add_option("--kb", train_opt.kb, "KB directory")->required();
  train->add_option("--mentions", train_opt.mentions, "Gold mention JSONL")
      ->required();
  train->add_option("--out", train_opt.out, "Model file")->required();
  train->add_option("--seed", tc.seed, "Random seed")->required();
  train->add_option("--model", train_opt.kind, "de, tyde or ca")
      ->capture_default_str();
  train->add_option("--types", train_opt.types,
                    "build-types output directory (tyde)");
  train->add_option("--alias-table", train_opt.alias_table,
                    "alias_table.tsv (ca)");
  train->add_option("--unlinked", train_opt.unlinked, "unlinked.tsv (ca)");
  train->add_option("--dim", tc.dim, "Embedding dimension")
      ->capture_default_str();
  train->add_option("--buckets", tc.buckets, "Hash buckets")
      ->capture_default_str();
  train->add_option("--fine-count", tc.fine_count,
                    "Fine type count (0: vocabulary size)")
      ->capture_default_str();
  train->add_option("--batch-size", tc.batch_size, "Batch size")
      ->capture_default_str();
  train->add_option("--steps", tc.steps, "Training steps")
      ->capture_default_str();
  train->add_option("--learning-rate", tc.learning_rate, "Peak learning rate")
      ->capture_default_str();
  train->add_option("--warmup-fraction", tc.warmup_fraction,
                    "Warmup share of steps")
      ->capture_default_str();
  train->add_option("--scale", tc.scale, "Cosine logit scale")
      ->capture_default_str();
  train->add_option("--lambda-coarse", tc.lambda_coarse, "Coarse loss weight")
      ->capture_default_str();
  train->add_option("--lambda-fine", tc.lambda_fine, "Fine loss weight")
      ->capture_default_str();
  train->add_option("--negative-keep-rate", tc.negative_keep_rate,
                    "Share of mined negatives kept (ca)")
      ->capture_default_str();
  train->add_option("--k", tc.k, "Candidates mined per mention (ca)")
      ->capture_default_str();
  train->add_option("--log-every", train_opt.log_every,
                    "Loss logging interval (0: off)")
      ->capture_default_str();
  config_flag(train);

  PredictOptions predict_opt;
  auto linker_flags = [&](CLI::App *sub) {
    sub->add_option("--model", predict_opt.model, "Model file")->required();
    sub->add_option("--kb", predict_opt.kb, "KB directory")->required();
    sub->add_option("--mentions", predict_opt.mentions, "Mention JSONL")
        ->required();
    sub->add_option("--out", predict_opt.out, "JSONL (default stdout)");
    sub->add_option("--strategy", predict_opt.strategy,
                    "sim, coarse, fine or both")
        ->capture_default_str();
    sub->add_option("--typing-mode", predict_opt.typing_mode,
                    "normalized or raw")
        ->capture_default_str();
    sub->add_option("--nil-threshold", predict_opt.nil_threshold,
                    "NIL below this score")
        ->capture_default_str();
    sub->add_option("--nil-typer", predict_opt.nil_typer,
                    "Typed model for NIL coarse types");
    config_flag(sub);
  };
  CLI::App *predict = app.add_subcommand(
      "predict", "Rank candidates and predict an entity or NIL");
  linker_flags(predict);
  CLI::App *score =
      app.add_subcommand("score", "Per-candidate score breakdowns");
  linker_flags(score);

  EvaluateOptions eval_opt;
  CLI::App *evaluate =
      app.add_subcommand("evaluate", "Recall@K over ranked predictions");
  evaluate->add_option("--input", eval_opt.input, "Ranked example JSONL")
      ->required();
  evaluate->add_option("--mode", eval_opt.mode, "inkb or withnil")
      ->capture_default_str();
  evaluate->add_option("--k", eval_opt.k, "Comma-separated K values (inkb)")
      ->capture_default_str();
  evaluate->add_flag("--strict,!--lenient", eval_opt.strict,
                     "NIL coarse types must match (withnil, default)");
  evaluate->add_option("--report", eval_opt.report, "JSON report path");
  config_flag(evaluate);

  GradCheckOptions gc_opt;
  CLI::App *grad_check = app.add_subcommand(
      "grad-check", "Finite-difference check of the loss gradients");
  grad_check->add_option("--loss", gc_opt.loss, "de, tyde or ca")
      ->capture_default_str();
  grad_check->add_option("--seed", gc_opt.seed, "Random seed")->required();
  grad_check->add_option("--dim", gc_opt.dim, "Embedding dimension")
      ->capture_default_str();
  grad_check->add_option("--buckets", gc_opt.buckets, "Hash buckets")
      ->capture_default_str();
  grad_check->add_option("--batch", gc_opt.batch, "Batch size")
      ->capture_default_str();
  grad_check->add_option("--fine-count", gc_opt.fine_count, "Fine types")
      ->capture_default_str();
  grad_check->add_option("--coordinates", gc_opt.coordinates,
                         "Sampled coordinates")
      ->capture_default_str();
  grad_check->add_option("--epsilon", gc_opt.epsilon, "Finite-difference step")
      ->capture_default_str();
  grad_check->add_option("--tolerance", gc_opt.tolerance,
                         "Maximum relative error")
      ->capture_default_str();
  config_flag(grad_check);

  if (args_in.empty()) {
    err << app.help();
    return kExitUsage;
  }

  std::vector<std::string> args = args_in;
  try {
    for (size_t i = 0; i < args.size(); ++i) {
      std::string path;
      if (args[i] == "--config" && i + 1 < args.size()) {
        path = args[i + 1];
      } else if (args[i].starts_with("--config=")) {
        path = args[i].substr(9);
      }
      if (!path.empty()) {
        args = ApplyConfig(args, ParseConfigText(ReadFile(path)));
        break;
      }
    }
  } catch (const Error &e) {
    err << "error: " << e.what() << "\n";
    return ExitCodeFor(e);
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp &e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::CallForAllHelp &e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError &e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (build_kb->parsed()) RunBuildKb(kb_opt, err);
    if (build_types->parsed()) RunBuildTypes(types_opt, err);
    if (build_alias->parsed()) RunBuildAlias(alias_opt, err);
    if (match->parsed()) RunMatch(match_opt, out, err);
    if (sample_fs->parsed()) RunSampleFs(fs_opt, out, err);
    if (sample_zs->parsed()) RunSampleZs(zs_opt, out, err);
    if (export_tasks->parsed()) RunExportTasks(export_opt, out);
    if (train->parsed()) RunTrain(train_opt, err);
    if (predict->parsed()) RunPredict(predict_opt, out);
    if (score->parsed()) RunScore(predict_opt, out);
    if (evaluate->parsed()) RunEvaluate(eval_opt, out);
    if (grad_check->parsed()) return RunGradCheck(gc_opt, out);
  } catch (const Error &e) {
    err << "error: " << e.what() << "\n";
    return ExitCodeFor(e);
  } catch (const fs::filesystem_error &e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitOk;
}

}  // namespace elkit
