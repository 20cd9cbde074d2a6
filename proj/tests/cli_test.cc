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

#include <algorithm>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "elkit/cli.h"
#include "elkit/errors.h"
#include "elkit/io.h"
#include "elkit/matching.h"
#include "support/temp_dir.h"

namespace elkit {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result RunTool(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = RunCli(args, out, err);
  return {code, out.str(), err.str()};
}

TEST(CliTest, NoArgumentsPrintsUsage) {
  Result r = RunTool({});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("build-kb"), std::string::npos);
  EXPECT_NE(r.err.find("grad-check"), std::string::npos);
}

TEST(CliTest, UnknownSubcommandOrFlagIsUsageError) {
  EXPECT_EQ(RunTool({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(RunTool({"grad-check", "--seed", "1", "--bogus", "2"}).code, kExitUsage);
  EXPECT_EQ(RunTool({"evaluate"}).code, kExitUsage);  // missing --input
}

TEST(CliTest, HelpListsEveryFlag) {
  const std::map<std::string, std::vector<std::string>> flags = {
      {"build-kb", {"--dump", "--known-ids", "--extra-roots", "--out"}},
      {"build-types", {"--kb", "--out", "--topsnaks"}},
      {"build-alias", {"--kb", "--pages", "--redirects", "--extra", "--out"}},
      {"match",
       {"--alias-table", "--unlinked", "--corpus", "--out", "--k",
        "--max-unlinked", "--min-len", "--context-window"}},
      {"sample-fs",
       {"--mentions", "--n", "--seed", "--kb", "--out", "--description-budget"}},
      {"sample-zs", {"--kb", "--n", "--seed", "--out"}},
      {"export-tasks",
       {"--mentions", "--kb", "--out", "--criterion", "--description-budget"}},
      {"train",
       {"--kb", "--mentions", "--out", "--seed", "--model", "--types",
        "--alias-table", "--unlinked", "--dim", "--buckets", "--fine-count",
        "--batch-size", "--steps", "--learning-rate", "--warmup-fraction",
        "--scale", "--lambda-coarse", "--lambda-fine", "--negative-keep-rate",
        "--k", "--log-every"}},
      {"predict",
       {"--model", "--kb", "--mentions", "--out", "--strategy", "--typing-mode",
        "--nil-threshold", "--nil-typer"}},
      {"score",
       {"--model", "--kb", "--mentions", "--out", "--strategy", "--typing-mode",
        "--nil-threshold", "--nil-typer"}},
      {"evaluate", {"--input", "--mode", "--k", "--strict", "--lenient", "--report"}},
      {"grad-check",
       {"--loss", "--seed", "--dim", "--buckets", "--batch", "--fine-count",
        "--coordinates", "--epsilon", "--tolerance"}},
  };
  for (const auto &[sub, list] : flags) {
    Result r = RunTool({sub, "--help"});
    EXPECT_EQ(r.code, kExitOk) << sub;
    std::string text = r.out + r.err;
    for (const std::string &flag : list) {
      EXPECT_NE(text.find(flag), std::string::npos) << sub << " " << flag;
    }
    EXPECT_NE(text.find("--config"), std::string::npos) << sub;
  }
}

TEST(ConfigTest, ParsesKeyValueLines) {
  auto cfg = ParseConfigText(
      "# comment\n\nsteps = 5\n learning_rate=0.5 # trailing\nname = \"a b\"\n");
  ASSERT_EQ(cfg.size(), 3u);
  EXPECT_EQ(cfg[0], (std::pair<std::string, std::string>{"steps", "5"}));
  EXPECT_EQ(cfg[1].first, "learning_rate");
  EXPECT_EQ(cfg[1].second, "0.5");
  EXPECT_EQ(cfg[2].second, "a b");
  EXPECT_THROW(ParseConfigText("no equals sign\n"), Error);
}

TEST(ConfigTest, CommandLineWins) {
  auto args = ApplyConfig({"train", "--steps", "7"},
                          {{"steps", "5"}, {"learning_rate", "0.5"}});
  EXPECT_EQ(args, (std::vector<std::string>{"train", "--steps", "7",
                                            "--learning-rate=0.5"}));
  auto eq = ApplyConfig({"train", "--steps=7"}, {{"steps", "5"}});
  EXPECT_EQ(eq, (std::vector<std::string>{"train", "--steps=7"}));
}

TEST(ConfigTest, PrecedenceEndToEnd) {
  testing::TempDir dir;
  WriteFile(dir / "gc.conf", "tolerance = 1e-300\nloss = de\n");
  std::string conf = (dir / "gc.conf").string();
  // Config value alone: an impossible tolerance fails.
  Result strict = RunTool({"grad-check", "--seed", "3", "--config", conf});
  EXPECT_EQ(strict.code, kExitUsage);
  EXPECT_NE(strict.out.find("FAIL"), std::string::npos);
  // The command line overrides it.
  Result relaxed =
      RunTool({"grad-check", "--seed", "3", "--config", conf, "--tolerance", "1e-4"});
  EXPECT_EQ(relaxed.code, kExitOk);
  EXPECT_NE(relaxed.out.find("PASS"), std::string::npos);

  WriteFile(dir / "bad.conf", "no_such_flag = 1\n");
  EXPECT_EQ(RunTool({"grad-check", "--seed", "3", "--config",
                 (dir / "bad.conf").string()})
                .code,
            kExitUsage);
  EXPECT_EQ(RunTool({"grad-check", "--seed", "3", "--config",
                 (dir / "missing.conf").string()})
                .code,
            kExitIo);
}

TEST(CliTest, GradCheckPassesForEveryLoss) {
  for (const char *loss : {"de", "tyde", "ca"}) {
    Result r = RunTool({"grad-check", "--loss", loss, "--seed", "7"});
    EXPECT_EQ(r.code, kExitOk) << loss << r.out << r.err;
    EXPECT_NE(r.out.find("PASS"), std::string::npos);
  }
  EXPECT_EQ(RunTool({"grad-check", "--loss", "xx", "--seed", "1"}).code, kExitUsage);
  EXPECT_EQ(RunTool({"grad-check"}).code, kExitUsage);  // --seed is required
}

const char kRankFixture[] =
    "{\"id\":\"a\",\"slice\":\"news\",\"gold\":\"Q1\",\"ranking\":[\"Q1\",\"Q2\"],\"prediction\":\"Q1\"}\n"
    "{\"id\":\"b\",\"slice\":\"news\",\"gold\":\"Q2\",\"ranking\":[\"Q1\",\"Q3\",\"Q2\"],\"prediction\":\"Q1\"}\n"
    "{\"id\":\"c\",\"slice\":\"news\",\"gold\":\"Q3\",\"ranking\":[\"Q10\",\"Q11\",\"Q12\",\"Q13\",\"Q14\",\"Q15\",\"Q16\",\"Q17\",\"Q18\",\"Q19\",\"Q3\"],\"prediction\":\"NIL_PER\"}\n";

TEST(CliTest, EvaluatePrintsRecallTable) {
  testing::TempDir dir;
  WriteFile(dir / "ranked.jsonl", kRankFixture);
  Result r = RunTool({"evaluate", "--mode", "inkb", "--k", "1,10", "--input",
                  (dir / "ranked.jsonl").string(), "--report",
                  (dir / "report.json").string()});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("33.3"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("66.7"), std::string::npos) << r.out;
  EXPECT_NE(ReadFile(dir / "report.json").find("\"mode\": \"inkb\""),
            std::string::npos);

  Result nil = RunTool({"evaluate", "--mode", "withnil", "--lenient", "--input",
                    (dir / "ranked.jsonl").string()});
  EXPECT_EQ(nil.code, kExitOk);
  EXPECT_NE(nil.out.find("withnil (lenient)"), std::string::npos) << nil.out;

  EXPECT_EQ(RunTool({"evaluate", "--mode", "other", "--input",
                 (dir / "ranked.jsonl").string()})
                .code,
            kExitUsage);
  EXPECT_EQ(RunTool({"evaluate", "--k", "0", "--input",
                 (dir / "ranked.jsonl").string()})
                .code,
            kExitUsage);
}

TEST(CliTest, MissingInputIsIoError) {
  testing::TempDir dir;
  Result r = RunTool({"evaluate", "--input", (dir / "absent.jsonl").string()});
  EXPECT_EQ(r.code, kExitIo);
  EXPECT_NE(r.err.find("error"), std::string::npos);
  EXPECT_EQ(RunTool({"build-kb", "--dump", (dir / "nope").string(), "--known-ids",
                 (dir / "nope2").string(), "--out", (dir / "kb").string()})
                .code,
            kExitIo);
}

TEST(CliTest, MalformedInputIsValidationError) {
  testing::TempDir dir;
  WriteFile(dir / "ranked.jsonl", "{\"id\":1}\n");
  EXPECT_EQ(RunTool({"evaluate", "--input", (dir / "ranked.jsonl").string()}).code,
            kExitUsage);
}

// Writes the raw inputs of a small end-to-end run.
void WriteFixture(const fs::path &dir) {
  WriteFile(dir / "dump.jsonl",
            "{\"id\":\"Q1\",\"title\":\"北京\",\"description\":\"中国首都城市\","
            "\"claims\":{\"P31\":[\"Q515\"]}}\n"
            "{\"id\":\"Q515\",\"title\":\"城市\",\"claims\":{\"P279\":[\"Q618123\"]}}\n"
            "{\"id\":\"Q2\",\"title\":\"北京队\",\"description\":\"足球俱乐部球队\","
            "\"claims\":{\"P31\":[\"Q43229\"]}}\n"
            "{\"id\":\"Q3\",\"title\":\"小米科技\",\"description\":\"手机公司\","
            "\"claims\":{\"P31\":[\"Q43229\"]}}\n"
            "{\"id\":\"Q4\",\"title\":\"小米\",\"description\":\"谷物粮食\"}\n"
            "{\"id\":\"Q5\",\"title\":\"北京 (消歧义)\","
            "\"claims\":{\"P31\":[\"Q4167410\"]}}\n"
            "{\"id\":\"Q6\"}\n"
            "broken line\n");
  WriteFile(dir / "known.txt", "Q1\nQ515\n");
  WriteFile(dir / "pages.jsonl",
            "{\"title\":\"北京\",\"entity\":\"Q1\",\"text\":\"北京北京队小米小米小米北京\","
            "\"anchors\":[{\"start\":2,\"end\":5,\"target\":\"北京队\"},"
            "{\"start\":5,\"end\":7,\"target\":\"小米科技\"},"
            "{\"start\":7,\"end\":9,\"target\":\"小米科技\"},"
            "{\"start\":9,\"end\":11,\"target\":\"小米\"},"
            "{\"start\":11,\"end\":13,\"target\":\"京城\"}]}\n"
            "{\"title\":\"北京队\",\"entity\":\"Q2\",\"text\":\"球队\",\"anchors\":[]}\n");
  WriteFile(dir / "redirects.tsv", "京城\t北京\n");
  WriteFile(dir / "corpus.jsonl",
            "{\"doc_id\":\"d1\",\"text\":\"我在北京看北京队比赛\",\"source\":\"news\"}\n"
            "{\"doc_id\":\"d2\",\"text\":\"买小米手机\",\"source\":\"social\"}\n"
            "{\"doc_id\":\"d3\",\"text\":\"小米粥很好喝\",\"source\":\"social\"}\n");
}

// Runs every stage into `out`; returns the list of produced files.
std::vector<std::string> RunPipeline(const fs::path &in, const fs::path &out) {
  auto ok = [](std::vector<std::string> args) {
    Result r = RunTool(args);
    EXPECT_EQ(r.code, kExitOk) << args[0] << ": " << r.err;
    return r;
  };
  std::string kb = (out / "kb").string();
  ok({"build-kb", "--dump", (in / "dump.jsonl").string(), "--known-ids",
      (in / "known.txt").string(), "--out", kb});
  ok({"build-types", "--kb", kb, "--out", (out / "types").string()});
  ok({"build-alias", "--kb", kb, "--pages", (in / "pages.jsonl").string(),
      "--redirects", (in / "redirects.tsv").string(), "--out",
      (out / "alias").string()});
  ok({"match", "--alias-table", (out / "alias" / "alias_table.tsv").string(),
      "--corpus", (in / "corpus.jsonl").string(), "--out",
      (out / "mentions.jsonl").string()});

  // Gold: the last candidate of every mention.
  auto mentions = ReadMentions(out / "mentions.jsonl");
  for (auto &m : mentions) m.gold = Label::Entity(m.candidates.back().entity);
  WriteMentions(mentions, out / "gold.jsonl");
  std::string gold = (out / "gold.jsonl").string();

  ok({"sample-fs", "--mentions", gold, "--n", "2", "--seed", "3", "--kb", kb,
      "--out", (out / "fs_tasks.jsonl").string()});
  ok({"sample-zs", "--kb", kb, "--n", "2", "--seed", "3", "--out",
      (out / "zs.tsv").string()});
  ok({"export-tasks", "--mentions", gold, "--kb", kb, "--out",
      (out / "tasks.jsonl").string()});
  for (const char *kind : {"de", "tyde", "ca"}) {
    ok({"train", "--kb", kb, "--mentions", gold, "--model", kind, "--types",
        (out / "types").string(), "--alias-table",
        (out / "alias" / "alias_table.tsv").string(), "--seed", "5", "--steps",
        "20", "--dim", "8", "--buckets", "128", "--batch-size", "2",
        "--learning-rate", "0.05", "--out",
        (out / (std::string(kind) + ".model")).string()});
  }
  ok({"predict", "--model", (out / "tyde.model").string(), "--kb", kb,
      "--mentions", gold, "--strategy", "both", "--out",
      (out / "ranked.jsonl").string()});
  ok({"predict", "--model", (out / "ca.model").string(), "--kb", kb,
      "--mentions", gold, "--nil-typer", (out / "tyde.model").string(), "--out",
      (out / "ranked_ca.jsonl").string()});
  ok({"score", "--model", (out / "tyde.model").string(), "--kb", kb,
      "--mentions", gold, "--strategy", "fine", "--out",
      (out / "scores.jsonl").string()});
  Result eval = ok({"evaluate", "--input", (out / "ranked.jsonl").string(),
                    "--k", "1,2", "--report", (out / "report.json").string()});
  WriteFile(out / "report.txt", eval.out);

  std::vector<std::string> files;
  for (const auto &entry : fs::recursive_directory_iterator(out)) {
    if (entry.is_regular_file()) {
      files.push_back(fs::relative(entry.path(), out).string());
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

TEST(PipelineTest, EndToEndIsByteDeterministic) {
  testing::TempDir in, a, b;
  WriteFixture(in.path());
  auto files_a = RunPipeline(in.path(), a.path());
  auto files_b = RunPipeline(in.path(), b.path());
  ASSERT_EQ(files_a, files_b);
  EXPECT_GE(files_a.size(), 20u);
  for (const std::string &f : files_a) {
    EXPECT_EQ(ReadFile(a.path() / f), ReadFile(b.path() / f)) << f;
  }
}

TEST(PipelineTest, StagesProduceExpectedContent) {
  testing::TempDir in, out;
  WriteFixture(in.path());
  RunPipeline(in.path(), out.path());
  const fs::path &o = out.path();

  std::string stats = ReadFile(o / "kb" / "stats.json");
  EXPECT_NE(stats.find("\"malformed\": 1"), std::string::npos) << stats;
  EXPECT_NE(stats.find("\"filtered_internal\": 1"), std::string::npos);
  EXPECT_EQ(ReadFile(o / "kb" / "known_ids.txt"), "Q1\nQ515\n");
  EXPECT_EQ(ReadFile(o / "kb" / "new_ids.txt"), "Q2\nQ3\nQ4\n");

  std::string coarse = ReadFile(o / "types" / "coarse_types.tsv");
  EXPECT_NE(coarse.find("Q1\tLOC\n"), std::string::npos) << coarse;
  EXPECT_NE(coarse.find("Q3\tORG\n"), std::string::npos);
  EXPECT_NE(coarse.find("Q4\tOTHER\n"), std::string::npos);
  std::string snaks = ReadFile(o / "types" / "topsnaks.tsv");
  EXPECT_EQ(snaks.substr(0, snaks.find('\n')), "0\tP31\tQ43229\t2");

  std::string at = ReadFile(o / "alias" / "alias_table.tsv");
  EXPECT_NE(at.find("小米\tQ3\t2\t0.666667\n"), std::string::npos) << at;
  EXPECT_NE(at.find("小米\tQ4\t1\t0.333333\n"), std::string::npos) << at;
  EXPECT_NE(at.find("京城\tQ1\t"), std::string::npos);
  EXPECT_TRUE(fs::exists(o / "alias" / "unlinked.tsv"));

  auto mentions = ReadMentions(o / "mentions.jsonl");
  std::vector<std::string> surfaces;
  for (const auto &m : mentions) surfaces.push_back(m.span.surface);
  EXPECT_EQ(surfaces, (std::vector<std::string>{"北京", "北京队", "小米", "小米"}));

  std::string ranked = ReadFile(o / "ranked.jsonl");
  EXPECT_NE(ranked.find("\"id\":\"d1:2-4\""), std::string::npos) << ranked;
  EXPECT_NE(ranked.find("\"slice\":\"social\""), std::string::npos);
  EXPECT_NE(ReadFile(o / "report.txt").find("mode: inkb"), std::string::npos);
  EXPECT_NE(ReadFile(o / "scores.jsonl").find("\"s_f\":"), std::string::npos);
  std::string zs = ReadFile(o / "zs.tsv");
  EXPECT_EQ(std::count(zs.begin(), zs.end(), '\n'), 2);
  EXPECT_NE(zs.find("uniform"), std::string::npos);
  EXPECT_NE(zs.find("diversified"), std::string::npos);
  std::string tasks = ReadFile(o / "fs_tasks.jsonl");
  EXPECT_EQ(std::count(tasks.begin(), tasks.end(), '\n'), 2);
}

TEST(PipelineTest, SeedIsRequiredForRandomStages) {
  testing::TempDir dir;
  WriteFile(dir / "m.jsonl", "");
  EXPECT_EQ(RunTool({"sample-fs", "--mentions", (dir / "m.jsonl").string(), "--n", "2"})
                .code,
            kExitUsage);
  EXPECT_EQ(RunTool({"sample-zs", "--kb", dir.path().string(), "--n", "2"}).code,
            kExitUsage);
  EXPECT_EQ(RunTool({"train", "--kb", dir.path().string(), "--mentions",
                 (dir / "m.jsonl").string(), "--out", (dir / "x").string()})
                .code,
            kExitUsage);
}

}  // namespace
}  // namespace elkit
