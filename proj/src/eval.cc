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

#include "elkit/eval.h"

#include <algorithm>
#include <set>
#include <sstream>

#include "elkit/errors.h"
#include "elkit/io.h"
#include "json.hpp"

namespace elkit {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

Label ParseLabelField(const json &j, const char *field) {
  if (!j.is_string()) {
    throw Error(ErrorCode::kInvalidInput,
                std::string("ranked example: '") + field + "' must be a string");
  }
  std::optional<Label> label = Label::Parse(j.get<std::string>());
  if (!label) {
    throw Error(ErrorCode::kInvalidInput, std::string("ranked example: bad '") +
                                              field + "' " + j.dump());
  }
  return *label;
}

bool InKbHit(const RankedExample &ex, size_t k) {
  size_t n = std::min(k, ex.ranking.size());
  for (size_t i = 0; i < n; ++i) {
    if (ex.ranking[i] == ex.gold->entity()) return true;
  }
  return false;
}

void RequireGold(std::span<const RankedExample> examples) {
  for (const RankedExample &ex : examples) {
    if (!ex.gold) {
      throw Error(ErrorCode::kInvalidInput,
                  "example '" + ex.id + "' has no gold label");
    }
  }
}

void Normalize(std::vector<size_t> *ks) {
  for (size_t k : *ks) {
    if (k == 0) throw Error(ErrorCode::kInvalidArgument, "K must be >= 1");
  }
  std::sort(ks->begin(), ks->end());
  ks->erase(std::unique(ks->begin(), ks->end()), ks->end());
}

// Builds overall and per-slice reports; `score` returns whether an example
// counts toward n_scored and, per K, whether it is a hit.
template <typename Scorer>
void Aggregate(std::span<const RankedExample> examples, EvalReport *report,
               Scorer score) {
  report->overall.name = "all";
  std::map<std::string, SliceReport> slices;
  for (const RankedExample &ex : examples) {
    std::vector<SliceReport *> targets = {&report->overall};
    if (!ex.slice.empty()) {
      SliceReport &s = slices[ex.slice];
      s.name = ex.slice;
      targets.push_back(&s);
    }
    for (SliceReport *r : targets) {
      ++r->n_total;
      for (size_t k : report->ks) r->hits.try_emplace(k, 0);
    }
    if (!score(ex, static_cast<size_t>(0))) continue;
    for (SliceReport *r : targets) {
      ++r->n_scored;
      for (size_t k : report->ks) {
        if (score(ex, k)) ++r->hits[k];
      }
    }
  }
  for (size_t k : report->ks) report->overall.hits.try_emplace(k, 0);
  for (auto &[name, s] : slices) report->slices.push_back(std::move(s));
}

}  // namespace

RankedExample ParseRankedExample(std::string_view line) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(ErrorCode::kInvalidInput, "ranked example: not a JSON object");
  }
  RankedExample ex;
  try {
    if (j.contains("id")) ex.id = j.at("id").get<std::string>();
    if (j.contains("slice")) ex.slice = j.at("slice").get<std::string>();
    if (!j.at("gold").is_null()) {
      ex.gold = ParseLabelField(j.at("gold"), "gold");
    }
    std::set<EntityId> seen;
    for (const json &r : j.at("ranking")) {
      EntityId id = ParseEntityId(r.get<std::string>());
      if (!seen.insert(id).second) {
        throw Error(ErrorCode::kInvalidInput,
                    "ranked example " + ex.id + ": duplicate " + id.str());
      }
      ex.ranking.push_back(id);
    }
    if (j.contains("prediction") && !j.at("prediction").is_null()) {
      ex.prediction = ParseLabelField(j.at("prediction"), "prediction");
    }
  } catch (const json::exception &e) {
    throw Error(ErrorCode::kInvalidInput,
                std::string("ranked example: ") + e.what());
  }
  return ex;
}

std::string SerializeRankedExample(const RankedExample &ex) {
  ordered_json j;
  j["id"] = ex.id;
  j["slice"] = ex.slice;
  j["gold"] = ex.gold ? ordered_json(ex.gold->str()) : ordered_json(nullptr);
  ordered_json ranking = ordered_json::array();
  for (EntityId id : ex.ranking) ranking.push_back(id.str());
  j["ranking"] = std::move(ranking);
  j["prediction"] = ex.prediction ? ordered_json(ex.prediction->str())
                                  : ordered_json(nullptr);
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

std::vector<RankedExample> ReadRankedExamples(
    const std::filesystem::path &path) {
  std::ifstream in = OpenInput(path);
  std::vector<RankedExample> out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = StripCr(line);
    if (view.empty()) continue;
    try {
      out.push_back(ParseRankedExample(view));
    } catch (const Error &e) {
      throw Error(e.code(), path.string() + ":" + std::to_string(line_no) +
                                ": " + e.what());
    }
  }
  return out;
}

std::string_view EvalModeName(EvalMode mode) {
  return mode == EvalMode::kInKb ? "inkb" : "withnil";
}

std::optional<double> SliceReport::Recall(size_t k) const {
  if (n_scored == 0) return std::nullopt;
  auto it = hits.find(k);
  uint64_t h = it == hits.end() ? 0 : it->second;
  return static_cast<double>(h) / static_cast<double>(n_scored);
}

std::optional<double> RecallAtK(std::span<const RankedExample> examples,
                                size_t k) {
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "K must be >= 1");
  RequireGold(examples);
  uint64_t scored = 0, hits = 0;
  for (const RankedExample &ex : examples) {
    if (ex.gold->is_nil()) continue;
    ++scored;
    if (InKbHit(ex, k)) ++hits;
  }
  if (scored == 0) return std::nullopt;
  return static_cast<double>(hits) / static_cast<double>(scored);
}

EvalReport EvaluateInKb(std::span<const RankedExample> examples,
                        std::vector<size_t> ks) {
  Normalize(&ks);
  RequireGold(examples);
  EvalReport report;
  report.mode = EvalMode::kInKb;
  report.ks = ks;
  Aggregate(examples, &report, [](const RankedExample &ex, size_t k) {
    if (ex.gold->is_nil()) return false;
    return k == 0 || InKbHit(ex, k);
  });
  return report;
}

bool NilCorrect(const Label &gold, const Label &prediction,
                Strictness strictness) {
  if (!gold.is_nil()) return !prediction.is_nil() && prediction == gold;
  if (!prediction.is_nil()) return false;
  return strictness == Strictness::kLenient ||
         prediction.nil_type() == gold.nil_type();
}

EvalReport EvaluateWithNil(std::span<const RankedExample> examples,
                           Strictness strictness) {
  RequireGold(examples);
  for (const RankedExample &ex : examples) {
    if (!ex.prediction) {
      throw Error(ErrorCode::kInvalidInput,
                  "example '" + ex.id + "' has no prediction");
    }
  }
  EvalReport report;
  report.mode = EvalMode::kWithNil;
  report.strictness = strictness;
  report.ks = {1};
  Aggregate(examples, &report, [&](const RankedExample &ex, size_t k) {
    return k == 0 || NilCorrect(*ex.gold, *ex.prediction, strictness);
  });
  return report;
}

std::string FormatPercent(uint64_t hits, uint64_t n) {
  if (n == 0) return "-";
  // Tenths of a percent, rounded half-up in exact integer arithmetic.
  uint64_t tenths = (2000 * hits + n) / (2 * n);
  return std::to_string(tenths / 10) + "." + std::to_string(tenths % 10);
}

std::string RenderText(const EvalReport &report) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header = {"slice", "n_total", "n_scored"};
  for (size_t k : report.ks) header.push_back("R@" + std::to_string(k));
  rows.push_back(header);
  auto add = [&](const SliceReport &s) {
    std::vector<std::string> row = {s.name, std::to_string(s.n_total),
                                    std::to_string(s.n_scored)};
    for (size_t k : report.ks) {
      auto it = s.hits.find(k);
      row.push_back(s.n_scored == 0
                        ? "-"
                        : FormatPercent(it == s.hits.end() ? 0 : it->second,
                                        s.n_scored));
    }
    rows.push_back(std::move(row));
  };
  add(report.overall);
  for (const SliceReport &s : report.slices) add(s);

  std::vector<size_t> width(header.size(), 0);
  for (const auto &row : rows) {
    for (size_t c = 0; c < row.size(); ++c) {
      width[c] = std::max(width[c], row[c].size());
    }
  }
  std::ostringstream out;
  out << "mode: " << EvalModeName(report.mode);
  if (report.mode == EvalMode::kWithNil) {
    out << " ("
        << (report.strictness == Strictness::kStrict ? "strict" : "lenient")
        << ")";
  }
  out << '\n';
  for (const auto &row : rows) {
    std::string line;
    for (size_t c = 0; c < row.size(); ++c) {
      if (c > 0) line += "  ";
      if (c == 0) {
        line += row[c] + std::string(width[c] - row[c].size(), ' ');
      } else {
        line += std::string(width[c] - row[c].size(), ' ') + row[c];
      }
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out << line << '\n';
  }
  return out.str();
}

namespace {

ordered_json SliceJson(const SliceReport &s, std::span<const size_t> ks) {
  ordered_json j;
  j["name"] = s.name;
  j["n_total"] = s.n_total;
  j["n_scored"] = s.n_scored;
  ordered_json hits = ordered_json::object();
  ordered_json recall = ordered_json::object();
  for (size_t k : ks) {
    auto it = s.hits.find(k);
    hits[std::to_string(k)] = it == s.hits.end() ? 0 : it->second;
    auto r = s.Recall(k);
    recall[std::to_string(k)] = r ? ordered_json(*r) : ordered_json(nullptr);
  }
  j["hits"] = std::move(hits);
  j["recall"] = std::move(recall);
  return j;
}

}  // namespace

std::string RenderJson(const EvalReport &report) {
  ordered_json j;
  j["mode"] = std::string(EvalModeName(report.mode));
  if (report.mode == EvalMode::kWithNil) {
    j["strictness"] =
        report.strictness == Strictness::kStrict ? "strict" : "lenient";
  }
  j["ks"] = report.ks;
  j["overall"] = SliceJson(report.overall, report.ks);
  ordered_json slices = ordered_json::array();
  for (const SliceReport &s : report.slices) {
    slices.push_back(SliceJson(s, report.ks));
  }
  j["slices"] = std::move(slices);
  return j.dump(2) + "\n";
}

}  // namespace elkit
