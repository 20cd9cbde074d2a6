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

#include "elkit/matching.h"

#include <algorithm>
#include <map>

#include "elkit/errors.h"
#include "elkit/io.h"
#include "elkit/utf8.h"
#include "json.hpp"

namespace elkit {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::vector<std::u32string> DecodeAll(const std::vector<std::string> &in) {
  std::vector<std::u32string> out;
  out.reserve(in.size());
  for (const std::string &s : in) {
    if (s.empty()) throw Error(ErrorCode::kInvalidArgument, "empty surface");
    out.push_back(DecodeUtf8(s));
  }
  return out;
}

}  // namespace

Matcher::Matcher(const std::set<std::string> &surfaces)
    : surfaces_(surfaces.begin(), surfaces.end()),
      automaton_(DecodeAll(surfaces_)) {}

std::vector<Span> Matcher::FindAll(std::string_view text) const {
  return FindAll(DecodeUtf8(text));
}

std::vector<Span> Matcher::FindAll(std::u32string_view text) const {
  std::vector<Span> spans;
  for (const AhoCorasick::Match &m : automaton_.FindAll(text)) {
    spans.push_back(Span{m.start, m.end, surfaces_[m.pattern]});
  }
  return spans;
}

Matcher CompileMatcher(const std::set<std::string> &surfaces) {
  return Matcher(surfaces);
}

Matcher CompileMatcher(const AliasTable &at) {
  std::set<std::string> surfaces;
  for (const auto &[surface, list] : at.entries()) surfaces.insert(surface);
  return Matcher(surfaces);
}

std::vector<Span> ResolveOverlaps(std::vector<Span> spans) {
  std::sort(spans.begin(), spans.end(), [](const Span &a, const Span &b) {
    if (a.length() != b.length()) return a.length() > b.length();
    if (a.start != b.start) return a.start < b.start;
    return a.surface < b.surface;
  });
  // Kept spans keyed by start; they are disjoint, so an overlap with
  // [s, e) can only come from the last kept span starting before e.
  std::map<size_t, Span> kept;
  for (Span &span : spans) {
    auto it = kept.lower_bound(span.end);
    if (it != kept.begin()) {
      --it;
      if (it->second.Overlaps(span)) continue;
    }
    kept.emplace(span.start, std::move(span));
  }
  std::vector<Span> out;
  out.reserve(kept.size());
  for (auto &[start, span] : kept) out.push_back(std::move(span));
  return out;
}

std::vector<MentionCandidate> GenerateMentions(const Document &doc,
                                               const AliasTable &at,
                                               const Matcher &matcher,
                                               const MatchConfig &config) {
  std::u32string text = DecodeUtf8(doc.text);
  std::vector<Span> spans = ResolveOverlaps(matcher.FindAll(text));
  std::vector<MentionCandidate> mentions;
  for (Span &span : spans) {
    if (span.length() < config.min_len) continue;
    if (at.PUnlinked(span.surface) > config.max_unlinked) continue;
    MentionCandidate m;
    m.doc_id = doc.doc_id;
    m.source = doc.source;
    size_t begin = span.start > config.context_window
                       ? span.start - config.context_window
                       : 0;
    size_t end = std::min(text.size(), span.end + config.context_window);
    m.context = EncodeUtf8(std::u32string_view(text).substr(begin, end - begin));
    m.context_offset = begin;
    m.candidates = at.TopK(span.surface, config.k);
    m.span = std::move(span);
    mentions.push_back(std::move(m));
  }
  return mentions;
}

std::optional<Document> ParseDocumentLine(std::string_view line) {
  json doc = json::parse(line, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) return std::nullopt;
  auto id = doc.find("doc_id");
  auto text = doc.find("text");
  if (id == doc.end() || !id->is_string()) return std::nullopt;
  if (text == doc.end() || !text->is_string()) return std::nullopt;
  Document d;
  d.doc_id = id->get<std::string>();
  d.text = text->get<std::string>();
  if (auto source = doc.find("source"); source != doc.end()) {
    if (!source->is_string()) return std::nullopt;
    d.source = source->get<std::string>();
  }
  return d;
}

std::string SerializeMention(const MentionCandidate &m) {
  ordered_json j;
  j["doc_id"] = m.doc_id;
  j["source"] = m.source;
  j["start"] = m.span.start;
  j["end"] = m.span.end;
  j["surface"] = m.span.surface;
  j["context"] = m.context;
  j["context_offset"] = m.context_offset;
  ordered_json cands = ordered_json::array();
  for (const Candidate &c : m.candidates) {
    ordered_json cj;
    cj["entity"] = c.entity.str();
    cj["prior"] = c.prior;
    cands.push_back(std::move(cj));
  }
  j["candidates"] = std::move(cands);
  if (m.gold) j["gold"] = m.gold->str();
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

MentionCandidate ParseMentionLine(std::string_view line) {
  auto fail = [](const std::string &why) -> Error {
    return Error(ErrorCode::kInvalidInput, "mention record: " + why);
  };
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw fail("not a JSON object");
  MentionCandidate m;
  try {
    m.doc_id = j.at("doc_id").get<std::string>();
    m.source = j.value("source", std::string());
    m.span.start = j.at("start").get<size_t>();
    m.span.end = j.at("end").get<size_t>();
    m.span.surface = j.at("surface").get<std::string>();
    m.context = j.at("context").get<std::string>();
    m.context_offset = j.value("context_offset", size_t{0});
    for (const json &c : j.value("candidates", json::array())) {
      m.candidates.push_back(
          Candidate{ParseEntityId(c.at("entity").get<std::string>()),
                    c.at("prior").get<double>()});
    }
    if (auto g = j.find("gold"); g != j.end() && !g->is_null()) {
      auto label = Label::Parse(g->get<std::string>());
      if (!label) throw fail("bad gold label");
      m.gold = *label;
    }
  } catch (const json::exception &e) {
    throw fail(e.what());
  }
  if (m.span.start >= m.span.end) throw fail("empty span");
  if (m.span.start < m.context_offset) throw fail("span outside context");
  if (m.span.end - m.context_offset > ScalarLength(m.context)) {
    throw fail("span outside context");
  }
  return m;
}

std::vector<Document> ReadDocuments(const std::filesystem::path &path) {
  std::ifstream in = OpenInput(path);
  std::vector<Document> docs;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = StripCr(line);
    if (view.empty()) continue;
    auto doc = ParseDocumentLine(view);
    if (!doc) {
      throw Error(ErrorCode::kInvalidInput,
                  path.filename().string() + ":" + std::to_string(line_no) +
                      ": malformed document");
    }
    docs.push_back(std::move(*doc));
  }
  return docs;
}

std::vector<MentionCandidate> ReadMentions(const std::filesystem::path &path) {
  std::ifstream in = OpenInput(path);
  std::vector<MentionCandidate> mentions;
  std::string line;
  while (std::getline(in, line)) {
    std::string_view view = StripCr(line);
    if (view.empty()) continue;
    mentions.push_back(ParseMentionLine(view));
  }
  return mentions;
}

void WriteMentions(std::span<const MentionCandidate> mentions,
                   const std::filesystem::path &path) {
  std::string out;
  for (const MentionCandidate &m : mentions) {
    out += SerializeMention(m);
    out += '\n';
  }
  WriteFile(path, out);
}

}  // namespace elkit
