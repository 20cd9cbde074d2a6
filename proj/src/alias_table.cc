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

#include "elkit/alias_table.h"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <set>

#include "elkit/aho_corasick.h"
#include "elkit/errors.h"
#include "elkit/io.h"
#include "elkit/utf8.h"
#include "json.hpp"

namespace elkit {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

bool ValidSurface(std::string_view s) {
  return !s.empty() && s.find_first_of("\t\n\r") == std::string_view::npos;
}

uint64_t ParseUint(const std::string &field, const std::string &where) {
  uint64_t value = 0;
  auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (field.empty() || ec != std::errc() ||
      ptr != field.data() + field.size()) {
    throw Error(ErrorCode::kInvalidInput,
                where + ": bad integer '" + field + "'");
  }
  return value;
}

}  // namespace

std::optional<WikiPage> ParseWikiPageLine(std::string_view line) {
  json doc = json::parse(line, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) return std::nullopt;
  WikiPage page;
  auto title = doc.find("title");
  auto entity = doc.find("entity");
  auto text = doc.find("text");
  if (title == doc.end() || !title->is_string()) return std::nullopt;
  if (entity == doc.end() || !entity->is_string()) return std::nullopt;
  if (text == doc.end() || !text->is_string()) return std::nullopt;
  page.title = title->get<std::string>();
  auto id = EntityId::Parse(entity->get<std::string>());
  if (!id) return std::nullopt;
  page.entity = *id;
  page.text = text->get<std::string>();
  const size_t length = ScalarLength(page.text);

  if (auto it = doc.find("anchors"); it != doc.end() && !it->is_null()) {
    if (!it->is_array()) return std::nullopt;
    for (const json &a : *it) {
      if (!a.is_object()) return std::nullopt;
      auto start = a.find("start");
      auto end = a.find("end");
      auto target = a.find("target");
      if (start == a.end() || !start->is_number_unsigned() ||
          end == a.end() || !end->is_number_unsigned() ||
          target == a.end() || !target->is_string()) {
        return std::nullopt;
      }
      Anchor anchor{start->get<size_t>(), end->get<size_t>(),
                    target->get<std::string>()};
      if (anchor.start >= anchor.end || anchor.end > length) {
        return std::nullopt;
      }
      page.anchors.push_back(std::move(anchor));
    }
  }
  std::sort(page.anchors.begin(), page.anchors.end(),
            [](const Anchor &a, const Anchor &b) { return a.start < b.start; });
  for (size_t i = 1; i < page.anchors.size(); ++i) {
    if (page.anchors[i].start < page.anchors[i - 1].end) return std::nullopt;
  }
  return page;
}

std::string SerializeWikiPage(const WikiPage &page) {
  ordered_json doc;
  doc["title"] = page.title;
  doc["entity"] = page.entity.str();
  doc["text"] = page.text;
  ordered_json anchors = ordered_json::array();
  for (const Anchor &a : page.anchors) {
    ordered_json j;
    j["start"] = a.start;
    j["end"] = a.end;
    j["target"] = a.target_title;
    anchors.push_back(std::move(j));
  }
  doc["anchors"] = std::move(anchors);
  return doc.dump(-1, ' ', false, json::error_handler_t::replace);
}

PageReadResult ReadWikiPages(const std::filesystem::path &path) {
  std::ifstream in = OpenInput(path);
  PageReadResult result;
  std::string line;
  while (std::getline(in, line)) {
    std::string_view view = StripCr(line);
    if (view.empty()) continue;
    if (auto page = ParseWikiPageLine(view)) {
      result.pages.push_back(std::move(*page));
    } else {
      ++result.malformed;
    }
  }
  if (in.bad()) throw Error(ErrorCode::kIo, "read failed: " + path.string());
  return result;
}

std::map<std::string, std::string> ReadRedirects(
    const std::filesystem::path &path) {
  std::ifstream in = OpenInput(path);
  std::map<std::string, std::string> redirects;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = StripCr(line);
    if (view.empty()) continue;
    auto fields = SplitTabs(view);
    if (fields.size() != 2 || fields[0].empty() || fields[1].empty()) {
      throw Error(ErrorCode::kInvalidInput,
                  path.filename().string() + ":" + std::to_string(line_no) +
                      ": expected source<TAB>target");
    }
    redirects.emplace(std::move(fields[0]), std::move(fields[1]));
  }
  return redirects;
}

AliasTable::AliasTable(const AliasCounts &counts,
                       SurfaceMap<UnlinkedStats> unlinked)
    : unlinked_(std::move(unlinked)) {
  for (const auto &[surface, by_entity] : counts) {
    if (surface.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "empty alias surface");
    }
    uint64_t total = 0;
    for (const auto &[entity, count] : by_entity) total += count;
    if (total == 0) continue;
    std::vector<AliasEntry> list;
    for (const auto &[entity, count] : by_entity) {
      if (count == 0) continue;
      list.push_back(AliasEntry{
          entity, count,
          static_cast<double>(count) / static_cast<double>(total)});
    }
    // Equal priors imply equal counts; compare counts to avoid rounding.
    std::stable_sort(list.begin(), list.end(),
                     [](const AliasEntry &a, const AliasEntry &b) {
                       return a.count > b.count;
                     });
    entries_.emplace(surface, std::move(list));
  }
}

bool AliasTable::Contains(std::string_view surface) const {
  return entries_.find(surface) != entries_.end();
}

std::span<const AliasEntry> AliasTable::Lookup(std::string_view surface) const {
  auto it = entries_.find(surface);
  if (it == entries_.end()) return {};
  return it->second;
}

std::vector<Candidate> AliasTable::TopK(std::string_view surface,
                                        size_t k) const {
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  std::vector<Candidate> out;
  for (const AliasEntry &e : Lookup(surface)) {
    if (out.size() == k) break;
    out.push_back(Candidate{e.entity, e.prior});
  }
  return out;
}

UnlinkedStats AliasTable::Unlinked(std::string_view surface) const {
  auto it = unlinked_.find(surface);
  return it == unlinked_.end() ? UnlinkedStats{} : it->second;
}

AliasCounts AliasTable::Counts() const {
  AliasCounts counts;
  for (const auto &[surface, list] : entries_) {
    auto &by_entity = counts[surface];
    for (const AliasEntry &e : list) by_entity[e.entity] = e.count;
  }
  return counts;
}

std::optional<EntityId> ResolveTitle(
    const std::string &title,
    const std::map<std::string, std::string> &redirects,
    const std::map<std::string, EntityId> &title_index, bool *cycle) {
  if (cycle) *cycle = false;
  const std::string *current = &title;
  std::set<std::string_view> visited;
  for (int hops = 0;; ++hops) {
    if (auto it = title_index.find(*current); it != title_index.end()) {
      return it->second;
    }
    auto next = redirects.find(*current);
    if (next == redirects.end()) return std::nullopt;
    if (hops == kMaxRedirectDepth || !visited.insert(*current).second) {
      if (cycle) *cycle = true;
      return std::nullopt;
    }
    current = &next->second;
  }
}

AliasTable BuildAliasTable(std::span<const WikiPage> pages,
                           const std::map<std::string, std::string> &redirects,
                           const std::map<std::string, EntityId> &title_index,
                           AliasBuildStats *stats) {
  AliasBuildStats local;
  AliasCounts counts;
  auto add = [&](const std::string &surface, EntityId entity) {
    if (!ValidSurface(surface)) {
      ++local.bad_surface;
      return;
    }
    ++counts[surface][entity];
  };
  auto resolve = [&](const std::string &title) -> std::optional<EntityId> {
    bool cycle = false;
    auto entity = ResolveTitle(title, redirects, title_index, &cycle);
    if (!entity) ++(cycle ? local.cycles : local.unresolved);
    return entity;
  };

  for (const WikiPage &page : pages) {
    ++local.pages;
    add(page.title, page.entity);
  }
  for (const auto &[source, target] : redirects) {
    ++local.redirects;
    if (auto entity = resolve(target)) add(source, *entity);
  }
  for (const WikiPage &page : pages) {
    if (page.anchors.empty()) continue;
    std::u32string text = DecodeUtf8(page.text);
    for (const Anchor &a : page.anchors) {
      ++local.anchors;
      auto entity = resolve(a.target_title);
      if (!entity) continue;
      size_t end = std::min(a.end, text.size());
      if (a.start >= end) {
        ++local.bad_surface;
        continue;
      }
      add(EncodeUtf8(std::u32string_view(text).substr(a.start, end - a.start)),
          *entity);
    }
  }
  if (stats) *stats = local;
  return AliasTable(counts);
}

AliasTable CountUnlinked(const AliasTable &at,
                         std::span<const WikiPage> pages) {
  std::vector<std::string> surfaces;
  std::vector<std::u32string> patterns;
  for (const auto &[surface, list] : at.entries()) {
    surfaces.push_back(surface);
    patterns.push_back(DecodeUtf8(surface));
  }
  std::vector<UnlinkedStats> stats(surfaces.size());
  AhoCorasick matcher(std::move(patterns));

  for (const WikiPage &page : pages) {
    std::u32string text = DecodeUtf8(page.text);
    // Anchors are sorted and disjoint (ParseWikiPageLine); sort defensively
    // for pages built in code.
    std::vector<std::pair<size_t, size_t>> spans;
    for (const Anchor &a : page.anchors) spans.emplace_back(a.start, a.end);
    std::sort(spans.begin(), spans.end());

    for (const auto &[start, end] : spans) {
      if (start >= end || end > text.size()) continue;
      std::string surface = EncodeUtf8(
          std::u32string_view(text).substr(start, end - start));
      auto it = std::lower_bound(surfaces.begin(), surfaces.end(), surface);
      if (it != surfaces.end() && *it == surface) {
        ++stats[it - surfaces.begin()].linked;
      }
    }

    // Prefix maximum of anchor ends lets us test "overlaps any anchor" for
    // a match [s, e) by finding anchors starting before e.
    std::vector<size_t> starts, max_end;
    size_t running = 0;
    for (const auto &[start, end] : spans) {
      starts.push_back(start);
      running = std::max(running, end);
      max_end.push_back(running);
    }
    auto overlaps_anchor = [&](size_t s, size_t e) {
      size_t n = std::lower_bound(starts.begin(), starts.end(), e) -
                 starts.begin();
      return n > 0 && max_end[n - 1] > s;
    };

    std::vector<size_t> last_end(surfaces.size(), 0);
    std::vector<bool> seen(surfaces.size(), false);
    for (const AhoCorasick::Match &m : matcher.FindAll(text)) {
      if (overlaps_anchor(m.start, m.end)) continue;
      if (seen[m.pattern] && m.start < last_end[m.pattern]) continue;
      seen[m.pattern] = true;
      last_end[m.pattern] = m.end;
      ++stats[m.pattern].unlinked;
    }
  }

  SurfaceMap<UnlinkedStats> unlinked;
  for (size_t i = 0; i < surfaces.size(); ++i) {
    unlinked.emplace(surfaces[i], stats[i]);
  }
  return AliasTable(at.Counts(), std::move(unlinked));
}

AliasTable Merge(const AliasTable &base, std::span<const ExtraAlias> extra) {
  AliasCounts counts = base.Counts();
  for (const ExtraAlias &e : extra) {
    if (!ValidSurface(e.surface)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "bad alias surface '" + e.surface + "'");
    }
    counts[e.surface][e.entity] += e.count;
  }
  return AliasTable(counts, base.unlinked());
}

void WriteAliasTable(const AliasTable &at, const std::filesystem::path &path) {
  std::string out;
  char prior[32];
  for (const auto &[surface, list] : at.entries()) {
    for (const AliasEntry &e : list) {
      std::snprintf(prior, sizeof(prior), "%.6f", e.prior);
      out += surface + "\t" + e.entity.str() + "\t" + std::to_string(e.count) +
             "\t" + prior + "\n";
    }
  }
  WriteFile(path, out);
}

void WriteUnlinked(const AliasTable &at, const std::filesystem::path &path) {
  std::string out;
  for (const auto &[surface, s] : at.unlinked()) {
    out += surface + "\t" + std::to_string(s.linked) + "\t" +
           std::to_string(s.unlinked) + "\n";
  }
  WriteFile(path, out);
}

AliasTable ReadAliasTable(const std::filesystem::path &alias_path,
                          const std::filesystem::path &unlinked_path) {
  AliasCounts counts;
  {
    std::ifstream in = OpenInput(alias_path);
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      std::string_view view = StripCr(line);
      if (view.empty()) continue;
      std::string where =
          alias_path.filename().string() + ":" + std::to_string(line_no);
      auto fields = SplitTabs(view);
      if (fields.size() != 4 || fields[0].empty()) {
        throw Error(ErrorCode::kInvalidInput, where + ": expected 4 fields");
      }
      counts[fields[0]][ParseEntityId(fields[1])] +=
          ParseUint(fields[2], where);
    }
  }
  SurfaceMap<UnlinkedStats> unlinked;
  if (!unlinked_path.empty()) {
    std::ifstream in = OpenInput(unlinked_path);
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      std::string_view view = StripCr(line);
      if (view.empty()) continue;
      std::string where =
          unlinked_path.filename().string() + ":" + std::to_string(line_no);
      auto fields = SplitTabs(view);
      if (fields.size() != 3 || fields[0].empty()) {
        throw Error(ErrorCode::kInvalidInput, where + ": expected 3 fields");
      }
      unlinked[fields[0]] = UnlinkedStats{ParseUint(fields[1], where),
                                          ParseUint(fields[2], where)};
    }
  }
  return AliasTable(counts, std::move(unlinked));
}

std::vector<ExtraAlias> ReadExtraAliases(const std::filesystem::path &path) {
  std::ifstream in = OpenInput(path);
  std::vector<ExtraAlias> extra;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = StripCr(line);
    if (view.empty()) continue;
    std::string where = path.filename().string() + ":" + std::to_string(line_no);
    auto fields = SplitTabs(view);
    if (fields.size() != 3 || fields[0].empty()) {
      throw Error(ErrorCode::kInvalidInput, where + ": expected 3 fields");
    }
    extra.push_back(ExtraAlias{fields[0], ParseEntityId(fields[1]),
                               ParseUint(fields[2], where)});
  }
  return extra;
}

}  // namespace elkit
