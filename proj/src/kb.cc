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

#include "elkit/kb.h"

#include <algorithm>
#include <istream>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "elkit/errors.h"
#include "elkit/io.h"
#include "json.hpp"

namespace elkit {

using nlohmann::json;
using nlohmann::ordered_json;

const std::vector<EntityId> &Entity::Values(PropertyId property) const {
  static const std::vector<EntityId> kEmpty;
  auto it = claims.find(property);
  return it == claims.end() ? kEmpty : it->second;
}

namespace {

bool ReadOptionalString(const json &obj, const char *key, std::string *out) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return true;
  if (!it->is_string()) return false;
  *out = it->get<std::string>();
  return true;
}

}  // namespace

std::optional<Entity> ParseEntityLine(std::string_view line) {
  json doc = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) return std::nullopt;

  auto id_it = doc.find("id");
  if (id_it == doc.end() || !id_it->is_string()) return std::nullopt;
  auto id = EntityId::Parse(id_it->get<std::string>());
  if (!id) return std::nullopt;

  Entity entity;
  entity.id = *id;
  if (!ReadOptionalString(doc, "title", &entity.title)) return std::nullopt;
  if (!ReadOptionalString(doc, "description", &entity.description)) {
    return std::nullopt;
  }

  if (auto it = doc.find("aliases"); it != doc.end() && !it->is_null()) {
    if (!it->is_array()) return std::nullopt;
    for (const json &alias : *it) {
      if (!alias.is_string()) return std::nullopt;
      entity.wikidata_aliases.push_back(alias.get<std::string>());
    }
  }

  if (auto it = doc.find("claims"); it != doc.end() && !it->is_null()) {
    if (!it->is_object()) return std::nullopt;
    for (const auto &[key, values] : it->items()) {
      auto property = PropertyId::Parse(key);
      if (!property || !values.is_array()) return std::nullopt;
      std::vector<EntityId> &targets = entity.claims[*property];
      for (const json &value : values) {
        if (!value.is_string()) return std::nullopt;
        auto target = EntityId::Parse(value.get<std::string>());
        if (!target) return std::nullopt;
        if (std::find(targets.begin(), targets.end(), *target) ==
            targets.end()) {
          targets.push_back(*target);
        }
      }
      if (targets.empty()) entity.claims.erase(*property);
    }
  }
  return entity;
}

std::string SerializeEntity(const Entity &entity) {
  ordered_json doc;
  doc["id"] = entity.id.str();
  doc["title"] = entity.title;
  doc["description"] = entity.description;
  doc["aliases"] = entity.wikidata_aliases;
  ordered_json claims = ordered_json::object();
  for (const auto &[property, targets] : entity.claims) {
    ordered_json values = ordered_json::array();
    for (EntityId target : targets) values.push_back(target.str());
    claims[property.str()] = std::move(values);
  }
  doc["claims"] = std::move(claims);
  return doc.dump(-1, ' ', /*ensure_ascii=*/false,
                  json::error_handler_t::replace);
}

ParsedKb ParseKbLines(std::istream &in) {
  ParsedKb result;
  std::unordered_set<EntityId> seen;
  std::string line;
  while (std::getline(in, line)) {
    std::string_view view = StripCr(line);
    if (view.find_first_not_of(" \t") == std::string_view::npos) continue;
    auto entity = ParseEntityLine(view);
    if (!entity) {
      ++result.stats.malformed;
      continue;
    }
    if (!seen.insert(entity->id).second) {
      ++result.stats.duplicates;
      continue;
    }
    ++result.stats.parsed;
    result.entities.push_back(std::move(*entity));
  }
  if (in.bad()) throw Error(ErrorCode::kIo, "error reading KB stream");
  return result;
}

const std::set<EntityId> &DefaultFilterRoots() {
  static const std::set<EntityId> roots = [] {
    // Disambiguation page; templates; categories; modules; project page;
    // subclasses of the above.
    static constexpr uint64_t kQids[] = {
        4167410,
        11266439, 105528595, 11753321, 15671253, 19887878, 20769160,
        24731821, 26142649, 26267864, 36330215, 4657797, 48552277,
        56876519, 74980542, 95691391, 97303168,
        4167836, 105653689, 13406463, 1474116, 15407973, 15647814,
        20769287, 24574745, 30432511, 54662266, 59542487, 56428020,
        15184295, 15145755, 18711811, 59259626,
        14204246,
        97011660, 11266439, 25051296, 21528878, 4663903, 13406463,
        22247630, 30415057, 60715851, 15184295,
    };
    std::set<EntityId> out;
    for (uint64_t q : kQids) out.insert(EntityId(q));
    return out;
  }();
  return roots;
}

InternalFilterResult FilterWikimediaInternal(
    std::vector<Entity> entities, const std::set<EntityId> &filter_roots) {
  // Reverse P279 adjacency: class -> its direct subclasses.
  std::unordered_map<EntityId, std::vector<EntityId>> subclasses;
  for (const Entity &e : entities) {
    for (EntityId parent : e.Values(kSubclassOf)) {
      subclasses[parent].push_back(e.id);
    }
  }

  // Every node from which a root is reachable over P279 (roots included).
  std::unordered_set<EntityId> tainted(filter_roots.begin(),
                                       filter_roots.end());
  std::vector<EntityId> frontier(filter_roots.begin(), filter_roots.end());
  while (!frontier.empty()) {
    EntityId node = frontier.back();
    frontier.pop_back();
    auto it = subclasses.find(node);
    if (it == subclasses.end()) continue;
    for (EntityId child : it->second) {
      if (tainted.insert(child).second) frontier.push_back(child);
    }
  }

  InternalFilterResult result;
  for (Entity &e : entities) {
    bool hit = false;
    for (PropertyId p : {kInstanceOf, kSubclassOf}) {
      for (EntityId v : e.Values(p)) {
        if (tainted.count(v)) {
          hit = true;
          break;
        }
      }
      if (hit) break;
    }
    if (hit) {
      result.removed.push_back(e.id);
    } else {
      result.kept.push_back(std::move(e));
    }
  }
  return result;
}

std::vector<Entity> RestrictToWiki(std::vector<Entity> entities) {
  std::erase_if(entities, [](const Entity &e) { return e.title.empty(); });
  return entities;
}

KbSnapshot::KbSnapshot(std::vector<Entity> entities,
                       const std::set<EntityId> &known, FilterStats stats)
    : stats_(stats) {
  for (Entity &e : entities) {
    EntityId id = e.id;
    if (!entities_.emplace(id, std::move(e)).second) {
      throw Error(ErrorCode::kInvalidInput,
                  "duplicate entity " + id.str() + " in snapshot");
    }
    if (known.count(id)) {
      known_ids_.insert(id);
    } else {
      new_ids_.insert(id);
    }
  }
  stats_.kept = entities_.size();
  stats_.dangling_references = 0;
  for (const auto &[id, e] : entities_) {
    for (const auto &[p, targets] : e.claims) {
      for (EntityId t : targets) {
        if (!entities_.count(t)) ++stats_.dangling_references;
      }
    }
  }
}

const Entity *KbSnapshot::Find(EntityId id) const {
  auto it = entities_.find(id);
  return it == entities_.end() ? nullptr : &it->second;
}

const Entity &KbSnapshot::Get(EntityId id) const {
  const Entity *e = Find(id);
  if (e == nullptr) {
    throw Error(ErrorCode::kNotFound, "unknown entity " + id.str());
  }
  return *e;
}

std::map<std::string, EntityId> KbSnapshot::TitleIndex() const {
  std::map<std::string, EntityId> index;
  for (const auto &[id, e] : entities_) {
    if (!e.title.empty()) index.emplace(e.title, id);
  }
  return index;
}

KbSnapshot SplitKnownNew(std::vector<Entity> entities,
                         const std::set<EntityId> &known_ids,
                         FilterStats stats) {
  return KbSnapshot(std::move(entities), known_ids, stats);
}

KbSnapshot BuildSnapshot(std::istream &dump,
                         const std::set<EntityId> &known_ids,
                         const std::set<EntityId> &filter_roots) {
  ParsedKb parsed = ParseKbLines(dump);
  FilterStats stats = parsed.stats;
  InternalFilterResult filtered =
      FilterWikimediaInternal(std::move(parsed.entities), filter_roots);
  stats.filtered_internal = filtered.removed.size();
  size_t before = filtered.kept.size();
  std::vector<Entity> with_page = RestrictToWiki(std::move(filtered.kept));
  stats.no_wiki_page = before - with_page.size();
  return SplitKnownNew(std::move(with_page), known_ids, stats);
}

std::set<EntityId> ReadIdFile(const std::filesystem::path &path) {
  std::ifstream in = OpenInput(path);
  std::set<EntityId> ids;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = StripCr(line);
    size_t begin = view.find_first_not_of(" \t");
    if (begin == std::string_view::npos || view[begin] == '#') continue;
    size_t end = view.find_last_not_of(" \t");
    auto id = EntityId::Parse(view.substr(begin, end - begin + 1));
    if (!id) {
      throw Error(ErrorCode::kInvalidInput,
                  path.string() + ":" + std::to_string(line_no) +
                      ": bad QID");
    }
    ids.insert(*id);
  }
  if (in.bad()) throw Error(ErrorCode::kIo, "read failed: " + path.string());
  return ids;
}

namespace {

void WriteIds(const std::filesystem::path &path,
              const std::set<EntityId> &ids) {
  std::string out;
  for (EntityId id : ids) out += id.str() + "\n";
  WriteFile(path, out);
}

ordered_json StatsToJson(const FilterStats &s) {
  ordered_json j;
  j["parsed"] = s.parsed;
  j["malformed"] = s.malformed;
  j["duplicates"] = s.duplicates;
  j["filtered_internal"] = s.filtered_internal;
  j["no_wiki_page"] = s.no_wiki_page;
  j["kept"] = s.kept;
  j["dangling_references"] = s.dangling_references;
  return j;
}

}  // namespace

void WriteSnapshot(const KbSnapshot &kb, const std::filesystem::path &dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string());
  std::string lines;
  for (const auto &[id, e] : kb.entities()) {
    lines += SerializeEntity(e);
    lines += '\n';
  }
  WriteFile(dir / "entities.jsonl", lines);
  WriteIds(dir / "known_ids.txt", kb.known_ids());
  WriteIds(dir / "new_ids.txt", kb.new_ids());
  WriteFile(dir / "stats.json", StatsToJson(kb.stats()).dump(2) + "\n");
}

KbSnapshot ReadSnapshot(const std::filesystem::path &dir) {
  std::ifstream in = OpenInput(dir / "entities.jsonl");
  std::vector<Entity> entities;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = StripCr(line);
    if (view.empty()) continue;
    auto e = ParseEntityLine(view);
    if (!e) {
      throw Error(ErrorCode::kInvalidInput,
                  "entities.jsonl:" + std::to_string(line_no) + ": malformed");
    }
    entities.push_back(std::move(*e));
  }
  std::set<EntityId> known = ReadIdFile(dir / "known_ids.txt");

  FilterStats stats;
  if (std::filesystem::exists(dir / "stats.json")) {
    json j = json::parse(ReadFile(dir / "stats.json"), nullptr, false);
    if (j.is_object()) {
      stats.parsed = j.value("parsed", uint64_t{0});
      stats.malformed = j.value("malformed", uint64_t{0});
      stats.duplicates = j.value("duplicates", uint64_t{0});
      stats.filtered_internal = j.value("filtered_internal", uint64_t{0});
      stats.no_wiki_page = j.value("no_wiki_page", uint64_t{0});
    }
  }
  return KbSnapshot(std::move(entities), known, stats);
}

}  // namespace elkit
