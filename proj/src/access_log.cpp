/*
 * Copyright 2026 The Storelabel Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "storelabel/access_log.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "json.hpp"

namespace storelabel {

namespace {

using nlohmann::json;

constexpr std::array<std::pair<Api, std::string_view>, 9> kApiTokens{{
    {Api::GetCookie, "getCookie"},
    {Api::SetCookie, "setCookie"},
    {Api::HttpSetCookie, "httpSetCookie"},
    {Api::GetItem, "getItem"},
    {Api::SetItem, "setItem"},
    {Api::IdbGet, "idbGet"},
    {Api::IdbPut, "idbPut"},
    {Api::SetReaders, "setReaders"},
    {Api::SetWriters, "setWriters"},
}};

std::size_t kind_index(ObjectKind kind) {
  return static_cast<std::size_t>(kind);
}
std::size_t mode_index(AccessMode mode) {
  return mode == AccessMode::Read ? 0 : 1;
}
std::size_t category_index(Category c) { return static_cast<std::size_t>(c); }

constexpr std::array<ObjectKind, 3> kKinds{ObjectKind::Cookie,
                                           ObjectKind::Local, ObjectKind::Idb};
constexpr std::array<AccessMode, 2> kModes{AccessMode::Read,
                                           AccessMode::Write};
constexpr std::array<Category, kCategoryCount> kCategories{
    Category::FpCreatedFpAccessed,    Category::FpCreatedTpAccessed,
    Category::TpCreatedFpAccessed,    Category::TpCreatedSameTpAccessed,
    Category::TpCreatedOtherTpAccessed};

std::string format_pct(const std::optional<double>& pct) {
  if (!pct) return "-";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", *pct);
  return buf;
}

}  // namespace

std::string_view to_string(Api api) {
  for (const auto& [value, token] : kApiTokens) {
    if (value == api) return token;
  }
  return "unknown";
}

std::optional<Api> parse_api(std::string_view token) {
  for (const auto& [value, name] : kApiTokens) {
    if (name == token) return value;
  }
  return std::nullopt;
}

bool is_read_api(Api api) {
  return api == Api::GetCookie || api == Api::GetItem || api == Api::IdbGet;
}

bool is_script_api(Api api) { return api != Api::HttpSetCookie; }

std::string_view to_string(ObjectKind kind) {
  switch (kind) {
    case ObjectKind::Cookie:
      return "cookie";
    case ObjectKind::Local:
      return "localstorage";
    case ObjectKind::Idb:
      return "indexeddb";
  }
  return "unknown";
}

std::optional<std::tuple<std::string, std::string, std::string>>
split_idb_key(std::string_view object_key) {
  auto first = object_key.find('/');
  if (first == std::string_view::npos) return std::nullopt;
  auto second = object_key.find('/', first + 1);
  if (second == std::string_view::npos) return std::nullopt;
  return std::tuple{std::string(object_key.substr(0, first)),
                    std::string(object_key.substr(first + 1, second - first - 1)),
                    std::string(object_key.substr(second + 1))};
}

ObjectKind object_kind(Api api, std::string_view object_key) {
  switch (api) {
    case Api::GetCookie:
    case Api::SetCookie:
    case Api::HttpSetCookie:
      return ObjectKind::Cookie;
    case Api::GetItem:
    case Api::SetItem:
      return ObjectKind::Local;
    case Api::IdbGet:
    case Api::IdbPut:
      return ObjectKind::Idb;
    case Api::SetReaders:
    case Api::SetWriters:
      return split_idb_key(object_key) ? ObjectKind::Idb : ObjectKind::Local;
  }
  return ObjectKind::Local;
}

ParsedLog parse_event_log(std::istream& input, const PublicSuffixList& psl) {
  ParsedLog result;
  // Hosts repeat heavily across a log; normalize each spelling once.
  std::unordered_map<std::string, Domain> domain_cache;
  auto normalize_cached = [&](const std::string& raw,
                              std::string* error) -> const Domain* {
    auto it = domain_cache.find(raw);
    if (it != domain_cache.end()) return &it->second;
    auto d = try_normalize_domain(raw, psl, error);
    if (!d) return nullptr;
    return &domain_cache.emplace(raw, std::move(*d)).first->second;
  };

  std::string line;
  std::size_t line_no = 0;
  std::optional<std::uint64_t> last_seq;
  while (std::getline(input, line)) {
    ++line_no;
    std::string_view view = line;
    while (!view.empty() && (view.back() == '\r' || view.back() == ' ')) {
      view.remove_suffix(1);
    }
    if (view.empty() || view.front() == '#') continue;

    json doc = json::parse(view, nullptr, /*allow_exceptions=*/false);
    if (doc.is_discarded() || !doc.is_object()) {
      result.issues.push_back({line_no, "not a JSON object"});
      continue;
    }

    auto missing = [&](const char* field) {
      result.issues.push_back(
          {line_no,
           std::string("missing or invalid required field \"") + field + "\""});
    };

    AccessEvent event;
    bool ok = true;
    if (!doc.contains("seq") || !doc["seq"].is_number_unsigned()) {
      missing("seq");
      ok = false;
    } else {
      event.seq = doc["seq"].get<std::uint64_t>();
    }
    for (const char* field : {"api", "site", "host", "script", "key"}) {
      if (!doc.contains(field) || !doc[field].is_string()) {
        missing(field);
        ok = false;
      }
    }
    if (!ok) continue;

    const auto api_token = doc["api"].get<std::string>();
    auto api = parse_api(api_token);
    if (!api) {
      result.issues.push_back(
          {line_no, "unknown api token \"" + api_token + "\""});
      continue;
    }
    event.api = *api;
    event.site_id = doc["site"].get<std::string>();
    event.object_key = doc["key"].get<std::string>();

    std::string error;
    const Domain* host = normalize_cached(doc["host"].get<std::string>(), &error);
    if (!host) {
      result.issues.push_back({line_no, "bad host: " + error});
      continue;
    }
    const Domain* script =
        normalize_cached(doc["script"].get<std::string>(), &error);
    if (!script) {
      result.issues.push_back({line_no, "bad script: " + error});
      continue;
    }
    event.host = *host;
    event.script = *script;

    if (doc.contains("value")) {
      if (!doc["value"].is_string()) {
        result.issues.push_back({line_no, "field \"value\" must be a string"});
        continue;
      }
      event.value = doc["value"].get<std::string>();
    }
    if (doc.contains("attrs")) {
      if (!doc["attrs"].is_string()) {
        result.issues.push_back({line_no, "field \"attrs\" must be a string"});
        continue;
      }
      event.attrs = doc["attrs"].get<std::string>();
    }

    if (last_seq && event.seq <= *last_seq) {
      result.issues.push_back(
          {line_no, "non-monotone seq " + std::to_string(event.seq) +
                        " (previous " + std::to_string(*last_seq) + ")"});
      continue;
    }
    last_seq = event.seq;
    result.events.push_back(std::move(event));
  }
  return result;
}

ParsedLog parse_event_log_text(std::string_view text,
                               const PublicSuffixList& psl) {
  std::istringstream stream{std::string(text)};
  return parse_event_log(stream, psl);
}

std::string to_log_line(const AccessEvent& event) {
  json doc;
  doc["seq"] = event.seq;
  doc["api"] = std::string(to_string(event.api));
  doc["site"] = event.site_id;
  doc["host"] = event.host.raw_host;
  doc["script"] = event.script.raw_host;
  doc["key"] = event.object_key;
  if (event.value) doc["value"] = *event.value;
  if (event.attrs) doc["attrs"] = *event.attrs;
  return doc.dump();
}

std::map<ObjectId, Domain> attribute_creators(
    const std::vector<AccessEvent>& events) {
  std::map<ObjectId, Domain> creators;
  for (const auto& event : events) {
    ObjectId id{event.site_id, object_kind(event.api, event.object_key),
                event.object_key};
    creators.try_emplace(std::move(id), event.script);
  }
  return creators;
}

std::string_view to_string(Category c) {
  switch (c) {
    case Category::FpCreatedFpAccessed:
      return "fp_created_fp_accessed";
    case Category::FpCreatedTpAccessed:
      return "fp_created_tp_accessed";
    case Category::TpCreatedFpAccessed:
      return "tp_created_fp_accessed";
    case Category::TpCreatedSameTpAccessed:
      return "tp_created_same_tp_accessed";
    case Category::TpCreatedOtherTpAccessed:
      return "tp_created_other_tp_accessed";
  }
  return "unknown";
}

std::vector<std::optional<Category>> classify_events(
    const std::vector<AccessEvent>& events,
    const std::map<ObjectId, Domain>& creators, PartyScope scope) {
  std::vector<std::optional<Category>> categories;
  categories.reserve(events.size());
  for (const auto& event : events) {
    if (!is_script_api(event.api)) {
      categories.push_back(std::nullopt);
      continue;
    }
    ObjectId id{event.site_id, object_kind(event.api, event.object_key),
                event.object_key};
    auto it = creators.find(id);
    if (it == creators.end()) {
      throw std::logic_error("no creator entry for object \"" +
                             event.object_key + "\" on site \"" +
                             event.site_id + "\"");
    }
    const Domain& creator = it->second;
    const bool creator_fp = same_party(creator, event.host, scope);
    const bool accessor_fp = same_party(event.script, event.host, scope);
    Category category;
    if (creator_fp && accessor_fp) {
      category = Category::FpCreatedFpAccessed;
    } else if (creator_fp) {
      category = Category::FpCreatedTpAccessed;
    } else if (accessor_fp) {
      category = Category::TpCreatedFpAccessed;
    } else if (same_party(creator, event.script, scope)) {
      category = Category::TpCreatedSameTpAccessed;
    } else {
      category = Category::TpCreatedOtherTpAccessed;
    }
    categories.push_back(category);
  }
  return categories;
}

const CellCounts& ClassificationReport::cell(ObjectKind kind, AccessMode mode,
                                             Category c) const {
  return cells[kind_index(kind)][mode_index(mode)][category_index(c)];
}

CellCounts& ClassificationReport::cell(ObjectKind kind, AccessMode mode,
                                       Category c) {
  return cells[kind_index(kind)][mode_index(mode)][category_index(c)];
}

const ClassificationReport::KindSummary& ClassificationReport::kind_summary(
    ObjectKind kind) const {
  return summary[kind_index(kind)];
}

double round_percent(double value) {
  return std::floor(value * 100.0 + 0.5) / 100.0;
}

double percent_third_party(std::uint64_t host_count, std::uint64_t tp_count) {
  const std::uint64_t total = host_count + tp_count;
  if (total == 0) {
    throw std::domain_error(
        "percent_third_party: no accesses, the ratio is undefined");
  }
  return round_percent(100.0 * static_cast<double>(tp_count) /
                       static_cast<double>(total));
}

ClassificationReport aggregate(
    const std::vector<AccessEvent>& events,
    const std::vector<std::optional<Category>>& categories, PartyScope scope) {
  if (events.size() != categories.size()) {
    throw std::logic_error("aggregate: events and categories differ in size");
  }
  ClassificationReport report;

  // Distinct site and object tracking per cell.
  std::array<std::array<std::array<std::set<std::string>, kCategoryCount>, 2>, 3>
      sites;
  std::array<std::array<std::array<std::set<std::pair<std::string, std::string>>,
                                   kCategoryCount>, 2>, 3>
      objects;

  for (std::size_t i = 0; i < events.size(); ++i) {
    if (!categories[i]) continue;
    const auto& event = events[i];
    const ObjectKind kind = object_kind(event.api, event.object_key);
    const AccessMode mode =
        is_read_api(event.api) ? AccessMode::Read : AccessMode::Write;
    const Category category = *categories[i];

    CellCounts& cell = report.cell(kind, mode, category);
    cell.accesses += 1;
    sites[kind_index(kind)][mode_index(mode)][category_index(category)].insert(
        event.site_id);
    objects[kind_index(kind)][mode_index(mode)][category_index(category)]
        .insert({event.site_id, event.object_key});

    auto& kind_summary = report.summary[kind_index(kind)];
    const bool third_party = !same_party(event.script, event.host, scope);
    if (mode == AccessMode::Read) {
      (third_party ? kind_summary.tp_reads : kind_summary.host_reads) += 1;
    } else {
      (third_party ? kind_summary.tp_writes : kind_summary.host_writes) += 1;
    }
    report.classified_accesses += 1;
  }

  for (ObjectKind kind : kKinds) {
    for (AccessMode mode : kModes) {
      for (Category category : kCategories) {
        CellCounts& cell = report.cell(kind, mode, category);
        cell.websites =
            sites[kind_index(kind)][mode_index(mode)][category_index(category)]
                .size();
        cell.objects = objects[kind_index(kind)][mode_index(mode)]
                              [category_index(category)]
                                  .size();
      }
    }
    auto& s = report.summary[kind_index(kind)];
    if (s.host_reads + s.tp_reads > 0) {
      s.read_pct = percent_third_party(s.host_reads, s.tp_reads);
    }
    if (s.host_writes + s.tp_writes > 0) {
      s.write_pct = percent_third_party(s.host_writes, s.tp_writes);
    }
    if (s.host_reads + s.tp_reads + s.host_writes + s.tp_writes > 0) {
      s.total_pct = percent_third_party(s.host_reads + s.host_writes,
                                        s.tp_reads + s.tp_writes);
    }
  }
  return report;
}

std::string classification_report_tsv(const ClassificationReport& report) {
  std::string out;
  out += "kind\tmode\tcategory\twebsites\tobjects\taccesses\n";
  for (ObjectKind kind : kKinds) {
    for (AccessMode mode : kModes) {
      for (Category category : kCategories) {
        const CellCounts& cell = report.cell(kind, mode, category);
        out += std::string(to_string(kind)) + "\t" +
               std::string(to_string(mode)) + "\t" +
               std::string(to_string(category)) + "\t" +
               std::to_string(cell.websites) + "\t" +
               std::to_string(cell.objects) + "\t" +
               std::to_string(cell.accesses) + "\n";
      }
    }
  }
  out += "\n";
  out += "action\thost_accesses\tthird_party_accesses\tpct_third_party\n";
  for (ObjectKind kind : kKinds) {
    const auto& s = report.kind_summary(kind);
    out += "read_" + std::string(to_string(kind)) + "\t" +
           std::to_string(s.host_reads) + "\t" + std::to_string(s.tp_reads) +
           "\t" + format_pct(s.read_pct) + "\n";
    out += "write_" + std::string(to_string(kind)) + "\t" +
           std::to_string(s.host_writes) + "\t" + std::to_string(s.tp_writes) +
           "\t" + format_pct(s.write_pct) + "\n";
    out += "total_" + std::string(to_string(kind)) + "\t" +
           std::to_string(s.host_reads + s.host_writes) + "\t" +
           std::to_string(s.tp_reads + s.tp_writes) + "\t" +
           format_pct(s.total_pct) + "\n";
  }
  return out;
}

std::string classification_report_json(const ClassificationReport& report) {
  json doc;
  doc["classified_accesses"] = report.classified_accesses;
  json cells = json::array();
  for (ObjectKind kind : kKinds) {
    for (AccessMode mode : kModes) {
      for (Category category : kCategories) {
        const CellCounts& cell = report.cell(kind, mode, category);
        cells.push_back({{"kind", std::string(to_string(kind))},
                         {"mode", std::string(to_string(mode))},
                         {"category", std::string(to_string(category))},
                         {"websites", cell.websites},
                         {"objects", cell.objects},
                         {"accesses", cell.accesses}});
      }
    }
  }
  doc["cells"] = std::move(cells);
  json summary = json::array();
  for (ObjectKind kind : kKinds) {
    const auto& s = report.kind_summary(kind);
    json entry{{"kind", std::string(to_string(kind))},
               {"host_reads", s.host_reads},
               {"third_party_reads", s.tp_reads},
               {"host_writes", s.host_writes},
               {"third_party_writes", s.tp_writes}};
    entry["pct_third_party_reads"] =
        s.read_pct ? json(*s.read_pct) : json(nullptr);
    entry["pct_third_party_writes"] =
        s.write_pct ? json(*s.write_pct) : json(nullptr);
    entry["pct_third_party_total"] =
        s.total_pct ? json(*s.total_pct) : json(nullptr);
    summary.push_back(std::move(entry));
  }
  doc["summary"] = std::move(summary);
  return doc.dump(2) + "\n";
}

}  // namespace storelabel
