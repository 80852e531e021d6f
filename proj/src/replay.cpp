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

#include "storelabel/replay.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace storelabel {

namespace {

using nlohmann::json;

std::string compose_assignment(const AccessEvent& event) {
  std::string assignment = event.object_key + "=" + event.value.value_or("");
  if (event.attrs && !event.attrs->empty()) {
    assignment += "; " + *event.attrs;
  }
  return assignment;
}

// One replay driver per event; throws surface as ReplayIssues at the caller.
class ReplayDriver {
 public:
  ReplayDriver(ReplayResult& result, ReplayMode mode, PartyScope scope,
               const PublicSuffixList& psl)
      : result_(result), mode_(mode), scope_(scope), psl_(psl) {}

  void feed(const AccessEvent& event) {
    switch (event.api) {
      case Api::GetCookie:
        return get_cookie(event);
      case Api::SetCookie:
        return set_cookie(event);
      case Api::HttpSetCookie:
        return http_set_cookie(event);
      case Api::GetItem:
        return storage_get(event, result_.storage.local(event.host),
                           event.object_key);
      case Api::SetItem:
        return storage_set(event, result_.storage.local(event.host),
                           event.object_key);
      case Api::IdbGet:
        return storage_get(event, idb_partition(event),
                           idb_inner_key(event.object_key));
      case Api::IdbPut:
        return storage_set(event, idb_partition(event),
                           idb_inner_key(event.object_key));
      case Api::SetReaders:
      case Api::SetWriters:
        return label_op(event);
    }
  }

 private:
  void deny(const AccessEvent& event, AccessMode mode, AccessReason reason) {
    result_.denials.push_back({event.seq, event.site_id, event.script,
                               event.object_key, mode, reason});
  }

  void get_cookie(const AccessEvent& event) {
    auto decision = result_.jar.js_read_decision(
        event.host, event.script, event.object_key,
        static_cast<std::int64_t>(event.seq));
    if (decision && !decision->allowed) {
      deny(event, AccessMode::Read, decision->reason);
    }
  }

  void set_cookie(const AccessEvent& event) {
    const auto now = static_cast<std::int64_t>(event.seq);
    const std::string assignment = compose_assignment(event);

    if (mode_ == ReplayMode::Enforce) {
      auto outcome = result_.jar.js_set_cookie(event.host, event.script,
                                               assignment, now, psl_);
      if (auto* error = std::get_if<CookieParseError>(&outcome)) {
        throw std::invalid_argument(error->attribute + ": " + error->message);
      }
      const auto& write = std::get<WriteOutcome>(outcome);
      if (!write.applied) {
        deny(event, AccessMode::Write, write.decision.reason);
      }
      return;
    }

    // Observe: record the would-be decision against the existing record,
    // then mimic an unmodified browser.
    const CookieRecord* existing =
        result_.jar.find(event.host, event.object_key, now);
    if (!existing) {
      auto outcome = result_.jar.js_set_cookie(event.host, event.script,
                                               assignment, now, psl_);
      if (auto* error = std::get_if<CookieParseError>(&outcome)) {
        throw std::invalid_argument(error->attribute + ": " + error->message);
      }
      return;  // creation is allowed under both semantics
    }
    if (existing->http_only) {
      deny(event, AccessMode::Write, AccessReason::HttpOnlyDeny);
      return;  // legacy browsers reject this write as well
    }
    Decision decision =
        decide_access(existing->label, existing->owner, event.host,
                      event.script, AccessMode::Write, scope_);
    if (decision.allowed) {
      auto outcome = result_.jar.js_set_cookie(event.host, event.script,
                                               assignment, now, psl_);
      if (auto* error = std::get_if<CookieParseError>(&outcome)) {
        throw std::invalid_argument(error->attribute + ": " + error->message);
      }
      return;
    }
    auto parsed = parse_set_cookie(assignment, event.host, now, psl_);
    if (auto* error = std::get_if<CookieParseError>(&parsed)) {
      throw std::invalid_argument(error->attribute + ": " + error->message);
    }
    deny(event, AccessMode::Write, decision.reason);
    CookieRecord record = std::move(std::get<CookieRecord>(parsed));
    record.owner = event.script;
    result_.jar.legacy_set_cookie(event.host, record, now);
  }

  void http_set_cookie(const AccessEvent& event) {
    const auto now = static_cast<std::int64_t>(event.seq);
    // The script field carries the responding server for HTTP writes.
    auto parsed =
        parse_set_cookie(compose_assignment(event), event.script, now, psl_);
    if (auto* error = std::get_if<CookieParseError>(&parsed)) {
      throw std::invalid_argument(error->attribute + ": " + error->message);
    }
    result_.jar.http_set_cookie(std::get<CookieRecord>(parsed));
  }

  StoragePartition& idb_partition(const AccessEvent& event) {
    auto parts = split_idb_key(event.object_key);
    if (!parts) {
      throw std::invalid_argument("IndexedDB key \"" + event.object_key +
                                  "\" is not in db/store/key form");
    }
    return result_.storage.idb(event.host, std::get<0>(*parts),
                               std::get<1>(*parts));
  }

  static std::string idb_inner_key(std::string_view object_key) {
    auto parts = split_idb_key(object_key);
    return parts ? std::get<2>(*parts) : std::string(object_key);
  }

  void storage_get(const AccessEvent& event, StoragePartition& partition,
                   const std::string& key) {
    ReadResult read = partition.get_item(event.script, key);
    if (read.is_denied()) {
      deny(event, AccessMode::Read, read.decision->reason);
    }
  }

  void storage_set(const AccessEvent& event, StoragePartition& partition,
                   const std::string& key) {
    const std::string& value = event.value ? *event.value : std::string();

    if (mode_ == ReplayMode::Enforce) {
      auto outcome = partition.set_item(event.script, key, value);
      if (!outcome.applied) {
        deny(event, AccessMode::Write, outcome.decision.reason);
      }
      return;
    }

    const StorageRecord* existing = partition.find(key);
    if (!existing) {
      partition.set_item(event.script, key, value);
      return;
    }
    Decision decision =
        decide_access(existing->label, existing->owner, event.host,
                      event.script, AccessMode::Write, scope_);
    if (decision.allowed) {
      partition.set_item(event.script, key, value);
      return;
    }
    deny(event, AccessMode::Write, decision.reason);
    partition.legacy_set_item(event.script, key, value);
  }

  void label_op(const AccessEvent& event) {
    if (!event.value) {
      throw std::invalid_argument(
          "setReaders/setWriters event is missing the domain-set value");
    }
    std::string error;
    auto domains = parse_domain_set(*event.value, psl_, &error);
    if (!domains) throw std::invalid_argument(error);

    auto idb = split_idb_key(event.object_key);
    StoragePartition& partition =
        idb ? result_.storage.idb(event.host, std::get<0>(*idb),
                                  std::get<1>(*idb))
            : result_.storage.local(event.host);
    const std::string key =
        idb ? std::get<2>(*idb) : event.object_key;

    // Label ops have no legacy analogue; both modes apply them identically.
    auto outcome = event.api == Api::SetReaders
                       ? partition.set_readers(event.script, key,
                                               std::move(*domains))
                       : partition.set_writers(event.script, key,
                                               std::move(*domains));
    if (!outcome.applied) {
      deny(event, AccessMode::Write, outcome.decision.reason);
    }
  }

  ReplayResult& result_;
  ReplayMode mode_;
  PartyScope scope_;
  const PublicSuffixList& psl_;
};

}  // namespace

std::string_view to_string(ReplayMode mode) {
  return mode == ReplayMode::Observe ? "observe" : "enforce";
}

ReplayResult replay(const std::vector<AccessEvent>& events, ReplayMode mode,
                    PartyScope scope, const PublicSuffixList& psl) {
  ReplayResult result(scope);
  ReplayDriver driver(result, mode, scope, psl);
  for (const auto& event : events) {
    try {
      driver.feed(event);
    } catch (const std::exception& e) {
      result.issues.push_back({event.seq, e.what()});
    }
  }
  return result;
}

BreakageReport breakage_report(const std::vector<DenialEvent>& denials,
                               std::size_t top_n) {
  struct SiteAgg {
    std::uint64_t reads = 0;
    std::uint64_t writes = 0;
    std::set<std::string> scripts;
    std::set<std::string> objects;
  };
  std::map<std::string, SiteAgg> sites;
  std::map<std::string, std::uint64_t> by_script;

  BreakageReport report;
  for (const auto& denial : denials) {
    auto& agg = sites[denial.site_id];
    if (denial.mode == AccessMode::Read) {
      agg.reads += 1;
      report.total_denied_reads += 1;
    } else {
      agg.writes += 1;
      report.total_denied_writes += 1;
    }
    agg.scripts.insert(denial.accessor.registrable);
    agg.objects.insert(denial.object_key);
    by_script[denial.accessor.registrable] += 1;
  }
  report.total_denials = denials.size();

  for (const auto& [site_id, agg] : sites) {
    report.sites.push_back({site_id, agg.reads, agg.writes,
                            agg.scripts.size(), agg.objects.size()});
  }

  std::vector<BreakageReport::ScriptDenials> ranked;
  ranked.reserve(by_script.size());
  for (const auto& [script, count] : by_script) {
    ranked.push_back({script, count});
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.denials != b.denials) return a.denials > b.denials;
    return a.script < b.script;
  });
  if (ranked.size() > top_n) ranked.resize(top_n);
  report.top_scripts = std::move(ranked);
  return report;
}

Blocklist Blocklist::from_string(std::string_view text) {
  Blocklist list;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto eol = text.find('\n', pos);
    std::string_view line = eol == std::string_view::npos
                                ? text.substr(pos)
                                : text.substr(pos, eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;

    if (auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    while (!line.empty() &&
           std::isspace(static_cast<unsigned char>(line.front()))) {
      line.remove_prefix(1);
    }
    while (!line.empty() &&
           std::isspace(static_cast<unsigned char>(line.back()))) {
      line.remove_suffix(1);
    }
    if (line.empty()) continue;

    std::string entry(line);
    std::transform(entry.begin(), entry.end(), entry.begin(),
                   [](unsigned char c) {
                     return static_cast<char>(std::tolower(c));
                   });
    list.entries_.insert(std::move(entry));
  }
  return list;
}

Blocklist Blocklist::from_file(const std::string& path) {
  std::ifstream file(path);
  if (!file) {
    throw std::runtime_error("cannot read blocklist: " + path);
  }
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return from_string(buffer.str());
}

bool Blocklist::matches(const Domain& script) const {
  // An entry covers itself and every subdomain (suffix at a label boundary).
  std::string_view host = script.raw_host;
  while (!host.empty()) {
    if (entries_.contains(std::string(host))) return true;
    auto dot = host.find('.');
    if (dot == std::string_view::npos) break;
    host.remove_prefix(dot + 1);
  }
  return false;
}

double blocklist_coverage(const std::vector<AccessEvent>& events,
                          const Blocklist& list, PartyScope scope) {
  std::uint64_t third_party = 0;
  std::uint64_t matched = 0;
  for (const auto& event : events) {
    if (!is_script_api(event.api)) continue;
    if (same_party(event.script, event.host, scope)) continue;
    third_party += 1;
    if (list.matches(event.script)) matched += 1;
  }
  if (third_party == 0) {
    throw std::domain_error(
        "blocklist_coverage: the log has no third-party accesses");
  }
  return round_percent(100.0 * static_cast<double>(matched) /
                       static_cast<double>(third_party));
}

std::string denials_tsv(const std::vector<DenialEvent>& denials) {
  std::string out = "seq\tsite\tscript\tobject\tmode\treason\n";
  for (const auto& denial : denials) {
    out += std::to_string(denial.event_seq) + "\t" + denial.site_id + "\t" +
           denial.accessor.raw_host + "\t" + denial.object_key + "\t" +
           std::string(to_string(denial.mode)) + "\t" +
           std::string(to_string(denial.reason)) + "\n";
  }
  return out;
}

std::string breakage_report_tsv(const BreakageReport& report) {
  std::string out;
  out += "site\tdenied_reads\tdenied_writes\tdistinct_scripts\tdistinct_objects\n";
  for (const auto& site : report.sites) {
    out += site.site_id + "\t" + std::to_string(site.denied_reads) + "\t" +
           std::to_string(site.denied_writes) + "\t" +
           std::to_string(site.distinct_scripts) + "\t" +
           std::to_string(site.distinct_objects) + "\n";
  }
  out += "\nscript\tdenials\n";
  for (const auto& script : report.top_scripts) {
    out += script.script + "\t" + std::to_string(script.denials) + "\n";
  }
  out += "\ntotal_denied_reads\ttotal_denied_writes\ttotal_denials\n";
  out += std::to_string(report.total_denied_reads) + "\t" +
         std::to_string(report.total_denied_writes) + "\t" +
         std::to_string(report.total_denials) + "\n";
  return out;
}

std::string breakage_report_json(const BreakageReport& report,
                                 const std::vector<DenialEvent>& denials,
                                 std::optional<double> blocklist_coverage_pct) {
  json doc;
  doc["total_denied_reads"] = report.total_denied_reads;
  doc["total_denied_writes"] = report.total_denied_writes;
  doc["total_denials"] = report.total_denials;
  if (blocklist_coverage_pct) {
    doc["blocklist_coverage_pct"] = *blocklist_coverage_pct;
  }

  json sites = json::array();
  for (const auto& site : report.sites) {
    sites.push_back({{"site", site.site_id},
                     {"denied_reads", site.denied_reads},
                     {"denied_writes", site.denied_writes},
                     {"distinct_scripts", site.distinct_scripts},
                     {"distinct_objects", site.distinct_objects}});
  }
  doc["sites"] = std::move(sites);

  json top = json::array();
  for (const auto& script : report.top_scripts) {
    top.push_back({{"script", script.script}, {"denials", script.denials}});
  }
  doc["top_scripts"] = std::move(top);

  json rows = json::array();
  for (const auto& denial : denials) {
    rows.push_back({{"seq", denial.event_seq},
                    {"site", denial.site_id},
                    {"script", denial.accessor.raw_host},
                    {"object", denial.object_key},
                    {"mode", std::string(to_string(denial.mode))},
                    {"reason", std::string(to_string(denial.reason))}});
  }
  doc["denials"] = std::move(rows);
  return doc.dump(2) + "\n";
}

}  // namespace storelabel
