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

#ifndef STORELABEL_REPLAY_HPP
#define STORELABEL_REPLAY_HPP

#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "storelabel/access.hpp"
#include "storelabel/access_log.hpp"
#include "storelabel/cookie.hpp"
#include "storelabel/domain.hpp"
#include "storelabel/webstorage.hpp"

namespace storelabel {

/// Enforce applies label checks (the instrumented browser under the default
/// policy); Observe records would-be denials and then applies the legacy
/// pre-label semantics so state matches an unmodified browser.
enum class ReplayMode { Observe, Enforce };

std::string_view to_string(ReplayMode mode);

/// One access that was (or would be) blocked.
struct DenialEvent {
  std::uint64_t event_seq = 0;
  std::string site_id;
  Domain accessor;
  std::string object_key;
  AccessMode mode = AccessMode::Read;
  AccessReason reason = AccessReason::DefaultDeny;

  friend bool operator==(const DenialEvent&, const DenialEvent&) = default;
};

struct ReplayIssue {
  std::uint64_t seq = 0;
  std::string message;
};

struct ReplayResult {
  CookieJar jar;
  StorageSpace storage;
  std::vector<DenialEvent> denials;
  std::vector<ReplayIssue> issues;

  ReplayResult(PartyScope scope) : jar(scope), storage(scope) {}
};

/// Feeds each event in seq order to the matching engine operation. Engines
/// start empty; grammar and argument errors surface as issues with the
/// offending seq and replay continues. Deterministic for identical input.
ReplayResult replay(const std::vector<AccessEvent>& events, ReplayMode mode,
                    PartyScope scope = PartyScope::Registrable,
                    const PublicSuffixList& psl = PublicSuffixList::bundled());

/// Per-site denial rollup plus the globally most-denied script domains.
struct BreakageReport {
  struct SiteBreakage {
    std::string site_id;
    std::uint64_t denied_reads = 0;
    std::uint64_t denied_writes = 0;
    std::uint64_t distinct_scripts = 0;
    std::uint64_t distinct_objects = 0;
  };
  struct ScriptDenials {
    std::string script;  // registrable domain
    std::uint64_t denials = 0;
  };

  std::vector<SiteBreakage> sites;        // sorted by site_id
  std::vector<ScriptDenials> top_scripts; // by count desc, ties lexicographic
  std::uint64_t total_denied_reads = 0;
  std::uint64_t total_denied_writes = 0;
  std::uint64_t total_denials = 0;
};

BreakageReport breakage_report(const std::vector<DenialEvent>& denials,
                               std::size_t top_n = 20);

/// Plain domain blocklist: newline-delimited entries, '#' comments. An entry
/// matches a script when it equals the script's host or is a parent domain
/// of it at a label boundary.
class Blocklist {
 public:
  static Blocklist from_string(std::string_view text);
  /// Throws std::runtime_error when the file cannot be read.
  static Blocklist from_file(const std::string& path);

  bool matches(const Domain& script) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::set<std::string> entries_;
};

/// 100 x (third-party accesses whose script matches the list) / (all
/// third-party accesses), half-up to two decimals. HttpSetCookie events are
/// not script accesses and are skipped. Throws std::domain_error when the
/// log has no third-party accesses.
double blocklist_coverage(const std::vector<AccessEvent>& events,
                          const Blocklist& list,
                          PartyScope scope = PartyScope::Registrable);

std::string denials_tsv(const std::vector<DenialEvent>& denials);
std::string breakage_report_tsv(const BreakageReport& report);
std::string breakage_report_json(const BreakageReport& report,
                                 const std::vector<DenialEvent>& denials,
                                 std::optional<double> blocklist_coverage_pct =
                                     std::nullopt);

}  // namespace storelabel

#endif  // STORELABEL_REPLAY_HPP
