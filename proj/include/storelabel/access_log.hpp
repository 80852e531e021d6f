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

#ifndef STORELABEL_ACCESS_LOG_HPP
#define STORELABEL_ACCESS_LOG_HPP

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "storelabel/access.hpp"
#include "storelabel/domain.hpp"

namespace storelabel {

/// The instrumented storage APIs a log line can carry. HttpSetCookie seeds
/// server-set cookies for replay; it is not a script access and is excluded
/// from classification.
enum class Api {
  GetCookie,
  SetCookie,
  HttpSetCookie,
  GetItem,
  SetItem,
  IdbGet,
  IdbPut,
  SetReaders,
  SetWriters,
};

std::string_view to_string(Api api);
std::optional<Api> parse_api(std::string_view token);

bool is_read_api(Api api);
/// Everything except HttpSetCookie.
bool is_script_api(Api api);

/// Storage family an object belongs to for creator attribution and
/// aggregation.
enum class ObjectKind { Cookie, Local, Idb };

std::string_view to_string(ObjectKind kind);

/// Kind of the object an event touches. Label ops target localStorage unless
/// the key uses the IndexedDB composite form `db/store/key`.
ObjectKind object_kind(Api api, std::string_view object_key);

/// Splits an IndexedDB composite key `db/store/key` into its parts; nullopt
/// when the key has fewer than two separators.
std::optional<std::tuple<std::string, std::string, std::string>>
split_idb_key(std::string_view object_key);

/// One logged storage API invocation.
struct AccessEvent {
  std::uint64_t seq = 0;
  Api api = Api::GetCookie;
  std::string site_id;
  Domain host;
  Domain script;
  std::string object_key;
  std::optional<std::string> value;
  std::optional<std::string> attrs;
};

struct LogIssue {
  std::size_t line = 0;
  std::string message;
};

struct ParsedLog {
  std::vector<AccessEvent> events;
  std::vector<LogIssue> issues;
};

/// Parses a JSON-lines event log. Required fields per line: seq, api, site,
/// host, script, key; optional: value, attrs. Blank lines and lines starting
/// with '#' are skipped. Malformed lines (bad JSON, unknown api, missing
/// field, non-monotone seq, bad host/script) are collected as issues with
/// their line number and parsing continues.
ParsedLog parse_event_log(std::istream& input,
                          const PublicSuffixList& psl = PublicSuffixList::bundled());
ParsedLog parse_event_log_text(std::string_view text,
                               const PublicSuffixList& psl = PublicSuffixList::bundled());

/// Serializes one event as a JSON log line (no trailing newline).
std::string to_log_line(const AccessEvent& event);

/// Objects are identified per site: (site_id, kind, object_key).
using ObjectId = std::tuple<std::string, ObjectKind, std::string>;

/// Creator attribution: the script domain of the first event, read or write,
/// touching each object. Events must be in seq order.
std::map<ObjectId, Domain> attribute_creators(
    const std::vector<AccessEvent>& events);

/// The five access categories of the measurement methodology.
enum class Category {
  FpCreatedFpAccessed,
  FpCreatedTpAccessed,
  TpCreatedFpAccessed,
  TpCreatedSameTpAccessed,
  TpCreatedOtherTpAccessed,
};

constexpr std::size_t kCategoryCount = 5;

std::string_view to_string(Category c);

/// Per-event category, aligned with `events`; nullopt for events that are
/// not script accesses (HttpSetCookie). Throws std::logic_error when an
/// event's object has no creator entry.
std::vector<std::optional<Category>> classify_events(
    const std::vector<AccessEvent>& events,
    const std::map<ObjectId, Domain>& creators,
    PartyScope scope = PartyScope::Registrable);

/// One cell of the measurement tables.
struct CellCounts {
  std::uint64_t websites = 0;
  std::uint64_t objects = 0;
  std::uint64_t accesses = 0;

  friend bool operator==(const CellCounts&, const CellCounts&) = default;
};

/// Aggregated counts per (kind x mode x category) plus the per-kind
/// third-party percentages of the summary table.
struct ClassificationReport {
  // cells[kind][mode][category]; mode 0 = read, 1 = write.
  std::array<std::array<std::array<CellCounts, kCategoryCount>, 2>, 3> cells{};

  struct KindSummary {
    std::uint64_t host_reads = 0;
    std::uint64_t tp_reads = 0;
    std::uint64_t host_writes = 0;
    std::uint64_t tp_writes = 0;
    std::optional<double> read_pct;
    std::optional<double> write_pct;
    std::optional<double> total_pct;

    friend bool operator==(const KindSummary&, const KindSummary&) = default;
  };
  std::array<KindSummary, 3> summary{};

  std::uint64_t classified_accesses = 0;

  const CellCounts& cell(ObjectKind kind, AccessMode mode, Category c) const;
  CellCounts& cell(ObjectKind kind, AccessMode mode, Category c);
  const KindSummary& kind_summary(ObjectKind kind) const;

  friend bool operator==(const ClassificationReport&,
                         const ClassificationReport&) = default;
};

/// Fills the report from classified events. Deterministic for identical
/// input.
ClassificationReport aggregate(
    const std::vector<AccessEvent>& events,
    const std::vector<std::optional<Category>>& categories,
    PartyScope scope = PartyScope::Registrable);

/// 100 * tp / (host + tp), rounded half-up to two decimals. Throws
/// std::domain_error when both counts are zero.
double percent_third_party(std::uint64_t host_count, std::uint64_t tp_count);

/// Rounds half-up to two decimals (shared by all report percentages).
double round_percent(double value);

std::string classification_report_tsv(const ClassificationReport& report);
std::string classification_report_json(const ClassificationReport& report);

}  // namespace storelabel

#endif  // STORELABEL_ACCESS_LOG_HPP
