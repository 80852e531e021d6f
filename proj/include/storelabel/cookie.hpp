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

#ifndef STORELABEL_COOKIE_HPP
#define STORELABEL_COOKIE_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "storelabel/access.hpp"
#include "storelabel/domain.hpp"

namespace storelabel {

enum class SameSite { Strict, Lax, None, Unset };

std::string_view to_string(SameSite s);

/// One labeled cookie. `domain` is the jar partition (the host page's domain
/// for script-set cookies); `owner` is the creating domain and never changes
/// after creation on the JS path.
struct CookieRecord {
  std::string name;
  std::string value;
  Domain domain;
  Domain owner;
  Label label;
  bool secure = false;
  bool http_only = false;
  SameSite same_site = SameSite::Unset;
  std::optional<std::int64_t> expires_at;
  std::int64_t created_at = 0;

  bool expired(std::int64_t now) const {
    return expires_at.has_value() && *expires_at <= now;
  }

  friend bool operator==(const CookieRecord&, const CookieRecord&) = default;
};

/// A grammar failure, naming the attribute at fault ("name-value", "Reader",
/// "Max-Age", ...).
struct CookieParseError {
  std::string attribute;
  std::string message;
};

using CookieParseResult = std::variant<CookieRecord, CookieParseError>;

/// Parses the value portion of one Set-Cookie header, including the label
/// extensions `Reader={d1,d2}` / `Writer={...}` and the `Owner=<d>` attribute
/// the canonical serialization emits. Attribute names are case-insensitive;
/// whitespace around `;`, `,` and `=` is tolerated; `{}` is the empty set.
/// Absent Reader/Writer attributes yield the default empty label. Owner
/// defaults to the Domain attribute's domain when present, else `origin`.
CookieParseResult parse_set_cookie(
    std::string_view header, const Domain& origin, std::int64_t now,
    const PublicSuffixList& psl = PublicSuffixList::bundled());

/// Canonical single-line serialization:
///   name=value; Domain=<d>; Owner=<o>; Reader={a,b}; Writer={c}
/// with label members sorted lexicographically, then Secure / HttpOnly /
/// SameSite=<v> when set and Expires=<epoch-seconds> when an expiry exists.
/// parse_set_cookie() on this string reproduces the record exactly.
std::string canonical_set_cookie(const CookieRecord& record);

/// Result of a JS-path write: either the outcome or a grammar error (the jar
/// is untouched on errors).
using JsCookieResult = std::variant<WriteOutcome, CookieParseError>;

/// Labeled cookie jar, partitioned by host domain; at most one record per
/// (partition, name). Insertion order inside a partition is preserved and
/// replacement keeps the original slot, so document.cookie order is stable.
class CookieJar {
 public:
  explicit CookieJar(PartyScope scope = PartyScope::Registrable)
      : scope_(scope) {}

  PartyScope scope() const { return scope_; }

  /// HTTP-path insert-or-replace. The HTTP path is trusted: labels and owner
  /// are taken from the record unconditionally.
  void http_set_cookie(const CookieRecord& record);

  /// document.cookie assignment by `script` on the page of `host`. Creates
  /// on an empty slot (owner = script, labels from the assignment); on an
  /// existing record applies decide_access(..., Write). Authorized writes
  /// replace value and standard attributes; only the owner or the host may
  /// replace the Reader/Writer sets. Owner never changes.
  JsCookieResult js_set_cookie(const Domain& host, const Domain& script,
                               std::string_view assignment, std::int64_t now,
                               const PublicSuffixList& psl = PublicSuffixList::bundled());

  /// The cookie string `script` sees on `host`: "name=value" pairs joined by
  /// "; " for every live, non-HttpOnly record whose read check passes, in
  /// insertion order. Denied records are omitted.
  std::string js_cookie_string(const Domain& host, const Domain& script,
                               std::int64_t now) const;

  /// Drops every record with expires_at <= now.
  void purge_expired(std::int64_t now);

  /// Live (non-expired) record lookup; nullptr when absent.
  const CookieRecord* find(const Domain& host, std::string_view name,
                           std::int64_t now) const;

  /// Per-event read check for a single named cookie, as the instrumented
  /// getCookie(name) API would evaluate it. nullopt when the cookie is
  /// absent (or expired), which is not a denial.
  std::optional<Decision> js_read_decision(const Domain& host,
                                           const Domain& script,
                                           std::string_view name,
                                           std::int64_t now) const;

  /// Legacy (pre-label) overwrite used by observe-mode replay: replaces
  /// value and standard attributes unconditionally, never owner or label.
  /// Creates the record when the slot is empty.
  void legacy_set_cookie(const Domain& host, const CookieRecord& parsed,
                         std::int64_t now);

  std::size_t size() const;
  bool empty() const { return size() == 0; }

  /// Partitions sorted by host registrable; records in insertion order.
  const std::map<std::string, std::vector<CookieRecord>>& partitions() const {
    return partitions_;
  }

 private:
  std::vector<CookieRecord>& partition_of(const Domain& host);
  CookieRecord* find_mutable(const Domain& host, std::string_view name,
                             std::int64_t now);

  PartyScope scope_;
  std::map<std::string, std::vector<CookieRecord>> partitions_;
};

/// One line per record in canonical form, partitions in key order. Used by
/// the simulate dumps and golden tests.
std::string dump_cookie_jar(const CookieJar& jar);

}  // namespace storelabel

#endif  // STORELABEL_COOKIE_HPP
