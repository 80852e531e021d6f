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

#include "storelabel/cookie.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <ctime>
#include <iomanip>
#include <sstream>

namespace storelabel {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

// RFC 2616 token: printable ASCII minus separators.
bool is_cookie_token(std::string_view name) {
  if (name.empty()) return false;
  static constexpr std::string_view kSeparators = "()<>@,;:\\\"/[]?={} \t";
  return std::all_of(name.begin(), name.end(), [](unsigned char c) {
    return c > 0x20 && c < 0x7f && kSeparators.find(static_cast<char>(c)) ==
                                       std::string_view::npos;
  });
}

std::optional<std::int64_t> parse_int(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

// RFC1123 date ("Tue, 15 Jan 2030 21:47:38 GMT") or integer epoch seconds.
std::optional<std::int64_t> parse_expires(std::string_view s) {
  s = trim(s);
  if (auto epoch = parse_int(s)) return epoch;
  std::tm tm{};
  std::istringstream in{std::string(s)};
  in.imbue(std::locale::classic());
  in >> std::get_time(&tm, "%a, %d %b %Y %H:%M:%S");
  if (in.fail()) return std::nullopt;
  return static_cast<std::int64_t>(timegm(&tm));
}

}  // namespace

std::string_view to_string(SameSite s) {
  switch (s) {
    case SameSite::Strict:
      return "Strict";
    case SameSite::Lax:
      return "Lax";
    case SameSite::None:
      return "None";
    case SameSite::Unset:
      return "Unset";
  }
  return "Unset";
}

CookieParseResult parse_set_cookie(std::string_view header,
                                   const Domain& origin, std::int64_t now,
                                   const PublicSuffixList& psl) {
  auto fail = [](std::string attribute, std::string message) {
    return CookieParseResult{
        CookieParseError{std::move(attribute), std::move(message)}};
  };

  std::vector<std::string_view> segments;
  std::size_t pos = 0;
  while (pos <= header.size()) {
    auto semi = header.find(';', pos);
    segments.push_back(semi == std::string_view::npos
                           ? header.substr(pos)
                           : header.substr(pos, semi - pos));
    pos = semi == std::string_view::npos ? header.size() + 1 : semi + 1;
  }

  std::string_view pair = segments.front();
  auto eq = pair.find('=');
  if (eq == std::string_view::npos) {
    return fail("name-value", "missing '=' in cookie pair \"" +
                                  std::string(trim(pair)) + "\"");
  }

  CookieRecord record;
  record.name = std::string(trim(pair.substr(0, eq)));
  record.value = std::string(trim(pair.substr(eq + 1)));
  record.created_at = now;
  record.domain = origin;
  record.owner = origin;

  if (!is_cookie_token(record.name)) {
    return fail("name", "cookie name \"" + record.name + "\" is not a token");
  }

  std::vector<Domain> readers;
  std::vector<Domain> writers;
  std::optional<std::int64_t> max_age;
  std::optional<std::int64_t> expires;
  std::optional<Domain> explicit_owner;

  for (std::size_t i = 1; i < segments.size(); ++i) {
    std::string_view segment = trim(segments[i]);
    if (segment.empty()) continue;

    std::string_view key = segment;
    std::string_view value;
    if (auto attr_eq = segment.find('='); attr_eq != std::string_view::npos) {
      key = trim(segment.substr(0, attr_eq));
      value = trim(segment.substr(attr_eq + 1));
    }
    const std::string key_lc = lower(key);

    if (key_lc == "reader" || key_lc == "writer") {
      const std::string attr = key_lc == "reader" ? "Reader" : "Writer";
      std::string error;
      auto members = parse_domain_set(value, psl, &error);
      if (!members) return fail(attr, error);
      (key_lc == "reader" ? readers : writers) = std::move(*members);
    } else if (key_lc == "domain") {
      std::string_view host = value;
      if (host.starts_with('.')) host.remove_prefix(1);
      std::string error;
      auto d = try_normalize_domain(host, psl, &error);
      if (!d) return fail("Domain", error);
      record.domain = *d;
    } else if (key_lc == "owner") {
      std::string error;
      auto d = try_normalize_domain(value, psl, &error);
      if (!d) return fail("Owner", error);
      explicit_owner = std::move(*d);
    } else if (key_lc == "secure") {
      record.secure = true;
    } else if (key_lc == "httponly") {
      record.http_only = true;
    } else if (key_lc == "samesite") {
      const std::string v = lower(value);
      if (v == "strict") {
        record.same_site = SameSite::Strict;
      } else if (v == "lax") {
        record.same_site = SameSite::Lax;
      } else if (v == "none") {
        record.same_site = SameSite::None;
      } else {
        return fail("SameSite", "unknown SameSite value \"" +
                                    std::string(value) + "\"");
      }
    } else if (key_lc == "max-age") {
      auto seconds = parse_int(value);
      if (!seconds) {
        return fail("Max-Age", "Max-Age value \"" + std::string(value) +
                                   "\" is not an integer");
      }
      max_age = seconds;
    } else if (key_lc == "expires") {
      // Unparseable dates are ignored, as cookie parsers conventionally do.
      expires = parse_expires(value);
    } else if (key_lc == "path") {
      // Accepted and discarded: records carry no path dimension.
    } else {
      // Unknown attributes are ignored.
    }
  }

  if (max_age) {
    record.expires_at = now + *max_age;
  } else if (expires) {
    record.expires_at = expires;
  }

  // Owner defaults to the Domain attribute (or origin); the explicit Owner
  // attribute used by the canonical serialization overrides both.
  record.owner = explicit_owner ? std::move(*explicit_owner) : record.domain;
  record.label = Label(std::move(readers), std::move(writers));
  return record;
}

std::string canonical_set_cookie(const CookieRecord& record) {
  std::string out = record.name + "=" + record.value;
  out += "; Domain=" + record.domain.raw_host;
  out += "; Owner=" + record.owner.raw_host;
  out += "; Reader=" + render_domain_set(record.label.readers());
  out += "; Writer=" + render_domain_set(record.label.writers());
  if (record.secure) out += "; Secure";
  if (record.http_only) out += "; HttpOnly";
  if (record.same_site != SameSite::Unset) {
    out += "; SameSite=";
    out += to_string(record.same_site);
  }
  if (record.expires_at) {
    out += "; Expires=" + std::to_string(*record.expires_at);
  }
  return out;
}

std::vector<CookieRecord>& CookieJar::partition_of(const Domain& host) {
  return partitions_[host.registrable];
}

const CookieRecord* CookieJar::find(const Domain& host, std::string_view name,
                                    std::int64_t now) const {
  auto it = partitions_.find(host.registrable);
  if (it == partitions_.end()) return nullptr;
  for (const auto& record : it->second) {
    if (record.name == name) return record.expired(now) ? nullptr : &record;
  }
  return nullptr;
}

CookieRecord* CookieJar::find_mutable(const Domain& host,
                                      std::string_view name,
                                      std::int64_t now) {
  return const_cast<CookieRecord*>(
      static_cast<const CookieJar*>(this)->find(host, name, now));
}

void CookieJar::http_set_cookie(const CookieRecord& record) {
  auto& partition = partition_of(record.domain);
  for (auto& existing : partition) {
    if (existing.name == record.name) {
      existing = record;  // trusted path, keeps the original slot
      return;
    }
  }
  partition.push_back(record);
}

JsCookieResult CookieJar::js_set_cookie(const Domain& host,
                                        const Domain& script,
                                        std::string_view assignment,
                                        std::int64_t now,
                                        const PublicSuffixList& psl) {
  auto parsed = parse_set_cookie(assignment, host, now, psl);
  if (auto* error = std::get_if<CookieParseError>(&parsed)) {
    return *error;
  }
  CookieRecord record = std::move(std::get<CookieRecord>(parsed));
  // The JS path pins the partition to the host page and the owner to the
  // writing script; Domain/Owner attributes and HttpOnly are ignored.
  record.domain = host;
  record.owner = script;
  record.http_only = false;

  auto& partition = partition_of(host);
  auto slot = std::find_if(partition.begin(), partition.end(),
                           [&](const CookieRecord& r) {
                             return r.name == record.name;
                           });
  if (slot != partition.end() && slot->expired(now)) {
    partition.erase(slot);
    slot = partition.end();
  }

  if (slot == partition.end()) {
    // Creation is unconditional: the script becomes the owner and may grant
    // sharing through Reader/Writer in the same assignment.
    Decision decision = decide_access(record.label, record.owner, host, script,
                                      AccessMode::Write, scope_);
    partition.push_back(std::move(record));
    return WriteOutcome::accepted(decision);
  }

  if (slot->http_only) {
    return WriteOutcome::rejected(
        {false, AccessReason::HttpOnlyDeny},
        {script, std::string(record.name), AccessMode::Write});
  }

  Decision decision = decide_access(slot->label, slot->owner, host, script,
                                    AccessMode::Write, scope_);
  if (!decision.allowed) {
    return WriteOutcome::rejected(
        decision, {script, std::string(record.name), AccessMode::Write});
  }

  slot->value = std::move(record.value);
  slot->secure = record.secure;
  slot->same_site = record.same_site;
  slot->expires_at = record.expires_at;
  // Only the owner or the host may rewrite the sharing sets; the owner
  // itself never changes on this path.
  if (same_party(script, slot->owner, scope_) ||
      same_party(script, host, scope_)) {
    slot->label = std::move(record.label);
  }
  return WriteOutcome::accepted(decision);
}

std::string CookieJar::js_cookie_string(const Domain& host,
                                        const Domain& script,
                                        std::int64_t now) const {
  auto it = partitions_.find(host.registrable);
  if (it == partitions_.end()) return {};
  std::string out;
  for (const auto& record : it->second) {
    if (record.expired(now) || record.http_only) continue;
    if (!decide_access(record.label, record.owner, host, script,
                       AccessMode::Read, scope_)
             .allowed) {
      continue;  // denied records are indistinguishable from absence
    }
    if (!out.empty()) out += "; ";
    out += record.name + "=" + record.value;
  }
  return out;
}

std::optional<Decision> CookieJar::js_read_decision(const Domain& host,
                                                    const Domain& script,
                                                    std::string_view name,
                                                    std::int64_t now) const {
  auto it = partitions_.find(host.registrable);
  if (it == partitions_.end()) return std::nullopt;
  for (const auto& record : it->second) {
    if (record.name != name) continue;
    if (record.expired(now)) return std::nullopt;
    if (record.http_only) {
      return Decision{false, AccessReason::HttpOnlyDeny};
    }
    return decide_access(record.label, record.owner, host, script,
                         AccessMode::Read, scope_);
  }
  return std::nullopt;
}

void CookieJar::legacy_set_cookie(const Domain& host,
                                  const CookieRecord& parsed,
                                  std::int64_t now) {
  auto* existing = find_mutable(host, parsed.name, now);
  if (existing) {
    if (existing->http_only) return;  // legacy browsers block this too
    existing->value = parsed.value;
    existing->secure = parsed.secure;
    existing->same_site = parsed.same_site;
    existing->expires_at = parsed.expires_at;
    return;
  }
  CookieRecord record = parsed;
  record.domain = host;
  record.http_only = false;
  auto& partition = partition_of(host);
  std::erase_if(partition, [&](const CookieRecord& r) {
    return r.name == record.name;  // clear an expired slot, if any
  });
  partition.push_back(std::move(record));
}

void CookieJar::purge_expired(std::int64_t now) {
  for (auto& [key, partition] : partitions_) {
    std::erase_if(partition, [now](const CookieRecord& record) {
      return record.expired(now);
    });
  }
}

std::size_t CookieJar::size() const {
  std::size_t total = 0;
  for (const auto& [key, partition] : partitions_) {
    total += partition.size();
  }
  return total;
}

std::string dump_cookie_jar(const CookieJar& jar) {
  std::string out;
  for (const auto& [key, partition] : jar.partitions()) {
    for (const auto& record : partition) {
      out += canonical_set_cookie(record);
      out += '\n';
    }
  }
  return out;
}

}  // namespace storelabel
