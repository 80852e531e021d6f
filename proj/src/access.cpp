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

#include "storelabel/access.hpp"

#include <algorithm>

namespace storelabel {

namespace {

// Canonical set order: by raw host, duplicates (same raw host) collapsed.
void canonicalize(std::vector<Domain>& domains) {
  std::sort(domains.begin(), domains.end(),
            [](const Domain& a, const Domain& b) {
              return a.raw_host < b.raw_host;
            });
  domains.erase(std::unique(domains.begin(), domains.end(),
                            [](const Domain& a, const Domain& b) {
                              return a.raw_host == b.raw_host;
                            }),
                domains.end());
}

bool contains(const std::vector<Domain>& domains, const Domain& d,
              PartyScope scope) {
  return std::any_of(domains.begin(), domains.end(), [&](const Domain& m) {
    return same_party(m, d, scope);
  });
}

}  // namespace

std::string_view to_string(AccessMode mode) {
  return mode == AccessMode::Read ? "read" : "write";
}

Label::Label(std::vector<Domain> readers, std::vector<Domain> writers)
    : readers_(std::move(readers)), writers_(std::move(writers)) {
  canonicalize(readers_);
  canonicalize(writers_);
}

void Label::set_readers(std::vector<Domain> readers) {
  readers_ = std::move(readers);
  canonicalize(readers_);
}

void Label::set_writers(std::vector<Domain> writers) {
  writers_ = std::move(writers);
  canonicalize(writers_);
}

bool Label::readers_contain(const Domain& d, PartyScope scope) const {
  return contains(readers_, d, scope);
}

bool Label::writers_contain(const Domain& d, PartyScope scope) const {
  return contains(writers_, d, scope);
}

std::string_view to_string(AccessReason reason) {
  switch (reason) {
    case AccessReason::HostParty:
      return "host-party";
    case AccessReason::Owner:
      return "owner";
    case AccessReason::ReaderSet:
      return "reader-set";
    case AccessReason::WriterSet:
      return "writer-set";
    case AccessReason::DefaultDeny:
      return "default-deny";
    case AccessReason::HttpOnlyDeny:
      return "http-only-deny";
  }
  return "unknown";
}

std::optional<std::vector<Domain>> parse_domain_set(std::string_view braces,
                                                    const PublicSuffixList& psl,
                                                    std::string* error) {
  auto fail = [&](std::string message) -> std::optional<std::vector<Domain>> {
    if (error) *error = std::move(message);
    return std::nullopt;
  };
  auto trim = [](std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
      s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) {
      s.remove_suffix(1);
    }
    return s;
  };

  braces = trim(braces);
  if (braces.size() < 2 || braces.front() != '{' || braces.back() != '}') {
    return fail("expected a brace-delimited domain set, got \"" +
                std::string(braces) + "\"");
  }
  std::vector<Domain> members;
  std::string_view inner = braces.substr(1, braces.size() - 2);
  std::size_t pos = 0;
  while (pos <= inner.size()) {
    auto comma = inner.find(',', pos);
    std::string_view item = comma == std::string_view::npos
                                ? inner.substr(pos)
                                : inner.substr(pos, comma - pos);
    pos = comma == std::string_view::npos ? inner.size() + 1 : comma + 1;
    item = trim(item);
    if (item.empty()) continue;
    std::string member_error;
    auto d = try_normalize_domain(item, psl, &member_error);
    if (!d) return fail(std::move(member_error));
    members.push_back(std::move(*d));
  }
  return members;
}

std::string render_domain_set(const std::vector<Domain>& members) {
  std::string out = "{";
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (i) out += ',';
    out += members[i].raw_host;
  }
  out += '}';
  return out;
}

Decision decide_access(const Label& label, const Domain& owner,
                       const Domain& host, const Domain& accessor,
                       AccessMode mode, PartyScope scope) {
  if (same_party(accessor, host, scope)) {
    return {true, AccessReason::HostParty};
  }
  if (same_party(accessor, owner, scope)) {
    return {true, AccessReason::Owner};
  }
  if (mode == AccessMode::Read && label.readers_contain(accessor, scope)) {
    return {true, AccessReason::ReaderSet};
  }
  if (mode == AccessMode::Write && label.writers_contain(accessor, scope)) {
    return {true, AccessReason::WriterSet};
  }
  return {false, AccessReason::DefaultDeny};
}

}  // namespace storelabel
