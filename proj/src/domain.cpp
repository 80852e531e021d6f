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

#include "storelabel/domain.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

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

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

// Drops everything around the host of a URL-ish input: scheme, userinfo,
// port, path, query, fragment.
std::string_view extract_host(std::string_view input) {
  if (auto scheme = input.find("://"); scheme != std::string_view::npos) {
    input.remove_prefix(scheme + 3);
  } else if (input.starts_with("//")) {
    input.remove_prefix(2);
  }
  if (auto end = input.find_first_of("/?#"); end != std::string_view::npos) {
    input = input.substr(0, end);
  }
  if (auto at = input.rfind('@'); at != std::string_view::npos) {
    input.remove_prefix(at + 1);
  }
  if (auto colon = input.find(':'); colon != std::string_view::npos) {
    input = input.substr(0, colon);
  }
  return input;
}

bool valid_host_char(char c) {
  if (std::isalnum(static_cast<unsigned char>(c))) return true;
  return c == '-' || c == '_' || c == '.';
}

std::string_view drop_first_label(std::string_view host) {
  auto dot = host.find('.');
  return dot == std::string_view::npos ? std::string_view{}
                                       : host.substr(dot + 1);
}

bool all_digits(std::string_view label) {
  return !label.empty() &&
         std::all_of(label.begin(), label.end(), [](unsigned char c) {
           return std::isdigit(c) != 0;
         });
}

}  // namespace

PublicSuffixList PublicSuffixList::from_string(std::string_view text) {
  PublicSuffixList list;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto eol = text.find('\n', pos);
    std::string_view line = eol == std::string_view::npos
                                ? text.substr(pos)
                                : text.substr(pos, eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;

    line = trim(line);
    if (line.empty() || line.starts_with("//")) continue;

    if (line.starts_with('!')) {
      list.exception_.insert(to_lower(line.substr(1)));
    } else if (line.starts_with("*.")) {
      list.wildcard_.insert(to_lower(line.substr(2)));
    } else {
      list.exact_.insert(to_lower(line));
    }
  }
  return list;
}

PublicSuffixList PublicSuffixList::from_file(const std::string& path) {
  std::ifstream file(path);
  if (!file) {
    throw std::runtime_error("cannot read public suffix list: " + path);
  }
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return from_string(buffer.str());
}

const PublicSuffixList& PublicSuffixList::bundled() {
  extern const char* bundled_public_suffix_snapshot();
  static const PublicSuffixList list =
      from_string(bundled_public_suffix_snapshot());
  return list;
}

bool PublicSuffixList::is_public_suffix(std::string_view host) const {
  if (host.empty()) return false;
  const std::string key(host);
  if (exception_.contains(key)) return false;
  if (exact_.contains(key)) return true;
  auto parent = drop_first_label(host);
  return !parent.empty() && wildcard_.contains(std::string(parent));
}

std::string_view PublicSuffixList::public_suffix_of(std::string_view host) const {
  // Exception rules dominate: the matched domain is *not* a suffix, its
  // parent is.
  std::string_view probe = host;
  while (!probe.empty()) {
    if (exception_.contains(std::string(probe))) {
      if (auto parent = drop_first_label(probe); !parent.empty()) {
        return parent;
      }
      break;
    }
    probe = drop_first_label(probe);
  }
  // Longest match among exact and wildcard rules.
  probe = host;
  while (!probe.empty()) {
    if (is_public_suffix(probe)) return probe;
    probe = drop_first_label(probe);
  }
  // Implicit `*` rule: the last label.
  auto last_dot = host.rfind('.');
  return last_dot == std::string_view::npos ? host : host.substr(last_dot + 1);
}

std::optional<Domain> try_normalize_domain(std::string_view host_or_url,
                                           const PublicSuffixList& psl,
                                           std::string* error) {
  auto fail = [&](std::string message) -> std::optional<Domain> {
    if (error) *error = std::move(message);
    return std::nullopt;
  };

  std::string_view trimmed = trim(host_or_url);
  if (trimmed.empty()) return fail("empty host in \"" + std::string(host_or_url) + "\"");

  std::string host = to_lower(extract_host(trimmed));
  if (!host.empty() && host.back() == '.') host.pop_back();
  if (host.empty()) {
    return fail("no host in \"" + std::string(host_or_url) + "\"");
  }
  if (host.front() == '.' || host.find("..") != std::string::npos) {
    return fail("empty label in host \"" + std::string(host_or_url) + "\"");
  }
  for (char c : host) {
    if (!valid_host_char(c)) {
      return fail("invalid character '" + std::string(1, c) + "' in host \"" +
                  std::string(host_or_url) + "\"");
    }
  }

  Domain d;
  d.raw_host = host;

  std::string_view view = d.raw_host;
  auto last_label = view.substr(view.rfind('.') + 1);
  if (view.find('.') == std::string_view::npos || all_digits(last_label)) {
    // Single-label hosts (localhost) and IPv4-ish hosts pass through whole.
    d.registrable = d.raw_host;
    return d;
  }

  std::string_view suffix = psl.public_suffix_of(view);
  if (suffix.size() == view.size()) {
    return fail("host \"" + std::string(host_or_url) +
                "\" is a public suffix");
  }
  // One label ahead of the suffix.
  std::string_view front = view.substr(0, view.size() - suffix.size() - 1);
  auto dot = front.rfind('.');
  std::string_view reg_start =
      dot == std::string_view::npos ? front : front.substr(dot + 1);
  d.registrable = std::string(view.substr(reg_start.data() - view.data()));
  return d;
}

Domain normalize_domain(std::string_view host_or_url,
                        const PublicSuffixList& psl) {
  std::string error;
  auto d = try_normalize_domain(host_or_url, psl, &error);
  if (!d) throw std::invalid_argument(error);
  return *d;
}

bool same_party(const Domain& a, const Domain& b, PartyScope scope) {
  return a.party_key(scope) == b.party_key(scope);
}

}  // namespace storelabel
