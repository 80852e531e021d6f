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

#ifndef STORELABEL_DOMAIN_HPP
#define STORELABEL_DOMAIN_HPP

#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>

namespace storelabel {

/// Granularity used when two domains are compared as the "same party".
/// Registrable (eTLD+1) is the default; ExactHost compares full hosts.
enum class PartyScope { Registrable, ExactHost };

/// A normalized host identity. `registrable` is the public-suffix-plus-one
/// grouping ("fp.com" for "a.b.fp.com"); `raw_host` keeps the lowercased
/// host the value was built from.
struct Domain {
  std::string registrable;
  std::string raw_host;

  const std::string& party_key(PartyScope scope) const {
    return scope == PartyScope::Registrable ? registrable : raw_host;
  }

  friend bool operator==(const Domain&, const Domain&) = default;
  friend auto operator<=>(const Domain&, const Domain&) = default;
};

/// Public suffix rules: exact entries, `*.` wildcards and `!` exceptions,
/// loaded from the plain-text list format (one rule per line, `//` comments).
class PublicSuffixList {
 public:
  static PublicSuffixList from_string(std::string_view text);
  /// Throws std::runtime_error when the file cannot be read.
  static PublicSuffixList from_file(const std::string& path);
  /// The snapshot compiled into the library.
  static const PublicSuffixList& bundled();

  bool is_public_suffix(std::string_view host) const;

  /// Longest public suffix of `host` under the loaded rules. Falls back to
  /// the last label when no rule matches (the implicit `*` rule). Returns a
  /// view into `host`.
  std::string_view public_suffix_of(std::string_view host) const;

  std::size_t rule_count() const {
    return exact_.size() + wildcard_.size() + exception_.size();
  }

 private:
  std::unordered_set<std::string> exact_;
  std::unordered_set<std::string> wildcard_;   // "*.foo.bar" stored as "foo.bar"
  std::unordered_set<std::string> exception_;  // "!x.foo.bar" stored as "x.foo.bar"
};

/// Normalizes a URL or bare hostname to a Domain. Accepts scheme, userinfo,
/// port, path, query and fragment and strips them; lowercases ASCII.
/// Throws std::invalid_argument naming the offending input when the host is
/// empty, malformed, or is itself a multi-label public suffix.
Domain normalize_domain(std::string_view host_or_url,
                        const PublicSuffixList& psl = PublicSuffixList::bundled());

/// Non-throwing variant; on failure returns nullopt and, when `error` is
/// given, stores the reason.
std::optional<Domain> try_normalize_domain(
    std::string_view host_or_url,
    const PublicSuffixList& psl = PublicSuffixList::bundled(),
    std::string* error = nullptr);

/// True when the two domains belong to the same party at the given scope.
bool same_party(const Domain& a, const Domain& b,
                PartyScope scope = PartyScope::Registrable);

}  // namespace storelabel

#endif  // STORELABEL_DOMAIN_HPP
