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

#ifndef STORELABEL_ACCESS_HPP
#define STORELABEL_ACCESS_HPP

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "storelabel/domain.hpp"

namespace storelabel {

enum class AccessMode { Read, Write };

std::string_view to_string(AccessMode mode);

/// The (readers, writers) pair attached to every stored object. Sets are
/// kept sorted by raw host and deduplicated, so equal labels compare equal.
class Label {
 public:
  Label() = default;
  Label(std::vector<Domain> readers, std::vector<Domain> writers);

  /// Replaces the reader set entirely (overwrite, never append).
  void set_readers(std::vector<Domain> readers);
  /// Replaces the writer set entirely.
  void set_writers(std::vector<Domain> writers);

  const std::vector<Domain>& readers() const { return readers_; }
  const std::vector<Domain>& writers() const { return writers_; }

  bool readers_contain(const Domain& d, PartyScope scope) const;
  bool writers_contain(const Domain& d, PartyScope scope) const;
  bool empty() const { return readers_.empty() && writers_.empty(); }

  friend bool operator==(const Label&, const Label&) = default;

 private:
  std::vector<Domain> readers_;
  std::vector<Domain> writers_;
};

/// Why an access decision came out the way it did. Allowed decisions carry
/// one of the first four reasons, denials one of the last two.
enum class AccessReason {
  HostParty,
  Owner,
  ReaderSet,
  WriterSet,
  DefaultDeny,
  HttpOnlyDeny,
};

std::string_view to_string(AccessReason reason);

struct Decision {
  bool allowed = false;
  AccessReason reason = AccessReason::DefaultDeny;

  friend bool operator==(const Decision&, const Decision&) = default;
};

/// The single access check every engine delegates to. Pure. Allows the host
/// party first, then the owner, then the label set matching `mode`; anything
/// else is a default deny.
Decision decide_access(const Label& label, const Domain& owner,
                       const Domain& host, const Domain& accessor,
                       AccessMode mode,
                       PartyScope scope = PartyScope::Registrable);

/// Parses a brace-delimited domain set: "{a.com, b.com}", "{}" for the empty
/// set, optional whitespace. Returns nullopt on unbalanced braces or a bad
/// member, with the reason in `error`.
std::optional<std::vector<Domain>> parse_domain_set(
    std::string_view braces,
    const PublicSuffixList& psl = PublicSuffixList::bundled(),
    std::string* error = nullptr);

/// Renders members as "{a.com,b.com}" in canonical (sorted raw host) order.
std::string render_domain_set(const std::vector<Domain>& members);

/// Who was turned away from what, recorded alongside a rejected write.
struct DenialDetail {
  Domain accessor;
  std::string object_key;
  AccessMode mode = AccessMode::Write;

  friend bool operator==(const DenialDetail&, const DenialDetail&) = default;
};

/// Result of a mutating engine operation. `applied` mirrors
/// `decision.allowed`; denials carry the detail.
struct WriteOutcome {
  bool applied = false;
  Decision decision;
  std::optional<DenialDetail> denial;

  static WriteOutcome accepted(Decision d) { return {true, d, std::nullopt}; }
  static WriteOutcome rejected(Decision d, DenialDetail detail) {
    return {false, d, std::move(detail)};
  }
};

}  // namespace storelabel

#endif  // STORELABEL_ACCESS_HPP
