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

#ifndef STORELABEL_WEBSTORAGE_HPP
#define STORELABEL_WEBSTORAGE_HPP

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "storelabel/access.hpp"
#include "storelabel/domain.hpp"

namespace storelabel {

enum class StoreKind { Local, Idb };

/// One labeled storage entry. Owner is fixed at creation.
struct StorageRecord {
  std::string key;
  std::string value;
  Domain owner;
  Label label;

  friend bool operator==(const StorageRecord&, const StorageRecord&) = default;
};

/// Three-state read result. Denied carries the decision that produced it;
/// render() makes Denied indistinguishable from Absent.
struct ReadResult {
  enum class Status { Value, Absent, Denied };

  Status status = Status::Absent;
  std::string value;
  std::optional<Decision> decision;

  static ReadResult make_value(std::string v, Decision d) {
    return {Status::Value, std::move(v), d};
  }
  static ReadResult make_absent() { return {Status::Absent, {}, std::nullopt}; }
  static ReadResult make_denied(Decision d) {
    return {Status::Denied, {}, d};
  }

  bool is_value() const { return status == Status::Value; }
  bool is_absent() const { return status == Status::Absent; }
  bool is_denied() const { return status == Status::Denied; }

  /// Platform-facing rendering; Absent and Denied are both the empty string.
  const std::string& render() const { return value; }
};

/// A (host, kind[, db, store]) bucket of labeled key-value records.
class StoragePartition {
 public:
  static StoragePartition local(Domain host,
                                PartyScope scope = PartyScope::Registrable);
  static StoragePartition idb(Domain host, std::string db_name,
                              std::string store_name,
                              PartyScope scope = PartyScope::Registrable);

  const Domain& host() const { return host_; }
  StoreKind kind() const { return kind_; }
  const std::optional<std::string>& db_name() const { return db_name_; }
  const std::optional<std::string>& store_name() const { return store_name_; }
  PartyScope scope() const { return scope_; }

  /// Creates on an absent key (owner = script, default empty label); on a
  /// present key applies the write check and replaces the value only.
  /// Throws std::invalid_argument on an empty key.
  WriteOutcome set_item(const Domain& script, std::string_view key,
                        std::string_view value);

  ReadResult get_item(const Domain& script, std::string_view key) const;

  /// Replaces the reader set entirely; only the owner or the host may call.
  /// Throws std::out_of_range when the key does not exist.
  WriteOutcome set_readers(const Domain& script, std::string_view key,
                           std::vector<Domain> domains);
  WriteOutcome set_writers(const Domain& script, std::string_view key,
                           std::vector<Domain> domains);

  /// IndexedDB aliases; valid on Idb partitions only (std::logic_error
  /// otherwise).
  WriteOutcome idb_put(const Domain& script, std::string_view key,
                       std::string_view value);
  ReadResult idb_get(const Domain& script, std::string_view key) const;

  /// Legacy (pre-label) overwrite used by observe-mode replay: value is
  /// replaced unconditionally, owner and label are untouched.
  void legacy_set_item(const Domain& script, std::string_view key,
                       std::string_view value);

  const StorageRecord* find(std::string_view key) const;
  const std::map<std::string, StorageRecord>& records() const {
    return records_;
  }
  std::size_t size() const { return records_.size(); }

 private:
  StoragePartition(Domain host, StoreKind kind,
                   std::optional<std::string> db_name,
                   std::optional<std::string> store_name, PartyScope scope);

  WriteOutcome label_update(const Domain& script, std::string_view key,
                            std::vector<Domain> domains, bool readers);

  Domain host_;
  StoreKind kind_;
  std::optional<std::string> db_name_;
  std::optional<std::string> store_name_;
  PartyScope scope_;
  std::map<std::string, StorageRecord> records_;
};

/// All storage partitions of one run, keyed by (host, kind, db, store).
/// Partitions are created on first touch and never alias one another.
class StorageSpace {
 public:
  explicit StorageSpace(PartyScope scope = PartyScope::Registrable)
      : scope_(scope) {}

  PartyScope scope() const { return scope_; }

  StoragePartition& local(const Domain& host);
  StoragePartition& idb(const Domain& host, std::string_view db_name,
                        std::string_view store_name);

  const StoragePartition* find_local(const Domain& host) const;
  const StoragePartition* find_idb(const Domain& host, std::string_view db_name,
                                   std::string_view store_name) const;

  /// Partitions in deterministic key order.
  const std::map<std::string, StoragePartition>& partitions() const {
    return partitions_;
  }
  std::size_t record_count() const;

 private:
  PartyScope scope_;
  std::map<std::string, StoragePartition> partitions_;
};

/// Test/dump format: one tab-separated line per record,
///   kind  host  db/store  key  owner  Reader={...}  Writer={...}  value
/// with "-" for the db/store column of localStorage partitions and label
/// members sorted.
std::string dump_storage(const StorageSpace& space);

}  // namespace storelabel

#endif  // STORELABEL_WEBSTORAGE_HPP
