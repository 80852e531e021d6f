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

#include "storelabel/webstorage.hpp"

#include <stdexcept>

namespace storelabel {

StoragePartition::StoragePartition(Domain host, StoreKind kind,
                                   std::optional<std::string> db_name,
                                   std::optional<std::string> store_name,
                                   PartyScope scope)
    : host_(std::move(host)),
      kind_(kind),
      db_name_(std::move(db_name)),
      store_name_(std::move(store_name)),
      scope_(scope) {}

StoragePartition StoragePartition::local(Domain host, PartyScope scope) {
  return StoragePartition(std::move(host), StoreKind::Local, std::nullopt,
                          std::nullopt, scope);
}

StoragePartition StoragePartition::idb(Domain host, std::string db_name,
                                       std::string store_name,
                                       PartyScope scope) {
  return StoragePartition(std::move(host), StoreKind::Idb, std::move(db_name),
                          std::move(store_name), scope);
}

const StorageRecord* StoragePartition::find(std::string_view key) const {
  auto it = records_.find(std::string(key));
  return it == records_.end() ? nullptr : &it->second;
}

WriteOutcome StoragePartition::set_item(const Domain& script,
                                        std::string_view key,
                                        std::string_view value) {
  if (key.empty()) {
    throw std::invalid_argument("set_item: key must be non-empty");
  }
  auto it = records_.find(std::string(key));
  if (it == records_.end()) {
    StorageRecord record{std::string(key), std::string(value), script, {}};
    Decision decision = decide_access(record.label, record.owner, host_,
                                      script, AccessMode::Write, scope_);
    records_.emplace(record.key, std::move(record));
    return WriteOutcome::accepted(decision);
  }

  StorageRecord& record = it->second;
  Decision decision = decide_access(record.label, record.owner, host_, script,
                                    AccessMode::Write, scope_);
  if (!decision.allowed) {
    return WriteOutcome::rejected(
        decision, {script, std::string(key), AccessMode::Write});
  }
  record.value = std::string(value);
  return WriteOutcome::accepted(decision);
}

ReadResult StoragePartition::get_item(const Domain& script,
                                      std::string_view key) const {
  const StorageRecord* record = find(key);
  if (!record) return ReadResult::make_absent();
  Decision decision = decide_access(record->label, record->owner, host_,
                                    script, AccessMode::Read, scope_);
  if (!decision.allowed) return ReadResult::make_denied(decision);
  return ReadResult::make_value(record->value, decision);
}

WriteOutcome StoragePartition::label_update(const Domain& script,
                                            std::string_view key,
                                            std::vector<Domain> domains,
                                            bool readers) {
  auto it = records_.find(std::string(key));
  if (it == records_.end()) {
    throw std::out_of_range("no storage record with key \"" +
                            std::string(key) + "\"");
  }
  StorageRecord& record = it->second;
  // Label management belongs to the object's owner and to the host page.
  const bool authorized = same_party(script, record.owner, scope_) ||
                          same_party(script, host_, scope_);
  if (!authorized) {
    return WriteOutcome::rejected(
        {false, AccessReason::DefaultDeny},
        {script, std::string(key), AccessMode::Write});
  }
  if (readers) {
    record.label.set_readers(std::move(domains));
  } else {
    record.label.set_writers(std::move(domains));
  }
  Decision decision{true, same_party(script, host_, scope_)
                              ? AccessReason::HostParty
                              : AccessReason::Owner};
  return WriteOutcome::accepted(decision);
}

WriteOutcome StoragePartition::set_readers(const Domain& script,
                                           std::string_view key,
                                           std::vector<Domain> domains) {
  return label_update(script, key, std::move(domains), /*readers=*/true);
}

WriteOutcome StoragePartition::set_writers(const Domain& script,
                                           std::string_view key,
                                           std::vector<Domain> domains) {
  return label_update(script, key, std::move(domains), /*readers=*/false);
}

WriteOutcome StoragePartition::idb_put(const Domain& script,
                                       std::string_view key,
                                       std::string_view value) {
  if (kind_ != StoreKind::Idb) {
    throw std::logic_error("idb_put on a localStorage partition");
  }
  return set_item(script, key, value);
}

ReadResult StoragePartition::idb_get(const Domain& script,
                                     std::string_view key) const {
  if (kind_ != StoreKind::Idb) {
    throw std::logic_error("idb_get on a localStorage partition");
  }
  return get_item(script, key);
}

void StoragePartition::legacy_set_item(const Domain& script,
                                       std::string_view key,
                                       std::string_view value) {
  if (key.empty()) {
    throw std::invalid_argument("set_item: key must be non-empty");
  }
  auto it = records_.find(std::string(key));
  if (it == records_.end()) {
    StorageRecord record{std::string(key), std::string(value), script, {}};
    records_.emplace(record.key, std::move(record));
    return;
  }
  it->second.value = std::string(value);
}

namespace {

std::string partition_key(const Domain& host, StoreKind kind,
                          std::string_view db_name,
                          std::string_view store_name) {
  std::string key = kind == StoreKind::Local ? "local:" : "idb:";
  key += host.registrable;
  if (kind == StoreKind::Idb) {
    key += '\x1f';
    key += db_name;
    key += '\x1f';
    key += store_name;
  }
  return key;
}

}  // namespace

StoragePartition& StorageSpace::local(const Domain& host) {
  const std::string key = partition_key(host, StoreKind::Local, {}, {});
  auto it = partitions_.find(key);
  if (it == partitions_.end()) {
    it = partitions_.emplace(key, StoragePartition::local(host, scope_)).first;
  }
  return it->second;
}

StoragePartition& StorageSpace::idb(const Domain& host,
                                    std::string_view db_name,
                                    std::string_view store_name) {
  const std::string key =
      partition_key(host, StoreKind::Idb, db_name, store_name);
  auto it = partitions_.find(key);
  if (it == partitions_.end()) {
    it = partitions_
             .emplace(key, StoragePartition::idb(host, std::string(db_name),
                                                 std::string(store_name),
                                                 scope_))
             .first;
  }
  return it->second;
}

const StoragePartition* StorageSpace::find_local(const Domain& host) const {
  auto it = partitions_.find(partition_key(host, StoreKind::Local, {}, {}));
  return it == partitions_.end() ? nullptr : &it->second;
}

const StoragePartition* StorageSpace::find_idb(
    const Domain& host, std::string_view db_name,
    std::string_view store_name) const {
  auto it =
      partitions_.find(partition_key(host, StoreKind::Idb, db_name, store_name));
  return it == partitions_.end() ? nullptr : &it->second;
}

std::size_t StorageSpace::record_count() const {
  std::size_t total = 0;
  for (const auto& [key, partition] : partitions_) {
    total += partition.size();
  }
  return total;
}

std::string dump_storage(const StorageSpace& space) {
  std::string out;
  for (const auto& [key, partition] : space.partitions()) {
    const bool idb = partition.kind() == StoreKind::Idb;
    std::string location = "-";
    if (idb) {
      location = *partition.db_name() + "/" + *partition.store_name();
    }
    for (const auto& [record_key, record] : partition.records()) {
      out += idb ? "idb" : "local";
      out += '\t';
      out += partition.host().registrable;
      out += '\t';
      out += location;
      out += '\t';
      out += record.key;
      out += '\t';
      out += record.owner.registrable;
      out += "\tReader={";
      const auto& readers = record.label.readers();
      for (std::size_t i = 0; i < readers.size(); ++i) {
        if (i) out += ',';
        out += readers[i].raw_host;
      }
      out += "}\tWriter={";
      const auto& writers = record.label.writers();
      for (std::size_t i = 0; i < writers.size(); ++i) {
        if (i) out += ',';
        out += writers[i].raw_host;
      }
      out += "}\t";
      out += record.value;
      out += '\n';
    }
  }
  return out;
}

}  // namespace storelabel
