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

#include <random>

#include "doctest.h"
#include "support/synthetic.hpp"

using namespace storelabel;
using storelabel::testing::dom;

namespace {

const Domain kFp = dom("fp.com");
const Domain kCmp = dom("cmp.com");
const Domain kTracker = dom("tracker.com");
const Domain kAd = dom("ad_net.com");

}  // namespace

TEST_CASE("decide_access follows host, owner, then label sets") {
  Label session_label({kCmp}, {});

  // session_id row of the example jar: cmp.com may read, not write.
  auto read = decide_access(session_label, kFp, kFp, kCmp, AccessMode::Read);
  CHECK(read.allowed);
  CHECK(read.reason == AccessReason::ReaderSet);

  auto write = decide_access(session_label, kFp, kFp, kCmp, AccessMode::Write);
  CHECK_FALSE(write.allowed);
  CHECK(write.reason == AccessReason::DefaultDeny);

  // The host party is allowed regardless of the label.
  for (AccessMode mode : {AccessMode::Read, AccessMode::Write}) {
    auto host = decide_access(Label{}, kCmp, kFp, kFp, mode);
    CHECK(host.allowed);
    CHECK(host.reason == AccessReason::HostParty);
  }

  // tracker_id row: tracker.com holds read-write.
  Label tracker_label({kTracker}, {kTracker});
  auto granted =
      decide_access(tracker_label, kCmp, kFp, kTracker, AccessMode::Write);
  CHECK(granted.allowed);
  CHECK(granted.reason == AccessReason::WriterSet);
}

TEST_CASE("decide_access allows the owner both modes") {
  auto read = decide_access(Label{}, kCmp, kFp, kCmp, AccessMode::Read);
  CHECK(read.allowed);
  CHECK(read.reason == AccessReason::Owner);
  auto write = decide_access(Label{}, kCmp, kFp, kCmp, AccessMode::Write);
  CHECK(write.allowed);
  CHECK(write.reason == AccessReason::Owner);
}

TEST_CASE("empty label denies everyone but host and owner") {
  for (AccessMode mode : {AccessMode::Read, AccessMode::Write}) {
    auto d = decide_access(Label{}, kCmp, kFp, kAd, mode);
    CHECK_FALSE(d.allowed);
    CHECK(d.reason == AccessReason::DefaultDeny);
  }
}

TEST_CASE("write permission does not imply read permission") {
  Label write_only({}, {kTracker});
  CHECK_FALSE(
      decide_access(write_only, kCmp, kFp, kTracker, AccessMode::Read).allowed);
  CHECK(
      decide_access(write_only, kCmp, kFp, kTracker, AccessMode::Write).allowed);
}

TEST_CASE("decide_access is deterministic and total over random inputs") {
  std::mt19937_64 rng(7);
  const auto& pool = storelabel::testing::domain_pool();
  for (int i = 0; i < 500; ++i) {
    Label label = storelabel::testing::random_label(rng);
    const Domain& owner = storelabel::testing::pick(rng, pool);
    const Domain& host = storelabel::testing::pick(rng, pool);
    const Domain& accessor = storelabel::testing::pick(rng, pool);
    for (AccessMode mode : {AccessMode::Read, AccessMode::Write}) {
      Decision a = decide_access(label, owner, host, accessor, mode);
      Decision b = decide_access(label, owner, host, accessor, mode);
      CHECK(a == b);
      if (a.allowed) {
        CHECK(a.reason != AccessReason::DefaultDeny);
        CHECK(a.reason != AccessReason::HttpOnlyDeny);
      } else {
        CHECK(a.reason == AccessReason::DefaultDeny);
      }
      // Host and owner are never denied.
      CHECK(decide_access(label, owner, host, host, mode).allowed);
      CHECK(decide_access(label, owner, host, owner, mode).allowed);
    }
  }
}

TEST_CASE("party scope changes membership granularity") {
  Domain sub_cmp = dom("widget.cmp.com");
  Label label({kCmp}, {});
  CHECK(decide_access(label, kFp, kFp, sub_cmp, AccessMode::Read,
                      PartyScope::Registrable)
            .allowed);
  CHECK_FALSE(decide_access(label, kFp, kFp, sub_cmp, AccessMode::Read,
                            PartyScope::ExactHost)
                  .allowed);
}

TEST_CASE("labels deduplicate and ignore order") {
  Label a({kCmp, kTracker}, {});
  Label b({kTracker, kCmp, kTracker}, {});
  CHECK(a == b);
  CHECK(b.readers().size() == 2);
  CHECK(Label{}.empty());
}

TEST_CASE("parse_domain_set handles the brace grammar") {
  auto set = parse_domain_set("{cmp.com, tkr.com}");
  REQUIRE(set);
  CHECK(set->size() == 2);

  auto empty = parse_domain_set("{}");
  REQUIRE(empty);
  CHECK(empty->empty());

  auto spaced = parse_domain_set("  {  a.com  }  ");
  REQUIRE(spaced);
  CHECK(spaced->size() == 1);

  std::string error;
  CHECK_FALSE(parse_domain_set("{a.com", PublicSuffixList::bundled(), &error));
  CHECK(error.find("brace") != std::string::npos);
  CHECK_FALSE(
      parse_domain_set("{bad host}", PublicSuffixList::bundled(), &error));
}
