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

#include "storelabel/replay.hpp"

#include <map>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace storelabel;
using storelabel::testing::dom;
using storelabel::testing::listings_scenario;
using storelabel::testing::make_event;

namespace {

const Domain kFp = dom("fp.com");
const Domain kAd = dom("ad_net.com");
const Domain kAnalytics = dom("analytics.com");

}  // namespace

TEST_CASE("enforce replay blocks the malicious third-party script") {
  auto events = listings_scenario();
  ReplayResult result = replay(events, ReplayMode::Enforce);

  CHECK(result.issues.empty());
  REQUIRE(result.denials.size() == 3);
  CHECK(result.denials[0].event_seq == 4);
  CHECK(result.denials[0].mode == AccessMode::Read);
  CHECK(result.denials[1].event_seq == 5);
  CHECK(result.denials[1].mode == AccessMode::Write);
  CHECK(result.denials[2].event_seq == 6);
  CHECK(result.denials[2].mode == AccessMode::Read);
  for (const auto& denial : result.denials) {
    CHECK(denial.accessor.registrable == "ad_net.com");
    CHECK(denial.reason == AccessReason::DefaultDeny);
  }

  const CookieRecord* consent = result.jar.find(kFp, "__consent", 100);
  REQUIRE(consent);
  CHECK(consent->value == "false");
  CHECK(result.storage.find_local(kFp)->find("clickcount")->value == "1");
}

TEST_CASE("observe replay records the same denials but keeps legacy state") {
  auto events = listings_scenario();
  ReplayResult enforce = replay(events, ReplayMode::Enforce);
  ReplayResult observe = replay(events, ReplayMode::Observe);

  CHECK(observe.denials == enforce.denials);
  const CookieRecord* consent = observe.jar.find(kFp, "__consent", 100);
  REQUIRE(consent);
  CHECK(consent->value == "true");  // the toss lands in an unmodified browser
  CHECK(consent->owner.registrable == "fp.com");  // owner still tracked
  CHECK(observe.storage.find_local(kFp)->find("clickcount")->value == "1");
}

TEST_CASE("setReaders during replay opens reads for the granted domain") {
  auto events = listings_scenario();
  events.push_back(make_event(7, Api::SetReaders, "fp-site", "fp.com",
                              "https://fp.com/fp.js", "clickcount",
                              "{analytics.com}"));
  events.push_back(make_event(8, Api::GetItem, "fp-site", "fp.com",
                              "https://analytics.com/a.js", "clickcount"));
  events.push_back(make_event(9, Api::GetItem, "fp-site", "fp.com",
                              "https://ad_net.com/bad.js", "clickcount"));

  ReplayResult result = replay(events, ReplayMode::Enforce);
  CHECK(result.issues.empty());
  REQUIRE(result.denials.size() == 4);
  CHECK(result.denials[3].event_seq == 9);
  CHECK(result.denials[3].accessor.registrable == "ad_net.com");

  // analytics.com's read at seq 8 produced no denial.
  for (const auto& denial : result.denials) {
    CHECK(denial.accessor.registrable != "analytics.com");
  }
  const auto* partition = result.storage.find_local(kFp);
  REQUIRE(partition->find("clickcount"));
  CHECK(partition->get_item(kAnalytics, "clickcount").render() == "1");
  CHECK(partition->get_item(kAd, "clickcount").render().empty());
}

TEST_CASE("host-only logs produce zero denials in both modes") {
  std::vector<AccessEvent> events{
      make_event(1, Api::SetCookie, "s", "fp.com", "fp.com", "sid", "1"),
      make_event(2, Api::GetCookie, "s", "fp.com", "sub.fp.com", "sid"),
      make_event(3, Api::SetItem, "s", "fp.com", "fp.com", "k", "v"),
      make_event(4, Api::GetItem, "s", "fp.com", "fp.com", "k"),
      make_event(5, Api::IdbPut, "s", "fp.com", "fp.com", "db/s/k", "v"),
      make_event(6, Api::IdbGet, "s", "fp.com", "fp.com", "db/s/k"),
      make_event(7, Api::SetReaders, "s", "fp.com", "fp.com", "k", "{a.com}"),
  };
  for (ReplayMode mode : {ReplayMode::Enforce, ReplayMode::Observe}) {
    ReplayResult result = replay(events, mode);
    CHECK(result.issues.empty());
    CHECK(result.denials.empty());
  }
}

TEST_CASE("http-set cookies seed the jar for later script reads") {
  std::vector<AccessEvent> events{
      // Server response with labels: cmp.com may read sid.
      make_event(1, Api::HttpSetCookie, "s", "fp.com", "https://fp.com/",
                 "sid", "123", "Domain=fp.com; Reader={cmp.com}; Writer={}"),
      make_event(2, Api::GetCookie, "s", "fp.com", "cmp.com", "sid"),
      make_event(3, Api::GetCookie, "s", "fp.com", "tracker.com", "sid"),
  };
  ReplayResult result = replay(events, ReplayMode::Enforce);
  CHECK(result.issues.empty());
  REQUIRE(result.denials.size() == 1);
  CHECK(result.denials[0].event_seq == 3);
  CHECK(result.denials[0].accessor.registrable == "tracker.com");
}

TEST_CASE("replay surfaces engine and grammar errors with the seq") {
  std::vector<AccessEvent> events{
      make_event(1, Api::SetCookie, "s", "fp.com", "fp.com", "bad",
                 "x", "Reader={unbalanced"),
      make_event(2, Api::SetReaders, "s", "fp.com", "fp.com", "missing",
                 "{a.com}"),
      make_event(3, Api::IdbPut, "s", "fp.com", "fp.com", "flatkey", "v"),
      make_event(4, Api::SetItem, "s", "fp.com", "fp.com", "k", "v"),
  };
  ReplayResult result = replay(events, ReplayMode::Enforce);
  REQUIRE(result.issues.size() == 3);
  CHECK(result.issues[0].seq == 1);
  CHECK(result.issues[1].seq == 2);
  CHECK(result.issues[2].seq == 3);
  CHECK(result.denials.empty());
  CHECK(result.storage.find_local(kFp)->find("k"));
}

TEST_CASE("malformed writes are issues, not denials, in both modes") {
  std::vector<AccessEvent> events{
      make_event(1, Api::SetCookie, "s", "fp.com", "fp.com", "k", "v"),
      make_event(2, Api::SetCookie, "s", "fp.com", "ad_net.com", "k", "v2",
                 "Reader={unbalanced"),
  };
  for (ReplayMode mode : {ReplayMode::Enforce, ReplayMode::Observe}) {
    ReplayResult result = replay(events, mode);
    REQUIRE(result.issues.size() == 1);
    CHECK(result.issues[0].seq == 2);
    CHECK(result.denials.empty());
    CHECK(result.jar.find(kFp, "k", 10)->value == "v");
  }
}

TEST_CASE("enforce state equals the allowed-writes-only reconstruction") {
  std::mt19937_64 rng(43);
  for (int round = 0; round < 30; ++round) {
    auto events = storelabel::testing::random_log(rng, 1 + round % 6,
                                                  40 + (round * 11) % 160);
    ReplayResult result = replay(events, ReplayMode::Enforce);
    std::string detail;
    CHECK_MESSAGE(storelabel::testing::enforce_state_matches_reconstruction(
                      events, result, &detail),
                  detail);
  }
}

TEST_CASE("observe-mode values equal an unconditional-apply oracle") {
  // The legacy oracle: every value write lands, as in a browser with the
  // label checks forced to allow.
  std::mt19937_64 rng(59);
  for (int round = 0; round < 20; ++round) {
    auto events = storelabel::testing::random_log(rng, 1 + round % 5,
                                                  60 + (round * 17) % 140);
    ReplayResult observe = replay(events, ReplayMode::Observe);

    std::set<std::uint64_t> issue_seqs;
    for (const auto& issue : observe.issues) issue_seqs.insert(issue.seq);

    std::map<std::string, std::string> legacy;
    for (const auto& e : events) {
      if (issue_seqs.contains(e.seq)) continue;
      if (e.api == Api::SetCookie || e.api == Api::HttpSetCookie) {
        legacy["cookie|" + e.host.registrable + "|" + e.object_key] =
            e.value.value_or("");
      } else if (e.api == Api::SetItem) {
        legacy["local|" + e.host.registrable + "|" + e.object_key] =
            e.value.value_or("");
      } else if (e.api == Api::IdbPut) {
        legacy["idb|" + e.host.registrable + "|" + e.object_key] =
            e.value.value_or("");
      }
    }

    std::map<std::string, std::string> actual;
    for (const auto& [partition, records] : observe.jar.partitions()) {
      for (const auto& record : records) {
        actual["cookie|" + partition + "|" + record.name] = record.value;
      }
    }
    for (const auto& [key, partition] : observe.storage.partitions()) {
      const bool idb = partition.kind() == StoreKind::Idb;
      for (const auto& [record_key, record] : partition.records()) {
        const std::string object =
            idb ? *partition.db_name() + "/" + *partition.store_name() + "/" +
                      record_key
                : record_key;
        actual[(idb ? "idb|" : "local|") + partition.host().registrable + "|" +
               object] = record.value;
      }
    }
    CHECK(actual == legacy);
  }
}

TEST_CASE("replay output is byte-identical across runs") {
  std::mt19937_64 rng(47);
  auto events = storelabel::testing::random_log(rng, 5, 150);
  for (ReplayMode mode : {ReplayMode::Enforce, ReplayMode::Observe}) {
    ReplayResult a = replay(events, mode);
    ReplayResult b = replay(events, mode);
    CHECK(denials_tsv(a.denials) == denials_tsv(b.denials));
    CHECK(dump_cookie_jar(a.jar) == dump_cookie_jar(b.jar));
    CHECK(dump_storage(a.storage) == dump_storage(b.storage));
    CHECK(breakage_report_tsv(breakage_report(a.denials)) ==
          breakage_report_tsv(breakage_report(b.denials)));
  }
}

TEST_CASE("breakage report groups denials per site and script") {
  CHECK(breakage_report({}).sites.empty());
  CHECK(breakage_report({}).total_denials == 0);

  // CMP pattern: the host page sets OptanonConsent, the OneTrust script reads
  // it and is denied under the default policy.
  std::vector<AccessEvent> events{
      make_event(1, Api::SetCookie, "shop", "shop.example",
                 "https://shop.example/main.js", "OptanonConsent", "groups=1"),
      make_event(2, Api::GetCookie, "shop", "shop.example",
                 "https://cdn.onetrust.com/banner.js", "OptanonConsent"),
  };
  ReplayResult result = replay(events, ReplayMode::Enforce);
  REQUIRE(result.denials.size() == 1);
  BreakageReport report = breakage_report(result.denials);
  REQUIRE(report.sites.size() == 1);
  CHECK(report.sites[0].site_id == "shop");
  CHECK(report.sites[0].denied_reads == 1);
  CHECK(report.sites[0].denied_writes == 0);
  CHECK(report.sites[0].distinct_scripts == 1);
  CHECK(report.sites[0].distinct_objects == 1);
  REQUIRE(report.top_scripts.size() == 1);
  CHECK(report.top_scripts[0].script == "onetrust.com");
  CHECK(report.top_scripts[0].denials == 1);
}

TEST_CASE("per-site denial counts sum to the global totals") {
  std::vector<DenialEvent> denials;
  // 3 sites x 2 scripts, one read + one write denial each.
  for (int site = 0; site < 3; ++site) {
    for (const char* script : {"a-ads.com", "b-ads.com"}) {
      denials.push_back({static_cast<std::uint64_t>(denials.size() + 1),
                         "site" + std::to_string(site), dom(script), "obj",
                         AccessMode::Read, AccessReason::DefaultDeny});
      denials.push_back({static_cast<std::uint64_t>(denials.size() + 1),
                         "site" + std::to_string(site), dom(script), "obj2",
                         AccessMode::Write, AccessReason::DefaultDeny});
    }
  }
  BreakageReport report = breakage_report(denials, 1);
  REQUIRE(report.sites.size() == 3);
  std::uint64_t reads = 0;
  std::uint64_t writes = 0;
  for (const auto& site : report.sites) {
    CHECK(site.distinct_scripts == 2);
    CHECK(site.distinct_objects == 2);
    reads += site.denied_reads;
    writes += site.denied_writes;
  }
  CHECK(reads == report.total_denied_reads);
  CHECK(writes == report.total_denied_writes);
  CHECK(report.total_denials == denials.size());
  // top-1 with a tie on counts resolves lexicographically.
  REQUIRE(report.top_scripts.size() == 1);
  CHECK(report.top_scripts[0].script == "a-ads.com");
  CHECK(report.top_scripts[0].denials == 6);

  std::mt19937_64 rng(53);
  auto events = storelabel::testing::random_log(rng, 6, 200);
  ReplayResult result = replay(events, ReplayMode::Enforce);
  BreakageReport random_report = breakage_report(result.denials);
  std::uint64_t site_sum = 0;
  for (const auto& site : random_report.sites) {
    site_sum += site.denied_reads + site.denied_writes;
  }
  CHECK(site_sum == result.denials.size());
}

TEST_CASE("blocklist matches exact entries and their subdomains") {
  Blocklist list = Blocklist::from_string(
      "# ad servers\ndoubleclick.net\nad_net.com  # trailing comment\n\n");
  CHECK(list.size() == 2);
  CHECK(list.matches(dom("doubleclick.net")));
  CHECK(list.matches(dom("https://securepubads.g.doubleclick.net/x.js")));
  CHECK(list.matches(dom("ad_net.com")));
  CHECK_FALSE(list.matches(dom("safe-cdn.example")));
  CHECK_FALSE(list.matches(dom("notdoubleclick.net")));
  CHECK_THROWS_AS(Blocklist::from_file("/nonexistent/list.txt"),
                  std::runtime_error);
}

TEST_CASE("blocklist coverage is the matched share of third-party accesses") {
  std::vector<AccessEvent> events{
      make_event(1, Api::GetCookie, "s", "fp.com", "doubleclick.net", "sid"),
      make_event(2, Api::GetCookie, "s", "fp.com", "g.doubleclick.net", "sid"),
      make_event(3, Api::GetCookie, "s", "fp.com", "ad_net.com", "sid"),
      make_event(4, Api::GetCookie, "s", "fp.com", "analytics.com", "sid"),
      make_event(5, Api::GetCookie, "s", "fp.com", "cdn.widgets.io", "sid"),
      // First-party accesses do not count toward the denominator.
      make_event(6, Api::GetCookie, "s", "fp.com", "fp.com", "sid"),
      make_event(7, Api::HttpSetCookie, "s", "fp.com", "fp.com", "srv", "1"),
  };
  Blocklist list =
      Blocklist::from_string("doubleclick.net\nad_net.com\n");
  CHECK(blocklist_coverage(events, list) == 60.0);

  Blocklist all = Blocklist::from_string(
      "doubleclick.net\nad_net.com\nanalytics.com\nwidgets.io\n");
  CHECK(blocklist_coverage(events, all) == 100.0);
  CHECK(blocklist_coverage(events, Blocklist::from_string("")) == 0.0);

  std::vector<AccessEvent> host_only{
      make_event(1, Api::GetCookie, "s", "fp.com", "fp.com", "sid")};
  CHECK_THROWS_AS(blocklist_coverage(host_only, list), std::domain_error);
}
