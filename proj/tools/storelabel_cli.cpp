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

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "storelabel/access_log.hpp"
#include "storelabel/cookie.hpp"
#include "storelabel/domain.hpp"
#include "storelabel/replay.hpp"
#include "storelabel/webstorage.hpp"

namespace {

using namespace storelabel;

constexpr const char* kSuffixListEnv = "STORELABEL_SUFFIX_LIST";

struct CommonOptions {
  std::string party = "registrable";
  std::string suffix_list;
  std::string output;
  std::string format = "tsv";
  bool strict = false;
  bool stamp = false;

  PartyScope scope() const {
    return party == "exact-host" ? PartyScope::ExactHost
                                 : PartyScope::Registrable;
  }
};

void add_common_flags(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--party", opts.party, "Party granularity")
      ->check(CLI::IsMember({"registrable", "exact-host"}))
      ->capture_default_str();
  cmd->add_option("--suffix-list", opts.suffix_list,
                  "Public suffix list file (overrides the bundled snapshot "
                  "and " +
                      std::string(kSuffixListEnv) + ")");
  cmd->add_option("-o,--output", opts.output,
                  "Write data output to this file (default: stdout)");
  cmd->add_flag("--stamp", opts.stamp,
                "Prepend a generation timestamp (off by default so outputs "
                "are byte-stable)");
}

void add_format_flag(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--format", opts.format, "Output format")
      ->check(CLI::IsMember({"tsv", "structured"}))
      ->capture_default_str();
}

// Flag > environment > bundled snapshot.
const PublicSuffixList& resolve_suffix_list(
    const CommonOptions& opts, std::optional<PublicSuffixList>& storage) {
  std::string path = opts.suffix_list;
  if (path.empty()) {
    if (const char* env = std::getenv(kSuffixListEnv); env && *env) {
      path = env;
    }
  }
  if (path.empty()) return PublicSuffixList::bundled();
  storage = PublicSuffixList::from_file(path);
  return *storage;
}

int write_output(const CommonOptions& opts, const std::string& data) {
  std::string payload;
  if (opts.stamp) {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[64];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    payload = std::string("# generated-at ") + buf + "\n";
  }
  payload += data;

  if (opts.output.empty()) {
    std::cout << payload;
    return 0;
  }
  std::ofstream file(opts.output, std::ios::binary);
  if (!file) {
    std::cerr << "error: cannot write " << opts.output << "\n";
    return 1;
  }
  file << payload;
  return 0;
}

// Parses the log, reports issues on stderr. Returns false when --strict is
// set and any line failed.
bool load_log(const std::string& path, const PublicSuffixList& psl,
              bool strict, ParsedLog& log) {
  std::ifstream file(path);
  if (!file) {
    std::cerr << "error: cannot read " << path << "\n";
    return false;
  }
  log = parse_event_log(file, psl);
  for (const auto& issue : log.issues) {
    std::cerr << path << ":" << issue.line << ": " << issue.message << "\n";
  }
  return !(strict && !log.issues.empty());
}

int cmd_parse_set_cookie(const CommonOptions& opts, const std::string& header,
                         const std::string& origin) {
  std::optional<PublicSuffixList> storage;
  const PublicSuffixList& psl = resolve_suffix_list(opts, storage);
  std::string origin_error;
  auto origin_domain = try_normalize_domain(origin, psl, &origin_error);
  if (!origin_domain) {
    std::cerr << "error: bad origin: " << origin_error << "\n";
    return 1;
  }
  auto result = parse_set_cookie(header, *origin_domain, /*now=*/0, psl);
  if (auto* error = std::get_if<CookieParseError>(&result)) {
    std::cerr << "parse error: " << error->attribute << ": " << error->message
              << "\n";
    return 1;
  }
  return write_output(opts,
                      canonical_set_cookie(std::get<CookieRecord>(result)) +
                          "\n");
}

int cmd_check_log(const CommonOptions& opts, const std::string& input) {
  std::optional<PublicSuffixList> storage;
  const PublicSuffixList& psl = resolve_suffix_list(opts, storage);
  std::ifstream file(input);
  if (!file) {
    std::cerr << "error: cannot read " << input << "\n";
    return 1;
  }
  ParsedLog log = parse_event_log(file, psl);
  for (const auto& issue : log.issues) {
    std::cerr << input << ":" << issue.line << ": " << issue.message << "\n";
  }
  std::ostringstream summary;
  summary << "events\t" << log.events.size() << "\n"
          << "errors\t" << log.issues.size() << "\n";
  int rc = write_output(opts, summary.str());
  if (rc != 0) return rc;
  return log.issues.empty() ? 0 : 1;
}

int cmd_simulate(const CommonOptions& opts, const std::string& input,
                 const std::string& mode_name) {
  std::optional<PublicSuffixList> psl_storage;
  const PublicSuffixList& psl = resolve_suffix_list(opts, psl_storage);
  ParsedLog log;
  if (!load_log(input, psl, opts.strict, log)) return 1;

  const ReplayMode mode =
      mode_name == "observe" ? ReplayMode::Observe : ReplayMode::Enforce;
  ReplayResult result = replay(log.events, mode, opts.scope(), psl);
  for (const auto& issue : result.issues) {
    std::cerr << "seq " << issue.seq << ": " << issue.message << "\n";
  }

  if (opts.format == "structured") {
    nlohmann::json doc;
    doc["mode"] = std::string(to_string(mode));
    nlohmann::json denials = nlohmann::json::array();
    for (const auto& denial : result.denials) {
      denials.push_back({{"seq", denial.event_seq},
                         {"site", denial.site_id},
                         {"script", denial.accessor.raw_host},
                         {"object", denial.object_key},
                         {"mode", std::string(to_string(denial.mode))},
                         {"reason", std::string(to_string(denial.reason))}});
    }
    doc["denials"] = std::move(denials);
    nlohmann::json cookies = nlohmann::json::array();
    for (const auto& [partition, records] : result.jar.partitions()) {
      for (const auto& record : records) {
        cookies.push_back(canonical_set_cookie(record));
      }
    }
    doc["cookies"] = std::move(cookies);
    nlohmann::json storage_lines = nlohmann::json::array();
    std::istringstream dump(dump_storage(result.storage));
    for (std::string line; std::getline(dump, line);) {
      storage_lines.push_back(line);
    }
    doc["storage"] = std::move(storage_lines);
    return write_output(opts, doc.dump(2) + "\n");
  }

  std::string out;
  out += "# mode\t" + std::string(to_string(mode)) + "\n";
  out += "# denials\n";
  out += denials_tsv(result.denials);
  out += "# cookie-jar\n";
  out += dump_cookie_jar(result.jar);
  out += "# storage\n";
  out += dump_storage(result.storage);
  return write_output(opts, out);
}

int cmd_classify(const CommonOptions& opts, const std::string& input) {
  std::optional<PublicSuffixList> psl_storage;
  const PublicSuffixList& psl = resolve_suffix_list(opts, psl_storage);
  ParsedLog log;
  if (!load_log(input, psl, opts.strict, log)) return 1;

  auto creators = attribute_creators(log.events);
  auto categories = classify_events(log.events, creators, opts.scope());
  ClassificationReport report = aggregate(log.events, categories, opts.scope());

  return write_output(opts, opts.format == "structured"
                                ? classification_report_json(report)
                                : classification_report_tsv(report));
}

int cmd_breakage(const CommonOptions& opts, const std::string& input,
                 const std::string& blocklist_path, std::size_t top_n) {
  std::optional<PublicSuffixList> psl_storage;
  const PublicSuffixList& psl = resolve_suffix_list(opts, psl_storage);
  ParsedLog log;
  if (!load_log(input, psl, opts.strict, log)) return 1;

  ReplayResult result = replay(log.events, ReplayMode::Enforce, opts.scope(),
                               psl);
  for (const auto& issue : result.issues) {
    std::cerr << "seq " << issue.seq << ": " << issue.message << "\n";
  }
  BreakageReport report = breakage_report(result.denials, top_n);

  std::optional<double> coverage;
  if (!blocklist_path.empty()) {
    Blocklist list = Blocklist::from_file(blocklist_path);
    coverage = blocklist_coverage(log.events, list, opts.scope());
  }

  if (opts.format == "structured") {
    return write_output(opts,
                        breakage_report_json(report, result.denials, coverage));
  }
  std::string out = breakage_report_tsv(report);
  if (coverage) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", *coverage);
    out += "\nblocklist_coverage_pct\t" + std::string(buf) + "\n";
  }
  return write_output(opts, out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Least-privilege labels for browser storage: grammar tools, log "
      "classification, and enforcement replay"};
  app.require_subcommand(1);

  // parse-set-cookie
  CommonOptions parse_opts;
  std::string header;
  std::string origin;
  auto* parse_cmd = app.add_subcommand(
      "parse-set-cookie", "Parse one Set-Cookie header and print its "
                          "canonical serialization");
  parse_cmd->add_option("header", header, "Set-Cookie header value")
      ->required();
  parse_cmd->add_option("--origin", origin, "Origin host of the response")
      ->required();
  add_common_flags(parse_cmd, parse_opts);

  // simulate
  CommonOptions sim_opts;
  std::string sim_input;
  std::string sim_mode = "enforce";
  auto* sim_cmd = app.add_subcommand(
      "simulate", "Replay an event log and report denials and final stores");
  sim_cmd->add_option("-i,--input", sim_input, "Event log (JSON lines)")
      ->required();
  sim_cmd->add_option("--mode", sim_mode, "Replay mode")
      ->check(CLI::IsMember({"enforce", "observe"}))
      ->capture_default_str();
  sim_cmd->add_flag("--strict", sim_opts.strict,
                    "Fail when any log line is malformed");
  add_common_flags(sim_cmd, sim_opts);
  add_format_flag(sim_cmd, sim_opts);

  // classify
  CommonOptions classify_opts;
  std::string classify_input;
  auto* classify_cmd = app.add_subcommand(
      "classify", "Aggregate the five-category access breakdown and "
                  "third-party percentages");
  classify_cmd->add_option("-i,--input", classify_input, "Event log")
      ->required();
  classify_cmd->add_flag("--strict", classify_opts.strict,
                         "Fail when any log line is malformed");
  add_common_flags(classify_cmd, classify_opts);
  add_format_flag(classify_cmd, classify_opts);

  // breakage
  CommonOptions breakage_opts;
  std::string breakage_input;
  std::string blocklist_path;
  std::size_t top_n = 20;
  auto* breakage_cmd = app.add_subcommand(
      "breakage", "Enforce-replay a log and report per-site breakage");
  breakage_cmd->add_option("-i,--input", breakage_input, "Event log")
      ->required();
  breakage_cmd->add_option("--blocklist", blocklist_path,
                           "Domain blocklist; adds third-party coverage");
  breakage_cmd->add_option("--top-n", top_n, "Most-denied script domains")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  breakage_cmd->add_flag("--strict", breakage_opts.strict,
                         "Fail when any log line is malformed");
  add_common_flags(breakage_cmd, breakage_opts);
  add_format_flag(breakage_cmd, breakage_opts);

  // check-log
  CommonOptions check_opts;
  std::string check_input;
  auto* check_cmd =
      app.add_subcommand("check-log", "Validate an event log against the "
                                      "schema and list errors");
  check_cmd->add_option("-i,--input", check_input, "Event log")->required();
  add_common_flags(check_cmd, check_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (parse_cmd->parsed()) {
      return cmd_parse_set_cookie(parse_opts, header, origin);
    }
    if (sim_cmd->parsed()) {
      return cmd_simulate(sim_opts, sim_input, sim_mode);
    }
    if (classify_cmd->parsed()) {
      return cmd_classify(classify_opts, classify_input);
    }
    if (breakage_cmd->parsed()) {
      return cmd_breakage(breakage_opts, breakage_input, blocklist_path,
                          top_n);
    }
    if (check_cmd->parsed()) {
      return cmd_check_log(check_opts, check_input);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
