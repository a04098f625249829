#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "intentscan/app_model.hpp"
#include "intentscan/catalogs.hpp"
#include "intentscan/flow_report.hpp"
#include "intentscan/intent_db.hpp"
#include "intentscan/intent_extract.hpp"
#include "intentscan/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <vector>

using namespace intentscan;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = FIXTURE_DIR;

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path()
                / ("intentscan-int-" + std::to_string(::getpid()) + "-"
                   + std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static int& counter() {
        static int n = 0;
        return n;
    }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<fs::path> benchmark_dirs() {
    std::vector<fs::path> dirs;
    for (const auto& entry : fs::directory_iterator(kFixtures / "benchmark")) {
        if (entry.is_directory()) {
            dirs.push_back(entry.path());
        }
    }
    std::sort(dirs.begin(), dirs.end());
    return dirs;
}

std::vector<LeakReport> run_corpus(const std::vector<fs::path>& dirs,
                                   const TempDir& tmp) {
    std::ostringstream sink;
    RunConfig config;
    config.app_dirs = dirs;
    config.db_path = tmp.path / "db.jsonl";
    config.reports_path = tmp.path / "leaks.jsonl";
    config.out = &sink;
    config.err = &sink;
    REQUIRE(cmd_run(config) == 0);
    return load_reports(config.reports_path);
}

} // namespace

TEST_CASE("two-app corpus reports the single cross-app leak end to end") {
    TempDir tmp;
    auto reports = run_corpus({kFixtures / "listing13" / "appA",
                               kFixtures / "listing13" / "appB"},
                              tmp);
    REQUIRE(reports.size() == 1);
    const auto& r = reports[0];
    CHECK(r.origin == ValueDescriptor::source_call(
                              "TelephonyManager.getDeviceId"));
    CHECK(r.sink_signature == "SmsManager.sendTextMessage");
    CHECK(r.confidence == LeakReport::Confidence::resolved);
    REQUIRE(r.hops.size() == 2);
    CHECK(r.hops[0].package == "com.example.appa");
    CHECK(r.hops[0].address == "CUSTOM_INTENT.ACTION");
    CHECK(r.hops[0].key == "data");
    CHECK(r.hops[1].class_name == "com.example.appb.InFlowActivity");
}

TEST_CASE("three-app forwarding corpus reports one three-hop leak") {
    TempDir tmp;
    auto reports = run_corpus({kFixtures / "listing5" / "appA",
                               kFixtures / "listing5" / "appB",
                               kFixtures / "listing5" / "appC"},
                              tmp);
    REQUIRE(reports.size() == 1);
    REQUIRE(reports[0].hops.size() == 3);
    CHECK(reports[0].hops[0].package == "com.appA");
    CHECK(reports[0].hops[1].package == "com.appB");
    CHECK(reports[0].hops[2].package == "com.appC");
    CHECK(reports[0].origin
          == ValueDescriptor::source_call("TelephonyManager.getDeviceId"));
}

TEST_CASE("result round trip reports the caller-side sink") {
    TempDir tmp;
    auto reports = run_corpus({kFixtures / "listing67" / "caller",
                               kFixtures / "listing67" / "callee"},
                              tmp);
    REQUIRE(reports.size() == 1);
    REQUIRE(reports[0].hops.size() == 3);
    CHECK(reports[0].hops.back().package == "com.example.caller");
    CHECK(reports[0].sink_signature == "Log.d");
    CHECK(reports[0].sink_location.starts_with(
            "com.example.caller.CallerActivity.onActivityResult"));
}

TEST_CASE("re-analyzing one app incrementally matches a full fresh analysis") {
    auto catalog = SourceSinkCatalog::defaults();
    auto compat = GetPutCompatTable::defaults();
    std::vector<fs::path> dirs = {kFixtures / "listing5" / "appA",
                                  kFixtures / "listing5" / "appB",
                                  kFixtures / "listing5" / "appC"};
    auto analyze_all = [&] {
        IntentDb db;
        for (const auto& dir : dirs) {
            auto app = load_app(dir);
            insert_app_summaries(db, app, extract_app(app, catalog));
        }
        fixpoint_resolve(db, compat);
        return db;
    };

    IntentDb incremental = analyze_all();
    // Second pass over one app only: replaces its rows and any derived rows
    // built on them, then the fixpoint restores the derived row.
    auto app_b = load_app(dirs[1]);
    insert_app_summaries(incremental, app_b, extract_app(app_b, catalog));
    fixpoint_resolve(incremental, compat);

    TempDir tmp;
    save_db(analyze_all(), tmp.path / "fresh.jsonl");
    save_db(incremental, tmp.path / "incremental.jsonl");
    CHECK(slurp(tmp.path / "fresh.jsonl")
          == slurp(tmp.path / "incremental.jsonl"));
}

TEST_CASE("discovered sender sites match a textual scan of the corpus") {
    // Independent oracle: count sender-API invocations in the smali text.
    std::regex site_pattern(
            ";->(startActivity|startActivities|startActivityForResult|"
            "startActivityFromChild|startActivityFromFragment|"
            "startActivityIfNeeded|startNextMatchingActivity|"
            "sendBroadcast|sendBroadcastAsUser|sendOrderedBroadcast|"
            "sendOrderedBroadcastAsUser|sendStickyBroadcast|"
            "sendStickyBroadcastAsUser|sendStickyOrderedBroadcast|"
            "sendStickyOrderedBroadcastAsUser|startService|bindService)\\(");
    int expected = 0;
    int actual = 0;
    for (const auto& dir : benchmark_dirs()) {
        for (const auto& entry : fs::recursive_directory_iterator(dir)) {
            if (entry.path().extension() != ".smali") {
                continue;
            }
            auto text = slurp(entry.path());
            auto begin = std::sregex_iterator(text.begin(), text.end(),
                                              site_pattern);
            expected += static_cast<int>(
                    std::distance(begin, std::sregex_iterator()));
        }
        actual += static_cast<int>(find_sender_sites(load_app(dir)).size());
    }
    CHECK(expected > 0);
    CHECK(actual == expected);
}

TEST_CASE("benchmark corpus stats carry the expected shape") {
    auto catalog = SourceSinkCatalog::defaults();
    auto compat = GetPutCompatTable::defaults();
    IntentDb db;
    std::vector<AppExtraction> extractions;
    for (const auto& dir : benchmark_dirs()) {
        auto app = load_app(dir);
        extractions.push_back(extract_app(app, catalog));
        insert_app_summaries(db, app, extractions.back());
    }
    fixpoint_resolve(db, compat);
    auto stats = compute_stats(db, extractions);
    CHECK(stats.dynamic_receiver_count == 2);
    CHECK(stats.per_channel.at("activity_for_result") == 4);
    CHECK(stats.per_channel.at("service_bind") == 4);
    CHECK(stats.per_channel.at("service_start") == 2);
    CHECK(stats.per_channel.at("broadcast") == 3);
    CHECK(stats.explicit_count + stats.implicit_count
          == stats.total_sender_sites);
    // One sender branches between two candidate actions.
    CHECK(stats.unresolved_multi_candidate == 1);
    CHECK(stats.unresolved_sentinel == 0);
    // No cross-app forwarding chains in this corpus.
    CHECK(stats.long_chain_count == 0);
}
