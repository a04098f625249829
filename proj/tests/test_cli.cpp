#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "intentscan/errors.hpp"
#include "intentscan/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace intentscan;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;

    explicit TempDir(const std::string& name) {
        path = fs::temp_directory_path() / ("intentscan_cli_" + name + "_"
                                            + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }

    fs::path file(const std::string& name, const std::string& content) const {
        auto p = path / name;
        std::ofstream(p) << content;
        return p;
    }
};

LeakReport report_for(const std::string& pkg, const std::string& source,
                      const std::string& sink) {
    LeakReport r;
    LeakHop hop;
    hop.package = pkg;
    hop.class_name = pkg + ".In";
    r.hops = {hop};
    r.origin = ValueDescriptor::source_call(source);
    r.sink_signature = sink;
    r.sink_location = pkg + ".In.onCreate:1";
    return r;
}

} // namespace

TEST_CASE("ground truth parses and rejects malformed lines") {
    TempDir dir("gt");
    auto good = dir.file("gt.txt",
                         "# comment\n"
                         "com.a TelephonyManager.getDeviceId Log.d\n"
                         "\n"
                         "com.b WifiInfo.getMacAddress SmsManager.sendTextMessage # trailing\n");
    auto entries = load_ground_truth(good);
    REQUIRE(entries.size() == 2);
    CHECK(entries[0].package == "com.a");
    CHECK(entries[1].sink_signature == "SmsManager.sendTextMessage");

    auto bad = dir.file("bad.txt", "com.a missing_sink\n");
    CHECK_THROWS_AS(load_ground_truth(bad), MalformedGroundTruth);
    CHECK_THROWS_AS(load_ground_truth(dir.path / "absent.txt"),
                    MalformedGroundTruth);
}

TEST_CASE("scores follow the metric definitions") {
    std::vector<GroundTruthEntry> truth = {
            {"com.a", "TelephonyManager.getDeviceId", "Log.d"},
            {"com.b", "WifiInfo.getMacAddress", "Log.d"},
    };
    std::vector<LeakReport> reports = {
            report_for("com.a", "TelephonyManager.getDeviceId", "Log.d"),
            report_for("com.c", "Location.getLatitude", "Log.d"),
    };
    auto score = score_reports(reports, truth);
    CHECK(score.tp == 1);
    CHECK(score.fp == 1);
    CHECK(score.fn == 1);
    CHECK(score.precision == doctest::Approx(0.5));
    CHECK(score.recall == doctest::Approx(0.5));
    CHECK(score.f1 == doctest::Approx(0.5));
}

TEST_CASE("duplicate reports of one leak count once") {
    std::vector<GroundTruthEntry> truth = {
            {"com.a", "TelephonyManager.getDeviceId", "Log.d"}};
    std::vector<LeakReport> reports = {
            report_for("com.a", "TelephonyManager.getDeviceId", "Log.d"),
            report_for("com.a", "TelephonyManager.getDeviceId", "Log.d"),
    };
    auto score = score_reports(reports, truth);
    CHECK(score.tp == 1);
    CHECK(score.fp == 0);
}

TEST_CASE("zero denominators score perfect by convention") {
    auto score = score_reports({}, {});
    CHECK(score.tp == 0);
    CHECK(score.precision == 1.0);
    CHECK(score.recall == 1.0);
    CHECK(score.f1 == 1.0);
}

TEST_CASE("paper-style precision example") {
    // 20 true leaks found alongside 53 spurious ones.
    std::vector<GroundTruthEntry> truth;
    std::vector<LeakReport> reports;
    for (int i = 0; i < 20; ++i) {
        auto pkg = "com.tp" + std::to_string(i);
        truth.push_back({pkg, "TelephonyManager.getDeviceId", "Log.d"});
        reports.push_back(
                report_for(pkg, "TelephonyManager.getDeviceId", "Log.d"));
    }
    for (int i = 0; i < 53; ++i) {
        reports.push_back(report_for("com.fp" + std::to_string(i),
                                     "TelephonyManager.getDeviceId", "Log.d"));
    }
    auto score = score_reports(reports, truth);
    CHECK(score.precision == doctest::Approx(20.0 / 73.0));
    CHECK(score.precision == doctest::Approx(0.273).epsilon(0.01));
}

TEST_CASE("empty corpus analyzes to an empty DB with exit 0") {
    TempDir dir("empty");
    RunConfig config;
    config.db_path = dir.path / "db.jsonl";
    std::ostringstream out, err;
    config.out = &out;
    config.err = &err;
    CHECK(cmd_analyze(config) == 0);
    CHECK(fs::exists(config.db_path));
    auto db = load_db(config.db_path);
    CHECK(db.rows.empty());
    CHECK(compute_stats(db) == CorpusStats{});
}

TEST_CASE("config errors exit 2") {
    TempDir dir("cfg");
    RunConfig config;
    config.db_path = dir.path / "missing.jsonl";
    std::ostringstream out, err;
    config.out = &out;
    config.err = &err;
    CHECK(cmd_fixpoint(config) == 2);
    config.app_dirs = {dir.path / "not_an_app"};
    config.db_path = dir.path / "db.jsonl";
    CHECK(cmd_analyze(config) == 2); // every app failed
    CHECK(err.str().find("not_an_app") != std::string::npos);
}

TEST_CASE("stats on a mixed DB") {
    IntentDb db;
    auto add_sender = [&](const std::string& cls, Channel ch,
                          std::optional<std::string> target,
                          std::optional<std::string> action) {
        IntentSummaryRow row;
        row.id = db.next_id++;
        row.package_name = "com.s";
        row.class_name = cls;
        row.channel = ch;
        row.target_component = std::move(target);
        row.intent_action = std::move(action);
        row.key = "k";
        row.value = ValueDescriptor::constant("v");
        row.put_signature = "putExtra(String,String)";
        db.rows.push_back(std::move(row));
    };
    add_sender("com.s.A", Channel::activity, "com.t.X", std::nullopt);
    add_sender("com.s.B", Channel::broadcast, std::nullopt, "act1");
    add_sender("com.s.C", Channel::service_start, std::nullopt, "act1");
    IntentSummaryRow recv;
    recv.id = db.next_id++;
    recv.package_name = "com.t";
    recv.class_name = "com.t.R";
    recv.intent_filter = "act1";
    recv.channel = Channel::broadcast;
    db.rows.push_back(recv);

    auto stats = compute_stats(db);
    CHECK(stats.total_sender_sites == 3);
    CHECK(stats.explicit_count == 1);
    CHECK(stats.implicit_count == 2);
    CHECK(stats.implicit_ratio == doctest::Approx(2.0 / 3.0));
    CHECK(stats.per_channel.at("activity") == 1);
    CHECK(stats.per_channel.at("broadcast") == 1);
    REQUIRE(stats.actions.size() == 1);
    CHECK(stats.actions[0].action == "act1");
    CHECK(stats.actions[0].senders == 2);
    CHECK(stats.actions[0].receivers == 1);
    CHECK(stats.long_chain_count == 0);

    auto text = render_stats_text(stats);
    CHECK(text.find("act1") != std::string::npos);
    auto records = render_stats_records(stats);
    CHECK(records.find("\"sender_sites\":3") != std::string::npos);
}
