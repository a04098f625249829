#include "intentscan/pipeline.hpp"

#include <CLI11.hpp>

#include <optional>
#include <string>
#include <vector>

using intentscan::RunConfig;

namespace {

struct CliOptions {
    std::vector<std::string> app_dirs;
    std::string db = "intent_db.jsonl";
    std::string reports = "leaks.jsonl";
    std::string flows;
    std::string stats;
    std::string catalog;
    std::string compat_table;
    std::string format = "text";
    bool strict = false;
    std::size_t string_cap = 0;
    std::size_t max_chain = 0;

    RunConfig to_config() const {
        RunConfig config;
        for (const auto& d : app_dirs) {
            config.app_dirs.emplace_back(d);
        }
        config.db_path = db;
        config.reports_path = reports;
        if (!flows.empty()) {
            config.flows_path = flows;
        }
        if (!stats.empty()) {
            config.stats_path = stats;
        }
        if (!catalog.empty()) {
            config.catalog_path = catalog;
        }
        if (!compat_table.empty()) {
            config.compat_table_path = compat_table;
        }
        config.strict = strict;
        config.format = format == "records" ? RunConfig::Format::records
                                            : RunConfig::Format::text;
        if (string_cap > 0) {
            config.string_cap = string_cap;
        }
        if (max_chain > 0) {
            config.max_chain = max_chain;
        }
        return config;
    }
};

void add_common_flags(CLI::App& cmd, CliOptions& opts, bool with_apps) {
    if (with_apps) {
        cmd.add_option("apps", opts.app_dirs, "Decoded app directories");
    }
    cmd.add_option("--db", opts.db, "Intent summary database path");
    cmd.add_option("--flows", opts.flows,
                   "Intra-component flows file (derived from the apps when "
                   "omitted)");
    cmd.add_option("--reports", opts.reports, "Leak reports output path");
    cmd.add_option("--stats", opts.stats, "Corpus statistics output path");
    cmd.add_option("--catalog", opts.catalog,
                   "Source/sink catalog file (built-in defaults when omitted)");
    cmd.add_option("--compat-table", opts.compat_table,
                   "Get/put signature compatibility table file");
    cmd.add_flag("--strict", opts.strict,
                 "Also report unclassifiable transmitted values (low "
                 "confidence)");
    cmd.add_option("--format", opts.format, "Output format")
            ->check(CLI::IsMember({"text", "records"}));
    cmd.add_option("--string-cap", opts.string_cap,
                   "Candidate cap for string evaluation");
    cmd.add_option("--max-chain", opts.max_chain,
                   "Drop leak chains with more hops than this");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{
            "Inter-app intent flow analysis over decoded Android apps.\n"
            "Benchmark metrics treat zero denominators as 1.0, so an empty\n"
            "no-leak corpus scores perfect rather than NaN."};
    app.require_subcommand(1);

    CliOptions opts;
    std::string ground_truth;

    auto* analyze = app.add_subcommand(
            "analyze", "Extract intent summaries from apps into the database");
    add_common_flags(*analyze, opts, true);

    auto* fixpoint = app.add_subcommand(
            "fixpoint", "Resolve forwarded extras in the database");
    add_common_flags(*fixpoint, opts, false);

    auto* report = app.add_subcommand(
            "report", "Match flows against the database and report leaks");
    add_common_flags(*report, opts, true);

    auto* stats = app.add_subcommand("stats", "Corpus statistics");
    add_common_flags(*stats, opts, true);

    auto* score =
            app.add_subcommand("score", "Score reports against ground truth");
    add_common_flags(*score, opts, false);
    score->add_option("ground_truth", ground_truth, "Ground truth file")
            ->required();

    auto* run = app.add_subcommand("run", "All phases in order");
    add_common_flags(*run, opts, true);
    run->add_option("--ground-truth", ground_truth,
                    "Score the reports against this file afterwards");

    CLI11_PARSE(app, argc, argv);

    auto config = opts.to_config();
    if (analyze->parsed()) {
        return intentscan::cmd_analyze(config);
    }
    if (fixpoint->parsed()) {
        return intentscan::cmd_fixpoint(config);
    }
    if (report->parsed()) {
        return intentscan::cmd_report(config);
    }
    if (stats->parsed()) {
        return intentscan::cmd_stats(config);
    }
    if (score->parsed()) {
        return intentscan::cmd_score(config, ground_truth);
    }
    if (run->parsed()) {
        std::optional<std::filesystem::path> gt;
        if (!ground_truth.empty()) {
            gt = ground_truth;
        }
        return intentscan::cmd_run(config, gt);
    }
    return 2;
}
