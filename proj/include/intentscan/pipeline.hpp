#ifndef INTENTSCAN_PIPELINE_HPP
#define INTENTSCAN_PIPELINE_HPP

#include "intentscan/flow_report.hpp"
#include "intentscan/intent_db.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace intentscan {

struct RunConfig {
    std::vector<std::filesystem::path> app_dirs;
    std::filesystem::path db_path = "intent_db.jsonl";
    std::optional<std::filesystem::path> flows_path;
    std::filesystem::path reports_path = "leaks.jsonl";
    std::optional<std::filesystem::path> stats_path;
    std::optional<std::filesystem::path> catalog_path;
    std::optional<std::filesystem::path> compat_table_path;
    bool strict = false;
    enum class Format { text, records };
    Format format = Format::text;
    std::optional<std::size_t> string_cap;
    std::optional<std::size_t> max_chain; // drop reports with more hops
    std::ostream* out = nullptr; // defaults to std::cout / std::cerr
    std::ostream* err = nullptr;
};

struct CorpusStats {
    struct ActionRow {
        std::string action;
        int senders = 0;
        int receivers = 0;

        bool operator==(const ActionRow&) const = default;
    };

    int total_sender_sites = 0;
    std::map<std::string, int> per_channel;
    int explicit_count = 0;
    int implicit_count = 0;
    double implicit_ratio = 0.0;
    std::map<std::string, int> get_histogram;
    std::vector<ActionRow> actions; // sorted by sender count descending
    int unresolved_multi_candidate = 0;
    int unresolved_sentinel = 0;
    int dynamic_receiver_count = 0;
    int long_chain_count = 0; // matches involving more than two components

    bool operator==(const CorpusStats&) const = default;
};

struct BenchmarkScore {
    int tp = 0;
    int fp = 0;
    int fn = 0;
    double precision = 1.0;
    double recall = 1.0;
    double f1 = 1.0;
};

// One expected leak: the app whose component hits the sink, the sensitive
// source API, and the sink API.
struct GroundTruthEntry {
    std::string package;
    std::string source_signature;
    std::string sink_signature;

    bool operator==(const GroundTruthEntry&) const = default;
    auto operator<=>(const GroundTruthEntry&) const = default;
};

// Lines of "<package> <source_api> <sink_api>"; '#' starts a comment.
std::vector<GroundTruthEntry>
load_ground_truth(const std::filesystem::path& path);

CorpusStats compute_stats(const IntentDb& db,
                          const std::vector<AppExtraction>& extractions = {});
std::string render_stats_text(const CorpusStats& stats);
std::string render_stats_records(const CorpusStats& stats);

// Scored sink-side: a report counts as the (receiving package, origin API,
// sink API) triple. Zero denominators score 1.0 so empty no-leak corpora are
// perfect rather than NaN.
BenchmarkScore score_reports(const std::vector<LeakReport>& reports,
                             const std::vector<GroundTruthEntry>& truth);

// Subcommand drivers. Exit codes: 0 success, 1 some apps failed to analyze,
// 2 configuration or IO error (including every app failing).
int cmd_analyze(const RunConfig& config);
int cmd_fixpoint(const RunConfig& config);
int cmd_report(const RunConfig& config);
int cmd_stats(const RunConfig& config);
int cmd_score(const RunConfig& config,
              const std::filesystem::path& ground_truth_path);
int cmd_run(const RunConfig& config,
            const std::optional<std::filesystem::path>& ground_truth_path =
                    std::nullopt);

// Instrumentation: how many apps have been loaded since the last reset.
// Exists to make the one-load-per-app pipeline shape checkable.
int app_load_count();
void reset_app_load_count();

} // namespace intentscan

#endif
