#include "intentscan/pipeline.hpp"

#include "intentscan/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <tuple>

namespace intentscan {

namespace {

using ordered_json = nlohmann::ordered_json;

std::atomic<int> g_app_load_count{0};

std::ostream& outs(const RunConfig& config) {
    return config.out ? *config.out : std::cout;
}

std::ostream& errs(const RunConfig& config) {
    return config.err ? *config.err : std::cerr;
}

struct Catalogs {
    SourceSinkCatalog sources;
    GetPutCompatTable compat;
    EvalConfig eval;
};

Catalogs load_catalogs(const RunConfig& config) {
    Catalogs c;
    c.sources = config.catalog_path
            ? SourceSinkCatalog::load(*config.catalog_path)
            : SourceSinkCatalog::defaults();
    c.compat = config.compat_table_path
            ? GetPutCompatTable::load(*config.compat_table_path)
            : GetPutCompatTable::defaults();
    if (config.string_cap) {
        c.eval.cap = *config.string_cap;
    }
    return c;
}

struct LoadedApp {
    DecodedApp app;
    AppExtraction extraction;
};

std::vector<LoadedApp> load_corpus(const RunConfig& config,
                                   const Catalogs& catalogs, int& failed) {
    std::vector<LoadedApp> corpus;
    for (const auto& dir : config.app_dirs) {
        try {
            LoadedApp loaded;
            loaded.app = load_app(dir);
            ++g_app_load_count;
            loaded.extraction =
                    extract_app(loaded.app, catalogs.sources, catalogs.eval);
            corpus.push_back(std::move(loaded));
        } catch (const Error& e) {
            errs(config) << "error: " << dir.string() << ": " << e.what()
                         << "\n";
            ++failed;
        }
    }
    return corpus;
}

IntentDb open_db(const RunConfig& config, bool must_exist) {
    if (std::filesystem::exists(config.db_path)) {
        return load_db(config.db_path);
    }
    if (must_exist) {
        throw StoreIO("no database at " + config.db_path.string());
    }
    return {};
}

int analyze_into(IntentDb& db, const std::vector<LoadedApp>& corpus) {
    int added = 0;
    for (const auto& loaded : corpus) {
        added += insert_app_summaries(db, loaded.app, loaded.extraction);
    }
    return added;
}

std::vector<IntraFlow> gather_flows(const RunConfig& config,
                                    const std::vector<LoadedApp>& corpus,
                                    const Catalogs& catalogs) {
    if (config.flows_path) {
        return load_flows(*config.flows_path);
    }
    std::vector<IntraFlow> flows;
    for (const auto& loaded : corpus) {
        auto derived = derive_fixture_flows(loaded.app, catalogs.sources,
                                            catalogs.eval);
        flows.insert(flows.end(), derived.begin(), derived.end());
    }
    return flows;
}

std::vector<LeakReport> build_reports(const RunConfig& config,
                                      const IntentDb& db,
                                      const std::vector<LoadedApp>& corpus,
                                      const std::vector<IntraFlow>& flows,
                                      const Catalogs& catalogs) {
    ReportOptions options;
    options.strict = config.strict;
    options.eval = catalogs.eval;
    std::vector<LeakReport> reports;
    for (const auto& flow : flows) {
        for (auto& r :
             match_flow(flow, db, catalogs.compat, catalogs.sources, options)) {
            if (std::find(reports.begin(), reports.end(), r)
                == reports.end()) {
                reports.push_back(std::move(r));
            }
        }
    }
    std::vector<const DecodedApp*> apps;
    std::vector<AppExtraction> extractions;
    for (const auto& loaded : corpus) {
        apps.push_back(&loaded.app);
        extractions.push_back(loaded.extraction);
    }
    for (auto& r : match_result_channels(apps, extractions, db, flows,
                                         catalogs.compat, catalogs.sources,
                                         options)) {
        if (std::find(reports.begin(), reports.end(), r) == reports.end()) {
            reports.push_back(std::move(r));
        }
    }
    if (config.max_chain) {
        std::erase_if(reports, [&](const LeakReport& r) {
            return r.hops.size() > *config.max_chain;
        });
    }
    sort_reports(reports);
    return reports;
}

void emit_reports(const RunConfig& config,
                  const std::vector<LeakReport>& reports) {
    save_reports(reports, config.reports_path);
    if (config.format == RunConfig::Format::records) {
        std::ifstream in(config.reports_path, std::ios::binary);
        outs(config) << in.rdbuf();
    } else {
        outs(config) << render_reports_text(reports);
    }
}

void emit_stats(const RunConfig& config, const CorpusStats& stats) {
    auto rendered = config.format == RunConfig::Format::records
            ? render_stats_records(stats)
            : render_stats_text(stats);
    outs(config) << rendered;
    if (config.stats_path) {
        std::ofstream out(*config.stats_path, std::ios::binary);
        if (!out) {
            throw StoreIO("cannot write stats: " + config.stats_path->string());
        }
        out << rendered;
    }
}

std::vector<AppExtraction>
extractions_of(const std::vector<LoadedApp>& corpus) {
    std::vector<AppExtraction> out;
    for (const auto& loaded : corpus) {
        out.push_back(loaded.extraction);
    }
    return out;
}

int run_guarded(const RunConfig& config, const std::function<int()>& body) {
    try {
        return body();
    } catch (const Error& e) {
        errs(config) << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        errs(config) << "error: " << e.what() << "\n";
        return 2;
    }
}

int analyze_exit(const RunConfig& config, int failed, std::size_t analyzed) {
    if (failed == 0) {
        return 0;
    }
    if (analyzed == 0) {
        errs(config) << "error: all apps failed to analyze\n";
        return 2;
    }
    return 1;
}

} // namespace

int app_load_count() {
    return g_app_load_count.load();
}

void reset_app_load_count() {
    g_app_load_count.store(0);
}

std::vector<GroundTruthEntry>
load_ground_truth(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw MalformedGroundTruth("cannot open ground truth: "
                                   + path.string());
    }
    std::vector<GroundTruthEntry> entries;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        std::istringstream ss(line);
        GroundTruthEntry e;
        std::string extra;
        if (!(ss >> e.package)) {
            continue; // blank or comment-only line
        }
        if (!(ss >> e.source_signature >> e.sink_signature) || (ss >> extra)) {
            throw MalformedGroundTruth(
                    path.string() + ":" + std::to_string(lineno)
                    + ": expected '<package> <source_api> <sink_api>'");
        }
        entries.push_back(std::move(e));
    }
    return entries;
}

CorpusStats compute_stats(const IntentDb& db,
                          const std::vector<AppExtraction>& extractions) {
    CorpusStats stats;
    // One "site" per distinct sender address a component uses on a channel;
    // per-key rows of the same send collapse.
    using Unit = std::tuple<std::string, std::string, Channel,
                            std::optional<std::string>,
                            std::optional<std::string>>;
    std::set<Unit> units;
    // Same send grouped across its address candidates, for the
    // multi-candidate count.
    std::map<std::tuple<std::string, std::string, Channel,
                        std::optional<std::string>,
                        std::optional<std::string>, std::string>,
             std::set<std::string>>
            candidate_groups;
    std::map<std::string, int> action_senders;
    std::map<std::string, std::set<std::string>> action_receivers;
    for (const auto& row : db.rows) {
        if (row.provenance.kind == Provenance::Kind::fixpoint_derived) {
            ++stats.long_chain_count;
            continue;
        }
        if (row.is_receiver() && *row.intent_filter != unresolved_sentinel) {
            action_receivers[*row.intent_filter].insert(row.package_name + "/"
                                                        + row.class_name);
        }
        if (!row.is_sender()) {
            continue;
        }
        if (row.value
            && row.value->kind == ValueDescriptor::Kind::get_extra_ref) {
            ++stats.get_histogram[row.value->get_signature];
        }
        Unit unit{row.package_name, row.class_name, row.channel,
                  row.target_component, row.intent_action};
        if (!units.insert(unit).second) {
            continue;
        }
        const std::string address = row.target_component
                ? *row.target_component
                : row.intent_action.value_or("");
        candidate_groups[{row.package_name, row.class_name, row.channel,
                          row.key, row.put_signature,
                          row.value ? row.value->wire_detail() : ""}]
                .insert(address);
        ++stats.total_sender_sites;
        ++stats.per_channel[to_string(row.channel)];
        if (row.target_component) {
            ++stats.explicit_count;
        } else {
            ++stats.implicit_count;
            if (*row.intent_action == unresolved_sentinel) {
                ++stats.unresolved_sentinel;
            } else {
                ++action_senders[*row.intent_action];
            }
        }
    }
    for (const auto& [group, addresses] : candidate_groups) {
        if (addresses.size() > 1) {
            ++stats.unresolved_multi_candidate;
        }
    }
    if (stats.total_sender_sites > 0) {
        stats.implicit_ratio = static_cast<double>(stats.implicit_count)
                / stats.total_sender_sites;
    }
    std::set<std::string> actions;
    for (const auto& [a, n] : action_senders) {
        actions.insert(a);
    }
    for (const auto& [a, rs] : action_receivers) {
        actions.insert(a);
    }
    for (const auto& a : actions) {
        CorpusStats::ActionRow row;
        row.action = a;
        if (auto it = action_senders.find(a); it != action_senders.end()) {
            row.senders = it->second;
        }
        if (auto it = action_receivers.find(a); it != action_receivers.end()) {
            row.receivers = static_cast<int>(it->second.size());
        }
        stats.actions.push_back(std::move(row));
    }
    std::sort(stats.actions.begin(), stats.actions.end(),
              [](const CorpusStats::ActionRow& a,
                 const CorpusStats::ActionRow& b) {
                  return std::tie(b.senders, a.action)
                          < std::tie(a.senders, b.action);
              });
    for (const auto& ext : extractions) {
        stats.dynamic_receiver_count +=
                static_cast<int>(ext.dynamic_filters.size());
    }
    return stats;
}

std::string render_stats_text(const CorpusStats& stats) {
    std::ostringstream out;
    out << "sender sites: " << stats.total_sender_sites << "\n";
    for (const auto& [channel, count] : stats.per_channel) {
        out << "  " << channel << ": " << count << "\n";
    }
    out << "explicit: " << stats.explicit_count
        << ", implicit: " << stats.implicit_count << " (ratio "
        << stats.implicit_ratio << ")\n";
    out << "unresolved: " << stats.unresolved_multi_candidate
        << " multi-candidate, " << stats.unresolved_sentinel << " opaque\n";
    out << "dynamic receivers: " << stats.dynamic_receiver_count << "\n";
    out << "matches involving more than two components: "
        << stats.long_chain_count << "\n";
    out << "extra getters:\n";
    for (const auto& [sig, count] : stats.get_histogram) {
        out << "  " << sig << ": " << count << "\n";
    }
    out << "actions (senders/receivers):\n";
    for (const auto& row : stats.actions) {
        out << "  " << row.action << ": " << row.senders << "/"
            << row.receivers << "\n";
    }
    return out.str();
}

std::string render_stats_records(const CorpusStats& stats) {
    ordered_json j;
    j["sender_sites"] = stats.total_sender_sites;
    j["per_channel"] = stats.per_channel;
    j["explicit"] = stats.explicit_count;
    j["implicit"] = stats.implicit_count;
    j["implicit_ratio"] = stats.implicit_ratio;
    j["unresolved_multi_candidate"] = stats.unresolved_multi_candidate;
    j["unresolved_sentinel"] = stats.unresolved_sentinel;
    j["dynamic_receivers"] = stats.dynamic_receiver_count;
    j["long_chains"] = stats.long_chain_count;
    j["get_histogram"] = stats.get_histogram;
    j["actions"] = ordered_json::array();
    for (const auto& row : stats.actions) {
        j["actions"].push_back({{"action", row.action},
                                {"senders", row.senders},
                                {"receivers", row.receivers}});
    }
    return j.dump() + "\n";
}

BenchmarkScore score_reports(const std::vector<LeakReport>& reports,
                             const std::vector<GroundTruthEntry>& truth) {
    std::set<GroundTruthEntry> expected(truth.begin(), truth.end());
    std::set<GroundTruthEntry> reported;
    for (const auto& r : reports) {
        if (r.hops.empty()) {
            continue;
        }
        reported.insert({r.hops.back().package, r.origin.wire_detail(),
                         r.sink_signature});
    }
    BenchmarkScore score;
    for (const auto& e : reported) {
        if (expected.count(e)) {
            ++score.tp;
        } else {
            ++score.fp;
        }
    }
    for (const auto& e : expected) {
        if (!reported.count(e)) {
            ++score.fn;
        }
    }
    score.precision = score.tp + score.fp == 0
            ? 1.0
            : static_cast<double>(score.tp) / (score.tp + score.fp);
    score.recall = score.tp + score.fn == 0
            ? 1.0
            : static_cast<double>(score.tp) / (score.tp + score.fn);
    score.f1 = score.precision + score.recall == 0.0
            ? 0.0
            : 2.0 * score.precision * score.recall
                    / (score.precision + score.recall);
    return score;
}

int cmd_analyze(const RunConfig& config) {
    return run_guarded(config, [&] {
        auto catalogs = load_catalogs(config);
        int failed = 0;
        auto corpus = load_corpus(config, catalogs, failed);
        auto db = open_db(config, false);
        int added = analyze_into(db, corpus);
        save_db(db, config.db_path);
        outs(config) << "analyzed " << corpus.size() << " app(s), " << added
                     << " row(s) added";
        if (failed > 0) {
            outs(config) << ", " << failed << " failed";
        }
        outs(config) << "\n";
        return analyze_exit(config, failed, corpus.size());
    });
}

int cmd_fixpoint(const RunConfig& config) {
    return run_guarded(config, [&] {
        auto catalogs = load_catalogs(config);
        auto db = open_db(config, true);
        int derived = fixpoint_resolve(db, catalogs.compat);
        save_db(db, config.db_path);
        outs(config) << "fixpoint added " << derived << " derived row(s)\n";
        return 0;
    });
}

int cmd_report(const RunConfig& config) {
    return run_guarded(config, [&] {
        auto catalogs = load_catalogs(config);
        auto db = open_db(config, true);
        int failed = 0;
        auto corpus = load_corpus(config, catalogs, failed);
        auto flows = gather_flows(config, corpus, catalogs);
        auto reports = build_reports(config, db, corpus, flows, catalogs);
        emit_reports(config, reports);
        return analyze_exit(config, failed, corpus.size());
    });
}

int cmd_stats(const RunConfig& config) {
    return run_guarded(config, [&] {
        auto db = open_db(config, true);
        auto catalogs = load_catalogs(config);
        int failed = 0;
        auto corpus = load_corpus(config, catalogs, failed);
        emit_stats(config, compute_stats(db, extractions_of(corpus)));
        return 0;
    });
}

int cmd_score(const RunConfig& config,
              const std::filesystem::path& ground_truth_path) {
    return run_guarded(config, [&] {
        auto reports = load_reports(config.reports_path);
        auto truth = load_ground_truth(ground_truth_path);
        auto score = score_reports(reports, truth);
        outs(config) << "tp=" << score.tp << " fp=" << score.fp
                     << " fn=" << score.fn << " precision=" << score.precision
                     << " recall=" << score.recall << " f1=" << score.f1
                     << "\n";
        return 0;
    });
}

int cmd_run(const RunConfig& config,
            const std::optional<std::filesystem::path>& ground_truth_path) {
    return run_guarded(config, [&] {
        auto catalogs = load_catalogs(config);
        int failed = 0;
        auto corpus = load_corpus(config, catalogs, failed);
        IntentDb db;
        int added = analyze_into(db, corpus);
        int derived = fixpoint_resolve(db, catalogs.compat);
        save_db(db, config.db_path);
        outs(config) << "analyzed " << corpus.size() << " app(s): " << added
                     << " row(s), " << derived << " derived\n";
        auto flows = gather_flows(config, corpus, catalogs);
        auto reports = build_reports(config, db, corpus, flows, catalogs);
        emit_reports(config, reports);
        emit_stats(config, compute_stats(db, extractions_of(corpus)));
        if (ground_truth_path) {
            auto truth = load_ground_truth(*ground_truth_path);
            auto score = score_reports(reports, truth);
            outs(config) << "tp=" << score.tp << " fp=" << score.fp
                         << " fn=" << score.fn
                         << " precision=" << score.precision
                         << " recall=" << score.recall << " f1=" << score.f1
                         << "\n";
        }
        return analyze_exit(config, failed, corpus.size());
    });
}

} // namespace intentscan
