#ifndef INTENTSCAN_FLOW_REPORT_HPP
#define INTENTSCAN_FLOW_REPORT_HPP

#include "intentscan/app_model.hpp"
#include "intentscan/catalogs.hpp"
#include "intentscan/intent_db.hpp"
#include "intentscan/intent_extract.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace intentscan {

// One baseline intra-component flow, normally produced by an external IFC
// tool; derive_fixture_flows is the built-in stand-in.
struct FlowSource {
    enum class Kind { get_extra, direct_source };

    Kind kind = Kind::get_extra;
    std::string signature; // get signature, or source API signature
    std::string key;       // get_extra only

    bool operator==(const FlowSource&) const = default;
    auto operator<=>(const FlowSource&) const = default;
};

struct FlowSink {
    std::string signature;
    std::string location;

    bool operator==(const FlowSink&) const = default;
    auto operator<=>(const FlowSink&) const = default;
};

struct IntraFlow {
    std::string package;
    std::string component;
    FlowSource source;
    FlowSink sink;
    std::vector<std::string> via;

    bool operator==(const IntraFlow&) const = default;
    auto operator<=>(const IntraFlow&) const = default;
};

struct LeakHop {
    std::string package;
    std::string class_name;
    std::string address;       // action or target leaving this component
    std::string key;           // extra key on that edge
    std::string put_signature; // put used on that edge
    Channel channel = Channel::activity;

    bool operator==(const LeakHop&) const = default;
    auto operator<=>(const LeakHop&) const = default;
};

struct LeakReport {
    enum class Confidence { resolved, low };

    std::vector<LeakHop> hops; // senders in order, receiver last
    ValueDescriptor origin;    // the sensitive source call
    std::string sink_signature;
    std::string sink_location;
    std::string sink_category;
    Confidence confidence = Confidence::resolved;

    bool operator==(const LeakReport&) const = default;
    auto operator<=>(const LeakReport&) const = default;
};

struct ReportOptions {
    bool strict = false; // also surface opaque values as low confidence
    EvalConfig eval;
};

// True iff the put stores the value type the get returns. An unknown get
// signature is a non-match (with a warning on stderr).
bool signature_compat(const std::string& get_sig, const std::string& put_sig,
                      const GetPutCompatTable& table);

std::optional<std::string> classify_sensitivity(const ValueDescriptor& v,
                                                const SourceSinkCatalog& catalog);

// Joins one get-extra flow against the (fixpoint-resolved) DB: senders that
// reach the component with the same key and a compatible put signature and
// carry a cataloged sensitive value become leak reports, with hop chains
// rebuilt from row provenance. direct_source flows are the baseline tool's
// to report and yield nothing here.
std::vector<LeakReport> match_flow(const IntraFlow& flow, const IntentDb& db,
                                   const GetPutCompatTable& compat,
                                   const SourceSinkCatalog& catalog,
                                   const ReportOptions& options = {});

// Round-trip channels: startActivityForResult/setResult/onActivityResult
// and bindService/onBind/onServiceConnected.
std::vector<LeakReport> match_result_channels(
        const std::vector<const DecodedApp*>& apps,
        const std::vector<AppExtraction>& extractions, const IntentDb& db,
        const std::vector<IntraFlow>& flows, const GetPutCompatTable& compat,
        const SourceSinkCatalog& catalog, const ReportOptions& options = {});

// Stand-in for the baseline IFC tool: intra-class taint from extra getters
// and cataloged sources into cataloged sink arguments.
std::vector<IntraFlow> derive_fixture_flows(const DecodedApp& app,
                                            const SourceSinkCatalog& catalog,
                                            EvalConfig cfg = {});

void sort_reports(std::vector<LeakReport>& reports);

// Line-oriented JSON persistence for flows and reports, plus a
// human-readable rendering of reports.
void save_flows(const std::vector<IntraFlow>& flows,
                const std::filesystem::path& path);
std::vector<IntraFlow> load_flows(const std::filesystem::path& path);
void save_reports(const std::vector<LeakReport>& reports,
                  const std::filesystem::path& path);
std::vector<LeakReport> load_reports(const std::filesystem::path& path);
std::string render_reports_text(const std::vector<LeakReport>& reports);

} // namespace intentscan

#endif
