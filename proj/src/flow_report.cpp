#include "intentscan/flow_report.hpp"

#include "intentscan/errors.hpp"
#include "intentscan/taint.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

namespace intentscan {

namespace {

using ordered_json = nlohmann::ordered_json;

bool is_sentinel(const std::string& s) {
    return s == unresolved_sentinel;
}

LeakHop hop_of(const IntentSummaryRow& r) {
    LeakHop hop;
    hop.package = r.package_name;
    hop.class_name = r.class_name;
    hop.address = r.target_component
            ? *r.target_component
            : r.intent_action.value_or("");
    hop.key = r.key.value_or("");
    hop.put_signature = r.put_signature.value_or("");
    hop.channel = r.channel;
    return hop;
}

// Sender chain behind a row: derived rows expand through the sender side of
// their provenance, so A->B->C comes out as [A's hop, B's hop].
std::vector<LeakHop> chain_of(const IntentDb& db, const IntentSummaryRow& s) {
    std::vector<LeakHop> hops;
    if (s.provenance.kind == Provenance::Kind::fixpoint_derived
        && s.provenance.from_ids.size() == 2) {
        if (const auto* parent = db.find_row(s.provenance.from_ids[1])) {
            hops = chain_of(db, *parent);
        }
    }
    hops.push_back(hop_of(s));
    return hops;
}

bool hop_chain_low_confidence(const std::vector<LeakHop>& hops) {
    for (const auto& h : hops) {
        if (is_sentinel(h.address) || is_sentinel(h.key)) {
            return true;
        }
    }
    return false;
}

struct Sensitivity {
    ValueDescriptor origin;
    std::string category;
    bool low = false;
};

std::optional<Sensitivity> sensitive_value(const ValueDescriptor& v,
                                           const SourceSinkCatalog& catalog,
                                           bool strict) {
    if (v.kind == ValueDescriptor::Kind::source_call) {
        if (auto category = catalog.source_category(v.detail)) {
            return Sensitivity{v, *category, false};
        }
        return std::nullopt;
    }
    if (strict && v.kind == ValueDescriptor::Kind::opaque) {
        return Sensitivity{v, "unknown", true};
    }
    return std::nullopt;
}

// Exact equality over resolved candidates; an unresolved side matches with
// low confidence rather than dropping the pair.
bool keys_match(const StringValue& a, const StringValue& b, bool& low) {
    if (!a.is_resolved() || !b.is_resolved()) {
        low = true;
        return true;
    }
    for (const auto& c : a.candidates()) {
        if (b.candidates().count(c)) {
            return true;
        }
    }
    return false;
}

bool key_matches_string(const StringValue& key, const std::string& s,
                        bool& low) {
    if (!key.is_resolved() || is_sentinel(s)) {
        low = true;
        return true;
    }
    return key.candidates().count(s) > 0;
}

} // namespace

bool signature_compat(const std::string& get_sig, const std::string& put_sig,
                      const GetPutCompatTable& table) {
    try {
        return table.compatible(get_sig, put_sig);
    } catch (const UnknownGetSignature& e) {
        std::cerr << "warning: " << e.what() << "\n";
        return false;
    }
}

std::optional<std::string>
classify_sensitivity(const ValueDescriptor& v,
                     const SourceSinkCatalog& catalog) {
    if (v.kind == ValueDescriptor::Kind::source_call) {
        return catalog.source_category(v.detail);
    }
    return std::nullopt;
}

std::vector<LeakReport> match_flow(const IntraFlow& flow, const IntentDb& db,
                                   const GetPutCompatTable& compat,
                                   const SourceSinkCatalog& catalog,
                                   const ReportOptions& options) {
    std::vector<LeakReport> reports;
    if (flow.source.kind != FlowSource::Kind::get_extra) {
        return reports; // baseline tool's report, not ours
    }
    auto receiver = receiver_ref_for(db, flow.package, flow.component);
    for (const auto& match : match_senders(db, receiver)) {
        const auto& s = *match.row;
        if (!s.key || !s.put_signature || !s.value) {
            continue;
        }
        bool low = match.low_confidence;
        if (is_sentinel(*s.key) || is_sentinel(flow.source.key)) {
            low = true;
        } else if (*s.key != flow.source.key) {
            continue;
        }
        if (!signature_compat(flow.source.signature, *s.put_signature,
                              compat)) {
            continue;
        }
        auto sensitivity = sensitive_value(*s.value, catalog, options.strict);
        if (!sensitivity) {
            continue;
        }
        LeakReport report;
        report.hops = chain_of(db, s);
        LeakHop terminal;
        terminal.package = flow.package;
        terminal.class_name = flow.component;
        terminal.channel = s.channel;
        report.hops.push_back(terminal);
        report.origin = sensitivity->origin;
        report.sink_signature = flow.sink.signature;
        report.sink_location = flow.sink.location;
        report.sink_category =
                catalog.sink_category(flow.sink.signature).value_or("");
        report.confidence = (low || sensitivity->low
                             || hop_chain_low_confidence(report.hops))
                ? LeakReport::Confidence::low
                : LeakReport::Confidence::resolved;
        if (std::find(reports.begin(), reports.end(), report)
            == reports.end()) {
            reports.push_back(std::move(report));
        }
    }
    sort_reports(reports);
    return reports;
}

// ---------------------------------------------------------------------------
// Result channels
// ---------------------------------------------------------------------------

namespace {

const DecodedApp* app_of(const std::vector<const DecodedApp*>& apps,
                         const std::string& package) {
    for (const auto* a : apps) {
        if (a && a->package_name == package) {
            return a;
        }
    }
    return nullptr;
}

std::vector<std::string> explicit_targets(const IntentSpec& spec,
                                          const std::string& package) {
    std::vector<std::string> out;
    if (spec.explicitness != Explicitness::explicit_target) {
        return out;
    }
    if (!spec.target_component.is_resolved()) {
        return out;
    }
    for (const auto& t : spec.target_component.candidates()) {
        out.push_back(qualify_component_name(package, t));
    }
    return out;
}

struct ResultDecls {
    // component -> declarations, with the owning package alongside
    std::multimap<std::string, std::pair<const ResultChannelDecl*,
                                         const AppExtraction*>> set_results;
    std::multimap<std::string, const ResultChannelDecl*> activity_results;
};

ResultDecls index_decls(const std::vector<AppExtraction>& extractions) {
    ResultDecls idx;
    for (const auto& ext : extractions) {
        for (const auto& decl : ext.result_channels) {
            if (decl.kind == ResultChannelDecl::Kind::set_result) {
                idx.set_results.emplace(decl.component,
                                        std::make_pair(&decl, &ext));
            } else if (decl.kind
                       == ResultChannelDecl::Kind::on_activity_result) {
                idx.activity_results.emplace(decl.component, &decl);
            }
        }
    }
    return idx;
}

void report_round_trip(std::vector<LeakReport>& reports,
                       const std::string& caller_pkg,
                       const std::string& caller_cls,
                       const std::string& callee_pkg,
                       const std::string& callee_cls, Channel channel,
                       const ExtraPut& put, const Sensitivity& sensitivity,
                       const FlowSink& sink,
                       const SourceSinkCatalog& catalog, bool low) {
    LeakReport report;
    LeakHop out_hop;
    out_hop.package = caller_pkg;
    out_hop.class_name = caller_cls;
    out_hop.address = callee_cls;
    out_hop.key = put.key.is_resolved() && put.key.candidates().size() == 1
            ? *put.key.candidates().begin()
            : std::string(unresolved_sentinel);
    out_hop.put_signature = put.put_signature;
    out_hop.channel = channel;
    LeakHop back_hop;
    back_hop.package = callee_pkg;
    back_hop.class_name = callee_cls;
    back_hop.address = caller_cls;
    back_hop.channel = channel;
    LeakHop terminal;
    terminal.package = caller_pkg;
    terminal.class_name = caller_cls;
    terminal.channel = channel;
    report.hops = {out_hop, back_hop, terminal};
    report.origin = sensitivity.origin;
    report.sink_signature = sink.signature;
    report.sink_location = sink.location;
    report.sink_category =
            catalog.sink_category(sink.signature).value_or("");
    report.confidence = (low || sensitivity.low)
            ? LeakReport::Confidence::low
            : LeakReport::Confidence::resolved;
    if (std::find(reports.begin(), reports.end(), report) == reports.end()) {
        reports.push_back(std::move(report));
    }
}

void match_one_result_get(std::vector<LeakReport>& reports,
                          const AppExtraction& ext, const std::string& caller,
                          const std::string& callee,
                          const std::string& callee_pkg,
                          const IntentSpec& spec, const ExtraGet& get,
                          const std::vector<const ExtraPut*>& puts,
                          const std::vector<IntraFlow>& flows,
                          const GetPutCompatTable& compat,
                          const SourceSinkCatalog& catalog,
                          const ReportOptions& options);

void match_activity_results(std::vector<LeakReport>& reports,
                            const std::vector<AppExtraction>& extractions,
                            const std::vector<IntraFlow>& flows,
                            const ResultDecls& idx,
                            const GetPutCompatTable& compat,
                            const SourceSinkCatalog& catalog,
                            const ReportOptions& options) {
    for (const auto& ext : extractions) {
        for (const auto& sender : ext.senders) {
            if (sender.site.api->channel != Channel::activity_for_result) {
                continue;
            }
            const std::string& caller = sender.site.cls->class_name;
            std::vector<const ResultChannelDecl*> gets_decls;
            auto [gb, ge] = idx.activity_results.equal_range(caller);
            for (auto it = gb; it != ge; ++it) {
                gets_decls.push_back(it->second);
            }
            if (gets_decls.empty()) {
                continue;
            }
            for (const auto& spec : sender.specs) {
                for (const auto& callee :
                     explicit_targets(spec, ext.package_name)) {
                    auto [sb, se] = idx.set_results.equal_range(callee);
                    for (auto it = sb; it != se; ++it) {
                        const auto& decl = *it->second.first;
                        const auto& callee_pkg =
                                it->second.second->package_name;
                        // Puts visible to the caller's later get: its own
                        // (forwarded intent) or the callee's (fresh intent).
                        std::vector<const ExtraPut*> puts;
                        if (decl.forwarded) {
                            for (const auto& p : spec.extras) {
                                puts.push_back(&p);
                            }
                        }
                        for (const auto& fresh : decl.intents) {
                            for (const auto& p : fresh.extras) {
                                puts.push_back(&p);
                            }
                        }
                        for (const auto* gd : gets_decls) {
                            for (const auto& get : gd->gets) {
                                match_one_result_get(
                                        reports, ext, caller, callee,
                                        callee_pkg, spec, get, puts, flows,
                                        compat, catalog, options);
                            }
                        }
                    }
                }
            }
        }
    }
}

void match_one_result_get(std::vector<LeakReport>& reports,
                          const AppExtraction& ext, const std::string& caller,
                          const std::string& callee,
                          const std::string& callee_pkg,
                          const IntentSpec& spec, const ExtraGet& get,
                          const std::vector<const ExtraPut*>& puts,
                          const std::vector<IntraFlow>& flows,
                          const GetPutCompatTable& compat,
                          const SourceSinkCatalog& catalog,
                          const ReportOptions& options) {
    for (const auto* put : puts) {
        bool low = false;
        if (!keys_match(get.key, put->key, low)) {
            continue;
        }
        if (!signature_compat(get.get_signature, put->put_signature,
                              compat)) {
            continue;
        }
        auto sensitivity =
                sensitive_value(put->value, catalog, options.strict);
        if (!sensitivity) {
            continue;
        }
        for (const auto& flow : flows) {
            if (flow.package != ext.package_name || flow.component != caller
                || flow.source.kind != FlowSource::Kind::get_extra
                || flow.source.signature != get.get_signature) {
                continue;
            }
            bool key_low = false;
            if (!key_matches_string(get.key, flow.source.key, key_low)) {
                continue;
            }
            report_round_trip(reports, ext.package_name, caller, callee_pkg,
                              callee, spec.channel, *put, *sensitivity,
                              flow.sink, catalog, low || key_low);
        }
    }
}

void match_service_connections(std::vector<LeakReport>& reports,
                               const std::vector<const DecodedApp*>& apps,
                               const std::vector<AppExtraction>& extractions,
                               const GetPutCompatTable& compat,
                               const SourceSinkCatalog& catalog,
                               const ReportOptions& options) {
    const TaintTag binder_seed = TaintTag::direct("__binder__", "");
    for (const auto& ext : extractions) {
        const auto* caller_app = app_of(apps, ext.package_name);
        if (!caller_app) {
            continue;
        }
        std::vector<const ResultChannelDecl*> connections;
        for (const auto& decl : ext.result_channels) {
            if (decl.kind == ResultChannelDecl::Kind::on_service_connected) {
                connections.push_back(&decl);
            }
        }
        if (connections.empty()) {
            continue;
        }
        for (const auto& sender : ext.senders) {
            if (sender.site.api->channel != Channel::service_bind) {
                continue;
            }
            for (const auto& spec : sender.specs) {
                for (const auto& service_cls :
                     explicit_targets(spec, ext.package_name)) {
                    const DecodedApp* service_app = nullptr;
                    const SmaliClass* service = nullptr;
                    for (const auto* a : apps) {
                        if (a && (service = a->find_class(service_cls))) {
                            service_app = a;
                            break;
                        }
                    }
                    if (!service) {
                        continue;
                    }
                    const auto* on_bind = service->find_method("onBind");
                    if (!on_bind) {
                        continue;
                    }
                    ClassTaint service_taint(*service, catalog,
                                             {options.eval, {}});
                    auto tags = service_taint.return_tags(*on_bind);
                    // What the published binder may carry, resolved against
                    // the caller's own bind-intent extras when it came from
                    // a get.
                    std::vector<std::pair<Sensitivity, bool>> origins;
                    for (const auto& tag : tags) {
                        if (tag.kind == TaintTag::Kind::direct_source) {
                            if (auto s = sensitive_value(
                                        ValueDescriptor::source_call(tag.api),
                                        catalog, options.strict)) {
                                origins.push_back({*s, false});
                            }
                            continue;
                        }
                        for (const auto& put : spec.extras) {
                            bool low = false;
                            if (!key_matches_string(put.key, tag.key, low)) {
                                continue;
                            }
                            if (!signature_compat(tag.get_signature,
                                                  put.put_signature,
                                                  compat)) {
                                continue;
                            }
                            if (auto s = sensitive_value(put.value, catalog,
                                                         options.strict)) {
                                origins.push_back({*s, low});
                            }
                        }
                    }
                    if (origins.empty()) {
                        continue;
                    }
                    for (const auto* conn : connections) {
                        const auto* conn_cls =
                                caller_app->find_class(conn->component);
                        if (!conn_cls) {
                            continue;
                        }
                        const auto* on_connected =
                                conn_cls->find_method("onServiceConnected");
                        if (!on_connected) {
                            continue;
                        }
                        int binder_reg =
                                on_connected->param_register_base() + 2;
                        TaintOptions topt;
                        topt.eval = options.eval;
                        topt.param_seeds["onServiceConnected"][binder_reg] = {
                                binder_seed};
                        ClassTaint conn_taint(*conn_cls, catalog, topt);
                        for (const auto& hit : conn_taint.sink_hits()) {
                            if (!hit.tags.count(binder_seed)) {
                                continue;
                            }
                            for (const auto& [sensitivity, low] : origins) {
                                ExtraPut edge;
                                edge.put_signature = "";
                                report_round_trip(
                                        reports, ext.package_name,
                                        sender.site.cls->class_name,
                                        service_app->package_name,
                                        service_cls, Channel::service_bind,
                                        edge, sensitivity,
                                        {api_signature(hit.sink),
                                         hit.location},
                                        catalog, low);
                            }
                        }
                    }
                }
            }
        }
    }
}

} // namespace

std::vector<LeakReport> match_result_channels(
        const std::vector<const DecodedApp*>& apps,
        const std::vector<AppExtraction>& extractions, const IntentDb& db,
        const std::vector<IntraFlow>& flows, const GetPutCompatTable& compat,
        const SourceSinkCatalog& catalog, const ReportOptions& options) {
    (void)db;
    std::vector<LeakReport> reports;
    auto idx = index_decls(extractions);
    match_activity_results(reports, extractions, flows, idx, compat, catalog,
                           options);
    match_service_connections(reports, apps, extractions, compat, catalog,
                              options);
    sort_reports(reports);
    return reports;
}

std::vector<IntraFlow> derive_fixture_flows(const DecodedApp& app,
                                            const SourceSinkCatalog& catalog,
                                            EvalConfig cfg) {
    std::vector<IntraFlow> flows;
    std::vector<const SmaliClass*> classes;
    for (const auto& c : app.classes) {
        classes.push_back(&c);
    }
    std::sort(classes.begin(), classes.end(),
              [](const SmaliClass* a, const SmaliClass* b) {
                  return a->class_name < b->class_name;
              });
    for (const auto* cls : classes) {
        ClassTaint taint(*cls, catalog, {cfg, {}});
        for (const auto& hit : taint.sink_hits()) {
            for (const auto& tag : hit.tags) {
                IntraFlow flow;
                flow.package = app.package_name;
                flow.component = cls->class_name;
                if (tag.kind == TaintTag::Kind::direct_source) {
                    flow.source = {FlowSource::Kind::direct_source, tag.api,
                                   ""};
                } else {
                    flow.source = {FlowSource::Kind::get_extra,
                                   tag.get_signature, tag.key};
                }
                flow.sink = {api_signature(hit.sink), hit.location};
                if (std::find(flows.begin(), flows.end(), flow)
                    == flows.end()) {
                    flows.push_back(std::move(flow));
                }
            }
        }
    }
    std::sort(flows.begin(), flows.end());
    return flows;
}

void sort_reports(std::vector<LeakReport>& reports) {
    std::sort(reports.begin(), reports.end(),
              [](const LeakReport& a, const LeakReport& b) {
                  return std::tie(a.sink_location, a.origin, a.hops)
                          < std::tie(b.sink_location, b.origin, b.hops);
              });
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

void save_flows(const std::vector<IntraFlow>& flows,
                const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw StoreIO("cannot write flows: " + path.string());
    }
    for (const auto& f : flows) {
        ordered_json j;
        j["app"] = f.package;
        j["component"] = f.component;
        j["source"]["kind"] = f.source.kind == FlowSource::Kind::get_extra
                ? "get_extra"
                : "direct_source";
        j["source"]["signature"] = f.source.signature;
        if (f.source.kind == FlowSource::Kind::get_extra) {
            j["source"]["key"] = f.source.key;
        }
        j["sink"]["signature"] = f.sink.signature;
        j["sink"]["location"] = f.sink.location;
        out << j.dump() << "\n";
    }
}

std::vector<IntraFlow> load_flows(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw MissingFlows("cannot open flows: " + path.string());
    }
    std::vector<IntraFlow> flows;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        try {
            auto j = ordered_json::parse(line);
            IntraFlow f;
            f.package = j.at("app").get<std::string>();
            f.component = j.at("component").get<std::string>();
            auto kind = j.at("source").at("kind").get<std::string>();
            if (kind == "get_extra") {
                f.source.kind = FlowSource::Kind::get_extra;
                f.source.key = j["source"].value("key", "");
            } else if (kind == "direct_source") {
                f.source.kind = FlowSource::Kind::direct_source;
            } else {
                throw StoreIO("unknown source kind: " + kind);
            }
            f.source.signature =
                    j["source"].at("signature").get<std::string>();
            f.sink.signature = j.at("sink").at("signature").get<std::string>();
            f.sink.location = j["sink"].at("location").get<std::string>();
            flows.push_back(std::move(f));
        } catch (const StoreIO&) {
            throw;
        } catch (const std::exception& e) {
            throw StoreIO(path.string() + ":" + std::to_string(lineno) + ": "
                          + e.what());
        }
    }
    return flows;
}

void save_reports(const std::vector<LeakReport>& reports,
                  const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw StoreIO("cannot write reports: " + path.string());
    }
    for (const auto& r : reports) {
        ordered_json j;
        j["hops"] = ordered_json::array();
        for (const auto& h : r.hops) {
            j["hops"].push_back({{"package", h.package},
                                 {"class", h.class_name},
                                 {"address", h.address},
                                 {"key", h.key},
                                 {"put_signature", h.put_signature},
                                 {"channel", to_string(h.channel)}});
        }
        j["origin"] = {{"kind", to_string(r.origin.kind)},
                       {"detail", r.origin.wire_detail()}};
        j["sink"] = {{"signature", r.sink_signature},
                     {"location", r.sink_location},
                     {"category", r.sink_category}};
        j["confidence"] = r.confidence == LeakReport::Confidence::resolved
                ? "resolved"
                : "low";
        out << j.dump() << "\n";
    }
}

std::vector<LeakReport> load_reports(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw StoreIO("cannot open reports: " + path.string());
    }
    std::vector<LeakReport> reports;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        try {
            auto j = ordered_json::parse(line);
            LeakReport r;
            for (const auto& hj : j.at("hops")) {
                LeakHop h;
                h.package = hj.at("package").get<std::string>();
                h.class_name = hj.at("class").get<std::string>();
                h.address = hj.at("address").get<std::string>();
                h.key = hj.at("key").get<std::string>();
                h.put_signature = hj.at("put_signature").get<std::string>();
                auto channel = channel_from_string(
                        hj.at("channel").get<std::string>());
                if (!channel) {
                    throw StoreIO("unknown channel");
                }
                h.channel = *channel;
                r.hops.push_back(std::move(h));
            }
            auto kind = value_kind_from_string(
                    j.at("origin").at("kind").get<std::string>());
            if (!kind) {
                throw StoreIO("unknown origin kind");
            }
            r.origin = ValueDescriptor::from_wire(
                    *kind, j["origin"].at("detail").get<std::string>());
            r.sink_signature = j.at("sink").at("signature").get<std::string>();
            r.sink_location = j["sink"].at("location").get<std::string>();
            r.sink_category = j["sink"].at("category").get<std::string>();
            r.confidence = j.at("confidence").get<std::string>() == "low"
                    ? LeakReport::Confidence::low
                    : LeakReport::Confidence::resolved;
            reports.push_back(std::move(r));
        } catch (const StoreIO&) {
            throw;
        } catch (const std::exception& e) {
            throw StoreIO(path.string() + ":" + std::to_string(lineno) + ": "
                          + e.what());
        }
    }
    return reports;
}

std::string render_reports_text(const std::vector<LeakReport>& reports) {
    std::ostringstream out;
    if (reports.empty()) {
        out << "no leaks found\n";
        return out.str();
    }
    for (const auto& r : reports) {
        out << "LEAK";
        if (!r.sink_category.empty()) {
            out << " [" << r.sink_category << "]";
        }
        out << " " << r.origin.wire_detail() << " -> " << r.sink_signature
            << " @ " << r.sink_location;
        out << " (confidence: "
            << (r.confidence == LeakReport::Confidence::low ? "low"
                                                            : "resolved")
            << ")\n";
        for (std::size_t i = 0; i < r.hops.size(); ++i) {
            const auto& h = r.hops[i];
            out << "  " << (i + 1 == r.hops.size() ? "-> " : "   ")
                << h.package << "/" << h.class_name;
            if (!h.address.empty()) {
                out << " --[" << to_string(h.channel) << " " << h.address;
                if (!h.key.empty()) {
                    out << ", key \"" << h.key << "\"";
                }
                if (!h.put_signature.empty()) {
                    out << ", " << h.put_signature;
                }
                out << "]-->";
            }
            out << "\n";
        }
    }
    return out.str();
}

} // namespace intentscan
