#include "intentscan/intent_db.hpp"

#include "intentscan/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace intentscan {

namespace {

using ordered_json = nlohmann::ordered_json;

const std::string kLauncherAction = "android.intent.action.MAIN";

std::vector<std::string> expand(const StringValue& v) {
    if (!v.is_resolved()) {
        return {unresolved_sentinel};
    }
    return {v.candidates().begin(), v.candidates().end()};
}

Channel receiver_channel(ComponentKind kind) {
    switch (kind) {
    case ComponentKind::activity: return Channel::activity;
    case ComponentKind::service: return Channel::service_start;
    case ComponentKind::broadcast_receiver: return Channel::broadcast;
    case ComponentKind::content_provider: return Channel::activity;
    }
    return Channel::activity;
}

ComponentKind kind_of_channel(Channel channel) {
    switch (channel) {
    case Channel::activity:
    case Channel::activity_for_result: return ComponentKind::activity;
    case Channel::broadcast: return ComponentKind::broadcast_receiver;
    case Channel::service_start:
    case Channel::service_bind: return ComponentKind::service;
    }
    return ComponentKind::activity;
}

bool channel_reaches(Channel channel, ComponentKind kind) {
    return kind_of_channel(channel) == kind;
}

bool contains_tuple(const std::vector<IntentSummaryRow>& rows,
                    const IntentSummaryRow& row) {
    return std::any_of(rows.begin(), rows.end(),
                       [&](const IntentSummaryRow& r) {
                           return r.dedup_tuple() == row.dedup_tuple();
                       });
}

// Filter actions a component answers to, minus the launcher entry point
// (which is app-start plumbing, not inter-component messaging).
std::set<std::string> icc_actions(const std::vector<IntentFilterDecl>& filters) {
    std::set<std::string> actions;
    for (const auto& f : filters) {
        for (const auto& a : f.actions) {
            if (a != kLauncherAction) {
                actions.insert(a);
            }
        }
    }
    return actions;
}

std::string qualify_target(const std::string& package,
                           const std::string& target) {
    if (target == unresolved_sentinel) {
        return target;
    }
    return qualify_component_name(package, target);
}

} // namespace

const IntentSummaryRow* IntentDb::find_row(int id) const {
    for (const auto& r : rows) {
        if (r.id == id) {
            return &r;
        }
    }
    return nullptr;
}

int insert_app_summaries(IntentDb& db, const DecodedApp& app,
                         const AppExtraction& extraction) {
    // Modular re-analysis: drop the package's previous rows and any derived
    // rows (transitively) built on top of them.
    std::set<int> removed;
    std::erase_if(db.rows, [&](const IntentSummaryRow& r) {
        if (r.package_name == app.package_name) {
            removed.insert(r.id);
            return true;
        }
        return false;
    });
    bool again = true;
    while (again) {
        again = false;
        std::erase_if(db.rows, [&](const IntentSummaryRow& r) {
            if (r.provenance.kind != Provenance::Kind::fixpoint_derived) {
                return false;
            }
            for (int from : r.provenance.from_ids) {
                if (removed.count(from)) {
                    removed.insert(r.id);
                    again = true;
                    return true;
                }
            }
            return false;
        });
    }

    int added = 0;
    auto push = [&](IntentSummaryRow row) {
        if (contains_tuple(db.rows, row)) {
            return;
        }
        row.id = db.next_id++;
        db.rows.push_back(std::move(row));
        ++added;
    };

    // (class, filter action, channel-inferred kind) pairs covered by
    // combined sender rows; matching pure receiver rows would be redundant.
    std::set<std::tuple<std::string, std::string, ComponentKind>> covered;

    for (const auto& sender : extraction.senders) {
        const std::string& cls = sender.site.cls->class_name;
        std::set<std::string> own_filters;
        if (const auto* comp = app.find_component(cls)) {
            own_filters = icc_actions(comp->filters);
        }
        std::vector<std::optional<std::string>> filter_slots;
        if (own_filters.empty()) {
            filter_slots.push_back(std::nullopt);
        } else {
            for (const auto& f : own_filters) {
                filter_slots.emplace_back(f);
            }
        }
        for (const auto& spec : sender.specs) {
            std::vector<std::string> addresses =
                    spec.explicitness == Explicitness::explicit_target
                            ? expand(spec.target_component)
                            : expand(spec.action);
            struct Put {
                std::optional<std::string> key;
                std::optional<ValueDescriptor> value;
                std::optional<std::string> put_signature;
            };
            std::vector<Put> puts;
            for (const auto& extra : spec.extras) {
                for (const auto& key : expand(extra.key)) {
                    puts.push_back({key, extra.value, extra.put_signature});
                }
            }
            if (puts.empty()) {
                puts.push_back({}); // send with no extras
            }
            for (const auto& filter : filter_slots) {
                for (const auto& address : addresses) {
                    for (const auto& put : puts) {
                        IntentSummaryRow row;
                        row.package_name = app.package_name;
                        row.class_name = cls;
                        row.intent_filter = filter;
                        if (spec.explicitness
                            == Explicitness::explicit_target) {
                            row.target_component = qualify_target(
                                    app.package_name, address);
                        } else {
                            row.intent_action = address;
                        }
                        row.key = put.key;
                        row.value = put.value;
                        row.put_signature = put.put_signature;
                        row.channel = spec.channel;
                        push(std::move(row));
                        if (filter) {
                            covered.insert({cls, *filter,
                                            kind_of_channel(spec.channel)});
                        }
                    }
                }
            }
        }
    }

    auto push_receiver = [&](const std::string& cls, const std::string& action,
                             ComponentKind kind) {
        if (covered.count({cls, action, kind})) {
            return;
        }
        IntentSummaryRow row;
        row.package_name = app.package_name;
        row.class_name = cls;
        row.intent_filter = action;
        row.channel = receiver_channel(kind);
        push(std::move(row));
    };

    for (const auto& comp : app.components) {
        if (comp.kind == ComponentKind::content_provider) {
            continue;
        }
        for (const auto& action : icc_actions(comp.filters)) {
            push_receiver(comp.name, action, comp.kind);
        }
    }
    for (const auto& filter : extraction.dynamic_filters) {
        if (!filter.dynamic) {
            continue;
        }
        for (const auto& action : filter.actions) {
            if (action != kLauncherAction) {
                push_receiver(filter.dynamic->class_name, action,
                              ComponentKind::broadcast_receiver);
            }
        }
    }
    return added;
}

std::vector<MatchedSender> match_senders(const IntentDb& db,
                                         const ReceiverRef& receiver) {
    std::vector<MatchedSender> out;
    bool receiver_has_sentinel =
            receiver.filter_actions.count(unresolved_sentinel) > 0;
    for (const auto& row : db.rows) {
        if (!row.is_sender() || !channel_reaches(row.channel, receiver.kind)) {
            continue;
        }
        if (row.target_component) {
            if (*row.target_component == unresolved_sentinel) {
                out.push_back({&row, true});
            } else if (*row.target_component == receiver.class_name) {
                out.push_back({&row, false});
            }
            continue;
        }
        const auto& action = *row.intent_action;
        if (action == unresolved_sentinel) {
            if (!receiver.filter_actions.empty()) {
                out.push_back({&row, true});
            }
        } else if (receiver.filter_actions.count(action)) {
            out.push_back({&row, false});
        } else if (receiver_has_sentinel) {
            out.push_back({&row, true});
        }
    }
    return out;
}

ReceiverRef receiver_ref_for(const IntentDb& db, const std::string& package,
                             const std::string& class_name) {
    ReceiverRef ref;
    ref.package = package;
    ref.class_name = class_name;
    std::optional<ComponentKind> receiver_kind;
    std::optional<ComponentKind> sender_kind;
    for (const auto& row : db.rows) {
        if (row.package_name != package || row.class_name != class_name) {
            continue;
        }
        if (row.intent_filter) {
            ref.filter_actions.insert(*row.intent_filter);
        }
        if (row.is_sender()) {
            if (!sender_kind) {
                sender_kind = kind_of_channel(row.channel);
            }
        } else if (row.is_receiver() && !receiver_kind) {
            receiver_kind = kind_of_channel(row.channel);
        }
    }
    ref.kind = receiver_kind ? *receiver_kind
                             : sender_kind.value_or(ComponentKind::activity);
    return ref;
}

int fixpoint_resolve(IntentDb& db, const GetPutCompatTable& compat) {
    int total_added = 0;
    bool progress = true;
    while (progress) {
        progress = false;
        std::vector<IntentSummaryRow> fresh;
        for (const auto& row : db.rows) {
            if (!row.value
                || row.value->kind != ValueDescriptor::Kind::get_extra_ref) {
                continue;
            }
            auto receiver = receiver_ref_for(db, row.package_name,
                                             row.class_name);
            for (const auto& match : match_senders(db, receiver)) {
                const auto& s = *match.row;
                if (!s.key || !s.value || !s.put_signature
                    || s.value->kind == ValueDescriptor::Kind::get_extra_ref) {
                    continue;
                }
                if (*s.key != row.value->ref_key) {
                    continue;
                }
                bool ok = false;
                try {
                    ok = compat.compatible(row.value->get_signature,
                                           *s.put_signature);
                } catch (const UnknownGetSignature&) {
                    ok = false;
                }
                if (!ok) {
                    continue;
                }
                IntentSummaryRow derived = row;
                derived.id = -1;
                derived.value = s.value;
                derived.provenance = {Provenance::Kind::fixpoint_derived,
                                      {row.id, s.id}};
                if (!contains_tuple(db.rows, derived)
                    && !contains_tuple(fresh, derived)) {
                    fresh.push_back(std::move(derived));
                }
            }
        }
        for (auto& row : fresh) {
            row.id = db.next_id++;
            db.rows.push_back(std::move(row));
            ++total_added;
            progress = true;
        }
    }
    return total_added;
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

namespace {

ordered_json opt_str(const std::optional<std::string>& v) {
    return v ? ordered_json(*v) : ordered_json(nullptr);
}

std::string provenance_text(const Provenance& p,
                            const std::map<int, int>& id_map) {
    if (p.kind == Provenance::Kind::extracted) {
        return "extracted";
    }
    std::string out = "fixpoint_derived(";
    for (std::size_t i = 0; i < p.from_ids.size(); ++i) {
        if (i) {
            out += ",";
        }
        auto it = id_map.find(p.from_ids[i]);
        out += std::to_string(it == id_map.end() ? p.from_ids[i]
                                                 : it->second);
    }
    return out + ")";
}

Provenance parse_provenance(const std::string& text) {
    if (text == "extracted") {
        return {};
    }
    const std::string prefix = "fixpoint_derived(";
    if (text.rfind(prefix, 0) != 0 || text.back() != ')') {
        throw StoreIO("malformed provenance: " + text);
    }
    Provenance p;
    p.kind = Provenance::Kind::fixpoint_derived;
    std::istringstream in(
            text.substr(prefix.size(), text.size() - prefix.size() - 1));
    std::string tok;
    while (std::getline(in, tok, ',')) {
        p.from_ids.push_back(std::stoi(tok));
    }
    return p;
}

auto sort_key(const IntentSummaryRow& r) {
    return std::make_tuple(r.package_name, r.class_name, r.intent_filter,
                           r.target_component, r.intent_action, r.key,
                           r.value, r.put_signature, r.channel,
                           r.provenance.kind, r.provenance.from_ids);
}

} // namespace

void save_db(const IntentDb& db, const std::filesystem::path& path) {
    std::vector<const IntentSummaryRow*> ordered;
    for (const auto& r : db.rows) {
        ordered.push_back(&r);
    }
    std::sort(ordered.begin(), ordered.end(),
              [](const IntentSummaryRow* a, const IntentSummaryRow* b) {
                  return sort_key(*a) < sort_key(*b);
              });
    std::map<int, int> id_map;
    for (std::size_t i = 0; i < ordered.size(); ++i) {
        id_map[ordered[i]->id] = static_cast<int>(i) + 1;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw StoreIO("cannot write intent database: " + path.string());
    }
    for (const auto* r : ordered) {
        ordered_json j;
        j["schema_version"] = intent_db_schema_version;
        j["package_name"] = r->package_name;
        j["class_name"] = r->class_name;
        j["intent_filter"] = opt_str(r->intent_filter);
        j["target_component"] = opt_str(r->target_component);
        j["intent_action"] = opt_str(r->intent_action);
        j["key"] = opt_str(r->key);
        if (r->value) {
            j["value"] = {{"kind", to_string(r->value->kind)},
                          {"detail", r->value->wire_detail()}};
        } else {
            j["value"] = nullptr;
        }
        j["put_signature"] = opt_str(r->put_signature);
        j["channel"] = to_string(r->channel);
        j["provenance"] = provenance_text(r->provenance, id_map);
        out << j.dump() << "\n";
    }
    if (!out) {
        throw StoreIO("write failed: " + path.string());
    }
}

IntentDb load_db(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw StoreIO("cannot open intent database: " + path.string());
    }
    IntentDb db;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        ordered_json j;
        try {
            j = ordered_json::parse(line);
        } catch (const std::exception& e) {
            throw StoreIO(path.string() + ":" + std::to_string(lineno) + ": "
                          + e.what());
        }
        if (!j.contains("schema_version")
            || !j["schema_version"].is_number_integer()) {
            throw StoreIO(path.string() + ":" + std::to_string(lineno)
                          + ": missing schema_version");
        }
        if (j["schema_version"].get<int>() != intent_db_schema_version) {
            throw SchemaVersionMismatch(
                    path.string() + ": schema version "
                    + j["schema_version"].dump() + " (supported: "
                    + std::to_string(intent_db_schema_version) + ")");
        }
        try {
            IntentSummaryRow r;
            r.id = lineno;
            r.package_name = j.at("package_name").get<std::string>();
            r.class_name = j.at("class_name").get<std::string>();
            auto opt = [&](const char* field) -> std::optional<std::string> {
                const auto& v = j.at(field);
                if (v.is_null()) {
                    return std::nullopt;
                }
                return v.get<std::string>();
            };
            r.intent_filter = opt("intent_filter");
            r.target_component = opt("target_component");
            r.intent_action = opt("intent_action");
            r.key = opt("key");
            if (!j.at("value").is_null()) {
                auto kind = value_kind_from_string(
                        j["value"].at("kind").get<std::string>());
                if (!kind) {
                    throw StoreIO("unknown value kind");
                }
                r.value = ValueDescriptor::from_wire(
                        *kind, j["value"].at("detail").get<std::string>());
            }
            r.put_signature = opt("put_signature");
            auto channel = channel_from_string(
                    j.at("channel").get<std::string>());
            if (!channel) {
                throw StoreIO("unknown channel");
            }
            r.channel = *channel;
            r.provenance =
                    parse_provenance(j.at("provenance").get<std::string>());
            db.rows.push_back(std::move(r));
        } catch (const SchemaVersionMismatch&) {
            throw;
        } catch (const std::exception& e) {
            throw StoreIO(path.string() + ":" + std::to_string(lineno) + ": "
                          + e.what());
        }
    }
    db.next_id = lineno + 1;
    return db;
}

} // namespace intentscan
