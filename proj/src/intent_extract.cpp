#include "intentscan/intent_extract.hpp"

#include "intentscan/errors.hpp"
#include "intentscan/taint.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <set>

namespace intentscan {

namespace {

const std::string kIntentOwner = "Landroid/content/Intent;";
const std::string kBundleOwner = "Landroid/os/Bundle;";
const std::string kFilterOwner = "Landroid/content/IntentFilter;";
const std::string kComponentName = "Landroid/content/ComponentName;";
const std::string kStringDesc = "Ljava/lang/String;";
const std::string kClassDesc = "Ljava/lang/Class;";

bool is_explicit_transform(const std::string& name) {
    static const std::set<std::string> names = {
            "setClass",    "setClassName", "setComponent",
            "setPackage",  "setSelector",
    };
    return names.count(name) > 0;
}

bool is_put_method(const MethodRef& m) {
    return m.owner == kIntentOwner
            && canonical_put_signature(m).has_value();
}

// Basic-block layout of one method, shared by the backward walkers.
struct Cfg {
    std::vector<int> leader;
    std::map<int, std::vector<int>> preds; // leader -> predecessor indices

    explicit Cfg(const SmaliMethod& m) {
        int n = static_cast<int>(m.instructions.size());
        std::set<int> leaders{0};
        for (int i = 0; i < n; ++i) {
            const auto& ins = m.instructions[i];
            if (ins.branch_target >= 0) {
                leaders.insert(ins.branch_target);
                if (i + 1 < n) {
                    leaders.insert(i + 1);
                }
            }
            if (ins.op == Opcode::return_void
                || ins.op == Opcode::return_value
                || ins.op == Opcode::return_object) {
                if (i + 1 < n) {
                    leaders.insert(i + 1);
                }
            }
        }
        leader.resize(n, 0);
        int cur = 0;
        for (int i = 0; i < n; ++i) {
            if (leaders.count(i)) {
                cur = i;
            }
            leader[i] = cur;
        }
        for (int i = 0; i < n; ++i) {
            for (int s : m.successors(i)) {
                if (s < n && leaders.count(s)) {
                    preds[s].push_back(i);
                }
            }
        }
    }
};

using Bindings = std::shared_ptr<std::map<int, StringValue>>;

// One step of intent construction discovered by the backward slice,
// replayed forward when the spec is folded.
struct Event {
    enum class Kind {
        ctor_empty,        // new Intent()
        ctor_action,       // new Intent(action[, uri])
        ctor_target,       // new Intent(context, Class) / make*Activity
        origin_received,   // getIntent() or intent-typed parameter
        transform,         // setAction / set{Class,ClassName,Component,...}
        put,               // putExtra family on the intent register
        bundle_put,        // Bundle put expanded out of putExtras(Bundle)
    };

    Kind kind = Kind::ctor_empty;
    const SmaliMethod* method = nullptr;
    int index = 0;
    Bindings bindings; // parameter values when inside a descended callee
};

struct TracePath {
    std::vector<Event> events; // program order, construction first
    bool found_origin = false;
};

struct Backtracer {
    const SmaliClass& cls;
    const SourceSinkCatalog& catalog;
    EvalConfig cfg;
    std::size_t path_cap = 8;

    std::map<const SmaliMethod*, std::unique_ptr<Cfg>> cfgs;
    std::unique_ptr<ClassTaint> taint;

    Backtracer(const SmaliClass& c, const SourceSinkCatalog& cat,
               EvalConfig ec)
        : cls(c), catalog(cat), cfg(ec) {}

    const Cfg& cfg_of(const SmaliMethod& m) {
        auto& slot = cfgs[&m];
        if (!slot) {
            slot = std::make_unique<Cfg>(m);
        }
        return *slot;
    }

    ClassTaint& class_taint() {
        if (!taint) {
            taint = std::make_unique<ClassTaint>(cls, catalog,
                                                 TaintOptions{cfg, {}});
        }
        return *taint;
    }

    StringValue eval_at(const SmaliMethod& m, int index, int reg,
                        const Bindings& bindings) {
        StringEvaluator ev(cls, m, cfg,
                           bindings ? *bindings
                                    : std::map<int, StringValue>{});
        return ev.eval(index, reg);
    }

    std::set<std::int64_t> eval_int_at(const SmaliMethod& m, int index,
                                       int reg, const Bindings& bindings) {
        StringEvaluator ev(cls, m, cfg,
                           bindings ? *bindings
                                    : std::map<int, StringValue>{});
        return ev.eval_int(index, reg);
    }

    // ------------------------------------------------------------------
    // Backward walk
    // ------------------------------------------------------------------

    std::vector<TracePath> trace(const SmaliMethod& m, int use_index, int reg,
                                 const Bindings& bindings, int depth) {
        std::vector<TracePath> paths;
        std::set<std::pair<int, int>> visited;
        start_walk(m, use_index, reg, bindings, depth, {}, visited, paths);
        return paths;
    }

    // Entry for a use at `use_index`: examines the block instructions
    // strictly before it, then the block's predecessors.
    void start_walk(const SmaliMethod& m, int use_index, int reg,
                    const Bindings& bindings, int depth,
                    std::vector<Event> rev,
                    std::set<std::pair<int, int>>& visited,
                    std::vector<TracePath>& paths) {
        const auto& cfg_ = cfg_of(m);
        int n = static_cast<int>(m.instructions.size());
        int scan_top, lead;
        if (n == 0) {
            scan_top = -1;
            lead = 0;
        } else if (use_index >= n) {
            scan_top = n - 1;
            lead = cfg_.leader[n - 1];
        } else {
            scan_top = use_index - 1;
            lead = cfg_.leader[use_index];
        }
        walk(m, scan_top, lead, reg, bindings, depth, std::move(rev), visited,
             paths);
    }

    // Examines instructions (scan_top .. lead], then recurses into the
    // predecessors of `lead`. `rev` holds the events found so far, last
    // first.
    void walk(const SmaliMethod& m, int scan_top, int lead, int reg,
              const Bindings& bindings, int depth, std::vector<Event> rev,
              std::set<std::pair<int, int>>& visited,
              std::vector<TracePath>& paths) {
        if (paths.size() >= path_cap) {
            return;
        }
        const auto& cfg_ = cfg_of(m);
        for (int k = scan_top; k >= lead; --k) {
            const auto& ins = m.instructions[k];
            switch (ins.op) {
            case Opcode::move_object:
                if (ins.registers[0] == reg) {
                    reg = ins.registers[1];
                }
                break;
            case Opcode::const_string:
            case Opcode::const_class:
            case Opcode::const_int:
            case Opcode::iget_object:
            case Opcode::sget_object:
                if (!ins.registers.empty() && ins.registers[0] == reg) {
                    finalize(paths, std::move(rev), false);
                    return;
                }
                break;
            case Opcode::new_instance:
                if (ins.registers[0] == reg) {
                    // Object escaped without a visible <init>.
                    finalize(paths, std::move(rev), false);
                    return;
                }
                break;
            case Opcode::move_result_object:
                if (ins.registers[0] == reg) {
                    handle_result_def(m, k, bindings, depth, std::move(rev),
                                      visited, paths, reg);
                    return;
                }
                break;
            case Opcode::invoke_direct:
                if (!ins.registers.empty() && ins.registers[0] == reg
                    && ins.method && ins.method->name == "<init>") {
                    handle_ctor(m, k, *ins.method, bindings, depth,
                                std::move(rev), visited, paths, reg);
                    return;
                }
                break;
            case Opcode::invoke_virtual:
                if (!ins.registers.empty() && ins.registers[0] == reg
                    && ins.method && ins.method->owner == kIntentOwner) {
                    record_intent_call(m, k, *ins.method, bindings, rev);
                }
                break;
            default:
                break;
            }
        }
        if (lead == 0) {
            // Start of the method: an intent-typed parameter means the
            // value was received from elsewhere.
            if (reg >= m.param_register_base()) {
                rev.push_back({Event::Kind::origin_received, &m, 0, bindings});
                finalize(paths, std::move(rev), true);
            } else {
                finalize(paths, std::move(rev), false);
            }
            return;
        }
        auto pit = cfg_.preds.find(lead);
        if (pit == cfg_.preds.end()) {
            finalize(paths, std::move(rev), false);
            return;
        }
        for (int p : pit->second) {
            if (!visited.insert({p, reg}).second) {
                continue;
            }
            walk(m, p, cfg_.leader[p], reg, bindings, depth, rev, visited,
                 paths);
        }
    }

    void record_intent_call(const SmaliMethod& m, int k, const MethodRef& mr,
                            const Bindings& bindings,
                            std::vector<Event>& rev) {
        if (mr.name == "setAction" || is_explicit_transform(mr.name)
            || mr.name == "makeMainActivity") {
            rev.push_back({Event::Kind::transform, &m, k, bindings});
        } else if (is_put_method(mr)) {
            rev.push_back({Event::Kind::put, &m, k, bindings});
        } else if (mr.name == "putExtras" && mr.params.size() == 1
                   && mr.params[0] == kBundleOwner) {
            expand_bundle_puts(m, k, bindings, rev);
        }
        // Other intent methods (addFlags, addCategory, ...) are neutral.
    }

    // putExtras(Bundle): pick up the Bundle's own put calls. A linear
    // same-block-chain scan suffices for how bundles are built in practice.
    void expand_bundle_puts(const SmaliMethod& m, int put_extras_idx,
                            const Bindings& bindings,
                            std::vector<Event>& rev) {
        int breg = m.instructions[put_extras_idx].registers[1];
        for (int k = put_extras_idx - 1; k >= 0; --k) {
            const auto& ins = m.instructions[k];
            if (ins.op == Opcode::move_object && ins.registers[0] == breg) {
                breg = ins.registers[1];
                continue;
            }
            if ((ins.op == Opcode::invoke_virtual
                 || ins.op == Opcode::invoke_direct)
                && ins.method && ins.method->owner == kBundleOwner
                && !ins.registers.empty() && ins.registers[0] == breg) {
                if (ins.method->name == "<init>") {
                    return;
                }
                if (canonical_put_signature(*ins.method)) {
                    rev.push_back({Event::Kind::bundle_put, &m, k, bindings});
                }
            }
        }
    }

    void handle_ctor(const SmaliMethod& m, int k, const MethodRef& mr,
                     const Bindings& bindings, int depth,
                     std::vector<Event> rev,
                     std::set<std::pair<int, int>>& visited,
                     std::vector<TracePath>& paths, int reg) {
        if (mr.owner != kIntentOwner) {
            finalize(paths, std::move(rev), false);
            return;
        }
        if (mr.params.size() == 1 && mr.params[0] == kIntentOwner) {
            // Copy constructor: keep walking on the source intent.
            int src = m.instructions[k].registers[1];
            start_walk(m, k, src, bindings, depth, std::move(rev), visited,
                       paths);
            return;
        }
        Event ev{Event::Kind::ctor_empty, &m, k, bindings};
        if (!mr.params.empty() && mr.params[0] == kStringDesc) {
            ev.kind = Event::Kind::ctor_action;
        } else if (mr.params.size() == 2 && mr.params[1] == kClassDesc) {
            ev.kind = Event::Kind::ctor_target;
        } else if (!mr.params.empty()) {
            ev.kind = Event::Kind::ctor_empty; // unmodeled variant
        }
        rev.push_back(ev);
        finalize(paths, std::move(rev), true);
        (void)reg;
    }

    void handle_result_def(const SmaliMethod& m, int k,
                           const Bindings& bindings, int depth,
                           std::vector<Event> rev,
                           std::set<std::pair<int, int>>& visited,
                           std::vector<TracePath>& paths, int reg) {
        if (k == 0 || !m.instructions[k - 1].is_invoke()) {
            finalize(paths, std::move(rev), false);
            return;
        }
        const auto& call = m.instructions[k - 1];
        const auto& mr = *call.method;
        if (mr.name == "getIntent" && mr.params.empty()) {
            rev.push_back({Event::Kind::origin_received, &m, k - 1, bindings});
            finalize(paths, std::move(rev), true);
            return;
        }
        if (mr.owner == kIntentOwner
            && (mr.name == "makeMainActivity"
                || mr.name == "makeRestartActivityTask")) {
            rev.push_back({Event::Kind::ctor_target, &m, k - 1, bindings});
            finalize(paths, std::move(rev), true);
            return;
        }
        if (mr.owner == kIntentOwner && call.op != Opcode::invoke_static
            && !call.registers.empty()) {
            // Fluent style: setAction(...) etc. return the receiver.
            start_walk(m, k, call.registers[0], bindings, depth,
                       std::move(rev), visited, paths);
            return;
        }
        (void)reg;
        if (mr.owner == dotted_to_descriptor(cls.class_name)
            && mr.return_type == kIntentOwner && depth == 0) {
            descend_into_callee(m, k - 1, mr, bindings, std::move(rev),
                                paths);
            return;
        }
        finalize(paths, std::move(rev), false);
    }

    // Helper methods that build and return an intent: trace each returned
    // value inside the callee, binding string parameters to the caller's
    // argument values.
    void descend_into_callee(const SmaliMethod& caller, int call_idx,
                             const MethodRef& mr, const Bindings& bindings,
                             std::vector<Event> rev,
                             std::vector<TracePath>& paths) {
        const SmaliMethod* callee = nullptr;
        for (const auto& cand : cls.methods) {
            if (cand.sig.name == mr.name && cand.sig.params == mr.params) {
                callee = &cand;
                break;
            }
        }
        if (!callee) {
            finalize(paths, std::move(rev), false);
            return;
        }
        const auto& call = caller.instructions[call_idx];
        bool is_static = call.op == Opcode::invoke_static;
        auto callee_bindings = std::make_shared<std::map<int, StringValue>>();
        int slot = callee->is_static ? 0 : 1;
        for (std::size_t p = 0; p < mr.params.size(); ++p) {
            int arg_pos = static_cast<int>(p) + (is_static ? 0 : 1);
            if (arg_pos < static_cast<int>(call.registers.size())
                && (mr.params[p] == kStringDesc
                    || mr.params[p] == "Ljava/lang/CharSequence;")) {
                (*callee_bindings)[callee->param_register_base() + slot] =
                        eval_at(caller, call_idx, call.registers[arg_pos],
                                bindings);
            }
            slot += (mr.params[p] == "J" || mr.params[p] == "D") ? 2 : 1;
        }
        std::size_t added = 0;
        for (std::size_t i = 0; i < callee->instructions.size(); ++i) {
            const auto& ins = callee->instructions[i];
            if (ins.op != Opcode::return_object) {
                continue;
            }
            auto sub = trace(*callee, static_cast<int>(i), ins.registers[0],
                             callee_bindings, 1);
            for (auto& sp : sub) {
                if (!sp.found_origin) {
                    continue;
                }
                TracePath combined;
                combined.found_origin = true;
                combined.events = sp.events;
                // Caller-side transformations follow the callee's.
                std::vector<Event> caller_events(rev.rbegin(), rev.rend());
                combined.events.insert(combined.events.end(),
                                       caller_events.begin(),
                                       caller_events.end());
                paths.push_back(std::move(combined));
                ++added;
                if (paths.size() >= path_cap) {
                    return;
                }
            }
        }
        if (added == 0) {
            finalize(paths, std::move(rev), false);
        }
    }

    void finalize(std::vector<TracePath>& paths, std::vector<Event> rev,
                  bool found) {
        TracePath p;
        p.found_origin = found;
        p.events.assign(rev.rbegin(), rev.rend());
        paths.push_back(std::move(p));
    }

    // ------------------------------------------------------------------
    // Forward fold
    // ------------------------------------------------------------------

    std::string location(const SmaliMethod& m, int idx) const {
        return cls.class_name + "." + m.sig.name + ":" + std::to_string(idx);
    }

    StringValue component_name_target(const SmaliMethod& m, int use_idx,
                                      int comp_reg, const Bindings& bindings) {
        // Resolve a ComponentName argument to its class-name string.
        for (int k = use_idx - 1; k >= 0; --k) {
            const auto& ins = m.instructions[k];
            if (ins.op == Opcode::move_object && ins.registers[0] == comp_reg) {
                comp_reg = ins.registers[1];
                continue;
            }
            if (ins.op == Opcode::const_int && !ins.registers.empty()
                && ins.registers[0] == comp_reg) {
                // null ComponentName: setComponent(null) clears the target.
                return StringValue::unresolved(
                        StringValue::Reason::unmodeled_op);
            }
            if (ins.op == Opcode::invoke_direct && ins.method
                && ins.method->owner == kComponentName
                && ins.method->name == "<init>" && !ins.registers.empty()
                && ins.registers[0] == comp_reg) {
                if (ins.method->params.size() == 2
                    && ins.registers.size() >= 3) {
                    // (String pkg, String cls) / (Context, String cls) /
                    // (Context, Class cls): the class is always last.
                    return eval_at(m, k, ins.registers[2], bindings);
                }
                break;
            }
        }
        return StringValue::unresolved(StringValue::Reason::unmodeled_op);
    }

    ValueDescriptor classify_value(const SmaliMethod& m, int put_idx,
                                   int value_reg) {
        auto tags = class_taint().tags_before(m, put_idx, value_reg);
        for (const auto& tag : tags) {
            if (tag.kind == TaintTag::Kind::direct_source) {
                return ValueDescriptor::source_call(tag.api);
            }
        }
        for (const auto& tag : tags) {
            if (tag.kind == TaintTag::Kind::get_extra) {
                return ValueDescriptor::get_extra_ref(tag.get_signature,
                                                      tag.key);
            }
        }
        return ValueDescriptor{}; // placeholder; caller refines below
    }

    ExtraPut fold_put(const Event& ev) {
        const auto& m = *ev.method;
        const auto& ins = m.instructions[ev.index];
        const auto& mr = *ins.method;
        ExtraPut put;
        put.put_signature = canonical_put_signature(mr).value_or("");
        if (ins.registers.size() >= 2) {
            put.key = eval_at(m, ev.index, ins.registers[1], ev.bindings);
        }
        if (ins.registers.size() >= 3) {
            int value_reg = ins.registers[2];
            auto classified = classify_value(m, ev.index, value_reg);
            if (classified.kind != ValueDescriptor::Kind::opaque
                || !classified.detail.empty()) {
                put.value = classified;
                return put;
            }
            auto sv = eval_at(m, ev.index, value_reg, ev.bindings);
            if (sv.is_resolved() && sv.candidates().size() == 1) {
                put.value = ValueDescriptor::constant(
                        *sv.candidates().begin());
            } else {
                put.value = ValueDescriptor::opaque(location(m, ev.index));
            }
        } else {
            put.value = ValueDescriptor::opaque(location(m, ev.index));
        }
        return put;
    }

    IntentSpec fold(const TracePath& path, Channel channel) {
        IntentSpec spec;
        spec.channel = channel;
        bool have_origin = false;
        for (const auto& ev : path.events) {
            const auto& m = *ev.method;
            const auto& ins = m.instructions[ev.index];
            switch (ev.kind) {
            case Event::Kind::ctor_empty:
                spec.explicitness = Explicitness::implicit;
                spec.action = StringValue::unresolved(
                        StringValue::Reason::unmodeled_op);
                if (!have_origin) {
                    spec.origin = location(m, ev.index);
                    have_origin = true;
                }
                break;
            case Event::Kind::ctor_action:
                spec.explicitness = Explicitness::implicit;
                spec.action = eval_at(m, ev.index, ins.registers[1],
                                      ev.bindings);
                if (!have_origin) {
                    spec.origin = location(m, ev.index);
                    have_origin = true;
                }
                break;
            case Event::Kind::ctor_target: {
                spec.explicitness = Explicitness::explicit_target;
                int target_reg = ins.registers.size() >= 3
                        ? ins.registers[2]
                        : ins.registers.back();
                if (ins.method && ins.method->name != "<init>") {
                    // make*Activity(ComponentName)
                    spec.target_component = component_name_target(
                            m, ev.index, ins.registers[0], ev.bindings);
                } else {
                    spec.target_component = eval_at(m, ev.index, target_reg,
                                                    ev.bindings);
                }
                if (!have_origin) {
                    spec.origin = location(m, ev.index);
                    have_origin = true;
                }
                break;
            }
            case Event::Kind::origin_received:
                spec.forwarded_received = true;
                spec.explicitness = Explicitness::implicit;
                spec.action = StringValue::unresolved(
                        StringValue::Reason::dynamic_input);
                if (!have_origin) {
                    spec.origin = location(m, ev.index);
                    have_origin = true;
                }
                break;
            case Event::Kind::transform:
                apply_transform(spec, m, ev);
                break;
            case Event::Kind::put:
            case Event::Kind::bundle_put:
                spec.extras.push_back(fold_put(ev));
                break;
            }
        }
        if (spec.explicitness == Explicitness::explicit_target) {
            // Explicit intents match on the target; the action is inert.
            spec.action = StringValue::unresolved(
                    StringValue::Reason::unmodeled_op);
        } else {
            spec.target_component = StringValue::unresolved(
                    StringValue::Reason::unmodeled_op);
        }
        return spec;
    }

    void apply_transform(IntentSpec& spec, const SmaliMethod& m,
                         const Event& ev) {
        const auto& ins = m.instructions[ev.index];
        const auto& mr = *ins.method;
        if (mr.name == "setAction" && ins.registers.size() >= 2) {
            // Does not demote an explicit intent: the target still wins.
            spec.action = eval_at(m, ev.index, ins.registers[1], ev.bindings);
            return;
        }
        if (mr.name == "setClass" && ins.registers.size() >= 3) {
            spec.explicitness = Explicitness::explicit_target;
            spec.target_component =
                    eval_at(m, ev.index, ins.registers[2], ev.bindings);
            return;
        }
        if (mr.name == "setClassName" && ins.registers.size() >= 3) {
            spec.explicitness = Explicitness::explicit_target;
            spec.target_component = eval_at(m, ev.index, ins.registers.back(),
                                            ev.bindings);
            return;
        }
        if (mr.name == "setComponent" && ins.registers.size() >= 2) {
            auto target = component_name_target(m, ev.index, ins.registers[1],
                                                ev.bindings);
            if (target.is_resolved()) {
                spec.explicitness = Explicitness::explicit_target;
                spec.target_component = target;
            } else {
                spec.explicitness = Explicitness::implicit;
            }
            return;
        }
        if (mr.name == "setSelector") {
            if (spec.explicitness == Explicitness::implicit) {
                spec.action = StringValue::unresolved(
                        StringValue::Reason::unmodeled_op);
            }
            return;
        }
        // setPackage narrows delivery but neither targets a component nor
        // changes the action.
    }
};

IntentSpec unresolved_spec(const SenderSite& site) {
    IntentSpec spec;
    spec.origin = site.location();
    spec.explicitness = Explicitness::implicit;
    spec.action = StringValue::unresolved(StringValue::Reason::unmodeled_op);
    spec.channel = site.api->channel;
    return spec;
}

} // namespace

std::string SenderSite::location() const {
    return cls->class_name + "." + method->sig.name + ":"
            + std::to_string(instruction_index);
}

std::vector<SenderSite> find_sender_sites(const DecodedApp& app) {
    std::vector<const SmaliClass*> classes;
    for (const auto& c : app.classes) {
        classes.push_back(&c);
    }
    std::sort(classes.begin(), classes.end(),
              [](const SmaliClass* a, const SmaliClass* b) {
                  return a->class_name < b->class_name;
              });
    std::vector<SenderSite> sites;
    for (const auto* c : classes) {
        for (const auto& m : c->methods) {
            for (std::size_t i = 0; i < m.instructions.size(); ++i) {
                const auto& ins = m.instructions[i];
                if (!ins.is_invoke() || !ins.method) {
                    continue;
                }
                if (const auto* api = match_sender(*ins.method)) {
                    sites.push_back(
                            {c, &m, static_cast<int>(i), api});
                }
            }
        }
    }
    return sites;
}

std::vector<IntentSpec> backtrace_intent(const SenderSite& site,
                                         const SourceSinkCatalog& catalog,
                                         EvalConfig cfg) {
    const auto& ins = site.method->instructions[site.instruction_index];
    bool is_static = ins.op == Opcode::invoke_static;
    int base = is_static ? 0 : 1;
    int intent_pos = base + site.api->intent_param;
    if (intent_pos >= static_cast<int>(ins.registers.size())) {
        return {unresolved_spec(site)};
    }
    Backtracer tracer(*site.cls, catalog, cfg);
    auto paths = tracer.trace(*site.method, site.instruction_index,
                              ins.registers[intent_pos], nullptr, 0);

    std::optional<int> request_code;
    if (site.api->request_code_param >= 0) {
        int rc_pos = base + site.api->request_code_param;
        if (rc_pos < static_cast<int>(ins.registers.size())) {
            auto codes = tracer.eval_int_at(*site.method,
                                            site.instruction_index,
                                            ins.registers[rc_pos], nullptr);
            if (codes.size() == 1) {
                request_code = static_cast<int>(*codes.begin());
            }
        }
    }

    std::vector<IntentSpec> specs;
    for (const auto& path : paths) {
        if (!path.found_origin) {
            continue;
        }
        auto spec = tracer.fold(path, site.api->channel);
        spec.request_code = request_code;
        if (std::find(specs.begin(), specs.end(), spec) == specs.end()) {
            specs.push_back(std::move(spec));
        }
    }
    if (specs.empty()) {
        auto spec = unresolved_spec(site);
        spec.request_code = request_code;
        return {spec};
    }
    return specs;
}

namespace {
std::string receiver_class_of(const SmaliClass& cls, const SmaliMethod& m,
                              int call_idx, int reg);
void collect_filter_actions(const SmaliClass& cls, const SmaliMethod& m,
                            int call_idx, int reg, EvalConfig cfg,
                            std::set<std::string>& actions);
} // namespace

std::vector<IntentFilterDecl> find_dynamic_receivers(const DecodedApp& app,
                                                     EvalConfig cfg) {
    std::vector<IntentFilterDecl> out;
    std::vector<const SmaliClass*> classes;
    for (const auto& c : app.classes) {
        classes.push_back(&c);
    }
    std::sort(classes.begin(), classes.end(),
              [](const SmaliClass* a, const SmaliClass* b) {
                  return a->class_name < b->class_name;
              });
    for (const auto* c : classes) {
        for (const auto& m : c->methods) {
            for (std::size_t i = 0; i < m.instructions.size(); ++i) {
                const auto& ins = m.instructions[i];
                if (!ins.is_invoke() || !ins.method
                    || ins.method->name != "registerReceiver"
                    || ins.method->params.size() < 2
                    || ins.method->params[1] != kFilterOwner
                    || ins.registers.size() < 3) {
                    continue;
                }
                IntentFilterDecl decl;
                decl.dynamic = DynamicRegistration{
                        receiver_class_of(*c, m, static_cast<int>(i),
                                          ins.registers[1]),
                        m.sig.name, static_cast<int>(i)};
                collect_filter_actions(*c, m, static_cast<int>(i),
                                       ins.registers[2], cfg, decl.actions);
                if (decl.actions.empty()) {
                    decl.actions.insert(unresolved_sentinel);
                }
                out.push_back(std::move(decl));
            }
        }
    }
    return out;
}

namespace {

// Resolves the receiver argument of registerReceiver to a class name.
std::string receiver_class_of(const SmaliClass& cls, const SmaliMethod& m,
                              int call_idx, int reg) {
    for (int k = call_idx - 1; k >= 0; --k) {
        const auto& ins = m.instructions[k];
        if (ins.op == Opcode::move_object && ins.registers[0] == reg) {
            reg = ins.registers[1];
            continue;
        }
        if (ins.op == Opcode::new_instance && ins.registers[0] == reg) {
            return descriptor_to_dotted(ins.literal);
        }
        if (ins.op == Opcode::iget_object && ins.registers[0] == reg
            && ins.field) {
            return descriptor_to_dotted(ins.field->type);
        }
    }
    if (!m.is_static && reg == m.param_register_base()) {
        return cls.class_name; // `this` registered as its own receiver
    }
    return unresolved_sentinel;
}

// IntentFilter construction: <init>(String) plus addAction(String) calls.
void collect_filter_actions(const SmaliClass& cls, const SmaliMethod& m,
                            int call_idx, int reg, EvalConfig cfg,
                            std::set<std::string>& actions) {
    StringEvaluator ev(cls, m, cfg);
    auto add = [&](int idx, int str_reg) {
        auto v = ev.eval(idx, str_reg);
        if (v.is_resolved()) {
            actions.insert(v.candidates().begin(), v.candidates().end());
        } else {
            actions.insert(unresolved_sentinel);
        }
    };
    for (int k = call_idx - 1; k >= 0; --k) {
        const auto& ins = m.instructions[k];
        if (ins.op == Opcode::move_object && ins.registers[0] == reg) {
            reg = ins.registers[1];
            continue;
        }
        if ((ins.op == Opcode::invoke_virtual
             || ins.op == Opcode::invoke_direct)
            && ins.method && ins.method->owner == kFilterOwner
            && !ins.registers.empty() && ins.registers[0] == reg) {
            if (ins.method->name == "addAction"
                && ins.registers.size() >= 2) {
                add(k, ins.registers[1]);
            } else if (ins.method->name == "<init>") {
                if (!ins.method->params.empty()
                    && ins.registers.size() >= 2) {
                    add(k, ins.registers[1]);
                }
                return;
            }
        }
    }
}

} // namespace

std::vector<ResultChannelDecl>
extract_result_channels(const DecodedApp& app, const SourceSinkCatalog& catalog,
                        EvalConfig cfg) {
    std::vector<ResultChannelDecl> out;
    std::vector<const SmaliClass*> classes;
    for (const auto& c : app.classes) {
        classes.push_back(&c);
    }
    std::sort(classes.begin(), classes.end(),
              [](const SmaliClass* a, const SmaliClass* b) {
                  return a->class_name < b->class_name;
              });
    for (const auto* c : classes) {
        for (const auto& m : c->methods) {
            if (m.sig.name == "onActivityResult") {
                ResultChannelDecl decl;
                decl.kind = ResultChannelDecl::Kind::on_activity_result;
                decl.component = c->class_name;
                StringEvaluator ev(*c, m, cfg);
                for (std::size_t i = 0; i < m.instructions.size(); ++i) {
                    const auto& ins = m.instructions[i];
                    if (!ins.is_invoke() || !ins.method) {
                        continue;
                    }
                    auto sig = canonical_get_signature(*ins.method);
                    if (!sig || ins.registers.size() < 2) {
                        continue;
                    }
                    ExtraGet get;
                    get.get_signature = *sig;
                    get.key = ev.eval(static_cast<int>(i), ins.registers[1]);
                    decl.gets.push_back(std::move(get));
                }
                if (!decl.gets.empty()) {
                    out.push_back(std::move(decl));
                }
                continue;
            }
            if (m.sig.name == "onServiceConnected") {
                ResultChannelDecl decl;
                decl.kind = ResultChannelDecl::Kind::on_service_connected;
                decl.component = c->class_name;
                out.push_back(std::move(decl));
                continue;
            }
            for (std::size_t i = 0; i < m.instructions.size(); ++i) {
                const auto& ins = m.instructions[i];
                if (!ins.is_invoke() || !ins.method
                    || ins.method->name != "setResult") {
                    continue;
                }
                ResultChannelDecl decl;
                decl.kind = ResultChannelDecl::Kind::set_result;
                decl.component = c->class_name;
                if (ins.method->params.size() == 2
                    && ins.method->params[1] == kIntentOwner
                    && ins.registers.size() >= 3) {
                    Backtracer tracer(*c, catalog, cfg);
                    auto paths = tracer.trace(m, static_cast<int>(i),
                                              ins.registers[2], nullptr, 0);
                    for (const auto& path : paths) {
                        if (!path.found_origin) {
                            continue;
                        }
                        auto spec = tracer.fold(
                                path, Channel::activity_for_result);
                        if (spec.forwarded_received) {
                            decl.forwarded = true;
                        } else {
                            decl.intents.push_back(std::move(spec));
                        }
                    }
                }
                out.push_back(std::move(decl));
            }
        }
    }
    return out;
}

AppExtraction extract_app(const DecodedApp& app,
                          const SourceSinkCatalog& catalog, EvalConfig cfg) {
    AppExtraction result;
    result.package_name = app.package_name;
    for (const auto& site : find_sender_sites(app)) {
        SenderExtraction entry;
        entry.site = site;
        entry.specs = backtrace_intent(site, catalog, cfg);
        result.senders.push_back(std::move(entry));
    }
    result.dynamic_filters = find_dynamic_receivers(app, cfg);
    result.result_channels = extract_result_channels(app, catalog, cfg);
    return result;
}

} // namespace intentscan
