#include "intentscan/taint.hpp"

#include <algorithm>
#include <deque>

namespace intentscan {

TaintTag TaintTag::direct(std::string api, std::string location) {
    TaintTag t;
    t.kind = Kind::direct_source;
    t.api = std::move(api);
    t.location = std::move(location);
    return t;
}

TaintTag TaintTag::extra(std::string get_signature, std::string key,
                         std::string location) {
    TaintTag t;
    t.kind = Kind::get_extra;
    t.get_signature = std::move(get_signature);
    t.key = std::move(key);
    t.location = std::move(location);
    return t;
}

namespace {

using Tags = std::set<TaintTag>;

void merge(Tags& into, const Tags& from) {
    into.insert(from.begin(), from.end());
}

} // namespace

struct ClassTaint::Impl {
    const SmaliClass& cls;
    const SourceSinkCatalog& catalog;
    TaintOptions options;

    // in_states[m][i] = register -> tags before instruction i of method m.
    std::map<const SmaliMethod*, std::vector<std::map<int, Tags>>> in_states;
    std::map<const SmaliMethod*, Tags> returns;
    std::map<FieldRef, Tags> fields;
    std::vector<SinkHit> hits;

    Impl(const SmaliClass& c, const SourceSinkCatalog& cat, TaintOptions opt)
        : cls(c), catalog(cat), options(std::move(opt)) {
        // Fields and same-class call returns feed back into callers, so
        // iterate whole-class passes until both stabilize.
        for (int round = 0; round < 16; ++round) {
            auto fields_before = fields;
            auto returns_before = returns;
            hits.clear();
            for (const auto& m : cls.methods) {
                analyze(m);
            }
            if (fields == fields_before && returns == returns_before) {
                break;
            }
        }
        std::sort(hits.begin(), hits.end());
        hits.erase(std::unique(hits.begin(), hits.end()), hits.end());
    }

    std::string location(const SmaliMethod& m, int idx) const {
        return cls.class_name + "." + m.sig.name + ":" + std::to_string(idx);
    }

    Tags key_tags(const SmaliMethod& m, int idx, const std::string& get_sig) {
        // Resolve the key argument with the string evaluator; multiple
        // candidates become one tag each so later key matching stays exact.
        const auto& ins = m.instructions[idx];
        Tags out;
        std::string loc = location(m, idx);
        if (ins.registers.size() >= 2) {
            StringEvaluator ev(cls, m, options.eval);
            auto key = ev.eval(idx, ins.registers[1]);
            if (key.is_resolved()) {
                for (const auto& k : key.candidates()) {
                    out.insert(TaintTag::extra(get_sig, k, loc));
                }
                return out;
            }
        }
        out.insert(TaintTag::extra(get_sig, unresolved_sentinel, loc));
        return out;
    }

    void analyze(const SmaliMethod& m) {
        int n = static_cast<int>(m.instructions.size());
        auto& in = in_states[&m];
        in.assign(n, {});
        if (n == 0) {
            return;
        }
        if (auto it = options.param_seeds.find(m.sig.name);
            it != options.param_seeds.end()) {
            in[0] = it->second;
        }
        std::deque<int> work{0};
        std::set<int> queued{0};
        std::set<int> visited;
        // Worklist over instruction indices; states join monotonically.
        while (!work.empty()) {
            int i = work.front();
            work.pop_front();
            queued.erase(i);
            visited.insert(i);
            auto state = in[i];
            state.erase(-1); // result slot is valid for one instruction only
            Tags result = transfer(m, i, state, in[i]);
            for (int s : m.successors(i)) {
                if (s >= n) {
                    continue;
                }
                bool changed = false;
                for (const auto& [reg, tags] : state) {
                    auto& dst = in[s][reg];
                    auto before = dst.size();
                    merge(dst, tags);
                    changed |= dst.size() != before;
                }
                // move-result reads the call made in its predecessor.
                if (m.instructions[s].op == Opcode::move_result
                    || m.instructions[s].op == Opcode::move_result_object) {
                    auto& dst = in[s][-1]; // slot -1 carries call results
                    auto before = dst.size();
                    merge(dst, result);
                    changed |= dst.size() != before;
                }
                if ((changed || !visited.count(s)) && !queued.count(s)) {
                    queued.insert(s);
                    work.push_back(s);
                }
            }
        }
    }

    // Applies instruction i to `state` in place; returns tags of the call
    // result when i is an invoke.
    Tags transfer(const SmaliMethod& m, int i, std::map<int, Tags>& state,
                  const std::map<int, Tags>& frozen_in) {
        const auto& ins = m.instructions[i];
        auto tags_of = [&](int reg) -> Tags {
            auto it = state.find(reg);
            return it == state.end() ? Tags{} : it->second;
        };
        switch (ins.op) {
        case Opcode::const_string:
        case Opcode::const_class:
        case Opcode::const_int:
        case Opcode::new_instance:
            state[ins.registers[0]].clear();
            return {};
        case Opcode::move:
        case Opcode::move_object:
            state[ins.registers[0]] = tags_of(ins.registers[1]);
            return {};
        case Opcode::move_result:
        case Opcode::move_result_object: {
            auto it = frozen_in.find(-1);
            state[ins.registers[0]] =
                    it == frozen_in.end() ? Tags{} : it->second;
            return {};
        }
        case Opcode::iget_object:
        case Opcode::sget_object:
            state[ins.registers[0]] = ins.field ? fields[*ins.field] : Tags{};
            return {};
        case Opcode::iput_object:
        case Opcode::sput_object:
            if (ins.field) {
                merge(fields[*ins.field], tags_of(ins.registers[0]));
            }
            return {};
        case Opcode::return_value:
        case Opcode::return_object:
            merge(returns[&m], tags_of(ins.registers[0]));
            return {};
        case Opcode::invoke_direct:
        case Opcode::invoke_virtual:
        case Opcode::invoke_static:
        case Opcode::invoke_interface:
        case Opcode::invoke_super:
            return transfer_invoke(m, i, state, tags_of);
        default:
            return {};
        }
    }

    template <typename TagsOf>
    Tags transfer_invoke(const SmaliMethod& m, int i,
                         std::map<int, Tags>& state, TagsOf tags_of) {
        const auto& ins = m.instructions[i];
        const auto& mr = *ins.method;
        bool is_static = ins.op == Opcode::invoke_static;

        Tags arg_tags;
        for (std::size_t a = is_static ? 0 : 1; a < ins.registers.size();
             ++a) {
            merge(arg_tags, tags_of(ins.registers[a]));
        }
        Tags all_tags = arg_tags;
        if (!is_static && !ins.registers.empty()) {
            merge(all_tags, tags_of(ins.registers[0]));
        }

        std::string sig = api_signature(mr);
        if (catalog.sink_category(sig) && !arg_tags.empty()) {
            hits.push_back({mr, location(m, i), arg_tags});
        }

        if (catalog.source_category(sig)) {
            return {TaintTag::direct(sig, location(m, i))};
        }
        if (auto get_sig = canonical_get_signature(mr)) {
            return key_tags(m, i, *get_sig);
        }
        if (mr.name == "<init>" && !ins.registers.empty() && !is_static) {
            // A constructor given tainted data taints the new object.
            merge(state[ins.registers[0]], arg_tags);
            return {};
        }
        Tags result = all_tags;
        if (mr.owner == dotted_to_descriptor(cls.class_name)) {
            // Same-class call: also surface what the callee returns.
            for (const auto& callee : cls.methods) {
                if (callee.sig.name == mr.name
                    && callee.sig.params == mr.params) {
                    merge(result, returns[&callee]);
                }
            }
        }
        return result;
    }
};

ClassTaint::ClassTaint(const SmaliClass& cls, const SourceSinkCatalog& catalog,
                       TaintOptions options)
    : impl_(std::make_unique<Impl>(cls, catalog, std::move(options))) {}

ClassTaint::~ClassTaint() = default;

std::set<TaintTag> ClassTaint::tags_before(const SmaliMethod& method,
                                           int index, int reg) const {
    auto it = impl_->in_states.find(&method);
    if (it == impl_->in_states.end() || index < 0
        || index >= static_cast<int>(it->second.size())) {
        return {};
    }
    auto rit = it->second[index].find(reg);
    return rit == it->second[index].end() ? std::set<TaintTag>{}
                                          : rit->second;
}

std::set<TaintTag> ClassTaint::return_tags(const SmaliMethod& method) const {
    auto it = impl_->returns.find(&method);
    return it == impl_->returns.end() ? std::set<TaintTag>{} : it->second;
}

const std::vector<SinkHit>& ClassTaint::sink_hits() const {
    return impl_->hits;
}

} // namespace intentscan
