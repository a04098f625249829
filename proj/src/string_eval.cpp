#include "intentscan/string_eval.hpp"

#include "intentscan/errors.hpp"

#include <algorithm>
#include <cassert>
#include <functional>
#include <optional>

namespace intentscan {

StringValue StringValue::of(std::string s) {
    StringValue v;
    v.resolved_ = true;
    v.candidates_.insert(std::move(s));
    return v;
}

StringValue StringValue::resolved(std::set<std::string> candidates,
                                  std::size_t cap) {
    if (candidates.empty()) {
        return unresolved(Reason::unmodeled_op);
    }
    if (candidates.size() > cap) {
        return unresolved(Reason::budget_exceeded);
    }
    StringValue v;
    v.resolved_ = true;
    v.candidates_ = std::move(candidates);
    return v;
}

StringValue StringValue::unresolved(Reason reason) {
    StringValue v;
    v.resolved_ = false;
    v.reason_ = reason;
    return v;
}

const std::set<std::string>& StringValue::candidates() const {
    assert(resolved_);
    return candidates_;
}

StringValue::Reason StringValue::reason() const {
    assert(!resolved_);
    return reason_;
}

StringValue StringValue::join(const StringValue& a, const StringValue& b,
                              std::size_t cap) {
    if (!a.is_resolved() || !b.is_resolved()) {
        // Commutative: when both sides are unresolved the more telling
        // reason wins (dynamic_input before unmodeled_op before budget).
        if (a.is_resolved()) {
            return b;
        }
        if (b.is_resolved()) {
            return a;
        }
        return unresolved(std::min(a.reason(), b.reason()));
    }
    std::set<std::string> all = a.candidates();
    all.insert(b.candidates().begin(), b.candidates().end());
    return resolved(std::move(all), cap);
}

std::string to_string(StringValue::Reason reason) {
    switch (reason) {
    case StringValue::Reason::dynamic_input: return "dynamic_input";
    case StringValue::Reason::unmodeled_op: return "unmodeled_op";
    case StringValue::Reason::budget_exceeded: return "budget_exceeded";
    }
    return "?";
}

int ListModel::append_index() const {
    return slots.empty() ? 0 : slots.rbegin()->first + 1;
}

namespace {

using Reason = StringValue::Reason;

std::optional<long long> parse_int(const std::string& s) {
    try {
        std::size_t pos = 0;
        long long v = std::stoll(s, &pos, 10);
        if (pos != s.size()) {
            return std::nullopt;
        }
        return v;
    } catch (...) {
        return std::nullopt;
    }
}

// Applies `fn` over the Cartesian product of all operand candidate sets.
// fn returns nullopt to signal a concretely failing case (e.g. substring
// out of range); any such case makes the whole result unresolved.
StringValue map_product(const std::vector<StringValue>& operands,
                        std::size_t cap,
                        const std::function<std::optional<std::string>(
                                const std::vector<std::string>&)>& fn) {
    for (const auto& op : operands) {
        if (!op.is_resolved()) {
            return StringValue::unresolved(op.reason());
        }
    }
    std::set<std::string> out;
    std::vector<std::string> tuple(operands.size());
    std::function<bool(std::size_t)> rec = [&](std::size_t i) {
        if (i == operands.size()) {
            auto r = fn(tuple);
            if (!r) {
                return false;
            }
            out.insert(std::move(*r));
            return out.size() <= cap;
        }
        for (const auto& c : operands[i].candidates()) {
            tuple[i] = c;
            if (!rec(i + 1)) {
                return false;
            }
        }
        return true;
    };
    if (!rec(0)) {
        return out.size() > cap
                ? StringValue::unresolved(Reason::budget_exceeded)
                : StringValue::unresolved(Reason::unmodeled_op);
    }
    return StringValue::resolved(std::move(out), cap);
}

std::optional<std::string> apply_format(const std::string& pattern,
                                        const std::vector<std::string>& args) {
    std::string out;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < pattern.size(); ++i) {
        if (pattern[i] != '%') {
            out.push_back(pattern[i]);
            continue;
        }
        if (i + 1 >= pattern.size()) {
            return std::nullopt;
        }
        char c = pattern[++i];
        if (c == '%') {
            out.push_back('%');
        } else if (c == 's' || c == 'd') {
            if (arg >= args.size()) {
                return std::nullopt;
            }
            out += args[arg++];
        } else {
            return std::nullopt; // only %s/%d are modeled
        }
    }
    return out;
}

} // namespace

StringValue model_string_op(const std::string& op_name,
                            const StringValue& receiver,
                            const std::vector<StringValue>& args,
                            std::size_t cap) {
    std::vector<StringValue> operands;
    operands.push_back(receiver);
    operands.insert(operands.end(), args.begin(), args.end());

    if (op_name == "concat" || op_name == "+" || op_name == "append") {
        return map_product(operands, cap,
                           [](const auto& t) -> std::optional<std::string> {
                               return t.at(0) + t.at(1);
                           });
    }
    if (op_name == "toString" || op_name == "valueOf") {
        // valueOf's operand arrives in receiver position when static.
        return map_product({operands.at(0)}, cap,
                           [](const auto& t) { return t.at(0); });
    }
    if (op_name == "substring") {
        return map_product(operands, cap,
                           [&](const auto& t) -> std::optional<std::string> {
                               auto begin = parse_int(t.at(1));
                               if (!begin || *begin < 0
                                   || static_cast<std::size_t>(*begin)
                                           > t.at(0).size()) {
                                   return std::nullopt;
                               }
                               if (t.size() == 2) {
                                   return t.at(0).substr(*begin);
                               }
                               auto end = parse_int(t.at(2));
                               if (!end || *end < *begin
                                   || static_cast<std::size_t>(*end)
                                           > t.at(0).size()) {
                                   return std::nullopt;
                               }
                               return t.at(0).substr(*begin, *end - *begin);
                           });
    }
    if (op_name == "toLowerCase" || op_name == "toUpperCase") {
        bool lower = op_name == "toLowerCase";
        return map_product({receiver}, cap,
                           [lower](const auto& t) -> std::optional<std::string> {
                               std::string s = t.at(0);
                               std::transform(
                                       s.begin(), s.end(), s.begin(),
                                       [lower](unsigned char c) {
                                           return lower ? std::tolower(c)
                                                        : std::toupper(c);
                                       });
                               return s;
                           });
    }
    if (op_name == "trim") {
        return map_product({receiver}, cap,
                           [](const auto& t) -> std::optional<std::string> {
                               const std::string& s = t.at(0);
                               auto b = s.find_first_not_of(" \t\r\n");
                               if (b == std::string::npos) {
                                   return std::string();
                               }
                               auto e = s.find_last_not_of(" \t\r\n");
                               return s.substr(b, e - b + 1);
                           });
    }
    if (op_name == "replace") {
        return map_product(operands, cap,
                           [](const auto& t) -> std::optional<std::string> {
                               const std::string& from = t.at(1);
                               if (from.empty()) {
                                   return std::nullopt;
                               }
                               std::string s = t.at(0);
                               std::size_t pos = 0;
                               while ((pos = s.find(from, pos))
                                      != std::string::npos) {
                                   s.replace(pos, from.size(), t.at(2));
                                   pos += t.at(2).size();
                               }
                               return s;
                           });
    }
    if (op_name == "format") {
        return map_product(operands, cap,
                           [](const auto& t) -> std::optional<std::string> {
                               return apply_format(
                                       t.at(0),
                                       {t.begin() + 1, t.end()});
                           });
    }
    throw UnmodeledOp("string operation not modeled: " + op_name);
}

StringValue eval_list_get(const ListModel& list, int index) {
    if (!list.complete) {
        return StringValue::unresolved(Reason::unmodeled_op);
    }
    auto it = list.slots.find(index);
    if (it != list.slots.end()) {
        return it->second;
    }
    return StringValue::unresolved(Reason::unmodeled_op);
}

StringValue eval_list_get(const ListModel& list, const StringValue& index) {
    if (!index.is_resolved() || index.candidates().size() != 1) {
        return StringValue::unresolved(Reason::unmodeled_op);
    }
    auto i = parse_int(*index.candidates().begin());
    if (!i) {
        return StringValue::unresolved(Reason::unmodeled_op);
    }
    return eval_list_get(list, static_cast<int>(*i));
}

// ---------------------------------------------------------------------------
// Backward evaluator
// ---------------------------------------------------------------------------

namespace {

struct AValue {
    enum class Kind { bottom, str, builder, list, ints, unknown };
    Kind kind = Kind::bottom;
    StringValue sv = StringValue::unresolved(Reason::unmodeled_op);
    ListModel list;
    std::set<std::int64_t> ints;
    Reason reason = Reason::unmodeled_op;

    static AValue bottom() { return AValue{}; }
    static AValue unknown(Reason r) {
        AValue v;
        v.kind = Kind::unknown;
        v.reason = r;
        return v;
    }
    static AValue str(StringValue s) {
        AValue v;
        v.kind = s.is_resolved() ? Kind::str : Kind::unknown;
        if (s.is_resolved()) {
            v.sv = std::move(s);
        } else {
            v.reason = s.reason();
        }
        return v;
    }
    static AValue builder(StringValue content) {
        if (!content.is_resolved()) {
            return unknown(content.reason());
        }
        AValue v;
        v.kind = Kind::builder;
        v.sv = std::move(content);
        return v;
    }
    static AValue of_list(ListModel l) {
        AValue v;
        v.kind = Kind::list;
        v.list = std::move(l);
        return v;
    }
    static AValue of_ints(std::set<std::int64_t> is) {
        AValue v;
        v.kind = Kind::ints;
        v.ints = std::move(is);
        return v;
    }

    StringValue as_string() const {
        switch (kind) {
        case Kind::str:
        case Kind::builder:
            return sv;
        case Kind::ints: {
            if (ints.empty()) {
                return StringValue::unresolved(Reason::unmodeled_op);
            }
            std::set<std::string> out;
            for (auto i : ints) {
                out.insert(std::to_string(i));
            }
            return StringValue::resolved(std::move(out));
        }
        case Kind::unknown:
            return StringValue::unresolved(reason);
        default:
            return StringValue::unresolved(Reason::unmodeled_op);
        }
    }
};

AValue join(const AValue& a, const AValue& b, std::size_t cap) {
    if (a.kind == AValue::Kind::bottom) {
        return b;
    }
    if (b.kind == AValue::Kind::bottom) {
        return a;
    }
    if (a.kind == AValue::Kind::unknown) {
        return a;
    }
    if (b.kind == AValue::Kind::unknown) {
        return b;
    }
    if (a.kind != b.kind) {
        return AValue::unknown(Reason::unmodeled_op);
    }
    switch (a.kind) {
    case AValue::Kind::str:
        return AValue::str(StringValue::join(a.sv, b.sv, cap));
    case AValue::Kind::builder:
        return AValue::builder(StringValue::join(a.sv, b.sv, cap));
    case AValue::Kind::ints: {
        auto is = a.ints;
        is.insert(b.ints.begin(), b.ints.end());
        if (is.size() > cap) {
            return AValue::unknown(Reason::budget_exceeded);
        }
        return AValue::of_ints(std::move(is));
    }
    case AValue::Kind::list: {
        ListModel out;
        out.complete = a.list.complete && b.list.complete
                && a.list.slots.size() == b.list.slots.size();
        for (const auto& [idx, v] : a.list.slots) {
            auto it = b.list.slots.find(idx);
            if (it != b.list.slots.end()) {
                out.slots.emplace(idx, StringValue::join(v, it->second, cap));
            } else {
                out.complete = false;
            }
        }
        return AValue::of_list(std::move(out));
    }
    default:
        return AValue::unknown(Reason::unmodeled_op);
    }
}

bool is_string_owner(const MethodRef& m) {
    return m.owner == "Ljava/lang/String;";
}

bool is_builder_owner(const MethodRef& m) {
    return m.owner == "Ljava/lang/StringBuilder;"
            || m.owner == "Ljava/lang/StringBuffer;";
}

bool is_list_owner(const MethodRef& m) {
    return m.owner == "Ljava/util/LinkedList;"
            || m.owner == "Ljava/util/ArrayList;"
            || m.owner == "Ljava/util/List;";
}

// APIs whose results depend on runtime input; distinguished from merely
// unmodeled operations when reporting why a string stays unresolved.
bool is_dynamic_input_api(const MethodRef& m) {
    static const std::set<std::string> owners = {
            "Ljava/io/BufferedReader;", "Ljava/util/Scanner;",
            "Ljava/io/Console;",        "Landroid/widget/EditText;",
            "Landroid/content/SharedPreferences;",
    };
    if (owners.count(m.owner)) {
        return true;
    }
    if (m.owner == "Ljava/lang/System;" && m.name == "getenv") {
        return true;
    }
    return m.name == "readLine" || m.name == "nextLine"
            || m.name == "getText";
}

} // namespace

struct StringEvaluator::Impl {
    const SmaliClass& cls;
    const SmaliMethod& root;
    EvalConfig cfg;
    std::map<int, StringValue> param_bindings;

    struct MethodCtx {
        const SmaliMethod* m = nullptr;
        std::vector<int> leader;               // leader index per instruction
        std::map<int, std::vector<int>> preds; // leader -> pred instr indices
    };
    std::map<const SmaliMethod*, MethodCtx> contexts;

    using Key = std::tuple<const SmaliMethod*, int, int>;
    std::map<Key, AValue> memo;
    std::set<Key> in_progress;

    Impl(const SmaliClass& c, const SmaliMethod& m, EvalConfig cf,
         std::map<int, StringValue> bindings)
        : cls(c), root(m), cfg(cf), param_bindings(std::move(bindings)) {}

    MethodCtx& context(const SmaliMethod& m) {
        auto it = contexts.find(&m);
        if (it != contexts.end()) {
            return it->second;
        }
        MethodCtx ctx;
        ctx.m = &m;
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
        ctx.leader.resize(n, 0);
        int cur = 0;
        for (int i = 0; i < n; ++i) {
            if (leaders.count(i)) {
                cur = i;
            }
            ctx.leader[i] = cur;
        }
        for (int i = 0; i < n; ++i) {
            for (int s : m.successors(i)) {
                if (leaders.count(s)) {
                    ctx.preds[s].push_back(i);
                } // fallthrough into the same block is not a join point
            }
        }
        return contexts.emplace(&m, std::move(ctx)).first->second;
    }

    // Value of `reg` before executing instruction `j` of `m`.
    AValue value_before(const SmaliMethod& m, int j, int reg) {
        Key key{&m, j, reg};
        auto it = memo.find(key);
        if (it != memo.end()) {
            return it->second;
        }
        if (in_progress.count(key)) {
            return AValue::bottom(); // loop back-edge: no extra contribution
        }
        in_progress.insert(key);
        AValue result = compute_before(m, j, reg);
        in_progress.erase(key);
        memo[key] = result;
        return result;
    }

    AValue compute_before(const SmaliMethod& m, int j, int reg) {
        auto& ctx = context(m);
        int n = static_cast<int>(m.instructions.size());
        int lead = (j >= n) ? (n == 0 ? 0 : ctx.leader[n - 1])
                            : ctx.leader[j];
        for (int k = j - 1; k >= lead; --k) {
            auto v = value_after_instruction(m, k, reg);
            if (v) {
                return *v;
            }
        }
        if (lead == 0) {
            return entry_value(m, reg);
        }
        auto pit = ctx.preds.find(lead);
        if (pit == ctx.preds.end()) {
            return AValue::unknown(Reason::unmodeled_op); // unreachable block
        }
        AValue out = AValue::bottom();
        for (int p : pit->second) {
            auto v = value_after_instruction(m, p, reg);
            out = join(out, v ? *v : value_before(m, p, reg), cfg.cap);
        }
        if (out.kind == AValue::Kind::bottom) {
            return AValue::unknown(Reason::unmodeled_op);
        }
        return out;
    }

    AValue entry_value(const SmaliMethod& m, int reg) {
        if (reg >= m.param_register_base()) {
            if (&m == &root) {
                auto it = param_bindings.find(reg);
                if (it != param_bindings.end()) {
                    return AValue::str(it->second);
                }
            }
            return AValue::unknown(Reason::dynamic_input);
        }
        return AValue::unknown(Reason::unmodeled_op);
    }

    // Effect of instruction k on `reg`: nullopt when it neither defines nor
    // mutates it (the backward scan keeps going).
    std::optional<AValue> value_after_instruction(const SmaliMethod& m, int k,
                                                  int reg) {
        const auto& ins = m.instructions[k];
        bool defines = !ins.registers.empty() && ins.registers[0] == reg;
        switch (ins.op) {
        case Opcode::const_string:
            if (defines) {
                return AValue::str(StringValue::of(ins.literal));
            }
            return std::nullopt;
        case Opcode::const_class:
            if (defines) {
                return AValue::str(
                        StringValue::of(descriptor_to_dotted(ins.literal)));
            }
            return std::nullopt;
        case Opcode::const_int:
            if (defines) {
                return AValue::of_ints({*ins.int_value});
            }
            return std::nullopt;
        case Opcode::move:
        case Opcode::move_object:
            if (defines) {
                return value_before(m, k, ins.registers[1]);
            }
            return std::nullopt;
        case Opcode::move_result:
        case Opcode::move_result_object:
            if (defines) {
                if (k == 0 || !m.instructions[k - 1].is_invoke()) {
                    return AValue::unknown(Reason::unmodeled_op);
                }
                return invoke_result(m, k - 1);
            }
            return std::nullopt;
        case Opcode::new_instance:
            if (defines) {
                // Reached only when the object escapes uninitialized.
                return AValue::unknown(Reason::unmodeled_op);
            }
            return std::nullopt;
        case Opcode::iget_object:
        case Opcode::sget_object:
            if (defines) {
                return field_value(*ins.field);
            }
            return std::nullopt;
        case Opcode::invoke_direct:
        case Opcode::invoke_virtual:
        case Opcode::invoke_interface:
        case Opcode::invoke_super:
            if (!ins.registers.empty() && ins.registers[0] == reg) {
                return mutation_effect(m, k, reg);
            }
            return std::nullopt;
        default:
            return std::nullopt;
        }
    }

    // Receiver-position invoke on `reg`: models in-place StringBuilder and
    // list mutations. Java strings are immutable, so calls on a string
    // receiver are transparent.
    std::optional<AValue> mutation_effect(const SmaliMethod& m, int k,
                                          int reg) {
        const auto& ins = m.instructions[k];
        const auto& mr = *ins.method;
        if (is_builder_owner(mr)) {
            if (mr.name == "<init>") {
                if (mr.params.empty()) {
                    return AValue::builder(StringValue::of(""));
                }
                if (mr.params.size() == 1) {
                    return AValue::builder(
                            arg_string(m, k, 1).as_string());
                }
                return AValue::unknown(Reason::unmodeled_op);
            }
            if (mr.name == "append" && ins.registers.size() >= 2) {
                auto content = value_before(m, k, reg);
                if (content.kind == AValue::Kind::bottom) {
                    return content;
                }
                if (content.kind != AValue::Kind::builder) {
                    return AValue::unknown(
                            content.kind == AValue::Kind::unknown
                                    ? content.reason
                                    : Reason::unmodeled_op);
                }
                auto piece = arg_string(m, k, 1).as_string();
                return AValue::builder(model_string_op(
                        "concat", content.sv, {piece}, cfg.cap));
            }
            return AValue::unknown(Reason::unmodeled_op);
        }
        if (is_list_owner(mr)) {
            if (mr.name == "<init>" && mr.params.empty()) {
                return AValue::of_list(ListModel{});
            }
            if (mr.name == "add" && mr.params.size() == 1) {
                auto lv = value_before(m, k, reg);
                if (lv.kind == AValue::Kind::bottom) {
                    return lv;
                }
                if (lv.kind != AValue::Kind::list) {
                    return AValue::unknown(Reason::unmodeled_op);
                }
                auto elem = arg_string(m, k, 1).as_string();
                ListModel out = lv.list;
                if (out.complete) {
                    out.slots.emplace(out.append_index(), std::move(elem));
                }
                return AValue::of_list(std::move(out));
            }
            if (mr.name == "set" && mr.params.size() == 2) {
                auto lv = value_before(m, k, reg);
                if (lv.kind != AValue::Kind::list) {
                    return AValue::unknown(Reason::unmodeled_op);
                }
                auto idx = arg_ints(m, k, 1);
                ListModel out = lv.list;
                if (idx.size() == 1) {
                    out.slots[static_cast<int>(*idx.begin())] =
                            arg_string(m, k, 2).as_string();
                } else {
                    out.complete = false;
                }
                return AValue::of_list(std::move(out));
            }
            // Positional add, remove, clear, ... lose slot tracking.
            ListModel out;
            out.complete = false;
            return AValue::of_list(std::move(out));
        }
        if (mr.name == "<init>") {
            return AValue::unknown(Reason::unmodeled_op);
        }
        return std::nullopt;
    }

    AValue arg_string(const SmaliMethod& m, int invoke_idx, int arg_pos) {
        const auto& ins = m.instructions[invoke_idx];
        if (arg_pos >= static_cast<int>(ins.registers.size())) {
            return AValue::unknown(Reason::unmodeled_op);
        }
        return value_before(m, invoke_idx, ins.registers[arg_pos]);
    }

    std::set<std::int64_t> arg_ints(const SmaliMethod& m, int invoke_idx,
                                    int arg_pos) {
        auto v = arg_string(m, invoke_idx, arg_pos);
        return v.kind == AValue::Kind::ints ? v.ints
                                            : std::set<std::int64_t>{};
    }

    AValue invoke_result(const SmaliMethod& m, int k) {
        const auto& ins = m.instructions[k];
        const auto& mr = *ins.method;
        bool is_static = ins.op == Opcode::invoke_static;
        int arg_base = is_static ? 0 : 1;

        auto operand_as_string = [&](int pos,
                                     const std::string& desc) -> StringValue {
            auto v = arg_string(m, k, pos);
            if (desc == "C" && v.kind == AValue::Kind::ints) {
                std::set<std::string> out;
                for (auto i : v.ints) {
                    out.insert(std::string(1, static_cast<char>(i)));
                }
                return StringValue::resolved(std::move(out), cfg.cap);
            }
            return v.as_string();
        };

        if (is_string_owner(mr)) {
            if (mr.name == "valueOf" && is_static && mr.params.size() == 1) {
                return AValue::str(operand_as_string(0, mr.params[0]));
            }
            static const std::set<std::string> modeled = {
                    "concat",      "substring", "toLowerCase",
                    "toUpperCase", "trim",      "replace",
                    "toString",    "intern",
            };
            if (!modeled.count(mr.name)) {
                return AValue::unknown(Reason::unmodeled_op);
            }
            auto recv = arg_string(m, k, 0).as_string();
            if (mr.name == "toString" || mr.name == "intern") {
                return AValue::str(recv);
            }
            if ((mr.name == "toLowerCase" || mr.name == "toUpperCase")
                && !mr.params.empty()) {
                // Locale argument is irrelevant for our candidates.
                return AValue::str(model_string_op(mr.name, recv, {},
                                                   cfg.cap));
            }
            std::vector<StringValue> args;
            for (std::size_t p = 0; p < mr.params.size(); ++p) {
                args.push_back(operand_as_string(arg_base + static_cast<int>(p),
                                                 mr.params[p]));
            }
            try {
                return AValue::str(
                        model_string_op(mr.name, recv, args, cfg.cap));
            } catch (const UnmodeledOp&) {
                return AValue::unknown(Reason::unmodeled_op);
            }
        }
        if (is_builder_owner(mr)) {
            if (mr.name == "toString") {
                auto recv = arg_string(m, k, 0);
                if (recv.kind == AValue::Kind::builder) {
                    return AValue::str(recv.sv);
                }
                return AValue::unknown(recv.kind == AValue::Kind::unknown
                                               ? recv.reason
                                               : Reason::unmodeled_op);
            }
            if (mr.name == "append") {
                // Result aliases the receiver after the append.
                auto after = mutation_effect(m, k + 0, ins.registers[0]);
                return after ? *after
                             : AValue::unknown(Reason::unmodeled_op);
            }
            return AValue::unknown(Reason::unmodeled_op);
        }
        if (is_list_owner(mr) && mr.name == "get" && mr.params.size() == 1) {
            auto recv = arg_string(m, k, 0);
            if (recv.kind != AValue::Kind::list) {
                return AValue::unknown(Reason::unmodeled_op);
            }
            auto idx = arg_ints(m, k, 1);
            if (idx.size() != 1) {
                return AValue::str(StringValue::unresolved(
                        Reason::unmodeled_op));
            }
            if (!recv.list.complete
                && !recv.list.slots.count(static_cast<int>(*idx.begin()))) {
                return AValue::str(StringValue::unresolved(
                        Reason::unmodeled_op));
            }
            return AValue::str(eval_list_get(
                    recv.list, static_cast<int>(*idx.begin())));
        }
        if (is_dynamic_input_api(mr)) {
            return AValue::unknown(Reason::dynamic_input);
        }
        if (mr.name == "toString" && mr.params.empty()
            && !ins.registers.empty()) {
            // Unmodeled owners: toString preserves a string-ish operand and
            // propagates why an unknown one is unknown.
            auto recv = arg_string(m, k, 0);
            if (recv.kind == AValue::Kind::str
                || recv.kind == AValue::Kind::builder) {
                return AValue::str(recv.sv);
            }
            if (recv.kind == AValue::Kind::unknown) {
                return AValue::unknown(recv.reason);
            }
        }
        return AValue::unknown(Reason::unmodeled_op);
    }

    AValue field_value(const FieldRef& field) {
        // Same-class stores only; one shared memo guards against cycles.
        std::string owner_desc = dotted_to_descriptor(cls.class_name);
        if (field.owner != owner_desc) {
            return AValue::unknown(Reason::unmodeled_op);
        }
        AValue out = AValue::bottom();
        for (const auto& m2 : cls.methods) {
            for (std::size_t k = 0; k < m2.instructions.size(); ++k) {
                const auto& ins = m2.instructions[k];
                if ((ins.op == Opcode::iput_object
                     || ins.op == Opcode::sput_object)
                    && ins.field && *ins.field == field) {
                    out = join(out,
                               value_before(m2, static_cast<int>(k),
                                            ins.registers[0]),
                               cfg.cap);
                }
            }
        }
        if (out.kind == AValue::Kind::bottom) {
            return AValue::unknown(Reason::unmodeled_op);
        }
        return out;
    }
};

StringEvaluator::StringEvaluator(const SmaliClass& cls,
                                 const SmaliMethod& method, EvalConfig config,
                                 std::map<int, StringValue> param_bindings)
    : impl_(std::make_unique<Impl>(cls, method, config,
                                   std::move(param_bindings))) {}

StringEvaluator::~StringEvaluator() = default;

StringValue StringEvaluator::eval(int instruction_index, int reg) {
    return impl_->value_before(impl_->root, instruction_index, reg)
            .as_string();
}

std::set<std::int64_t> StringEvaluator::eval_int(int instruction_index,
                                                 int reg) {
    auto v = impl_->value_before(impl_->root, instruction_index, reg);
    return v.kind == AValue::Kind::ints ? v.ints : std::set<std::int64_t>{};
}

StringValue eval_string(const SmaliClass& cls, const SmaliMethod& method,
                        int instruction_index, int reg, EvalConfig cfg) {
    StringEvaluator ev(cls, method, cfg);
    return ev.eval(instruction_index, reg);
}

} // namespace intentscan
