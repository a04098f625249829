#ifndef INTENTSCAN_STRING_EVAL_HPP
#define INTENTSCAN_STRING_EVAL_HPP

#include "intentscan/smali.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

namespace intentscan {

/// Result of string partial evaluation: either a finite candidate set or an
/// explicit unresolved marker carrying the reason.
class StringValue {
public:
    enum class Reason { dynamic_input, unmodeled_op, budget_exceeded };

    static constexpr std::size_t default_cap = 16;

    static StringValue of(std::string s);
    // Caps the candidate set: overflow converts to unresolved(budget_exceeded),
    // never silent truncation. An empty set is rejected.
    static StringValue resolved(std::set<std::string> candidates,
                                std::size_t cap = default_cap);
    static StringValue unresolved(Reason reason);

    bool is_resolved() const { return resolved_; }
    const std::set<std::string>& candidates() const;
    Reason reason() const;

    // Union of two values; any unresolved side wins (absorption).
    static StringValue join(const StringValue& a, const StringValue& b,
                            std::size_t cap = default_cap);

    bool operator==(const StringValue&) const = default;
    auto operator<=>(const StringValue&) const = default;

private:
    bool resolved_ = false;
    std::set<std::string> candidates_;
    Reason reason_ = Reason::unmodeled_op;
};

std::string to_string(StringValue::Reason reason);

/// Finite model of a list: known slots plus a completeness flag. Incomplete
/// lists answer unresolved for every index.
struct ListModel {
    std::map<int, StringValue> slots;
    bool complete = true;

    int append_index() const; // next slot for an append-style add
};

/// Applies one modeled string operation element-wise over the candidate
/// Cartesian product. Throws UnmodeledOp for operations outside the set.
/// Numeric arguments arrive as decimal-rendered candidates.
StringValue model_string_op(const std::string& op_name,
                            const StringValue& receiver,
                            const std::vector<StringValue>& args,
                            std::size_t cap = StringValue::default_cap);

StringValue eval_list_get(const ListModel& list, int index);
StringValue eval_list_get(const ListModel& list, const StringValue& index);

struct EvalConfig {
    std::size_t cap = StringValue::default_cap;
};

/// Backward partial evaluator over one method: walks definitions through
/// moves, constants, modeled string/builder/list APIs and same-class field
/// stores; joins at control-flow merges union candidates.
class StringEvaluator {
public:
    StringEvaluator(const SmaliClass& cls, const SmaliMethod& method,
                    EvalConfig config = {},
                    std::map<int, StringValue> param_bindings = {});
    ~StringEvaluator();

    StringEvaluator(const StringEvaluator&) = delete;
    StringEvaluator& operator=(const StringEvaluator&) = delete;

    // Value of `reg` as consumed by the instruction at `instruction_index`.
    StringValue eval(int instruction_index, int reg);
    // Integer view of the same walk (const literals, moves, joins).
    std::set<std::int64_t> eval_int(int instruction_index, int reg);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

StringValue eval_string(const SmaliClass& cls, const SmaliMethod& method,
                        int instruction_index, int reg, EvalConfig cfg = {});

} // namespace intentscan

#endif
