#ifndef INTENTSCAN_TAINT_HPP
#define INTENTSCAN_TAINT_HPP

#include "intentscan/catalogs.hpp"
#include "intentscan/smali.hpp"
#include "intentscan/string_eval.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace intentscan {

// Provenance of a tainted value: either a direct sensitive-source call or
// the result of reading an intent/bundle extra.
struct TaintTag {
    enum class Kind { direct_source, get_extra };

    Kind kind = Kind::direct_source;
    std::string api;           // source API signature (direct_source)
    std::string get_signature; // canonical get signature (get_extra)
    std::string key;           // extra key; sentinel when unresolved
    std::string location;      // "Class.method:index" of the origin

    static TaintTag direct(std::string api, std::string location);
    static TaintTag extra(std::string get_signature, std::string key,
                          std::string location);

    bool operator==(const TaintTag&) const = default;
    auto operator<=>(const TaintTag&) const = default;
};

struct SinkHit {
    MethodRef sink;
    std::string location; // "Class.method:index" of the sink call
    std::set<TaintTag> tags;

    auto operator<=>(const SinkHit&) const = default;
};

struct TaintOptions {
    EvalConfig eval;
    // Extra taint seeded on parameter registers, keyed by method name.
    // Used for callback parameters carrying data from another component.
    std::map<std::string, std::map<int, std::set<TaintTag>>> param_seeds;
};

/// Forward taint over one class: seeds at cataloged source calls and
/// extra-getter results, propagates through moves, arbitrary call results,
/// constructor arguments and same-class fields (to a class-level fixpoint),
/// and records every cataloged sink reached. Constants kill strongly;
/// everything else is conservative.
class ClassTaint {
public:
    ClassTaint(const SmaliClass& cls, const SourceSinkCatalog& catalog,
               TaintOptions options = {});
    ~ClassTaint();

    ClassTaint(const ClassTaint&) = delete;
    ClassTaint& operator=(const ClassTaint&) = delete;

    // Tags on `reg` as consumed by the instruction at `index`.
    std::set<TaintTag> tags_before(const SmaliMethod& method, int index,
                                   int reg) const;
    std::set<TaintTag> return_tags(const SmaliMethod& method) const;
    // All sink calls reached by tainted data, in (method, index) order.
    const std::vector<SinkHit>& sink_hits() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace intentscan

#endif
