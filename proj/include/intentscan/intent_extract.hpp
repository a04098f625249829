#ifndef INTENTSCAN_INTENT_EXTRACT_HPP
#define INTENTSCAN_INTENT_EXTRACT_HPP

#include "intentscan/app_model.hpp"
#include "intentscan/catalogs.hpp"
#include "intentscan/smali.hpp"
#include "intentscan/string_eval.hpp"

#include <optional>
#include <string>
#include <vector>

namespace intentscan {

struct SenderSite {
    const SmaliClass* cls = nullptr;
    const SmaliMethod* method = nullptr;
    int instruction_index = 0;
    const SenderApi* api = nullptr;

    std::string location() const;
};

enum class Explicitness { explicit_target, implicit };

struct ExtraPut {
    StringValue key = StringValue::unresolved(
            StringValue::Reason::unmodeled_op);
    ValueDescriptor value;
    std::string put_signature;

    bool operator==(const ExtraPut&) const = default;
};

// The reconstructed intent at one sender call site. Explicit intents carry
// the target component, implicit ones the action; never both.
struct IntentSpec {
    std::string origin; // "Class.method:index" of the construction
    Explicitness explicitness = Explicitness::implicit;
    StringValue target_component =
            StringValue::unresolved(StringValue::Reason::unmodeled_op);
    StringValue action =
            StringValue::unresolved(StringValue::Reason::unmodeled_op);
    std::vector<ExtraPut> extras;
    Channel channel = Channel::activity;
    std::optional<int> request_code;
    bool forwarded_received = false; // built from the intent this component
                                     // itself received

    bool operator==(const IntentSpec&) const = default;
};

struct ExtraGet {
    std::string get_signature;
    StringValue key = StringValue::unresolved(
            StringValue::Reason::unmodeled_op);

    bool operator==(const ExtraGet&) const = default;
};

// Callback-based back-channels: results returned to the caller of
// startActivityForResult, and service connections.
struct ResultChannelDecl {
    enum class Kind { set_result, on_activity_result, on_service_connected };

    Kind kind = Kind::set_result;
    std::string component; // declaring class, dotted
    bool forwarded = false;            // set_result(code, getIntent())
    std::vector<IntentSpec> intents;   // set_result with a fresh intent
    std::vector<ExtraGet> gets;        // extras read in onActivityResult
};

struct SenderExtraction {
    SenderSite site;
    std::vector<IntentSpec> specs; // one per reaching constructor
};

struct AppExtraction {
    std::string package_name;
    std::vector<SenderExtraction> senders;
    std::vector<IntentFilterDecl> dynamic_filters;
    std::vector<ResultChannelDecl> result_channels;
};

// Every invoke of a sender-catalog method, exactly once, ordered by
// (class, method, instruction index).
std::vector<SenderSite> find_sender_sites(const DecodedApp& app);

// Backward slice from the sender call to the intent construction(s):
// intra-procedural plus same-class direct callees one level deep. Each
// reaching constructor yields one spec; extras, action and target are
// folded forward in program order, a later explicit transformation
// overriding earlier targeting. When no construction is reachable the
// site degrades to a single fully-unresolved spec.
std::vector<IntentSpec> backtrace_intent(const SenderSite& site,
                                         const SourceSinkCatalog& catalog,
                                         EvalConfig cfg = {});

std::vector<IntentFilterDecl> find_dynamic_receivers(const DecodedApp& app,
                                                     EvalConfig cfg = {});

std::vector<ResultChannelDecl>
extract_result_channels(const DecodedApp& app, const SourceSinkCatalog& catalog,
                        EvalConfig cfg = {});

AppExtraction extract_app(const DecodedApp& app,
                          const SourceSinkCatalog& catalog,
                          EvalConfig cfg = {});

} // namespace intentscan

#endif
