#ifndef INTENTSCAN_CATALOGS_HPP
#define INTENTSCAN_CATALOGS_HPP

#include "intentscan/smali.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace intentscan {

// Sentinel recorded in summary rows wherever partial evaluation could not
// pin a string down; matching against it is flagged low-confidence.
inline constexpr const char* unresolved_sentinel = "⟂UNRESOLVED⟂";

enum class Channel {
    activity,
    activity_for_result,
    broadcast,
    service_start,
    service_bind,
};

std::string to_string(Channel channel);
std::optional<Channel> channel_from_string(const std::string& s);

// ---------------------------------------------------------------------------
// Sender API catalog
// ---------------------------------------------------------------------------

struct SenderApi {
    std::string name;
    std::vector<std::string> params; // type descriptors
    Channel channel;
    int intent_param;       // position of the Intent argument in params
    int request_code_param; // -1 when the variant takes no request code
};

// The 25 framework methods that hand an intent to another component:
// 12 activity starters, 11 broadcast senders, startService, bindService.
const std::vector<SenderApi>& sender_api_catalog();

// Catalog lookup by name and exact parameter shape; owners are ignored
// because sender methods are inherited into application classes.
const SenderApi* match_sender(const MethodRef& method);

// ---------------------------------------------------------------------------
// Value descriptors
// ---------------------------------------------------------------------------

struct ValueDescriptor {
    enum class Kind { constant, source_call, get_extra_ref, opaque };

    Kind kind = Kind::opaque;
    std::string detail;        // constant text / source API / code location
    std::string get_signature; // get_extra_ref only
    std::string ref_key;       // get_extra_ref only; sentinel if unresolved

    static ValueDescriptor constant(std::string text);
    static ValueDescriptor source_call(std::string api);
    static ValueDescriptor get_extra_ref(std::string get_signature,
                                         std::string key);
    static ValueDescriptor opaque(std::string location);

    // Single-string rendering used on the wire: get_extra_ref packs the
    // signature and key as "sig(key)"; other kinds pass detail through.
    std::string wire_detail() const;
    static ValueDescriptor from_wire(Kind kind, const std::string& detail);

    bool operator==(const ValueDescriptor&) const = default;
    auto operator<=>(const ValueDescriptor&) const = default;
};

std::string to_string(ValueDescriptor::Kind kind);
std::optional<ValueDescriptor::Kind>
value_kind_from_string(const std::string& s);

// ---------------------------------------------------------------------------
// Source / sink catalog
// ---------------------------------------------------------------------------

// API signatures are "Owner.method" with the simple class name, e.g.
// "TelephonyManager.getDeviceId".
std::string api_signature(const MethodRef& method);

class SourceSinkCatalog {
public:
    // Built-in defaults covering the common device-identifier, location,
    // SMS, logging and network APIs.
    static SourceSinkCatalog defaults();
    // Plain-text file: one "source <signature> <category>" or
    // "sink <signature> <category>" per line; '#' comments.
    static SourceSinkCatalog load(const std::filesystem::path& path);

    std::optional<std::string> source_category(const std::string& sig) const;
    std::optional<std::string> sink_category(const std::string& sig) const;
    bool is_source(const MethodRef& m) const;
    bool is_sink(const MethodRef& m) const;

    const std::map<std::string, std::string>& sources() const {
        return sources_;
    }
    const std::map<std::string, std::string>& sinks() const { return sinks_; }

    void add_source(const std::string& sig, const std::string& category);
    void add_sink(const std::string& sig, const std::string& category);

private:
    std::map<std::string, std::string> sources_;
    std::map<std::string, std::string> sinks_;
};

// ---------------------------------------------------------------------------
// Put / get signatures and their compatibility
// ---------------------------------------------------------------------------

// Canonical put signature for a put-family invoke, e.g.
// "putExtra(String,String)" or "Bundle.putInt(String,int)".
// Empty optional when the method is not a recognized put.
std::optional<std::string> canonical_put_signature(const MethodRef& method);

// Canonical get signature, e.g. "getStringExtra" or "Bundle.getString".
// Empty optional when the method is not a recognized extra getter.
std::optional<std::string> canonical_get_signature(const MethodRef& method);

class GetPutCompatTable {
public:
    // Built-in table pairing all 42 get methods with the puts whose stored
    // value type equals the get's return type, across both the Intent and
    // Bundle containers.
    static GetPutCompatTable defaults();
    // Plain-text file: "<get signature> <put signature>..." per line.
    static GetPutCompatTable load(const std::filesystem::path& path);

    // Throws UnknownGetSignature when get_sig is not in the table.
    bool compatible(const std::string& get_sig,
                    const std::string& put_sig) const;
    bool knows_get(const std::string& get_sig) const;

    const std::map<std::string, std::set<std::string>>& mapping() const {
        return mapping_;
    }

private:
    std::map<std::string, std::set<std::string>> mapping_;
};

} // namespace intentscan

#endif
