#include "intentscan/catalogs.hpp"

#include "intentscan/errors.hpp"

#include <fstream>
#include <sstream>

namespace intentscan {

std::string to_string(Channel channel) {
    switch (channel) {
    case Channel::activity: return "activity";
    case Channel::activity_for_result: return "activity_for_result";
    case Channel::broadcast: return "broadcast";
    case Channel::service_start: return "service_start";
    case Channel::service_bind: return "service_bind";
    }
    return "?";
}

std::optional<Channel> channel_from_string(const std::string& s) {
    if (s == "activity") return Channel::activity;
    if (s == "activity_for_result") return Channel::activity_for_result;
    if (s == "broadcast") return Channel::broadcast;
    if (s == "service_start") return Channel::service_start;
    if (s == "service_bind") return Channel::service_bind;
    return std::nullopt;
}

namespace {

const std::string kIntent = "Landroid/content/Intent;";
const std::string kIntentArr = "[Landroid/content/Intent;";
const std::string kBundle = "Landroid/os/Bundle;";
const std::string kString = "Ljava/lang/String;";
const std::string kUser = "Landroid/os/UserHandle;";
const std::string kReceiver = "Landroid/content/BroadcastReceiver;";
const std::string kHandler = "Landroid/os/Handler;";
const std::string kConn = "Landroid/content/ServiceConnection;";
const std::string kActivity = "Landroid/app/Activity;";
const std::string kFragment = "Landroid/app/Fragment;";

} // namespace

const std::vector<SenderApi>& sender_api_catalog() {
    static const std::vector<SenderApi> catalog = {
            // Activity starters.
            {"startActivity", {kIntent}, Channel::activity, 0, -1},
            {"startActivity", {kIntent, kBundle}, Channel::activity, 0, -1},
            {"startActivities", {kIntentArr}, Channel::activity, 0, -1},
            {"startActivities",
             {kIntentArr, kBundle},
             Channel::activity,
             0,
             -1},
            {"startActivityForResult",
             {kIntent, "I"},
             Channel::activity_for_result,
             0,
             1},
            {"startActivityForResult",
             {kIntent, "I", kBundle},
             Channel::activity_for_result,
             0,
             1},
            {"startActivityFromChild",
             {kActivity, kIntent, "I"},
             Channel::activity_for_result,
             1,
             2},
            {"startActivityFromChild",
             {kActivity, kIntent, "I", kBundle},
             Channel::activity_for_result,
             1,
             2},
            {"startActivityFromFragment",
             {kFragment, kIntent, "I"},
             Channel::activity_for_result,
             1,
             2},
            {"startActivityFromFragment",
             {kFragment, kIntent, "I", kBundle},
             Channel::activity_for_result,
             1,
             2},
            {"startActivityIfNeeded", {kIntent, "I"}, Channel::activity, 0, 1},
            {"startNextMatchingActivity", {kIntent}, Channel::activity, 0, -1},
            // Broadcast senders.
            {"sendBroadcast", {kIntent}, Channel::broadcast, 0, -1},
            {"sendBroadcast", {kIntent, kString}, Channel::broadcast, 0, -1},
            {"sendBroadcastAsUser",
             {kIntent, kUser},
             Channel::broadcast,
             0,
             -1},
            {"sendBroadcastAsUser",
             {kIntent, kUser, kString},
             Channel::broadcast,
             0,
             -1},
            {"sendOrderedBroadcast",
             {kIntent, kString},
             Channel::broadcast,
             0,
             -1},
            {"sendOrderedBroadcast",
             {kIntent, kString, kReceiver, kHandler, "I", kString, kBundle},
             Channel::broadcast,
             0,
             -1},
            {"sendOrderedBroadcastAsUser",
             {kIntent, kUser, kString, kReceiver, kHandler, "I", kString,
              kBundle},
             Channel::broadcast,
             0,
             -1},
            {"sendStickyBroadcast", {kIntent}, Channel::broadcast, 0, -1},
            {"sendStickyBroadcastAsUser",
             {kIntent, kUser},
             Channel::broadcast,
             0,
             -1},
            {"sendStickyOrderedBroadcast",
             {kIntent, kReceiver, kHandler, "I", kString, kBundle},
             Channel::broadcast,
             0,
             -1},
            {"sendStickyOrderedBroadcastAsUser",
             {kIntent, kUser, kReceiver, kHandler, "I", kString, kBundle},
             Channel::broadcast,
             0,
             -1},
            // Services.
            {"startService", {kIntent}, Channel::service_start, 0, -1},
            {"bindService",
             {kIntent, kConn, "I"},
             Channel::service_bind,
             0,
             -1},
    };
    return catalog;
}

const SenderApi* match_sender(const MethodRef& method) {
    for (const auto& api : sender_api_catalog()) {
        if (api.name == method.name && api.params == method.params) {
            return &api;
        }
    }
    return nullptr;
}

// ---------------------------------------------------------------------------
// ValueDescriptor
// ---------------------------------------------------------------------------

ValueDescriptor ValueDescriptor::constant(std::string text) {
    ValueDescriptor v;
    v.kind = Kind::constant;
    v.detail = std::move(text);
    return v;
}

ValueDescriptor ValueDescriptor::source_call(std::string api) {
    ValueDescriptor v;
    v.kind = Kind::source_call;
    v.detail = std::move(api);
    return v;
}

ValueDescriptor ValueDescriptor::get_extra_ref(std::string get_signature,
                                               std::string key) {
    ValueDescriptor v;
    v.kind = Kind::get_extra_ref;
    v.get_signature = std::move(get_signature);
    v.ref_key = std::move(key);
    return v;
}

ValueDescriptor ValueDescriptor::opaque(std::string location) {
    ValueDescriptor v;
    v.kind = Kind::opaque;
    v.detail = std::move(location);
    return v;
}

std::string ValueDescriptor::wire_detail() const {
    if (kind == Kind::get_extra_ref) {
        return get_signature + "(" + ref_key + ")";
    }
    return detail;
}

ValueDescriptor ValueDescriptor::from_wire(Kind kind,
                                           const std::string& detail) {
    if (kind != Kind::get_extra_ref) {
        ValueDescriptor v;
        v.kind = kind;
        v.detail = detail;
        return v;
    }
    auto open = detail.find('(');
    if (open == std::string::npos || detail.back() != ')') {
        throw StoreIO("malformed get_extra_ref value: " + detail);
    }
    return get_extra_ref(detail.substr(0, open),
                         detail.substr(open + 1,
                                       detail.size() - open - 2));
}

std::string to_string(ValueDescriptor::Kind kind) {
    switch (kind) {
    case ValueDescriptor::Kind::constant: return "constant";
    case ValueDescriptor::Kind::source_call: return "source_call";
    case ValueDescriptor::Kind::get_extra_ref: return "get_extra_ref";
    case ValueDescriptor::Kind::opaque: return "opaque";
    }
    return "?";
}

std::optional<ValueDescriptor::Kind>
value_kind_from_string(const std::string& s) {
    if (s == "constant") return ValueDescriptor::Kind::constant;
    if (s == "source_call") return ValueDescriptor::Kind::source_call;
    if (s == "get_extra_ref") return ValueDescriptor::Kind::get_extra_ref;
    if (s == "opaque") return ValueDescriptor::Kind::opaque;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Source / sink catalog
// ---------------------------------------------------------------------------

std::string api_signature(const MethodRef& method) {
    return method.owner_simple() + "." + method.name;
}

SourceSinkCatalog SourceSinkCatalog::defaults() {
    SourceSinkCatalog c;
    c.add_source("TelephonyManager.getDeviceId", "device_id");
    c.add_source("TelephonyManager.getSubscriberId", "device_id");
    c.add_source("TelephonyManager.getSimSerialNumber", "device_id");
    c.add_source("TelephonyManager.getDeviceSoftwareVersion", "device_id");
    c.add_source("TelephonyManager.getLine1Number", "phone_number");
    c.add_source("WifiInfo.getMacAddress", "mac_address");
    c.add_source("Settings$Secure.getString", "device_id");
    c.add_source("LocationManager.getLastKnownLocation", "location");
    c.add_source("Location.getLatitude", "location");
    c.add_source("Location.getLongitude", "location");
    c.add_source("AccountManager.getAccounts", "account");
    c.add_source("ContentResolver.query", "contacts");
    c.add_source("SmsMessage.getMessageBody", "sms_content");
    c.add_source("SmsMessage.getOriginatingAddress", "sms_content");

    c.add_sink("SmsManager.sendTextMessage", "sms_send");
    c.add_sink("SmsManager.sendDataMessage", "sms_send");
    c.add_sink("SmsManager.sendMultipartTextMessage", "sms_send");
    c.add_sink("Log.d", "log");
    c.add_sink("Log.e", "log");
    c.add_sink("Log.i", "log");
    c.add_sink("Log.v", "log");
    c.add_sink("Log.w", "log");
    c.add_sink("Log.wtf", "log");
    c.add_sink("URL.openConnection", "network");
    c.add_sink("HttpURLConnection.connect", "network");
    c.add_sink("Socket.getOutputStream", "network");
    c.add_sink("OutputStreamWriter.write", "network");
    c.add_sink("FileOutputStream.write", "file");
    c.add_sink("FileWriter.write", "file");
    return c;
}

SourceSinkCatalog SourceSinkCatalog::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw StoreIO("cannot open source/sink catalog: " + path.string());
    }
    SourceSinkCatalog c;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        std::istringstream ls(line);
        std::string kind, sig, category;
        if (!(ls >> kind)) {
            continue;
        }
        if (!(ls >> sig >> category)) {
            throw StoreIO(path.string() + ":" + std::to_string(lineno)
                          + ": expected '<source|sink> <signature> "
                            "<category>'");
        }
        if (kind == "source") {
            c.add_source(sig, category);
        } else if (kind == "sink") {
            c.add_sink(sig, category);
        } else {
            throw StoreIO(path.string() + ":" + std::to_string(lineno)
                          + ": unknown entry kind '" + kind + "'");
        }
    }
    return c;
}

std::optional<std::string>
SourceSinkCatalog::source_category(const std::string& sig) const {
    auto it = sources_.find(sig);
    if (it == sources_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::optional<std::string>
SourceSinkCatalog::sink_category(const std::string& sig) const {
    auto it = sinks_.find(sig);
    if (it == sinks_.end()) {
        return std::nullopt;
    }
    return it->second;
}

bool SourceSinkCatalog::is_source(const MethodRef& m) const {
    return sources_.count(api_signature(m)) > 0;
}

bool SourceSinkCatalog::is_sink(const MethodRef& m) const {
    return sinks_.count(api_signature(m)) > 0;
}

void SourceSinkCatalog::add_source(const std::string& sig,
                                   const std::string& category) {
    sources_[sig] = category;
}

void SourceSinkCatalog::add_sink(const std::string& sig,
                                 const std::string& category) {
    sinks_[sig] = category;
}

// ---------------------------------------------------------------------------
// Put / get signatures
// ---------------------------------------------------------------------------

namespace {

// Readable type names used inside canonical signatures.
std::optional<std::string> short_value_type(const std::string& desc) {
    static const std::map<std::string, std::string> simple = {
            {"Z", "boolean"},
            {"B", "byte"},
            {"C", "char"},
            {"S", "short"},
            {"I", "int"},
            {"J", "long"},
            {"F", "float"},
            {"D", "double"},
            {"Ljava/lang/String;", "String"},
            {"Ljava/lang/CharSequence;", "CharSequence"},
            {"Landroid/os/Bundle;", "Bundle"},
            {"Landroid/os/Parcelable;", "Parcelable"},
            {"Ljava/io/Serializable;", "Serializable"},
    };
    if (auto it = simple.find(desc); it != simple.end()) {
        return it->second;
    }
    if (desc.size() > 1 && desc[0] == '[') {
        if (auto inner = short_value_type(desc.substr(1))) {
            return *inner + "[]";
        }
    }
    return std::nullopt;
}

const std::map<std::string, std::string>& arraylist_put_extras() {
    static const std::map<std::string, std::string> m = {
            {"putStringArrayListExtra", "ArrayList<String>"},
            {"putIntegerArrayListExtra", "ArrayList<Integer>"},
            {"putCharSequenceArrayListExtra", "ArrayList<CharSequence>"},
            {"putParcelableArrayListExtra", "ArrayList<Parcelable>"},
    };
    return m;
}

const std::map<std::string, std::string>& bundle_put_types() {
    static const std::map<std::string, std::string> m = {
            {"putBoolean", "boolean"},
            {"putByte", "byte"},
            {"putChar", "char"},
            {"putShort", "short"},
            {"putInt", "int"},
            {"putLong", "long"},
            {"putFloat", "float"},
            {"putDouble", "double"},
            {"putString", "String"},
            {"putCharSequence", "CharSequence"},
            {"putBooleanArray", "boolean[]"},
            {"putByteArray", "byte[]"},
            {"putCharArray", "char[]"},
            {"putShortArray", "short[]"},
            {"putIntArray", "int[]"},
            {"putLongArray", "long[]"},
            {"putFloatArray", "float[]"},
            {"putDoubleArray", "double[]"},
            {"putStringArray", "String[]"},
            {"putCharSequenceArray", "CharSequence[]"},
            {"putStringArrayList", "ArrayList<String>"},
            {"putIntegerArrayList", "ArrayList<Integer>"},
            {"putCharSequenceArrayList", "ArrayList<CharSequence>"},
            {"putParcelable", "Parcelable"},
            {"putParcelableArray", "Parcelable[]"},
            {"putParcelableArrayList", "ArrayList<Parcelable>"},
            {"putSerializable", "Serializable"},
            {"putBundle", "Bundle"},
    };
    return m;
}

// Intent get method -> value type it reads.
const std::map<std::string, std::string>& intent_get_types() {
    static const std::map<std::string, std::string> m = {
            {"getBooleanExtra", "boolean"},
            {"getByteExtra", "byte"},
            {"getCharExtra", "char"},
            {"getShortExtra", "short"},
            {"getIntExtra", "int"},
            {"getLongExtra", "long"},
            {"getFloatExtra", "float"},
            {"getDoubleExtra", "double"},
            {"getStringExtra", "String"},
            {"getCharSequenceExtra", "CharSequence"},
            {"getBooleanArrayExtra", "boolean[]"},
            {"getByteArrayExtra", "byte[]"},
            {"getCharArrayExtra", "char[]"},
            {"getShortArrayExtra", "short[]"},
            {"getIntArrayExtra", "int[]"},
            {"getLongArrayExtra", "long[]"},
            {"getFloatArrayExtra", "float[]"},
            {"getDoubleArrayExtra", "double[]"},
            {"getStringArrayExtra", "String[]"},
            {"getCharSequenceArrayExtra", "CharSequence[]"},
            {"getBundleExtra", "Bundle"},
            {"getParcelableExtra", "Parcelable"},
            {"getParcelableArrayExtra", "Parcelable[]"},
            {"getParcelableArrayListExtra", "ArrayList<Parcelable>"},
            {"getSerializableExtra", "Serializable"},
            {"getIntegerArrayListExtra", "ArrayList<Integer>"},
            {"getStringArrayListExtra", "ArrayList<String>"},
            {"getCharSequenceArrayListExtra", "ArrayList<CharSequence>"},
    };
    return m;
}

const std::map<std::string, std::string>& bundle_get_types() {
    static const std::map<std::string, std::string> m = {
            {"getBoolean", "boolean"},
            {"getByte", "byte"},
            {"getChar", "char"},
            {"getShort", "short"},
            {"getInt", "int"},
            {"getLong", "long"},
            {"getFloat", "float"},
            {"getDouble", "double"},
            {"getString", "String"},
            {"getCharSequence", "CharSequence"},
            {"getStringArrayList", "ArrayList<String>"},
            {"getIntegerArrayList", "ArrayList<Integer>"},
            {"getParcelable", "Parcelable"},
            {"getSerializable", "Serializable"},
    };
    return m;
}

// All put signatures that store value type `t`, across Intent and Bundle.
std::set<std::string> puts_for_type(const std::string& t) {
    std::set<std::string> out;
    bool arraylist = t.rfind("ArrayList<", 0) == 0;
    if (arraylist) {
        for (const auto& [name, type] : arraylist_put_extras()) {
            if (type == t) {
                out.insert(name + "(String," + t + ")");
            }
        }
    } else {
        out.insert("putExtra(String," + t + ")");
    }
    for (const auto& [name, type] : bundle_put_types()) {
        if (type == t) {
            out.insert("Bundle." + name + "(String," + t + ")");
        }
    }
    return out;
}

} // namespace

std::optional<std::string> canonical_put_signature(const MethodRef& method) {
    if (method.owner == kIntent) {
        if (method.name == "putExtra" && method.params.size() == 2
            && method.params[0] == kString) {
            if (auto t = short_value_type(method.params[1])) {
                return "putExtra(String," + *t + ")";
            }
            return std::nullopt;
        }
        auto it = arraylist_put_extras().find(method.name);
        if (it != arraylist_put_extras().end() && method.params.size() == 2) {
            return method.name + "(String," + it->second + ")";
        }
        return std::nullopt;
    }
    if (method.owner == kBundle) {
        auto it = bundle_put_types().find(method.name);
        if (it != bundle_put_types().end() && method.params.size() == 2) {
            return "Bundle." + method.name + "(String," + it->second + ")";
        }
    }
    return std::nullopt;
}

std::optional<std::string> canonical_get_signature(const MethodRef& method) {
    if (method.owner == kIntent && intent_get_types().count(method.name)) {
        return method.name;
    }
    if (method.owner == kBundle && bundle_get_types().count(method.name)) {
        return "Bundle." + method.name;
    }
    return std::nullopt;
}

GetPutCompatTable GetPutCompatTable::defaults() {
    GetPutCompatTable t;
    for (const auto& [name, type] : intent_get_types()) {
        t.mapping_[name] = puts_for_type(type);
    }
    for (const auto& [name, type] : bundle_get_types()) {
        t.mapping_["Bundle." + name] = puts_for_type(type);
    }
    return t;
}

GetPutCompatTable GetPutCompatTable::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw StoreIO("cannot open compatibility table: " + path.string());
    }
    GetPutCompatTable t;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        std::istringstream ls(line);
        std::string get_sig;
        if (!(ls >> get_sig)) {
            continue;
        }
        auto& puts = t.mapping_[get_sig];
        std::string put_sig;
        while (ls >> put_sig) {
            puts.insert(put_sig);
        }
        if (puts.empty()) {
            throw StoreIO(path.string() + ":" + std::to_string(lineno)
                          + ": get signature without any put signature");
        }
    }
    return t;
}

bool GetPutCompatTable::compatible(const std::string& get_sig,
                                   const std::string& put_sig) const {
    auto it = mapping_.find(get_sig);
    if (it == mapping_.end()) {
        throw UnknownGetSignature("get signature not in table: " + get_sig);
    }
    return it->second.count(put_sig) > 0;
}

bool GetPutCompatTable::knows_get(const std::string& get_sig) const {
    return mapping_.count(get_sig) > 0;
}

} // namespace intentscan
