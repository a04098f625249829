#ifndef INTENTSCAN_INTENT_DB_HPP
#define INTENTSCAN_INTENT_DB_HPP

#include "intentscan/app_model.hpp"
#include "intentscan/catalogs.hpp"
#include "intentscan/intent_extract.hpp"

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace intentscan {

inline constexpr int intent_db_schema_version = 1;

struct Provenance {
    enum class Kind { extracted, fixpoint_derived };

    Kind kind = Kind::extracted;
    // Derived rows: [receiver row id, sender row id] that produced them.
    std::vector<int> from_ids;

    bool operator==(const Provenance&) const = default;
    auto operator<=>(const Provenance&) const = default;
};

// One summary row: a receiver capability (intent_filter), a send
// (target_component xor intent_action, plus key/value/put_signature),
// or both combined on the same component.
struct IntentSummaryRow {
    int id = -1;
    std::string package_name;
    std::string class_name;
    std::optional<std::string> intent_filter;
    std::optional<std::string> target_component;
    std::optional<std::string> intent_action;
    std::optional<std::string> key;
    std::optional<ValueDescriptor> value;
    std::optional<std::string> put_signature;
    Channel channel = Channel::activity;
    Provenance provenance;

    bool is_sender() const {
        return target_component.has_value() || intent_action.has_value();
    }
    bool is_receiver() const { return intent_filter.has_value(); }

    // Identity used for set semantics: every field except the id and the
    // derived-from ids (two derivations of the same fact are one row).
    auto dedup_tuple() const {
        return std::tie(package_name, class_name, intent_filter,
                        target_component, intent_action, key, value,
                        put_signature, channel, provenance.kind);
    }
};

struct IntentDb {
    std::vector<IntentSummaryRow> rows;
    int next_id = 1;

    const IntentSummaryRow* find_row(int id) const;
};

// Receiver-side view used for matching: a component and the filter actions
// it answers to.
struct ReceiverRef {
    std::string package;
    std::string class_name; // fully qualified
    ComponentKind kind = ComponentKind::activity;
    std::set<std::string> filter_actions;
};

struct MatchedSender {
    const IntentSummaryRow* row = nullptr;
    bool low_confidence = false; // matched through the unresolved sentinel
};

// Replaces any prior rows of the app's package (and derived rows built on
// them), then inserts sender and receiver rows for the extraction. Returns
// the number of rows added.
int insert_app_summaries(IntentDb& db, const DecodedApp& app,
                         const AppExtraction& extraction);

// Sender rows that can reach the receiver: explicit rows targeting its
// class, implicit rows whose action one of its filters accepts, and
// sentinel-action rows (flagged low-confidence). Channel compatibility is
// enforced against the receiver's component kind.
std::vector<MatchedSender> match_senders(const IntentDb& db,
                                         const ReceiverRef& receiver);

// Rebuilds the receiver view of a component from its rows in the DB.
ReceiverRef receiver_ref_for(const IntentDb& db, const std::string& package,
                             const std::string& class_name);

// Resolves transitive flows: every row whose value is a get-extra
// reference is joined against matching senders (same key, compatible put
// signature); each hit adds a copy of the row carrying the sender's value
// with fixpoint_derived provenance. Originals are retained. Runs to a
// fixed point; returns the number of rows added.
int fixpoint_resolve(IntentDb& db, const GetPutCompatTable& compat);

// Line-oriented JSON records, schema-versioned, canonically sorted so two
// saves of the same DB are byte-identical.
void save_db(const IntentDb& db, const std::filesystem::path& path);
IntentDb load_db(const std::filesystem::path& path);

} // namespace intentscan

#endif
