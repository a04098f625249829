#ifndef INTENTSCAN_APP_MODEL_HPP
#define INTENTSCAN_APP_MODEL_HPP

#include "intentscan/smali.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace intentscan {

enum class ComponentKind {
    activity,
    service,
    broadcast_receiver,
    content_provider,
};

std::string to_string(ComponentKind kind);

struct DynamicRegistration {
    std::string class_name; // receiver class the filter was attached to
    std::string method;     // registering method
    int instruction_index = 0;

    bool operator==(const DynamicRegistration&) const = default;
};

struct IntentFilterDecl {
    std::set<std::string> actions;
    std::set<std::string> categories;
    // Empty: declared in the manifest. Set: registered at runtime.
    std::optional<DynamicRegistration> dynamic;

    bool is_dynamic() const { return dynamic.has_value(); }
};

struct ComponentDecl {
    std::string name; // fully qualified class name
    ComponentKind kind = ComponentKind::activity;
    std::vector<IntentFilterDecl> filters;
    bool exported = false;
    // Attributes we parse but do not act on (data/mime filters, meta-data).
    std::map<std::string, std::string> raw_attributes;
};

struct DecodedApp {
    std::string package_name;
    std::vector<ComponentDecl> components;
    std::vector<SmaliClass> classes;
    std::filesystem::path source_dir;
    std::vector<std::string> warnings;

    const ComponentDecl* find_component(const std::string& fq_name) const;
    const SmaliClass* find_class(const std::string& fq_name) const;
};

// Qualifies a manifest component name against the package: ".Foo" and bare
// "Foo" become "<pkg>.Foo"; dotted names pass through unchanged.
std::string qualify_component_name(const std::string& package,
                                   const std::string& name);

struct ParsedManifest {
    std::string package_name;
    std::vector<ComponentDecl> components;
    std::vector<std::string> warnings;
};

ParsedManifest parse_manifest(const std::filesystem::path& path);

DecodedApp load_app(const std::filesystem::path& dir);

} // namespace intentscan

#endif
