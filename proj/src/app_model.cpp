#include "intentscan/app_model.hpp"

#include "intentscan/errors.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <algorithm>
#include <iostream>

namespace intentscan {

namespace pt = boost::property_tree;

std::string to_string(ComponentKind kind) {
    switch (kind) {
    case ComponentKind::activity: return "activity";
    case ComponentKind::service: return "service";
    case ComponentKind::broadcast_receiver: return "broadcast_receiver";
    case ComponentKind::content_provider: return "content_provider";
    }
    return "?";
}

std::string qualify_component_name(const std::string& package,
                                   const std::string& name) {
    if (name.empty()) {
        return name;
    }
    if (name.front() == '.') {
        return package + name;
    }
    if (name.find('.') == std::string::npos) {
        return package + "." + name;
    }
    return name;
}

const ComponentDecl* DecodedApp::find_component(
        const std::string& fq_name) const {
    for (const auto& c : components) {
        if (c.name == fq_name) {
            return &c;
        }
    }
    return nullptr;
}

const SmaliClass* DecodedApp::find_class(const std::string& fq_name) const {
    for (const auto& c : classes) {
        if (c.class_name == fq_name) {
            return &c;
        }
    }
    return nullptr;
}

namespace {

std::optional<ComponentKind> component_kind_for_element(
        const std::string& element) {
    if (element == "activity") {
        return ComponentKind::activity;
    }
    if (element == "service") {
        return ComponentKind::service;
    }
    if (element == "receiver") {
        return ComponentKind::broadcast_receiver;
    }
    if (element == "provider") {
        return ComponentKind::content_provider;
    }
    return std::nullopt;
}

std::string attr(const pt::ptree& node, const std::string& name) {
    auto attrs = node.get_child_optional("<xmlattr>");
    if (!attrs) {
        return "";
    }
    // Decoded manifests use the android: prefix; accept bare names too.
    auto v = attrs->get_optional<std::string>(name);
    if (!v) {
        auto colon = name.find(':');
        if (colon != std::string::npos) {
            v = attrs->get_optional<std::string>(name.substr(colon + 1));
        }
    }
    return v ? *v : "";
}

IntentFilterDecl parse_filter(const pt::ptree& node) {
    IntentFilterDecl filter;
    for (const auto& [key, child] : node) {
        if (key == "action") {
            auto a = attr(child, "android:name");
            if (!a.empty()) {
                filter.actions.insert(a);
            }
        } else if (key == "category") {
            auto c = attr(child, "android:name");
            if (!c.empty()) {
                filter.categories.insert(c);
            }
        }
        // <data> elements are retained nowhere: parsed but not matched on.
    }
    return filter;
}

void collect_components(const pt::ptree& node, const std::string& package,
                        ParsedManifest& out) {
    for (const auto& [key, child] : node) {
        if (key == "<xmlattr>" || key == "<xmlcomment>") {
            continue;
        }
        auto kind = component_kind_for_element(key);
        if (kind) {
            ComponentDecl decl;
            decl.kind = *kind;
            decl.name = qualify_component_name(package,
                                               attr(child, "android:name"));
            auto exported = attr(child, "android:exported");
            decl.exported = exported == "true";
            for (const auto& [ck, cc] : child) {
                if (ck == "intent-filter") {
                    decl.filters.push_back(parse_filter(cc));
                } else if (ck != "<xmlattr>") {
                    decl.raw_attributes.emplace(ck, attr(cc, "android:name"));
                }
            }
            auto dup = std::find_if(
                    out.components.begin(), out.components.end(),
                    [&](const ComponentDecl& c) {
                        return c.name == decl.name && c.kind == decl.kind;
                    });
            if (dup != out.components.end()) {
                out.warnings.push_back("duplicate component " + decl.name);
                for (auto& f : decl.filters) {
                    dup->filters.push_back(std::move(f));
                }
            } else {
                out.components.push_back(std::move(decl));
            }
        } else if (key == "activity-alias" || key == "provider-alias") {
            out.warnings.push_back("unknown component kind: " + key);
        } else {
            collect_components(child, package, out);
        }
    }
}

} // namespace

ParsedManifest parse_manifest(const std::filesystem::path& path) {
    pt::ptree tree;
    try {
        pt::read_xml(path.string(), tree,
                     pt::xml_parser::trim_whitespace
                             | pt::xml_parser::no_comments);
    } catch (const pt::xml_parser_error& e) {
        throw MalformedManifest(e.what());
    }
    auto manifest = tree.get_child_optional("manifest");
    if (!manifest) {
        throw MalformedManifest(path.string() + ": no <manifest> root");
    }
    ParsedManifest out;
    out.package_name = attr(*manifest, "package");
    if (out.package_name.empty()) {
        throw MalformedManifest(path.string() + ": missing package attribute");
    }
    collect_components(*manifest, out.package_name, out);
    return out;
}

DecodedApp load_app(const std::filesystem::path& dir) {
    auto manifest_path = dir / "AndroidManifest.xml";
    if (!std::filesystem::exists(manifest_path)) {
        throw MissingManifest("no AndroidManifest.xml under " + dir.string());
    }
    auto smali_root = dir / "smali";
    if (!std::filesystem::is_directory(smali_root)) {
        throw MissingSmaliTree("no smali/ subtree under " + dir.string());
    }

    DecodedApp app;
    app.source_dir = dir;
    auto manifest = parse_manifest(manifest_path);
    app.package_name = manifest.package_name;
    app.components = std::move(manifest.components);
    app.warnings = std::move(manifest.warnings);

    std::vector<std::filesystem::path> files;
    for (const auto& entry :
         std::filesystem::recursive_directory_iterator(smali_root)) {
        if (entry.is_regular_file() && entry.path().extension() == ".smali") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        try {
            app.classes.push_back(parse_smali_class(f));
        } catch (const MalformedSmali& e) {
            app.warnings.push_back(std::string("skipped class: ") + e.what());
            std::cerr << "warning: " << e.what() << "\n";
        }
    }
    return app;
}

} // namespace intentscan
