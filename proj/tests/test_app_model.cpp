#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "intentscan/app_model.hpp"
#include "intentscan/errors.hpp"

#include <filesystem>
#include <fstream>

using namespace intentscan;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;

    TempDir() {
        path = fs::temp_directory_path()
                / ("intentscan_test_" + std::to_string(::getpid()) + "_"
                   + std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }

    static int& counter() {
        static int n = 0;
        return n;
    }

    void write(const fs::path& rel, const std::string& content) const {
        fs::create_directories((path / rel).parent_path());
        std::ofstream out(path / rel);
        out << content;
    }
};

const char* kManifest = R"(<?xml version="1.0" encoding="utf-8"?>
<manifest xmlns:android="http://schemas.android.com/apk/res/android"
    package="com.example.appa">
    <application android:label="A">
        <activity android:name=".MainActivity" android:exported="true">
            <intent-filter>
                <action android:name="android.intent.action.MAIN"/>
                <category android:name="android.intent.category.LAUNCHER"/>
            </intent-filter>
            <intent-filter>
                <action android:name="com.example.ACTION_ONE"/>
                <action android:name="com.example.ACTION_TWO"/>
            </intent-filter>
        </activity>
        <service android:name="com.example.appa.Worker"/>
        <receiver android:name=".Wake">
            <intent-filter>
                <action android:name="android.intent.action.BOOT_COMPLETED"/>
            </intent-filter>
        </receiver>
        <provider android:name=".Store" android:authorities="com.example.appa"/>
    </application>
</manifest>
)";

const char* kSmali = R"(.class public Lcom/example/appa/MainActivity;
.super Landroid/app/Activity;

.method public onCreate(Landroid/os/Bundle;)V
    .locals 0
    return-void
.end method
)";

} // namespace

TEST_CASE("manifest components parse with kinds and filters") {
    TempDir dir;
    dir.write("AndroidManifest.xml", kManifest);
    auto manifest = parse_manifest(dir.path / "AndroidManifest.xml");
    CHECK(manifest.package_name == "com.example.appa");
    REQUIRE(manifest.components.size() == 4);

    const auto& activity = manifest.components[0];
    CHECK(activity.name == "com.example.appa.MainActivity");
    CHECK(activity.kind == ComponentKind::activity);
    CHECK(activity.exported);
    REQUIRE(activity.filters.size() == 2);
    CHECK(activity.filters[0].actions
          == std::set<std::string>{"android.intent.action.MAIN"});
    CHECK(activity.filters[1].actions
          == std::set<std::string>{"com.example.ACTION_ONE",
                                   "com.example.ACTION_TWO"});

    CHECK(manifest.components[1].kind == ComponentKind::service);
    CHECK(manifest.components[1].name == "com.example.appa.Worker");
    CHECK(manifest.components[2].kind == ComponentKind::broadcast_receiver);
    CHECK(manifest.components[3].kind == ComponentKind::content_provider);
}

TEST_CASE("component names qualify against the package") {
    CHECK(qualify_component_name("com.a", ".Main") == "com.a.Main");
    CHECK(qualify_component_name("com.a", "Main") == "com.a.Main");
    CHECK(qualify_component_name("com.a", "com.b.Main") == "com.b.Main");
    CHECK(qualify_component_name("com.a", "") == "");
}

TEST_CASE("load_app reads manifest plus smali tree") {
    TempDir dir;
    dir.write("AndroidManifest.xml", kManifest);
    dir.write("smali/com/example/appa/MainActivity.smali", kSmali);
    auto app = load_app(dir.path);
    CHECK(app.package_name == "com.example.appa");
    REQUIRE(app.classes.size() == 1);
    CHECK(app.classes[0].class_name == "com.example.appa.MainActivity");
    CHECK(app.find_class("com.example.appa.MainActivity") != nullptr);
    CHECK(app.find_component("com.example.appa.Worker") != nullptr);
    CHECK(app.find_component("nope") == nullptr);
}

TEST_CASE("missing pieces raise specific errors") {
    TempDir dir;
    CHECK_THROWS_AS(load_app(dir.path), MissingManifest);
    dir.write("AndroidManifest.xml", kManifest);
    CHECK_THROWS_AS(load_app(dir.path), MissingSmaliTree);
    dir.write("smali/placeholder.smali", kSmali);
    CHECK_NOTHROW(load_app(dir.path));
}

TEST_CASE("malformed manifest raises MalformedManifest") {
    TempDir dir;
    dir.write("AndroidManifest.xml", "<manifest><unclosed>");
    CHECK_THROWS_AS(parse_manifest(dir.path / "AndroidManifest.xml"),
                    MalformedManifest);
    dir.write("AndroidManifest.xml", "<?xml version=\"1.0\"?><other/>");
    CHECK_THROWS_AS(parse_manifest(dir.path / "AndroidManifest.xml"),
                    MalformedManifest);
}

TEST_CASE("duplicate components merge filters with a warning") {
    TempDir dir;
    dir.write("AndroidManifest.xml", R"(<?xml version="1.0"?>
<manifest package="com.d">
  <application>
    <activity android:name=".A">
      <intent-filter><action android:name="one"/></intent-filter>
    </activity>
    <activity android:name=".A">
      <intent-filter><action android:name="two"/></intent-filter>
    </activity>
  </application>
</manifest>
)");
    auto manifest = parse_manifest(dir.path / "AndroidManifest.xml");
    REQUIRE(manifest.components.size() == 1);
    CHECK(manifest.components[0].filters.size() == 2);
    CHECK_FALSE(manifest.warnings.empty());
}
