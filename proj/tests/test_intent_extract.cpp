#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "intentscan/intent_extract.hpp"

#include <filesystem>
#include <fstream>

using namespace intentscan;
namespace fs = std::filesystem;

namespace {

struct TempApp {
    fs::path path;

    explicit TempApp(const std::string& name) {
        path = fs::temp_directory_path() / ("intentscan_extract_" + name + "_"
                                            + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path / "smali");
    }
    ~TempApp() { fs::remove_all(path); }

    void manifest(const std::string& content) const {
        std::ofstream(path / "AndroidManifest.xml") << content;
    }
    void smali(const std::string& file, const std::string& content) const {
        fs::create_directories((path / "smali" / file).parent_path());
        std::ofstream(path / "smali" / file) << content;
    }
};

const char* kPlainManifest = R"(<?xml version="1.0"?>
<manifest package="com.t">
  <application>
    <activity android:name=".Main"/>
  </application>
</manifest>
)";

DecodedApp make_app(const std::string& name, const std::string& smali,
                    const std::string& manifest = kPlainManifest) {
    TempApp dir(name);
    dir.manifest(manifest);
    dir.smali("Main.smali", smali);
    return load_app(dir.path);
}

std::string activity_class(const std::string& body) {
    return ".class public Lcom/t/Main;\n.super Landroid/app/Activity;\n"
           + body;
}

} // namespace

TEST_CASE("sender sites are found once each, in order") {
    auto app = make_app("sites", activity_class(R"(
.method public go()V
    .locals 2
    new-instance v0, Landroid/content/Intent;
    invoke-direct {v0}, Landroid/content/Intent;-><init>()V
    invoke-virtual {p0, v0}, Lcom/t/Main;->startActivity(Landroid/content/Intent;)V
    invoke-virtual {p0, v0}, Lcom/t/Main;->startService(Landroid/content/Intent;)Landroid/content/ComponentName;
    return-void
.end method
)"));
    auto sites = find_sender_sites(app);
    REQUIRE(sites.size() == 2);
    CHECK(sites[0].api->name == "startActivity");
    CHECK(sites[0].api->channel == Channel::activity);
    CHECK(sites[1].api->name == "startService");
    CHECK(sites[1].api->channel == Channel::service_start);
}

TEST_CASE("explicit intent backtrace recovers the target") {
    auto app = make_app("explicit", activity_class(R"(
.method public go()V
    .locals 2
    new-instance v0, Landroid/content/Intent;
    const-class v1, Lcom/t/Target;
    invoke-direct {v0, p0, v1}, Landroid/content/Intent;-><init>(Landroid/content/Context;Ljava/lang/Class;)V
    invoke-virtual {p0, v0}, Lcom/t/Main;->startActivity(Landroid/content/Intent;)V
    return-void
.end method
)"));
    auto sites = find_sender_sites(app);
    REQUIRE(sites.size() == 1);
    auto specs = backtrace_intent(sites[0], SourceSinkCatalog::defaults());
    REQUIRE(specs.size() == 1);
    CHECK(specs[0].explicitness == Explicitness::explicit_target);
    REQUIRE(specs[0].target_component.is_resolved());
    CHECK(specs[0].target_component.candidates()
          == std::set<std::string>{"com.t.Target"});
    CHECK_FALSE(specs[0].action.is_resolved());
}

TEST_CASE("implicit intent backtrace recovers action and extras") {
    auto app = make_app("implicit", activity_class(R"(
.method public go()V
    .locals 4
    new-instance v0, Landroid/content/Intent;
    const-string v1, "com.t.PING"
    invoke-direct {v0, v1}, Landroid/content/Intent;-><init>(Ljava/lang/String;)V
    const-string v2, "payload"
    const-string v3, "hello"
    invoke-virtual {v0, v2, v3}, Landroid/content/Intent;->putExtra(Ljava/lang/String;Ljava/lang/String;)Landroid/content/Intent;
    invoke-virtual {p0, v0}, Lcom/t/Main;->sendBroadcast(Landroid/content/Intent;)V
    return-void
.end method
)"));
    auto specs = backtrace_intent(find_sender_sites(app).at(0),
                                  SourceSinkCatalog::defaults());
    REQUIRE(specs.size() == 1);
    CHECK(specs[0].explicitness == Explicitness::implicit);
    CHECK(specs[0].action.candidates() == std::set<std::string>{"com.t.PING"});
    CHECK(specs[0].channel == Channel::broadcast);
    REQUIRE(specs[0].extras.size() == 1);
    CHECK(specs[0].extras[0].key.candidates()
          == std::set<std::string>{"payload"});
    CHECK(specs[0].extras[0].put_signature == "putExtra(String,String)");
    CHECK(specs[0].extras[0].value
          == ValueDescriptor::constant("hello"));
}

TEST_CASE("setComponent(null) downgrades an explicit intent to implicit") {
    auto app = make_app("setnull", activity_class(R"(
.method public go()V
    .locals 3
    new-instance v0, Landroid/content/Intent;
    const-string v1, "com.t.ACT"
    invoke-direct {v0, v1}, Landroid/content/Intent;-><init>(Ljava/lang/String;)V
    const-class v2, Lcom/t/Target;
    invoke-virtual {v0, p0, v2}, Landroid/content/Intent;->setClass(Landroid/content/Context;Ljava/lang/Class;)Landroid/content/Intent;
    const/4 v2, 0x0
    invoke-virtual {v0, v2}, Landroid/content/Intent;->setComponent(Landroid/content/ComponentName;)Landroid/content/Intent;
    invoke-virtual {p0, v0}, Lcom/t/Main;->startActivity(Landroid/content/Intent;)V
    return-void
.end method
)"));
    auto specs = backtrace_intent(find_sender_sites(app).at(0),
                                  SourceSinkCatalog::defaults());
    REQUIRE(specs.size() == 1);
    CHECK(specs[0].explicitness == Explicitness::implicit);
    CHECK(specs[0].action.candidates() == std::set<std::string>{"com.t.ACT"});
}

TEST_CASE("two reaching constructors yield two specs") {
    auto app = make_app("twoctor", activity_class(R"(
.method public go(Z)V
    .locals 3
    if-eqz p1, :second
    new-instance v0, Landroid/content/Intent;
    const-string v1, "com.t.ONE"
    invoke-direct {v0, v1}, Landroid/content/Intent;-><init>(Ljava/lang/String;)V
    goto :send
    :second
    new-instance v0, Landroid/content/Intent;
    const-string v1, "com.t.TWO"
    invoke-direct {v0, v1}, Landroid/content/Intent;-><init>(Ljava/lang/String;)V
    :send
    invoke-virtual {p0, v0}, Lcom/t/Main;->startActivity(Landroid/content/Intent;)V
    return-void
.end method
)"));
    auto specs = backtrace_intent(find_sender_sites(app).at(0),
                                  SourceSinkCatalog::defaults());
    REQUIRE(specs.size() == 2);
    std::set<std::string> actions;
    for (const auto& s : specs) {
        REQUIRE(s.action.is_resolved());
        actions.insert(*s.action.candidates().begin());
    }
    CHECK(actions == std::set<std::string>{"com.t.ONE", "com.t.TWO"});
}

TEST_CASE("intents built in a same-class helper are traced one level deep") {
    auto app = make_app("helper", activity_class(R"(
.method public go()V
    .locals 2
    const-string v1, "com.t.HELPED"
    invoke-direct {p0, v1}, Lcom/t/Main;->build(Ljava/lang/String;)Landroid/content/Intent;
    move-result-object v0
    invoke-virtual {p0, v0}, Lcom/t/Main;->startActivity(Landroid/content/Intent;)V
    return-void
.end method

.method private build(Ljava/lang/String;)Landroid/content/Intent;
    .locals 1
    new-instance v0, Landroid/content/Intent;
    invoke-direct {v0, p1}, Landroid/content/Intent;-><init>(Ljava/lang/String;)V
    return-object v0
.end method
)"));
    auto specs = backtrace_intent(find_sender_sites(app).at(0),
                                  SourceSinkCatalog::defaults());
    REQUIRE(specs.size() == 1);
    CHECK(specs[0].action.candidates()
          == std::set<std::string>{"com.t.HELPED"});
}

TEST_CASE("untraceable sites degrade to a fully unresolved spec") {
    auto app = make_app("opaquesite", activity_class(R"(
.method public go(Landroid/content/Intent;)V
    .locals 0
    invoke-virtual {p0, p1}, Lcom/t/Main;->startActivity(Landroid/content/Intent;)V
    return-void
.end method
)"));
    auto specs = backtrace_intent(find_sender_sites(app).at(0),
                                  SourceSinkCatalog::defaults());
    REQUIRE(specs.size() == 1);
    CHECK(specs[0].forwarded_received);
}

TEST_CASE("extras read from the received intent become references") {
    auto app = make_app("forward", activity_class(R"(
.method public go()V
    .locals 4
    invoke-virtual {p0}, Lcom/t/Main;->getIntent()Landroid/content/Intent;
    move-result-object v0
    const-string v1, "secret"
    invoke-virtual {v0, v1}, Landroid/content/Intent;->getStringExtra(Ljava/lang/String;)Ljava/lang/String;
    move-result-object v2
    new-instance v3, Landroid/content/Intent;
    const-string v1, "com.t.FWD"
    invoke-direct {v3, v1}, Landroid/content/Intent;-><init>(Ljava/lang/String;)V
    const-string v1, "secret2"
    invoke-virtual {v3, v1, v2}, Landroid/content/Intent;->putExtra(Ljava/lang/String;Ljava/lang/String;)Landroid/content/Intent;
    invoke-virtual {p0, v3}, Lcom/t/Main;->startActivity(Landroid/content/Intent;)V
    return-void
.end method
)"));
    auto specs = backtrace_intent(find_sender_sites(app).at(0),
                                  SourceSinkCatalog::defaults());
    REQUIRE(specs.size() == 1);
    REQUIRE(specs[0].extras.size() == 1);
    CHECK(specs[0].extras[0].value
          == ValueDescriptor::get_extra_ref("getStringExtra", "secret"));
}

TEST_CASE("sensitive source calls become source descriptors") {
    auto app = make_app("source", activity_class(R"(
.method public go()V
    .locals 4
    new-instance v0, Landroid/telephony/TelephonyManager;
    invoke-virtual {v0}, Landroid/telephony/TelephonyManager;->getDeviceId()Ljava/lang/String;
    move-result-object v1
    new-instance v2, Landroid/content/Intent;
    const-string v3, "com.t.EXFIL"
    invoke-direct {v2, v3}, Landroid/content/Intent;-><init>(Ljava/lang/String;)V
    const-string v3, "data"
    invoke-virtual {v2, v3, v1}, Landroid/content/Intent;->putExtra(Ljava/lang/String;Ljava/lang/String;)Landroid/content/Intent;
    invoke-virtual {p0, v2}, Lcom/t/Main;->startActivity(Landroid/content/Intent;)V
    return-void
.end method
)"));
    auto specs = backtrace_intent(find_sender_sites(app).at(0),
                                  SourceSinkCatalog::defaults());
    REQUIRE(specs.size() == 1);
    REQUIRE(specs[0].extras.size() == 1);
    CHECK(specs[0].extras[0].value
          == ValueDescriptor::source_call("TelephonyManager.getDeviceId"));
}

TEST_CASE("bundle extras expand to bundle put signatures") {
    auto app = make_app("bundle", activity_class(R"(
.method public go()V
    .locals 5
    new-instance v0, Landroid/os/Bundle;
    invoke-direct {v0}, Landroid/os/Bundle;-><init>()V
    const-string v1, "n"
    const/16 v2, 0x7
    invoke-virtual {v0, v1, v2}, Landroid/os/Bundle;->putInt(Ljava/lang/String;I)V
    new-instance v3, Landroid/content/Intent;
    const-string v4, "com.t.B"
    invoke-direct {v3, v4}, Landroid/content/Intent;-><init>(Ljava/lang/String;)V
    invoke-virtual {v3, v0}, Landroid/content/Intent;->putExtras(Landroid/os/Bundle;)Landroid/content/Intent;
    invoke-virtual {p0, v3}, Lcom/t/Main;->startActivity(Landroid/content/Intent;)V
    return-void
.end method
)"));
    auto specs = backtrace_intent(find_sender_sites(app).at(0),
                                  SourceSinkCatalog::defaults());
    REQUIRE(specs.size() == 1);
    REQUIRE(specs[0].extras.size() == 1);
    CHECK(specs[0].extras[0].put_signature == "Bundle.putInt(String,int)");
    CHECK(specs[0].extras[0].key.candidates() == std::set<std::string>{"n"});
}

TEST_CASE("dynamically registered receivers surface their filters") {
    auto app = make_app("dynreg", activity_class(R"(
.method public onCreate(Landroid/os/Bundle;)V
    .locals 3
    new-instance v0, Lcom/t/Main$Inner;
    invoke-direct {v0}, Lcom/t/Main$Inner;-><init>()V
    new-instance v1, Landroid/content/IntentFilter;
    const-string v2, "com.t.DYNAMIC"
    invoke-direct {v1, v2}, Landroid/content/IntentFilter;-><init>(Ljava/lang/String;)V
    invoke-virtual {p0, v0, v1}, Lcom/t/Main;->registerReceiver(Landroid/content/BroadcastReceiver;Landroid/content/IntentFilter;)Landroid/content/Intent;
    return-void
.end method
)"));
    auto filters = find_dynamic_receivers(app);
    REQUIRE(filters.size() == 1);
    CHECK(filters[0].is_dynamic());
    CHECK(filters[0].actions == std::set<std::string>{"com.t.DYNAMIC"});
    CHECK(filters[0].dynamic->class_name == "com.t.Main$Inner");
}

TEST_CASE("result channel declarations are collected") {
    auto app = make_app("result", activity_class(R"(
.method public onActivityResult(IILandroid/content/Intent;)V
    .locals 2
    const-string v0, "answer"
    invoke-virtual {p3, v0}, Landroid/content/Intent;->getStringExtra(Ljava/lang/String;)Ljava/lang/String;
    move-result-object v1
    return-void
.end method

.method public setIt()V
    .locals 2
    invoke-virtual {p0}, Lcom/t/Main;->getIntent()Landroid/content/Intent;
    move-result-object v0
    const/4 v1, -0x1
    invoke-virtual {p0, v1, v0}, Lcom/t/Main;->setResult(ILandroid/content/Intent;)V
    return-void
.end method
)"));
    auto decls = extract_result_channels(app, SourceSinkCatalog::defaults());
    REQUIRE(decls.size() == 2);
    bool saw_get = false, saw_set = false;
    for (const auto& d : decls) {
        if (d.kind == ResultChannelDecl::Kind::on_activity_result) {
            saw_get = true;
            REQUIRE(d.gets.size() == 1);
            CHECK(d.gets[0].get_signature == "getStringExtra");
            CHECK(d.gets[0].key.candidates()
                  == std::set<std::string>{"answer"});
        }
        if (d.kind == ResultChannelDecl::Kind::set_result) {
            saw_set = true;
            CHECK(d.forwarded);
        }
    }
    CHECK(saw_get);
    CHECK(saw_set);
}
