#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "intentscan/errors.hpp"
#include "intentscan/smali.hpp"

using namespace intentscan;

namespace {

const char* kSample = R"(.class public Lcom/example/Main;
.super Landroid/app/Activity;

.method public onCreate(Landroid/os/Bundle;)V
    .locals 3

    invoke-super {p0, p1}, Landroid/app/Activity;->onCreate(Landroid/os/Bundle;)V

    const-string v0, "hello"

    const/4 v1, 0x0

    if-eqz v1, :skip

    const-string v0, "other"

    :skip
    invoke-virtual {p0, v0}, Lcom/example/Main;->use(Ljava/lang/String;)V

    return-void
.end method

.method private use(Ljava/lang/String;)V
    .locals 0

    return-void
.end method
)";

} // namespace

TEST_CASE("class header and methods parse") {
    auto cls = parse_smali_text(kSample, "sample");
    CHECK(cls.class_name == "com.example.Main");
    CHECK(cls.super_name == "android.app.Activity");
    REQUIRE(cls.methods.size() == 2);
    CHECK(cls.methods[0].sig.name == "onCreate");
    CHECK(cls.methods[0].sig.params
          == std::vector<std::string>{"Landroid/os/Bundle;"});
    CHECK_FALSE(cls.methods[0].is_static);
    CHECK(cls.methods[1].flags == "private");
}

TEST_CASE("parameter registers normalize after .locals") {
    auto cls = parse_smali_text(kSample, "sample");
    const auto& m = cls.methods[0];
    // .locals 3 + this + 1 param = 5 registers; p0 -> v3, p1 -> v4.
    CHECK(m.register_count == 5);
    CHECK(m.param_register_base() == 3);
    CHECK(m.instructions[0].registers == std::vector<int>{3, 4});
}

TEST_CASE("branches resolve to instruction indices") {
    auto cls = parse_smali_text(kSample, "sample");
    const auto& m = cls.methods[0];
    const auto& branch = m.instructions[3];
    REQUIRE(branch.op == Opcode::if_branch);
    // Falls through to the second const-string, jumps over it.
    CHECK(branch.branch_target == 5);
    CHECK(m.successors(3) == std::vector<int>{4, 5});
    // Returns terminate.
    CHECK(m.successors(6).empty());
}

TEST_CASE("string literals unescape") {
    auto cls = parse_smali_text(
            ".class Lt/T;\n.super Ljava/lang/Object;\n"
            ".method public static f()V\n.registers 1\n"
            "    const-string v0, \"a\\n\\\"b\\\\\"\n"
            "    return-void\n.end method\n",
            "t");
    CHECK(cls.methods[0].instructions[0].literal == "a\n\"b\\");
}

TEST_CASE("print/parse round trip is structurally equal") {
    auto cls = parse_smali_text(kSample, "sample");
    auto again = parse_smali_text(print_class(cls), "printed");
    REQUIRE(again.methods.size() == cls.methods.size());
    for (std::size_t i = 0; i < cls.methods.size(); ++i) {
        CHECK(structurally_equal(cls.methods[i], again.methods[i]));
    }
}

TEST_CASE("unknown mnemonics stay opaque instead of failing") {
    auto cls = parse_smali_text(
            ".class Lt/T;\n.super Ljava/lang/Object;\n"
            ".method public f()V\n.registers 2\n"
            "    check-cast v0, Landroid/telephony/TelephonyManager;\n"
            "    return-void\n.end method\n",
            "t");
    CHECK(cls.methods[0].instructions[0].op == Opcode::opaque);
    CHECK(cls.methods[0].instructions[0].mnemonic == "check-cast");
}

TEST_CASE("malformed inputs throw") {
    CHECK_THROWS_AS(parse_smali_text(".super Lx;\n", "t"), MalformedSmali);
    CHECK_THROWS_AS(parse_smali_text(".class Lt/T;\n.super Lx;\n"
                                     ".method public f()V\n",
                                     "t"),
                    MalformedSmali);
}

TEST_CASE("descriptor helpers") {
    CHECK(descriptor_to_dotted("Landroid/content/Intent;")
          == "android.content.Intent");
    CHECK(dotted_to_descriptor("android.content.Intent")
          == "Landroid/content/Intent;");
    CHECK(type_short_name("Landroid/content/Intent;") == "Intent");
    CHECK(type_short_name("I") == "int");
    CHECK(type_short_name("[Ljava/lang/String;") == "String[]");
}
