#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "intentscan/errors.hpp"
#include "intentscan/smali.hpp"
#include "intentscan/string_eval.hpp"

using namespace intentscan;

namespace {

// Wraps a method body in a minimal class and evaluates `reg` right before
// the final return-void.
StringValue eval_body(const std::string& body, int reg,
                      EvalConfig cfg = {}) {
    auto cls = parse_smali_text(".class Lt/T;\n.super Ljava/lang/Object;\n"
                                ".method public static f()V\n.registers 8\n"
                                        + body + "    return-void\n"
                                        + ".end method\n",
                                "t");
    const auto& m = cls.methods[0];
    return eval_string(cls, m, static_cast<int>(m.instructions.size()) - 1,
                       reg, cfg);
}

} // namespace

TEST_CASE("constants propagate through moves") {
    auto v = eval_body("    const-string v0, \"imei\"\n"
                       "    move-object v1, v0\n",
                       1);
    REQUIRE(v.is_resolved());
    CHECK(v.candidates() == std::set<std::string>{"imei"});
}

TEST_CASE("branches join candidate sets") {
    auto v = eval_body("    const/4 v2, 0x0\n"
                       "    const-string v0, \"a\"\n"
                       "    if-eqz v2, :other\n"
                       "    const-string v0, \"b\"\n"
                       "    :other\n",
                       0);
    REQUIRE(v.is_resolved());
    CHECK(v.candidates() == std::set<std::string>{"a", "b"});
}

TEST_CASE("string builder append concatenates") {
    auto v = eval_body(
            "    new-instance v0, Ljava/lang/StringBuilder;\n"
            "    invoke-direct {v0}, Ljava/lang/StringBuilder;-><init>()V\n"
            "    const-string v1, \"foo\"\n"
            "    invoke-virtual {v0, v1}, Ljava/lang/StringBuilder;->append(Ljava/lang/String;)Ljava/lang/StringBuilder;\n"
            "    const-string v1, \"bar\"\n"
            "    invoke-virtual {v0, v1}, Ljava/lang/StringBuilder;->append(Ljava/lang/String;)Ljava/lang/StringBuilder;\n"
            "    invoke-virtual {v0}, Ljava/lang/StringBuilder;->toString()Ljava/lang/String;\n"
            "    move-result-object v2\n",
            2);
    REQUIRE(v.is_resolved());
    CHECK(v.candidates() == std::set<std::string>{"foobar"});
}

TEST_CASE("string transformations apply candidate-wise") {
    auto v = eval_body(
            "    const-string v0, \"Hello World\"\n"
            "    invoke-virtual {v0}, Ljava/lang/String;->toLowerCase()Ljava/lang/String;\n"
            "    move-result-object v1\n"
            "    const/4 v2, 0x0\n"
            "    const/4 v3, 0x5\n"
            "    invoke-virtual {v1, v2, v3}, Ljava/lang/String;->substring(II)Ljava/lang/String;\n"
            "    move-result-object v4\n",
            4);
    REQUIRE(v.is_resolved());
    CHECK(v.candidates() == std::set<std::string>{"hello"});
}

TEST_CASE("dynamic input is unresolved with the right reason") {
    auto v = eval_body(
            "    new-instance v5, Landroid/widget/EditText;\n"
            "    invoke-virtual {v5}, Landroid/widget/EditText;->getText()Landroid/text/Editable;\n"
            "    move-result-object v6\n"
            "    invoke-virtual {v6}, Ljava/lang/Object;->toString()Ljava/lang/String;\n"
            "    move-result-object v0\n",
            0);
    CHECK_FALSE(v.is_resolved());
    CHECK(v.reason() == StringValue::Reason::dynamic_input);
}

TEST_CASE("candidate cap trips to budget_exceeded") {
    std::set<std::string> many;
    for (int i = 0; i < 20; ++i) {
        many.insert("s" + std::to_string(i));
    }
    auto v = StringValue::resolved(many, 16);
    CHECK_FALSE(v.is_resolved());
    CHECK(v.reason() == StringValue::Reason::budget_exceeded);
    CHECK(StringValue::resolved(many, 32).is_resolved());
}

TEST_CASE("join absorbs unresolved operands") {
    auto a = StringValue::of("x");
    auto u = StringValue::unresolved(StringValue::Reason::dynamic_input);
    auto j = StringValue::join(a, u);
    CHECK_FALSE(j.is_resolved());
    CHECK(j.reason() == StringValue::Reason::dynamic_input);
    auto k = StringValue::join(a, StringValue::of("y"));
    REQUIRE(k.is_resolved());
    CHECK(k.candidates() == std::set<std::string>{"x", "y"});
}

TEST_CASE("join is commutative, associative and idempotent over samples") {
    std::vector<StringValue> samples = {
            StringValue::of("a"),
            StringValue::resolved({"b", "c"}),
            StringValue::unresolved(StringValue::Reason::unmodeled_op),
            StringValue::unresolved(StringValue::Reason::dynamic_input),
    };
    for (const auto& x : samples) {
        CHECK(StringValue::join(x, x) == x);
        for (const auto& y : samples) {
            CHECK(StringValue::join(x, y) == StringValue::join(y, x));
            for (const auto& z : samples) {
                CHECK(StringValue::join(StringValue::join(x, y), z)
                      == StringValue::join(x, StringValue::join(y, z)));
            }
        }
    }
}

TEST_CASE("modeled operations over candidate products") {
    auto ab = StringValue::resolved({"a", "b"});
    auto xy = StringValue::resolved({"x", "y"});
    auto cat = model_string_op("concat", ab, {xy});
    REQUIRE(cat.is_resolved());
    CHECK(cat.candidates()
          == std::set<std::string>{"ax", "ay", "bx", "by"});
    auto rep = model_string_op("replace", StringValue::of("a.b.c"),
                               {StringValue::of("."), StringValue::of("_")});
    CHECK(rep.candidates() == std::set<std::string>{"a_b_c"});
    auto trimmed = model_string_op("trim", StringValue::of("  pad  "), {});
    CHECK(trimmed.candidates() == std::set<std::string>{"pad"});
    CHECK_THROWS_AS(model_string_op("reverse", ab, {}), UnmodeledOp);
}

TEST_CASE("substring out of range yields no candidate, not a crash") {
    auto v = model_string_op("substring", StringValue::of("abc"),
                             {StringValue::of("1")});
    CHECK(v.candidates() == std::set<std::string>{"bc"});
    auto bad = model_string_op("substring", StringValue::of("abc"),
                               {StringValue::of("9")});
    CHECK_FALSE(bad.is_resolved());
}

TEST_CASE("list model answers known slots only") {
    ListModel list;
    list.slots[0] = StringValue::of("first");
    list.slots[1] = StringValue::of("second");
    CHECK(eval_list_get(list, 1).candidates()
          == std::set<std::string>{"second"});
    CHECK_FALSE(eval_list_get(list, 7).is_resolved());
    list.complete = false;
    CHECK_FALSE(eval_list_get(list, 0).is_resolved());
}

TEST_CASE("list construction in smali") {
    auto v = eval_body(
            "    new-instance v0, Ljava/util/ArrayList;\n"
            "    invoke-direct {v0}, Ljava/util/ArrayList;-><init>()V\n"
            "    const-string v1, \"alpha\"\n"
            "    invoke-virtual {v0, v1}, Ljava/util/ArrayList;->add(Ljava/lang/Object;)Z\n"
            "    const-string v1, \"beta\"\n"
            "    invoke-virtual {v0, v1}, Ljava/util/ArrayList;->add(Ljava/lang/Object;)Z\n"
            "    const/4 v2, 0x1\n"
            "    invoke-virtual {v0, v2}, Ljava/util/ArrayList;->get(I)Ljava/lang/Object;\n"
            "    move-result-object v3\n"
            "    invoke-virtual {v3}, Ljava/lang/Object;->toString()Ljava/lang/String;\n"
            "    move-result-object v4\n",
            3);
    REQUIRE(v.is_resolved());
    CHECK(v.candidates() == std::set<std::string>{"beta"});
}

TEST_CASE("loops terminate and degrade soundly") {
    auto v = eval_body("    const-string v0, \"seed\"\n"
                       "    :loop\n"
                       "    invoke-virtual {v0}, Ljava/lang/String;->trim()Ljava/lang/String;\n"
                       "    move-result-object v0\n"
                       "    const/4 v1, 0x0\n"
                       "    if-eqz v1, :loop\n",
                       0);
    // The loop body is value-preserving here; any sound answer contains
    // "seed" or reports unresolved, and evaluation must terminate.
    if (v.is_resolved()) {
        CHECK(v.candidates().count("seed") == 1);
    }
}

TEST_CASE("same-class field stores union into loads") {
    auto cls = parse_smali_text(
            ".class Lt/F;\n.super Ljava/lang/Object;\n"
            ".method public a()V\n.registers 2\n"
            "    const-string v0, \"stored\"\n"
            "    iput-object v0, p0, Lt/F;->name:Ljava/lang/String;\n"
            "    return-void\n.end method\n"
            ".method public b()V\n.registers 2\n"
            "    iget-object v0, p0, Lt/F;->name:Ljava/lang/String;\n"
            "    return-void\n.end method\n",
            "t");
    const auto& b = cls.methods[1];
    auto v = eval_string(cls, b, 1, 0);
    REQUIRE(v.is_resolved());
    CHECK(v.candidates() == std::set<std::string>{"stored"});
}

TEST_CASE("integer evaluation follows constants and joins") {
    auto cls = parse_smali_text(".class Lt/T;\n.super Ljava/lang/Object;\n"
                                ".method public static f()V\n.registers 4\n"
                                "    const/16 v0, 0x2a\n"
                                "    const/4 v1, 0x0\n"
                                "    if-eqz v1, :other\n"
                                "    const/4 v0, 0x7\n"
                                "    :other\n"
                                "    return-void\n.end method\n",
                                "t");
    const auto& m = cls.methods[0];
    StringEvaluator eval(cls, m);
    auto ints = eval.eval_int(static_cast<int>(m.instructions.size()) - 1, 0);
    CHECK(ints == std::set<std::int64_t>{7, 42});
}

TEST_CASE("String.format with %s and %d") {
    auto v = model_string_op("format", StringValue::of("id=%s n=%d"),
                             {StringValue::of("x"), StringValue::of("3")});
    REQUIRE(v.is_resolved());
    CHECK(v.candidates() == std::set<std::string>{"id=x n=3"});
}
