#ifndef INTENTSCAN_SMALI_HPP
#define INTENTSCAN_SMALI_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace intentscan {

// Structured opcode subset: intent construction, string building, field
// moves and control flow. Everything else is kept as an opaque no-op so
// instruction counts and positions stay intact.
enum class Opcode {
    const_string,
    const_class,
    const_int, // const/4, const/16, const, const/high16
    new_instance,
    invoke_direct,
    invoke_virtual,
    invoke_static,
    invoke_interface,
    invoke_super,
    move_result,
    move_result_object,
    move,
    move_object,
    iget_object,
    iput_object,
    sget_object,
    sput_object,
    return_value,
    return_object,
    return_void,
    goto_branch,
    if_branch,
    opaque,
};

struct MethodRef {
    std::string owner; // Lcom/foo/Bar;
    std::string name;
    std::vector<std::string> params; // type descriptors
    std::string return_type;

    std::string owner_dotted() const;
    std::string owner_simple() const;
    std::string descriptor() const; // (PARAMS)RET

    bool operator==(const MethodRef&) const = default;
    auto operator<=>(const MethodRef&) const = default;
};

struct FieldRef {
    std::string owner;
    std::string name;
    std::string type;

    bool operator==(const FieldRef&) const = default;
    auto operator<=>(const FieldRef&) const = default;
};

struct Instruction {
    Opcode op = Opcode::opaque;
    std::string mnemonic;
    std::vector<int> registers; // normalized v-register numbers
    std::string literal;        // string constant / class descriptor / label
    std::optional<MethodRef> method;
    std::optional<FieldRef> field;
    std::optional<std::int64_t> int_value;
    int branch_target = -1; // resolved instruction index for goto/if
    std::string raw;        // original text, kept verbatim for opaque ops

    bool is_invoke() const;
    bool structurally_equal(const Instruction& other) const;
};

struct MethodSig {
    std::string name;
    std::vector<std::string> params;
    std::string return_type;

    std::string to_string() const;
    bool operator==(const MethodSig&) const = default;
    auto operator<=>(const MethodSig&) const = default;
};

struct SmaliMethod {
    MethodSig sig;
    std::string flags; // access flags as written
    bool is_static = false;
    int register_count = 0;
    std::vector<Instruction> instructions;

    int param_register_base() const; // first register holding a parameter
    // Register that holds parameter `index` (0 = `this` for virtual methods).
    int param_register(int index) const;
    int param_slot_count() const;
    std::vector<int> successors(int index) const;
};

struct SmaliClass {
    std::string class_name; // dotted, e.g. com.appA.OutFlowActivity
    std::string super_name;
    std::vector<SmaliMethod> methods;

    const SmaliMethod* find_method(const std::string& name) const;
};

std::string descriptor_to_dotted(const std::string& descriptor);
std::string dotted_to_descriptor(const std::string& dotted);
std::string type_short_name(const std::string& descriptor);

SmaliClass parse_smali_text(const std::string& text,
                            const std::string& origin = "<memory>");
SmaliClass parse_smali_class(const std::filesystem::path& path);

std::string print_method(const SmaliMethod& method);
std::string print_class(const SmaliClass& cls);

bool structurally_equal(const SmaliMethod& a, const SmaliMethod& b);

} // namespace intentscan

#endif
