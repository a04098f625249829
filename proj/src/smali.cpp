#include "intentscan/smali.hpp"

#include "intentscan/errors.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace intentscan {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) {
        return "";
    }
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool starts_with(const std::string& s, const std::string& prefix) {
    return s.rfind(prefix, 0) == 0;
}

int type_width(const std::string& descriptor) {
    return (descriptor == "J" || descriptor == "D") ? 2 : 1;
}

// Splits "Ljava/lang/String;ILandroid/os/Bundle;" into descriptors.
std::vector<std::string> split_param_descriptors(const std::string& s,
                                                 const std::string& ctx) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < s.size()) {
        std::size_t start = i;
        while (i < s.size() && s[i] == '[') {
            ++i;
        }
        if (i >= s.size()) {
            throw MalformedSmali("truncated type list in " + ctx);
        }
        if (s[i] == 'L') {
            auto semi = s.find(';', i);
            if (semi == std::string::npos) {
                throw MalformedSmali("unterminated class type in " + ctx);
            }
            i = semi + 1;
        } else {
            ++i;
        }
        out.push_back(s.substr(start, i - start));
    }
    return out;
}

std::string unescape_string_literal(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '\\' || i + 1 >= s.size()) {
            out.push_back(s[i]);
            continue;
        }
        ++i;
        switch (s[i]) {
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        case 'r': out.push_back('\r'); break;
        case '"': out.push_back('"'); break;
        case '\'': out.push_back('\''); break;
        case '\\': out.push_back('\\'); break;
        case 'u': {
            if (i + 4 < s.size()) {
                unsigned cp = std::stoul(s.substr(i + 1, 4), nullptr, 16);
                // Basic-plane UTF-8 encoding; fixtures stay in ASCII anyway.
                if (cp < 0x80) {
                    out.push_back(static_cast<char>(cp));
                } else if (cp < 0x800) {
                    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
                    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
                } else {
                    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
                    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
                    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
                }
                i += 4;
            }
            break;
        }
        default: out.push_back(s[i]); break;
        }
    }
    return out;
}

std::string escape_string_literal(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        case '\r': out += "\\r"; break;
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        default: out.push_back(c); break;
        }
    }
    return out;
}

MethodRef parse_method_ref(const std::string& text, const std::string& ctx) {
    auto arrow = text.find("->");
    auto lparen = text.find('(', arrow);
    auto rparen = text.find(')', lparen);
    if (arrow == std::string::npos || lparen == std::string::npos
        || rparen == std::string::npos) {
        throw MalformedSmali("bad method reference '" + text + "' in " + ctx);
    }
    MethodRef ref;
    ref.owner = text.substr(0, arrow);
    ref.name = text.substr(arrow + 2, lparen - arrow - 2);
    ref.params = split_param_descriptors(
            text.substr(lparen + 1, rparen - lparen - 1), ctx);
    ref.return_type = text.substr(rparen + 1);
    return ref;
}

FieldRef parse_field_ref(const std::string& text, const std::string& ctx) {
    auto arrow = text.find("->");
    auto colon = text.find(':', arrow);
    if (arrow == std::string::npos || colon == std::string::npos) {
        throw MalformedSmali("bad field reference '" + text + "' in " + ctx);
    }
    return FieldRef{text.substr(0, arrow),
                    text.substr(arrow + 2, colon - arrow - 2),
                    text.substr(colon + 1)};
}

struct RawReg {
    char kind; // 'v' or 'p'
    int index;
};

std::optional<RawReg> parse_raw_register(const std::string& tok) {
    if (tok.size() < 2 || (tok[0] != 'v' && tok[0] != 'p')) {
        return std::nullopt;
    }
    for (std::size_t i = 1; i < tok.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(tok[i]))) {
            return std::nullopt;
        }
    }
    return RawReg{tok[0], std::stoi(tok.substr(1))};
}

// Splits operands on commas, keeping {...} groups and string literals whole.
std::vector<std::string> split_operands(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    int brace = 0;
    bool in_str = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (in_str) {
            cur.push_back(c);
            if (c == '\\' && i + 1 < s.size()) {
                cur.push_back(s[++i]);
            } else if (c == '"') {
                in_str = false;
            }
            continue;
        }
        if (c == '"') {
            in_str = true;
            cur.push_back(c);
        } else if (c == '{') {
            ++brace;
            cur.push_back(c);
        } else if (c == '}') {
            --brace;
            cur.push_back(c);
        } else if (c == ',' && brace == 0) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!trim(cur).empty()) {
        out.push_back(trim(cur));
    }
    return out;
}

struct MethodBuilder {
    SmaliMethod method;
    std::map<std::string, int> labels;          // label -> next instr index
    std::vector<std::pair<int, std::string>> pending_branches;
    bool saw_locals_directive = false;
    int declared_locals = 0;

    int normalize_register(const RawReg& r) const {
        if (r.kind == 'v') {
            return r.index;
        }
        // With .locals the parameter base is the local count itself; with
        // .registers it derives from the declared total.
        int base = saw_locals_directive ? declared_locals
                                        : method.param_register_base();
        return base + r.index;
    }
};

Opcode classify_opcode(const std::string& mnemonic) {
    if (mnemonic == "const-string" || mnemonic == "const-string/jumbo") {
        return Opcode::const_string;
    }
    if (mnemonic == "const-class") {
        return Opcode::const_class;
    }
    if (mnemonic == "const/4" || mnemonic == "const/16" || mnemonic == "const"
        || mnemonic == "const/high16") {
        return Opcode::const_int;
    }
    if (mnemonic == "new-instance") {
        return Opcode::new_instance;
    }
    if (starts_with(mnemonic, "invoke-direct")) {
        return Opcode::invoke_direct;
    }
    if (starts_with(mnemonic, "invoke-virtual")) {
        return Opcode::invoke_virtual;
    }
    if (starts_with(mnemonic, "invoke-static")) {
        return Opcode::invoke_static;
    }
    if (starts_with(mnemonic, "invoke-interface")) {
        return Opcode::invoke_interface;
    }
    if (starts_with(mnemonic, "invoke-super")) {
        return Opcode::invoke_super;
    }
    if (mnemonic == "move-result") {
        return Opcode::move_result;
    }
    if (mnemonic == "move-result-object") {
        return Opcode::move_result_object;
    }
    if (mnemonic == "move" || mnemonic == "move/from16"
        || mnemonic == "move/16") {
        return Opcode::move;
    }
    if (mnemonic == "move-object" || mnemonic == "move-object/from16"
        || mnemonic == "move-object/16") {
        return Opcode::move_object;
    }
    if (mnemonic == "iget-object") {
        return Opcode::iget_object;
    }
    if (mnemonic == "iput-object") {
        return Opcode::iput_object;
    }
    if (mnemonic == "sget-object") {
        return Opcode::sget_object;
    }
    if (mnemonic == "sput-object") {
        return Opcode::sput_object;
    }
    if (mnemonic == "return") {
        return Opcode::return_value;
    }
    if (mnemonic == "return-object") {
        return Opcode::return_object;
    }
    if (mnemonic == "return-void") {
        return Opcode::return_void;
    }
    if (mnemonic == "goto" || mnemonic == "goto/16" || mnemonic == "goto/32") {
        return Opcode::goto_branch;
    }
    if (starts_with(mnemonic, "if-")) {
        return Opcode::if_branch;
    }
    return Opcode::opaque;
}

std::vector<int> parse_register_group(const std::string& group,
                                      const MethodBuilder& b,
                                      const std::string& ctx) {
    // "{v0, v1}" or range form "{v0 .. v5}".
    std::string inner = trim(group.substr(1, group.size() - 2));
    std::vector<int> regs;
    if (inner.empty()) {
        return regs;
    }
    auto dots = inner.find("..");
    if (dots != std::string::npos) {
        auto first = parse_raw_register(trim(inner.substr(0, dots)));
        auto last = parse_raw_register(trim(inner.substr(dots + 2)));
        if (!first || !last || first->kind != last->kind
            || last->index < first->index) {
            throw MalformedSmali("bad register range in " + ctx);
        }
        for (int i = first->index; i <= last->index; ++i) {
            regs.push_back(b.normalize_register(RawReg{first->kind, i}));
        }
        return regs;
    }
    std::stringstream ss(inner);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        auto r = parse_raw_register(trim(tok));
        if (!r) {
            throw MalformedSmali("bad register '" + tok + "' in " + ctx);
        }
        regs.push_back(b.normalize_register(*r));
    }
    return regs;
}

Instruction parse_instruction(const std::string& line, MethodBuilder& b,
                              const std::string& ctx) {
    Instruction ins;
    ins.raw = line;
    auto space = line.find_first_of(" \t");
    ins.mnemonic = space == std::string::npos ? line : line.substr(0, space);
    ins.op = classify_opcode(ins.mnemonic);
    if (ins.op == Opcode::opaque) {
        return ins;
    }
    std::string rest =
            space == std::string::npos ? "" : trim(line.substr(space));
    auto operands = split_operands(rest);

    auto reg_operand = [&](const std::string& tok) {
        auto r = parse_raw_register(tok);
        if (!r) {
            throw MalformedSmali("expected register, got '" + tok + "' in "
                                 + ctx);
        }
        return b.normalize_register(*r);
    };

    switch (ins.op) {
    case Opcode::const_string:
        ins.registers = {reg_operand(operands.at(0))};
        {
            std::string lit = operands.at(1);
            if (lit.size() < 2 || lit.front() != '"' || lit.back() != '"') {
                throw MalformedSmali("bad string literal in " + ctx);
            }
            ins.literal = unescape_string_literal(
                    lit.substr(1, lit.size() - 2));
        }
        break;
    case Opcode::const_class:
    case Opcode::new_instance:
        ins.registers = {reg_operand(operands.at(0))};
        ins.literal = operands.at(1);
        break;
    case Opcode::const_int:
        ins.registers = {reg_operand(operands.at(0))};
        ins.int_value = std::stoll(operands.at(1), nullptr, 0);
        break;
    case Opcode::invoke_direct:
    case Opcode::invoke_virtual:
    case Opcode::invoke_static:
    case Opcode::invoke_interface:
    case Opcode::invoke_super:
        ins.registers = parse_register_group(operands.at(0), b, ctx);
        ins.method = parse_method_ref(operands.at(1), ctx);
        break;
    case Opcode::move_result:
    case Opcode::move_result_object:
    case Opcode::return_value:
    case Opcode::return_object:
        ins.registers = {reg_operand(operands.at(0))};
        break;
    case Opcode::move:
    case Opcode::move_object:
        ins.registers = {reg_operand(operands.at(0)),
                         reg_operand(operands.at(1))};
        break;
    case Opcode::iget_object:
    case Opcode::iput_object:
        ins.registers = {reg_operand(operands.at(0)),
                         reg_operand(operands.at(1))};
        ins.field = parse_field_ref(operands.at(2), ctx);
        break;
    case Opcode::sget_object:
    case Opcode::sput_object:
        ins.registers = {reg_operand(operands.at(0))};
        ins.field = parse_field_ref(operands.at(1), ctx);
        break;
    case Opcode::return_void:
        break;
    case Opcode::goto_branch:
        ins.literal = operands.at(0);
        break;
    case Opcode::if_branch:
        for (std::size_t i = 0; i + 1 < operands.size(); ++i) {
            ins.registers.push_back(reg_operand(operands[i]));
        }
        ins.literal = operands.back();
        break;
    case Opcode::opaque:
        break;
    }
    if (ins.op == Opcode::goto_branch || ins.op == Opcode::if_branch) {
        if (ins.literal.empty() || ins.literal[0] != ':') {
            throw MalformedSmali("expected label in " + ctx);
        }
    }
    return ins;
}

} // namespace

std::string descriptor_to_dotted(const std::string& descriptor) {
    std::string s = descriptor;
    if (!s.empty() && s.front() == 'L' && s.back() == ';') {
        s = s.substr(1, s.size() - 2);
    }
    std::replace(s.begin(), s.end(), '/', '.');
    return s;
}

std::string dotted_to_descriptor(const std::string& dotted) {
    std::string s = dotted;
    std::replace(s.begin(), s.end(), '.', '/');
    return "L" + s + ";";
}

std::string type_short_name(const std::string& descriptor) {
    if (descriptor.empty()) {
        return descriptor;
    }
    if (descriptor[0] == '[') {
        return type_short_name(descriptor.substr(1)) + "[]";
    }
    switch (descriptor[0]) {
    case 'Z': return "boolean";
    case 'B': return "byte";
    case 'C': return "char";
    case 'S': return "short";
    case 'I': return "int";
    case 'J': return "long";
    case 'F': return "float";
    case 'D': return "double";
    case 'V': return "void";
    default: break;
    }
    auto dotted = descriptor_to_dotted(descriptor);
    auto dot = dotted.rfind('.');
    return dot == std::string::npos ? dotted : dotted.substr(dot + 1);
}

std::string MethodRef::owner_dotted() const {
    return descriptor_to_dotted(owner);
}

std::string MethodRef::owner_simple() const {
    return type_short_name(owner);
}

std::string MethodRef::descriptor() const {
    std::string out = "(";
    for (const auto& p : params) {
        out += p;
    }
    out += ")" + return_type;
    return out;
}

bool Instruction::is_invoke() const {
    switch (op) {
    case Opcode::invoke_direct:
    case Opcode::invoke_virtual:
    case Opcode::invoke_static:
    case Opcode::invoke_interface:
    case Opcode::invoke_super:
        return true;
    default:
        return false;
    }
}

bool Instruction::structurally_equal(const Instruction& other) const {
    if (op == Opcode::opaque || other.op == Opcode::opaque) {
        return op == other.op && mnemonic == other.mnemonic;
    }
    if (op == Opcode::goto_branch || op == Opcode::if_branch) {
        // Labels are spelling; the resolved target is the structure.
        return op == other.op && registers == other.registers
                && branch_target == other.branch_target;
    }
    return op == other.op && registers == other.registers
            && literal == other.literal && method == other.method
            && field == other.field && int_value == other.int_value
            && branch_target == other.branch_target;
}

std::string MethodSig::to_string() const {
    std::string out = name + "(";
    for (const auto& p : params) {
        out += p;
    }
    out += ")" + return_type;
    return out;
}

int SmaliMethod::param_slot_count() const {
    int n = is_static ? 0 : 1;
    for (const auto& p : sig.params) {
        n += (p == "J" || p == "D") ? 2 : 1;
    }
    return n;
}

int SmaliMethod::param_register_base() const {
    return register_count - param_slot_count();
}

int SmaliMethod::param_register(int index) const {
    return param_register_base() + index;
}

std::vector<int> SmaliMethod::successors(int index) const {
    const auto& ins = instructions.at(index);
    std::vector<int> out;
    switch (ins.op) {
    case Opcode::return_value:
    case Opcode::return_object:
    case Opcode::return_void:
        break;
    case Opcode::goto_branch:
        if (ins.branch_target >= 0) {
            out.push_back(ins.branch_target);
        }
        break;
    case Opcode::if_branch:
        if (index + 1 < static_cast<int>(instructions.size())) {
            out.push_back(index + 1);
        }
        if (ins.branch_target >= 0) {
            out.push_back(ins.branch_target);
        }
        break;
    default:
        if (index + 1 < static_cast<int>(instructions.size())) {
            out.push_back(index + 1);
        }
        break;
    }
    return out;
}

const SmaliMethod* SmaliClass::find_method(const std::string& name) const {
    for (const auto& m : methods) {
        if (m.sig.name == name) {
            return &m;
        }
    }
    return nullptr;
}

SmaliClass parse_smali_text(const std::string& text,
                            const std::string& origin) {
    SmaliClass cls;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    std::optional<MethodBuilder> current;
    std::vector<std::string> raw_method_lines;
    int skip_region = 0; // .annotation / switch payload nesting

    auto finish_method = [&]() {
        auto& b = *current;
        // Resolve branch labels to instruction indices. Unresolvable labels
        // stay -1 and the edge is dropped.
        for (auto& [idx, label] : b.pending_branches) {
            auto it = b.labels.find(label);
            if (it != b.labels.end()) {
                b.method.instructions[idx].branch_target = it->second;
            } else {
                std::cerr << "warning: unresolved label " << label << " in "
                          << origin << "\n";
            }
        }
        if (b.saw_locals_directive) {
            b.method.register_count =
                    b.declared_locals + b.method.param_slot_count();
        }
        cls.methods.push_back(std::move(b.method));
        current.reset();
    };

    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') {
            continue;
        }
        std::string ctx = origin + ":" + std::to_string(lineno);

        if (skip_region > 0) {
            if (starts_with(t, ".annotation") || starts_with(t, ".subannotation")) {
                ++skip_region;
            } else if (starts_with(t, ".end annotation")
                       || starts_with(t, ".end subannotation")
                       || starts_with(t, ".end packed-switch")
                       || starts_with(t, ".end sparse-switch")
                       || starts_with(t, ".end array-data")) {
                --skip_region;
            }
            continue;
        }

        if (starts_with(t, ".class")) {
            auto sp = t.find_last_of(" \t");
            cls.class_name = descriptor_to_dotted(t.substr(sp + 1));
            continue;
        }
        if (starts_with(t, ".super")) {
            auto sp = t.find_last_of(" \t");
            cls.super_name = descriptor_to_dotted(t.substr(sp + 1));
            continue;
        }
        if (starts_with(t, ".method")) {
            if (current) {
                throw MalformedSmali("nested .method at " + ctx);
            }
            std::string decl = trim(t.substr(7));
            auto lparen = decl.find('(');
            auto rparen = decl.find(')', lparen);
            if (lparen == std::string::npos || rparen == std::string::npos) {
                throw MalformedSmali("bad .method declaration at " + ctx);
            }
            auto name_start = decl.find_last_of(" \t", lparen);
            std::string name = name_start == std::string::npos
                    ? decl.substr(0, lparen)
                    : decl.substr(name_start + 1, lparen - name_start - 1);
            MethodBuilder b;
            b.method.sig.name = name;
            b.method.sig.params = split_param_descriptors(
                    decl.substr(lparen + 1, rparen - lparen - 1), ctx);
            b.method.sig.return_type = decl.substr(rparen + 1);
            b.method.flags = name_start == std::string::npos
                    ? ""
                    : trim(decl.substr(0, name_start));
            b.method.is_static =
                    b.method.flags.find("static") != std::string::npos;
            current = std::move(b);
            continue;
        }
        if (starts_with(t, ".end method")) {
            if (!current) {
                throw MalformedSmali("stray .end method at " + ctx);
            }
            finish_method();
            continue;
        }
        if (!current) {
            // Class-level directives we do not model (.source, .field,
            // .implements, .annotation blocks).
            if (starts_with(t, ".annotation")) {
                ++skip_region;
            }
            continue;
        }
        if (starts_with(t, ".registers")) {
            current->method.register_count = std::stoi(trim(t.substr(10)));
            continue;
        }
        if (starts_with(t, ".locals")) {
            current->saw_locals_directive = true;
            current->declared_locals = std::stoi(trim(t.substr(7)));
            continue;
        }
        if (starts_with(t, ".packed-switch") || starts_with(t, ".sparse-switch")
            || starts_with(t, ".array-data") || starts_with(t, ".annotation")) {
            ++skip_region;
            continue;
        }
        if (t[0] == ':') {
            current->labels[t] =
                    static_cast<int>(current->method.instructions.size());
            continue;
        }
        if (t[0] == '.') {
            // .line, .param, .local, .prologue, .catch, ... — not instructions.
            continue;
        }
        Instruction ins;
        try {
            ins = parse_instruction(t, *current, ctx);
        } catch (const MalformedSmali& e) {
            std::cerr << "warning: " << e.what()
                      << "; keeping instruction opaque\n";
            ins = Instruction{};
            ins.raw = t;
            auto sp = t.find_first_of(" \t");
            ins.mnemonic = sp == std::string::npos ? t : t.substr(0, sp);
        }
        if (ins.op == Opcode::goto_branch || ins.op == Opcode::if_branch) {
            current->pending_branches.emplace_back(
                    static_cast<int>(current->method.instructions.size()),
                    ins.literal);
        }
        current->method.instructions.push_back(std::move(ins));
    }
    if (current) {
        throw MalformedSmali("unterminated .method in " + origin);
    }
    if (cls.class_name.empty()) {
        throw MalformedSmali("missing .class header in " + origin);
    }
    return cls;
}

SmaliClass parse_smali_class(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw MalformedSmali("cannot open " + path.string());
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_smali_text(buf.str(), path.string());
}

namespace {

std::string format_register(int reg) {
    return "v" + std::to_string(reg);
}

std::string format_method_ref(const MethodRef& m) {
    return m.owner + "->" + m.name + m.descriptor();
}

std::string format_field_ref(const FieldRef& f) {
    return f.owner + "->" + f.name + ":" + f.type;
}

std::string print_instruction(const Instruction& ins,
                              const std::map<int, std::string>& labels) {
    if (ins.op == Opcode::opaque) {
        return ins.raw;
    }
    std::string out = ins.mnemonic + " ";
    auto regs = [&](std::size_t from, std::size_t to) {
        std::string s;
        for (std::size_t i = from; i < to; ++i) {
            if (i > from) {
                s += ", ";
            }
            s += format_register(ins.registers[i]);
        }
        return s;
    };
    switch (ins.op) {
    case Opcode::const_string:
        out += regs(0, 1) + ", \"" + escape_string_literal(ins.literal) + "\"";
        break;
    case Opcode::const_class:
    case Opcode::new_instance:
        out += regs(0, 1) + ", " + ins.literal;
        break;
    case Opcode::const_int:
        out += regs(0, 1) + ", " + std::to_string(*ins.int_value);
        break;
    case Opcode::invoke_direct:
    case Opcode::invoke_virtual:
    case Opcode::invoke_static:
    case Opcode::invoke_interface:
    case Opcode::invoke_super:
        out += "{" + regs(0, ins.registers.size()) + "}, "
                + format_method_ref(*ins.method);
        break;
    case Opcode::move_result:
    case Opcode::move_result_object:
    case Opcode::return_value:
    case Opcode::return_object:
        out += regs(0, 1);
        break;
    case Opcode::move:
    case Opcode::move_object:
        out += regs(0, 2);
        break;
    case Opcode::iget_object:
    case Opcode::iput_object:
        out += regs(0, 2) + ", " + format_field_ref(*ins.field);
        break;
    case Opcode::sget_object:
    case Opcode::sput_object:
        out += regs(0, 1) + ", " + format_field_ref(*ins.field);
        break;
    case Opcode::return_void:
        return ins.mnemonic;
    case Opcode::goto_branch:
        out += labels.at(ins.branch_target);
        break;
    case Opcode::if_branch:
        out += regs(0, ins.registers.size()) + ", "
                + labels.at(ins.branch_target);
        break;
    case Opcode::opaque:
        break;
    }
    return out;
}

} // namespace

std::string print_method(const SmaliMethod& method) {
    std::map<int, std::string> labels;
    for (const auto& ins : method.instructions) {
        if (ins.branch_target >= 0 && !labels.count(ins.branch_target)) {
            labels[ins.branch_target] =
                    ":L" + std::to_string(ins.branch_target);
        }
    }
    std::ostringstream out;
    out << ".method " << (method.flags.empty() ? "" : method.flags + " ")
        << method.sig.to_string() << "\n";
    out << "    .registers " << method.register_count << "\n";
    for (std::size_t i = 0; i < method.instructions.size(); ++i) {
        auto lbl = labels.find(static_cast<int>(i));
        if (lbl != labels.end()) {
            out << "    " << lbl->second << "\n";
        }
        out << "    " << print_instruction(method.instructions[i], labels)
            << "\n";
    }
    out << ".end method\n";
    return out.str();
}

std::string print_class(const SmaliClass& cls) {
    std::ostringstream out;
    out << ".class public " << dotted_to_descriptor(cls.class_name) << "\n";
    out << ".super " << dotted_to_descriptor(cls.super_name) << "\n\n";
    for (const auto& m : cls.methods) {
        out << print_method(m) << "\n";
    }
    return out.str();
}

bool structurally_equal(const SmaliMethod& a, const SmaliMethod& b) {
    if (a.sig != b.sig || a.register_count != b.register_count
        || a.instructions.size() != b.instructions.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.instructions.size(); ++i) {
        if (!a.instructions[i].structurally_equal(b.instructions[i])) {
            return false;
        }
    }
    return true;
}

} // namespace intentscan
