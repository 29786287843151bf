/*
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "versa/error.hpp"
#include "versa/layout.hpp"

namespace versa {

enum class Opcode : std::uint8_t { NOP, LOADI, LOAD, STORE, ADD, SUB, AND, JMP, BRZ, CALL, RET, HALT };
inline constexpr unsigned kOpcodeCount = 12;
inline constexpr std::uint8_t kSP = 8;  // register index of the stack pointer

inline const char* opcode_name(Opcode op) {
    static const char* names[] = {"NOP", "LOADI", "LOAD", "STORE", "ADD", "SUB",
                                  "AND", "JMP",   "BRZ",  "CALL",  "RET", "HALT"};
    return names[static_cast<unsigned>(op)];
}

inline bool has_immediate(Opcode op) {
    switch (op) {
        case Opcode::LOADI: case Opcode::LOAD: case Opcode::STORE:
        case Opcode::JMP: case Opcode::BRZ: case Opcode::CALL:
            return true;
        default:
            return false;
    }
}

struct Instruction {
    Opcode op = Opcode::NOP;
    std::uint8_t rd = 0;
    std::uint8_t rs = 0;
    bool indexed = false;
    Word imm = 0;

    unsigned words() const { return has_immediate(op) ? 2 : 1; }
    friend bool operator==(const Instruction&, const Instruction&) = default;
};

namespace detail {

struct FieldUse {
    bool rd, rs, indexable;
};

inline FieldUse field_use(Opcode op) {
    switch (op) {
        case Opcode::LOADI: return {true, false, false};
        case Opcode::LOAD: case Opcode::STORE: return {true, false, true};
        case Opcode::ADD: case Opcode::SUB: case Opcode::AND: return {true, true, false};
        case Opcode::JMP: case Opcode::CALL: return {false, false, true};
        case Opcode::BRZ: return {false, true, false};
        default: return {false, false, false};
    }
}

}  // namespace detail

inline std::vector<Word> encode(const Instruction& i) {
    auto use = detail::field_use(i.op);
    if ((use.rd && i.rd > kSP) || ((use.rs || i.indexed) && i.rs > kSP))
        throw ConfigError("register index out of range");
    if (i.indexed && !use.indexable) throw ConfigError(std::string(opcode_name(i.op)) + " has no indexed form");
    Word w0 = static_cast<Word>(static_cast<unsigned>(i.op) << 12);
    if (use.rd) w0 |= static_cast<Word>(i.rd << 8);
    if (use.rs || i.indexed) w0 |= static_cast<Word>(i.rs << 4);
    if (i.indexed) w0 |= 0x8;
    std::vector<Word> out{w0};
    if (has_immediate(i.op)) out.push_back(i.imm);
    return out;
}

// Strict decode: every field an opcode does not use must be zero.
inline std::optional<Instruction> decode(Word w0, Word w1) {
    unsigned opv = w0 >> 12;
    if (opv >= kOpcodeCount) return std::nullopt;
    Instruction i;
    i.op = static_cast<Opcode>(opv);
    auto use = detail::field_use(i.op);
    unsigned rd = (w0 >> 8) & 0xF, rs = (w0 >> 4) & 0xF;
    bool indexed = (w0 & 0x8) != 0;
    if (w0 & 0x7) return std::nullopt;
    if (indexed && !use.indexable) return std::nullopt;
    if (!use.rd && rd != 0) return std::nullopt;
    if (!(use.rs || indexed) && rs != 0) return std::nullopt;
    if (rd > kSP || rs > kSP) return std::nullopt;
    i.rd = static_cast<std::uint8_t>(rd);
    i.rs = static_cast<std::uint8_t>(rs);
    i.indexed = indexed;
    if (has_immediate(i.op)) i.imm = w1;
    return i;
}

inline std::string to_string(const Instruction& i) {
    auto reg = [](unsigned r) { return r == kSP ? std::string("sp") : "r" + std::to_string(r); };
    auto addr = [&]() {
        std::string a = detail::hex16(i.imm);
        return i.indexed ? "[" + reg(i.rs) + "+" + a + "]" : "[" + a + "]";
    };
    std::string s = opcode_name(i.op);
    switch (i.op) {
        case Opcode::LOADI: return s + " " + reg(i.rd) + ", " + detail::hex16(i.imm);
        case Opcode::LOAD: return s + " " + reg(i.rd) + ", " + addr();
        case Opcode::STORE: return s + " " + addr() + ", " + reg(i.rd);
        case Opcode::ADD: case Opcode::SUB: case Opcode::AND: return s + " " + reg(i.rd) + ", " + reg(i.rs);
        case Opcode::JMP: case Opcode::CALL: return s + " " + (i.indexed ? addr() : detail::hex16(i.imm));
        case Opcode::BRZ: return s + " " + reg(i.rs) + ", " + detail::hex16(i.imm);
        default: return s;
    }
}

// Two-pass builder for mini-ISA programs with symbolic labels.
class Assembler {
public:
    struct Target {
        Target(int a) : addr(static_cast<Address>(a)) {}
        Target(unsigned a) : addr(static_cast<Address>(a)) {}
        Target(const char* l) : label(l) {}
        Target(std::string l) : label(std::move(l)) {}
        std::optional<Address> addr;
        std::string label;
    };

    explicit Assembler(Address origin) : origin_(origin) {}

    Address origin() const { return origin_; }
    Address here() const { return static_cast<Address>(origin_ + 2 * words_.size()); }

    Assembler& label(const std::string& name) {
        if (labels_.count(name)) throw ConfigError("duplicate label " + name);
        labels_[name] = here();
        return *this;
    }
    Assembler& emit(const Instruction& i, std::optional<std::string> imm_label = std::nullopt) {
        auto ws = encode(i);
        if (imm_label) fixups_.push_back({words_.size() + 1, *imm_label});
        words_.insert(words_.end(), ws.begin(), ws.end());
        return *this;
    }
    Assembler& word(Word w) {
        words_.push_back(w);
        return *this;
    }

    Assembler& nop() { return emit({Opcode::NOP}); }
    Assembler& halt() { return emit({Opcode::HALT}); }
    Assembler& ret() { return emit({Opcode::RET}); }
    Assembler& loadi(std::uint8_t rd, Target v) { return with_target({Opcode::LOADI, rd}, v); }
    Assembler& load(std::uint8_t rd, Target a) { return with_target({Opcode::LOAD, rd}, a); }
    Assembler& load_idx(std::uint8_t rd, std::uint8_t base, Target a) {
        return with_target({Opcode::LOAD, rd, base, true}, a);
    }
    Assembler& store(Target a, std::uint8_t src) { return with_target({Opcode::STORE, src}, a); }
    Assembler& store_idx(std::uint8_t base, Target a, std::uint8_t src) {
        return with_target({Opcode::STORE, src, base, true}, a);
    }
    Assembler& add(std::uint8_t rd, std::uint8_t rs) { return emit({Opcode::ADD, rd, rs}); }
    Assembler& sub(std::uint8_t rd, std::uint8_t rs) { return emit({Opcode::SUB, rd, rs}); }
    Assembler& and_(std::uint8_t rd, std::uint8_t rs) { return emit({Opcode::AND, rd, rs}); }
    Assembler& jmp(Target t) { return with_target({Opcode::JMP}, t); }
    Assembler& brz(std::uint8_t rs, Target t) { return with_target({Opcode::BRZ, 0, rs}, t); }
    Assembler& call(Target t) { return with_target({Opcode::CALL}, t); }

    // Little-endian image starting at origin().
    std::vector<std::uint8_t> bytes() const {
        std::vector<Word> ws = words_;
        for (const auto& f : fixups_) {
            auto it = labels_.find(f.label);
            if (it == labels_.end()) throw ConfigError("undefined label " + f.label);
            ws[f.index] = it->second;
        }
        std::vector<std::uint8_t> out;
        out.reserve(ws.size() * 2);
        for (Word w : ws) {
            out.push_back(static_cast<std::uint8_t>(w & 0xFF));
            out.push_back(static_cast<std::uint8_t>(w >> 8));
        }
        return out;
    }

    Address address_of(const std::string& name) const {
        auto it = labels_.find(name);
        if (it == labels_.end()) throw ConfigError("undefined label " + name);
        return it->second;
    }

private:
    struct Fixup {
        std::size_t index;
        std::string label;
    };

    Assembler& with_target(Instruction i, const Target& t) {
        if (t.addr) {
            i.imm = *t.addr;
            return emit(i);
        }
        return emit(i, t.label);
    }

    Address origin_;
    std::vector<Word> words_;
    std::map<std::string, Address> labels_;
    std::vector<Fixup> fixups_;
};

}  // namespace versa
