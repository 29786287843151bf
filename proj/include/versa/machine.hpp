/*
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "versa/error.hpp"
#include "versa/isa.hpp"
#include "versa/layout.hpp"
#include "versa/trace.hpp"

namespace versa {

struct DmaRequest {
    enum class Op : std::uint8_t { Read, Write };
    std::uint64_t at_cycle = 0;
    Op op = Op::Read;
    Address addr = 0;
    Word value = 0;
    friend bool operator==(const DmaRequest&, const DmaRequest&) = default;
};

// GPIO sample for (address, cycle).
using SensorFn = std::function<Word(Address, std::uint64_t)>;

struct MachineState {
    Address pc = 0;
    Address sp = 0;
    std::array<Word, 8> gpr{};
    std::vector<std::uint8_t> memory = std::vector<std::uint8_t>(kMemorySize, 0);
    bool r_en = false;
    bool w_en = false;
    Address d_addr = 0;
    bool dma_en = false;
    Address dma_addr = 0;
    bool irq = false;
    bool reset = false;
    bool halted = false;
    std::uint64_t cycle = 0;

    // Next record is the pc = 0 boot cycle that follows power-on or a reset.
    bool boot_pending = true;
    bool irq_pending = false;
    // Where DMA reads land; the adversary's view of anything it snoops.
    Word dma_latch = 0;
    Address gpio_out_addr = 0;
    Word gpio_out = 0;

    Word read_word(Address a) const { return static_cast<Word>(memory[a] | (memory[(a + 1) & 0xFFFF] << 8)); }
    void write_word(Address a, Word v) {
        memory[a] = static_cast<std::uint8_t>(v & 0xFF);
        memory[(a + 1) & 0xFFFF] = static_cast<std::uint8_t>(v >> 8);
    }
    Word reg(std::uint8_t r) const { return r == kSP ? sp : gpr[r]; }
    void set_reg(std::uint8_t r, Word v) {
        if (r == kSP) sp = v;
        else gpr[r] = v;
    }
};

struct PendingWrite {
    Address addr = 0;
    Word value = 0;
};

struct StepResult {
    StateRecord record;
    std::vector<PendingWrite> writes;  // committed only if the cycle does not reset
    bool fault = false;                // machine fault: the core asserts reset
};

inline ErWindow live_window(const MachineState& s, const MemoryLayout& l) {
    return {s.read_word(l.er_min_cell()), s.read_word(l.er_max_cell())};
}

inline std::uint64_t read_counter(const MachineState& s, const MemoryLayout& l) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | s.memory[l.counter_cell.lo + i];
    return v;
}

inline void write_counter(MachineState& s, const MemoryLayout& l, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) s.memory[l.counter_cell.lo + i] = static_cast<std::uint8_t>(v >> (8 * i));
}

inline Word data_read(const MachineState& s, const MemoryLayout& l, Address a, const SensorFn& sensor) {
    if (l.gpio.contains(a)) return sensor ? sensor(a, s.cycle) : 0;
    return s.read_word(a);
}

// ROM and the counter are write-protected; only native Verify may update the counter.
inline void commit(MachineState& s, const MemoryLayout& l, std::span<const PendingWrite> writes, bool from_vr = false) {
    for (const auto& w : writes) {
        if (l.rom.contains(w.addr)) continue;
        if (l.counter_cell.contains(w.addr) && !from_vr) continue;
        if (l.gpio.contains(w.addr)) {
            s.gpio_out_addr = w.addr;
            s.gpio_out = w.value;
            continue;
        }
        s.write_word(w.addr, w.value);
    }
}

inline void reset_routine(MachineState& s, const MemoryLayout& l) {
    s.gpr.fill(0);
    s.sp = 0;
    s.dma_latch = 0;
    s.gpio_out = 0;
    s.gpio_out_addr = 0;
    std::fill(s.memory.begin() + l.dmem.lo, s.memory.begin() + l.dmem.hi + 1, 0);
    std::fill(s.memory.begin() + l.ekr.lo, s.memory.begin() + l.ekr.hi + 1, 0);
    s.r_en = s.w_en = s.dma_en = s.irq = false;
    s.d_addr = s.dma_addr = 0;
    s.halted = false;
    s.irq_pending = false;
    s.reset = false;
    s.boot_pending = true;
    s.pc = l.boot_entry;
}

inline MachineState load_image(const MemoryLayout& l, std::span<const std::uint8_t> image, const ErWindow& er) {
    l.validate();
    if (image.size() > kMemorySize) throw ConfigError("image larger than 64 KB");
    validate_window(l, er);
    for (std::size_t a = l.rom.lo; a <= l.rom.hi && a < image.size(); ++a)
        if (image[a] != 0) throw ConfigError("image writes into rom at " + detail::hex16(static_cast<Address>(a)));
    MachineState s;
    std::copy(image.begin(), image.end(), s.memory.begin());
    s.write_word(l.er_min_cell(), er.er_min);
    s.write_word(l.er_max_cell(), er.er_max);
    s.pc = l.boot_entry;
    s.boot_pending = true;
    return s;
}

namespace detail {

inline void begin_record(StepResult& out, const MachineState& s, const MemoryLayout& l) {
    out.record.cycle = s.cycle;
    ErWindow w = live_window(s, l);
    out.record.er_min = w.er_min;
    out.record.er_max = w.er_max;
}

inline void service_dma(StepResult& out, MachineState& s, const MemoryLayout& l, const std::optional<DmaRequest>& dma,
                        const SensorFn& sensor) {
    if (!dma) return;
    const Address a = static_cast<Address>(dma->addr & 0xFFFE);
    out.record.dma_en = true;
    out.record.dma_addr = a;
    out.record.dma_write = dma->op == DmaRequest::Op::Write;
    if (out.record.dma_write) out.writes.push_back({a, dma->value});
    else s.dma_latch = data_read(s, l, a, sensor);
}

inline void finish_signals(StepResult& out, MachineState& s) {
    const auto& r = out.record;
    s.r_en = r.r_en;
    s.w_en = r.w_en;
    s.d_addr = r.d_addr;
    s.dma_en = r.dma_en;
    s.dma_addr = r.dma_addr;
    s.irq = r.irq;
    ++s.cycle;
}

}  // namespace detail

// One cycle. A boot record is produced first after power-on or a reset. The caller runs the
// monitor on the record, then either commits the pending writes or runs reset_routine.
inline StepResult exec_step(MachineState& s, const MemoryLayout& l, const std::optional<DmaRequest>& dma, bool irq_line,
                            const SensorFn& sensor) {
    if (s.halted) throw Error("exec_step on a halted machine");
    StepResult out;
    detail::begin_record(out, s, l);
    detail::service_dma(out, s, l, dma, sensor);
    StateRecord& rec = out.record;

    if (s.boot_pending) {
        rec.pc = 0;
        s.boot_pending = false;
        s.pc = l.boot_entry;
        s.irq_pending = s.irq_pending || irq_line;
        detail::finish_signals(out, s);
        return out;
    }

    rec.pc = s.pc;
    auto fault = [&]() -> StepResult& {
        out.fault = true;
        detail::finish_signals(out, s);
        return out;
    };
    auto transfer = [&](std::uint32_t target) {
        target &= 0xFFFF;
        if ((target & 1) || (l.rom.contains(target) && target != l.vr_entry())) return false;
        s.pc = static_cast<Address>(target);
        return true;
    };

    if (irq_line || s.irq_pending) {
        s.irq_pending = false;
        rec.irq = true;
        const Address slot = static_cast<Address>(s.sp - 2);
        if (slot & 1) return fault();
        rec.w_en = true;
        rec.d_addr = slot;
        out.writes.push_back({slot, s.pc});
        s.sp = slot;
        if (!transfer(l.irq_vector)) return fault();
        detail::finish_signals(out, s);
        return out;
    }

    if ((s.pc & 1) || l.rom.contains(s.pc)) return fault();
    auto decoded = decode(s.read_word(s.pc), s.read_word(static_cast<Address>(s.pc + 2)));
    if (!decoded) return fault();
    const Instruction ins = *decoded;
    rec.exec = s.pc;
    const std::uint32_t fallthrough = s.pc + 2u * ins.words();
    auto ea = [&]() -> Address {
        return static_cast<Address>(ins.imm + (ins.indexed ? s.reg(ins.rs) : 0));
    };

    std::uint32_t next = fallthrough;
    switch (ins.op) {
        case Opcode::NOP: break;
        case Opcode::HALT:
            s.halted = true;
            next = s.pc;
            break;
        case Opcode::LOADI: s.set_reg(ins.rd, ins.imm); break;
        case Opcode::LOAD: {
            const Address a = ea();
            if (a & 1) return fault();
            rec.r_en = true;
            rec.d_addr = a;
            s.set_reg(ins.rd, data_read(s, l, a, sensor));
            break;
        }
        case Opcode::STORE: {
            const Address a = ea();
            if (a & 1) return fault();
            rec.w_en = true;
            rec.d_addr = a;
            out.writes.push_back({a, s.reg(ins.rd)});
            break;
        }
        case Opcode::ADD: s.set_reg(ins.rd, static_cast<Word>(s.reg(ins.rd) + s.reg(ins.rs))); break;
        case Opcode::SUB: s.set_reg(ins.rd, static_cast<Word>(s.reg(ins.rd) - s.reg(ins.rs))); break;
        case Opcode::AND: s.set_reg(ins.rd, static_cast<Word>(s.reg(ins.rd) & s.reg(ins.rs))); break;
        case Opcode::JMP: next = ea(); break;
        case Opcode::BRZ:
            if (s.reg(ins.rs) == 0) next = ins.imm;
            break;
        case Opcode::CALL: {
            const Address slot = static_cast<Address>(s.sp - 2);
            if (slot & 1) return fault();
            rec.w_en = true;
            rec.d_addr = slot;
            out.writes.push_back({slot, static_cast<Word>(fallthrough)});
            s.sp = slot;
            next = ea();
            break;
        }
        case Opcode::RET: {
            if (s.sp & 1) return fault();
            rec.r_en = true;
            rec.d_addr = s.sp;
            next = s.read_word(s.sp);
            s.sp = static_cast<Address>(s.sp + 2);
            break;
        }
    }
    if (!s.halted && !transfer(next)) return fault();
    detail::finish_signals(out, s);
    return out;
}

}  // namespace versa
