/*
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "versa/layout.hpp"

namespace versa {

enum class TagKind : std::uint8_t { Read, Write, DmaR, DmaW };

inline constexpr std::uint64_t tag_bit(TagKind k, Region r) {
    return std::uint64_t{1} << (static_cast<unsigned>(k) * 16 + static_cast<unsigned>(r));
}
inline constexpr std::uint64_t kTagIrq = std::uint64_t{1} << 62;
inline constexpr std::uint64_t kTagReset = std::uint64_t{1} << 63;

// Which side asserted a reset. Machine faults come from the core, policy violations from the monitor.
enum ResetSource : std::uint8_t { kResetNone = 0, kResetMonitor = 1, kResetCore = 2 };

struct StateRecord {
    std::uint64_t cycle = 0;
    Address pc = 0;
    bool r_en = false;
    bool w_en = false;
    Address d_addr = 0;
    bool dma_en = false;
    bool dma_write = false;
    Address dma_addr = 0;
    bool irq = false;
    bool reset = false;
    std::uint8_t reset_source = kResetNone;
    // Window sampled from METADATA at the start of the cycle.
    Address er_min = 0;
    Address er_max = 0;
    std::optional<Address> exec;
    std::uint64_t tags = 0;

    ErWindow window() const { return {er_min, er_max}; }
    bool has(TagKind k, Region r) const { return (tags & tag_bit(k, r)) != 0; }
    bool has_irq_tag() const { return (tags & kTagIrq) != 0; }
    bool has_reset_tag() const { return (tags & kTagReset) != 0; }
    friend bool operator==(const StateRecord&, const StateRecord&) = default;
};

inline std::uint64_t compute_tags(const StateRecord& r, const MemoryLayout& l) {
    std::uint64_t t = 0;
    const ErWindow er = r.window();
    for (Region reg : kAllRegions) {
        if (r.r_en && l.in_region(reg, r.d_addr, er)) t |= tag_bit(TagKind::Read, reg);
        if (r.w_en && l.in_region(reg, r.d_addr, er)) t |= tag_bit(TagKind::Write, reg);
        if (r.dma_en && l.in_region(reg, r.dma_addr, er))
            t |= tag_bit(r.dma_write ? TagKind::DmaW : TagKind::DmaR, reg);
    }
    if (r.irq) t |= kTagIrq;
    if (r.reset) t |= kTagReset;
    return t;
}

enum class Terminal : std::uint8_t { Halted, ResetSink, CycleLimit };

inline const char* terminal_name(Terminal t) {
    switch (t) {
        case Terminal::Halted: return "halted";
        case Terminal::ResetSink: return "reset-sink";
        case Terminal::CycleLimit: return "cycle-limit";
    }
    return "?";
}

struct Trace {
    std::vector<StateRecord> records;
    Terminal terminal = Terminal::CycleLimit;
};

inline std::string tag_list(std::uint64_t tags) {
    static const char* kinds[] = {"READ", "WRITE", "DMA_R", "DMA_W"};
    std::string out;
    for (unsigned k = 0; k < 4; ++k)
        for (Region reg : kAllRegions)
            if (tags & tag_bit(static_cast<TagKind>(k), reg)) {
                if (!out.empty()) out += ',';
                out += kinds[k];
                out += '(';
                out += region_name(reg);
                out += ')';
            }
    if (tags & kTagIrq) out += out.empty() ? "IRQ" : ",IRQ";
    if (tags & kTagReset) out += out.empty() ? "RESET" : ",RESET";
    return out.empty() ? "-" : out;
}

// cycle <TAB> pc <TAB> signal bits <TAB> tag list
inline std::string dump_record(const StateRecord& r) {
    using detail::hex16;
    std::string s = std::to_string(r.cycle);
    s += '\t';
    s += hex16(r.pc);
    s += "\tr=";
    s += r.r_en ? '1' : '0';
    s += " w=";
    s += r.w_en ? '1' : '0';
    s += " d=" + hex16(r.d_addr);
    s += " dma=";
    s += r.dma_en ? (r.dma_write ? 'W' : 'R') : '0';
    s += " da=" + hex16(r.dma_addr);
    s += " irq=";
    s += r.irq ? '1' : '0';
    s += " rst=";
    if (!r.reset) s += '0';
    else {
        s += "1:";
        if (r.reset_source & kResetMonitor) s += 'M';
        if (r.reset_source & kResetCore) s += 'C';
    }
    s += " er=" + hex16(r.er_min) + ":" + hex16(r.er_max);
    s += " x=" + (r.exec ? hex16(*r.exec) : std::string("-"));
    s += '\t';
    s += tag_list(r.tags);
    return s;
}

inline std::string dump_trace(const std::vector<StateRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        out += dump_record(r);
        out += '\n';
    }
    return out;
}

inline std::string dump_trace(const Trace& t) {
    return dump_trace(t.records) + "# terminal " + terminal_name(t.terminal) + "\n";
}

}  // namespace versa
