/*
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>

#include "versa/layout.hpp"
#include "versa/trace.hpp"

namespace versa {

struct MonitorInput {
    Address pc = 0;
    bool r_en = false;
    bool w_en = false;
    Address d_addr = 0;
    bool dma_en = false;
    Address dma_addr = 0;
    bool irq = false;
    Address er_min = 0;
    Address er_max = 0;
    // Machine fault raised by the core in the same cycle.
    bool core_reset = false;

    ErWindow window() const { return {er_min, er_max}; }
    friend bool operator==(const MonitorInput&, const MonitorInput&) = default;
};

inline MonitorInput monitor_input(const StateRecord& r, bool core_reset = false) {
    return {r.pc, r.r_en, r.w_en, r.d_addr, r.dma_en, r.dma_addr, r.irq, r.er_min, r.er_max, core_reset};
}

inline bool read_mem_pred(const Range& m, const MonitorInput& in) {
    return (in.r_en && m.contains(in.d_addr)) || (in.dma_en && m.contains(in.dma_addr));
}
inline bool write_mem_pred(const Range& m, const MonitorInput& in) {
    return (in.w_en && m.contains(in.d_addr)) || (in.dma_en && m.contains(in.dma_addr));
}
inline bool read_mem_pred(const ErWindow& er, const MonitorInput& in) {
    return (in.r_en && er.contains(in.d_addr)) || (in.dma_en && er.contains(in.dma_addr));
}
inline bool write_mem_pred(const ErWindow& er, const MonitorInput& in) {
    return (in.w_en && er.contains(in.d_addr)) || (in.dma_en && er.contains(in.dma_addr));
}

// Everything the FSMs are allowed to look at.
struct Signals {
    bool pc_zero = false;
    bool pc_in_er = false;
    bool pc_eq_ermin = false;
    bool pc_eq_ermax = false;
    bool pc_eq_iauth = false;
    bool pc_in_vr = false;
    bool read_gpio = false;
    bool read_ekr = false;
    bool write_er = false;
    bool write_meta = false;
    bool cpu_write_ekr = false;
    bool dma_ekr = false;
    bool irq = false;
    bool dma = false;
    bool core_reset = false;
};

inline Signals sample(const MemoryLayout& l, const MonitorInput& in) {
    const ErWindow er = in.window();
    Signals s;
    s.pc_zero = in.pc == 0;
    s.pc_in_er = er.contains(in.pc);
    s.pc_eq_ermin = in.pc == in.er_min;
    s.pc_eq_ermax = in.pc == in.er_max;
    s.pc_eq_iauth = in.pc == l.i_auth;
    s.pc_in_vr = l.vr.contains(in.pc);
    s.read_gpio = read_mem_pred(l.gpio, in);
    s.read_ekr = read_mem_pred(l.ekr, in);
    s.write_er = write_mem_pred(er, in);
    s.write_meta = write_mem_pred(l.er_metadata, in);
    s.cpu_write_ekr = in.w_en && l.ekr.contains(in.d_addr);
    s.dma_ekr = in.dma_en && l.ekr.contains(in.dma_addr);
    s.irq = in.irq;
    s.dma = in.dma_en;
    s.core_reset = in.core_reset;
    return s;
}

enum class GpioState : std::uint8_t { Reset, Lock, Unlock };
enum class EkrState : std::uint8_t { Reset, Unlock };
enum class AtomState : std::uint8_t { Reset, NotEr, FirstEr, MidEr, LastEr };

inline const char* state_name(GpioState s) {
    static const char* n[] = {"RESET", "rLOCK", "rUNLOCK"};
    return n[static_cast<int>(s)];
}
inline const char* state_name(EkrState s) {
    static const char* n[] = {"RESET", "wUNLOCK"};
    return n[static_cast<int>(s)];
}
inline const char* state_name(AtomState s) {
    static const char* n[] = {"RESET", "notER", "firstER", "midER", "lastER"};
    return n[static_cast<int>(s)];
}

// Single-guard deletions or weakenings used to show the formula catalogue has teeth.
enum class Mutant : std::uint8_t {
    None,
    GpioNoErGuard,
    GpioLockIgnoresRead,
    GpioUnlockDespiteRead,
    GpioNoRelockAtErmax,
    GpioReadAtErmax,
    GpioNoRelockOnWrite,
    GpioRelockOnAuthWrite,
    EkrReadOutsideEr,
    EkrReadWhileLocked,
    EkrWriteIgnored,
    AtomEntryAnywhere,
    AtomExitAnywhere,
    AtomIgnoresIrq,
    AtomIgnoresDma,
    NoResetPropagation,
};

struct MutantInfo {
    Mutant id;
    std::string_view name;
    std::string_view description;
    bool needs_ekr;
};

inline constexpr std::array<MutantInfo, 15> kMutants = {{
    {Mutant::GpioNoErGuard, "gpio-no-er-guard", "rUNLOCK allows GPIO reads with pc outside ER", false},
    {Mutant::GpioLockIgnoresRead, "gpio-lock-ignores-read", "rLOCK does not reset on GPIO reads", false},
    {Mutant::GpioUnlockDespiteRead, "gpio-unlock-despite-read", "pc = i_auth unlocks even when a read happens in the same cycle", false},
    {Mutant::GpioNoRelockAtErmax, "gpio-no-relock-at-ermax", "reaching er_max does not relock GPIO", false},
    {Mutant::GpioReadAtErmax, "gpio-read-at-ermax", "a read on the er_max cycle is tolerated", false},
    {Mutant::GpioNoRelockOnWrite, "gpio-no-relock-on-write", "ER/METADATA writes in rUNLOCK do not relock", false},
    {Mutant::GpioRelockOnAuthWrite, "gpio-relock-on-auth-write", "figure-faithful corner: a write at pc = i_auth relocks instead of resetting", false},
    {Mutant::EkrReadOutsideEr, "ekr-read-outside-er", "rUNLOCK allows eKR reads with pc outside ER", true},
    {Mutant::EkrReadWhileLocked, "ekr-read-while-locked", "rLOCK does not reset on eKR reads", true},
    {Mutant::EkrWriteIgnored, "ekr-write-ignored", "eKR write FSM never resets", true},
    {Mutant::AtomEntryAnywhere, "atom-entry-anywhere", "ER may be entered at any address", false},
    {Mutant::AtomExitAnywhere, "atom-exit-anywhere", "ER may be left from any address", false},
    {Mutant::AtomIgnoresIrq, "atom-ignores-irq", "interrupts inside ER are tolerated", false},
    {Mutant::AtomIgnoresDma, "atom-ignores-dma", "DMA while pc is in ER is tolerated", false},
    {Mutant::NoResetPropagation, "no-reset-propagation", "the global reset does not force the other FSMs into RESET", false},
}};

inline std::optional<Mutant> mutant_from_name(std::string_view name) {
    if (name == "none") return Mutant::None;
    for (const auto& m : kMutants)
        if (m.name == name) return m.id;
    return std::nullopt;
}

inline std::string_view mutant_name(Mutant id) {
    for (const auto& m : kMutants)
        if (m.id == id) return m.name;
    return "none";
}

struct MonitorConfig {
    bool ekr = true;  // optional eKR properties
    Mutant mutant = Mutant::None;
};

struct MonitorState {
    GpioState gpio = GpioState::Reset;
    EkrState ekr = EkrState::Reset;
    AtomState atom = AtomState::Reset;
    bool global_reset = false;

    unsigned index() const {
        return static_cast<unsigned>(gpio) * 10 + static_cast<unsigned>(ekr) * 5 + static_cast<unsigned>(atom);
    }
    static MonitorState from_index(unsigned i) {
        MonitorState m;
        m.gpio = static_cast<GpioState>(i / 10);
        m.ekr = static_cast<EkrState>((i / 5) % 2);
        m.atom = static_cast<AtomState>(i % 5);
        return m;
    }
    friend bool operator==(const MonitorState&, const MonitorState&) = default;
};
inline constexpr unsigned kMonitorStateCount = 30;

inline std::pair<GpioState, bool> step_gpio_fsm(GpioState st, const Signals& s, const MonitorConfig& cfg) {
    const Mutant mu = cfg.mutant;
    const bool ekr_read = cfg.ekr && s.read_ekr;
    const bool any_read = s.read_gpio || ekr_read;
    const bool writes = s.write_er || s.write_meta;

    auto locked = [&]() -> GpioState {
        if (mu == Mutant::GpioUnlockDespiteRead && s.pc_eq_iauth && !writes) return GpioState::Unlock;
        const bool barred = (s.read_gpio && mu != Mutant::GpioLockIgnoresRead) ||
                            (ekr_read && mu != Mutant::EkrReadWhileLocked);
        if (barred) return GpioState::Reset;
        if (s.pc_eq_iauth) {
            if (!writes) return GpioState::Unlock;
            return mu == Mutant::GpioRelockOnAuthWrite ? GpioState::Lock : GpioState::Reset;
        }
        return GpioState::Lock;
    };

    auto unlocked = [&]() -> GpioState {
        const bool outside = !s.pc_in_er;
        const bool bad = (s.read_gpio && outside && mu != Mutant::GpioNoErGuard) ||
                         (ekr_read && outside && mu != Mutant::EkrReadOutsideEr);
        if (bad) return GpioState::Reset;
        if (writes) {
            if (s.pc_eq_iauth && mu != Mutant::GpioRelockOnAuthWrite) return GpioState::Reset;
            if (mu != Mutant::GpioNoRelockOnWrite) return any_read ? GpioState::Reset : GpioState::Lock;
        }
        if (s.pc_eq_ermax && mu != Mutant::GpioNoRelockAtErmax) {
            if (any_read && mu != Mutant::GpioReadAtErmax) return GpioState::Reset;
            return GpioState::Lock;
        }
        return GpioState::Unlock;
    };

    GpioState next = GpioState::Reset;
    switch (st) {
        case GpioState::Reset: next = s.pc_zero ? locked() : GpioState::Reset; break;
        case GpioState::Lock: next = locked(); break;
        case GpioState::Unlock: next = unlocked(); break;
    }
    return {next, next == GpioState::Reset};
}

inline std::pair<EkrState, bool> step_ekr_write_fsm(EkrState st, const Signals& s, const MonitorConfig& cfg) {
    auto open = [&]() -> EkrState {
        if (!cfg.ekr || cfg.mutant == Mutant::EkrWriteIgnored) return EkrState::Unlock;
        if ((s.cpu_write_ekr && !s.pc_in_vr) || s.dma_ekr) return EkrState::Reset;
        return EkrState::Unlock;
    };
    EkrState next = st == EkrState::Reset ? (s.pc_zero ? open() : EkrState::Reset) : open();
    return {next, next == EkrState::Reset};
}

inline std::pair<AtomState, bool> step_atomicity_fsm(AtomState st, const Signals& s, const MonitorConfig& cfg) {
    const Mutant mu = cfg.mutant;
    enum Cls { Out, Min, Mid, Max, MinMax };
    Cls c = Out;
    if (s.pc_in_er) {
        if (s.pc_eq_ermin && s.pc_eq_ermax) c = MinMax;
        else if (s.pc_eq_ermin) c = Min;
        else if (s.pc_eq_ermax) c = Max;
        else c = Mid;
    }

    auto from = [&](AtomState cur) -> AtomState {
        const bool interrupted = (s.irq && mu != Mutant::AtomIgnoresIrq) || (s.dma && mu != Mutant::AtomIgnoresDma);
        if (c != Out && interrupted) return AtomState::Reset;
        if (cur == AtomState::NotEr) {
            switch (c) {
                case Out: return AtomState::NotEr;
                case Min: return AtomState::FirstEr;
                case MinMax: return AtomState::LastEr;
                case Mid: return mu == Mutant::AtomEntryAnywhere ? AtomState::MidEr : AtomState::Reset;
                case Max: return mu == Mutant::AtomEntryAnywhere ? AtomState::LastEr : AtomState::Reset;
            }
        }
        switch (c) {
            case Out:
                if (cur == AtomState::LastEr || mu == Mutant::AtomExitAnywhere) return AtomState::NotEr;
                return AtomState::Reset;
            case Min: return AtomState::FirstEr;
            case Mid: return AtomState::MidEr;
            case Max: case MinMax: return AtomState::LastEr;
        }
        return AtomState::Reset;
    };

    AtomState next = st == AtomState::Reset ? (s.pc_zero ? from(AtomState::NotEr) : AtomState::Reset) : from(st);
    return {next, next == AtomState::Reset};
}

struct MonitorStep {
    MonitorState next;
    bool reset = false;          // global reset, including core faults
    bool monitor_reset = false;  // OR of the three local resets
};

inline MonitorStep monitor_step(const MonitorState& m, const Signals& s, const MonitorConfig& cfg) {
    auto [g, gr] = step_gpio_fsm(m.gpio, s, cfg);
    auto [e, er] = step_ekr_write_fsm(m.ekr, s, cfg);
    auto [a, ar] = step_atomicity_fsm(m.atom, s, cfg);
    MonitorStep out;
    out.monitor_reset = gr || er || ar;
    out.reset = out.monitor_reset || s.core_reset;
    if (out.reset && cfg.mutant != Mutant::NoResetPropagation) {
        g = GpioState::Reset;
        e = EkrState::Reset;
        a = AtomState::Reset;
    }
    out.next = MonitorState{g, e, a, out.reset};
    return out;
}

inline MonitorStep monitor_step(const MonitorState& m, const MonitorInput& in, const MemoryLayout& l,
                                const MonitorConfig& cfg = {}) {
    return monitor_step(m, sample(l, in), cfg);
}

}  // namespace versa
