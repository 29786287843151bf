/*
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "versa/crypto.hpp"
#include "versa/error.hpp"
#include "versa/layout.hpp"
#include "versa/machine.hpp"
#include "versa/monitor.hpp"
#include "versa/protocol.hpp"
#include "versa/trace.hpp"

namespace versa {

struct SimConfig {
    MemoryLayout layout = default_layout();
    MonitorConfig monitor;
    // false: the monitor observes but never resets (shadow run); machine faults still reset.
    bool enforce = true;
    // Records allowed after the first reset of a run before it stops as a reset sink.
    std::uint64_t post_reset_records = 1;
};

struct RunResult {
    Terminal terminal = Terminal::CycleLimit;
    std::size_t begin = 0;
    std::size_t end = 0;
};

struct SensingOutcome {
    bool result = false;
    RunResult run;
};

class Simulator {
public:
    Simulator(SimConfig cfg, const Key& key, MachineState initial)
        : machine(std::move(initial)), cfg_(std::move(cfg)), key_(key) {}
    Simulator(SimConfig cfg, const Key& key) : Simulator(cfg, key, MachineState{}) {
        machine.pc = cfg_.layout.boot_entry;
    }

    MachineState machine;
    MonitorState monitor;
    std::vector<StateRecord> records;
    SensorFn sensor;
    std::function<void(const Simulator&)> on_reset;  // called right after reset_routine
    std::function<void(const Simulator&, const StateRecord&)> on_record;  // after commit or reset

    const SimConfig& config() const { return cfg_; }
    const MemoryLayout& layout() const { return cfg_.layout; }
    ErWindow window() const { return live_window(machine, cfg_.layout); }
    std::uint64_t stored_counter() const { return read_counter(machine, cfg_.layout); }
    std::uint64_t resets() const { return resets_; }
    std::size_t last_verify_records() const { return last_verify_records_; }

    void schedule_dma(const DmaRequest& d) {
        if (!dma_.emplace(d.at_cycle, d).second)
            throw ConfigError("two DMA requests at cycle " + std::to_string(d.at_cycle));
    }
    void schedule_irq(std::uint64_t cycle) { irq_.insert(cycle); }

    // One CPU cycle; reaching the VR entry runs the whole Verify fragment.
    void step() {
        if (!machine.boot_pending && machine.pc == cfg_.layout.vr_entry()) {
            run_verify(true);
            return;
        }
        auto dma = take_dma();
        const bool irq = take_irq();
        StepResult s = exec_step(machine, cfg_.layout, dma, irq, sensor);
        emit(s.record, s.writes, s.fault, false);
    }

    RunResult run(std::uint64_t max_records) {
        RunResult r;
        r.begin = records.size();
        std::optional<std::size_t> reset_at;
        auto sink_reached = [&] {
            return reset_at && records.size() - *reset_at - 1 >= cfg_.post_reset_records;
        };
        while (records.size() - r.begin < max_records && !machine.halted && !sink_reached()) {
            const std::size_t before = records.size();
            step();
            for (std::size_t i = before; !reset_at && i < records.size(); ++i)
                if (records[i].reset) reset_at = i;
        }
        r.end = records.size();
        if (sink_reached()) r.terminal = Terminal::ResetSink;
        else if (machine.halted) r.terminal = Terminal::Halted;
        else r.terminal = Terminal::CycleLimit;
        return r;
    }

    // Untrusted loader: each word of METADATA, ER and the mailbox is stored by code at boot_entry.
    void install(const AuthorizationMessage& msg, const ErWindow& er) {
        const auto& l = cfg_.layout;
        validate_window(l, er);
        if (er.contains(l.boot_entry)) throw ConfigError("ER window contains boot_entry");
        Bytes padded = pad_to_window(msg.binary, er.size_bytes());
        Bytes staged;
        put_be64(staged, msg.chal);
        staged.insert(staged.end(), msg.token.begin(), msg.token.end());

        store(l.er_min_cell(), er.er_min);
        store(l.er_max_cell(), er.er_max);
        for (std::size_t i = 0; i < padded.size(); i += 2)
            store(static_cast<Address>(er.er_min + i), static_cast<Word>(padded[i] | (padded[i + 1] << 8)));
        for (std::size_t i = 0; i < staged.size(); i += 2)
            store(static_cast<Address>(l.atok_mailbox.lo + i), static_cast<Word>(staged[i] | (staged[i + 1] << 8)));
    }

    bool verify() {
        boot_if_pending();
        if (machine.boot_pending) return false;
        return run_verify(false);
    }

    SensingOutcome xsensing(std::uint64_t max_records) {
        SensingOutcome out;
        const std::size_t begin = records.size();
        boot_if_pending();
        machine.halted = false;
        const ErWindow w = window();
        if (machine.boot_pending || !window_valid(cfg_.layout, w)) {
            out.run = {Terminal::CycleLimit, begin, records.size()};
            return out;
        }
        machine.pc = w.er_min;
        out.run = run(max_records);
        out.run.begin = begin;
        for (std::size_t i = begin; i < out.run.end; ++i)
            if (records[i].has(TagKind::Read, Region::Gpio) && !records[i].reset) out.result = true;
        return out;
    }

    Trace trace(Terminal t) const { return {records, t}; }

private:
    SimConfig cfg_;
    Key key_;
    std::map<std::uint64_t, DmaRequest> dma_;
    std::set<std::uint64_t> irq_;
    std::uint64_t resets_ = 0;
    std::size_t last_verify_records_ = 0;

    std::optional<DmaRequest> take_dma() {
        auto it = dma_.find(machine.cycle);
        if (it == dma_.end()) return std::nullopt;
        DmaRequest d = it->second;
        dma_.erase(it);
        return d;
    }
    bool take_irq() { return irq_.erase(machine.cycle) > 0; }

    void boot_if_pending() {
        for (int i = 0; i < 4 && machine.boot_pending; ++i) step();
    }

    bool emit(StateRecord rec, const std::vector<PendingWrite>& writes, bool core_fault, bool from_vr) {
        const auto& l = cfg_.layout;
        MonitorStep ms = monitor_step(monitor, monitor_input(rec, core_fault), l, cfg_.monitor);
        const bool monitor_reset = cfg_.enforce && ms.monitor_reset;
        rec.reset = monitor_reset || core_fault;
        rec.reset_source = static_cast<std::uint8_t>((monitor_reset ? kResetMonitor : 0) | (core_fault ? kResetCore : 0));
        rec.tags = compute_tags(rec, l);
        monitor = ms.next;
        machine.reset = rec.reset;
        records.push_back(rec);
        if (rec.reset) {
            reset_routine(machine, l);
            ++resets_;
            if (on_reset) on_reset(*this);
        } else {
            commit(machine, l, writes, from_vr);
        }
        if (on_record) on_record(*this, records.back());
        return rec.reset;
    }

    // A record whose address phase is produced natively (loader or Verify).
    bool native_record(Address pc, bool r, bool w, Address a, std::vector<PendingWrite> writes, bool from_vr,
                       bool defer_irq) {
        StepResult s;
        detail::begin_record(s, machine, cfg_.layout);
        detail::service_dma(s, machine, cfg_.layout, take_dma(), sensor);
        bool fault = false;
        if (take_irq()) {
            if (defer_irq) machine.irq_pending = true;
            else s.record.irq = fault = true;
        }
        if (from_vr && s.record.dma_en) fault = true;
        s.record.pc = pc;
        s.record.exec = pc;
        s.record.r_en = r;
        s.record.w_en = w;
        s.record.d_addr = a;
        s.writes.insert(s.writes.end(), writes.begin(), writes.end());
        detail::finish_signals(s, machine);
        return !emit(s.record, s.writes, fault, from_vr);
    }

    void store(Address a, Word v) {
        boot_if_pending();
        native_record(cfg_.layout.boot_entry, false, true, a, {{a, v}}, false, true);
    }

    bool run_verify(bool via_call) {
        const auto& l = cfg_.layout;
        const std::size_t first = records.size();
        Address cursor = l.vr.lo;
        auto vr_pc = [&] {
            const Address p = cursor;
            cursor = cursor + 2u > l.vr.hi ? l.vr.lo : static_cast<Address>(cursor + 2);
            return p;
        };
        auto read = [&](Address a) { return native_record(vr_pc(), true, false, a, {}, true, false); };
        auto idle = [&] { return native_record(vr_pc(), false, false, 0, {}, true, false); };
        auto done = [&](bool ok) {
            last_verify_records_ = records.size() - first;
            return ok;
        };

        // Exit record: returns to the caller, popping the return address for a CALL.
        auto leave = [&](Address pc, bool ok) {
            const Address resume = machine.pc;
            bool fault = false;
            Address next = resume;
            StepResult s;
            detail::begin_record(s, machine, cfg_.layout);
            detail::service_dma(s, machine, cfg_.layout, take_dma(), sensor);
            if (take_irq()) s.record.irq = fault = true;
            if (s.record.dma_en) fault = true;
            s.record.pc = pc;
            s.record.exec = pc;
            if (via_call) {
                s.record.r_en = true;
                s.record.d_addr = machine.sp;
                next = machine.read_word(machine.sp);
                if ((machine.sp & 1) || (next & 1) || (l.rom.contains(next) && next != l.vr_entry())) fault = true;
            }
            detail::finish_signals(s, machine);
            if (emit(s.record, s.writes, fault, true)) return done(false);
            if (via_call) machine.sp = static_cast<Address>(machine.sp + 2);
            machine.pc = next;
            machine.gpr[0] = ok ? 1 : 0;
            return done(ok);
        };

        for (Address a = l.atok_mailbox.lo; a < l.atok_mailbox.lo + 40; a += 2)
            if (!read(a)) return done(false);
        if (!read(l.er_min_cell()) || !read(l.er_max_cell())) return done(false);
        for (Address a = l.counter_cell.lo; a < l.counter_cell.lo + 8; a += 2)
            if (!read(a)) return done(false);

        const std::uint64_t chal = get_be64(&machine.memory[l.atok_mailbox.lo]);
        const ErWindow er = window();
        if (chal <= stored_counter() || !window_valid(l, er)) return leave(vr_pc(), false);

        for (std::uint32_t a = er.er_min; a <= er.er_max; a += 2)
            if (!read(static_cast<Address>(a))) return done(false);
        const std::size_t blocks = (er.size_bytes() + 63) / 64;
        for (std::size_t i = 0; i < 4 * blocks; ++i)
            if (!idle()) return done(false);

        const auto* mem = machine.memory.data();
        const Digest sigma = hmac_sha256(kdf(key_, chal, kLabelAuth),
                                         std::span<const std::uint8_t>(mem + er.er_min, er.size_bytes()));
        if (!digest_equal(sigma, std::span<const std::uint8_t>(mem + l.atok_mailbox.lo + 8, 32)))
            return leave(vr_pc(), false);

        const Bytes pad = keystream(kdf(key_, chal, kLabelEnc), l.ekr.size());
        for (std::size_t i = 0; i + 1 < pad.size(); i += 2) {
            const Address a = static_cast<Address>(l.ekr.lo + i);
            if (!native_record(vr_pc(), false, true, a, {{a, static_cast<Word>(pad[i] | (pad[i + 1] << 8))}}, true,
                               false))
                return done(false);
        }
        // The counter is committed as one 8-byte update with its last word, so an interrupted
        // update can never leave a smaller value behind.
        std::vector<PendingWrite> counter;
        for (unsigned i = 0; i < 4; ++i)
            counter.push_back({static_cast<Address>(l.counter_cell.lo + 2 * i), static_cast<Word>(chal >> (16 * i))});
        for (unsigned i = 0; i < 4; ++i) {
            std::vector<PendingWrite> w;
            if (i == 3) w = counter;
            if (!native_record(vr_pc(), false, true, counter[i].addr, w, true, false)) return done(false);
        }
        return leave(l.i_auth, true);
    }
};

}  // namespace versa
