/*
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "versa/crypto.hpp"
#include "versa/isa.hpp"
#include "versa/layout.hpp"
#include "versa/protocol.hpp"
#include "versa/samples.hpp"
#include "versa/simulator.hpp"
#include "versa/trace.hpp"

namespace versa::harness {

// ---------------------------------------------------------------- atomicExec oracle

struct ErSegment {
    std::size_t begin = 0;
    std::size_t end = 0;  // one past the last record
    bool exited = false;  // false when the run halted or was cut off inside ER
};

inline bool pc_in_own_window(const StateRecord& r) { return r.window().contains(r.pc); }

// Maximal runs of records with pc in ER. A run ends at its first RESET record; a RESET
// record right after the run is appended as its terminal state.
inline std::vector<ErSegment> er_segments(const std::vector<StateRecord>& rs) {
    std::vector<ErSegment> out;
    std::size_t i = 0;
    while (i < rs.size()) {
        const bool starts = pc_in_own_window(rs[i]) &&
                            (i == 0 || rs[i - 1].reset || !pc_in_own_window(rs[i - 1]));
        if (!starts) {
            ++i;
            continue;
        }
        std::size_t j = i;
        bool ended_by_reset = false;
        while (j < rs.size() && pc_in_own_window(rs[j])) {
            const bool r = rs[j].reset;
            ++j;
            if (r) {
                ended_by_reset = true;
                break;
            }
        }
        const bool exited = ended_by_reset || j < rs.size();
        if (!ended_by_reset && j < rs.size() && rs[j].reset) ++j;
        out.push_back({i, j, exited});
        i = j;
    }
    return out;
}

struct OracleClauses {
    bool entry = true;
    bool exit = true;
    bool self_contained = true;
    bool no_irq_dma = true;
    bool all() const { return entry && exit && self_contained && no_irq_dma; }
};

// The four clauses, each with its own reset escape, evaluated over the raw records.
// The window is the one sampled at the segment's first record.
inline OracleClauses atomic_exec_clauses(const std::vector<StateRecord>& rs, const ErSegment& s) {
    OracleClauses c;
    if (s.begin >= s.end) return c;
    const ErWindow er = rs[s.begin].window();
    const StateRecord& first = rs[s.begin];
    const StateRecord& last = rs[s.end - 1];
    c.entry = first.reset || (first.exec && *first.exec == er.er_min);
    c.exit = !s.exited || last.reset || (last.exec && *last.exec == er.er_max);
    for (std::size_t i = s.begin; i < s.end; ++i) {
        const StateRecord& r = rs[i];
        if (r.reset) continue;
        if (!(r.exec && er.contains(*r.exec))) c.self_contained = false;
        if (r.irq || r.dma_en) c.no_irq_dma = false;
    }
    return c;
}

inline bool atomic_exec(const std::vector<StateRecord>& rs, const ErSegment& s) {
    return atomic_exec_clauses(rs, s).all();
}

// Whole-trace verdict: every ER segment must satisfy the clauses.
inline bool atomic_exec(const std::vector<StateRecord>& rs) {
    for (const auto& s : er_segments(rs))
        if (!atomic_exec(rs, s)) return false;
    return true;
}

inline std::optional<ErSegment> segment_containing(const std::vector<ErSegment>& segs, std::size_t idx) {
    for (const auto& s : segs)
        if (s.begin <= idx && idx < s.end) return s;
    return std::nullopt;
}

// ---------------------------------------------------------------- game session

inline Key game_key() {
    const std::string seed = "versa game key";
    return sha256(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(seed.data()), seed.size()));
}

struct GameConfig {
    MemoryLayout layout = default_layout();
    MonitorConfig monitor;
    bool enforce = true;
    Key key = game_key();
};

// Un-reset GPIO read as seen by the referee.
struct ReadAudit {
    std::size_t record = 0;
    bool in_er = false;
    bool authorized_sw = false;  // padded ER bytes at the time of the read are in SW
    bool chained = false;        // a live authorization precedes it
    bool atomic = true;
    bool win() const { return !in_er || !authorized_sw || !atomic; }
    bool unauthorized() const { return !in_er || !chained; }
};

class GameSession {
public:
    explicit GameSession(const GameConfig& cfg = {})
        : ctrl(cfg.key), sim(SimConfig{cfg.layout, cfg.monitor, cfg.enforce, 1}, cfg.key) {
        const auto& l = sim.layout();
        sim.sensor = samples::marker_sensor(l);
        sim.machine.write_word(l.boot_entry, encode({Opcode::HALT})[0]);
        sim.on_reset = [this](const Simulator& s) {
            const auto& lay = s.layout();
            const auto& m = s.machine.memory;
            const bool dmem_clean = std::all_of(m.begin() + lay.dmem.lo, m.begin() + lay.dmem.hi + 1,
                                                [](std::uint8_t b) { return b == 0; });
            const bool ekr_clean = std::all_of(m.begin() + lay.ekr.lo, m.begin() + lay.ekr.hi + 1,
                                               [](std::uint8_t b) { return b == 0; });
            if (!dmem_clean || !ekr_clean) ++dirty_resets;
        };
        sim.on_record = [this](const Simulator& s, const StateRecord& r) { observe(s, r); };
    }

    GameSession(const GameSession&) = delete;
    GameSession& operator=(const GameSession&) = delete;

    Controller ctrl;
    Simulator sim;
    std::vector<bool> results;
    std::vector<ReadAudit> reads;
    std::uint64_t dirty_resets = 0;
    bool leak_scan = true;  // off when S itself may keep sensor data around

    const MemoryLayout& layout() const { return sim.layout(); }

    // Adversary code, written before the device starts running.
    void plant(Address at, std::span<const std::uint8_t> code) {
        if (!sim.records.empty()) throw Error("plant() after the device started");
        if (at + code.size() > kMemorySize) throw SizeError("planted code runs past the address space");
        std::copy(code.begin(), code.end(), sim.machine.memory.begin() + at);
    }

    AuthorizationMessage authorize(const samples::SampleBinary& s) {
        return ctrl.authorize(s.bytes, s.window.size_bytes());
    }
    AuthorizationMessage authorize(std::span<const std::uint8_t> binary, const ErWindow& w) {
        return ctrl.authorize(binary, w.size_bytes());
    }
    void install(const AuthorizationMessage& m, const ErWindow& w) { sim.install(m, w); }
    bool verify() { return sim.verify(); }
    bool xsensing(std::uint64_t max_records = 4000) {
        const bool r = sim.xsensing(max_records).result;
        results.push_back(r);
        return r;
    }
    // Wakes the adversary at boot_entry if the CPU is halted, otherwise continues where it is.
    RunResult run_adversary(std::uint64_t max_records = 200) {
        if (sim.machine.halted) {
            sim.machine.halted = false;
            sim.machine.pc = layout().boot_entry;
        }
        return sim.run(max_records);
    }
    void boot() { sim.run(1); }

    Bytes read_bytes(Address a, std::size_t n) const {
        return Bytes(sim.machine.memory.begin() + a, sim.machine.memory.begin() + a + n);
    }

private:
    bool armed_ = false;
    std::uint64_t auth_chal_ = 0;

    void observe(const Simulator& s, const StateRecord& r) {
        const auto& l = s.layout();
        if (r.reset) {
            armed_ = false;
            return;
        }
        const ErWindow er = r.window();
        if (r.has(TagKind::Read, Region::Gpio) || r.has(TagKind::DmaR, Region::Gpio)) {
            ReadAudit a;
            a.record = s.records.size() - 1;
            a.in_er = er.contains(r.pc);
            if (window_valid(l, er)) {
                auto first = s.machine.memory.begin() + er.er_min;
                a.authorized_sw = ctrl.tokens().authorized_software(
                    std::span<const std::uint8_t>(&*first, er.size_bytes()));
            }
            a.chained = armed_;
            if (armed_ && a.in_er) ctrl.tokens().mark_used(auth_chal_);
            reads.push_back(a);
        }
        const bool er_or_meta_write = r.has(TagKind::Write, Region::Er) || r.has(TagKind::Write, Region::Meta) ||
                                      r.has(TagKind::DmaW, Region::Er) || r.has(TagKind::DmaW, Region::Meta);
        if (r.pc == er.er_max || er_or_meta_write) armed_ = false;
        if (r.pc == l.i_auth) {
            armed_ = true;
            auth_chal_ = s.stored_counter();
        }
    }
};

// ---------------------------------------------------------------- referee

struct GameOutcome {
    std::string name;
    bool xsensing_result = false;  // verdict of the last XSensing call
    bool atomic_exec = true;       // oracle over every segment that holds an un-reset GPIO read
    bool adversary_wins = false;
    std::size_t gpio_reads = 0;
    std::size_t wins = 0;
    std::size_t unauthorized_reads = 0;
    std::uint64_t resets = 0;
    std::uint64_t dirty_resets = 0;
    bool ended_in_reset = false;
    std::size_t leaks = 0;  // sensor words left where the adversary can reach them
    std::optional<bool> expected_ok;
    std::size_t records = 0;
    std::string trace_digest;
    std::uint64_t seed = 0;
};

inline std::size_t leak_count(const GameSession& g) {
    const auto& l = g.layout();
    const auto& m = g.sim.machine;
    const ErWindow er = g.sim.window();
    std::size_t n = 0;
    // Paused inside S: its working data is not reachable without leaving ER, which wipes it.
    const bool inside = !g.sim.records.empty() && !g.sim.records.back().reset && window_valid(l, er) &&
                        er.contains(m.pc) && m.pc != er.er_max && !m.boot_pending;
    if (inside) return 0;
    for (std::uint32_t a = l.dmem.lo; a + 1 <= l.dmem.hi; a += 2) {
        if (window_valid(l, er) && er.er_min <= a && a <= er.er_max) continue;
        const Word w = m.read_word(static_cast<Address>(a));
        for (std::size_t i = 0; i < 16; ++i)
            if (w == samples::marker_word(i)) ++n;
    }
    for (std::size_t i = 0; i < 16; ++i)
        if (m.dma_latch == samples::marker_word(i)) ++n;
    if (!g.sim.records.empty()) {
        const auto& rs = g.sim.records;
        const bool tail_reset = rs.back().reset || (rs.size() >= 2 && rs[rs.size() - 2].reset);
        if (tail_reset &&
            samples::contains_marker_byte(std::span<const std::uint8_t>(&m.memory[l.dmem.lo], l.dmem.size())))
            ++n;
    }
    return n;
}

inline GameOutcome referee(GameSession& g, const std::string& name) {
    GameOutcome o;
    o.name = name;
    const auto& rs = g.sim.records;
    const auto segs = er_segments(rs);
    for (auto& a : g.reads) {
        if (auto s = segment_containing(segs, a.record)) a.atomic = atomic_exec(rs, *s);
        else a.atomic = false;
        ++o.gpio_reads;
        if (!a.atomic) o.atomic_exec = false;
        if (a.win()) ++o.wins;
        if (a.unauthorized()) ++o.unauthorized_reads;
    }
    o.adversary_wins = o.wins > 0;
    o.xsensing_result = !g.results.empty() && g.results.back();
    o.resets = g.sim.resets();
    o.dirty_resets = g.dirty_resets;
    o.ended_in_reset = !rs.empty() && (rs.back().reset || (rs.size() >= 2 && rs[rs.size() - 2].reset));
    o.leaks = g.leak_scan ? leak_count(g) : 0;
    o.records = rs.size();
    const std::string dump = dump_trace(rs);
    o.trace_digest = to_hex(sha256(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(dump.data()), dump.size())));
    return o;
}

// A scenario passes when the adversary never wins, no read escapes authorization, every
// reset leaves DMEM clean, nothing leaks and any stated expectation is met.
inline bool outcome_ok(const GameOutcome& o) {
    return !o.adversary_wins && o.unauthorized_reads == 0 && o.dirty_resets == 0 && o.leaks == 0 &&
           o.expected_ok.value_or(true);
}

// ---------------------------------------------------------------- scenarios

struct Scenario {
    std::string name;
    std::string description;
    std::optional<bool> expect_result;  // last XSensing verdict
    std::optional<bool> expect_reset;   // any reset during the scenario
    std::function<void(GameSession&)> play;
    std::uint64_t seed = 0;
};

inline GameOutcome run_scenario(const Scenario& s, const GameConfig& cfg = {}, std::string* trace = nullptr) {
    GameSession g(cfg);
    s.play(g);
    GameOutcome o = referee(g, s.name);
    if (trace) *trace = dump_trace(g.sim.records);
    o.seed = s.seed;
    if (s.expect_result || s.expect_reset) {
        bool ok = true;
        if (s.expect_result) ok = ok && o.xsensing_result == *s.expect_result;
        if (s.expect_reset) ok = ok && (o.resets > 0) == *s.expect_reset;
        o.expected_ok = ok;
    }
    return o;
}

namespace detail {

inline Address er_base(const MemoryLayout& l) { return static_cast<Address>(l.pmem.lo + 0x200); }
inline Address outbox(const MemoryLayout& l) { return static_cast<Address>(l.pmem.lo + 0x100); }

inline Bytes program(const std::function<void(Assembler&)>& body, Address origin) {
    Assembler a(origin);
    body(a);
    return a.bytes();
}

// Authorized and verified sensing app, ready for XSensing.
inline samples::SampleBinary verified_app(GameSession& g) {
    const auto& l = g.layout();
    auto app = samples::sensing_app(l, er_base(l), outbox(l));
    auto msg = g.authorize(app);
    g.install(msg, app.window);
    g.verify();
    return app;
}

inline AuthorizationMessage forged(const samples::SampleBinary& s, std::uint64_t chal) {
    AuthorizationMessage m;
    m.binary = s.bytes;
    m.chal = chal;
    return m;
}

}  // namespace detail

inline std::vector<Scenario> scenario_catalogue() {
    using detail::er_base;
    using detail::outbox;
    using detail::program;
    std::vector<Scenario> out;

    out.push_back({"unauthorized-cpu-gpio-read", "adversary code reads GPIO, then runs S without a token", false, true,
                   [](GameSession& g) {
                       const auto& l = g.layout();
                       g.plant(l.boot_entry, program([&](Assembler& a) { a.load(1, l.gpio.lo).halt(); }, l.boot_entry));
                       auto app = samples::sensing_app(l, er_base(l), outbox(l));
                       g.install(detail::forged(app, 1), app.window);
                       g.run_adversary();
                       g.xsensing();
                   }});
    out.push_back({"dma-gpio-snoop", "DMA reads GPIO while no authorization is live", false, true,
                   [](GameSession& g) {
                       const auto& l = g.layout();
                       g.plant(l.boot_entry, program([&](Assembler& a) { a.label("l").nop().jmp("l"); }, l.boot_entry));
                       g.boot();
                       g.sim.schedule_dma({g.sim.machine.cycle + 3, DmaRequest::Op::Read, l.gpio.lo, 0});
                       g.run_adversary(20);
                       g.xsensing();
                   }});
    out.push_back({"irq-mid-er", "authorized S is interrupted inside ER", std::nullopt, true,
                   [](GameSession& g) {
                       detail::verified_app(g);
                       g.sim.schedule_irq(g.sim.machine.cycle + 12);
                       g.xsensing();
                   }});
    out.push_back({"jump-into-mid-er", "adversary enters ER past er_min after a successful Verify", false, true,
                   [](GameSession& g) {
                       const auto& l = g.layout();
                       g.plant(l.boot_entry, program([&](Assembler& a) { a.jmp(er_base(l) + 4); }, l.boot_entry));
                       detail::verified_app(g);
                       g.run_adversary();
                       g.xsensing();
                   }});
    out.push_back({"jump-out-before-ermax", "authorized S reads GPIO and leaves ER before er_max", std::nullopt, true,
                   [](GameSession& g) {
                       const auto& l = g.layout();
                       samples::SampleBinary s;
                       s.bytes = program([&](Assembler& a) { a.load(1, l.gpio.lo).jmp(l.boot_entry).halt(); }, er_base(l));
                       s.window = {er_base(l), static_cast<Address>(er_base(l) + s.bytes.size() - 2)};
                       g.install(g.authorize(s), s.window);
                       g.verify();
                       g.xsensing();
                   }});
    out.push_back({"modify-er-after-verify", "adversary patches one ER word between Verify and XSensing", false, true,
                   [](GameSession& g) {
                       const auto& l = g.layout();
                       g.plant(l.boot_entry, program([&](Assembler& a) {
                                   a.loadi(1, 0).store(er_base(l) + 2, 1).halt();
                               }, l.boot_entry));
                       detail::verified_app(g);
                       g.run_adversary();
                       g.xsensing();
                   }});
    out.push_back({"modify-metadata-after-verify", "adversary rewrites er_max between Verify and XSensing", false, true,
                   [](GameSession& g) {
                       const auto& l = g.layout();
                       auto app = samples::sensing_app(l, er_base(l), outbox(l));
                       g.plant(l.boot_entry, program([&](Assembler& a) {
                                   a.loadi(1, app.window.er_max).store(l.er_max_cell(), 1).halt();
                               }, l.boot_entry));
                       detail::verified_app(g);
                       g.run_adversary();
                       g.xsensing();
                   }});
    out.push_back({"token-replay", "a consumed authorization is installed again", false, true,
                   [](GameSession& g) {
                       const auto& l = g.layout();
                       auto app = samples::sensing_app(l, er_base(l), outbox(l));
                       auto msg = g.authorize(app);
                       g.install(msg, app.window);
                       g.verify();
                       g.xsensing();
                       g.install(msg, app.window);
                       g.verify();
                       g.xsensing();
                   }});
    out.push_back({"token-mutation", "one token bit flipped in transit", false, true,
                   [](GameSession& g) {
                       const auto& l = g.layout();
                       auto app = samples::sensing_app(l, er_base(l), outbox(l));
                       auto msg = g.authorize(app);
                       msg.token[7] ^= 0x10;
                       g.install(msg, app.window);
                       g.verify();
                       g.xsensing();
                   }});
    out.push_back({"stale-chal", "an older, never-used authorization after a newer one was accepted", false, true,
                   [](GameSession& g) {
                       const auto& l = g.layout();
                       auto app = samples::sensing_app(l, er_base(l), outbox(l));
                       auto older = g.authorize(app);
                       auto newer = g.authorize(app);
                       g.install(newer, app.window);
                       g.verify();
                       g.install(older, app.window);
                       g.verify();
                       g.xsensing();
                   }});
    out.push_back({"ekr-read-unauthorized", "adversary code reads the encryption key region", false, true,
                   [](GameSession& g) {
                       const auto& l = g.layout();
                       g.plant(l.boot_entry, program([&](Assembler& a) { a.load(1, l.ekr.lo).halt(); }, l.boot_entry));
                       auto app = samples::sensing_app(l, er_base(l), outbox(l));
                       g.install(detail::forged(app, 1), app.window);
                       g.run_adversary();
                       g.xsensing();
                   }});
    out.push_back({"ekr-write-non-vr", "adversary code plants its own key pad", false, true,
                   [](GameSession& g) {
                       const auto& l = g.layout();
                       g.plant(l.boot_entry, program([&](Assembler& a) {
                                   a.loadi(1, 0x5A5A).store(l.ekr.lo, 1).halt();
                               }, l.boot_entry));
                       detail::verified_app(g);
                       g.run_adversary();
                       g.xsensing();
                   }});
    out.push_back({"happy-path", "authorized sensing app: read, one-time-pad, self-clean", true, false,
                   [](GameSession& g) { detail::verified_app(g); g.xsensing(); }});
    out.push_back({"no-gpio-binary", "authorized code that never reads GPIO", false, false,
                   [](GameSession& g) {
                       const auto& l = g.layout();
                       auto app = samples::quiet_app(er_base(l));
                       g.install(g.authorize(app), app.window);
                       g.verify();
                       g.xsensing();
                   }});
    out.push_back({"second-xsensing-without-reverify", "S runs twice on one authorization", false, true,
                   [](GameSession& g) {
                       detail::verified_app(g);
                       g.xsensing();
                       g.xsensing();
                   }});
    out.push_back({"dma-mid-er", "DMA touches DMEM while S runs", std::nullopt, true,
                   [](GameSession& g) {
                       const auto& l = g.layout();
                       detail::verified_app(g);
                       g.sim.schedule_dma({g.sim.machine.cycle + 20, DmaRequest::Op::Read, l.dmem.lo, 0});
                       g.xsensing();
                   }});
    out.push_back({"verify-interrupted", "an interrupt lands inside Verify", false, true,
                   [](GameSession& g) {
                       const auto& l = g.layout();
                       auto app = samples::sensing_app(l, er_base(l), outbox(l));
                       g.install(g.authorize(app), app.window);
                       g.sim.schedule_irq(g.sim.machine.cycle + 10);
                       g.verify();
                       g.xsensing();
                   }});
    return out;
}

inline std::optional<Scenario> find_scenario(std::string_view name) {
    for (auto& s : scenario_catalogue())
        if (s.name == name) return s;
    return std::nullopt;
}

// ---------------------------------------------------------------- randomized scenarios

namespace detail {

class Dice {
public:
    explicit Dice(std::uint64_t seed) : rng_(seed) {}
    std::uint64_t range(std::uint64_t lo, std::uint64_t hi) { return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng_); }
    bool chance(double p) { return std::bernoulli_distribution(p)(rng_); }
    template <class T>
    const T& pick(const std::vector<T>& v) { return v[range(0, v.size() - 1)]; }
    Word value() {
        for (;;) {
            const Word w = static_cast<Word>(range(0, 0xFFFF));
            bool marker = false;
            for (std::size_t i = 0; i < 16; ++i) marker = marker || w == samples::marker_word(i);
            if (!marker) return w;
        }
    }
    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

// Addresses at and around every boundary an attack could aim for.
inline std::vector<Address> boundary_addresses(const MemoryLayout& l, const ErWindow& er) {
    std::vector<Address> v;
    auto around = [&](std::uint32_t a) {
        for (std::uint32_t b : {a - 2, a, a + 2})
            if (a >= 2 && b <= 0xFFFE) v.push_back(static_cast<Address>(b & ~1u));
    };
    around(er.er_min);
    around(er.er_max);
    around(er.er_max + 2);
    for (const Range& r : {l.gpio, l.ekr, l.er_metadata, l.counter_cell, l.atok_mailbox, l.dmem}) {
        around(r.lo);
        around(r.hi - 1);
    }
    v.push_back(l.er_min_cell());
    v.push_back(l.er_max_cell());
    v.push_back(static_cast<Address>(l.dmem.lo + 0xDE));  // sensing app buffer
    return v;
}

inline Bytes adversary_code(Dice& d, const MemoryLayout& l, const ErWindow& er) {
    const auto data = boundary_addresses(l, er);
    const std::vector<Address> jumps = {er.er_min, static_cast<Address>(er.er_min + 2), er.er_max,
                                        static_cast<Address>(er.er_max + 2), l.i_auth, l.boot_entry};
    Assembler a(l.boot_entry);
    const unsigned n = static_cast<unsigned>(d.range(2, 14));
    for (unsigned i = 0; i < n; ++i) {
        const auto r = static_cast<std::uint8_t>(d.range(1, 7));
        switch (d.range(0, 9)) {
            case 0: a.loadi(r, d.chance(0.5) ? d.value() : d.pick(data)); break;
            case 1: case 2: a.load(r, d.pick(data)); break;
            case 3: case 4: a.store(d.pick(data), r); break;
            case 5: a.jmp(d.pick(jumps)); break;
            case 6: a.loadi(kSP, static_cast<Address>(l.dmem.lo + 0x80)).call(l.vr_entry()); break;
            case 7: a.call(er.er_min); break;
            case 8: a.nop(); break;
            default: a.loadi(r, d.value()); break;
        }
    }
    a.halt();
    return a.bytes();
}

}  // namespace detail

enum class TokenStrategy : std::uint8_t { Fresh, Mutated, Replayed, Stale, None };

inline const char* strategy_name(TokenStrategy t) {
    static const char* n[] = {"fresh", "mutated", "replayed", "stale", "none"};
    return n[static_cast<int>(t)];
}

inline Scenario random_scenario(std::uint64_t seed) {
    Scenario s;
    s.name = "random-" + std::to_string(seed);
    s.seed = seed;
    s.play = [seed](GameSession& g) {
        detail::Dice d(seed);
        const auto& l = g.layout();

        Address base;
        if (d.chance(0.75)) base = static_cast<Address>(l.pmem.lo + 0x200 + 2 * d.range(0, 0x200));
        else base = static_cast<Address>(l.dmem.lo + 0x400 + 2 * d.range(0, 0x100));
        samples::SampleBinary app;
        switch (d.range(0, 5)) {
            case 0: case 1: case 2: app = samples::sensing_app(l, base, detail::outbox(l)); break;
            case 3: app = samples::single_read_app(l, base); break;
            case 4: app = samples::quiet_app(base); break;
            default: {
                g.leak_scan = false;
                const unsigned words = static_cast<unsigned>(d.range(2, 20));
                for (unsigned i = 0; i + 1 < words; ++i) {
                    const Word w = d.value();
                    app.bytes.push_back(static_cast<std::uint8_t>(w & 0xFF));
                    app.bytes.push_back(static_cast<std::uint8_t>(w >> 8));
                }
                for (auto b : encode({Opcode::HALT})) {
                    app.bytes.push_back(static_cast<std::uint8_t>(b & 0xFF));
                    app.bytes.push_back(static_cast<std::uint8_t>(b >> 8));
                }
                app.window = {base, static_cast<Address>(base + app.bytes.size() - 2)};
            }
        }
        app.window.er_max = static_cast<Address>(app.window.er_max + 2 * d.range(0, 4));

        g.plant(l.boot_entry, detail::adversary_code(d, l, app.window));

        for (unsigned i = 0, n = static_cast<unsigned>(d.range(0, 3)); i < n; ++i)
            g.sim.schedule_irq(d.range(0, 1500));
        const auto targets = detail::boundary_addresses(l, app.window);
        std::set<std::uint64_t> dma_cycles;
        for (unsigned i = 0, n = static_cast<unsigned>(d.range(0, 3)); i < n; ++i) {
            const std::uint64_t c = d.range(0, 1500);
            if (!dma_cycles.insert(c).second) continue;
            const auto op = d.chance(0.5) ? DmaRequest::Op::Read : DmaRequest::Op::Write;
            g.sim.schedule_dma({c, op, d.pick(targets), d.value()});
        }

        const auto strategy = static_cast<TokenStrategy>(d.range(0, 4));
        AuthorizationMessage msg = g.authorize(app);
        switch (strategy) {
            case TokenStrategy::Fresh: break;
            case TokenStrategy::Mutated:
                switch (d.range(0, 2)) {
                    case 0: msg.token[d.range(0, 31)] ^= static_cast<std::uint8_t>(1u << d.range(0, 7)); break;
                    case 1: msg.binary[d.range(0, msg.binary.size() - 1)] ^= static_cast<std::uint8_t>(1u << d.range(0, 7)); break;
                    default: msg.chal += d.range(1, 3); break;
                }
                break;
            case TokenStrategy::Replayed:
                g.install(msg, app.window);
                g.verify();
                g.xsensing();
                break;
            case TokenStrategy::Stale: {
                auto newer = g.authorize(app);
                g.install(newer, app.window);
                g.verify();
                break;
            }
            case TokenStrategy::None:
                for (auto& b : msg.token) b = static_cast<std::uint8_t>(d.range(0, 255));
                break;
        }

        g.install(msg, app.window);
        if (d.chance(0.3)) g.run_adversary(d.range(1, 60));
        if (d.chance(0.8)) g.verify();
        if (d.chance(0.4)) g.run_adversary(d.range(1, 60));
        g.xsensing(4000);
        if (d.chance(0.4)) g.run_adversary(d.range(1, 100));
        if (d.chance(0.3)) g.xsensing(4000);
    };
    return s;
}

}  // namespace versa::harness
