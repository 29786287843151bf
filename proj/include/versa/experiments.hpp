/*
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "versa/catalogue.hpp"
#include "versa/crypto.hpp"
#include "versa/harness.hpp"
#include "versa/ltl.hpp"
#include "versa/model_check.hpp"
#include "versa/parallel.hpp"
#include "versa/protocol.hpp"
#include "versa/samples.hpp"
#include "versa/simulator.hpp"

namespace versa::experiments {

using harness::GameConfig;
using harness::GameSession;

// ---------------------------------------------------------------- exhaustive monitor check

struct FormulaVerdict {
    std::string name;
    mc::CheckResult result;
    double seconds = 0;
};

inline std::vector<FormulaVerdict> check_formulas(const std::vector<CatalogueEntry>& entries, unsigned width,
                                                  const MonitorConfig& monitor, unsigned jobs) {
    const MemoryLayout l = scale_layout(default_layout(), width);
    return parallel_map(entries.size(), jobs, [&](std::size_t i) {
        mc::ExhaustiveChecker checker(l, monitor);
        const auto t0 = std::chrono::steady_clock::now();
        FormulaVerdict v{entries[i].name, checker.check(*entries[i].formula), 0};
        v.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return v;
    });
}

struct MutantVerdict {
    Mutant id = Mutant::None;
    std::vector<std::pair<std::string, std::size_t>> violated;  // formula, counterexample length
    bool replayed = true;  // every counterexample re-fails when replayed from scratch
    bool killed() const { return !violated.empty() && replayed; }
};

inline std::vector<MutantVerdict> mutation_suite(unsigned width, unsigned jobs) {
    const MemoryLayout l = scale_layout(default_layout(), width);
    const auto formulas = monitor_formulas(true);
    return parallel_map(kMutants.size(), jobs, [&](std::size_t i) {
        MutantVerdict v;
        v.id = kMutants[i].id;
        const MonitorConfig cfg{true, v.id};
        mc::ExhaustiveChecker checker(l, cfg);
        for (const auto& e : formulas) {
            auto r = checker.check(*e.formula);
            if (r.holds) continue;
            const auto& cex = *r.counterexample;
            v.violated.emplace_back(e.name, cex.inputs.size());
            if (ltl::eval(*e.formula, mc::replay_lasso(cex.inputs, l, cfg), l)) v.replayed = false;
        }
        return v;
    });
}

// ---------------------------------------------------------------- end-to-end implication corpus

struct TheoremStats {
    std::uint64_t traces = 0;
    std::uint64_t ltl_hold = 0;
    std::uint64_t def5_hold = 0;
    std::uint64_t def6_hold = 0;
    std::uint64_t exceptions = 0;  // monitor formulas hold, an end-to-end definition does not
    std::optional<std::uint64_t> first_exception_seed;
};

struct TraceVerdict {
    bool ltls = true;
    bool def5 = true;
    bool def6 = true;
};

inline TraceVerdict judge_trace(const std::vector<StateRecord>& records, const MemoryLayout& l) {
    static const auto monitor = monitor_formulas(true);
    static const auto def5 = find_formula("atomic_sensing");
    static const auto def6 = find_formula("mandatory_authorization");
    TraceVerdict v;
    if (records.empty()) return v;
    const auto lasso = ltl::lift(records, l);
    for (const auto& e : monitor)
        if (!ltl::eval(*e.formula, lasso, l)) {
            v.ltls = false;
            break;
        }
    v.def5 = ltl::eval(*def5->formula, lasso, l);
    v.def6 = ltl::eval(*def6->formula, lasso, l);
    return v;
}

// Every fourth trace runs under a mutant monitor so the implication is also exercised on
// traces where the monitor formulas fail.
inline GameConfig corpus_config(std::uint64_t i) {
    GameConfig cfg;
    if (i % 4 == 3) cfg.monitor.mutant = kMutants[(i / 4) % kMutants.size()].id;
    return cfg;
}

inline TheoremStats theorem_corpus(std::uint64_t n, std::uint64_t seed0, unsigned jobs) {
    auto verdicts = parallel_map(n, jobs, [&](std::size_t i) {
        GameSession g(corpus_config(i));
        harness::random_scenario(seed0 + i).play(g);
        return judge_trace(g.sim.records, g.layout());
    });
    TheoremStats s;
    for (std::uint64_t i = 0; i < n; ++i) {
        const auto& v = verdicts[i];
        ++s.traces;
        s.ltl_hold += v.ltls;
        s.def5_hold += v.def5;
        s.def6_hold += v.def6;
        if (v.ltls && !(v.def5 && v.def6)) {
            ++s.exceptions;
            if (!s.first_exception_seed) s.first_exception_seed = seed0 + i;
        }
    }
    return s;
}

// ---------------------------------------------------------------- game

struct GameStats {
    std::vector<harness::GameOutcome> outcomes;
    std::uint64_t wins = 0;
    std::uint64_t unauthorized_reads = 0;
    std::uint64_t failures = 0;  // outcome_ok() false
};

inline GameStats play_catalogue(unsigned jobs) {
    const auto cat = harness::scenario_catalogue();
    GameStats s;
    s.outcomes = parallel_map(cat.size(), jobs, [&](std::size_t i) { return harness::run_scenario(cat[i]); });
    for (const auto& o : s.outcomes) {
        s.wins += o.wins;
        s.unauthorized_reads += o.unauthorized_reads;
        s.failures += !harness::outcome_ok(o);
    }
    return s;
}

inline GameStats play_random(std::uint64_t n, std::uint64_t seed0, unsigned jobs) {
    GameStats s;
    s.outcomes = parallel_map(n, jobs, [&](std::size_t i) { return harness::run_scenario(harness::random_scenario(seed0 + i)); });
    for (const auto& o : s.outcomes) {
        s.wins += o.wins;
        s.unauthorized_reads += o.unauthorized_reads;
        s.failures += !harness::outcome_ok(o);
    }
    return s;
}

// ---------------------------------------------------------------- oracle agreement

enum class Schedule : std::uint8_t { None, Irq, Dma };

struct AgreementCase {
    std::vector<Word> words;  // six words starting at boot_entry
    Schedule schedule = Schedule::None;
    std::uint64_t at = 0;
};

struct AgreementStats {
    std::uint64_t programs = 0;
    std::uint64_t runs = 0;
    std::uint64_t with_segment = 0;
    std::uint64_t oracle_true = 0;
    std::uint64_t disagreements = 0;
    std::optional<AgreementCase> first_disagreement;
};

inline MemoryLayout agreement_layout() {
    MemoryLayout l = default_layout();
    l.boot_entry = 0xC100;
    l.irq_vector = 0xC100;
    l.validate();
    return l;
}

inline constexpr unsigned kAgreementWords = 6;

// Word layouts of exactly six words over NOP, HALT, RET and JMP t, where t is one of the six
// program words or an outside address holding HALT. JMP takes two words.
inline std::vector<std::vector<Word>> agreement_programs(const MemoryLayout& l) {
    const Address base = l.boot_entry;
    const Address outside = static_cast<Address>(base + 0x40);
    std::vector<Address> targets;
    for (unsigned i = 0; i < kAgreementWords; ++i) targets.push_back(static_cast<Address>(base + 2 * i));
    targets.push_back(outside);
    const Word nop = encode({Opcode::NOP})[0], halt = encode({Opcode::HALT})[0], ret = encode({Opcode::RET})[0],
               jmp = encode({Opcode::JMP})[0];
    std::vector<std::vector<Word>> out;
    std::vector<Word> cur;
    std::function<void()> rec = [&] {
        if (cur.size() == kAgreementWords) {
            out.push_back(cur);
            return;
        }
        for (Word w : {nop, halt, ret}) {
            cur.push_back(w);
            rec();
            cur.pop_back();
        }
        if (cur.size() + 2 <= kAgreementWords)
            for (Address t : targets) {
                cur.push_back(jmp);
                cur.push_back(t);
                rec();
                cur.pop_back();
                cur.pop_back();
            }
    };
    rec();
    return out;
}

inline MachineState agreement_machine(const MemoryLayout& l, const std::vector<Word>& words) {
    MachineState m;
    const Address base = l.boot_entry;
    for (std::size_t i = 0; i < words.size(); ++i) m.write_word(static_cast<Address>(base + 2 * i), words[i]);
    m.write_word(static_cast<Address>(base + 0x40), encode({Opcode::HALT})[0]);
    m.write_word(l.er_min_cell(), static_cast<Word>(base + 2));
    m.write_word(l.er_max_cell(), static_cast<Word>(base + 6));
    m.sp = static_cast<Address>(l.dmem.lo + 0x10);
    m.write_word(m.sp, static_cast<Word>(base + 0x40));
    m.pc = base;
    return m;
}

inline constexpr std::uint64_t kAgreementRecords = 32;

// true when the oracle verdict on the unmonitored run matches the enforced run's reaction
inline bool agreement_case(const MemoryLayout& l, const AgreementCase& c, bool* has_segment = nullptr,
                           bool* oracle = nullptr, const MonitorConfig& monitor = {}) {
    auto run = [&](bool enforce) {
        Simulator sim(SimConfig{l, monitor, enforce, 1}, harness::game_key(), agreement_machine(l, c.words));
        if (c.schedule == Schedule::Irq) sim.schedule_irq(c.at);
        if (c.schedule == Schedule::Dma)
            sim.schedule_dma({c.at, DmaRequest::Op::Read, static_cast<Address>(l.dmem.lo + 0x40), 0});
        sim.run(kAgreementRecords);
        return sim.records;
    };
    const auto shadow = run(false);
    const auto enforced = run(true);
    const auto segs = harness::er_segments(shadow);
    std::size_t horizon = enforced.size();
    bool verdict = true;
    if (!segs.empty()) {
        verdict = harness::atomic_exec(shadow, segs.front());
        horizon = std::min(enforced.size(), segs.front().end + 1);
    }
    // A record the core resets anyway is covered by the reset escape whatever the monitor says.
    bool monitor_reset = false;
    for (std::size_t i = 0; i < horizon; ++i)
        if (enforced[i].reset_source == kResetMonitor) monitor_reset = true;
    if (has_segment) *has_segment = !segs.empty();
    if (oracle) *oracle = verdict;
    return verdict == !monitor_reset;
}

inline AgreementStats oracle_agreement(unsigned jobs, const MonitorConfig& monitor = {}) {
    const MemoryLayout l = agreement_layout();
    const auto programs = agreement_programs(l);
    std::vector<std::pair<Schedule, std::uint64_t>> schedules{{Schedule::None, 0}};
    for (std::uint64_t c = 1; c <= 8; ++c) {
        schedules.emplace_back(Schedule::Irq, c);
        schedules.emplace_back(Schedule::Dma, c);
    }
    struct Partial {
        std::uint64_t runs = 0, with_segment = 0, oracle_true = 0, disagreements = 0;
        std::optional<AgreementCase> first;
    };
    auto parts = parallel_map(programs.size(), jobs, [&](std::size_t i) {
        Partial p;
        for (const auto& [kind, at] : schedules) {
            AgreementCase c{programs[i], kind, at};
            bool seg = false, verdict = false;
            const bool agree = agreement_case(l, c, &seg, &verdict, monitor);
            ++p.runs;
            p.with_segment += seg;
            p.oracle_true += verdict;
            if (!agree) {
                ++p.disagreements;
                if (!p.first) p.first = c;
            }
        }
        return p;
    });
    AgreementStats s;
    s.programs = programs.size();
    for (const auto& p : parts) {
        s.runs += p.runs;
        s.with_segment += p.with_segment;
        s.oracle_true += p.oracle_true;
        s.disagreements += p.disagreements;
        if (!s.first_disagreement && p.first) s.first_disagreement = p.first;
    }
    return s;
}

// ---------------------------------------------------------------- token fuzzing

enum class Tamper : std::uint8_t { TokenBit, BinaryBit, ChalAhead, ChalStale, WireBit };
inline constexpr unsigned kTamperKinds = 5;

inline const char* tamper_name(Tamper t) {
    static const char* n[] = {"token-bit", "binary-bit", "chal-ahead", "chal-stale", "wire-bit"};
    return n[static_cast<int>(t)];
}

struct TokenStats {
    std::uint64_t negatives = 0;  // mutated, replayed or stale messages presented
    std::uint64_t positives = 0;  // fresh legitimate messages presented
    std::uint64_t false_accepts = 0;
    std::uint64_t false_rejects = 0;
    std::uint64_t parse_rejects = 0;  // wire mutations caught by the parser
};

inline TokenStats token_fuzz(std::uint64_t trials, std::uint64_t seed, unsigned jobs) {
    constexpr std::uint64_t kPerDevice = 50;
    const std::uint64_t devices = (trials + kPerDevice - 1) / kPerDevice;
    auto parts = parallel_map(devices, jobs, [&](std::size_t dev) {
        TokenStats s;
        std::mt19937_64 rng(seed * 1000003 + dev);
        auto range = [&](std::uint64_t lo, std::uint64_t hi) {
            return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng);
        };
        Key key;
        for (auto& b : key) b = static_cast<std::uint8_t>(range(0, 255));
        const MemoryLayout l = default_layout();
        Controller ctrl(key);
        Simulator sim(SimConfig{l, {}, true, 1}, key);
        sim.machine.write_word(l.boot_entry, encode({Opcode::HALT})[0]);
        auto present = [&](const AuthorizationMessage& m, const ErWindow& w) {
            sim.install(m, w);
            return sim.verify();
        };
        auto negative = [&](const AuthorizationMessage& m, const ErWindow& w) {
            ++s.negatives;
            if (present(m, w)) ++s.false_accepts;
        };
        auto positive = [&](const AuthorizationMessage& m, const ErWindow& w) {
            ++s.positives;
            if (!present(m, w)) ++s.false_rejects;
        };
        const std::uint64_t first = dev * kPerDevice, last = std::min(trials, first + kPerDevice);
        for (std::uint64_t t = first; t < last; ++t) {
            const std::size_t words = range(1, 48);
            const auto er_min = static_cast<Address>(l.pmem.lo + 0x200 + 2 * range(0, 0x400));
            const ErWindow win{er_min, static_cast<Address>(er_min + 2 * (words - 1))};
            Bytes binary(range(1, 2 * words));
            for (auto& b : binary) b = static_cast<std::uint8_t>(range(0, 255));
            const auto legit = ctrl.authorize(binary, win.size_bytes());

            // tampered copy first, then the genuine one, then its replay
            const auto kind = static_cast<Tamper>(t % kTamperKinds);
            AuthorizationMessage bad = legit;
            switch (kind) {
                case Tamper::TokenBit: bad.token[range(0, 31)] ^= static_cast<std::uint8_t>(1u << range(0, 7)); break;
                case Tamper::BinaryBit:
                    bad.binary[range(0, bad.binary.size() - 1)] ^= static_cast<std::uint8_t>(1u << range(0, 7));
                    break;
                case Tamper::ChalAhead: bad.chal += range(1, 1000); break;
                case Tamper::ChalStale: bad.chal -= range(1, bad.chal); break;
                case Tamper::WireBit: {
                    Bytes wire = serialize(legit);
                    const std::size_t bit = range(0, wire.size() * 8 - 1);
                    wire[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
                    try {
                        bad = parse_message(wire);
                    } catch (const FormatError&) {
                        ++s.negatives;
                        ++s.parse_rejects;
                        bad = {};
                    }
                    break;
                }
            }
            if (!bad.binary.empty()) {
                if (bad.binary.size() <= win.size_bytes()) negative(bad, win);
                else {
                    ++s.negatives;  // oversize payload cannot even be installed
                    ++s.parse_rejects;
                }
            }
            positive(legit, win);
            negative(legit, win);

            // stale: an older message after a newer one was accepted
            const auto older = ctrl.authorize(binary, win.size_bytes());
            const auto newer = ctrl.authorize(binary, win.size_bytes());
            positive(newer, win);
            negative(older, win);
        }
        return s;
    });
    TokenStats s;
    for (const auto& p : parts) {
        s.negatives += p.negatives;
        s.positives += p.positives;
        s.false_accepts += p.false_accepts;
        s.false_rejects += p.false_rejects;
        s.parse_rejects += p.parse_rejects;
    }
    return s;
}

// ---------------------------------------------------------------- Verify cost

struct CostPoint {
    std::size_t er_bytes = 0;
    std::size_t records = 0;
};

struct AffineFit {
    double slope = 0;
    double intercept = 0;
    double r2 = 0;
};

inline AffineFit fit_affine(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    AffineFit f;
    const double den = n * sxx - sx * sx;
    if (den == 0) return f;
    f.slope = (n * sxy - sx * sy) / den;
    f.intercept = (sy - f.slope * sx) / n;
    double ss_res = 0, ss_tot = 0;
    const double mean = sy / n;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = y[i] - (f.slope * x[i] + f.intercept);
        ss_res += e * e;
        ss_tot += (y[i] - mean) * (y[i] - mean);
    }
    f.r2 = ss_tot == 0 ? 1.0 : 1.0 - ss_res / ss_tot;
    return f;
}

inline std::vector<CostPoint> verify_cost(const std::vector<std::size_t>& sizes) {
    std::vector<CostPoint> out;
    for (std::size_t n : sizes) {
        GameSession g;
        const auto& l = g.layout();
        Bytes binary(n);
        for (std::size_t i = 0; i < n; ++i) binary[i] = static_cast<std::uint8_t>(i * 7 + 1);
        const ErWindow w{static_cast<Address>(l.pmem.lo + 0x200), static_cast<Address>(l.pmem.lo + 0x200 + n - 2)};
        g.install(g.authorize(binary, w), w);
        if (!g.verify()) throw Error("Verify rejected a legitimate " + std::to_string(n) + "-byte binary");
        out.push_back({n, g.sim.last_verify_records()});
    }
    return out;
}

// ---------------------------------------------------------------- erasure

struct ErasureStats {
    std::uint64_t reset_scenarios = 0;
    std::uint64_t dirty_resets = 0;
    bool happy_decrypts = false;
    bool happy_dmem_clean = false;  // no byte of the marker anywhere in DMEM
};

inline ErasureStats erasure_check(std::uint64_t random_runs, std::uint64_t seed0, unsigned jobs) {
    ErasureStats s;
    for (const auto& sc : harness::scenario_catalogue()) {
        GameSession g;
        sc.play(g);
        if (g.sim.resets() > 0) ++s.reset_scenarios;
        s.dirty_resets += g.dirty_resets;
    }
    auto dirty = parallel_map(random_runs, jobs, [&](std::size_t i) {
        GameSession g;
        harness::random_scenario(seed0 + i).play(g);
        return std::pair<bool, std::uint64_t>(g.sim.resets() > 0, g.dirty_resets);
    });
    for (const auto& [reset, d] : dirty) {
        s.reset_scenarios += reset;
        s.dirty_resets += d;
    }

    GameSession g;
    harness::detail::verified_app(g);
    const std::uint64_t chal = g.sim.stored_counter();
    if (g.xsensing()) {
        const auto& l = g.layout();
        const Bytes cipher = g.read_bytes(harness::detail::outbox(l), samples::kSenseBytes);
        const Bytes plain = g.ctrl.decrypt({chal, cipher});
        s.happy_decrypts = std::equal(plain.begin(), plain.end(), samples::kMarker.begin());
        s.happy_dmem_clean = !samples::contains_marker_byte(
            std::span<const std::uint8_t>(&g.sim.machine.memory[l.dmem.lo], l.dmem.size()));
    }
    return s;
}

// ---------------------------------------------------------------- crypto round trips

struct Kat {
    Bytes key;
    Bytes data;
    const char* mac;
};

// RFC 4231 test cases 1-3 and 7.
inline std::vector<Kat> hmac_kats() {
    auto text = [](std::string_view s) { return Bytes(s.begin(), s.end()); };
    return {
        {Bytes(20, 0x0b), text("Hi There"), "b0344c61d8db38535ca8afceaf0bf12b881dc200c9833da726e9376c2e32cff7"},
        {text("Jefe"), text("what do ya want for nothing?"),
         "5bdcc146bf60754e6a042426089575c75a003f089d2739839dec58b964ec3843"},
        {Bytes(20, 0xaa), Bytes(50, 0xdd), "773ea91e36800e46854db8ebd09181a72959098b3ef8c122d9635514ced565fe"},
        {Bytes(131, 0xaa),
         text("This is a test using a larger than block-size key and a larger than block-size data. The key needs "
              "to be hashed before being used by the HMAC algorithm."),
         "9b09ffa71b942fcb27635fbcd5b0e944bfdc63644f0713938a7f51535c3a35e2"},
    };
}

struct CryptoStats {
    std::uint64_t otp_ok = 0;
    std::uint64_t otp_total = 0;
    std::uint64_t kat_ok = 0;
    std::uint64_t kat_total = 0;
    std::uint64_t wire_ok = 0;
    std::uint64_t wire_total = 0;
};

inline CryptoStats crypto_roundtrips(std::uint64_t n, std::uint64_t seed) {
    CryptoStats s;
    std::mt19937_64 rng(seed);
    auto range = [&](std::uint64_t lo, std::uint64_t hi) { return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng); };
    auto random_bytes = [&](std::size_t len) {
        Bytes b(len);
        for (auto& x : b) x = static_cast<std::uint8_t>(range(0, 255));
        return b;
    };
    for (std::uint64_t i = 0; i < n; ++i) {
        Key key;
        for (auto& b : key) b = static_cast<std::uint8_t>(range(0, 255));
        const std::uint64_t chal = range(1, ~std::uint64_t{0});
        const Bytes payload = random_bytes(range(0, 512));
        const Bytes cipher = encrypt_output(kdf(key, chal, kLabelEnc), payload);
        const SensingResult r = parse_result(serialize(SensingResult{chal, cipher}));
        ++s.otp_total;
        if (decrypt_ctrl(key, r.chal, r.ciphertext) == payload) ++s.otp_ok;
    }
    for (const auto& k : hmac_kats()) {
        ++s.kat_total;
        if (to_hex(hmac_sha256(k.key, k.data)) == k.mac) ++s.kat_ok;
    }
    for (std::uint64_t i = 0; i < n; ++i) {
        AuthorizationMessage m;
        m.binary = random_bytes(range(0, 2048));
        m.chal = range(0, ~std::uint64_t{0});
        for (auto& b : m.token) b = static_cast<std::uint8_t>(range(0, 255));
        const Bytes wire = serialize(m);
        const AuthorizationMessage back = parse_message(wire);
        ++s.wire_total;
        if (back == m && serialize(back) == wire) ++s.wire_ok;
    }
    return s;
}

}  // namespace versa::experiments
