/*
 * SPDX-License-Identifier: Apache-2.0
 */
#include <gtest/gtest.h>

#include "versa/experiments.hpp"
#include "versa/harness.hpp"

using namespace versa;
using namespace versa::harness;

namespace {

StateRecord at(Address pc, bool irq = false, bool dma = false, bool reset = false) {
    StateRecord r;
    r.pc = pc;
    r.exec = pc;
    r.er_min = 0xC200;
    r.er_max = 0xC208;
    r.irq = irq;
    r.dma_en = dma;
    r.reset = reset;
    return r;
}

}  // namespace

TEST(AtomicExecOracle, CleanPassThroughErIsAtomic) {
    const std::vector<StateRecord> rs{at(0xC000), at(0xC200), at(0xC204), at(0xC208), at(0xC000)};
    const auto segs = er_segments(rs);
    ASSERT_EQ(segs.size(), 1u);
    EXPECT_EQ(segs[0].begin, 1u);
    EXPECT_EQ(segs[0].end, 4u);
    EXPECT_TRUE(atomic_exec(rs));
    const auto c = atomic_exec_clauses(rs, segs[0]);
    EXPECT_TRUE(c.entry && c.exit && c.self_contained && c.no_irq_dma);
}

TEST(AtomicExecOracle, EachClauseCanFail) {
    const std::vector<StateRecord> mid_entry{at(0xC000), at(0xC204), at(0xC208), at(0xC000)};
    EXPECT_FALSE(atomic_exec_clauses(mid_entry, er_segments(mid_entry)[0]).entry);

    const std::vector<StateRecord> early_exit{at(0xC000), at(0xC200), at(0xC204), at(0xC000)};
    EXPECT_FALSE(atomic_exec_clauses(early_exit, er_segments(early_exit)[0]).exit);

    const std::vector<StateRecord> irq{at(0xC000), at(0xC200), at(0xC204, true), at(0xC208), at(0xC000)};
    EXPECT_FALSE(atomic_exec_clauses(irq, er_segments(irq)[0]).no_irq_dma);
    EXPECT_FALSE(atomic_exec(irq));

    const std::vector<StateRecord> dma{at(0xC000), at(0xC200), at(0xC204, false, true), at(0xC208), at(0xC000)};
    EXPECT_FALSE(atomic_exec(dma));
}

TEST(AtomicExecOracle, ResetEndsTheSegment) {
    const std::vector<StateRecord> rs{at(0xC000), at(0xC200), at(0xC204, true, false, true), at(0)};
    const auto segs = er_segments(rs);
    ASSERT_FALSE(segs.empty());
    EXPECT_EQ(segment_containing(segs, 1)->begin, segs[0].begin);
    EXPECT_FALSE(segment_containing(segs, 0));
}

TEST(Catalogue, HasTheRequiredScenarios) {
    const auto cat = scenario_catalogue();
    EXPECT_GE(cat.size(), 12u);
    for (const char* n : {"unauthorized-cpu-gpio-read", "dma-gpio-snoop", "irq-mid-er", "jump-into-mid-er",
                          "jump-out-before-ermax", "modify-er-after-verify", "modify-metadata-after-verify",
                          "token-replay", "token-mutation", "stale-chal", "ekr-read-unauthorized", "ekr-write-non-vr"})
        EXPECT_TRUE(find_scenario(n)) << n;
    EXPECT_FALSE(find_scenario("nope"));
}

TEST(Catalogue, EveryScenarioMeetsItsExpectationWithoutWins) {
    for (const auto& s : scenario_catalogue()) {
        const auto o = run_scenario(s);
        EXPECT_TRUE(outcome_ok(o)) << s.name;
        EXPECT_EQ(o.wins, 0u) << s.name;
        EXPECT_EQ(o.unauthorized_reads, 0u) << s.name;
        EXPECT_EQ(o.dirty_resets, 0u) << s.name;
        ASSERT_TRUE(o.expected_ok) << s.name;
        EXPECT_TRUE(*o.expected_ok) << s.name;
    }
}

TEST(Catalogue, ScenariosAreDeterministic) {
    for (const auto& s : scenario_catalogue()) {
        std::string t1, t2;
        const auto a = run_scenario(s, {}, &t1), b = run_scenario(s, {}, &t2);
        EXPECT_EQ(a.trace_digest, b.trace_digest) << s.name;
        EXPECT_EQ(t1, t2) << s.name;
    }
}

TEST(Catalogue, HappyPathIsTheOnlyCleanTop) {
    const auto o = run_scenario(*find_scenario("happy-path"));
    EXPECT_TRUE(o.xsensing_result);
    EXPECT_EQ(o.resets, 0u);
    EXPECT_EQ(o.leaks, 0u);
    EXPECT_GT(o.gpio_reads, 0u);
}

TEST(Referee, DisabledMonitorLetsTheAdversaryWin) {
    GameConfig open;
    open.enforce = false;
    std::uint64_t wins = 0;
    for (const char* n : {"unauthorized-cpu-gpio-read", "dma-gpio-snoop", "token-mutation"})
        wins += run_scenario(*find_scenario(n), open).wins;
    EXPECT_GT(wins, 0u);
}

TEST(Referee, MutantMonitorsLoseSomeGame) {
    const Mutant broken[] = {Mutant::GpioLockIgnoresRead, Mutant::GpioNoRelockOnWrite, Mutant::AtomExitAnywhere,
                             Mutant::AtomIgnoresIrq, Mutant::AtomIgnoresDma};
    for (Mutant m : broken) {
        GameConfig cfg;
        cfg.monitor = {true, m};
        std::uint64_t bad = 0;
        for (const auto& s : scenario_catalogue()) bad += !outcome_ok(run_scenario(s, cfg));
        EXPECT_GT(bad, 0u) << mutant_name(m);
    }
}

TEST(Referee, MissingErGuardIsFoundByRandomPlay) {
    GameConfig cfg;
    cfg.monitor = {true, Mutant::GpioNoErGuard};
    std::uint64_t wins = 0;
    for (std::uint64_t seed = 1; seed <= 2000 && wins == 0; ++seed) wins += run_scenario(random_scenario(seed), cfg).wins;
    EXPECT_GT(wins, 0u);
}

TEST(RandomScenarios, NoWinsAndReproducible) {
    const auto stats = experiments::play_random(400, 77, 1);
    EXPECT_EQ(stats.wins, 0u);
    EXPECT_EQ(stats.unauthorized_reads, 0u);
    EXPECT_EQ(stats.failures, 0u);
    const auto again = run_scenario(random_scenario(77 + 5));
    EXPECT_EQ(again.trace_digest, stats.outcomes[5].trace_digest);
}

TEST(Theorem, MonitorFormulasImplyEndToEndDefinitions) {
    const auto s = experiments::theorem_corpus(400, 3, 1);
    EXPECT_EQ(s.traces, 400u);
    EXPECT_GT(s.ltl_hold, 0u);
    EXPECT_EQ(s.exceptions, 0u);
}

TEST(Agreement, OracleMatchesMonitorOnSmallPrograms) {
    const auto s = experiments::oracle_agreement(1);
    EXPECT_GT(s.programs, 1000u);
    EXPECT_GT(s.with_segment, 0u);
    EXPECT_EQ(s.disagreements, 0u);
}

TEST(Agreement, AtomicityMutantsDisagree) {
    for (Mutant m : {Mutant::AtomEntryAnywhere, Mutant::AtomExitAnywhere, Mutant::AtomIgnoresIrq, Mutant::AtomIgnoresDma})
        EXPECT_GT(experiments::oracle_agreement(1, {true, m}).disagreements, 0u) << mutant_name(m);
}

TEST(Erasure, ResetsAlwaysLeaveDmemClean) {
    const auto s = experiments::erasure_check(300, 9, 1);
    EXPECT_GT(s.reset_scenarios, 0u);
    EXPECT_EQ(s.dirty_resets, 0u);
    EXPECT_TRUE(s.happy_decrypts);
    EXPECT_TRUE(s.happy_dmem_clean);
}
