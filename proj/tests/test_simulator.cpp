/*
 * SPDX-License-Identifier: Apache-2.0
 */
#include <gtest/gtest.h>

#include "versa/experiments.hpp"
#include "versa/samples.hpp"
#include "versa/simulator.hpp"

using namespace versa;

namespace {

const MemoryLayout L = default_layout();
const Key K = harness::game_key();
constexpr Address kEr = 0xC200;
constexpr Address kOutbox = 0xC100;

struct Rig {
    Controller ctrl{K};
    Simulator sim;
    samples::SampleBinary app = samples::sensing_app(L, kEr, kOutbox);

    explicit Rig(MonitorConfig mon = {}) : sim(SimConfig{L, mon, true, 1}, K, boot_image()) {
        sim.sensor = samples::marker_sensor(L);
    }
    static MachineState boot_image() {
        MachineState m;
        m.write_word(L.boot_entry, encode({Opcode::HALT})[0]);
        m.pc = L.boot_entry;
        return m;
    }
    AuthorizationMessage authorize() { return ctrl.authorize(app.bytes, app.window.size_bytes()); }
};

}  // namespace

TEST(Simulator, HappyPathProducesDecryptableOutput) {
    Rig r;
    r.sim.install(r.authorize(), r.app.window);
    ASSERT_TRUE(r.sim.verify());
    EXPECT_EQ(r.sim.stored_counter(), 1u);
    const auto out = r.sim.xsensing(4000);
    ASSERT_TRUE(out.result);
    EXPECT_EQ(out.run.terminal, Terminal::Halted);
    EXPECT_EQ(r.sim.resets(), 0u);
    const Bytes cipher(r.sim.machine.memory.begin() + kOutbox,
                       r.sim.machine.memory.begin() + kOutbox + samples::kSenseBytes);
    const Bytes plain = r.ctrl.decrypt({1, cipher});
    EXPECT_TRUE(std::equal(plain.begin(), plain.end(), samples::kMarker.begin()));
    EXPECT_FALSE(samples::contains_marker_byte(
        std::span<const std::uint8_t>(&r.sim.machine.memory[L.dmem.lo], L.dmem.size())));
}

TEST(Simulator, TamperedTokenIsRejected) {
    Rig r;
    auto m = r.authorize();
    m.token[5] ^= 0x40;
    r.sim.install(m, r.app.window);
    EXPECT_FALSE(r.sim.verify());
    EXPECT_EQ(r.sim.stored_counter(), 0u);
    const auto out = r.sim.xsensing(4000);
    EXPECT_FALSE(out.result);
    EXPECT_GT(r.sim.resets(), 0u);
}

TEST(Simulator, ReplayIsRejectedAfterUse) {
    Rig r;
    const auto m = r.authorize();
    r.sim.install(m, r.app.window);
    ASSERT_TRUE(r.sim.verify());
    r.sim.install(m, r.app.window);
    EXPECT_FALSE(r.sim.verify());
    EXPECT_EQ(r.sim.stored_counter(), 1u);
    const auto newer = r.authorize();
    r.sim.install(newer, r.app.window);
    EXPECT_TRUE(r.sim.verify());
    EXPECT_EQ(r.sim.stored_counter(), 2u);
}

TEST(Simulator, SkippingVerifyYieldsBottomWithReset) {
    Rig r;
    r.sim.install(r.authorize(), r.app.window);
    const auto out = r.sim.xsensing(4000);
    EXPECT_FALSE(out.result);
    EXPECT_EQ(out.run.terminal, Terminal::ResetSink);
    EXPECT_EQ(r.sim.resets(), 1u);
}

TEST(Simulator, WithoutMonitorEnforcementUnverifiedReadsSucceed) {
    Simulator sim(SimConfig{L, {}, false, 1}, K, Rig::boot_image());
    sim.sensor = samples::marker_sensor(L);
    const auto app = samples::sensing_app(L, kEr, kOutbox);
    Controller ctrl(K);
    sim.install(ctrl.authorize(app.bytes, app.window.size_bytes()), app.window);
    EXPECT_TRUE(sim.xsensing(4000).result);
}

TEST(Simulator, XsensingRefusesInvalidWindow) {
    Rig r;
    r.sim.machine.write_word(L.er_min_cell(), 0xC201);
    r.sim.machine.write_word(L.er_max_cell(), 0xC300);
    const std::size_t before = r.sim.records.size();
    const auto out = r.sim.xsensing(100);
    EXPECT_FALSE(out.result);
    EXPECT_EQ(out.run.end, r.sim.records.size());
    EXPECT_LE(r.sim.records.size() - before, 4u);
}

TEST(Simulator, InstallRejectsBadWindows) {
    Rig r;
    const auto m = r.authorize();
    EXPECT_THROW(r.sim.install(m, {0xE000, 0xE010}), ConfigError);
    EXPECT_THROW(r.sim.install(m, {L.boot_entry, static_cast<Address>(L.boot_entry + 0x100)}), ConfigError);
    EXPECT_THROW(r.sim.install(m, {kEr, kEr + 4}), SizeError);
}

TEST(Simulator, InterruptDuringErResetsAndClearsDmem) {
    Rig r;
    r.sim.install(r.authorize(), r.app.window);
    ASSERT_TRUE(r.sim.verify());
    bool dmem_zero_at_every_reset = true;
    r.sim.on_reset = [&](const Simulator& s) {
        for (std::uint32_t a = L.dmem.lo; a <= L.dmem.hi; ++a)
            if (s.machine.memory[a]) dmem_zero_at_every_reset = false;
    };
    r.sim.schedule_irq(r.sim.machine.cycle + 40);
    r.sim.xsensing(4000);
    EXPECT_EQ(r.sim.resets(), 1u);
    EXPECT_TRUE(dmem_zero_at_every_reset);
    EXPECT_TRUE(r.sim.records.back().reset || r.sim.records[r.sim.records.size() - 2].reset);
}

TEST(Simulator, RecordHookSeesEveryRecord) {
    Rig r;
    std::size_t seen = 0;
    r.sim.on_record = [&](const Simulator&, const StateRecord&) { ++seen; };
    r.sim.install(r.authorize(), r.app.window);
    r.sim.verify();
    r.sim.xsensing(4000);
    EXPECT_EQ(seen, r.sim.records.size());
}

TEST(Simulator, DuplicateDmaCycleIsAnError) {
    Rig r;
    r.sim.schedule_dma({10, DmaRequest::Op::Read, 0x10, 0});
    EXPECT_THROW(r.sim.schedule_dma({10, DmaRequest::Op::Read, 0x12, 0}), ConfigError);
}

TEST(Simulator, TraceTagsMatchRecordFields) {
    Rig r;
    r.sim.install(r.authorize(), r.app.window);
    r.sim.verify();
    r.sim.xsensing(4000);
    for (const auto& rec : r.sim.records) ASSERT_EQ(rec.tags, compute_tags(rec, L));
    const std::string dump = dump_trace(r.sim.trace(Terminal::Halted));
    EXPECT_NE(dump.find("halted"), std::string::npos);
}

TEST(VerifyCost, GrowsAffinelyWithErSize) {
    const auto pts = experiments::verify_cost({64, 128, 256, 512, 1024});
    ASSERT_EQ(pts.size(), 5u);
    std::vector<double> x, y;
    for (const auto& p : pts) {
        x.push_back(static_cast<double>(p.er_bytes));
        y.push_back(static_cast<double>(p.records));
    }
    for (std::size_t i = 1; i < pts.size(); ++i) EXPECT_GT(pts[i].records, pts[i - 1].records);
    EXPECT_GE(experiments::fit_affine(x, y).r2, 0.99);
}

TEST(FitAffine, ExactLine) {
    const auto f = experiments::fit_affine({1, 2, 3, 4}, {5, 7, 9, 11});
    EXPECT_DOUBLE_EQ(f.slope, 2.0);
    EXPECT_DOUBLE_EQ(f.intercept, 3.0);
    EXPECT_DOUBLE_EQ(f.r2, 1.0);
}
