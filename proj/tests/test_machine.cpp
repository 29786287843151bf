/*
 * SPDX-License-Identifier: Apache-2.0
 */
#include <gtest/gtest.h>

#include "versa/isa.hpp"
#include "versa/machine.hpp"

using namespace versa;

namespace {

const MemoryLayout L = default_layout();

MachineState with_program(const std::vector<std::uint8_t>& code, Address at = 0xC000) {
    MachineState s;
    std::copy(code.begin(), code.end(), s.memory.begin() + at);
    s.pc = at;
    s.boot_pending = false;
    s.sp = 0x0400;
    return s;
}

StepResult step(MachineState& s, std::optional<DmaRequest> dma = std::nullopt, bool irq = false) {
    StepResult r = exec_step(s, L, dma, irq, [](Address a, std::uint64_t) { return static_cast<Word>(0x5A00 | (a & 0xFF)); });
    if (!r.fault) commit(s, L, r.writes);
    return r;
}

}  // namespace

TEST(Isa, EveryWordDecodesToItsOwnEncoding) {
    std::size_t valid = 0;
    for (std::uint32_t w = 0; w <= 0xFFFF; ++w) {
        auto i = decode(static_cast<Word>(w), 0x1234);
        if (!i) continue;
        ++valid;
        const auto enc = encode(*i);
        ASSERT_EQ(enc[0], w) << to_string(*i);
        if (i->words() == 2) {
            ASSERT_EQ(enc[1], 0x1234);
        }
    }
    EXPECT_GT(valid, 12u);
}

TEST(Isa, EncodeRejectsBadOperands) {
    EXPECT_THROW(encode({Opcode::LOADI, 9}), ConfigError);
    EXPECT_THROW(encode({Opcode::ADD, 0, 0, true}), ConfigError);
    EXPECT_EQ(encode({Opcode::NOP}).size(), 1u);
    EXPECT_EQ(encode({Opcode::JMP, 0, 0, false, 0xC000}).size(), 2u);
}

TEST(Isa, AssemblerResolvesLabels) {
    Assembler a(0xC000);
    a.jmp("end").nop().label("end").halt();
    const auto b = a.bytes();
    ASSERT_EQ(b.size(), 8u);
    EXPECT_EQ(a.address_of("end"), 0xC006);
    EXPECT_EQ(b[2] | (b[3] << 8), 0xC006);
    Assembler bad(0xC000);
    bad.jmp("nowhere");
    EXPECT_THROW(bad.bytes(), ConfigError);
    EXPECT_THROW(Assembler(0).label("x").label("x"), ConfigError);
}

TEST(Machine, BootRecordComesFirst) {
    MachineState s;
    s.pc = 0x1234;
    auto r = step(s);
    EXPECT_EQ(r.record.pc, 0);
    EXPECT_FALSE(r.record.exec);
    EXPECT_EQ(s.pc, L.boot_entry);
    EXPECT_FALSE(s.boot_pending);
}

TEST(Machine, ArithmeticLoadStore) {
    Assembler a(0xC000);
    a.loadi(1, 5).loadi(2, 3).sub(1, 2).store(0x0300, 1).load(3, 0x0300).load(4, 0x0012).halt();
    MachineState s = with_program(a.bytes());
    for (int i = 0; i < 7; ++i) ASSERT_FALSE(step(s).fault);
    EXPECT_EQ(s.read_word(0x0300), 2);
    EXPECT_EQ(s.gpr[3], 2);
    EXPECT_EQ(s.gpr[4], 0x5A12);
    EXPECT_TRUE(s.halted);
    EXPECT_THROW(step(s), Error);
}

TEST(Machine, CallAndReturnUseTheStack) {
    Assembler a(0xC000);
    a.call("f").halt().label("f").ret();
    MachineState s = with_program(a.bytes());
    auto c = step(s);
    EXPECT_TRUE(c.record.w_en);
    EXPECT_EQ(c.record.d_addr, 0x03FE);
    EXPECT_EQ(s.pc, 0xC006);
    auto r = step(s);
    EXPECT_TRUE(r.record.r_en);
    EXPECT_EQ(s.pc, 0xC004);
    EXPECT_EQ(s.sp, 0x0400);
}

TEST(Machine, FaultsOnRomJumpAndMisalignment) {
    Assembler a(0xC000);
    a.jmp(0xE002);
    MachineState s = with_program(a.bytes());
    EXPECT_TRUE(step(s).fault);

    Assembler v(0xC000);
    v.jmp(0xE000);
    MachineState ok = with_program(v.bytes());
    EXPECT_FALSE(step(ok).fault);
    EXPECT_EQ(ok.pc, L.vr_entry());

    Assembler m(0xC000);
    m.load(1, 0x0301);
    MachineState mis = with_program(m.bytes());
    EXPECT_TRUE(step(mis).fault);

    MachineState undecodable = with_program({0xFF, 0xFF});
    EXPECT_TRUE(step(undecodable).fault);
}

TEST(Machine, InterruptPushesPcAndVectors) {
    Assembler a(0xC100);
    a.nop().nop();
    MachineState s = with_program(a.bytes(), 0xC100);
    auto r = step(s, std::nullopt, true);
    EXPECT_TRUE(r.record.irq);
    EXPECT_FALSE(r.record.exec);
    EXPECT_EQ(s.pc, L.irq_vector);
    EXPECT_EQ(s.read_word(0x03FE), 0xC100);
}

TEST(Machine, DmaReadLatchesAndWriteCommits) {
    MachineState s = with_program(Assembler(0xC000).nop().nop().bytes());
    auto r = step(s, DmaRequest{0, DmaRequest::Op::Read, 0x0014, 0});
    EXPECT_TRUE(r.record.dma_en);
    EXPECT_EQ(s.dma_latch, 0x5A14);
    step(s, DmaRequest{1, DmaRequest::Op::Write, 0x0301, 0xBEEF});
    EXPECT_EQ(s.read_word(0x0300), 0xBEEF);
}

TEST(Machine, CommitProtectsRomAndCounter) {
    MachineState s;
    const std::vector<PendingWrite> w{{0xE000, 1}, {L.counter_cell.lo, 2}, {0x0300, 3}, {0x0010, 4}};
    commit(s, L, w);
    EXPECT_EQ(s.read_word(0xE000), 0);
    EXPECT_EQ(s.read_word(L.counter_cell.lo), 0);
    EXPECT_EQ(s.read_word(0x0300), 3);
    EXPECT_EQ(s.gpio_out, 4);
    commit(s, L, w, true);
    EXPECT_EQ(s.read_word(L.counter_cell.lo), 2);
}

TEST(Machine, ResetRoutineClearsVolatileState) {
    MachineState s;
    std::fill(s.memory.begin(), s.memory.end(), 0xAB);
    s.gpr.fill(7);
    s.sp = 0x400;
    s.dma_latch = 9;
    s.halted = true;
    reset_routine(s, L);
    for (std::uint32_t a = L.dmem.lo; a <= L.dmem.hi; ++a) ASSERT_EQ(s.memory[a], 0);
    for (std::uint32_t a = L.ekr.lo; a <= L.ekr.hi; ++a) ASSERT_EQ(s.memory[a], 0);
    EXPECT_EQ(s.memory[L.pmem.lo], 0xAB);
    EXPECT_EQ(s.gpr[0] | s.sp | s.dma_latch, 0);
    EXPECT_TRUE(s.boot_pending);
    EXPECT_FALSE(s.halted);
    EXPECT_EQ(s.pc, L.boot_entry);
}

TEST(Machine, LoadImage) {
    std::vector<std::uint8_t> img(0xC010, 0);
    img[0xC000] = 0x42;
    const MachineState s = load_image(L, img, {0xC200, 0xC20E});
    EXPECT_EQ(s.memory[0xC000], 0x42);
    EXPECT_EQ(live_window(s, L), (ErWindow{0xC200, 0xC20E}));
    std::vector<std::uint8_t> rom(0xE001, 0);
    rom[0xE000] = 1;
    EXPECT_THROW(load_image(L, rom, {0xC200, 0xC20E}), ConfigError);
    EXPECT_THROW(load_image(L, img, {0xC201, 0xC20E}), ConfigError);
}
