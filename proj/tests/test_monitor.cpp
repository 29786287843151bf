/*
 * SPDX-License-Identifier: Apache-2.0
 */
#include <gtest/gtest.h>

#include <functional>

#include "versa/monitor.hpp"

using namespace versa;

namespace {

constexpr unsigned kSignalCount = 15;

Signals from_bits(unsigned b) {
    Signals s;
    bool* f[kSignalCount] = {&s.pc_zero,    &s.pc_in_er,    &s.pc_eq_ermin,   &s.pc_eq_ermax, &s.pc_eq_iauth,
                             &s.pc_in_vr,   &s.read_gpio,   &s.read_ekr,      &s.write_er,    &s.write_meta,
                             &s.cpu_write_ekr, &s.dma_ekr,  &s.irq,           &s.dma,         &s.core_reset};
    for (unsigned i = 0; i < kSignalCount; ++i) *f[i] = (b >> i) & 1;
    return s;
}

// Signal combinations that a real cycle can produce.
bool coherent(const Signals& s) {
    if ((s.pc_eq_ermin || s.pc_eq_ermax) && !s.pc_in_er) return false;
    if (s.dma_ekr && !s.dma) return false;
    return true;
}

void for_all(const std::function<void(const MonitorState&, const Signals&)>& fn) {
    for (unsigned st = 0; st < kMonitorStateCount; ++st)
        for (unsigned b = 0; b < (1u << kSignalCount); ++b) {
            const Signals s = from_bits(b);
            if (coherent(s)) fn(MonitorState::from_index(st), s);
        }
}

const MonitorConfig kNominal{};

}  // namespace

TEST(MonitorState, IndexRoundTrip) {
    for (unsigned i = 0; i < kMonitorStateCount; ++i) EXPECT_EQ(MonitorState::from_index(i).index(), i);
}

TEST(MonitorProperty, ResetForcesEveryFsmToReset) {
    for_all([](const MonitorState& m, const Signals& s) {
        const auto out = monitor_step(m, s, kNominal);
        if (out.reset) {
            ASSERT_EQ(out.next.gpio, GpioState::Reset);
            ASSERT_EQ(out.next.ekr, EkrState::Reset);
            ASSERT_EQ(out.next.atom, AtomState::Reset);
        }
        ASSERT_EQ(out.reset, out.monitor_reset || s.core_reset);
        ASSERT_EQ(out.next.global_reset, out.reset);
    });
}

TEST(MonitorProperty, GpioReadOutsideErResets) {
    for_all([](const MonitorState& m, const Signals& s) {
        if (s.read_gpio && !s.pc_in_er) {
            ASSERT_TRUE(monitor_step(m, s, kNominal).reset);
        }
    });
}

TEST(MonitorProperty, ReadWhileLockedResets) {
    for_all([](const MonitorState& m, const Signals& s) {
        if ((m.gpio == GpioState::Lock || m.gpio == GpioState::Reset) && (s.read_gpio || s.read_ekr)) {
            ASSERT_TRUE(monitor_step(m, s, kNominal).reset);
        }
    });
}

TEST(MonitorProperty, InterruptOrDmaInsideErResets) {
    for_all([](const MonitorState& m, const Signals& s) {
        if (s.pc_in_er && (s.irq || s.dma)) {
            ASSERT_TRUE(monitor_step(m, s, kNominal).reset);
        }
    });
}

TEST(MonitorProperty, EkrWriteOutsideVrResets) {
    for_all([](const MonitorState& m, const Signals& s) {
        if ((s.cpu_write_ekr && !s.pc_in_vr) || s.dma_ekr) {
            ASSERT_TRUE(monitor_step(m, s, kNominal).reset);
        }
    });
}

TEST(MonitorProperty, WithoutEkrItsPropertiesAreOff) {
    const MonitorConfig off{false, Mutant::None};
    for_all([&](const MonitorState& m, const Signals& s) {
        if (m.ekr == EkrState::Unlock) {
            ASSERT_EQ(step_ekr_write_fsm(m.ekr, s, off).first, EkrState::Unlock);
        }
    });
}

TEST(MonitorProperty, ResetIsSticky) {
    for_all([](const MonitorState& m, const Signals& s) {
        if (m.gpio == GpioState::Reset && m.atom == AtomState::Reset && m.ekr == EkrState::Reset && !s.pc_zero) {
            ASSERT_TRUE(monitor_step(m, s, kNominal).reset);
        }
    });
}

TEST(MonitorProperty, EveryMutantChangesSomeTransition) {
    for (const auto& info : kMutants) {
        SCOPED_TRACE(std::string(info.name));
        const MonitorConfig mu{true, info.id};
        bool differs = false;
        for_all([&](const MonitorState& m, const Signals& s) {
            if (differs) return;
            const auto a = monitor_step(m, s, kNominal), b = monitor_step(m, s, mu);
            differs = a.next != b.next || a.reset != b.reset;
        });
        EXPECT_TRUE(differs);
    }
}

TEST(MonitorFsm, AuthorizationUnlocksGpio) {
    Signals boot;
    boot.pc_zero = true;
    auto st = monitor_step(MonitorState{}, boot, kNominal);
    ASSERT_FALSE(st.reset);
    EXPECT_EQ(st.next.gpio, GpioState::Lock);
    EXPECT_EQ(st.next.atom, AtomState::NotEr);

    Signals auth;
    auth.pc_eq_iauth = true;
    st = monitor_step(st.next, auth, kNominal);
    EXPECT_EQ(st.next.gpio, GpioState::Unlock);

    Signals first;
    first.pc_in_er = first.pc_eq_ermin = true;
    st = monitor_step(st.next, first, kNominal);
    EXPECT_EQ(st.next.atom, AtomState::FirstEr);

    Signals read;
    read.pc_in_er = read.read_gpio = true;
    st = monitor_step(st.next, read, kNominal);
    ASSERT_FALSE(st.reset);
    EXPECT_EQ(st.next.atom, AtomState::MidEr);

    Signals last;
    last.pc_in_er = last.pc_eq_ermax = true;
    st = monitor_step(st.next, last, kNominal);
    EXPECT_EQ(st.next.gpio, GpioState::Lock);
    EXPECT_EQ(st.next.atom, AtomState::LastEr);

    st = monitor_step(st.next, Signals{}, kNominal);
    ASSERT_FALSE(st.reset);
    EXPECT_EQ(st.next.atom, AtomState::NotEr);
    Signals late;
    late.pc_in_er = late.read_gpio = true;
    EXPECT_TRUE(monitor_step(st.next, late, kNominal).reset);
}

TEST(MonitorFsm, WriteAtAuthorizationResets) {
    MonitorState m;
    m.gpio = GpioState::Lock;
    m.atom = AtomState::NotEr;
    m.ekr = EkrState::Unlock;
    Signals s;
    s.pc_eq_iauth = s.write_er = true;
    EXPECT_TRUE(monitor_step(m, s, kNominal).reset);
}

TEST(MonitorFsm, MidErEntryResets) {
    MonitorState m;
    m.gpio = GpioState::Unlock;
    m.atom = AtomState::NotEr;
    m.ekr = EkrState::Unlock;
    Signals s;
    s.pc_in_er = true;
    EXPECT_TRUE(monitor_step(m, s, kNominal).reset);
    EXPECT_FALSE(monitor_step(m, s, {true, Mutant::AtomEntryAnywhere}).reset);
}

TEST(MonitorInputs, SampledFromRecordFields) {
    const MemoryLayout l = default_layout();
    MonitorInput in;
    in.pc = 0xC204;
    in.er_min = 0xC200;
    in.er_max = 0xC210;
    in.r_en = true;
    in.d_addr = 0x0012;
    in.dma_en = true;
    in.dma_addr = 0x0052;
    const Signals s = sample(l, in);
    EXPECT_TRUE(s.pc_in_er);
    EXPECT_FALSE(s.pc_eq_ermin);
    EXPECT_TRUE(s.read_gpio);
    EXPECT_TRUE(s.write_meta);
    EXPECT_TRUE(s.dma);
    EXPECT_FALSE(s.read_ekr);
}
