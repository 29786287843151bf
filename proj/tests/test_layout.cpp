/*
 * SPDX-License-Identifier: Apache-2.0
 */
#include <gtest/gtest.h>

#include "versa/layout.hpp"

using namespace versa;

TEST(Layout, DefaultIsValid) {
    const MemoryLayout l = default_layout();
    EXPECT_NO_THROW(l.validate());
    EXPECT_EQ(l.vr_entry(), l.vr.lo);
    EXPECT_EQ(l.er_min_cell(), 0x0050);
    EXPECT_EQ(l.er_max_cell(), 0x0052);
}

TEST(Layout, FormatParseRoundTrip) {
    const MemoryLayout l = default_layout();
    const MemoryLayout p = parse_layout(format_layout(l));
    EXPECT_EQ(format_layout(p), format_layout(l));
    EXPECT_EQ(p.i_auth, l.i_auth);
    EXPECT_EQ(p.ekr, l.ekr);
}

TEST(Layout, IrqVectorDefaultsToBootEntry) {
    std::string text = format_layout(default_layout());
    const auto at = text.find("irq_vector");
    text.erase(at, text.find('\n', at) - at + 1);
    const MemoryLayout l = parse_layout(text);
    EXPECT_EQ(l.irq_vector, l.boot_entry);
}

TEST(Layout, ParseRejects) {
    const std::string good = format_layout(default_layout());
    EXPECT_THROW(parse_layout(good + "i_auth=0xF000\n"), ConfigError);
    EXPECT_THROW(parse_layout(good + "bogus=0x1\n"), ConfigError);
    EXPECT_THROW(parse_layout("rom=0xE000:0xFFFF\n"), ConfigError);
    std::string overlap = good;
    overlap.replace(overlap.find("ekr=0x0030"), 10, "ekr=0x0020");
    EXPECT_THROW(parse_layout(overlap), ConfigError);
    std::string odd = good;
    odd.replace(odd.find("i_auth=0xF000"), 13, "i_auth=0xF001");
    EXPECT_THROW(parse_layout(odd), ConfigError);
}

TEST(Layout, ScalesToEveryWidth) {
    for (unsigned w = 4; w <= 16; ++w) {
        SCOPED_TRACE(w);
        const MemoryLayout s = scale_layout(default_layout(), w);
        EXPECT_NO_THROW(s.validate());
        EXPECT_EQ(s.width, w);
        EXPECT_TRUE(s.vr.within(s.rom));
        EXPECT_NE(s.i_auth, s.vr_entry());
        EXPECT_LT(std::uint32_t(s.rom.hi), 1u << w);
    }
    EXPECT_THROW(scale_layout(default_layout(), 3), ConfigError);
    EXPECT_THROW(scale_layout(default_layout(), 17), ConfigError);
}

TEST(Layout, ScalingKeepsRegionOrder) {
    const MemoryLayout l = default_layout(), s = scale_layout(l, 6);
    EXPECT_LT(s.gpio.hi, s.ekr.lo);
    EXPECT_LT(s.ekr.hi, s.er_metadata.lo);
    EXPECT_LT(s.dmem.hi, s.pmem.lo);
    EXPECT_LT(s.pmem.hi, s.rom.lo);
}

TEST(Window, Validity) {
    const MemoryLayout l = default_layout();
    EXPECT_TRUE(window_valid(l, {0xC200, 0xC2FE}));
    EXPECT_TRUE(window_valid(l, {0x0400, 0x0400}));
    EXPECT_FALSE(window_valid(l, {0xC201, 0xC2FE}));
    EXPECT_FALSE(window_valid(l, {0xC2FE, 0xC200}));
    EXPECT_FALSE(window_valid(l, {0xDFF0, 0xE010}));
    EXPECT_FALSE(window_valid(l, {0x0010, 0x0020}));
    EXPECT_FALSE(window_valid(l, {0xDFFE, 0xDFFE + 2}));
    EXPECT_THROW(validate_window(l, {0x0030, 0x0040}), ConfigError);
    EXPECT_EQ((ErWindow{0xC200, 0xC2FE}.size_bytes()), 0x100u);
}

TEST(Regions, ErIsTheLiveWindow) {
    const MemoryLayout l = default_layout();
    const ErWindow er{0xC200, 0xC20E};
    EXPECT_TRUE(l.in_region(Region::Er, 0xC20E, er));
    EXPECT_FALSE(l.in_region(Region::Er, 0xC210, er));
    EXPECT_TRUE(l.in_region(Region::Gpio, 0x0010, er));
    for (Region r : kAllRegions) EXPECT_EQ(region_from_name(region_name(r)), r);
}
