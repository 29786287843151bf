/*
 * SPDX-License-Identifier: Apache-2.0
 */
#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>

#include "versa/config.hpp"

using namespace versa;
namespace fs = std::filesystem;

class ConfigFiles : public ::testing::Test {
protected:
    fs::path dir;
    void SetUp() override {
        dir = fs::temp_directory_path() /
              ("versa_cfg_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    void TearDown() override { fs::remove_all(dir); }
};

TEST_F(ConfigFiles, KeyMustBe32Bytes) {
    write_file(dir / "k", Bytes(32, 7));
    EXPECT_EQ(read_key(dir / "k")[31], 7);
    write_file(dir / "short", Bytes(31, 7));
    EXPECT_THROW(read_key(dir / "short"), ConfigError);
    EXPECT_THROW(read_key(dir / "missing"), ConfigError);
}

TEST_F(ConfigFiles, CounterFile) {
    EXPECT_EQ(read_counter_file(dir / "none"), 0u);
    write_text(dir / "c", "17\n");
    EXPECT_EQ(read_counter_file(dir / "c"), 17u);
    for (const char* bad : {"", "x1", "12 ", "-3\n", "1.5"}) {
        write_text(dir / "c", bad);
        EXPECT_THROW(read_counter_file(dir / "c"), ConfigError) << bad;
    }
}

TEST_F(ConfigFiles, LayoutFromEnvironment) {
    MemoryLayout l = default_layout();
    l.boot_entry = static_cast<Address>(l.pmem.lo + 0x40);
    l.irq_vector = l.boot_entry;
    write_text(dir / "layout", format_layout(l));
    ::setenv(kLayoutEnv, (dir / "layout").c_str(), 1);
    EXPECT_EQ(resolve_layout(std::nullopt).boot_entry, l.boot_entry);
    write_text(dir / "other", format_layout(default_layout()));
    EXPECT_EQ(resolve_layout((dir / "other").string()).boot_entry, default_layout().boot_entry);
    ::unsetenv(kLayoutEnv);
    EXPECT_EQ(resolve_layout(std::nullopt).boot_entry, default_layout().boot_entry);
}

TEST(ParseNumber, DecimalAndHex) {
    EXPECT_EQ(parse_number("42", "n"), 42u);
    EXPECT_EQ(parse_number("0xC200", "n"), 0xC200u);
    EXPECT_THROW(parse_number("", "n"), ConfigError);
    EXPECT_THROW(parse_number("0x", "n"), ConfigError);
    EXPECT_THROW(parse_number("12a", "n"), ConfigError);
}

TEST(ParseWindow, Bounds) {
    EXPECT_EQ(parse_window("0xC200:0xC2FE"), (ErWindow{0xC200, 0xC2FE}));
    EXPECT_THROW(parse_window("0xC200"), ConfigError);
    EXPECT_THROW(parse_window("0x10000:0x10002"), ConfigError);
}

TEST(ParseSchedule, Events) {
    const auto ev = parse_schedule("# header\nirq 12\n\ndma 3 write 0x210 0xBEEF  # tail\ndma 4 read 0x10\n");
    ASSERT_EQ(ev.size(), 3u);
    EXPECT_EQ(ev[0].kind, ScheduleEvent::Kind::Irq);
    EXPECT_EQ(ev[0].cycle, 12u);
    EXPECT_EQ(ev[1].dma.op, DmaRequest::Op::Write);
    EXPECT_EQ(ev[1].dma.addr, 0x210);
    EXPECT_EQ(ev[1].dma.value, 0xBEEF);
    EXPECT_EQ(ev[2].dma.op, DmaRequest::Op::Read);
    EXPECT_THROW(parse_schedule("irq"), ConfigError);
    EXPECT_THROW(parse_schedule("dma 1 poke 0x10"), ConfigError);
    EXPECT_THROW(parse_schedule("nmi 3"), ConfigError);
}

TEST(ApplySchedule, OffsetsByOrigin) {
    Simulator sim(SimConfig{}, Key{});
    apply_schedule(sim, parse_schedule("dma 5 read 0x10\nirq 5\n"), 0);
    EXPECT_NO_THROW(apply_schedule(sim, parse_schedule("dma 0 read 0x12\n"), 6));
    EXPECT_THROW(apply_schedule(sim, parse_schedule("dma 0 read 0x12\n"), 5), ConfigError);
}
