/*
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "versa/isa.hpp"
#include "versa/layout.hpp"
#include "versa/machine.hpp"

namespace versa::samples {

// Sensor pattern: distinct, non-zero bytes so a memory scan cannot miss it.
inline constexpr std::array<std::uint8_t, 32> kMarker = {
    0xDB, 0x02, 0xB9, 0x39, 0xFD, 0x1F, 0xF1, 0x75, 0xB7, 0xFC, 0xA0, 0x61, 0xC3, 0x7B, 0x7E, 0xD8,
    0xAD, 0x27, 0x5F, 0x1A, 0xDD, 0x6F, 0x35, 0x98, 0x79, 0x82, 0xD2, 0x45, 0x54, 0x73, 0x2A, 0x41,
};

inline Word marker_word(std::size_t i) {
    i %= 16;
    return static_cast<Word>(kMarker[2 * i] | (kMarker[2 * i + 1] << 8));
}

// GPIO word i reads marker word i (mod 16), independent of time.
inline SensorFn marker_sensor(const MemoryLayout& l) {
    const Address base = l.gpio.lo;
    return [base](Address a, std::uint64_t) { return marker_word(static_cast<std::size_t>(a - base) / 2); };
}

inline bool contains_marker_byte(std::span<const std::uint8_t> mem) {
    for (auto b : mem)
        for (auto m : kMarker)
            if (b == m) return true;
    return false;
}

inline constexpr std::size_t kSenseBytes = 32;

struct SampleBinary {
    std::vector<std::uint8_t> bytes;
    ErWindow window;  // er_max is the final HALT
};

// Reads 32 bytes of GPIO into a stack buffer, one-time-pads them with eKR into `outbox`,
// wipes the buffer, the return slot and the registers, and halts on the last ER word.
inline SampleBinary sensing_app(const MemoryLayout& l, Address er_min, Address outbox) {
    const Address stack_top = static_cast<Address>(l.dmem.lo + 0x100);
    const Address buf = static_cast<Address>(stack_top - 2 - kSenseBytes);
    Assembler a(er_min);
    a.loadi(kSP, stack_top).jmp("main");

    a.label("app").loadi(0, 0).loadi(1, 0).loadi(6, 2).loadi(7, static_cast<int>(kSenseBytes));
    a.label("read");
    a.load_idx(2, 1, l.gpio.lo).store_idx(1, buf, 2).add(1, 6);
    a.loadi(4, 0).add(4, 1).sub(4, 7).brz(4, "enc_init").jmp("read");
    a.label("enc_init").loadi(1, 0);
    a.label("enc");
    a.load_idx(2, 1, buf).load_idx(3, 1, l.ekr.lo);
    a.loadi(4, 0).add(4, 2).and_(4, 3);  // a & b
    a.add(2, 3).sub(2, 4).sub(2, 4);      // a + b - 2(a & b) == a ^ b
    a.store_idx(1, outbox, 2).store_idx(1, buf, 0).add(1, 6);
    a.loadi(4, 0).add(4, 1).sub(4, 7).brz(4, "done").jmp("enc");
    a.label("done").ret();

    a.label("main").call("app");
    a.store(static_cast<Address>(stack_top - 2), 0);
    for (std::uint8_t r = 1; r < 8; ++r) a.loadi(r, 0);
    a.loadi(kSP, 0);
    a.halt();
    SampleBinary s{a.bytes(), {}};
    s.window = {er_min, static_cast<Address>(er_min + s.bytes.size() - 2)};
    return s;
}

// Authorized code that never touches GPIO.
inline SampleBinary quiet_app(Address er_min) {
    Assembler a(er_min);
    a.loadi(1, 5).loadi(2, 7).add(1, 2).loadi(1, 0).loadi(2, 0).halt();
    SampleBinary s{a.bytes(), {}};
    s.window = {er_min, static_cast<Address>(er_min + s.bytes.size() - 2)};
    return s;
}

// Reads one GPIO word and halts; the smallest sensing operation.
inline SampleBinary single_read_app(const MemoryLayout& l, Address er_min) {
    Assembler a(er_min);
    a.load(1, l.gpio.lo).loadi(1, 0).halt();
    SampleBinary s{a.bytes(), {}};
    s.window = {er_min, static_cast<Address>(er_min + s.bytes.size() - 2)};
    return s;
}

}  // namespace versa::samples
