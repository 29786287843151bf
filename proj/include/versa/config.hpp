/*
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "versa/crypto.hpp"
#include "versa/error.hpp"
#include "versa/layout.hpp"
#include "versa/machine.hpp"
#include "versa/simulator.hpp"

namespace versa {

inline constexpr const char* kLayoutEnv = "VERSA_LAYOUT";

inline Bytes read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + p.string());
    return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline std::string read_text(const std::filesystem::path& p) {
    Bytes b = read_file(p);
    return std::string(b.begin(), b.end());
}

inline void write_file(const std::filesystem::path& p, std::span<const std::uint8_t> data) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + p.string());
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (!out) throw ConfigError("short write to " + p.string());
}

inline void write_text(const std::filesystem::path& p, std::string_view text) {
    write_file(p, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

// --layout beats $VERSA_LAYOUT beats the built-in default.
inline MemoryLayout resolve_layout(const std::optional<std::string>& path) {
    if (path) return parse_layout(read_text(*path));
    if (const char* env = std::getenv(kLayoutEnv); env && *env) return parse_layout(read_text(env));
    return default_layout();
}

inline Key read_key(const std::filesystem::path& p) {
    Bytes b = read_file(p);
    if (b.size() != 32)
        throw ConfigError("key file " + p.string() + " holds " + std::to_string(b.size()) + " bytes, expected 32");
    Key k;
    std::copy(b.begin(), b.end(), k.begin());
    return k;
}

inline std::uint32_t parse_number(std::string_view s, const std::string& what) {
    std::uint32_t v = 0;
    int base = 10;
    if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
        s.remove_prefix(2);
        base = 16;
    }
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
    if (ec != std::errc() || p != s.data() + s.size() || s.empty()) throw ConfigError("bad " + what + " '" + std::string(s) + "'");
    return v;
}

inline ErWindow parse_window(std::string_view s) {
    auto colon = s.find(':');
    if (colon == std::string_view::npos) throw ConfigError("ER window must be ER_MIN:ER_MAX");
    const auto lo = parse_number(s.substr(0, colon), "er_min");
    const auto hi = parse_number(s.substr(colon + 1), "er_max");
    if (lo > 0xFFFF || hi > 0xFFFF) throw ConfigError("ER window beyond the address space");
    return {static_cast<Address>(lo), static_cast<Address>(hi)};
}

// Counter file: one decimal number, optional trailing newline. Missing file means 0.
inline std::uint64_t read_counter_file(const std::filesystem::path& p) {
    if (!std::filesystem::exists(p)) return 0;
    std::string t = read_text(p);
    while (!t.empty() && (t.back() == '\n' || t.back() == '\r')) t.pop_back();
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
        throw ConfigError("counter file " + p.string() + " is corrupt");
    return v;
}

struct ScheduleEvent {
    enum class Kind { Irq, Dma } kind = Kind::Irq;
    std::uint64_t cycle = 0;
    DmaRequest dma;
};

// Lines: "irq CYCLE" or "dma CYCLE read|write ADDR [VALUE]"; '#' starts a comment.
inline std::vector<ScheduleEvent> parse_schedule(std::string_view text) {
    std::vector<ScheduleEvent> out;
    std::size_t line_no = 0;
    for (std::size_t pos = 0; pos <= text.size();) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (auto h = line.find('#'); h != std::string_view::npos) line = line.substr(0, h);
        std::vector<std::string_view> f;
        for (std::size_t i = 0; i < line.size();) {
            while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
            std::size_t j = i;
            while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
            if (j > i) f.push_back(line.substr(i, j - i));
            i = j;
        }
        if (f.empty()) continue;
        const std::string where = "schedule line " + std::to_string(line_no);
        ScheduleEvent e;
        if (f[0] == "irq" && f.size() == 2) {
            e.cycle = parse_number(f[1], where + " cycle");
        } else if (f[0] == "dma" && (f.size() == 4 || f.size() == 5)) {
            e.kind = ScheduleEvent::Kind::Dma;
            e.cycle = parse_number(f[1], where + " cycle");
            if (f[2] == "read") e.dma.op = DmaRequest::Op::Read;
            else if (f[2] == "write") e.dma.op = DmaRequest::Op::Write;
            else throw ConfigError(where + ": expected read or write");
            const auto a = parse_number(f[3], where + " address");
            const auto v = f.size() == 5 ? parse_number(f[4], where + " value") : 0;
            if (a > 0xFFFF || v > 0xFFFF) throw ConfigError(where + ": value out of range");
            e.dma.at_cycle = e.cycle;
            e.dma.addr = static_cast<Address>(a);
            e.dma.value = static_cast<Word>(v);
        } else {
            throw ConfigError(where + ": expected 'irq CYCLE' or 'dma CYCLE read|write ADDR [VALUE]'");
        }
        out.push_back(e);
    }
    return out;
}

// Cycles in the schedule count from `origin`.
inline void apply_schedule(Simulator& sim, const std::vector<ScheduleEvent>& events, std::uint64_t origin = 0) {
    for (const auto& e : events) {
        if (e.kind == ScheduleEvent::Kind::Irq) {
            sim.schedule_irq(origin + e.cycle);
        } else {
            DmaRequest d = e.dma;
            d.at_cycle = origin + e.cycle;
            sim.schedule_dma(d);
        }
    }
}

}  // namespace versa
