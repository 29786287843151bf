/*
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "versa/error.hpp"

namespace versa {

using Word = std::uint16_t;
using Address = std::uint16_t;

inline constexpr std::uint32_t kMemorySize = 0x10000;

struct Range {
    Address lo = 0;
    Address hi = 0;

    constexpr bool contains(std::uint32_t a) const { return lo <= a && a <= hi; }
    constexpr std::uint32_t size() const { return std::uint32_t(hi) - lo + 1; }
    constexpr bool overlaps(const Range& o) const { return lo <= o.hi && o.lo <= hi; }
    constexpr bool within(const Range& o) const { return o.lo <= lo && hi <= o.hi; }
    friend constexpr bool operator==(const Range&, const Range&) = default;
};

// Regions a proposition or tag can name. Er is the live window from METADATA.
enum class Region : std::uint8_t { Gpio, Ekr, Er, Meta, Vr, Rom, Pmem, Dmem, Mailbox, Counter };
inline constexpr std::size_t kRegionCount = 10;
inline constexpr std::array<Region, kRegionCount> kAllRegions = {
    Region::Gpio, Region::Ekr,  Region::Er,   Region::Meta,    Region::Vr,
    Region::Rom,  Region::Pmem, Region::Dmem, Region::Mailbox, Region::Counter};

inline std::string_view region_name(Region r) {
    static constexpr std::array<std::string_view, kRegionCount> names = {
        "GPIO", "EKR", "ER", "META", "VR", "ROM", "PMEM", "DMEM", "MAILBOX", "COUNTER"};
    return names[static_cast<std::size_t>(r)];
}

inline std::optional<Region> region_from_name(std::string_view s) {
    for (Region r : kAllRegions)
        if (region_name(r) == s) return r;
    if (s == "METADATA") return Region::Meta;
    return std::nullopt;
}

struct ErWindow {
    Address er_min = 0;
    Address er_max = 0;

    constexpr bool contains(std::uint32_t pc) const { return er_min <= pc && pc <= er_max; }
    constexpr bool empty() const { return er_min > er_max; }
    // Bytes covered: the last instruction word starts at er_max.
    constexpr std::uint32_t size_bytes() const { return empty() ? 0 : std::uint32_t(er_max) - er_min + 2; }
    friend constexpr bool operator==(const ErWindow&, const ErWindow&) = default;
};

struct MemoryLayout {
    Range rom, pmem, dmem, gpio, ekr, vr, er_metadata, atok_mailbox, counter_cell;
    Address i_auth = 0;
    Address boot_entry = 0;
    Address irq_vector = 0;
    // Address width the layout is meant for; below 16 only the model checker uses it.
    unsigned width = 16;

    Address er_min_cell() const { return er_metadata.lo; }
    Address er_max_cell() const { return static_cast<Address>(width == 16 ? er_metadata.lo + 2 : er_metadata.hi); }
    Address vr_entry() const { return vr.lo; }
    std::uint32_t address_limit() const { return 1u << width; }

    // Er has no fixed range; callers resolve it against the live window.
    Range region(Region r) const {
        switch (r) {
            case Region::Gpio: return gpio;
            case Region::Ekr: return ekr;
            case Region::Meta: return er_metadata;
            case Region::Vr: return vr;
            case Region::Rom: return rom;
            case Region::Pmem: return pmem;
            case Region::Dmem: return dmem;
            case Region::Mailbox: return atok_mailbox;
            case Region::Counter: return counter_cell;
            case Region::Er: break;
        }
        throw ConfigError("ER has no fixed range");
    }

    bool in_region(Region r, std::uint32_t a, const ErWindow& er) const {
        return r == Region::Er ? er.contains(a) : region(r).contains(a);
    }

    friend bool operator==(const MemoryLayout&, const MemoryLayout&) = default;

    void validate() const;
};

namespace detail {

struct NamedRange {
    const char* name;
    Range MemoryLayout::*member;
};

inline constexpr std::array<NamedRange, 9> kRangeKeys = {{
    {"rom", &MemoryLayout::rom},
    {"pmem", &MemoryLayout::pmem},
    {"dmem", &MemoryLayout::dmem},
    {"gpio", &MemoryLayout::gpio},
    {"ekr", &MemoryLayout::ekr},
    {"vr", &MemoryLayout::vr},
    {"er_metadata", &MemoryLayout::er_metadata},
    {"atok_mailbox", &MemoryLayout::atok_mailbox},
    {"counter_cell", &MemoryLayout::counter_cell},
}};

// vr nests inside rom; every other range must be disjoint from the rest.
inline constexpr std::array<std::size_t, 8> kDisjointKeys = {0, 1, 2, 3, 4, 6, 7, 8};

inline std::string hex16(std::uint32_t v) {
    static const char* digits = "0123456789ABCDEF";
    std::string s = "0x0000";
    for (int i = 0; i < 4; ++i) s[5 - i] = digits[(v >> (4 * i)) & 0xF];
    return s;
}

inline std::uint32_t parse_hex(std::string_view s, std::size_t line) {
    if (s.size() < 3 || s[0] != '0' || (s[1] != 'x' && s[1] != 'X'))
        throw ConfigError("line " + std::to_string(line) + ": expected hexadecimal 0x.... value, got '" +
                          std::string(s) + "'");
    std::uint32_t v = 0;
    for (char c : s.substr(2)) {
        int d;
        if (c >= '0' && c <= '9') d = c - '0';
        else if (c >= 'a' && c <= 'f') d = c - 'a' + 10;
        else if (c >= 'A' && c <= 'F') d = c - 'A' + 10;
        else throw ConfigError("line " + std::to_string(line) + ": bad hex digit in '" + std::string(s) + "'");
        v = v * 16 + d;
        if (v > 0xFFFF) throw ConfigError("line " + std::to_string(line) + ": address out of range");
    }
    return v;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

}  // namespace detail

inline void MemoryLayout::validate() const {
    const std::uint32_t limit = address_limit();
    for (const auto& key : detail::kRangeKeys) {
        const Range& r = this->*key.member;
        if (r.lo > r.hi) throw ConfigError(std::string(key.name) + ": start after end");
        if (r.hi >= limit) throw ConfigError(std::string(key.name) + ": beyond address width");
    }
    for (std::size_t i = 0; i < detail::kDisjointKeys.size(); ++i)
        for (std::size_t j = i + 1; j < detail::kDisjointKeys.size(); ++j) {
            const auto& a = detail::kRangeKeys[detail::kDisjointKeys[i]];
            const auto& b = detail::kRangeKeys[detail::kDisjointKeys[j]];
            if ((this->*a.member).overlaps(this->*b.member))
                throw ConfigError(std::string(a.name) + " overlaps " + b.name);
        }
    if (!vr.within(rom)) throw ConfigError("vr must lie inside rom");
    if (!rom.contains(i_auth)) throw ConfigError("i_auth must lie inside rom");
    if (i_auth == vr.lo) throw ConfigError("i_auth must differ from the Verify entry");
    if (i_auth == 0) throw ConfigError("i_auth must not be address 0");
    if (!pmem.contains(boot_entry)) throw ConfigError("boot_entry must lie inside pmem");
    if (!pmem.contains(irq_vector)) throw ConfigError("irq_vector must lie inside pmem");
    if (width == 16) {
        for (const auto& key : detail::kRangeKeys) {
            const Range& r = this->*key.member;
            if (r.lo % 2 != 0 || r.hi % 2 != 1) throw ConfigError(std::string(key.name) + ": not word aligned");
        }
        if (i_auth % 2 || boot_entry % 2 || irq_vector % 2) throw ConfigError("entry addresses must be even");
        if (er_metadata.size() < 4) throw ConfigError("er_metadata needs two words");
        if (atok_mailbox.size() < 40) throw ConfigError("atok_mailbox needs 40 bytes");
        if (counter_cell.size() < 8) throw ConfigError("counter_cell needs 8 bytes");
    }
}

inline MemoryLayout default_layout() {
    MemoryLayout l;
    l.gpio = {0x0010, 0x002F};
    l.ekr = {0x0030, 0x004F};
    l.er_metadata = {0x0050, 0x0053};
    l.counter_cell = {0x0058, 0x005F};
    l.atok_mailbox = {0x0060, 0x0087};
    l.dmem = {0x0200, 0x09FF};
    l.pmem = {0xC000, 0xDFFF};
    l.rom = {0xE000, 0xFFFF};
    l.vr = {0xE000, 0xEFFF};
    l.i_auth = 0xF000;
    l.boot_entry = 0xC000;
    l.irq_vector = 0xC000;
    return l;
}

inline MemoryLayout parse_layout(std::string_view text) {
    MemoryLayout l;
    std::map<std::string, bool> seen;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool irq_set = false;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected name=value");
        std::string name(detail::trim(line.substr(0, eq)));
        std::string_view value = detail::trim(line.substr(eq + 1));
        if (seen[name]) throw ConfigError("line " + std::to_string(line_no) + ": duplicate key " + name);
        seen[name] = true;

        bool handled = false;
        for (const auto& key : detail::kRangeKeys) {
            if (name != key.name) continue;
            auto colon = value.find(':');
            if (colon == std::string_view::npos)
                throw ConfigError("line " + std::to_string(line_no) + ": expected 0xSTART:0xEND");
            Range r{static_cast<Address>(detail::parse_hex(detail::trim(value.substr(0, colon)), line_no)),
                    static_cast<Address>(detail::parse_hex(detail::trim(value.substr(colon + 1)), line_no))};
            l.*key.member = r;
            handled = true;
        }
        if (handled) continue;
        if (name == "i_auth") l.i_auth = static_cast<Address>(detail::parse_hex(value, line_no));
        else if (name == "boot_entry") l.boot_entry = static_cast<Address>(detail::parse_hex(value, line_no));
        else if (name == "irq_vector") {
            l.irq_vector = static_cast<Address>(detail::parse_hex(value, line_no));
            irq_set = true;
        } else throw ConfigError("line " + std::to_string(line_no) + ": unknown key " + name);
    }
    for (const auto& key : detail::kRangeKeys)
        if (!seen[key.name]) throw ConfigError(std::string("missing key ") + key.name);
    if (!seen["i_auth"]) throw ConfigError("missing key i_auth");
    if (!seen["boot_entry"]) throw ConfigError("missing key boot_entry");
    if (!irq_set) l.irq_vector = l.boot_entry;
    l.validate();
    return l;
}

inline std::string format_layout(const MemoryLayout& l) {
    std::ostringstream os;
    for (const auto& key : detail::kRangeKeys) {
        const Range& r = l.*key.member;
        os << key.name << '=' << detail::hex16(r.lo) << ':' << detail::hex16(r.hi) << '\n';
    }
    os << "i_auth=" << detail::hex16(l.i_auth) << '\n';
    os << "boot_entry=" << detail::hex16(l.boot_entry) << '\n';
    os << "irq_vector=" << detail::hex16(l.irq_vector) << '\n';
    return os.str();
}

// Proportional rescale to a narrower address space. Regions that collapse onto each
// other are pushed apart in address order; address 0 stays free for the reset vector.
inline MemoryLayout scale_layout(const MemoryLayout& l, unsigned width) {
    if (width < 4 || width > 16) throw ConfigError("width must be between 4 and 16");
    const unsigned shift = 16 - width;
    const std::uint32_t limit = 1u << width;
    MemoryLayout s = l;
    s.width = width;

    std::vector<std::size_t> order(detail::kDisjointKeys.begin(), detail::kDisjointKeys.end());
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return (l.*detail::kRangeKeys[a].member).lo < (l.*detail::kRangeKeys[b].member).lo;
    });
    std::uint32_t next = 1;
    for (std::size_t idx : order) {
        const Range& src = l.*detail::kRangeKeys[idx].member;
        std::uint32_t lo = std::max<std::uint32_t>(src.lo >> shift, next);
        std::uint32_t hi = std::max<std::uint32_t>(src.hi >> shift, lo);
        if (hi >= limit) throw ConfigError("layout does not fit in " + std::to_string(width) + " address bits");
        s.*detail::kRangeKeys[idx].member = Range{static_cast<Address>(lo), static_cast<Address>(hi)};
        next = hi + 1;
    }

    auto clamp_into = [](std::uint32_t v, const Range& r) {
        return static_cast<Address>(std::clamp<std::uint32_t>(v, r.lo, r.hi));
    };
    s.vr = Range{clamp_into(l.vr.lo >> shift, s.rom), clamp_into(l.vr.hi >> shift, s.rom)};
    if (s.vr.hi == s.rom.hi && s.rom.size() > 1) s.vr.hi = static_cast<Address>(s.rom.hi - 1);
    if (s.vr.lo > s.vr.hi) s.vr.lo = s.vr.hi;
    s.i_auth = clamp_into(l.i_auth >> shift, s.rom);
    if (s.vr.contains(s.i_auth)) s.i_auth = static_cast<Address>(s.vr.hi + 1);
    s.boot_entry = clamp_into(l.boot_entry >> shift, s.pmem);
    s.irq_vector = clamp_into(l.irq_vector >> shift, s.pmem);
    s.validate();
    return s;
}

// Window must be word aligned and sit inside pmem or dmem, clear of every protected range.
inline bool window_valid(const MemoryLayout& l, const ErWindow& w) {
    if (w.empty()) return false;
    if (l.width == 16 && (w.er_min % 2 || w.er_max % 2)) return false;
    const std::uint32_t last = l.width == 16 ? std::uint32_t(w.er_max) + 1 : w.er_max;
    Range span{w.er_min, static_cast<Address>(std::min<std::uint32_t>(last, 0xFFFF))};
    if (last > 0xFFFF) return false;
    return span.within(l.pmem) || span.within(l.dmem);
}

inline void validate_window(const MemoryLayout& l, const ErWindow& w) {
    if (!window_valid(l, w))
        throw ConfigError("ER window " + detail::hex16(w.er_min) + ":" + detail::hex16(w.er_max) +
                          " must be word aligned and lie inside pmem or dmem");
}

}  // namespace versa
