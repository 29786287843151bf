/*
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "versa/layout.hpp"
#include "versa/ltl.hpp"

namespace versa {

enum class FormulaGroup : std::uint8_t { Machine, GpioRead, Immutability, Atomicity, EncryptionKey, EndToEnd };

inline const char* group_name(FormulaGroup g) {
    static const char* n[] = {"machine", "gpio-read", "immutability", "atomicity", "encryption-key", "end-to-end"};
    return n[static_cast<int>(g)];
}

struct CatalogueEntry {
    std::string name;
    FormulaGroup group;
    bool optional_ekr = false;  // meaningful only when eKR protection is enabled
    std::string text;
    ltl::FormulaPtr formula;

    bool is_monitor() const {
        return group == FormulaGroup::GpioRead || group == FormulaGroup::Immutability ||
               group == FormulaGroup::Atomicity || group == FormulaGroup::EncryptionKey;
    }
};

namespace detail {

inline std::string per_region(const std::string& pattern) {
    std::string out = "(&";
    for (Region r : kAllRegions) {
        std::string item = pattern;
        for (std::size_t p; (p = item.find("$R")) != std::string::npos;) item.replace(p, 2, region_name(r));
        out += "\n    " + item;
    }
    return out + ")";
}

inline std::string iff(const std::string& a, const std::string& b) { return "(& (-> " + a + " " + b + ") (-> " + b + " " + a + "))"; }

}  // namespace detail

inline std::vector<CatalogueEntry> builtin_formulas() {
    using detail::iff;
    using detail::per_region;
    struct Raw {
        const char* name;
        FormulaGroup group;
        bool opt;
        std::string text;
    };
    const std::vector<Raw> raw = {
        {"pc_tracks_exec", FormulaGroup::Machine, false, "G " + per_region("(-> (exec_in $R) (pc_in $R))")},
        {"read_tags", FormulaGroup::Machine, false, "G " + per_region(iff("(tag READ $R)", "(cpu_read $R)"))},
        {"write_tags", FormulaGroup::Machine, false, "G " + per_region(iff("(tag WRITE $R)", "(cpu_write $R)"))},
        {"dma_tags", FormulaGroup::Machine, false,
         "G " + per_region(iff("(| (tag DMA_R $R) (tag DMA_W $R))", "(dma_at $R)"))},
        {"irq_tag", FormulaGroup::Machine, false, "G " + iff("(tag IRQ)", "irq")},
        {"reset_tag", FormulaGroup::Machine, false, "G " + iff("(tag RESET)", "reset")},

        {"gpio_read_in_er", FormulaGroup::GpioRead, false, "G (-> (& (read GPIO) (! (pc_in ER))) reset)"},
        {"gpio_read_reauth", FormulaGroup::GpioRead, false,
         "G (-> (| (pc_eq ERMAX) reset) (W (| (! (read GPIO)) reset) (pc_eq IAUTH)))"},
        {"auth_no_write", FormulaGroup::Immutability, false,
         "G (-> (& (pc_eq IAUTH) (| (write ER) (write META))) reset)"},
        {"write_blocks_gpio", FormulaGroup::Immutability, false,
         "G (-> (| (write ER) (write META)) (W (| (! (read GPIO)) reset) (pc_eq IAUTH)))"},
        {"write_blocks_ekr", FormulaGroup::Immutability, true,
         "G (-> (| (write ER) (write META)) (W (| (! (read EKR)) reset) (pc_eq IAUTH)))"},
        {"er_exit", FormulaGroup::Atomicity, false,
         "G (-> (& (! reset) (pc_in ER) (! (X (pc_in ER)))) (| (pc_eq ERMAX) (X reset)))"},
        {"er_entry", FormulaGroup::Atomicity, false,
         "G (-> (& (! reset) (! (pc_in ER)) (X (pc_in ER))) (| (X (pc_eq ERMIN)) (X reset)))"},
        {"er_atomic", FormulaGroup::Atomicity, false, "G (-> (& (pc_in ER) (| irq dma)) reset)"},
        {"ekr_read_in_er", FormulaGroup::EncryptionKey, true, "G (-> (& (read EKR) (! (pc_in ER))) reset)"},
        {"ekr_read_reauth", FormulaGroup::EncryptionKey, true,
         "G (-> (| (pc_eq ERMAX) reset) (W (| (! (read EKR)) reset) (pc_eq IAUTH)))"},
        {"ekr_write_vr", FormulaGroup::EncryptionKey, true, "G (-> (& (write EKR) (! (pc_in VR))) reset)"},

        {"atomic_sensing", FormulaGroup::EndToEnd, false,
         "(& (G (-> (pc_in ER) (W (& (pc_in ER) (! irq) (! dma)) (| (pc_eq ERMAX) reset))))\n"
         "   (G (-> (& (! reset) (! (pc_in ER)) (X (pc_in ER))) (| (X (pc_eq ERMIN)) (X reset)))))"},
        {"mandatory_authorization", FormulaGroup::EndToEnd, false,
         "(& (G (-> (& (read GPIO) (! reset)) (pc_in ER)))\n"
         "   (B (& (pc_eq IAUTH)\n"
         "         (-> (pc_eq IAUTH)\n"
         "             (U (& (! (write ER)) (! (write META)) (-> (write EKR) (pc_in VR))) (pc_eq ERMIN))))\n"
         "      (& (read GPIO) (! reset))))"},
    };
    std::vector<CatalogueEntry> out;
    for (const auto& r : raw) out.push_back({r.name, r.group, r.opt, r.text, ltl::parse(r.text)});
    return out;
}

inline std::optional<CatalogueEntry> find_formula(std::string_view name) {
    for (auto& e : builtin_formulas())
        if (e.name == name) return e;
    return std::nullopt;
}

// Formulas the monitor is responsible for, optionally without the eKR ones.
inline std::vector<CatalogueEntry> monitor_formulas(bool ekr = true) {
    std::vector<CatalogueEntry> out;
    for (auto& e : builtin_formulas())
        if (e.is_monitor() && (ekr || !e.optional_ekr)) out.push_back(e);
    return out;
}

}  // namespace versa
