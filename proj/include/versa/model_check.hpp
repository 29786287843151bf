/*
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "versa/error.hpp"
#include "versa/layout.hpp"
#include "versa/ltl.hpp"
#include "versa/monitor.hpp"
#include "versa/trace.hpp"

namespace versa::mc {

// Formula needs a strong eventuality, which bad-prefix exploration cannot refute.
struct UnsupportedFormula : Error {
    using Error::Error;
};

// ---------------------------------------------------------------- residual formulas

enum class RKind : std::uint8_t { True, False, Lit, And, Or, Next, Glob, Weak };

struct RNode {
    RKind kind = RKind::True;
    ltl::Prop prop;
    bool positive = true;
    std::vector<std::uint32_t> kids;
};

// Hash-consed negation-normal-form formulas, closed under progression.
class ResidualTable {
public:
    static constexpr std::uint32_t kTrue = 0;
    static constexpr std::uint32_t kFalse = 1;

    ResidualTable() {
        intern({RKind::True, {}, true, {}});
        intern({RKind::False, {}, true, {}});
    }

    std::size_t size() const { return nodes_.size(); }
    const RNode& node(std::uint32_t id) const { return nodes_[id]; }

    std::uint32_t from_formula(const ltl::Formula& f) { return build(f, false); }

    std::uint32_t lit(const ltl::Prop& p, bool positive) {
        RNode n{RKind::Lit, p, positive, {}};
        return intern(std::move(n));
    }

    std::uint32_t conj(std::vector<std::uint32_t> kids) { return junction(RKind::And, std::move(kids)); }
    std::uint32_t disj(std::vector<std::uint32_t> kids) { return junction(RKind::Or, std::move(kids)); }

    std::uint32_t next(std::uint32_t a) {
        if (a == kTrue || a == kFalse) return a;
        return intern({RKind::Next, {}, true, {a}});
    }
    std::uint32_t glob(std::uint32_t a) {
        if (a == kTrue || a == kFalse) return a;
        return intern({RKind::Glob, {}, true, {a}});
    }
    std::uint32_t weak(std::uint32_t a, std::uint32_t b) {
        if (b == kTrue || a == kTrue) return kTrue;
        if (a == kFalse) return b;
        if (b == kFalse) return glob(a);
        return intern({RKind::Weak, {}, true, {a, b}});
    }

    // One step of formula progression over a record; `letter` keys the memo.
    std::uint32_t progress(std::uint32_t id, std::uint64_t letter, const StateRecord& rec, const MemoryLayout& l) {
        auto key = std::make_pair(id, letter);
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;
        const RNode n = nodes_[id];
        std::uint32_t out = id;
        switch (n.kind) {
            case RKind::True: case RKind::False: break;
            case RKind::Lit: out = ltl::eval_prop(n.prop, rec, l) == n.positive ? kTrue : kFalse; break;
            case RKind::And: case RKind::Or: {
                std::vector<std::uint32_t> ks;
                for (auto k : n.kids) ks.push_back(progress(k, letter, rec, l));
                out = n.kind == RKind::And ? conj(std::move(ks)) : disj(std::move(ks));
                break;
            }
            case RKind::Next: out = n.kids[0]; break;
            case RKind::Glob: out = conj({progress(n.kids[0], letter, rec, l), id}); break;
            case RKind::Weak:
                out = disj({progress(n.kids[1], letter, rec, l), conj({progress(n.kids[0], letter, rec, l), id})});
                break;
        }
        memo_.emplace(key, out);
        return out;
    }

    std::string to_string(std::uint32_t id) const {
        const RNode& n = nodes_[id];
        switch (n.kind) {
            case RKind::True: return "true";
            case RKind::False: return "false";
            case RKind::Lit: return n.positive ? ltl::to_string(n.prop) : "(! " + ltl::to_string(n.prop) + ")";
            default: break;
        }
        static const char* heads[] = {"", "", "", "&", "|", "X", "G", "W"};
        std::string s = std::string("(") + heads[static_cast<int>(n.kind)];
        for (auto k : n.kids) s += " " + to_string(k);
        return s + ")";
    }

private:
    struct PairHash {
        std::size_t operator()(const std::pair<std::uint32_t, std::uint64_t>& p) const {
            return std::hash<std::uint64_t>()(p.second * 0x9E3779B97F4A7C15ull ^ p.first);
        }
    };

    std::vector<RNode> nodes_;
    std::map<std::tuple<RKind, std::uint8_t, std::uint8_t, std::uint8_t, std::uint8_t, bool, std::vector<std::uint32_t>>,
             std::uint32_t>
        index_;
    std::unordered_map<std::pair<std::uint32_t, std::uint64_t>, std::uint32_t, PairHash> memo_;

    std::uint32_t intern(RNode n) {
        auto key = std::make_tuple(n.kind, static_cast<std::uint8_t>(n.prop.kind), static_cast<std::uint8_t>(n.prop.region),
                                   static_cast<std::uint8_t>(n.prop.point), static_cast<std::uint8_t>(n.prop.tag),
                                   n.positive, n.kids);
        if (n.kind != RKind::Lit) std::get<1>(key) = std::get<2>(key) = std::get<3>(key) = std::get<4>(key) = 0;
        if (auto it = index_.find(key); it != index_.end()) return it->second;
        const auto id = static_cast<std::uint32_t>(nodes_.size());
        nodes_.push_back(std::move(n));
        index_.emplace(std::move(key), id);
        return id;
    }

    std::uint32_t junction(RKind kind, std::vector<std::uint32_t> kids) {
        const std::uint32_t unit = kind == RKind::And ? kTrue : kFalse;
        const std::uint32_t zero = kind == RKind::And ? kFalse : kTrue;
        std::vector<std::uint32_t> flat;
        for (auto k : kids) {
            if (k == zero) return zero;
            if (k == unit) continue;
            if (nodes_[k].kind == kind) flat.insert(flat.end(), nodes_[k].kids.begin(), nodes_[k].kids.end());
            else flat.push_back(k);
        }
        std::sort(flat.begin(), flat.end());
        flat.erase(std::unique(flat.begin(), flat.end()), flat.end());
        for (auto k : flat) {
            const RNode& n = nodes_[k];
            if (n.kind == RKind::Lit && std::binary_search(flat.begin(), flat.end(), lit(n.prop, !n.positive)))
                return zero;
        }
        if (flat.empty()) return unit;
        if (flat.size() == 1) return flat[0];
        return intern({kind, {}, true, std::move(flat)});
    }

    std::uint32_t build(const ltl::Formula& f, bool neg) {
        using ltl::Op;
        auto unsupported = [&](const char* what) -> std::uint32_t {
            throw UnsupportedFormula(std::string("formula needs ") + what +
                                     ", outside the safety fragment the exhaustive check decides");
        };
        switch (f.op) {
            case Op::True: return neg ? kFalse : kTrue;
            case Op::False: return neg ? kTrue : kFalse;
            case Op::Prop: return lit(f.prop, !neg);
            case Op::Not: return build(*f.args[0], !neg);
            case Op::And: case Op::Or: {
                std::vector<std::uint32_t> ks;
                for (const auto& a : f.args) ks.push_back(build(*a, neg));
                return (f.op == Op::And) != neg ? conj(std::move(ks)) : disj(std::move(ks));
            }
            case Op::Implies:
                if (neg) return conj({build(*f.args[0], false), build(*f.args[1], true)});
                return disj({build(*f.args[0], true), build(*f.args[1], false)});
            case Op::Next: return next(build(*f.args[0], neg));
            case Op::Globally:
                if (neg) return unsupported("an eventuality (negated G)");
                return glob(build(*f.args[0], false));
            case Op::Until:
                if (!neg) return unsupported("a strong until");
                return weak(build(*f.args[1], true), conj({build(*f.args[0], true), build(*f.args[1], true)}));
            case Op::WeakUntil:
                if (neg) return unsupported("a strong until (negated W)");
                return weak(build(*f.args[0], false), build(*f.args[1], false));
            case Op::Before:
                // a B b == !b W (a & !b)
                if (neg) return unsupported("a strong until (negated B)");
                return weak(build(*f.args[1], true), conj({build(*f.args[0], false), build(*f.args[1], true)}));
        }
        return kTrue;
    }
};

inline bool supported(const ltl::Formula& f) {
    try {
        ResidualTable().from_formula(f);
        return true;
    } catch (const UnsupportedFormula&) {
        return false;
    }
}

// ---------------------------------------------------------------- quotient alphabet

// A letter is the valuation of every predicate the monitor or a formula can observe.
namespace bits {
inline constexpr unsigned kPcZero = 0, kPcErMin = 1, kPcErMax = 2, kPcIAuth = 3, kPcIn = 4;
inline constexpr unsigned kREn = 16, kWEn = 17, kDIn = 18;
inline constexpr unsigned kDmaEn = 32, kDmaW = 33, kMIn = 34;
inline constexpr unsigned kIrq = 48, kCore = 49;
inline constexpr unsigned kReset = 50;  // monitor output, folded into memo keys only
inline constexpr std::uint64_t bit(unsigned b) { return std::uint64_t{1} << b; }
inline constexpr std::uint64_t region_bit(unsigned base, Region r) { return bit(base + static_cast<unsigned>(r)); }
}  // namespace bits

inline std::uint64_t pc_bits(const MemoryLayout& l, Address pc, const ErWindow& er) {
    using namespace bits;
    std::uint64_t k = 0;
    if (pc == 0) k |= bit(kPcZero);
    if (pc == er.er_min) k |= bit(kPcErMin);
    if (pc == er.er_max) k |= bit(kPcErMax);
    if (pc == l.i_auth) k |= bit(kPcIAuth);
    for (Region r : kAllRegions)
        if (l.in_region(r, pc, er)) k |= region_bit(kPcIn, r);
    return k;
}

inline std::uint64_t d_bits(const MemoryLayout& l, bool r_en, bool w_en, Address d, const ErWindow& er) {
    using namespace bits;
    if (!r_en && !w_en) return 0;
    std::uint64_t k = (r_en ? bit(kREn) : 0) | (w_en ? bit(kWEn) : 0);
    for (Region r : kAllRegions)
        if (l.in_region(r, d, er)) k |= region_bit(kDIn, r);
    return k;
}

inline std::uint64_t m_bits(const MemoryLayout& l, bool en, bool write, Address a, const ErWindow& er) {
    using namespace bits;
    if (!en) return 0;
    std::uint64_t k = bit(kDmaEn) | (write ? bit(kDmaW) : 0);
    for (Region r : kAllRegions)
        if (l.in_region(r, a, er)) k |= region_bit(kMIn, r);
    return k;
}

inline std::uint64_t monitor_mask() {
    using namespace bits;
    std::uint64_t m = bit(kPcZero) | bit(kPcErMin) | bit(kPcErMax) | bit(kPcIAuth) | bit(kREn) | bit(kWEn) |
                      bit(kDmaEn) | bit(kIrq) | bit(kCore);
    m |= region_bit(kPcIn, Region::Er) | region_bit(kPcIn, Region::Vr);
    for (Region r : {Region::Gpio, Region::Ekr, Region::Er, Region::Meta})
        m |= region_bit(kDIn, r) | region_bit(kMIn, r);
    return m;
}

inline std::uint64_t formula_mask(const ltl::Formula& f) {
    using namespace bits;
    using ltl::PropKind;
    std::uint64_t m = 0;
    if (f.op == ltl::Op::Prop) {
        const auto& p = f.prop;
        const std::uint64_t d = region_bit(kDIn, p.region), a = region_bit(kMIn, p.region);
        switch (p.kind) {
            case PropKind::Read: m = bit(kREn) | d | bit(kDmaEn) | a; break;
            case PropKind::Write: m = bit(kWEn) | d | bit(kDmaEn) | a; break;
            case PropKind::CpuRead: m = bit(kREn) | d; break;
            case PropKind::CpuWrite: m = bit(kWEn) | d; break;
            case PropKind::DmaAt: m = bit(kDmaEn) | a; break;
            case PropKind::PcIn: case PropKind::ExecIn: m = region_bit(kPcIn, p.region); break;
            case PropKind::PcEq: m = bit(static_cast<unsigned>(p.point)); break;
            case PropKind::Tag:
                switch (p.tag) {
                    case TagKind::Read: m = bit(kREn) | d; break;
                    case TagKind::Write: m = bit(kWEn) | d; break;
                    case TagKind::DmaR: case TagKind::DmaW: m = bit(kDmaEn) | bit(kDmaW) | a; break;
                }
                break;
            case PropKind::TagIrq: case PropKind::Irq: m = bit(kIrq); break;
            case PropKind::Dma: m = bit(kDmaEn); break;
            case PropKind::TagReset: case PropKind::Reset: break;
        }
    }
    for (const auto& a : f.args) m |= formula_mask(*a);
    return m;
}

struct Letter {
    std::uint64_t key = 0;
    MonitorInput input;
    bool dma_write = false;
};

struct Alphabet {
    std::uint64_t mask = 0;
    std::vector<Letter> letters;  // sorted by key
};

// Every realizable projected valuation at the layout's width, with one concrete witness each.
inline Alphabet build_alphabet(const MemoryLayout& l, std::uint64_t mask) {
    using namespace bits;
    const std::uint32_t limit = l.address_limit();
    struct Part {
        std::uint64_t key;
        bool a, b;
        Address addr;
    };
    using Parts = std::map<std::uint64_t, Part>;
    std::map<std::tuple<std::vector<std::uint64_t>, std::vector<std::uint64_t>, std::vector<std::uint64_t>>, ErWindow>
        signatures;
    std::vector<std::tuple<ErWindow, Parts, Parts, Parts>> classes;
    for (std::uint32_t lo = 0; lo < limit; ++lo)
        for (std::uint32_t hi = 0; hi < limit; ++hi) {
            const ErWindow er{static_cast<Address>(lo), static_cast<Address>(hi)};
            Parts pcs, ds, ms;
            for (std::uint32_t a = 0; a < limit; ++a) {
                const Address ad = static_cast<Address>(a);
                std::uint64_t k = pc_bits(l, ad, er) & mask;
                pcs.emplace(k, Part{k, false, false, ad});
                for (int rw = 0; rw < 4; ++rw) {
                    k = d_bits(l, rw & 1, rw & 2, ad, er) & mask;
                    ds.emplace(k, Part{k, bool(rw & 1), bool(rw & 2), ad});
                    k = m_bits(l, rw & 1, rw & 2, ad, er) & mask;
                    ms.emplace(k, Part{k, bool(rw & 1), bool(rw & 2), ad});
                }
            }
            auto keys = [](const Parts& p) {
                std::vector<std::uint64_t> v;
                for (const auto& [k, _] : p) v.push_back(k);
                return v;
            };
            if (signatures.emplace(std::make_tuple(keys(pcs), keys(ds), keys(ms)), er).second)
                classes.emplace_back(er, std::move(pcs), std::move(ds), std::move(ms));
        }

    std::map<std::uint64_t, Letter> letters;
    for (const auto& [er, pcs, ds, ms] : classes)
        for (const auto& [pk, pp] : pcs)
            for (const auto& [dk, dp] : ds)
                for (const auto& [mk, mp] : ms)
                    for (int x = 0; x < 4; ++x) {
                        const bool irq = x & 1, core = x & 2;
                        const std::uint64_t key = (pk | dk | mk | (irq ? bit(kIrq) : 0) | (core ? bit(kCore) : 0)) & mask;
                        if (letters.count(key)) continue;
                        Letter L;
                        L.key = key;
                        L.input = MonitorInput{pp.addr, dp.a, dp.b, dp.addr, mp.a, mp.addr, irq, er.er_min, er.er_max, core};
                        if (!dp.a && !dp.b) L.input.d_addr = 0;
                        if (!mp.a) L.input.dma_addr = 0;
                        L.dma_write = mp.a && mp.b;
                        letters.emplace(key, L);
                    }
    Alphabet out;
    out.mask = mask;
    for (auto& [k, L] : letters) out.letters.push_back(L);
    return out;
}

inline StateRecord letter_record(const MonitorInput& in, bool dma_write, bool reset, const MemoryLayout& l,
                                 std::uint64_t cycle = 0) {
    StateRecord r;
    r.cycle = cycle;
    r.pc = in.pc;
    r.r_en = in.r_en;
    r.w_en = in.w_en;
    r.d_addr = in.d_addr;
    r.dma_en = in.dma_en;
    r.dma_write = in.dma_en && dma_write;
    r.dma_addr = in.dma_addr;
    r.irq = in.irq;
    r.reset = reset;
    r.er_min = in.er_min;
    r.er_max = in.er_max;
    if (!in.irq) r.exec = in.pc;
    r.tags = compute_tags(r, l);
    return r;
}

// ---------------------------------------------------------------- replay

struct Counterexample {
    std::vector<Letter> inputs;  // the bad prefix; the lasso repeats its last letter
    ltl::LassoTrace lasso;
};

// Runs the monitor from power-on over the inputs, then repeats the last input until the
// monitor state recurs, closing the loop.
inline ltl::LassoTrace replay_lasso(const std::vector<Letter>& inputs, const MemoryLayout& l, const MonitorConfig& cfg) {
    if (inputs.empty()) throw Error("empty input sequence");
    std::vector<StateRecord> recs;
    MonitorState m;
    auto step = [&](const Letter& L) {
        MonitorStep ms = monitor_step(m, L.input, l, cfg);
        recs.push_back(letter_record(L.input, L.dma_write, ms.reset, l, recs.size()));
        m = ms.next;
    };
    for (std::size_t i = 0; i + 1 < inputs.size(); ++i) step(inputs[i]);
    std::map<unsigned, std::size_t> seen;
    while (true) {
        const unsigned idx = m.index();
        if (auto it = seen.find(idx); it != seen.end()) {
            ltl::LassoTrace t;
            t.prefix.assign(recs.begin(), recs.begin() + static_cast<std::ptrdiff_t>(it->second));
            t.loop.assign(recs.begin() + static_cast<std::ptrdiff_t>(it->second), recs.end());
            return t;
        }
        seen.emplace(idx, recs.size());
        step(inputs.back());
    }
}

// ---------------------------------------------------------------- exhaustive check

struct CheckOptions {
    unsigned width = 6;
    MonitorConfig monitor;
    std::uint64_t state_budget = 5'000'000;
};

struct CheckResult {
    bool holds = true;
    std::optional<Counterexample> counterexample;
    std::uint64_t explored_states = 0;
    std::uint64_t transitions = 0;
    std::size_t alphabet_size = 0;
    std::size_t residuals = 0;
};

class ExhaustiveChecker {
public:
    ExhaustiveChecker(MemoryLayout layout, MonitorConfig monitor) : layout_(std::move(layout)), monitor_(monitor) {}

    static ExhaustiveChecker at_width(const MemoryLayout& base, const CheckOptions& opt) {
        return ExhaustiveChecker(scale_layout(base, opt.width), opt.monitor);
    }

    const MemoryLayout& layout() const { return layout_; }

    const Alphabet& alphabet_for(std::uint64_t mask) {
        auto it = alphabets_.find(mask);
        if (it == alphabets_.end()) it = alphabets_.emplace(mask, build_alphabet(layout_, mask)).first;
        return it->second;
    }

    CheckResult check(const ltl::Formula& f, std::uint64_t state_budget = 5'000'000) {
        ResidualTable table;
        const std::uint32_t root = table.from_formula(f);
        const Alphabet& alpha = alphabet_for(monitor_mask() | formula_mask(f));
        CheckResult res;
        res.alphabet_size = alpha.letters.size();

        struct Node {
            unsigned monitor;
            std::uint32_t residual;
            std::int64_t parent;
            std::uint32_t letter;
        };
        std::vector<Node> nodes;
        std::unordered_map<std::uint64_t, std::size_t> seen;
        auto state_key = [](unsigned m, std::uint32_t r) { return (std::uint64_t{r} << 8) | m; };

        const MonitorState init;
        nodes.push_back({init.index(), root, -1, 0});
        seen.emplace(state_key(init.index(), root), 0);
        if (root == ResidualTable::kFalse) {
            res.holds = false;
            res.explored_states = 1;
            res.residuals = table.size();
            Counterexample cex{{alpha.letters.front()}, replay_lasso({alpha.letters.front()}, layout_, monitor_)};
            res.counterexample = std::move(cex);
            return res;
        }
        std::vector<StateRecord> recs(alpha.letters.size());

        for (std::size_t q = 0; q < nodes.size(); ++q) {
            const Node cur = nodes[q];
            const MonitorState ms = MonitorState::from_index(cur.monitor);
            for (std::uint32_t li = 0; li < alpha.letters.size(); ++li) {
                const Letter& L = alpha.letters[li];
                const MonitorStep st = monitor_step(ms, L.input, layout_, monitor_);
                const StateRecord rec = letter_record(L.input, L.dma_write, st.reset, layout_);
                const std::uint64_t memo_key = L.key | (st.reset ? bits::bit(bits::kReset) : 0);
                const std::uint32_t r = table.progress(cur.residual, memo_key, rec, layout_);
                ++res.transitions;
                if (r == ResidualTable::kFalse) {
                    res.holds = false;
                    res.explored_states = nodes.size();
                    res.residuals = table.size();
                    res.counterexample = build_counterexample(f, alpha, nodes, q, li);
                    return res;
                }
                const unsigned nm = st.next.index();
                if (seen.emplace(state_key(nm, r), nodes.size()).second) {
                    nodes.push_back({nm, r, static_cast<std::int64_t>(q), li});
                    if (nodes.size() > state_budget)
                        throw ResourceError("exhaustive check exceeded its budget of " + std::to_string(state_budget) +
                                            " product states");
                }
            }
        }
        res.explored_states = nodes.size();
        res.residuals = table.size();
        return res;
    }

private:
    MemoryLayout layout_;
    MonitorConfig monitor_;
    std::map<std::uint64_t, Alphabet> alphabets_;

    template <class Nodes>
    Counterexample build_counterexample(const ltl::Formula& f, const Alphabet& alpha, const Nodes& nodes, std::size_t q,
                                        std::uint32_t last) {
        std::vector<Letter> path{alpha.letters[last]};
        for (std::int64_t i = static_cast<std::int64_t>(q); nodes[i].parent >= 0; i = nodes[i].parent)
            path.push_back(alpha.letters[nodes[i].letter]);
        std::reverse(path.begin(), path.end());
        Counterexample cex{path, replay_lasso(path, layout_, monitor_)};
        if (ltl::eval(f, cex.lasso, layout_)) throw Error("counterexample does not reproduce under replay");
        return cex;
    }
};

// ---------------------------------------------------------------- brute-force cross-check

struct BruteResult {
    bool violated = false;
    std::uint64_t sequences = 0;
    std::vector<Letter> witness;
};

struct BruteOptions {
    std::size_t pair_letters = 400;  // stride subset used for length-2 sequences
    std::uint64_t random_samples = 2000;
    std::vector<unsigned> random_lengths{3, 6};
    std::uint64_t seed = 1;
};

// Every single-letter sequence, every pair over a stride subset of the alphabet, and seeded
// random sequences of the given lengths, each closed into a lasso and judged by the evaluator.
inline BruteResult brute_force(const ltl::Formula& f, const MemoryLayout& l, const MonitorConfig& cfg,
                               const Alphabet& alpha, const BruteOptions& opt = {}) {
    BruteResult out;
    const std::size_t k = alpha.letters.size();
    if (k == 0) return out;
    std::vector<Letter> seq;
    auto judge = [&] {
        ++out.sequences;
        if (!out.violated && !ltl::eval(f, replay_lasso(seq, l, cfg), l)) {
            out.violated = true;
            out.witness = seq;
        }
    };
    for (std::size_t i = 0; i < k && !out.violated; ++i) {
        seq = {alpha.letters[i]};
        judge();
    }
    const std::size_t stride = std::max<std::size_t>(1, k / std::max<std::size_t>(1, opt.pair_letters));
    for (std::size_t i = 0; i < k && !out.violated; i += stride)
        for (std::size_t j = 0; j < k && !out.violated; j += stride) {
            seq = {alpha.letters[i], alpha.letters[j]};
            judge();
        }
    std::mt19937_64 rng(opt.seed);
    std::uniform_int_distribution<std::size_t> pick(0, k - 1);
    for (unsigned len : opt.random_lengths)
        for (std::uint64_t s = 0; s < opt.random_samples && !out.violated; ++s) {
            seq.clear();
            for (unsigned i = 0; i < len; ++i) seq.push_back(alpha.letters[pick(rng)]);
            judge();
        }
    return out;
}

}  // namespace versa::mc
