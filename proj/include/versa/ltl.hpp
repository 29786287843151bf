/*
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cctype>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "versa/error.hpp"
#include "versa/layout.hpp"
#include "versa/trace.hpp"

namespace versa::ltl {

enum class PropKind : std::uint8_t {
    Read,      // CPU or DMA read of a region
    Write,     // CPU write or any DMA access of a region
    CpuRead,
    CpuWrite,
    DmaAt,
    PcIn,
    PcEq,
    Tag,
    TagIrq,
    TagReset,
    ExecIn,
    Irq,
    Dma,
    Reset,
};

enum class PcPoint : std::uint8_t { Zero, ErMin, ErMax, IAuth };

struct Prop {
    PropKind kind = PropKind::Irq;
    Region region = Region::Gpio;
    PcPoint point = PcPoint::Zero;
    TagKind tag = TagKind::Read;
    friend bool operator==(const Prop&, const Prop&) = default;
};

enum class Op : std::uint8_t { True, False, Prop, Not, And, Or, Implies, Next, Globally, Until, WeakUntil, Before };

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
    Op op = Op::True;
    Prop prop;
    std::vector<FormulaPtr> args;
};

inline FormulaPtr make(Op op, std::vector<FormulaPtr> args = {}) {
    auto f = std::make_shared<Formula>();
    f->op = op;
    f->args = std::move(args);
    return f;
}
inline FormulaPtr make_prop(const Prop& p) {
    auto f = std::make_shared<Formula>();
    f->op = Op::Prop;
    f->prop = p;
    return f;
}
inline FormulaPtr f_true() { return make(Op::True); }
inline FormulaPtr f_false() { return make(Op::False); }
inline FormulaPtr f_not(FormulaPtr a) { return make(Op::Not, {std::move(a)}); }
inline FormulaPtr f_and(FormulaPtr a, FormulaPtr b) { return make(Op::And, {std::move(a), std::move(b)}); }
inline FormulaPtr f_or(FormulaPtr a, FormulaPtr b) { return make(Op::Or, {std::move(a), std::move(b)}); }
inline FormulaPtr f_implies(FormulaPtr a, FormulaPtr b) { return make(Op::Implies, {std::move(a), std::move(b)}); }
inline FormulaPtr f_next(FormulaPtr a) { return make(Op::Next, {std::move(a)}); }
inline FormulaPtr f_globally(FormulaPtr a) { return make(Op::Globally, {std::move(a)}); }
inline FormulaPtr f_until(FormulaPtr a, FormulaPtr b) { return make(Op::Until, {std::move(a), std::move(b)}); }
inline FormulaPtr f_weak(FormulaPtr a, FormulaPtr b) { return make(Op::WeakUntil, {std::move(a), std::move(b)}); }
inline FormulaPtr f_before(FormulaPtr a, FormulaPtr b) { return make(Op::Before, {std::move(a), std::move(b)}); }

inline bool structurally_equal(const Formula& a, const Formula& b) {
    if (a.op != b.op || a.args.size() != b.args.size()) return false;
    if (a.op == Op::Prop && !(a.prop == b.prop)) return false;
    for (std::size_t i = 0; i < a.args.size(); ++i)
        if (!structurally_equal(*a.args[i], *b.args[i])) return false;
    return true;
}

// ---------------------------------------------------------------- propositions

inline bool eval_prop(const Prop& p, const StateRecord& r, const MemoryLayout& l) {
    const ErWindow er = r.window();
    auto in = [&](Address a) { return l.in_region(p.region, a, er); };
    switch (p.kind) {
        case PropKind::Read: return (r.r_en && in(r.d_addr)) || (r.dma_en && in(r.dma_addr));
        case PropKind::Write: return (r.w_en && in(r.d_addr)) || (r.dma_en && in(r.dma_addr));
        case PropKind::CpuRead: return r.r_en && in(r.d_addr);
        case PropKind::CpuWrite: return r.w_en && in(r.d_addr);
        case PropKind::DmaAt: return r.dma_en && in(r.dma_addr);
        case PropKind::PcIn: return in(r.pc);
        case PropKind::PcEq:
            switch (p.point) {
                case PcPoint::Zero: return r.pc == 0;
                case PcPoint::ErMin: return r.pc == r.er_min;
                case PcPoint::ErMax: return r.pc == r.er_max;
                case PcPoint::IAuth: return r.pc == l.i_auth;
            }
            return false;
        case PropKind::Tag: return r.has(p.tag, p.region);
        case PropKind::TagIrq: return r.has_irq_tag();
        case PropKind::TagReset: return r.has_reset_tag();
        case PropKind::ExecIn: return r.exec && in(*r.exec);
        case PropKind::Irq: return r.irq;
        case PropKind::Dma: return r.dma_en;
        case PropKind::Reset: return r.reset;
    }
    return false;
}

// ---------------------------------------------------------------- printer

namespace detail {

inline const char* point_name(PcPoint p) {
    static const char* n[] = {"ZERO", "ERMIN", "ERMAX", "IAUTH"};
    return n[static_cast<int>(p)];
}
inline const char* tag_name(TagKind k) {
    static const char* n[] = {"READ", "WRITE", "DMA_R", "DMA_W"};
    return n[static_cast<int>(k)];
}

}  // namespace detail

inline std::string to_string(const Prop& p) {
    auto reg = [&] { return std::string(region_name(p.region)); };
    switch (p.kind) {
        case PropKind::Read: return "(read " + reg() + ")";
        case PropKind::Write: return "(write " + reg() + ")";
        case PropKind::CpuRead: return "(cpu_read " + reg() + ")";
        case PropKind::CpuWrite: return "(cpu_write " + reg() + ")";
        case PropKind::DmaAt: return "(dma_at " + reg() + ")";
        case PropKind::PcIn: return "(pc_in " + reg() + ")";
        case PropKind::PcEq: return std::string("(pc_eq ") + detail::point_name(p.point) + ")";
        case PropKind::Tag: return std::string("(tag ") + detail::tag_name(p.tag) + " " + reg() + ")";
        case PropKind::TagIrq: return "(tag IRQ)";
        case PropKind::TagReset: return "(tag RESET)";
        case PropKind::ExecIn: return "(exec_in " + reg() + ")";
        case PropKind::Irq: return "irq";
        case PropKind::Dma: return "dma";
        case PropKind::Reset: return "reset";
    }
    return "?";
}

inline std::string to_string(const Formula& f) {
    static const char* heads[] = {"true", "false", "", "!", "&", "|", "->", "X", "G", "U", "W", "B"};
    switch (f.op) {
        case Op::True: return "true";
        case Op::False: return "false";
        case Op::Prop: return to_string(f.prop);
        default: break;
    }
    std::string s = "(";
    s += heads[static_cast<int>(f.op)];
    for (const auto& a : f.args) s += " " + to_string(*a);
    return s + ")";
}
inline std::string to_string(const FormulaPtr& f) { return to_string(*f); }

// ---------------------------------------------------------------- parser

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    FormulaPtr parse() {
        FormulaPtr f = formula();
        skip_ws();
        if (pos_ != text_.size()) fail("trailing input '" + std::string(peek_word()) + "'");
        return f;
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what, std::optional<std::size_t> at = std::nullopt) const {
        std::size_t off = at.value_or(pos_);
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i < off && i < text_.size(); ++i) {
            if (text_[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ParseError(what, off, line, col);
    }

    void skip_ws() {
        while (pos_ < text_.size()) {
            if (std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            else if (text_[pos_] == ';') {
                while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
            } else break;
        }
    }

    static bool word_char(char c) { return c != '(' && c != ')' && c != ';' && !std::isspace(static_cast<unsigned char>(c)); }

    std::string_view peek_word() const {
        std::size_t e = pos_;
        while (e < text_.size() && word_char(text_[e])) ++e;
        return text_.substr(pos_, e - pos_);
    }

    std::string_view word() {
        skip_ws();
        if (pos_ >= text_.size()) fail("unexpected end of input");
        std::string_view w = peek_word();
        if (w.empty()) fail(std::string("expected a word, found '") + text_[pos_] + "'");
        pos_ += w.size();
        return w;
    }

    void expect(char c) {
        skip_ws();
        if (pos_ >= text_.size()) fail(std::string("expected '") + c + "', found end of input");
        if (text_[pos_] != c) fail(std::string("expected '") + c + "', found '" + text_[pos_] + "'");
        ++pos_;
    }

    bool at(char c) {
        skip_ws();
        return pos_ < text_.size() && text_[pos_] == c;
    }

    static std::optional<Op> op_of(std::string_view w) {
        if (w == "!" || w == "not") return Op::Not;
        if (w == "&" || w == "and") return Op::And;
        if (w == "|" || w == "or") return Op::Or;
        if (w == "->" || w == "implies") return Op::Implies;
        if (w == "X") return Op::Next;
        if (w == "G") return Op::Globally;
        if (w == "U") return Op::Until;
        if (w == "W") return Op::WeakUntil;
        if (w == "B") return Op::Before;
        return std::nullopt;
    }

    Region region_arg() {
        skip_ws();
        const std::size_t at_pos = pos_;
        std::string_view w = word();
        auto r = region_from_name(w);
        if (!r) fail("unknown region '" + std::string(w) + "'", at_pos);
        return *r;
    }

    std::optional<FormulaPtr> bare_atom(std::string_view w) {
        Prop p;
        if (w == "true") return f_true();
        if (w == "false") return f_false();
        if (w == "irq") p.kind = PropKind::Irq;
        else if (w == "dma") p.kind = PropKind::Dma;
        else if (w == "reset") p.kind = PropKind::Reset;
        else return std::nullopt;
        return make_prop(p);
    }

    // Body of "(head ...)" after the head word for propositions.
    std::optional<FormulaPtr> prop_body(std::string_view head, std::size_t head_pos) {
        Prop p;
        if (head == "read") p.kind = PropKind::Read;
        else if (head == "write") p.kind = PropKind::Write;
        else if (head == "cpu_read") p.kind = PropKind::CpuRead;
        else if (head == "cpu_write") p.kind = PropKind::CpuWrite;
        else if (head == "dma_at") p.kind = PropKind::DmaAt;
        else if (head == "pc_in") p.kind = PropKind::PcIn;
        else if (head == "exec_in") p.kind = PropKind::ExecIn;
        else if (head == "in_er") {
            skip_ws();
            const std::size_t a = pos_;
            if (word() != "pc") fail("in_er takes 'pc'", a);
            p.kind = PropKind::PcIn;
            p.region = Region::Er;
            return make_prop(p);
        } else if (head == "pc_eq") {
            skip_ws();
            const std::size_t a = pos_;
            std::string_view w = word();
            p.kind = PropKind::PcEq;
            if (w == "ZERO" || w == "0") p.point = PcPoint::Zero;
            else if (w == "ERMIN") p.point = PcPoint::ErMin;
            else if (w == "ERMAX") p.point = PcPoint::ErMax;
            else if (w == "IAUTH") p.point = PcPoint::IAuth;
            else fail("unknown pc point '" + std::string(w) + "'", a);
            return make_prop(p);
        } else if (head == "tag") {
            skip_ws();
            const std::size_t a = pos_;
            std::string_view w = word();
            if (w == "IRQ") p.kind = PropKind::TagIrq;
            else if (w == "RESET") p.kind = PropKind::TagReset;
            else {
                p.kind = PropKind::Tag;
                if (w == "READ") p.tag = TagKind::Read;
                else if (w == "WRITE") p.tag = TagKind::Write;
                else if (w == "DMA_R") p.tag = TagKind::DmaR;
                else if (w == "DMA_W") p.tag = TagKind::DmaW;
                else fail("unknown tag '" + std::string(w) + "'", a);
                p.region = region_arg();
            }
            return make_prop(p);
        } else {
            if (auto b = bare_atom(head)) return b;
            (void)head_pos;
            return std::nullopt;
        }
        p.region = region_arg();
        return make_prop(p);
    }

    FormulaPtr operator_body(Op op, std::size_t head_pos) {
        std::vector<FormulaPtr> args;
        while (!at(')')) {
            if (pos_ >= text_.size()) fail("unexpected end of input, missing ')'");
            args.push_back(formula());
        }
        const std::size_t n = args.size();
        auto arity = [&](std::size_t want) {
            if (n != want) fail("operator expects " + std::to_string(want) + " operand(s), got " + std::to_string(n), head_pos);
        };
        switch (op) {
            case Op::Not: case Op::Next: case Op::Globally: arity(1); break;
            case Op::Implies: case Op::Until: case Op::WeakUntil: case Op::Before: arity(2); break;
            case Op::And: case Op::Or:
                if (n < 2) fail("operator expects at least 2 operands", head_pos);
                break;
            default: break;
        }
        return make(op, std::move(args));
    }

    FormulaPtr formula() {
        skip_ws();
        if (pos_ >= text_.size()) fail("unexpected end of input");
        if (text_[pos_] == ')') fail("unexpected ')'");
        if (text_[pos_] == '(') {
            ++pos_;
            skip_ws();
            FormulaPtr f;
            if (at('(')) {
                f = formula();
            } else {
                const std::size_t head_pos = pos_;
                std::string_view head = word();
                if (auto op = op_of(head)) {
                    f = operator_body(*op, head_pos);
                } else if (auto p = prop_body(head, head_pos)) {
                    f = *p;
                } else {
                    fail("unknown operator or proposition '" + std::string(head) + "'", head_pos);
                }
            }
            expect(')');
            return f;
        }
        const std::size_t w_pos = pos_;
        std::string_view w = word();
        if (auto op = op_of(w)) {
            if (*op == Op::Not || *op == Op::Next || *op == Op::Globally) return make(*op, {formula()});
            fail("binary operator '" + std::string(w) + "' must be parenthesized", w_pos);
        }
        if (auto b = bare_atom(w)) return *b;
        fail("unknown atom '" + std::string(w) + "'", w_pos);
    }
};

inline FormulaPtr parse(std::string_view text) { return Parser(text).parse(); }

// ---------------------------------------------------------------- lasso semantics

// Positions 0..n-1; the successor of the last position is loop_start.
struct LassoTrace {
    std::vector<StateRecord> prefix;
    std::vector<StateRecord> loop;

    std::size_t size() const { return prefix.size() + loop.size(); }
    const StateRecord& at(std::size_t i) const { return i < prefix.size() ? prefix[i] : loop[i - prefix.size()]; }
    std::size_t succ(std::size_t i) const { return i + 1 < size() ? i + 1 : prefix.size(); }
};

// Quiet record that repeats forever once a finite run stops.
inline StateRecord sink_record(const StateRecord& last, const MemoryLayout& l) {
    StateRecord s;
    s.cycle = last.cycle + 1;
    s.pc = last.pc;
    s.er_min = last.er_min;
    s.er_max = last.er_max;
    s.tags = compute_tags(s, l);
    return s;
}

inline LassoTrace lift(const std::vector<StateRecord>& records, const MemoryLayout& l) {
    if (records.empty()) throw Error("cannot lift an empty trace");
    return {records, {sink_record(records.back(), l)}};
}
inline LassoTrace lift(const Trace& t, const MemoryLayout& l) { return lift(t.records, l); }

// Truth value of every subformula at every position, computed bottom-up with fixpoints.
inline std::vector<bool> eval_all(const Formula& f, const LassoTrace& t, const MemoryLayout& l) {
    const std::size_t n = t.size();
    std::vector<bool> v(n);
    auto fix = [&](bool init, auto&& rule) {
        std::fill(v.begin(), v.end(), init);
        for (bool changed = true; changed;) {
            changed = false;
            for (std::size_t i = n; i-- > 0;) {
                const bool nv = rule(i, static_cast<bool>(v[t.succ(i)]));
                if (nv != v[i]) {
                    v[i] = nv;
                    changed = true;
                }
            }
        }
    };
    switch (f.op) {
        case Op::True: std::fill(v.begin(), v.end(), true); return v;
        case Op::False: return v;
        case Op::Prop:
            for (std::size_t i = 0; i < n; ++i) v[i] = eval_prop(f.prop, t.at(i), l);
            return v;
        default: break;
    }
    std::vector<std::vector<bool>> a;
    for (const auto& arg : f.args) a.push_back(eval_all(*arg, t, l));
    switch (f.op) {
        case Op::Not:
            for (std::size_t i = 0; i < n; ++i) v[i] = !a[0][i];
            break;
        case Op::And:
            for (std::size_t i = 0; i < n; ++i) {
                bool x = true;
                for (const auto& s : a) x = x && s[i];
                v[i] = x;
            }
            break;
        case Op::Or:
            for (std::size_t i = 0; i < n; ++i) {
                bool x = false;
                for (const auto& s : a) x = x || s[i];
                v[i] = x;
            }
            break;
        case Op::Implies:
            for (std::size_t i = 0; i < n; ++i) v[i] = !a[0][i] || a[1][i];
            break;
        case Op::Next:
            for (std::size_t i = 0; i < n; ++i) v[i] = a[0][t.succ(i)];
            break;
        case Op::Globally: fix(true, [&](std::size_t i, bool nx) { return a[0][i] && nx; }); break;
        case Op::Until: fix(false, [&](std::size_t i, bool nx) { return a[1][i] || (a[0][i] && nx); }); break;
        case Op::WeakUntil: fix(true, [&](std::size_t i, bool nx) { return a[1][i] || (a[0][i] && nx); }); break;
        case Op::Before: fix(true, [&](std::size_t i, bool nx) { return !a[1][i] && (a[0][i] || nx); }); break;
        default: break;
    }
    return v;
}

inline bool eval(const Formula& f, const LassoTrace& t, const MemoryLayout& l, std::size_t pos = 0) {
    if (pos >= t.size()) throw Error("position outside the lasso");
    return eval_all(f, t, l)[pos];
}
inline bool eval(const FormulaPtr& f, const LassoTrace& t, const MemoryLayout& l, std::size_t pos = 0) {
    return eval(*f, t, l, pos);
}

// First position where G's operand fails, for reporting.
inline std::optional<std::size_t> first_violation(const Formula& f, const LassoTrace& t, const MemoryLayout& l) {
    if (f.op != Op::Globally) return eval(f, t, l) ? std::nullopt : std::optional<std::size_t>(0);
    auto v = eval_all(*f.args[0], t, l);
    for (std::size_t i = 0; i < v.size(); ++i)
        if (!v[i]) return i;
    return std::nullopt;
}

}  // namespace versa::ltl
