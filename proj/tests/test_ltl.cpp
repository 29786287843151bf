/*
 * SPDX-License-Identifier: Apache-2.0
 */
#include <gtest/gtest.h>

#include <random>

#include "versa/catalogue.hpp"
#include "versa/ltl.hpp"

using namespace versa;
using namespace versa::ltl;

namespace {

const MemoryLayout L = default_layout();

StateRecord rec(bool irq, bool dma, bool reset) {
    StateRecord r;
    r.irq = irq;
    r.dma_en = dma;
    r.reset = reset;
    r.tags = compute_tags(r, L);
    return r;
}

// Walks the successor chain explicitly: from i, the positions i, succ(i), ... visit every
// reachable position within size() steps.
bool oracle(const Formula& f, const LassoTrace& t, std::size_t i) {
    const std::size_t n = t.size();
    auto path = [&](std::size_t from) {
        std::vector<std::size_t> p;
        for (std::size_t k = 0, j = from; k < n; ++k, j = t.succ(j)) p.push_back(j);
        return p;
    };
    switch (f.op) {
        case Op::True: return true;
        case Op::False: return false;
        case Op::Prop: return eval_prop(f.prop, t.at(i), L);
        case Op::Not: return !oracle(*f.args[0], t, i);
        case Op::And:
            for (const auto& a : f.args)
                if (!oracle(*a, t, i)) return false;
            return true;
        case Op::Or:
            for (const auto& a : f.args)
                if (oracle(*a, t, i)) return true;
            return false;
        case Op::Implies: return !oracle(*f.args[0], t, i) || oracle(*f.args[1], t, i);
        case Op::Next: return oracle(*f.args[0], t, t.succ(i));
        case Op::Globally:
            for (auto j : path(i))
                if (!oracle(*f.args[0], t, j)) return false;
            return true;
        case Op::Until:
        case Op::WeakUntil:
            for (auto j : path(i)) {
                if (oracle(*f.args[1], t, j)) return true;
                if (!oracle(*f.args[0], t, j)) return false;
            }
            return f.op == Op::WeakUntil;
        case Op::Before:
            for (auto j : path(i)) {
                if (oracle(*f.args[1], t, j)) return false;
                if (oracle(*f.args[0], t, j)) return true;
            }
            return true;
    }
    return false;
}

FormulaPtr random_formula(std::mt19937& rng, int depth) {
    const char* atoms[] = {"irq", "dma", "reset", "true", "false"};
    if (depth == 0 || rng() % 4 == 0) return parse(atoms[rng() % 5]);
    switch (rng() % 10) {
        case 0: return f_not(random_formula(rng, depth - 1));
        case 1: return f_and(random_formula(rng, depth - 1), random_formula(rng, depth - 1));
        case 2: return f_or(random_formula(rng, depth - 1), random_formula(rng, depth - 1));
        case 3: return f_implies(random_formula(rng, depth - 1), random_formula(rng, depth - 1));
        case 4: return f_next(random_formula(rng, depth - 1));
        case 5: return f_globally(random_formula(rng, depth - 1));
        case 6: return f_until(random_formula(rng, depth - 1), random_formula(rng, depth - 1));
        case 7: return f_weak(random_formula(rng, depth - 1), random_formula(rng, depth - 1));
        case 8: return f_before(random_formula(rng, depth - 1), random_formula(rng, depth - 1));
        default: return f_not(f_globally(random_formula(rng, depth - 1)));
    }
}

LassoTrace random_lasso(std::mt19937& rng) {
    LassoTrace t;
    const unsigned p = rng() % 5, q = 1 + rng() % 4;
    for (unsigned i = 0; i < p; ++i) t.prefix.push_back(rec(rng() % 2, rng() % 2, rng() % 3 == 0));
    for (unsigned i = 0; i < q; ++i) t.loop.push_back(rec(rng() % 2, rng() % 2, rng() % 3 == 0));
    return t;
}

}  // namespace

TEST(LtlEval, AgreesWithPathOracle) {
    std::mt19937 rng(2024);
    for (int k = 0; k < 3000; ++k) {
        const FormulaPtr f = random_formula(rng, 4);
        const LassoTrace t = random_lasso(rng);
        const auto all = eval_all(*f, t, L);
        for (std::size_t i = 0; i < t.size(); ++i) ASSERT_EQ(all[i], oracle(*f, t, i)) << to_string(f) << " @" << i;
    }
}

TEST(LtlEval, HandPickedLassos) {
    LassoTrace t{{rec(false, false, false), rec(true, false, false)}, {rec(false, false, true)}};
    EXPECT_TRUE(eval(parse("X irq"), t, L));
    EXPECT_TRUE(eval(parse("(U (! reset) reset)"), t, L));
    EXPECT_FALSE(eval(parse("G (! irq)"), t, L));
    EXPECT_TRUE(eval(parse("G (-> irq (X reset))"), t, L));
    EXPECT_TRUE(eval(parse("(B irq reset)"), t, L));
    EXPECT_FALSE(eval(parse("(B reset irq)"), t, L));
    EXPECT_TRUE(eval(parse("X X G reset"), t, L));
    EXPECT_EQ(first_violation(*parse("G (! irq)"), t, L), 1u);
    EXPECT_EQ(first_violation(*parse("G true"), t, L), std::nullopt);
    EXPECT_THROW(eval(parse("true"), t, L, 3), Error);
}

TEST(LtlEval, LiftAppendsQuietSink) {
    const auto t = lift(std::vector<StateRecord>{rec(true, false, false)}, L);
    ASSERT_EQ(t.loop.size(), 1u);
    EXPECT_FALSE(t.loop[0].irq);
    EXPECT_TRUE(eval(parse("X G (! irq)"), t, L));
    EXPECT_THROW(lift(std::vector<StateRecord>{}, L), Error);
}

TEST(LtlProps, RegionPredicates) {
    StateRecord r;
    r.pc = 0xC202;
    r.er_min = 0xC200;
    r.er_max = 0xC20E;
    r.r_en = true;
    r.d_addr = 0x0014;
    r.exec = 0xC202;
    r.tags = compute_tags(r, L);
    const LassoTrace t{{r}, {r}};
    for (const char* yes : {"(read GPIO)", "(cpu_read GPIO)", "(pc_in ER)", "(exec_in ER)", "(tag READ GPIO)",
                            "(! (pc_eq ERMIN))", "(! (write GPIO))", "(! (read EKR))"})
        EXPECT_TRUE(eval(parse(yes), t, L)) << yes;
}

TEST(LtlParse, PrintParseRoundTrip) {
    std::mt19937 rng(7);
    for (int k = 0; k < 500; ++k) {
        const FormulaPtr f = random_formula(rng, 5);
        ASSERT_TRUE(structurally_equal(*parse(to_string(f)), *f)) << to_string(f);
    }
    for (const auto& e : builtin_formulas()) EXPECT_TRUE(structurally_equal(*parse(to_string(e.formula)), *e.formula));
}

TEST(LtlParse, ErrorsCarryPosition) {
    try {
        parse("G (->\n  irq (bogus GPIO))");
        FAIL() << "expected a parse error";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line, 2u);
        EXPECT_GT(e.column, 1u);
    }
    EXPECT_THROW(parse("(read NOWHERE)"), ParseError);
    EXPECT_THROW(parse("G irq extra"), ParseError);
    EXPECT_THROW(parse("(U irq)"), ParseError);
    EXPECT_THROW(parse(""), ParseError);
}

TEST(Catalogue, NamesAreUniqueAndFindable) {
    const auto all = builtin_formulas();
    std::set<std::string> names;
    for (const auto& e : all) {
        EXPECT_TRUE(names.insert(e.name).second) << e.name;
        ASSERT_TRUE(find_formula(e.name));
    }
    EXPECT_FALSE(find_formula("nope"));
    EXPECT_EQ(monitor_formulas(true).size(), monitor_formulas(false).size() + 4);
}
