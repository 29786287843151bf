/*
 * SPDX-License-Identifier: Apache-2.0
 */
#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "versa/experiments.hpp"
#include "versa/protocol.hpp"

using namespace versa;

namespace {

Key counting_key() {
    Key k;
    std::iota(k.begin(), k.end(), 0);
    return k;
}

const Bytes kBinary{0x11, 0x22, 0x33};

}  // namespace

// Token and wire bytes frozen from an independent Python computation.
TEST(Authorize, FrozenTokenAndWire) {
    const auto a = authorize_ctrl(counting_key(), 0, kBinary, 8);
    EXPECT_EQ(a.counter, 1u);
    EXPECT_EQ(a.message.chal, 1u);
    EXPECT_EQ(to_hex(a.message.token), "71425a8de3e1be154783cc11c2a660aaf36c6bc8c9a15d6ad8b4f3585dde2e97");
    EXPECT_EQ(to_hex(serialize(a.message)),
              "56525341000000000000000171425a8de3e1be154783cc11c2a660aaf36c6bc8c9a15d6ad8b4f3585dde2e970000000311"
              "2233");
}

TEST(Authorize, CounterStrictlyIncreases) {
    auto [msgs, counter] = authorize_batch(counting_key(), 41, kBinary, 8, 5);
    ASSERT_EQ(msgs.size(), 5u);
    EXPECT_EQ(counter, 46u);
    for (std::size_t i = 1; i < msgs.size(); ++i) {
        EXPECT_EQ(msgs[i].chal, msgs[i - 1].chal + 1);
        EXPECT_NE(msgs[i].token, msgs[i - 1].token);
    }
}

TEST(Authorize, Rejects) {
    EXPECT_THROW(authorize_ctrl(counting_key(), 0, {}, 8), SizeError);
    EXPECT_THROW(authorize_ctrl(counting_key(), 0, kBinary, 2), SizeError);
    EXPECT_THROW(authorize_ctrl(counting_key(), ~std::uint64_t{0}, kBinary, 8), Error);
}

TEST(Wire, ParseRejectsMalformed) {
    const Bytes good = serialize(authorize_ctrl(counting_key(), 0, kBinary, 8).message);
    EXPECT_NO_THROW(parse_message(good));
    EXPECT_THROW(parse_message(Bytes(good.begin(), good.begin() + 10)), FormatError);
    Bytes magic = good;
    magic[0] ^= 1;
    EXPECT_THROW(parse_message(magic), FormatError);
    Bytes longer = good;
    longer.push_back(0);
    EXPECT_THROW(parse_message(longer), FormatError);
    Bytes len = good;
    len[47] = 4;
    EXPECT_THROW(parse_message(len), FormatError);
}

TEST(Wire, RoundTripProperty) {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 500; ++i) {
        AuthorizationMessage m;
        m.chal = rng();
        for (auto& b : m.token) b = static_cast<std::uint8_t>(rng());
        m.binary.resize(rng() % 300);
        for (auto& b : m.binary) b = static_cast<std::uint8_t>(rng());
        ASSERT_EQ(parse_message(serialize(m)), m);
    }
}

TEST(PadToWindow, ZeroFills) {
    EXPECT_EQ(pad_to_window(kBinary, 6), (Bytes{0x11, 0x22, 0x33, 0, 0, 0}));
    EXPECT_EQ(pad_to_window(kBinary, 3), kBinary);
}

TEST(Controller, TracksIssuedAndUsedTokens) {
    Controller c(counting_key());
    const auto m1 = c.authorize(kBinary, 8);
    const auto m2 = c.authorize(kBinary, 8);
    EXPECT_NE(serialize(m1), serialize(m2));
    EXPECT_EQ(c.counter(), 2u);
    EXPECT_EQ(c.tokens().pending().size(), 2u);
    c.tokens().mark_used(m1.chal);
    c.tokens().mark_used(99);
    EXPECT_EQ(c.tokens().pending(), (std::set<std::uint64_t>{m2.chal}));
    EXPECT_TRUE(c.tokens().authorized_software(pad_to_window(kBinary, 8)));
    EXPECT_FALSE(c.tokens().authorized_software(pad_to_window(kBinary, 10)));
}

TEST(TokenFuzz, NoFalseVerdicts) {
    const auto s = experiments::token_fuzz(500, 9, 1);
    EXPECT_GE(s.negatives, 500u);
    EXPECT_GT(s.positives, 0u);
    EXPECT_EQ(s.false_accepts, 0u);
    EXPECT_EQ(s.false_rejects, 0u);
}
