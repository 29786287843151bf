/*
 * SPDX-License-Identifier: Apache-2.0
 */
#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "versa/crypto.hpp"
#include "versa/experiments.hpp"

using namespace versa;

namespace {

Key counting_key() {
    Key k;
    std::iota(k.begin(), k.end(), 0);
    return k;
}

}  // namespace

TEST(Hmac, Rfc4231Vectors) {
    for (const auto& kat : experiments::hmac_kats()) EXPECT_EQ(to_hex(hmac_sha256(kat.key, kat.data)), kat.mac);
}

TEST(Hmac, Sha256OfEmptyInput) {
    EXPECT_EQ(to_hex(sha256({})), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

// Values computed independently with Python's hmac module.
TEST(Kdf, DomainSeparatedSubkeys) {
    const Key k = counting_key();
    EXPECT_EQ(to_hex(kdf(k, 7, kLabelAuth)), "df627df209c0ae37620b56bfc3917865473d7a427dd1b501a09ac8aa42b36b78");
    EXPECT_EQ(to_hex(kdf(k, 7, kLabelEnc)), "00668c353a4aefcc980f3fcaf7f8af64d4db03dc77ea3c110e826f1a4cc9ae84");
    EXPECT_NE(kdf(k, 7, kLabelAuth), kdf(k, 8, kLabelAuth));
}

TEST(Keystream, SpansSeveralBlocks) {
    const Bytes ks = keystream(kdf(counting_key(), 7, kLabelEnc), 70);
    EXPECT_EQ(to_hex(ks),
              "3b0641f71c6037d7ab869f8024ca12ec4b34377c8bf07992e54add5ed9c5c515bcbcb57c87f62d24102dcaf0d51295bf637ce1"
              "78c872f5227832eeb4bc1bedfbc646950acadb");
    EXPECT_THROW(keystream({}, kMaxKeystream + 1), SizeError);
}

TEST(Keystream, PrefixStable) {
    const Key k = kdf(counting_key(), 3, kLabelEnc);
    const Bytes a = keystream(k, 100), b = keystream(k, 33);
    EXPECT_TRUE(std::equal(b.begin(), b.end(), a.begin()));
}

TEST(Otp, RoundTripProperty) {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 300; ++i) {
        Key key;
        for (auto& b : key) b = static_cast<std::uint8_t>(rng());
        const std::uint64_t chal = rng();
        Bytes plain(rng() % 200);
        for (auto& b : plain) b = static_cast<std::uint8_t>(rng());
        const Bytes cipher = encrypt_output(kdf(key, chal, kLabelEnc), plain);
        ASSERT_EQ(cipher.size(), plain.size());
        ASSERT_EQ(decrypt_ctrl(key, chal, cipher), plain);
        if (!plain.empty()) {
            ASSERT_NE(decrypt_ctrl(key, chal + 1, cipher), plain);
        }
    }
}

TEST(Hex, RoundTripAndRejects) {
    const Bytes b{0x00, 0x7f, 0xff, 0x10};
    EXPECT_EQ(to_hex(b), "007fff10");
    EXPECT_EQ(from_hex("007FFF10"), b);
    EXPECT_THROW(from_hex("abc"), FormatError);
    EXPECT_THROW(from_hex("zz"), FormatError);
}

TEST(DigestEqual, ComparesLengthAndContent) {
    const Bytes a{1, 2, 3}, b{1, 2, 3}, c{1, 2, 4}, d{1, 2};
    EXPECT_TRUE(digest_equal(a, b));
    EXPECT_FALSE(digest_equal(a, c));
    EXPECT_FALSE(digest_equal(a, d));
}

TEST(SensingResult, WireRoundTrip) {
    const SensingResult r{0x0102030405060708ull, {9, 10, 11}};
    const Bytes w = serialize(r);
    EXPECT_EQ(to_hex(w), "0102030405060708090a0b");
    EXPECT_EQ(parse_result(w), r);
    EXPECT_THROW(parse_result(Bytes(7, 0)), FormatError);
}

TEST(CryptoRoundTrips, AllAgree) {
    const auto s = experiments::crypto_roundtrips(200, 3);
    EXPECT_EQ(s.otp_ok, s.otp_total);
    EXPECT_EQ(s.kat_ok, s.kat_total);
    EXPECT_EQ(s.wire_ok, s.wire_total);
    EXPECT_EQ(s.otp_total, 200u);
}
