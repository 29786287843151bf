/*
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <openssl/evp.h>
#include <openssl/hmac.h>

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "versa/error.hpp"

namespace versa {

using Bytes = std::vector<std::uint8_t>;
using Digest = std::array<std::uint8_t, 32>;
using Key = std::array<std::uint8_t, 32>;

inline Digest sha256(std::span<const std::uint8_t> data) {
    Digest out{};
    unsigned len = 0;
    if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 || len != 32)
        throw Error("SHA-256 failed");
    return out;
}

inline Digest hmac_sha256(std::span<const std::uint8_t> key, std::span<const std::uint8_t> msg) {
    Digest out{};
    unsigned len = 0;
    static const std::uint8_t empty = 0;
    if (!HMAC(EVP_sha256(), key.empty() ? &empty : key.data(), static_cast<int>(key.size()),
              msg.empty() ? &empty : msg.data(), msg.size(), out.data(), &len) ||
        len != 32)
        throw Error("HMAC-SHA256 failed");
    return out;
}

inline std::string to_hex(std::span<const std::uint8_t> data) {
    static const char* digits = "0123456789abcdef";
    std::string s;
    s.reserve(data.size() * 2);
    for (auto b : data) {
        s += digits[b >> 4];
        s += digits[b & 0xF];
    }
    return s;
}

inline Bytes from_hex(std::string_view hex) {
    if (hex.size() % 2) throw FormatError("odd-length hex string");
    auto nib = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        throw FormatError(std::string("bad hex digit '") + c + "'");
    };
    Bytes out(hex.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = static_cast<std::uint8_t>(nib(hex[2 * i]) * 16 + nib(hex[2 * i + 1]));
    return out;
}

inline void put_be64(Bytes& out, std::uint64_t v) {
    for (int i = 7; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
inline void put_be32(Bytes& out, std::uint32_t v) {
    for (int i = 3; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
inline std::uint64_t get_be64(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | p[i];
    return v;
}
inline std::uint32_t get_be32(const std::uint8_t* p) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | p[i];
    return v;
}

inline constexpr std::string_view kLabelAuth = "auth";
inline constexpr std::string_view kLabelEnc = "enc";

// HMAC(K, label || chal as 8 big-endian bytes)
inline Key kdf(const Key& key, std::uint64_t chal, std::string_view label) {
    Bytes msg(label.begin(), label.end());
    put_be64(msg, chal);
    return hmac_sha256(key, msg);
}

inline constexpr std::size_t kMaxKeystream = 65536;

// HMAC(k_enc, 0) || HMAC(k_enc, 1) || ... with 4-byte big-endian block indices.
inline Bytes keystream(const Key& k_enc, std::size_t n) {
    if (n > kMaxKeystream) throw SizeError("keystream longer than " + std::to_string(kMaxKeystream) + " bytes");
    Bytes out;
    out.reserve(n + 32);
    for (std::uint32_t block = 0; out.size() < n; ++block) {
        Bytes idx;
        put_be32(idx, block);
        Digest d = hmac_sha256(k_enc, idx);
        out.insert(out.end(), d.begin(), d.end());
    }
    out.resize(n);
    return out;
}

inline Bytes encrypt_output(const Key& k_enc, std::span<const std::uint8_t> payload) {
    Bytes pad = keystream(k_enc, payload.size());
    for (std::size_t i = 0; i < pad.size(); ++i) pad[i] ^= payload[i];
    return pad;
}

inline Bytes decrypt_ctrl(const Key& key, std::uint64_t chal, std::span<const std::uint8_t> ciphertext) {
    return encrypt_output(kdf(key, chal, kLabelEnc), ciphertext);
}

// Result file: chal (8 bytes big-endian) || ciphertext.
struct SensingResult {
    std::uint64_t chal = 0;
    Bytes ciphertext;
    friend bool operator==(const SensingResult&, const SensingResult&) = default;
};

inline Bytes serialize(const SensingResult& r) {
    Bytes out;
    put_be64(out, r.chal);
    out.insert(out.end(), r.ciphertext.begin(), r.ciphertext.end());
    return out;
}

inline SensingResult parse_result(std::span<const std::uint8_t> data) {
    if (data.size() < 8) throw FormatError("result shorter than its 8-byte challenge");
    return {get_be64(data.data()), Bytes(data.begin() + 8, data.end())};
}

// Constant-time comparison for MAC checks.
inline bool digest_equal(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
    if (a.size() != b.size()) return false;
    std::uint8_t diff = 0;
    for (std::size_t i = 0; i < a.size(); ++i) diff |= a[i] ^ b[i];
    return diff == 0;
}

}  // namespace versa
