/*
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "versa/crypto.hpp"
#include "versa/error.hpp"

namespace versa {

inline constexpr std::array<std::uint8_t, 4> kMessageMagic = {'V', 'R', 'S', 'A'};
inline constexpr std::size_t kMessageHeader = 4 + 8 + 32 + 4;

struct AuthorizationMessage {
    Bytes binary;
    std::uint64_t chal = 0;
    Digest token{};
    friend bool operator==(const AuthorizationMessage&, const AuthorizationMessage&) = default;
};

inline Bytes serialize(const AuthorizationMessage& m) {
    if (m.binary.size() > std::numeric_limits<std::uint32_t>::max()) throw SizeError("binary too large for wire format");
    Bytes out(kMessageMagic.begin(), kMessageMagic.end());
    put_be64(out, m.chal);
    out.insert(out.end(), m.token.begin(), m.token.end());
    put_be32(out, static_cast<std::uint32_t>(m.binary.size()));
    out.insert(out.end(), m.binary.begin(), m.binary.end());
    return out;
}

inline AuthorizationMessage parse_message(std::span<const std::uint8_t> data) {
    if (data.size() < kMessageHeader) throw FormatError("message shorter than its header");
    if (!std::equal(kMessageMagic.begin(), kMessageMagic.end(), data.begin())) throw FormatError("bad message magic");
    AuthorizationMessage m;
    m.chal = get_be64(data.data() + 4);
    std::copy_n(data.begin() + 12, 32, m.token.begin());
    const std::uint32_t len = get_be32(data.data() + 44);
    if (data.size() - kMessageHeader != len)
        throw FormatError("binary length field says " + std::to_string(len) + ", payload has " +
                          std::to_string(data.size() - kMessageHeader));
    m.binary.assign(data.begin() + kMessageHeader, data.end());
    return m;
}

// S as it sits in ER: the binary zero-padded to the window size.
inline Bytes pad_to_window(std::span<const std::uint8_t> binary, std::size_t window_bytes) {
    if (binary.size() > window_bytes)
        throw SizeError("binary of " + std::to_string(binary.size()) + " bytes exceeds a " +
                        std::to_string(window_bytes) + "-byte window");
    Bytes out(binary.begin(), binary.end());
    out.resize(window_bytes, 0);
    return out;
}

inline Digest compute_token(const Key& key, std::uint64_t chal, std::span<const std::uint8_t> padded) {
    return hmac_sha256(kdf(key, chal, kLabelAuth), padded);
}

struct Authorization {
    AuthorizationMessage message;
    std::uint64_t counter = 0;
};

inline Authorization authorize_ctrl(const Key& key, std::uint64_t counter, std::span<const std::uint8_t> binary,
                                    std::size_t window_bytes) {
    if (binary.empty()) throw SizeError("empty binary");
    if (counter == std::numeric_limits<std::uint64_t>::max()) throw Error("challenge counter exhausted");
    Authorization a;
    a.counter = counter + 1;
    a.message.binary.assign(binary.begin(), binary.end());
    a.message.chal = a.counter;
    a.message.token = compute_token(key, a.counter, pad_to_window(binary, window_bytes));
    return a;
}

inline std::pair<std::vector<AuthorizationMessage>, std::uint64_t> authorize_batch(
    const Key& key, std::uint64_t counter, std::span<const std::uint8_t> binary, std::size_t window_bytes,
    std::size_t n) {
    std::vector<AuthorizationMessage> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto a = authorize_ctrl(key, counter, binary, window_bytes);
        counter = a.counter;
        out.push_back(std::move(a.message));
    }
    return {std::move(out), counter};
}

// Issued (T), used (U) and pending (T \ U) tokens, plus the authorized software set.
struct TokenSets {
    std::map<std::uint64_t, Bytes> issued;  // chal -> padded S
    std::set<std::uint64_t> used;

    void issue(std::uint64_t chal, Bytes padded) { issued.emplace(chal, std::move(padded)); }
    void mark_used(std::uint64_t chal) {
        if (issued.count(chal)) used.insert(chal);
    }
    std::set<std::uint64_t> pending() const {
        std::set<std::uint64_t> p;
        for (const auto& [c, s] : issued)
            if (!used.count(c)) p.insert(c);
        return p;
    }
    bool authorized_software(std::span<const std::uint8_t> padded) const {
        for (const auto& [c, s] : issued)
            if (s.size() == padded.size() && std::equal(s.begin(), s.end(), padded.begin())) return true;
        return false;
    }
};

class Controller {
public:
    Controller(Key key, std::uint64_t counter = 0) : key_(key), counter_(counter) {}

    AuthorizationMessage authorize(std::span<const std::uint8_t> binary, std::size_t window_bytes) {
        auto a = authorize_ctrl(key_, counter_, binary, window_bytes);
        counter_ = a.counter;
        tokens_.issue(a.message.chal, pad_to_window(binary, window_bytes));
        return a.message;
    }
    Bytes decrypt(const SensingResult& r) const { return decrypt_ctrl(key_, r.chal, r.ciphertext); }
    Bytes pad(std::uint64_t chal, std::size_t n) const { return keystream(kdf(key_, chal, kLabelEnc), n); }

    std::uint64_t counter() const { return counter_; }
    const Key& key() const { return key_; }
    TokenSets& tokens() { return tokens_; }
    const TokenSets& tokens() const { return tokens_; }

private:
    Key key_;
    std::uint64_t counter_;
    TokenSets tokens_;
};

}  // namespace versa
