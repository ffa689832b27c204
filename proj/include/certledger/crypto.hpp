#pragma once

#include "certledger/bytes.hpp"

#include <array>
#include <string_view>

namespace certledger::crypto {

/// Ed25519 public key: a 32-byte point on a 256-bit twisted Edwards curve.
struct PublicKey {
    std::array<std::uint8_t, 32> data{};

    ByteView view() const { return {data.data(), data.size()}; }
    std::string hex() const { return to_hex(view()); }
    static PublicKey from_span(ByteView bytes);

    auto operator<=>(const PublicKey&) const = default;
    bool operator==(const PublicKey&) const = default;
};

struct Signature {
    std::array<std::uint8_t, 64> data{};

    ByteView view() const { return {data.data(), data.size()}; }
    std::string hex() const { return to_hex(view()); }
    static Signature from_span(ByteView bytes);

    bool operator==(const Signature&) const = default;
};

// Signing is deterministic: the same (key, message) always yields the same
// signature, so every test vector in the project is reproducible.
class KeyPair {
public:
    static KeyPair from_seed(const Hash256& seed);
    /// Seed = SHA-256(label); convenient for named test actors.
    static KeyPair from_label(std::string_view label);

    const PublicKey& public_key() const { return public_; }
    const Hash256& seed() const { return seed_; }

    Signature sign(ByteView message) const;
    Signature sign(const Hash256& digest) const { return sign(digest.view()); }

private:
    Hash256 seed_;
    PublicKey public_;
    std::array<std::uint8_t, 64> secret_{};
};

/// False on any malformed key or signature; never throws.
bool verify(const PublicKey& key, ByteView message, const Signature& sig);
inline bool verify(const PublicKey& key, const Hash256& digest, const Signature& sig)
{
    return verify(key, digest.view(), sig);
}

}  // namespace certledger::crypto
