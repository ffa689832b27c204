#include "certledger/crypto.hpp"

#include <sodium.h>

#include <algorithm>

namespace certledger::crypto {

namespace {

void ensure_sodium()
{
    static const bool ready = [] {
        if (sodium_init() < 0)
            throw std::runtime_error("libsodium initialisation failed");
        return true;
    }();
    (void)ready;
}

}  // namespace

PublicKey PublicKey::from_span(ByteView bytes)
{
    if (bytes.size() != 32)
        throw DecodeError("public key must be 32 bytes");
    PublicKey k;
    std::copy(bytes.begin(), bytes.end(), k.data.begin());
    return k;
}

Signature Signature::from_span(ByteView bytes)
{
    if (bytes.size() != 64)
        throw DecodeError("signature must be 64 bytes");
    Signature s;
    std::copy(bytes.begin(), bytes.end(), s.data.begin());
    return s;
}

KeyPair KeyPair::from_seed(const Hash256& seed)
{
    ensure_sodium();
    KeyPair kp;
    kp.seed_ = seed;
    crypto_sign_ed25519_seed_keypair(kp.public_.data.data(), kp.secret_.data(), seed.data.data());
    return kp;
}

KeyPair KeyPair::from_label(std::string_view label) { return from_seed(sha256(label)); }

Signature KeyPair::sign(ByteView message) const
{
    Signature sig;
    crypto_sign_ed25519_detached(sig.data.data(), nullptr, message.data(), message.size(),
                                 secret_.data());
    return sig;
}

bool verify(const PublicKey& key, ByteView message, const Signature& sig)
{
    ensure_sodium();
    return crypto_sign_ed25519_verify_detached(sig.data.data(), message.data(), message.size(),
                                               key.data.data()) == 0;
}

}  // namespace certledger::crypto
