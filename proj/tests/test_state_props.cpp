#include "doctest.h"

#include "fuzzer.hpp"

#include <random>
#include <set>

using namespace certledger;
using certledger::testing::Fuzzer;
using certledger::testing::World;
using certledger::testing::t0;

TEST_CASE("token conservation and atomicity over random sequences")
{
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        Fuzzer f(seed);
        const auto supply = f.w.state.token().total_supply;
        int ok = 0, failed = 0;
        for (int step = 0; step < 150; ++step) {
            auto before = f.w.state;
            auto t = f.next();
            auto sender_nonce = before.account(t.sender()).nonce;
            auto r = apply_transaction(before, t, f.w.ctx);
            if (!r) {
                ++failed;
                // failure leaves nothing behind; the input snapshot is untouched too
                CHECK(before.root() == f.w.state.root());
                continue;
            }
            ++ok;
            CHECK(r->state.total_balance() == supply);
            CHECK(r->state.account(t.sender()).nonce == sender_nonce + 1);
            if (t.kind == TxKind::AddTLSCert)
                f.certs.push_back(cert_id(decode_add_tls_cert(t.payload).cert));
            f.w.state = r->state;
            ++f.w.ctx.block_number;
        }
        CHECK(ok > 0);
        CHECK(failed > 0);
    }
}

TEST_CASE("revocation is monotone and cascades are complete")
{
    for (std::uint64_t seed = 11; seed <= 16; ++seed) {
        Fuzzer f(seed);
        std::map<CertId, std::uint64_t> revoked_at;
        for (int step = 0; step < 150; ++step) {
            auto t = f.next();
            auto r = apply_transaction(f.w.state, t, f.w.ctx);
            if (!r)
                continue;
            if (t.kind == TxKind::AddTLSCert)
                f.certs.push_back(cert_id(decode_add_tls_cert(t.payload).cert));
            f.w.state = r->state;

            for (const auto& id : f.certs) {
                auto rec = f.w.state.certificate(id);
                REQUIRE(rec);
                if (auto it = revoked_at.find(id); it != revoked_at.end()) {
                    CHECK(rec->status == CertStatus::Revoked);
                    CHECK(rec->revoked_at_block == it->second);
                } else if (rec->status == CertStatus::Revoked) {
                    revoked_at[id] = *rec->revoked_at_block;
                }
            }
            auto cas = f.w.state.trusted_cas();
            for (const auto& [ca_id, entry] : cas.entries) {
                if (entry.status != TrustStatus::Untrusted)
                    continue;
                for (const auto& id : f.w.state.issued_by(ca_id)) {
                    auto rec = f.w.state.certificate(id);
                    // anything still live must have expired before the CA was untrusted
                    CHECK(rec->status == CertStatus::Revoked);
                }
            }
            ++f.w.ctx.block_number;
        }
    }
}

TEST_CASE("threshold soundness, exhaustive over signer subsets")
{
    for (auto [t, n] : {std::pair<std::uint32_t, std::uint32_t>{2, 3}, {3, 5}}) {
        World w(t, n, false);
        auto outsider = crypto::KeyPair::from_label("outsider");
        // Each board member contributes nothing, a valid signature, or an
        // invalid one. An outsider and a duplicate are always added.
        std::size_t combos = 1;
        for (std::uint32_t i = 0; i < n; ++i)
            combos *= 3;
        for (std::size_t code = 0; code < combos; ++code) {
            auto tx = w.tx(w.board[0], TxKind::AddTrustedCA, AddTrustedCAPayload{w.ca});
            std::size_t valid = 0;
            auto c = code;
            for (std::uint32_t i = 0; i < n; ++i, c /= 3) {
                if (c % 3 == 1) {
                    tx.add_board_signature(w.board[i]);
                    ++valid;
                } else if (c % 3 == 2) {
                    tx.board_signatures.push_back({w.board[i].public_key(), w.board[i].sign(sha256(std::string_view("other")))});
                }
            }
            tx.add_board_signature(outsider);
            if (!tx.board_signatures.empty())
                tx.board_signatures.push_back(tx.board_signatures.front());
            tx.sign(w.board[0]);

            CHECK(count_board_approvals(w.state.trusted_cas(), tx) == valid);
            auto r = apply_transaction(w.state, tx, w.ctx);
            if (valid >= t) {
                CHECK(r.has_value());
            } else {
                REQUIRE_FALSE(r.has_value());
                CHECK(r.error() == TxError::BelowThreshold);
            }
        }
    }
}

TEST_CASE("replayed transactions never apply twice")
{
    Fuzzer f(99);
    std::vector<Transaction> accepted;
    for (int step = 0; step < 120; ++step) {
        auto t = f.next();
        auto r = apply_transaction(f.w.state, t, f.w.ctx);
        if (!r)
            continue;
        accepted.push_back(t);
        if (t.kind == TxKind::AddTLSCert)
            f.certs.push_back(cert_id(decode_add_tls_cert(t.payload).cert));
        f.w.state = r->state;
    }
    REQUIRE(accepted.size() > 10);
    for (const auto& t : accepted) {
        auto r = apply_transaction(f.w.state, t, f.w.ctx);
        REQUIRE_FALSE(r.has_value());
        CHECK(r.error() == TxError::StaleNonce);
    }
}

TEST_CASE("sender signature covers every body field")
{
    World w;
    auto base = w.tx(w.owner, TxKind::TransferToken, TransferPayload{Address{}, 3});
    std::vector<Transaction> variants(4, base);
    variants[0].nonce += 1;
    variants[1].kind = TxKind::AddTLSCert;
    variants[2].payload[0] ^= 0x80;
    variants[3].sender_key = w.stranger.public_key();
    for (const auto& v : variants)
        CHECK(apply_transaction(w.state, v, w.ctx).error() == TxError::BadSignature);
}
