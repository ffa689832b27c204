#include "doctest.h"

#include "certledger/light_client.hpp"

#include "chain_fixture.hpp"

#include <random>

using namespace certledger;
using certledger::testing::Chain;
using certledger::testing::t0;

namespace {

LightClient synced(const FullNode& node, std::uint64_t k = 1)
{
    auto hs = node.header_chain();
    LightClient c(hs[0], k);
    REQUIRE(c.sync_headers(std::span(hs).subspan(1)));
    return c;
}

struct Site {
    Chain c;
    crypto::KeyPair key = crypto::KeyPair::from_label("site-key");
    Certificate cert;
    CertId id;

    Site()
    {
        cert = c.w.leaf("example.com", key, false, {"www.example.com"});
        id = cert_id(cert);
        c.submit(c.tx(c.w.owner, TxKind::AddTLSCert, AddTLSCertPayload{cert}));
        c.produce();
    }

    HandshakeBundle bundle(std::optional<std::uint64_t> at = std::nullopt) const
    {
        return *retrieve_state_proof(c.node, cert, at.value_or(c.node.height()));
    }

    void revoke()
    {
        c.submit(c.tx(c.w.owner, TxKind::RevokeCert, RevokeCertPayload{id, key.sign(revocation_message(id))}));
        c.produce();
    }
};

}  // namespace

TEST_CASE("sync_headers")
{
    Chain c;
    for (int i = 0; i < 5; ++i)
        c.produce();
    auto hs = c.node.header_chain();
    LightClient lc(hs[0]);

    SUBCASE("contiguous headers advance the tip")
    {
        auto r = lc.sync_headers(std::span(hs).subspan(1, 3));
        REQUIRE(r);
        CHECK(*r == 3);
        CHECK(lc.sync_headers(std::span(hs).subspan(4)).value() == hs.size() - 1);
        CHECK(*lc.header(2) == hs[2]);
    }
    SUBCASE("forged parent hash")
    {
        auto forged = std::vector(hs.begin() + 1, hs.end());
        forged[2].parent_hash.data[0] ^= 1;
        CHECK(lc.sync_headers(forged).error() == SyncError::BrokenLinkage);
        CHECK(lc.tip() == 0);
        CHECK(lc.header(1) == nullptr);
    }
    SUBCASE("forged state root breaks the next link")
    {
        auto forged = std::vector(hs.begin() + 1, hs.end());
        forged[1].state_root.data[0] ^= 1;
        CHECK(lc.sync_headers(forged).error() == SyncError::BrokenLinkage);
    }
    SUBCASE("skipped height")
    {
        std::vector<BlockHeader> gap{hs[1], hs[3]};
        CHECK(lc.sync_headers(gap).error() == SyncError::GapInHeights);
        CHECK(lc.tip() == 0);
        std::vector<BlockHeader> replay{hs[0]};
        CHECK(lc.sync_headers(replay).error() == SyncError::GapInHeights);
    }
    SUBCASE("non-genesis anchor is refused")
    {
        auto make = [](const BlockHeader& h, std::uint64_t k) { return LightClient(h, k); };
        CHECK_THROWS_AS(make(hs[2], 1), std::invalid_argument);
        CHECK_THROWS_AS(make(hs[0], 0), std::invalid_argument);
    }
}

TEST_CASE("verify_handshake examples")
{
    Site s;
    auto lc = synced(s.c.node);

    SUBCASE("live certificate at the tip")
    {
        auto d = verify_handshake(lc, "example.com", s.bundle(), t0);
        CHECK(d.accepted());
        CHECK(d.reason == HandshakeReason::Ok);
        CHECK(verify_handshake(lc, "www.example.com", s.bundle(), t0).accepted());
    }
    SUBCASE("proof from an alternate state")
    {
        // The adversary's own trie holds the same record but its root is not
        // any header's state root.
        auto alt = s.c.node.state().trie().insert(sha256(std::string_view("padding")), Bytes{1});
        auto b = s.bundle();
        b.proof = alt.prove(address::certificate(s.id));
        b.record = b.proof.value;
        auto d = verify_handshake(lc, "example.com", b, t0);
        CHECK(d.reason == HandshakeReason::ProofInvalid);
        CHECK_FALSE(d.accepted());
    }
    SUBCASE("revoked")
    {
        s.revoke();
        auto lc2 = synced(s.c.node);
        auto d = verify_handshake(lc2, "example.com", s.bundle(), t0);
        CHECK(d.reason == HandshakeReason::Revoked);
    }
    SUBCASE("never logged")
    {
        auto other = s.c.w.leaf("example.com", s.key);
        auto b = *retrieve_state_proof(s.c.node, other, s.c.node.height());
        CHECK_FALSE(b.record.has_value());
        CHECK(verify_handshake(lc, "example.com", b, t0).reason == HandshakeReason::AbsentFromLedger);
    }
    SUBCASE("unknown block")
    {
        CHECK(retrieve_state_proof(s.c.node, s.cert, s.c.node.height() + 1).error() == RetrieveError::UnknownBlock);
        auto b = s.bundle();
        b.block_number = 99;
        CHECK(verify_handshake(lc, "example.com", b, t0).reason == HandshakeReason::UnknownBlock);
    }
    SUBCASE("each check in order")
    {
        auto b = s.bundle();
        CHECK(verify_handshake(lc, "evil.com", b, t0).reason == HandshakeReason::DomainMismatch);
        CHECK(verify_handshake(lc, "example.com", b, s.cert.not_after + 1).reason == HandshakeReason::OutsideValidity);
        CHECK(verify_handshake(lc, "example.com", b, s.cert.not_before - 1).reason ==
              HandshakeReason::OutsideValidity);
        // a wrong domain is reported before a bad clock
        CHECK(verify_handshake(lc, "evil.com", b, s.cert.not_after + 1).reason == HandshakeReason::DomainMismatch);
        // an unknown block is reported before everything else
        b.block_number = 99;
        CHECK(verify_handshake(lc, "evil.com", b, 0).reason == HandshakeReason::UnknownBlock);
    }
    SUBCASE("record that disagrees with the proof")
    {
        auto b = s.bundle();
        b.record->back() ^= 1;
        CHECK(verify_handshake(lc, "example.com", b, t0).reason == HandshakeReason::ProofInvalid);
        b.record.reset();
        CHECK(verify_handshake(lc, "example.com", b, t0).reason == HandshakeReason::ProofInvalid);
    }
    SUBCASE("a genuine proof for one certificate does not cover another")
    {
        auto sibling = s.c.w.leaf("example.com", s.key);
        s.c.submit(s.c.tx(s.c.w.owner, TxKind::AddTLSCert, AddTLSCertPayload{sibling}));
        s.c.produce();
        auto lc2 = synced(s.c.node);
        auto b = s.bundle();
        b.certificate = sibling;
        CHECK(verify_handshake(lc2, "example.com", b, t0).reason == HandshakeReason::ProofInvalid);
    }
}

TEST_CASE("freshness window")
{
    Site s;
    auto at_add = s.c.node.height();
    s.c.produce();

    SUBCASE("k = 1 accepts only the tip")
    {
        auto lc = synced(s.c.node, 1);
        CHECK(verify_handshake(lc, "example.com", s.bundle(at_add), t0).reason == HandshakeReason::StaleBlock);
        CHECK(verify_handshake(lc, "example.com", s.bundle(), t0).accepted());
    }
    SUBCASE("k = 2 also accepts the block before")
    {
        auto lc = synced(s.c.node, 2);
        CHECK(verify_handshake(lc, "example.com", s.bundle(at_add), t0).accepted());
        CHECK(verify_handshake(lc, "example.com", s.bundle(at_add - 1), t0).reason == HandshakeReason::StaleBlock);
    }
    SUBCASE("historical bundle before revocation")
    {
        s.revoke();
        auto b = s.bundle(at_add);
        auto rec = decode_cert_record(*b.record);
        CHECK(rec.status == CertStatus::NotRevoked);
        auto lc = synced(s.c.node, 1);
        CHECK(verify_handshake(lc, "example.com", b, t0).reason == HandshakeReason::StaleBlock);
        CHECK(verify_handshake(lc, "example.com", s.bundle(), t0).reason == HandshakeReason::Revoked);
    }
}

TEST_CASE("bundle encoding")
{
    Site s;
    auto b = s.bundle();
    auto bytes = encode_bundle(b);
    CHECK(decode_bundle(bytes) == b);
    CHECK(encode_bundle(decode_bundle(bytes)) == bytes);
    bytes.push_back(0);
    CHECK_THROWS_AS(decode_bundle(bytes), DecodeError);

    auto other = s.c.w.leaf("example.com", s.key);
    auto absent = *retrieve_state_proof(s.c.node, other, s.c.node.height());
    CHECK(decode_bundle(encode_bundle(absent)) == absent);
}

TEST_CASE("every single-byte mutation of an honest bundle is rejected")
{
    Site s;
    auto lc = synced(s.c.node);
    auto honest = encode_bundle(s.bundle());
    REQUIRE(verify_handshake(lc, "example.com", decode_bundle(honest), t0).accepted());

    std::mt19937 rng(7);
    std::size_t decoded = 0;
    for (std::size_t i = 0; i < honest.size(); ++i) {
        auto m = honest;
        m[i] ^= static_cast<std::uint8_t>(1 + rng() % 255);
        HandshakeBundle b;
        try {
            b = decode_bundle(m);
        } catch (const DecodeError&) {
            continue;  // never reaches the verifier
        }
        ++decoded;
        auto d = verify_handshake(lc, "example.com", b, t0);
        CHECK_MESSAGE(!d.accepted(), "byte " << i << " accepted");
    }
    CHECK(decoded > honest.size() / 2);
}

TEST_CASE("soundness under targeted mutations")
{
    Site s;
    auto lc = synced(s.c.node);
    auto honest = s.bundle();
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        auto b = honest;
        HandshakeReason want{};
        std::string domain = "example.com";
        UnixSeconds now = t0;
        switch (trial % 4) {
        case 0:
            domain = "x" + std::to_string(rng() % 1000) + ".org";
            want = HandshakeReason::DomainMismatch;
            break;
        case 1:
            now = (rng() % 2) ? s.cert.not_after + 1 + static_cast<UnixSeconds>(rng() % 100'000)
                              : s.cert.not_before - 1 - static_cast<UnixSeconds>(rng() % 100'000);
            want = HandshakeReason::OutsideValidity;
            break;
        case 2: {
            auto& node = b.proof.path_nodes[rng() % b.proof.path_nodes.size()];
            node[rng() % node.size()] ^= static_cast<std::uint8_t>(1 + rng() % 255);
            want = HandshakeReason::ProofInvalid;
            break;
        }
        default:
            b.block_number = s.c.node.height() - 1 - rng() % 2;
            want = HandshakeReason::StaleBlock;
            break;
        }
        auto d = verify_handshake(lc, domain, b, now);
        CHECK(d.reason == want);
        CHECK_FALSE(d.accepted());
    }
}
