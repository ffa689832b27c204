#include "certledger/light_client.hpp"

#include <stdexcept>

namespace certledger {

const char* to_string(SyncError e)
{
    switch (e) {
    case SyncError::BrokenLinkage: return "BrokenLinkage";
    case SyncError::GapInHeights: return "GapInHeights";
    }
    return "?";
}

LightClient::LightClient(const BlockHeader& genesis, std::uint64_t freshness_window) : window_(freshness_window)
{
    if (genesis.number != 0 || !genesis.parent_hash.is_zero())
        throw std::invalid_argument("light client must start from a genesis header");
    if (freshness_window == 0)
        throw std::invalid_argument("freshness window must be at least 1");
    headers_.emplace(0, genesis);
}

Expected<std::uint64_t, SyncError> LightClient::sync_headers(std::span<const BlockHeader> headers)
{
    const BlockHeader* prev = &headers_.at(tip_);
    for (const auto& h : headers) {
        if (h.number != prev->number + 1)
            return fail(SyncError::GapInHeights);
        if (h.parent_hash != prev->hash())
            return fail(SyncError::BrokenLinkage);
        prev = &h;
    }
    for (const auto& h : headers)
        headers_.emplace(h.number, h);
    tip_ = headers_.rbegin()->first;
    return tip_;
}

const BlockHeader* LightClient::header(std::uint64_t number) const
{
    auto it = headers_.find(number);
    return it == headers_.end() ? nullptr : &it->second;
}

bool LightClient::is_fresh(std::uint64_t number) const
{
    return number <= tip_ && tip_ - number < window_;
}

Bytes encode_bundle(const HandshakeBundle& b)
{
    ByteWriter w;
    w.u8(0x01);
    w.u64(b.block_number);
    w.var(encode_certificate(b.certificate));
    w.u8(b.record ? 1 : 0);
    if (b.record)
        w.var(*b.record);
    w.var(b.proof.serialize());
    return std::move(w).bytes();
}

HandshakeBundle decode_bundle(ByteView bytes)
{
    ByteReader r(bytes);
    if (r.u8() != 0x01)
        throw DecodeError("unknown bundle version");
    HandshakeBundle b;
    b.block_number = r.u64();
    b.certificate = decode_certificate(r.var());
    if (r.boolean())
        b.record = r.var();
    b.proof = MerkleProof::deserialize(r.var());
    r.expect_done();
    return b;
}

const char* to_string(HandshakeVerdict v) { return v == HandshakeVerdict::Accept ? "Accept" : "Reject"; }

const char* to_string(HandshakeReason r)
{
    switch (r) {
    case HandshakeReason::Ok: return "Ok";
    case HandshakeReason::DomainMismatch: return "DomainMismatch";
    case HandshakeReason::OutsideValidity: return "OutsideValidity";
    case HandshakeReason::ProofInvalid: return "ProofInvalid";
    case HandshakeReason::Revoked: return "Revoked";
    case HandshakeReason::AbsentFromLedger: return "AbsentFromLedger";
    case HandshakeReason::UnknownBlock: return "UnknownBlock";
    case HandshakeReason::StaleBlock: return "StaleBlock";
    }
    return "?";
}

namespace {

HandshakeDecision reject(HandshakeReason r, std::string detail)
{
    return {HandshakeVerdict::Reject, r, std::move(detail)};
}

}  // namespace

HandshakeDecision verify_handshake(const LightClient& client, std::string_view domain,
                                   const HandshakeBundle& bundle, UnixSeconds now)
{
    const auto* header = client.header(bundle.block_number);
    if (!header)
        return reject(HandshakeReason::UnknownBlock, "no header for block " + std::to_string(bundle.block_number));
    if (!client.is_fresh(bundle.block_number))
        return reject(HandshakeReason::StaleBlock, "block " + std::to_string(bundle.block_number) +
                                                       " is outside the freshness window of tip " +
                                                       std::to_string(client.tip()));

    const auto& cert = bundle.certificate;
    if (!cert.covers(domain))
        return reject(HandshakeReason::DomainMismatch, "certificate does not name " + std::string(domain));
    if (now < cert.not_before || now > cert.not_after)
        return reject(HandshakeReason::OutsideValidity, "certificate is not valid at this time");

    auto check = verify_proof(header->state_root, address::certificate(cert_id(cert)), bundle.proof);
    if (!check.verified())
        return reject(HandshakeReason::ProofInvalid, check.reason);
    if (check.value != bundle.record)
        return reject(HandshakeReason::ProofInvalid, "bundled record differs from the proven value");
    if (!check.value)
        return reject(HandshakeReason::AbsentFromLedger, "certificate is not in the ledger");

    CertRecord rec;
    try {
        rec = decode_cert_record(*check.value);
    } catch (const DecodeError& e) {
        return reject(HandshakeReason::ProofInvalid, std::string("proven value is not a certificate record: ") + e.what());
    }
    if (rec.certificate != cert)
        return reject(HandshakeReason::ProofInvalid, "proven record holds a different certificate");
    if (rec.status != CertStatus::NotRevoked)
        return reject(HandshakeReason::Revoked, "revoked at block " + std::to_string(rec.revoked_at_block.value_or(0)));
    return {HandshakeVerdict::Accept, HandshakeReason::Ok, {}};
}

const char* to_string(RetrieveError) { return "UnknownBlock"; }

Expected<HandshakeBundle, RetrieveError> retrieve_state_proof(const FullNode& node, const Certificate& cert,
                                                              std::uint64_t block_number)
{
    if (block_number > node.height())
        return fail(RetrieveError::UnknownBlock);
    const auto& state = node.state_at(block_number);
    HandshakeBundle b;
    b.certificate = cert;
    b.block_number = block_number;
    b.proof = state.trie().prove(address::certificate(cert_id(cert)));
    b.record = b.proof.value;
    return b;
}

}  // namespace certledger
