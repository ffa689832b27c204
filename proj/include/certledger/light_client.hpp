#pragma once

#include "certledger/ledger.hpp"

#include <map>

namespace certledger {

enum class SyncError { BrokenLinkage, GapInHeights };
const char* to_string(SyncError e);

// Header-only client. Starts from a trusted genesis header and only ever
// extends a hash-linked chain.
class LightClient {
public:
    /// k = 1 accepts bundles for the tip only; k = 2 also the block before it.
    explicit LightClient(const BlockHeader& genesis, std::uint64_t freshness_window = 1);

    /// Appends all headers or none. Each must follow the current tip by one
    /// height and cite its hash.
    Expected<std::uint64_t, SyncError> sync_headers(std::span<const BlockHeader> headers);

    std::uint64_t tip() const { return tip_; }
    std::uint64_t freshness_window() const { return window_; }
    const BlockHeader* header(std::uint64_t number) const;

    /// Stored headers within the freshness window of the tip.
    bool is_fresh(std::uint64_t number) const;

private:
    std::map<std::uint64_t, BlockHeader> headers_;
    std::uint64_t tip_ = 0;
    std::uint64_t window_;
};

/*
 * The simulated TLS extension payload. Canonical encoding, big-endian:
 *
 *   u8 version (0x01)
 *   u64 block_number
 *   u32 len | certificate encoding
 *   u8 has_record | [u32 len | certificate record encoding]
 *   u32 len | serialized Merkle proof
 *
 * The record is the stored value at address::certificate(cert_id); it is
 * absent when the proof shows the certificate was never logged.
 */
struct HandshakeBundle {
    Certificate certificate;
    std::optional<Bytes> record;
    MerkleProof proof;
    std::uint64_t block_number = 0;

    bool operator==(const HandshakeBundle&) const = default;
};

Bytes encode_bundle(const HandshakeBundle& b);
HandshakeBundle decode_bundle(ByteView bytes);

enum class HandshakeVerdict { Accept, Reject };
enum class HandshakeReason {
    Ok,
    DomainMismatch,
    OutsideValidity,
    ProofInvalid,
    Revoked,
    AbsentFromLedger,
    UnknownBlock,
    StaleBlock,
};

const char* to_string(HandshakeVerdict v);
const char* to_string(HandshakeReason r);

struct HandshakeDecision {
    HandshakeVerdict verdict = HandshakeVerdict::Reject;
    HandshakeReason reason = HandshakeReason::UnknownBlock;
    std::string detail;

    bool accepted() const { return verdict == HandshakeVerdict::Accept; }
};

/*
 * Checks, first failure wins:
 *   1. a header is stored for block_number (UnknownBlock), within the
 *      freshness window (StaleBlock)
 *   2. domain is one of the certificate's SANs (DomainMismatch)
 *   3. now lies in [not_before, not_after] (OutsideValidity)
 *   4. the proof verifies against that header's state root for the
 *      certificate's address, and agrees with the bundled record
 *      (ProofInvalid); a verified absence gives AbsentFromLedger
 *   5. the record holds this certificate with status NotRevoked (Revoked)
 *
 * Pure: reads only the client's headers and the arguments.
 */
HandshakeDecision verify_handshake(const LightClient& client, std::string_view domain,
                                   const HandshakeBundle& bundle, UnixSeconds now);

enum class RetrieveError { UnknownBlock };
const char* to_string(RetrieveError e);

/// Bundle for `cert` against the state at `block_number`. A certificate the
/// ledger never saw yields an absence bundle rather than an error.
Expected<HandshakeBundle, RetrieveError> retrieve_state_proof(const FullNode& node, const Certificate& cert,
                                                              std::uint64_t block_number);

}  // namespace certledger
