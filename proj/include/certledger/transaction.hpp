#pragma once

#include "certledger/bytes.hpp"
#include "certledger/cert.hpp"
#include "certledger/crypto.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace certledger {

using Address = Hash256;

enum class TxKind : std::uint8_t {
    AddTrustedCA = 1,
    UntrustCA = 2,
    AddTLSCert = 3,
    RevokeCert = 4,
    ReportFraud = 5,
    PleadFraud = 6,
    ResolveFraud = 7,
    TransferToken = 8,
};

constexpr TxKind all_tx_kinds[] = {
    TxKind::AddTrustedCA, TxKind::UntrustCA,   TxKind::AddTLSCert,   TxKind::RevokeCert,
    TxKind::ReportFraud,  TxKind::PleadFraud, TxKind::ResolveFraud, TxKind::TransferToken,
};

const char* to_string(TxKind k);
std::optional<TxKind> tx_kind_from_string(std::string_view s);
bool is_governance(TxKind k);

Address account_address(const crypto::PublicKey& key);

struct BoardSignature {
    crypto::PublicKey key;
    crypto::Signature signature;

    bool operator==(const BoardSignature&) const = default;
};

/*
 * Canonical transaction encoding (big-endian):
 *
 *   u8 version (0x01) | 32 sender_key | u64 nonce | u8 kind
 *   | u32 payload length | payload
 *   | u32 board signature count | (32 key | 64 signature) each
 *   | 64 sender_signature
 *
 * The signed digest is SHA-256 over everything up to and including the
 * payload. Sender and board members all sign that same digest.
 */
struct Transaction {
    crypto::PublicKey sender_key;
    std::uint64_t nonce = 0;
    TxKind kind = TxKind::TransferToken;
    Bytes payload;
    std::vector<BoardSignature> board_signatures;
    crypto::Signature sender_signature;

    Address sender() const { return account_address(sender_key); }
    Hash256 digest() const;
    /// Identifier: SHA-256 of the full canonical encoding.
    Hash256 id() const;

    void sign(const crypto::KeyPair& sender);
    void add_board_signature(const crypto::KeyPair& member);

    bool operator==(const Transaction&) const = default;
};

Bytes encode_transaction(const Transaction& tx);
Transaction decode_transaction(ByteView bytes);
void encode_transaction_into(ByteWriter& w, const Transaction& tx);
Transaction decode_transaction_from(ByteReader& r);

// Kind-specific payloads.

struct AddTrustedCAPayload {
    Certificate ca;
};

struct UntrustCAPayload {
    CertId ca_id;
};

struct AddTLSCertPayload {
    Certificate cert;
};

struct RevokeCertPayload {
    CertId cert_id;
    crypto::Signature revocation_signature;  // over revocation_message(cert_id)
};

struct ReportFraudPayload {
    CertId fake_cert_id;
    CertId genuine_cert_id;
    crypto::Signature evidence_signature;  // over fraud_evidence_message(...)
};

struct PleadFraudPayload {
    std::uint32_t report_index = 0;
    CertId ca_id;
    Hash256 document_hash;
    crypto::Signature ca_signature;  // over plea_message(report_index, document_hash)
};

enum class Resolution : std::uint8_t { Open = 0, Dismissed = 1, Upheld = 2 };
const char* to_string(Resolution r);

struct ResolveFraudPayload {
    std::uint32_t report_index = 0;
    Resolution verdict = Resolution::Dismissed;
};

struct TransferPayload {
    Address recipient;
    std::uint64_t amount = 0;
};

Bytes encode_payload(const AddTrustedCAPayload& p);
Bytes encode_payload(const UntrustCAPayload& p);
Bytes encode_payload(const AddTLSCertPayload& p);
Bytes encode_payload(const RevokeCertPayload& p);
Bytes encode_payload(const ReportFraudPayload& p);
Bytes encode_payload(const PleadFraudPayload& p);
Bytes encode_payload(const ResolveFraudPayload& p);
Bytes encode_payload(const TransferPayload& p);

// Throw DecodeError on malformed or trailing bytes.
AddTrustedCAPayload decode_add_trusted_ca(ByteView b);
UntrustCAPayload decode_untrust_ca(ByteView b);
AddTLSCertPayload decode_add_tls_cert(ByteView b);
RevokeCertPayload decode_revoke_cert(ByteView b);
ReportFraudPayload decode_report_fraud(ByteView b);
PleadFraudPayload decode_plead_fraud(ByteView b);
ResolveFraudPayload decode_resolve_fraud(ByteView b);
TransferPayload decode_transfer(ByteView b);

// Messages signed outside the transaction envelope.
Hash256 revocation_message(const CertId& cert_id);
Hash256 fraud_evidence_message(const CertId& fake, const CertId& genuine, const Address& reporter);
Hash256 plea_message(std::uint32_t report_index, const Hash256& document_hash);

template <class P>
Transaction make_transaction(const crypto::KeyPair& sender, std::uint64_t nonce, TxKind kind, const P& payload)
{
    Transaction tx;
    tx.sender_key = sender.public_key();
    tx.nonce = nonce;
    tx.kind = kind;
    tx.payload = encode_payload(payload);
    tx.sign(sender);
    return tx;
}

}  // namespace certledger
