#include "certledger/transaction.hpp"

namespace certledger {

namespace {

constexpr std::uint8_t tx_format_version = 0x01;
constexpr std::uint8_t tag_account = 0x01;

void encode_body(ByteWriter& w, const Transaction& tx)
{
    w.u8(tx_format_version);
    w.raw(tx.sender_key.view());
    w.u64(tx.nonce);
    w.u8(static_cast<std::uint8_t>(tx.kind));
    w.var(tx.payload);
}

template <class F>
auto decode_exact(ByteView b, F&& f)
{
    ByteReader r(b);
    auto out = f(r);
    r.expect_done();
    return out;
}

}  // namespace

const char* to_string(TxKind k)
{
    switch (k) {
    case TxKind::AddTrustedCA: return "AddTrustedCA";
    case TxKind::UntrustCA: return "UntrustCA";
    case TxKind::AddTLSCert: return "AddTLSCert";
    case TxKind::RevokeCert: return "RevokeCert";
    case TxKind::ReportFraud: return "ReportFraud";
    case TxKind::PleadFraud: return "PleadFraud";
    case TxKind::ResolveFraud: return "ResolveFraud";
    case TxKind::TransferToken: return "TransferToken";
    }
    return "?";
}

std::optional<TxKind> tx_kind_from_string(std::string_view s)
{
    for (auto k : all_tx_kinds)
        if (s == to_string(k))
            return k;
    return std::nullopt;
}

bool is_governance(TxKind k)
{
    return k == TxKind::AddTrustedCA || k == TxKind::UntrustCA || k == TxKind::ResolveFraud;
}

const char* to_string(Resolution r)
{
    switch (r) {
    case Resolution::Open: return "Open";
    case Resolution::Dismissed: return "Dismissed";
    case Resolution::Upheld: return "Upheld";
    }
    return "?";
}

Address account_address(const crypto::PublicKey& key) { return tagged_hash(tag_account, key.view()); }

Hash256 Transaction::digest() const
{
    ByteWriter w;
    encode_body(w, *this);
    return sha256(w.bytes());
}

Hash256 Transaction::id() const { return sha256(encode_transaction(*this)); }

void Transaction::sign(const crypto::KeyPair& sender)
{
    sender_key = sender.public_key();
    sender_signature = sender.sign(digest());
}

void Transaction::add_board_signature(const crypto::KeyPair& member)
{
    board_signatures.push_back({member.public_key(), member.sign(digest())});
}

void encode_transaction_into(ByteWriter& w, const Transaction& tx)
{
    encode_body(w, tx);
    w.u32(static_cast<std::uint32_t>(tx.board_signatures.size()));
    for (const auto& s : tx.board_signatures) {
        w.raw(s.key.view());
        w.raw(s.signature.view());
    }
    w.raw(tx.sender_signature.view());
}

Bytes encode_transaction(const Transaction& tx)
{
    ByteWriter w;
    encode_transaction_into(w, tx);
    return std::move(w).bytes();
}

Transaction decode_transaction_from(ByteReader& r)
{
    Transaction tx;
    if (r.u8() != tx_format_version)
        throw DecodeError("unknown transaction format version");
    tx.sender_key = crypto::PublicKey::from_span(r.raw(32));
    tx.nonce = r.u64();
    auto kind = r.u8();
    if (kind < 1 || kind > 8)
        throw DecodeError("unknown transaction kind");
    tx.kind = static_cast<TxKind>(kind);
    tx.payload = r.var();
    auto count = r.u32();
    if (count > r.remaining() / 96)
        throw DecodeError("board signature count exceeds input");
    for (std::uint32_t i = 0; i < count; ++i) {
        BoardSignature s;
        s.key = crypto::PublicKey::from_span(r.raw(32));
        s.signature = crypto::Signature::from_span(r.raw(64));
        tx.board_signatures.push_back(s);
    }
    tx.sender_signature = crypto::Signature::from_span(r.raw(64));
    return tx;
}

Transaction decode_transaction(ByteView bytes)
{
    return decode_exact(bytes, [](ByteReader& r) { return decode_transaction_from(r); });
}

Bytes encode_payload(const AddTrustedCAPayload& p) { return encode_certificate(p.ca); }

Bytes encode_payload(const UntrustCAPayload& p)
{
    return Bytes(p.ca_id.data.begin(), p.ca_id.data.end());
}

Bytes encode_payload(const AddTLSCertPayload& p) { return encode_certificate(p.cert); }

Bytes encode_payload(const RevokeCertPayload& p)
{
    ByteWriter w;
    w.hash(p.cert_id).raw(p.revocation_signature.view());
    return std::move(w).bytes();
}

Bytes encode_payload(const ReportFraudPayload& p)
{
    ByteWriter w;
    w.hash(p.fake_cert_id).hash(p.genuine_cert_id).raw(p.evidence_signature.view());
    return std::move(w).bytes();
}

Bytes encode_payload(const PleadFraudPayload& p)
{
    ByteWriter w;
    w.u32(p.report_index).hash(p.ca_id).hash(p.document_hash).raw(p.ca_signature.view());
    return std::move(w).bytes();
}

Bytes encode_payload(const ResolveFraudPayload& p)
{
    ByteWriter w;
    w.u32(p.report_index).u8(static_cast<std::uint8_t>(p.verdict));
    return std::move(w).bytes();
}

Bytes encode_payload(const TransferPayload& p)
{
    ByteWriter w;
    w.hash(p.recipient).u64(p.amount);
    return std::move(w).bytes();
}

AddTrustedCAPayload decode_add_trusted_ca(ByteView b) { return {decode_certificate(b)}; }

UntrustCAPayload decode_untrust_ca(ByteView b) { return {Hash256::from_span(b)}; }

AddTLSCertPayload decode_add_tls_cert(ByteView b) { return {decode_certificate(b)}; }

RevokeCertPayload decode_revoke_cert(ByteView b)
{
    return decode_exact(b, [](ByteReader& r) {
        RevokeCertPayload p;
        p.cert_id = r.hash();
        p.revocation_signature = crypto::Signature::from_span(r.raw(64));
        return p;
    });
}

ReportFraudPayload decode_report_fraud(ByteView b)
{
    return decode_exact(b, [](ByteReader& r) {
        ReportFraudPayload p;
        p.fake_cert_id = r.hash();
        p.genuine_cert_id = r.hash();
        p.evidence_signature = crypto::Signature::from_span(r.raw(64));
        return p;
    });
}

PleadFraudPayload decode_plead_fraud(ByteView b)
{
    return decode_exact(b, [](ByteReader& r) {
        PleadFraudPayload p;
        p.report_index = r.u32();
        p.ca_id = r.hash();
        p.document_hash = r.hash();
        p.ca_signature = crypto::Signature::from_span(r.raw(64));
        return p;
    });
}

ResolveFraudPayload decode_resolve_fraud(ByteView b)
{
    return decode_exact(b, [](ByteReader& r) {
        ResolveFraudPayload p;
        p.report_index = r.u32();
        auto v = r.u8();
        if (v != static_cast<std::uint8_t>(Resolution::Dismissed) &&
            v != static_cast<std::uint8_t>(Resolution::Upheld))
            throw DecodeError("verdict must be Dismissed or Upheld");
        p.verdict = static_cast<Resolution>(v);
        return p;
    });
}

TransferPayload decode_transfer(ByteView b)
{
    return decode_exact(b, [](ByteReader& r) {
        TransferPayload p;
        p.recipient = r.hash();
        p.amount = r.u64();
        return p;
    });
}

Hash256 revocation_message(const CertId& cert_id)
{
    ByteWriter w;
    w.str("certledger/revoke").hash(cert_id);
    return sha256(w.bytes());
}

Hash256 fraud_evidence_message(const CertId& fake, const CertId& genuine, const Address& reporter)
{
    ByteWriter w;
    w.str("certledger/fraud-evidence").hash(fake).hash(genuine).hash(reporter);
    return sha256(w.bytes());
}

Hash256 plea_message(std::uint32_t report_index, const Hash256& document_hash)
{
    ByteWriter w;
    w.str("certledger/plea").u32(report_index).hash(document_hash);
    return sha256(w.bytes());
}

}  // namespace certledger
