#pragma once

#include "certledger/cert.hpp"
#include "certledger/transaction.hpp"
#include "certledger/trie.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace certledger {

// State object addresses. Singletons use fixed labels; per-entity records
// are tagged hashes of their natural identifier so kinds never collide.
namespace address {
Address trusted_cas();
Address token();
Address fraud_reports();
Address account(const crypto::PublicKey& key);
Address domain(std::string_view dns_name);
Address certificate(const CertId& id);
Address issuer_index(const CertId& ca_id);
}  // namespace address

enum class RecordKind : std::uint8_t {
    TrustedCAs = 1,
    Token = 2,
    FraudReports = 3,
    Account = 4,
    Domain = 5,
    Certificate = 6,
    IssuerIndex = 7,
};

/// First byte of every stored value; throws DecodeError on an unknown tag.
RecordKind record_kind(ByteView value);

enum class TrustStatus : std::uint8_t { Trusted = 0, Untrusted = 1 };
enum class CertStatus : std::uint8_t { NotRevoked = 0, Revoked = 1 };

const char* to_string(TrustStatus s);
const char* to_string(CertStatus s);

struct TrustedCAEntry {
    Certificate certificate;
    TrustStatus status = TrustStatus::Trusted;

    bool operator==(const TrustedCAEntry&) const = default;
};

struct TrustedCAsState {
    std::map<CertId, TrustedCAEntry> entries;
    std::vector<crypto::PublicKey> board_keys;
    std::uint32_t threshold = 1;

    const TrustedCAEntry* find(const CertId& id) const;
    std::vector<Certificate> trusted_certificates() const;

    bool operator==(const TrustedCAsState&) const = default;
};

using FeeSchedule = std::map<TxKind, std::uint64_t>;

/// 1 token for every operation, transfers free.
FeeSchedule default_fee_schedule();

struct TokenState {
    std::uint64_t total_supply = 0;
    FeeSchedule fee_schedule;
    Address foundation_account;
    Address board_account;

    std::uint64_t fee(TxKind k) const;

    bool operator==(const TokenState&) const = default;
};

struct AccountState {
    std::optional<crypto::PublicKey> owner_key;  // unknown until the account first signs
    std::uint64_t balance = 0;
    std::uint64_t nonce = 0;

    bool operator==(const AccountState&) const = default;
};

struct Plea {
    CertId ca_id;
    Hash256 document_hash;
    crypto::Signature ca_signature;

    bool operator==(const Plea&) const = default;
};

struct FraudReport {
    Certificate fake_cert;
    CertId genuine_cert_id;
    Address reporter_account;
    crypto::Signature evidence_signature;
    std::optional<Plea> plea;
    Resolution resolution = Resolution::Open;

    bool operator==(const FraudReport&) const = default;
};

struct FraudReportState {
    std::vector<FraudReport> reports;

    bool operator==(const FraudReportState&) const = default;
};

struct CertRecord {
    Certificate certificate;
    CertStatus status = CertStatus::NotRevoked;
    std::uint64_t added_at_block = 0;
    std::optional<std::uint64_t> revoked_at_block;

    bool operator==(const CertRecord&) const = default;
};

/// Per-domain index of every certificate whose SANs name the domain.
struct DomainState {
    std::string domain;
    std::vector<CertId> certificates;

    bool operator==(const DomainState&) const = default;
};

// Record codecs. Every encoding starts with its RecordKind byte.
Bytes encode_record(const TrustedCAsState& s);
Bytes encode_record(const TokenState& s);
Bytes encode_record(const FraudReportState& s);
Bytes encode_record(const AccountState& s);
Bytes encode_record(const DomainState& s);
Bytes encode_record(const CertRecord& s);
Bytes encode_issuer_index(const std::vector<CertId>& ids);

TrustedCAsState decode_trusted_cas(ByteView b);
TokenState decode_token(ByteView b);
FraudReportState decode_fraud_reports(ByteView b);
AccountState decode_account(ByteView b);
DomainState decode_domain(ByteView b);
CertRecord decode_cert_record(ByteView b);
std::vector<CertId> decode_issuer_index(ByteView b);

struct GenesisParams {
    std::vector<crypto::PublicKey> board_keys;
    std::uint32_t threshold = 1;
    crypto::PublicKey foundation_key;   // owner of the initial token supply
    crypto::PublicKey board_account_key;
    std::uint64_t total_supply = 0;
    FeeSchedule fee_schedule = default_fee_schedule();
    std::vector<Certificate> initial_cas;
};

// Immutable snapshot of all state objects, backed by the state trie.
// Copies are cheap and share structure.
class WorldState {
public:
    /// Throws std::invalid_argument when the parameters break an invariant.
    static WorldState genesis(const GenesisParams& params);

    const StateTrie& trie() const { return trie_; }
    Hash256 root() const { return trie_.root_hash(); }

    TrustedCAsState trusted_cas() const;
    TokenState token() const;
    FraudReportState fraud_reports() const;
    AccountState account(const Address& a) const;  // default-constructed when absent
    bool has_account(const Address& a) const;
    std::optional<CertRecord> certificate(const CertId& id) const;
    DomainState domain(std::string_view dns_name) const;
    std::vector<CertId> issued_by(const CertId& ca_id) const;

    WorldState with(const TrustedCAsState& s) const;
    WorldState with(const TokenState& s) const;
    WorldState with(const FraudReportState& s) const;
    WorldState with_account(const Address& a, const AccountState& s) const;
    WorldState with(const DomainState& s) const;
    WorldState with_certificate(const CertRecord& r) const;
    WorldState with_issuer_index(const CertId& ca_id, const std::vector<CertId>& ids) const;

    /// Sum of every account balance, found by scanning the whole trie.
    std::uint64_t total_balance() const;

private:
    explicit WorldState(StateTrie t) : trie_(std::move(t)) {}
    WorldState put(const Address& a, Bytes value) const;

    StateTrie trie_;
};

/// Read-only: every record for the domain, optionally filtered by status.
std::vector<CertRecord> search_certificates(const WorldState& state, std::string_view domain,
                                            std::optional<CertStatus> filter = std::nullopt);

}  // namespace certledger
