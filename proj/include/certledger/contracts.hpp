#pragma once

#include "certledger/expected.hpp"
#include "certledger/state.hpp"

#include <string>
#include <vector>

namespace certledger {

enum class EventKind : std::uint8_t {
    CertAdded = 1,
    CertRevoked = 2,
    CATrusted = 3,
    CAUntrusted = 4,
    FraudReported = 5,
    PleaAdded = 6,
    FraudResolved = 7,
};

const char* to_string(EventKind k);

struct Event {
    std::uint64_t block_number = 0;
    std::uint32_t index = 0;  // position within the block's event list
    EventKind kind = EventKind::CertAdded;
    Hash256 subject;           // cert id, CA id, or the reported fake cert id
    std::vector<std::string> domains;  // SANs of the certificate concerned
    std::optional<std::uint32_t> report_index;

    bool operator==(const Event&) const = default;
};

/// One JSON object per line; used for the event log file.
std::string event_to_json_line(const Event& e);
Event event_from_json_line(std::string_view line);

enum class TxError {
    BadSignature,
    StaleNonce,
    FutureNonce,
    WrongKind,
    MalformedPayload,
    BelowThreshold,
    DuplicateCA,
    ProfileViolation,
    InsufficientBalance,
    UnknownCA,
    AlreadyUntrusted,
    ExpiredCA,
    Duplicate,
    Expired,
    NotYetValid,
    UnknownIssuer,
    BadIssuerSignature,
    UnknownCert,
    AlreadyRevoked,
    CertExpired,
    UnauthorizedRevoker,
    FakeCertNotInLedger,
    SANMismatch,
    BadEvidenceSignature,
    GenuineCertRevoked,
    UnknownReport,
    ReportClosed,
    NotIssuer,
    CANotTrusted,
    AlreadyPleaded,
    AlreadyResolved,
};

const char* to_string(TxError e);

struct ExecContext {
    std::uint64_t block_number = 0;
    UnixSeconds now = 0;
};

struct Applied {
    WorldState state;
    std::vector<Event> events;
};

using TxResult = Expected<Applied, TxError>;

// Every transition is atomic: on error the caller's state is untouched, and
// on success the sender's nonce has advanced by one and the fee has moved.
//
// Common checks, in order: sender signature, nonce, kind, payload decoding.
TxResult apply_transaction(const WorldState& state, const Transaction& tx, const ExecContext& ctx);

TxResult add_trusted_ca(const WorldState& state, const Transaction& tx, const ExecContext& ctx);
TxResult untrust_ca(const WorldState& state, const Transaction& tx, const ExecContext& ctx);
TxResult add_tls_certificate(const WorldState& state, const Transaction& tx, const ExecContext& ctx);
TxResult revoke_certificate(const WorldState& state, const Transaction& tx, const ExecContext& ctx);
TxResult report_fraud(const WorldState& state, const Transaction& tx, const ExecContext& ctx);
TxResult plead_fraud(const WorldState& state, const Transaction& tx, const ExecContext& ctx);
TxResult resolve_fraud(const WorldState& state, const Transaction& tx, const ExecContext& ctx);
TxResult transfer_token(const WorldState& state, const Transaction& tx, const ExecContext& ctx);

/// Number of distinct board keys with a valid signature over tx.digest().
std::size_t count_board_approvals(const TrustedCAsState& cas, const Transaction& tx);

}  // namespace certledger
