#include "certledger/contracts.hpp"

#include <json.hpp>

#include <algorithm>
#include <set>

namespace certledger {

const char* to_string(EventKind k)
{
    switch (k) {
    case EventKind::CertAdded: return "CertAdded";
    case EventKind::CertRevoked: return "CertRevoked";
    case EventKind::CATrusted: return "CATrusted";
    case EventKind::CAUntrusted: return "CAUntrusted";
    case EventKind::FraudReported: return "FraudReported";
    case EventKind::PleaAdded: return "PleaAdded";
    case EventKind::FraudResolved: return "FraudResolved";
    }
    return "?";
}

const char* to_string(TxError e)
{
    switch (e) {
    case TxError::BadSignature: return "BadSignature";
    case TxError::StaleNonce: return "StaleNonce";
    case TxError::FutureNonce: return "FutureNonce";
    case TxError::WrongKind: return "WrongKind";
    case TxError::MalformedPayload: return "MalformedPayload";
    case TxError::BelowThreshold: return "BelowThreshold";
    case TxError::DuplicateCA: return "DuplicateCA";
    case TxError::ProfileViolation: return "ProfileViolation";
    case TxError::InsufficientBalance: return "InsufficientBalance";
    case TxError::UnknownCA: return "UnknownCA";
    case TxError::AlreadyUntrusted: return "AlreadyUntrusted";
    case TxError::ExpiredCA: return "ExpiredCA";
    case TxError::Duplicate: return "Duplicate";
    case TxError::Expired: return "Expired";
    case TxError::NotYetValid: return "NotYetValid";
    case TxError::UnknownIssuer: return "UnknownIssuer";
    case TxError::BadIssuerSignature: return "BadIssuerSignature";
    case TxError::UnknownCert: return "UnknownCert";
    case TxError::AlreadyRevoked: return "AlreadyRevoked";
    case TxError::CertExpired: return "CertExpired";
    case TxError::UnauthorizedRevoker: return "UnauthorizedRevoker";
    case TxError::FakeCertNotInLedger: return "FakeCertNotInLedger";
    case TxError::SANMismatch: return "SANMismatch";
    case TxError::BadEvidenceSignature: return "BadEvidenceSignature";
    case TxError::GenuineCertRevoked: return "GenuineCertRevoked";
    case TxError::UnknownReport: return "UnknownReport";
    case TxError::ReportClosed: return "ReportClosed";
    case TxError::NotIssuer: return "NotIssuer";
    case TxError::CANotTrusted: return "CANotTrusted";
    case TxError::AlreadyPleaded: return "AlreadyPleaded";
    case TxError::AlreadyResolved: return "AlreadyResolved";
    }
    return "?";
}

std::string event_to_json_line(const Event& e)
{
    nlohmann::ordered_json j;
    j["block"] = e.block_number;
    j["index"] = e.index;
    j["kind"] = to_string(e.kind);
    j["subject"] = e.subject.hex();
    j["domains"] = e.domains;
    if (e.report_index)
        j["report"] = *e.report_index;
    return j.dump();
}

Event event_from_json_line(std::string_view line)
{
    auto j = nlohmann::json::parse(line);
    Event e;
    e.block_number = j.at("block").get<std::uint64_t>();
    e.index = j.at("index").get<std::uint32_t>();
    auto kind = j.at("kind").get<std::string>();
    bool found = false;
    for (std::uint8_t k = 1; k <= 7; ++k) {
        if (kind == to_string(static_cast<EventKind>(k))) {
            e.kind = static_cast<EventKind>(k);
            found = true;
        }
    }
    if (!found)
        throw DecodeError("unknown event kind " + kind);
    e.subject = hash_from_hex(j.at("subject").get<std::string>());
    e.domains = j.at("domains").get<std::vector<std::string>>();
    if (j.contains("report"))
        e.report_index = j["report"].get<std::uint32_t>();
    return e;
}

std::size_t count_board_approvals(const TrustedCAsState& cas, const Transaction& tx)
{
    auto digest = tx.digest();
    std::set<crypto::PublicKey> approved;
    for (const auto& s : tx.board_signatures) {
        if (approved.count(s.key))
            continue;
        if (std::find(cas.board_keys.begin(), cas.board_keys.end(), s.key) == cas.board_keys.end())
            continue;
        if (crypto::verify(s.key, digest, s.signature))
            approved.insert(s.key);
    }
    return approved.size();
}

namespace {

Expected<AccountState, TxError> begin(const WorldState& state, const Transaction& tx, TxKind expected)
{
    if (!crypto::verify(tx.sender_key, tx.digest(), tx.sender_signature))
        return fail(TxError::BadSignature);
    auto sender = state.account(tx.sender());
    if (tx.nonce < sender.nonce)
        return fail(TxError::StaleNonce);
    if (tx.nonce > sender.nonce)
        return fail(TxError::FutureNonce);
    if (tx.kind != expected)
        return fail(TxError::WrongKind);
    return sender;
}

template <class P, class F>
std::optional<P> decode_payload(const Transaction& tx, F&& decoder)
{
    try {
        return decoder(tx.payload);
    } catch (const DecodeError&) {
        return std::nullopt;
    }
}

WorldState finish_sender(const WorldState& s, const Transaction& tx)
{
    auto acct = s.account(tx.sender());
    acct.owner_key = tx.sender_key;
    acct.nonce = tx.nonce + 1;
    return s.with_account(tx.sender(), acct);
}

// Zero amounts and self-moves leave accounts untouched; the recipient is
// created on first receipt.
bool move_tokens(WorldState& s, const Address& from, const Address& to, std::uint64_t amount)
{
    if (amount == 0)
        return true;
    auto src = s.account(from);
    if (src.balance < amount)
        return false;
    if (from == to)
        return true;
    src.balance -= amount;
    s = s.with_account(from, src);
    auto dst = s.account(to);
    dst.balance += amount;
    s = s.with_account(to, dst);
    return true;
}

// Takes as much of the fee as the payer holds. Used when the payer is the
// party being sanctioned, so an empty account cannot block the sanction.
void move_tokens_capped(WorldState& s, const Address& from, const Address& to, std::uint64_t amount)
{
    move_tokens(s, from, to, std::min(amount, s.account(from).balance));
}

Event make_event(const ExecContext& ctx, EventKind kind, const Hash256& subject,
                 std::vector<std::string> domains = {}, std::optional<std::uint32_t> report = std::nullopt)
{
    Event e;
    e.block_number = ctx.block_number;
    e.kind = kind;
    e.subject = subject;
    e.domains = std::move(domains);
    e.report_index = report;
    return e;
}

// Marks the CA untrusted and revokes every live certificate it issued.
WorldState cascade_untrust(WorldState s, const CertId& ca_id, const ExecContext& ctx, std::vector<Event>& events)
{
    auto cas = s.trusted_cas();
    cas.entries.at(ca_id).status = TrustStatus::Untrusted;
    s = s.with(cas);
    events.push_back(make_event(ctx, EventKind::CAUntrusted, ca_id));
    for (const auto& id : s.issued_by(ca_id)) {
        auto rec = s.certificate(id);
        if (!rec || rec->status == CertStatus::Revoked)
            continue;
        rec->status = CertStatus::Revoked;
        rec->revoked_at_block = ctx.block_number;
        s = s.with_certificate(*rec);
        events.push_back(make_event(ctx, EventKind::CertRevoked, id, rec->certificate.subject_alternative_names));
    }
    return s;
}

TxError from_verdict(Verdict v)
{
    switch (v) {
    case Verdict::Expired: return TxError::Expired;
    case Verdict::NotYetValid: return TxError::NotYetValid;
    case Verdict::UnknownIssuer: return TxError::UnknownIssuer;
    case Verdict::BadSignature: return TxError::BadIssuerSignature;
    default: return TxError::ProfileViolation;
    }
}

bool sans_intersect(const Certificate& a, const Certificate& b)
{
    return std::any_of(a.subject_alternative_names.begin(), a.subject_alternative_names.end(),
                       [&](const std::string& n) { return b.covers(n); });
}

}  // namespace

TxResult add_trusted_ca(const WorldState& state, const Transaction& tx, const ExecContext& ctx)
{
    if (auto pre = begin(state, tx, TxKind::AddTrustedCA); !pre)
        return fail(pre.error());
    auto p = decode_payload<AddTrustedCAPayload>(tx, decode_add_trusted_ca);
    if (!p)
        return fail(TxError::MalformedPayload);

    auto cas = state.trusted_cas();
    if (count_board_approvals(cas, tx) < cas.threshold)
        return fail(TxError::BelowThreshold);
    auto id = cert_id(p->ca);
    if (cas.find(id))
        return fail(TxError::DuplicateCA);
    if (auto v = validate_ca_profile(p->ca, ctx.now); !v.ok())
        return fail(from_verdict(v.verdict));

    WorldState s = state;
    auto token = s.token();
    if (!move_tokens(s, account_address(p->ca.public_key), token.board_account, token.fee(tx.kind)))
        return fail(TxError::InsufficientBalance);

    cas.entries.emplace(id, TrustedCAEntry{p->ca, TrustStatus::Trusted});
    s = finish_sender(s.with(cas), tx);
    return Applied{s, {make_event(ctx, EventKind::CATrusted, id)}};
}

TxResult untrust_ca(const WorldState& state, const Transaction& tx, const ExecContext& ctx)
{
    if (auto pre = begin(state, tx, TxKind::UntrustCA); !pre)
        return fail(pre.error());
    auto p = decode_payload<UntrustCAPayload>(tx, decode_untrust_ca);
    if (!p)
        return fail(TxError::MalformedPayload);

    auto cas = state.trusted_cas();
    if (count_board_approvals(cas, tx) < cas.threshold)
        return fail(TxError::BelowThreshold);
    const auto* entry = cas.find(p->ca_id);
    if (!entry)
        return fail(TxError::UnknownCA);
    if (entry->status == TrustStatus::Untrusted)
        return fail(TxError::AlreadyUntrusted);
    if (ctx.now > entry->certificate.not_after)
        return fail(TxError::ExpiredCA);

    WorldState s = state;
    auto token = s.token();
    move_tokens_capped(s, account_address(entry->certificate.public_key), token.board_account, token.fee(tx.kind));

    std::vector<Event> events;
    s = cascade_untrust(s, p->ca_id, ctx, events);
    return Applied{finish_sender(s, tx), std::move(events)};
}

TxResult add_tls_certificate(const WorldState& state, const Transaction& tx, const ExecContext& ctx)
{
    if (auto pre = begin(state, tx, TxKind::AddTLSCert); !pre)
        return fail(pre.error());
    auto p = decode_payload<AddTLSCertPayload>(tx, decode_add_tls_cert);
    if (!p)
        return fail(TxError::MalformedPayload);

    const auto& cert = p->cert;
    auto id = cert_id(cert);
    if (state.certificate(id))
        return fail(TxError::Duplicate);
    if (auto v = validate_tls_profile(cert, ctx.now); !v.ok())
        return fail(from_verdict(v.verdict));
    auto trusted = state.trusted_cas().trusted_certificates();
    auto path = build_trusted_path(cert, trusted);
    if (!path)
        return fail(from_verdict(path.error().verdict));

    WorldState s = state;
    auto token = s.token();
    if (!move_tokens(s, tx.sender(), token.foundation_account, token.fee(tx.kind)))
        return fail(TxError::InsufficientBalance);

    s = s.with_certificate(CertRecord{cert, CertStatus::NotRevoked, ctx.block_number, std::nullopt});
    std::set<std::string> seen;
    for (const auto& san : cert.subject_alternative_names) {
        if (!seen.insert(san).second)
            continue;
        auto dom = s.domain(san);
        dom.certificates.push_back(id);
        s = s.with(dom);
    }
    auto issued = s.issued_by(cert.issuer_id);
    issued.push_back(id);
    s = s.with_issuer_index(cert.issuer_id, issued);

    s = finish_sender(s, tx);
    return Applied{s, {make_event(ctx, EventKind::CertAdded, id, cert.subject_alternative_names)}};
}

TxResult revoke_certificate(const WorldState& state, const Transaction& tx, const ExecContext& ctx)
{
    if (auto pre = begin(state, tx, TxKind::RevokeCert); !pre)
        return fail(pre.error());
    auto p = decode_payload<RevokeCertPayload>(tx, decode_revoke_cert);
    if (!p)
        return fail(TxError::MalformedPayload);

    auto rec = state.certificate(p->cert_id);
    if (!rec)
        return fail(TxError::UnknownCert);
    if (rec->status == CertStatus::Revoked)
        return fail(TxError::AlreadyRevoked);
    if (ctx.now > rec->certificate.not_after)
        return fail(TxError::CertExpired);

    auto msg = revocation_message(p->cert_id);
    bool authorized = crypto::verify(rec->certificate.public_key, msg, p->revocation_signature);
    auto cas = state.trusted_cas();
    if (!authorized) {
        if (const auto* issuer = cas.find(rec->certificate.issuer_id))
            authorized = crypto::verify(issuer->certificate.public_key, msg, p->revocation_signature);
    }
    if (!authorized)
        return fail(TxError::UnauthorizedRevoker);

    WorldState s = state;
    auto token = s.token();
    if (!move_tokens(s, tx.sender(), token.foundation_account, token.fee(tx.kind)))
        return fail(TxError::InsufficientBalance);

    rec->status = CertStatus::Revoked;
    rec->revoked_at_block = ctx.block_number;
    s = finish_sender(s.with_certificate(*rec), tx);
    return Applied{s, {make_event(ctx, EventKind::CertRevoked, p->cert_id, rec->certificate.subject_alternative_names)}};
}

TxResult report_fraud(const WorldState& state, const Transaction& tx, const ExecContext& ctx)
{
    if (auto pre = begin(state, tx, TxKind::ReportFraud); !pre)
        return fail(pre.error());
    auto p = decode_payload<ReportFraudPayload>(tx, decode_report_fraud);
    if (!p || p->fake_cert_id == p->genuine_cert_id)
        return fail(TxError::MalformedPayload);

    auto fake = state.certificate(p->fake_cert_id);
    if (!fake)
        return fail(TxError::FakeCertNotInLedger);
    auto genuine = state.certificate(p->genuine_cert_id);
    if (!genuine)
        return fail(TxError::UnknownCert);
    if (!sans_intersect(fake->certificate, genuine->certificate))
        return fail(TxError::SANMismatch);
    auto msg = fraud_evidence_message(p->fake_cert_id, p->genuine_cert_id, tx.sender());
    if (!crypto::verify(genuine->certificate.public_key, msg, p->evidence_signature))
        return fail(TxError::BadEvidenceSignature);
    if (genuine->status != CertStatus::NotRevoked)
        return fail(TxError::GenuineCertRevoked);

    WorldState s = state;
    auto token = s.token();
    if (!move_tokens(s, tx.sender(), token.board_account, token.fee(tx.kind)))
        return fail(TxError::InsufficientBalance);

    auto reports = s.fraud_reports();
    FraudReport rep;
    rep.fake_cert = fake->certificate;
    rep.genuine_cert_id = p->genuine_cert_id;
    rep.reporter_account = tx.sender();
    rep.evidence_signature = p->evidence_signature;
    reports.reports.push_back(rep);
    auto index = static_cast<std::uint32_t>(reports.reports.size() - 1);

    s = finish_sender(s.with(reports), tx);
    return Applied{s, {make_event(ctx, EventKind::FraudReported, p->fake_cert_id,
                                  fake->certificate.subject_alternative_names, index)}};
}

TxResult plead_fraud(const WorldState& state, const Transaction& tx, const ExecContext& ctx)
{
    if (auto pre = begin(state, tx, TxKind::PleadFraud); !pre)
        return fail(pre.error());
    auto p = decode_payload<PleadFraudPayload>(tx, decode_plead_fraud);
    if (!p)
        return fail(TxError::MalformedPayload);

    auto reports = state.fraud_reports();
    if (p->report_index >= reports.reports.size())
        return fail(TxError::UnknownReport);
    auto& rep = reports.reports[p->report_index];
    if (rep.resolution != Resolution::Open)
        return fail(TxError::ReportClosed);
    if (rep.plea)
        return fail(TxError::AlreadyPleaded);
    if (p->ca_id != rep.fake_cert.issuer_id)
        return fail(TxError::NotIssuer);
    auto cas = state.trusted_cas();
    const auto* ca = cas.find(p->ca_id);
    if (!ca || ca->status != TrustStatus::Trusted)
        return fail(TxError::CANotTrusted);
    if (!crypto::verify(ca->certificate.public_key, plea_message(p->report_index, p->document_hash), p->ca_signature))
        return fail(TxError::NotIssuer);

    WorldState s = state;
    auto token = s.token();
    if (!move_tokens(s, account_address(ca->certificate.public_key), token.board_account, token.fee(tx.kind)))
        return fail(TxError::InsufficientBalance);

    rep.plea = Plea{p->ca_id, p->document_hash, p->ca_signature};
    auto fake_id = cert_id(rep.fake_cert);
    auto domains = rep.fake_cert.subject_alternative_names;
    s = finish_sender(s.with(reports), tx);
    return Applied{s, {make_event(ctx, EventKind::PleaAdded, fake_id, std::move(domains), p->report_index)}};
}

TxResult resolve_fraud(const WorldState& state, const Transaction& tx, const ExecContext& ctx)
{
    if (auto pre = begin(state, tx, TxKind::ResolveFraud); !pre)
        return fail(pre.error());
    auto p = decode_payload<ResolveFraudPayload>(tx, decode_resolve_fraud);
    if (!p)
        return fail(TxError::MalformedPayload);

    auto cas = state.trusted_cas();
    if (count_board_approvals(cas, tx) < cas.threshold)
        return fail(TxError::BelowThreshold);
    auto reports = state.fraud_reports();
    if (p->report_index >= reports.reports.size())
        return fail(TxError::UnknownReport);
    auto& rep = reports.reports[p->report_index];
    if (rep.resolution != Resolution::Open)
        return fail(TxError::AlreadyResolved);

    rep.resolution = p->verdict;
    WorldState s = state.with(reports);
    const auto* issuer = cas.find(rep.fake_cert.issuer_id);
    if (issuer) {
        auto token = s.token();
        move_tokens_capped(s, account_address(issuer->certificate.public_key), token.board_account,
                           token.fee(tx.kind));
    }

    std::vector<Event> events;
    events.push_back(make_event(ctx, EventKind::FraudResolved, cert_id(rep.fake_cert),
                                rep.fake_cert.subject_alternative_names, p->report_index));
    if (p->verdict == Resolution::Upheld && issuer && issuer->status == TrustStatus::Trusted)
        s = cascade_untrust(s, rep.fake_cert.issuer_id, ctx, events);
    return Applied{finish_sender(s, tx), std::move(events)};
}

TxResult transfer_token(const WorldState& state, const Transaction& tx, const ExecContext&)
{
    if (auto pre = begin(state, tx, TxKind::TransferToken); !pre)
        return fail(pre.error());
    auto p = decode_payload<TransferPayload>(tx, decode_transfer);
    if (!p)
        return fail(TxError::MalformedPayload);

    WorldState s = state;
    auto token = s.token();
    auto fee = token.fee(tx.kind);
    auto balance = s.account(tx.sender()).balance;
    if (p->amount > balance || fee > balance - p->amount)
        return fail(TxError::InsufficientBalance);
    move_tokens(s, tx.sender(), p->recipient, p->amount);
    move_tokens(s, tx.sender(), token.foundation_account, fee);
    return Applied{finish_sender(s, tx), {}};
}

TxResult apply_transaction(const WorldState& state, const Transaction& tx, const ExecContext& ctx)
{
    switch (tx.kind) {
    case TxKind::AddTrustedCA: return add_trusted_ca(state, tx, ctx);
    case TxKind::UntrustCA: return untrust_ca(state, tx, ctx);
    case TxKind::AddTLSCert: return add_tls_certificate(state, tx, ctx);
    case TxKind::RevokeCert: return revoke_certificate(state, tx, ctx);
    case TxKind::ReportFraud: return report_fraud(state, tx, ctx);
    case TxKind::PleadFraud: return plead_fraud(state, tx, ctx);
    case TxKind::ResolveFraud: return resolve_fraud(state, tx, ctx);
    case TxKind::TransferToken: return transfer_token(state, tx, ctx);
    }
    return fail(TxError::WrongKind);
}

}  // namespace certledger
