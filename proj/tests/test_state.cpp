#include "doctest.h"

#include "world_fixture.hpp"

#include <random>

using namespace certledger;
using certledger::testing::World;
using certledger::testing::t0;

namespace {

RevokeCertPayload revocation_by(const crypto::KeyPair& signer, const CertId& id)
{
    return {id, signer.sign(revocation_message(id))};
}

ReportFraudPayload evidence(const crypto::KeyPair& genuine_key, const CertId& fake, const CertId& genuine,
                            const crypto::KeyPair& reporter)
{
    return {fake, genuine, genuine_key.sign(fraud_evidence_message(fake, genuine, account_address(reporter.public_key())))};
}

PleadFraudPayload plea_by(const crypto::KeyPair& ca_key, const Certificate& ca, std::uint32_t report)
{
    auto doc = sha256(std::string_view("issuance dossier"));
    return {report, cert_id(ca), doc, ca_key.sign(plea_message(report, doc))};
}

}  // namespace

TEST_CASE("genesis")
{
    World w(2, 3, false);
    auto token = w.state.token();
    CHECK(token.total_supply == 1'000'000);
    CHECK(w.state.total_balance() == token.total_supply);
    CHECK(token.fee(TxKind::AddTLSCert) == 1);
    CHECK(token.fee(TxKind::TransferToken) == 0);
    auto cas = w.state.trusted_cas();
    CHECK(cas.threshold == 2);
    CHECK(cas.board_keys.size() == 3);
    CHECK(cas.entries.empty());

    GenesisParams bad;
    bad.board_keys = {w.board[0].public_key()};
    bad.threshold = 2;
    CHECK_THROWS_AS(WorldState::genesis(bad), std::invalid_argument);
    bad.threshold = 0;
    CHECK_THROWS_AS(WorldState::genesis(bad), std::invalid_argument);
    bad.threshold = 1;
    bad.fee_schedule[TxKind::AddTLSCert] = 0;
    CHECK_THROWS_AS(WorldState::genesis(bad), std::invalid_argument);
}

TEST_CASE("every stored record decodes to exactly one kind")
{
    World w;
    auto c = w.leaf("example.com", w.owner);
    w.add(c);
    int counts[8] = {};
    w.state.trie().for_each([&](const Hash256&, const Bytes& v) {
        auto k = record_kind(v);
        ++counts[static_cast<int>(k)];
        switch (k) {
        case RecordKind::TrustedCAs: CHECK(encode_record(decode_trusted_cas(v)) == v); break;
        case RecordKind::Token: CHECK(encode_record(decode_token(v)) == v); break;
        case RecordKind::FraudReports: CHECK(encode_record(decode_fraud_reports(v)) == v); break;
        case RecordKind::Account: CHECK(encode_record(decode_account(v)) == v); break;
        case RecordKind::Domain: CHECK(encode_record(decode_domain(v)) == v); break;
        case RecordKind::Certificate: CHECK(encode_record(decode_cert_record(v)) == v); break;
        case RecordKind::IssuerIndex: CHECK(encode_issuer_index(decode_issuer_index(v)) == v); break;
        }
    });
    CHECK(counts[static_cast<int>(RecordKind::TrustedCAs)] == 1);
    CHECK(counts[static_cast<int>(RecordKind::Certificate)] == 1);
    CHECK(counts[static_cast<int>(RecordKind::Domain)] == 1);
}

TEST_CASE("add_trusted_ca")
{
    World w(2, 3, false);
    auto board_before = w.balance_of(w.board_account.public_key());

    SUBCASE("two of three signatures admit a fresh CA and move the fee")
    {
        auto r = w.apply(w.governed(TxKind::AddTrustedCA, AddTrustedCAPayload{w.ca}, 2));
        REQUIRE(r);
        const auto* e = w.state.trusted_cas().find(cert_id(w.ca));
        REQUIRE(e);
        CHECK(e->status == TrustStatus::Trusted);
        CHECK(w.balance_of(w.ca_key.public_key()) == 999);
        CHECK(w.balance_of(w.board_account.public_key()) == board_before + 1);
        REQUIRE(r->events.size() == 1);
        CHECK(r->events[0].kind == EventKind::CATrusted);
        CHECK(r->events[0].subject == cert_id(w.ca));
    }

    SUBCASE("one signature is below threshold and changes nothing")
    {
        auto root = w.state.root();
        auto r = w.apply(w.governed(TxKind::AddTrustedCA, AddTrustedCAPayload{w.ca}, 1));
        REQUIRE_FALSE(r);
        CHECK(r.error() == TxError::BelowThreshold);
        CHECK(w.state.root() == root);
    }

    SUBCASE("re-adding is DuplicateCA")
    {
        w.require(w.governed(TxKind::AddTrustedCA, AddTrustedCAPayload{w.ca}, 2));
        auto r = w.apply(w.governed(TxKind::AddTrustedCA, AddTrustedCAPayload{w.ca}, 2));
        REQUIRE_FALSE(r);
        CHECK(r.error() == TxError::DuplicateCA);
    }

    SUBCASE("leaf certificate is a profile violation")
    {
        auto leaf = w.leaf("example.com", w.owner);
        auto r = w.apply(w.governed(TxKind::AddTrustedCA, AddTrustedCAPayload{leaf}, 3));
        REQUIRE_FALSE(r);
        CHECK(r.error() == TxError::ProfileViolation);
    }

    SUBCASE("CA without tokens cannot pay")
    {
        auto poor_key = crypto::KeyPair::from_label("poor-ca");
        auto poor = issue_ca_certificate(poor_key, "Poor", serial_from_number(9), t0 - 10, t0 + 1000);
        auto r = w.apply(w.governed(TxKind::AddTrustedCA, AddTrustedCAPayload{poor}, 2));
        REQUIRE_FALSE(r);
        CHECK(r.error() == TxError::InsufficientBalance);
    }

    SUBCASE("signatures from non-board keys do not count")
    {
        auto t = w.tx(w.board[0], TxKind::AddTrustedCA, AddTrustedCAPayload{w.ca});
        t.add_board_signature(w.board[0]);
        t.add_board_signature(w.stranger);
        t.add_board_signature(w.board[0]);
        CHECK(w.apply(t).error() == TxError::BelowThreshold);
    }
}

TEST_CASE("untrust_ca cascades revocation")
{
    World w;
    std::vector<CertId> ids;
    for (auto d : {"a.com", "b.com", "c.com"})
        ids.push_back(w.add(w.leaf(d, w.owner)));
    auto other = w.add(w.leaf("d.com", w.owner, true));
    auto board_before = w.balance_of(w.board_account.public_key());

    auto r = w.apply(w.governed(TxKind::UntrustCA, UntrustCAPayload{cert_id(w.ca)}, 2));
    REQUIRE(r);
    CHECK(w.state.trusted_cas().find(cert_id(w.ca))->status == TrustStatus::Untrusted);
    int revoked_events = 0, untrusted_events = 0;
    for (const auto& e : r->events) {
        revoked_events += e.kind == EventKind::CertRevoked;
        untrusted_events += e.kind == EventKind::CAUntrusted;
    }
    CHECK(revoked_events == 3);
    CHECK(untrusted_events == 1);
    for (const auto& id : ids) {
        auto rec = w.state.certificate(id);
        CHECK(rec->status == CertStatus::Revoked);
        CHECK(rec->revoked_at_block == w.ctx.block_number);
    }
    CHECK(w.state.certificate(other)->status == CertStatus::NotRevoked);
    CHECK(w.balance_of(w.board_account.public_key()) == board_before + 1);

    SUBCASE("second untrust is AlreadyUntrusted")
    {
        CHECK(w.apply(w.governed(TxKind::UntrustCA, UntrustCAPayload{cert_id(w.ca)}, 2)).error() ==
              TxError::AlreadyUntrusted);
    }
    SUBCASE("unknown id")
    {
        CHECK(w.apply(w.governed(TxKind::UntrustCA, UntrustCAPayload{sha256(std::string_view("x"))}, 2)).error() ==
              TxError::UnknownCA);
    }
    SUBCASE("threshold")
    {
        CHECK(w.apply(w.governed(TxKind::UntrustCA, UntrustCAPayload{cert_id(w.ca2)}, 1)).error() ==
              TxError::BelowThreshold);
    }
    SUBCASE("expired CA")
    {
        w.ctx.now = w.ca2.not_after + 1;
        CHECK(w.apply(w.governed(TxKind::UntrustCA, UntrustCAPayload{cert_id(w.ca2)}, 2)).error() ==
              TxError::ExpiredCA);
    }
    SUBCASE("certificates from an untrusted CA can no longer be added")
    {
        auto late = w.leaf("late.com", w.owner);
        CHECK(w.apply(w.tx(w.owner, TxKind::AddTLSCert, AddTLSCertPayload{late})).error() == TxError::UnknownIssuer);
    }
}

TEST_CASE("untrust fee is capped by the CA's balance")
{
    World w;
    w.require(w.tx(w.ca_key, TxKind::TransferToken,
                   TransferPayload{account_address(w.owner.public_key()), w.balance_of(w.ca_key.public_key())}));
    CHECK(w.balance_of(w.ca_key.public_key()) == 0);
    auto r = w.apply(w.governed(TxKind::UntrustCA, UntrustCAPayload{cert_id(w.ca)}, 2));
    REQUIRE(r);
    CHECK(w.state.total_balance() == w.state.token().total_supply);
}

TEST_CASE("add_tls_certificate")
{
    World w;
    auto c = w.leaf("example.com", w.owner, false, {"www.example.com"});
    auto foundation_before = w.balance_of(w.foundation.public_key());

    auto r = w.apply(w.tx(w.owner, TxKind::AddTLSCert, AddTLSCertPayload{c}));
    REQUIRE(r);
    auto rec = w.state.certificate(cert_id(c));
    REQUIRE(rec);
    CHECK(rec->status == CertStatus::NotRevoked);
    CHECK(rec->added_at_block == w.ctx.block_number);
    CHECK(w.balance_of(w.foundation.public_key()) == foundation_before + 1);
    REQUIRE(r->events.size() == 1);
    CHECK(r->events[0].kind == EventKind::CertAdded);
    CHECK(r->events[0].domains == c.subject_alternative_names);
    CHECK(search_certificates(w.state, "www.example.com").size() == 1);
    CHECK(w.state.issued_by(cert_id(w.ca)) == std::vector<CertId>{cert_id(c)});

    SUBCASE("same certificate twice")
    {
        CHECK(w.apply(w.tx(w.owner, TxKind::AddTLSCert, AddTLSCertPayload{c})).error() == TxError::Duplicate);
    }
    SUBCASE("expired and not-yet-valid")
    {
        auto e = w.leaf("e.com", w.owner);
        w.ctx.now = e.not_after + 1;
        CHECK(w.apply(w.tx(w.owner, TxKind::AddTLSCert, AddTLSCertPayload{e})).error() == TxError::Expired);
        w.ctx.now = e.not_before - 1;
        CHECK(w.apply(w.tx(w.owner, TxKind::AddTLSCert, AddTLSCertPayload{e})).error() == TxError::NotYetValid);
    }
    SUBCASE("profile violation")
    {
        auto bad = issue_tls_certificate(w.ca, w.ca_key, w.owner.public_key(), {"long.com"}, serial_from_number(7),
                                         t0 - 10, t0 - 10 + 900 * seconds_per_day);
        CHECK(w.apply(w.tx(w.owner, TxKind::AddTLSCert, AddTLSCertPayload{bad})).error() == TxError::ProfileViolation);
    }
    SUBCASE("issuer not trusted")
    {
        auto rogue_key = crypto::KeyPair::from_label("rogue");
        auto rogue = issue_ca_certificate(rogue_key, "Rogue", serial_from_number(5), t0 - 10, t0 + 10'000);
        auto bad = issue_tls_certificate(rogue, rogue_key, w.owner.public_key(), {"x.com"}, serial_from_number(8),
                                         t0 - 10, t0 + 1000);
        CHECK(w.apply(w.tx(w.owner, TxKind::AddTLSCert, AddTLSCertPayload{bad})).error() == TxError::UnknownIssuer);
    }
    SUBCASE("claims a trusted issuer but is signed by someone else")
    {
        auto forged = w.leaf("f.com", w.owner);
        sign_certificate(forged, w.stranger);
        CHECK(w.apply(w.tx(w.owner, TxKind::AddTLSCert, AddTLSCertPayload{forged})).error() ==
              TxError::BadIssuerSignature);
    }
    SUBCASE("sender without balance")
    {
        auto d = w.leaf("d.com", w.stranger);
        CHECK(w.apply(w.tx(w.stranger, TxKind::AddTLSCert, AddTLSCertPayload{d})).error() ==
              TxError::InsufficientBalance);
    }
    SUBCASE("several live certificates per domain")
    {
        w.add(w.leaf("example.com", w.owner));
        CHECK(search_certificates(w.state, "example.com", CertStatus::NotRevoked).size() == 2);
    }
}

TEST_CASE("revoke_certificate")
{
    World w;
    auto owner_cert_key = crypto::KeyPair::from_label("site-key");
    auto c = w.leaf("example.com", owner_cert_key);
    auto id = w.add(c);

    SUBCASE("by the certificate's own key")
    {
        auto r = w.apply(w.tx(w.owner, TxKind::RevokeCert, revocation_by(owner_cert_key, id)));
        REQUIRE(r);
        auto rec = w.state.certificate(id);
        CHECK(rec->status == CertStatus::Revoked);
        CHECK(rec->revoked_at_block == w.ctx.block_number);
        CHECK(r->events.at(0).kind == EventKind::CertRevoked);

        CHECK(w.apply(w.tx(w.owner, TxKind::RevokeCert, revocation_by(owner_cert_key, id))).error() ==
              TxError::AlreadyRevoked);
    }
    SUBCASE("by the issuing CA")
    {
        CHECK(w.apply(w.tx(w.ca_key, TxKind::RevokeCert, revocation_by(w.ca_key, id))));
    }
    SUBCASE("unrelated key")
    {
        CHECK(w.apply(w.tx(w.owner, TxKind::RevokeCert, revocation_by(w.stranger, id))).error() ==
              TxError::UnauthorizedRevoker);
        CHECK(w.apply(w.tx(w.owner, TxKind::RevokeCert, revocation_by(w.ca2_key, id))).error() ==
              TxError::UnauthorizedRevoker);
    }
    SUBCASE("expired certificate")
    {
        w.ctx.now = c.not_after + 1;
        CHECK(w.apply(w.tx(w.owner, TxKind::RevokeCert, revocation_by(owner_cert_key, id))).error() ==
              TxError::CertExpired);
    }
    SUBCASE("unknown certificate")
    {
        auto ghost = sha256(std::string_view("ghost"));
        CHECK(w.apply(w.tx(w.owner, TxKind::RevokeCert, revocation_by(owner_cert_key, ghost))).error() ==
              TxError::UnknownCert);
    }
    SUBCASE("anyone may submit, only the signature matters")
    {
        w.fund(w.stranger.public_key(), 5);
        CHECK(w.apply(w.tx(w.stranger, TxKind::RevokeCert, revocation_by(owner_cert_key, id))));
    }
}

TEST_CASE("fraud report, plea and resolution")
{
    World w;
    auto genuine_key = crypto::KeyPair::from_label("genuine-site");
    auto attacker_key = crypto::KeyPair::from_label("attacker-site");
    auto genuine = w.add(w.leaf("example.com", genuine_key));
    auto fake_cert = w.leaf("example.com", attacker_key, true);  // issued by CA two
    auto fake = w.add(fake_cert, w.ca2_key);
    auto unrelated = w.add(w.leaf("other.org", attacker_key));

    SUBCASE("report opens")
    {
        auto r = w.apply(w.tx(w.owner, TxKind::ReportFraud, evidence(genuine_key, fake, genuine, w.owner)));
        REQUIRE(r);
        auto reports = w.state.fraud_reports().reports;
        REQUIRE(reports.size() == 1);
        CHECK(reports[0].resolution == Resolution::Open);
        CHECK(reports[0].fake_cert == fake_cert);
        CHECK(r->events.at(0).kind == EventKind::FraudReported);
        CHECK(r->events.at(0).report_index == 0u);
    }
    SUBCASE("disjoint SANs")
    {
        CHECK(w.apply(w.tx(w.owner, TxKind::ReportFraud, evidence(genuine_key, unrelated, genuine, w.owner))).error() ==
              TxError::SANMismatch);
    }
    SUBCASE("evidence signed by the wrong key")
    {
        CHECK(w.apply(w.tx(w.owner, TxKind::ReportFraud, evidence(w.stranger, fake, genuine, w.owner))).error() ==
              TxError::BadEvidenceSignature);
    }
    SUBCASE("evidence bound to another reporter")
    {
        auto p = evidence(genuine_key, fake, genuine, w.stranger);
        CHECK(w.apply(w.tx(w.owner, TxKind::ReportFraud, p)).error() == TxError::BadEvidenceSignature);
    }
    SUBCASE("fake not in the ledger")
    {
        auto ghost = cert_id(w.leaf("example.com", attacker_key, true));
        CHECK(w.apply(w.tx(w.owner, TxKind::ReportFraud, evidence(genuine_key, ghost, genuine, w.owner))).error() ==
              TxError::FakeCertNotInLedger);
    }
    SUBCASE("genuine certificate already revoked")
    {
        w.require(w.tx(w.owner, TxKind::RevokeCert, revocation_by(genuine_key, genuine)));
        CHECK(w.apply(w.tx(w.owner, TxKind::ReportFraud, evidence(genuine_key, fake, genuine, w.owner))).error() ==
              TxError::GenuineCertRevoked);
    }

    SUBCASE("plea and verdicts")
    {
        w.require(w.tx(w.owner, TxKind::ReportFraud, evidence(genuine_key, fake, genuine, w.owner)));
        auto ca2_before = w.balance_of(w.ca2_key.public_key());

        SUBCASE("issuer pleads")
        {
            auto r = w.apply(w.tx(w.ca2_key, TxKind::PleadFraud, plea_by(w.ca2_key, w.ca2, 0)));
            REQUIRE(r);
            CHECK(w.state.fraud_reports().reports[0].plea.has_value());
            CHECK(r->events.at(0).kind == EventKind::PleaAdded);
            CHECK(w.balance_of(w.ca2_key.public_key()) == ca2_before - 1);
            CHECK(w.apply(w.tx(w.ca2_key, TxKind::PleadFraud, plea_by(w.ca2_key, w.ca2, 0))).error() ==
                  TxError::AlreadyPleaded);
        }
        SUBCASE("another CA cannot plead")
        {
            CHECK(w.apply(w.tx(w.ca_key, TxKind::PleadFraud, plea_by(w.ca_key, w.ca, 0))).error() == TxError::NotIssuer);
            auto forged = plea_by(w.ca_key, w.ca2, 0);  // names CA two, signed by CA one
            CHECK(w.apply(w.tx(w.ca_key, TxKind::PleadFraud, forged)).error() == TxError::NotIssuer);
        }
        SUBCASE("unknown report")
        {
            CHECK(w.apply(w.tx(w.ca2_key, TxKind::PleadFraud, plea_by(w.ca2_key, w.ca2, 5))).error() ==
                  TxError::UnknownReport);
        }
        SUBCASE("Upheld untrusts the issuer and revokes its certificates")
        {
            auto r = w.apply(w.governed(TxKind::ResolveFraud, ResolveFraudPayload{0, Resolution::Upheld}, 2));
            REQUIRE(r);
            CHECK(w.state.fraud_reports().reports[0].resolution == Resolution::Upheld);
            CHECK(w.state.trusted_cas().find(cert_id(w.ca2))->status == TrustStatus::Untrusted);
            CHECK(w.state.certificate(fake)->status == CertStatus::Revoked);
            CHECK(w.state.certificate(genuine)->status == CertStatus::NotRevoked);
            CHECK(r->events.front().kind == EventKind::FraudResolved);

            CHECK(w.apply(w.governed(TxKind::ResolveFraud, ResolveFraudPayload{0, Resolution::Dismissed}, 2)).error() ==
                  TxError::AlreadyResolved);
            CHECK(w.apply(w.tx(w.ca2_key, TxKind::PleadFraud, plea_by(w.ca2_key, w.ca2, 0))).error() ==
                  TxError::ReportClosed);
        }
        SUBCASE("Dismissed keeps the CA trusted")
        {
            REQUIRE(w.apply(w.governed(TxKind::ResolveFraud, ResolveFraudPayload{0, Resolution::Dismissed}, 2)));
            CHECK(w.state.trusted_cas().find(cert_id(w.ca2))->status == TrustStatus::Trusted);
            CHECK(w.state.certificate(fake)->status == CertStatus::NotRevoked);
        }
        SUBCASE("resolution needs the threshold")
        {
            CHECK(w.apply(w.governed(TxKind::ResolveFraud, ResolveFraudPayload{0, Resolution::Upheld}, 1)).error() ==
                  TxError::BelowThreshold);
        }
        SUBCASE("untrusted CA cannot plead")
        {
            w.require(w.governed(TxKind::UntrustCA, UntrustCAPayload{cert_id(w.ca2)}, 2));
            CHECK(w.apply(w.tx(w.ca2_key, TxKind::PleadFraud, plea_by(w.ca2_key, w.ca2, 0))).error() ==
                  TxError::CANotTrusted);
        }
    }
}

TEST_CASE("transfer_token")
{
    World w;
    auto alice = crypto::KeyPair::from_label("alice");
    auto bob = crypto::KeyPair::from_label("bob");
    w.fund(alice.public_key(), 10);

    SUBCASE("moves the amount")
    {
        w.require(w.tx(alice, TxKind::TransferToken, TransferPayload{account_address(bob.public_key()), 4}));
        CHECK(w.balance_of(alice.public_key()) == 6);
        CHECK(w.balance_of(bob.public_key()) == 4);
        CHECK(w.state.account(account_address(bob.public_key())).owner_key == std::nullopt);
    }
    SUBCASE("insufficient balance leaves the state untouched")
    {
        auto root = w.state.root();
        CHECK(w.apply(w.tx(alice, TxKind::TransferToken, TransferPayload{account_address(bob.public_key()), 11}))
                  .error() == TxError::InsufficientBalance);
        CHECK(w.state.root() == root);
    }
    SUBCASE("zero amount only bumps the nonce")
    {
        w.require(w.tx(alice, TxKind::TransferToken, TransferPayload{account_address(bob.public_key()), 0}));
        CHECK(w.nonce_of(alice) == 1);
        CHECK(w.balance_of(alice.public_key()) == 10);
        CHECK_FALSE(w.state.has_account(account_address(bob.public_key())));
    }
    SUBCASE("replay is rejected by the nonce")
    {
        auto t = w.tx(alice, TxKind::TransferToken, TransferPayload{account_address(bob.public_key()), 1});
        w.require(t);
        CHECK(w.apply(t).error() == TxError::StaleNonce);
        auto future = make_transaction(alice, 5, TxKind::TransferToken, TransferPayload{account_address(bob.public_key()), 1});
        CHECK(w.apply(future).error() == TxError::FutureNonce);
    }
    SUBCASE("tampered transaction fails the sender signature")
    {
        auto t = w.tx(alice, TxKind::TransferToken, TransferPayload{account_address(bob.public_key()), 1});
        t.payload.back() ^= 1;
        CHECK(w.apply(t).error() == TxError::BadSignature);
    }
    SUBCASE("malformed payload")
    {
        auto t = w.tx(alice, TxKind::TransferToken, TransferPayload{account_address(bob.public_key()), 1});
        t.payload.push_back(0);
        t.sign(alice);
        CHECK(w.apply(t).error() == TxError::MalformedPayload);
    }
    SUBCASE("direct operation checks the kind")
    {
        auto t = w.tx(alice, TxKind::TransferToken, TransferPayload{account_address(bob.public_key()), 1});
        CHECK(add_tls_certificate(w.state, t, w.ctx).error() == TxError::WrongKind);
    }
}

TEST_CASE("search_certificates")
{
    World w;
    auto k = crypto::KeyPair::from_label("site");
    w.add(w.leaf("example.com", k));
    w.add(w.leaf("example.com", k));
    auto third = w.add(w.leaf("example.com", k));
    w.require(w.tx(w.owner, TxKind::RevokeCert, revocation_by(k, third)));

    CHECK(search_certificates(w.state, "example.com", CertStatus::NotRevoked).size() == 2);
    CHECK(search_certificates(w.state, "example.com", CertStatus::Revoked).size() == 1);
    CHECK(search_certificates(w.state, "example.com").size() == 3);
    CHECK(search_certificates(w.state, "unknown.net").empty());
}

TEST_CASE("transaction encoding round-trips")
{
    World w;
    auto t = w.governed(TxKind::UntrustCA, UntrustCAPayload{cert_id(w.ca)}, 3);
    auto bytes = encode_transaction(t);
    CHECK(decode_transaction(bytes) == t);
    CHECK(encode_transaction(decode_transaction(bytes)) == bytes);
    bytes.push_back(0);
    CHECK_THROWS_AS(decode_transaction(bytes), DecodeError);
}

TEST_CASE("event log lines round-trip")
{
    Event e;
    e.block_number = 12;
    e.index = 3;
    e.kind = EventKind::PleaAdded;
    e.subject = sha256(std::string_view("s"));
    e.domains = {"a.com", "b.com"};
    e.report_index = 4;
    auto line = event_to_json_line(e);
    CHECK(line.find('\n') == std::string::npos);
    CHECK(event_from_json_line(line) == e);
}
