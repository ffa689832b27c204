#include "certledger/state.hpp"

#include <stdexcept>

namespace certledger {

namespace address {

namespace {
constexpr std::uint8_t tag_singleton = 0x00;
constexpr std::uint8_t tag_domain = 0x02;
constexpr std::uint8_t tag_certificate = 0x03;
constexpr std::uint8_t tag_issuer = 0x04;

Address singleton(std::string_view label)
{
    return tagged_hash(tag_singleton, ByteView{reinterpret_cast<const std::uint8_t*>(label.data()), label.size()});
}
}  // namespace

Address trusted_cas() { return singleton("trusted-cas"); }
Address token() { return singleton("token"); }
Address fraud_reports() { return singleton("fraud-reports"); }
Address account(const crypto::PublicKey& key) { return account_address(key); }
Address domain(std::string_view dns_name)
{
    return tagged_hash(tag_domain, ByteView{reinterpret_cast<const std::uint8_t*>(dns_name.data()), dns_name.size()});
}
Address certificate(const CertId& id) { return tagged_hash(tag_certificate, id.view()); }
Address issuer_index(const CertId& ca_id) { return tagged_hash(tag_issuer, ca_id.view()); }

}  // namespace address

RecordKind record_kind(ByteView value)
{
    if (value.empty() || value[0] < 1 || value[0] > 7)
        throw DecodeError("unknown record kind");
    return static_cast<RecordKind>(value[0]);
}

const char* to_string(TrustStatus s) { return s == TrustStatus::Trusted ? "Trusted" : "Untrusted"; }
const char* to_string(CertStatus s) { return s == CertStatus::NotRevoked ? "NotRevoked" : "Revoked"; }

const TrustedCAEntry* TrustedCAsState::find(const CertId& id) const
{
    auto it = entries.find(id);
    return it == entries.end() ? nullptr : &it->second;
}

std::vector<Certificate> TrustedCAsState::trusted_certificates() const
{
    std::vector<Certificate> out;
    for (const auto& [id, e] : entries)
        if (e.status == TrustStatus::Trusted)
            out.push_back(e.certificate);
    return out;
}

FeeSchedule default_fee_schedule()
{
    FeeSchedule f;
    for (auto k : all_tx_kinds)
        f[k] = k == TxKind::TransferToken ? 0 : 1;
    return f;
}

std::uint64_t TokenState::fee(TxKind k) const
{
    auto it = fee_schedule.find(k);
    return it == fee_schedule.end() ? 0 : it->second;
}

namespace {

ByteWriter start(RecordKind k)
{
    ByteWriter w;
    w.u8(static_cast<std::uint8_t>(k));
    return w;
}

ByteReader open(ByteView b, RecordKind k)
{
    if (record_kind(b) != k)
        throw DecodeError("record kind mismatch");
    return ByteReader(b.subspan(1));
}

std::uint32_t bounded_count(ByteReader& r, std::size_t min_item_size)
{
    auto n = r.u32();
    if (n > r.remaining() / min_item_size)
        throw DecodeError("item count exceeds input");
    return n;
}

template <class T, class F>
T finish(ByteReader& r, F&& f)
{
    T out = f(r);
    r.expect_done();
    return out;
}

}  // namespace

Bytes encode_record(const TrustedCAsState& s)
{
    auto w = start(RecordKind::TrustedCAs);
    w.u32(s.threshold);
    w.u32(static_cast<std::uint32_t>(s.board_keys.size()));
    for (const auto& k : s.board_keys)
        w.raw(k.view());
    w.u32(static_cast<std::uint32_t>(s.entries.size()));
    for (const auto& [id, e] : s.entries) {
        encode_certificate_into(w, e.certificate);
        w.u8(static_cast<std::uint8_t>(e.status));
    }
    return std::move(w).bytes();
}

TrustedCAsState decode_trusted_cas(ByteView b)
{
    auto r = open(b, RecordKind::TrustedCAs);
    return finish<TrustedCAsState>(r, [](ByteReader& r) {
        TrustedCAsState s;
        s.threshold = r.u32();
        auto keys = bounded_count(r, 32);
        for (std::uint32_t i = 0; i < keys; ++i)
            s.board_keys.push_back(crypto::PublicKey::from_span(r.raw(32)));
        auto n = bounded_count(r, 1);
        for (std::uint32_t i = 0; i < n; ++i) {
            TrustedCAEntry e;
            e.certificate = decode_certificate_from(r);
            auto st = r.u8();
            if (st > 1)
                throw DecodeError("bad trust status");
            e.status = static_cast<TrustStatus>(st);
            s.entries.emplace(cert_id(e.certificate), std::move(e));
        }
        return s;
    });
}

Bytes encode_record(const TokenState& s)
{
    auto w = start(RecordKind::Token);
    w.u64(s.total_supply);
    w.hash(s.foundation_account).hash(s.board_account);
    w.u32(static_cast<std::uint32_t>(s.fee_schedule.size()));
    for (const auto& [k, fee] : s.fee_schedule)
        w.u8(static_cast<std::uint8_t>(k)).u64(fee);
    return std::move(w).bytes();
}

TokenState decode_token(ByteView b)
{
    auto r = open(b, RecordKind::Token);
    return finish<TokenState>(r, [](ByteReader& r) {
        TokenState s;
        s.total_supply = r.u64();
        s.foundation_account = r.hash();
        s.board_account = r.hash();
        auto n = bounded_count(r, 9);
        for (std::uint32_t i = 0; i < n; ++i) {
            auto k = r.u8();
            if (k < 1 || k > 8)
                throw DecodeError("bad fee kind");
            s.fee_schedule[static_cast<TxKind>(k)] = r.u64();
        }
        return s;
    });
}

Bytes encode_record(const FraudReportState& s)
{
    auto w = start(RecordKind::FraudReports);
    w.u32(static_cast<std::uint32_t>(s.reports.size()));
    for (const auto& rep : s.reports) {
        encode_certificate_into(w, rep.fake_cert);
        w.hash(rep.genuine_cert_id).hash(rep.reporter_account).raw(rep.evidence_signature.view());
        w.u8(rep.plea ? 1 : 0);
        if (rep.plea)
            w.hash(rep.plea->ca_id).hash(rep.plea->document_hash).raw(rep.plea->ca_signature.view());
        w.u8(static_cast<std::uint8_t>(rep.resolution));
    }
    return std::move(w).bytes();
}

FraudReportState decode_fraud_reports(ByteView b)
{
    auto r = open(b, RecordKind::FraudReports);
    return finish<FraudReportState>(r, [](ByteReader& r) {
        FraudReportState s;
        auto n = bounded_count(r, 1);
        for (std::uint32_t i = 0; i < n; ++i) {
            FraudReport rep;
            rep.fake_cert = decode_certificate_from(r);
            rep.genuine_cert_id = r.hash();
            rep.reporter_account = r.hash();
            rep.evidence_signature = crypto::Signature::from_span(r.raw(64));
            if (r.boolean()) {
                Plea p;
                p.ca_id = r.hash();
                p.document_hash = r.hash();
                p.ca_signature = crypto::Signature::from_span(r.raw(64));
                rep.plea = p;
            }
            auto res = r.u8();
            if (res > 2)
                throw DecodeError("bad resolution");
            rep.resolution = static_cast<Resolution>(res);
            s.reports.push_back(std::move(rep));
        }
        return s;
    });
}

Bytes encode_record(const AccountState& s)
{
    auto w = start(RecordKind::Account);
    w.u8(s.owner_key ? 1 : 0);
    if (s.owner_key)
        w.raw(s.owner_key->view());
    w.u64(s.balance).u64(s.nonce);
    return std::move(w).bytes();
}

AccountState decode_account(ByteView b)
{
    auto r = open(b, RecordKind::Account);
    return finish<AccountState>(r, [](ByteReader& r) {
        AccountState s;
        if (r.boolean())
            s.owner_key = crypto::PublicKey::from_span(r.raw(32));
        s.balance = r.u64();
        s.nonce = r.u64();
        return s;
    });
}

Bytes encode_record(const DomainState& s)
{
    auto w = start(RecordKind::Domain);
    w.str(s.domain);
    w.u32(static_cast<std::uint32_t>(s.certificates.size()));
    for (const auto& id : s.certificates)
        w.hash(id);
    return std::move(w).bytes();
}

DomainState decode_domain(ByteView b)
{
    auto r = open(b, RecordKind::Domain);
    return finish<DomainState>(r, [](ByteReader& r) {
        DomainState s;
        s.domain = r.str();
        auto n = bounded_count(r, 32);
        for (std::uint32_t i = 0; i < n; ++i)
            s.certificates.push_back(r.hash());
        return s;
    });
}

/*
 * Certificate record, the value a light client receives in a handshake:
 *   u8 kind (0x06) | certificate | u8 status | u64 added_at_block
 *   | u8 has_revoked | [u64 revoked_at_block]
 */
Bytes encode_record(const CertRecord& s)
{
    auto w = start(RecordKind::Certificate);
    encode_certificate_into(w, s.certificate);
    w.u8(static_cast<std::uint8_t>(s.status));
    w.u64(s.added_at_block);
    w.u8(s.revoked_at_block ? 1 : 0);
    if (s.revoked_at_block)
        w.u64(*s.revoked_at_block);
    return std::move(w).bytes();
}

CertRecord decode_cert_record(ByteView b)
{
    auto r = open(b, RecordKind::Certificate);
    return finish<CertRecord>(r, [](ByteReader& r) {
        CertRecord s;
        s.certificate = decode_certificate_from(r);
        auto st = r.u8();
        if (st > 1)
            throw DecodeError("bad certificate status");
        s.status = static_cast<CertStatus>(st);
        s.added_at_block = r.u64();
        if (r.boolean())
            s.revoked_at_block = r.u64();
        if ((s.status == CertStatus::Revoked) != s.revoked_at_block.has_value())
            throw DecodeError("revocation height disagrees with status");
        return s;
    });
}

Bytes encode_issuer_index(const std::vector<CertId>& ids)
{
    auto w = start(RecordKind::IssuerIndex);
    w.u32(static_cast<std::uint32_t>(ids.size()));
    for (const auto& id : ids)
        w.hash(id);
    return std::move(w).bytes();
}

std::vector<CertId> decode_issuer_index(ByteView b)
{
    auto r = open(b, RecordKind::IssuerIndex);
    return finish<std::vector<CertId>>(r, [](ByteReader& r) {
        std::vector<CertId> ids;
        auto n = bounded_count(r, 32);
        for (std::uint32_t i = 0; i < n; ++i)
            ids.push_back(r.hash());
        return ids;
    });
}

WorldState WorldState::genesis(const GenesisParams& p)
{
    if (p.board_keys.empty())
        throw std::invalid_argument("board needs at least one key");
    if (p.threshold < 1 || p.threshold > p.board_keys.size())
        throw std::invalid_argument("threshold must satisfy 1 <= t <= n");
    for (std::size_t i = 0; i < p.board_keys.size(); ++i)
        for (std::size_t j = i + 1; j < p.board_keys.size(); ++j)
            if (p.board_keys[i] == p.board_keys[j])
                throw std::invalid_argument("duplicate board key");
    for (auto k : all_tx_kinds) {
        auto it = p.fee_schedule.find(k);
        if (it == p.fee_schedule.end())
            throw std::invalid_argument(std::string("fee schedule lacks ") + to_string(k));
        if (k != TxKind::TransferToken && it->second == 0)
            throw std::invalid_argument(std::string("fee must be positive for ") + to_string(k));
    }

    TrustedCAsState cas;
    cas.board_keys = p.board_keys;
    cas.threshold = p.threshold;
    for (const auto& ca : p.initial_cas) {
        if (!ca.is_ca || !ca.has_usage(KeyUsage::cert_sign))
            throw std::invalid_argument("initial CA fails the CA profile");
        cas.entries.emplace(cert_id(ca), TrustedCAEntry{ca, TrustStatus::Trusted});
    }

    TokenState token;
    token.total_supply = p.total_supply;
    token.fee_schedule = p.fee_schedule;
    token.foundation_account = account_address(p.foundation_key);
    token.board_account = account_address(p.board_account_key);

    AccountState foundation;
    foundation.owner_key = p.foundation_key;
    foundation.balance = p.total_supply;

    AccountState board;
    board.owner_key = p.board_account_key;

    WorldState s{StateTrie{}};
    s = s.with(cas).with(token).with(FraudReportState{});
    if (token.board_account != token.foundation_account)
        s = s.with_account(token.board_account, board);
    return s.with_account(token.foundation_account, foundation);
}

WorldState WorldState::put(const Address& a, Bytes value) const
{
    return WorldState{trie_.insert(a, std::move(value))};
}

TrustedCAsState WorldState::trusted_cas() const
{
    auto v = trie_.get(address::trusted_cas());
    return v ? decode_trusted_cas(*v) : TrustedCAsState{};
}

TokenState WorldState::token() const
{
    auto v = trie_.get(address::token());
    return v ? decode_token(*v) : TokenState{};
}

FraudReportState WorldState::fraud_reports() const
{
    auto v = trie_.get(address::fraud_reports());
    return v ? decode_fraud_reports(*v) : FraudReportState{};
}

AccountState WorldState::account(const Address& a) const
{
    auto v = trie_.get(a);
    return v ? decode_account(*v) : AccountState{};
}

bool WorldState::has_account(const Address& a) const { return trie_.get(a).has_value(); }

std::optional<CertRecord> WorldState::certificate(const CertId& id) const
{
    auto v = trie_.get(address::certificate(id));
    if (!v)
        return std::nullopt;
    return decode_cert_record(*v);
}

DomainState WorldState::domain(std::string_view dns_name) const
{
    auto v = trie_.get(address::domain(dns_name));
    if (!v)
        return DomainState{std::string(dns_name), {}};
    return decode_domain(*v);
}

std::vector<CertId> WorldState::issued_by(const CertId& ca_id) const
{
    auto v = trie_.get(address::issuer_index(ca_id));
    return v ? decode_issuer_index(*v) : std::vector<CertId>{};
}

WorldState WorldState::with(const TrustedCAsState& s) const { return put(address::trusted_cas(), encode_record(s)); }
WorldState WorldState::with(const TokenState& s) const { return put(address::token(), encode_record(s)); }
WorldState WorldState::with(const FraudReportState& s) const
{
    return put(address::fraud_reports(), encode_record(s));
}
WorldState WorldState::with_account(const Address& a, const AccountState& s) const { return put(a, encode_record(s)); }
WorldState WorldState::with(const DomainState& s) const { return put(address::domain(s.domain), encode_record(s)); }
WorldState WorldState::with_certificate(const CertRecord& r) const
{
    return put(address::certificate(cert_id(r.certificate)), encode_record(r));
}
WorldState WorldState::with_issuer_index(const CertId& ca_id, const std::vector<CertId>& ids) const
{
    return put(address::issuer_index(ca_id), encode_issuer_index(ids));
}

std::uint64_t WorldState::total_balance() const
{
    std::uint64_t sum = 0;
    trie_.for_each([&](const Hash256&, const Bytes& v) {
        if (record_kind(v) == RecordKind::Account)
            sum += decode_account(v).balance;
    });
    return sum;
}

std::vector<CertRecord> search_certificates(const WorldState& state, std::string_view domain,
                                            std::optional<CertStatus> filter)
{
    std::vector<CertRecord> out;
    for (const auto& id : state.domain(domain).certificates) {
        auto rec = state.certificate(id);
        if (rec && (!filter || rec->status == *filter))
            out.push_back(std::move(*rec));
    }
    return out;
}

}  // namespace certledger
