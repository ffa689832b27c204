#include "certledger/cert.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

namespace certledger {

namespace {

constexpr std::uint8_t cert_format_version = 0x01;
constexpr std::uint8_t known_usage_bits = 0x03;

void encode_tbs(ByteWriter& w, const Certificate& c)
{
    w.u8(cert_format_version);
    w.raw(c.serial);
    w.str(c.subject_common_name);
    w.u32(static_cast<std::uint32_t>(c.subject_alternative_names.size()));
    for (const auto& san : c.subject_alternative_names)
        w.str(san);
    w.hash(c.issuer_id);
    w.u64(static_cast<std::uint64_t>(c.not_before));
    w.u64(static_cast<std::uint64_t>(c.not_after));
    w.raw(c.public_key.view());
    w.u8(c.is_ca ? 1 : 0);
    w.u8(c.key_usage);
}

ValidationOutcome outcome(Verdict v, std::string detail) { return {v, std::move(detail)}; }

ValidationOutcome check_period(const Certificate& c, UnixSeconds now)
{
    if (now < c.not_before)
        return outcome(Verdict::NotYetValid, "now precedes not_before");
    if (now > c.not_after)
        return outcome(Verdict::Expired, "now is past not_after");
    return ValidationOutcome::valid();
}

}  // namespace

bool Certificate::covers(std::string_view dns_name) const
{
    return std::find(subject_alternative_names.begin(), subject_alternative_names.end(), dns_name) !=
           subject_alternative_names.end();
}

void encode_certificate_into(ByteWriter& w, const Certificate& cert)
{
    encode_tbs(w, cert);
    w.raw(cert.signature.view());
}

Bytes encode_certificate(const Certificate& cert)
{
    ByteWriter w;
    encode_certificate_into(w, cert);
    return std::move(w).bytes();
}

Certificate decode_certificate_from(ByteReader& r)
{
    Certificate c;
    if (r.u8() != cert_format_version)
        throw DecodeError("unknown certificate format version");
    auto serial = r.raw(16);
    std::copy(serial.begin(), serial.end(), c.serial.begin());
    c.subject_common_name = r.str();
    auto sans = r.u32();
    if (sans > r.remaining() / 4)
        throw DecodeError("SAN count exceeds input");
    c.subject_alternative_names.reserve(sans);
    for (std::uint32_t i = 0; i < sans; ++i)
        c.subject_alternative_names.push_back(r.str());
    c.issuer_id = r.hash();
    c.not_before = static_cast<UnixSeconds>(r.u64());
    c.not_after = static_cast<UnixSeconds>(r.u64());
    c.public_key = crypto::PublicKey::from_span(r.raw(32));
    c.is_ca = r.boolean();
    c.key_usage = r.u8();
    if ((c.key_usage & ~known_usage_bits) != 0)
        throw DecodeError("unknown key usage bits");
    c.signature = crypto::Signature::from_span(r.raw(64));
    return c;
}

Certificate decode_certificate(ByteView bytes)
{
    ByteReader r(bytes);
    auto c = decode_certificate_from(r);
    r.expect_done();
    return c;
}

Bytes to_be_signed(const Certificate& cert)
{
    ByteWriter w;
    encode_tbs(w, cert);
    return std::move(w).bytes();
}

CertId cert_id(const Certificate& cert) { return sha256(encode_certificate(cert)); }

void sign_certificate(Certificate& cert, const crypto::KeyPair& issuer)
{
    cert.signature = issuer.sign(to_be_signed(cert));
}

bool verify_signature(const Certificate& cert, const crypto::PublicKey& issuer_key)
{
    return crypto::verify(issuer_key, to_be_signed(cert), cert.signature);
}

const char* to_string(Verdict v)
{
    switch (v) {
    case Verdict::Valid: return "Valid";
    case Verdict::Expired: return "Expired";
    case Verdict::NotYetValid: return "NotYetValid";
    case Verdict::ProfileViolation: return "ProfileViolation";
    case Verdict::UnknownIssuer: return "UnknownIssuer";
    case Verdict::BadSignature: return "BadSignature";
    }
    return "?";
}

ValidationOutcome validate_tls_profile(const Certificate& cert, UnixSeconds now)
{
    if (auto p = check_period(cert, now); !p.ok())
        return p;
    if (cert.not_before >= cert.not_after)
        return outcome(Verdict::ProfileViolation, "empty validity window");
    if (cert.is_ca)
        return outcome(Verdict::ProfileViolation, "basic constraints mark a CA certificate");
    if (cert.subject_alternative_names.empty())
        return outcome(Verdict::ProfileViolation, "no subject alternative names");
    if (!cert.has_usage(KeyUsage::digital_signature))
        return outcome(Verdict::ProfileViolation, "digital_signature key usage missing");
    if (cert.has_usage(KeyUsage::cert_sign))
        return outcome(Verdict::ProfileViolation, "leaf certificate carries cert_sign");
    if (cert.not_after - cert.not_before > max_tls_lifetime)
        return outcome(Verdict::ProfileViolation, "lifetime exceeds 825 days");
    return ValidationOutcome::valid();
}

ValidationOutcome validate_ca_profile(const Certificate& cert, UnixSeconds now)
{
    if (auto p = check_period(cert, now); !p.ok())
        return p;
    if (cert.not_before >= cert.not_after)
        return outcome(Verdict::ProfileViolation, "empty validity window");
    if (!cert.is_ca)
        return outcome(Verdict::ProfileViolation, "basic constraints do not mark a CA");
    if (!cert.has_usage(KeyUsage::cert_sign))
        return outcome(Verdict::ProfileViolation, "cert_sign key usage missing");
    return ValidationOutcome::valid();
}

Expected<Certificate, ValidationOutcome> build_trusted_path(const Certificate& cert,
                                                            std::span<const Certificate> trusted)
{
    auto it = std::find_if(trusted.begin(), trusted.end(),
                           [&](const Certificate& ca) { return cert_id(ca) == cert.issuer_id; });
    if (it == trusted.end())
        return fail(outcome(Verdict::UnknownIssuer, "issuer " + cert.issuer_id.hex() + " is not trusted"));
    if (!verify_signature(cert, it->public_key))
        return fail(outcome(Verdict::BadSignature, "signature does not verify under issuer key"));
    return *it;
}

Serial serial_from_number(std::uint64_t n)
{
    Serial s{};
    for (int i = 15; i >= 8; --i, n >>= 8)
        s[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(n);
    return s;
}

Certificate issue_ca_certificate(const crypto::KeyPair& key, std::string common_name, Serial serial,
                                 UnixSeconds not_before, UnixSeconds not_after)
{
    Certificate c;
    c.serial = serial;
    c.subject_common_name = std::move(common_name);
    c.not_before = not_before;
    c.not_after = not_after;
    c.public_key = key.public_key();
    c.is_ca = true;
    c.key_usage = static_cast<std::uint8_t>(KeyUsage::cert_sign) |
                  static_cast<std::uint8_t>(KeyUsage::digital_signature);
    sign_certificate(c, key);
    return c;
}

Certificate issue_tls_certificate(const Certificate& ca, const crypto::KeyPair& ca_key,
                                  const crypto::PublicKey& subject_key, std::vector<std::string> sans,
                                  Serial serial, UnixSeconds not_before, UnixSeconds not_after)
{
    Certificate c;
    c.serial = serial;
    c.subject_common_name = sans.empty() ? std::string{} : sans.front();
    c.subject_alternative_names = std::move(sans);
    c.issuer_id = cert_id(ca);
    c.not_before = not_before;
    c.not_after = not_after;
    c.public_key = subject_key;
    c.key_usage = static_cast<std::uint8_t>(KeyUsage::digital_signature);
    sign_certificate(c, ca_key);
    return c;
}

std::string write_certificate_fixture(const Certificate& cert)
{
    std::ostringstream out;
    out << "serial=" << to_hex(cert.serial) << '\n';
    out << "cn=" << cert.subject_common_name << '\n';
    for (const auto& san : cert.subject_alternative_names)
        out << "san=" << san << '\n';
    out << "issuer_id=" << cert.issuer_id.hex() << '\n';
    out << "not_before=" << cert.not_before << '\n';
    out << "not_after=" << cert.not_after << '\n';
    out << "public_key=" << cert.public_key.hex() << '\n';
    out << "is_ca=" << (cert.is_ca ? "true" : "false") << '\n';
    out << "key_usage=";
    const char* sep = "";
    if (cert.has_usage(KeyUsage::digital_signature)) {
        out << "digital_signature";
        sep = ",";
    }
    if (cert.has_usage(KeyUsage::cert_sign))
        out << sep << "cert_sign";
    out << '\n';
    out << "signature=" << cert.signature.hex() << '\n';
    return out.str();
}

namespace {

UnixSeconds parse_seconds(std::string_view v)
{
    UnixSeconds out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size())
        throw DecodeError("bad integer: " + std::string(v));
    return out;
}

std::uint8_t parse_usage(std::string_view v)
{
    std::uint8_t bits = 0;
    while (!v.empty()) {
        auto comma = v.find(',');
        auto item = v.substr(0, comma);
        if (item == "digital_signature")
            bits |= static_cast<std::uint8_t>(KeyUsage::digital_signature);
        else if (item == "cert_sign")
            bits |= static_cast<std::uint8_t>(KeyUsage::cert_sign);
        else if (!item.empty())
            throw DecodeError("unknown key usage: " + std::string(item));
        if (comma == std::string_view::npos)
            break;
        v.remove_prefix(comma + 1);
    }
    return bits;
}

}  // namespace

Certificate parse_certificate_fixture(std::string_view text)
{
    Certificate c;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty() || line[0] == '#')
            continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw DecodeError("fixture line without '=': " + line);
        std::string_view key(line.data(), eq);
        std::string_view value(line.data() + eq + 1, line.size() - eq - 1);
        if (key == "serial") {
            auto b = from_hex(value);
            if (b.size() != 16)
                throw DecodeError("serial must be 16 bytes");
            std::copy(b.begin(), b.end(), c.serial.begin());
        } else if (key == "cn") {
            c.subject_common_name = value;
        } else if (key == "san") {
            c.subject_alternative_names.emplace_back(value);
        } else if (key == "issuer_id") {
            c.issuer_id = hash_from_hex(value);
        } else if (key == "not_before") {
            c.not_before = parse_seconds(value);
        } else if (key == "not_after") {
            c.not_after = parse_seconds(value);
        } else if (key == "public_key") {
            c.public_key = crypto::PublicKey::from_span(from_hex(value));
        } else if (key == "is_ca") {
            if (value != "true" && value != "false")
                throw DecodeError("is_ca must be true or false");
            c.is_ca = value == "true";
        } else if (key == "key_usage") {
            c.key_usage = parse_usage(value);
        } else if (key == "signature") {
            c.signature = crypto::Signature::from_span(from_hex(value));
        } else {
            throw DecodeError("unknown fixture key: " + std::string(key));
        }
    }
    return c;
}

}  // namespace certledger
