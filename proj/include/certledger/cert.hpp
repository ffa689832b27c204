#pragma once

#include "certledger/bytes.hpp"
#include "certledger/crypto.hpp"
#include "certledger/expected.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace certledger {

using UnixSeconds = std::int64_t;

constexpr UnixSeconds seconds_per_day = 86'400;
/// Upper bound on a TLS leaf certificate's lifetime.
constexpr UnixSeconds max_tls_lifetime = 825 * seconds_per_day;

enum class KeyUsage : std::uint8_t {
    digital_signature = 0x01,
    cert_sign = 0x02,
};

using CertId = Hash256;

/*
 * Canonical certificate encoding. Every integer is big-endian; "str" is a
 * u32 byte length followed by UTF-8 bytes.
 *
 *   offset  size   field
 *   0       1      format version (0x01)
 *   1       16     serial
 *   17      4+L    subject_common_name (str)
 *   ..      4      SAN count N
 *   ..      N x str subject_alternative_names, in order
 *   ..      32     issuer_id (all-zero for self-signed roots)
 *   ..      8      validity_not_before (i64 as u64)
 *   ..      8      validity_not_after
 *   ..      32     public_key
 *   ..      1      is_ca (0 or 1)
 *   ..      1      key_usage bits (0x01 digital_signature, 0x02 cert_sign)
 *   ..      64     signature over all preceding bytes
 *
 * Decoding rejects unknown versions, unknown key-usage bits, non-0/1
 * booleans and trailing bytes, so decode(encode(c)) and encode(decode(b))
 * are both identities.
 */
struct Certificate {
    std::array<std::uint8_t, 16> serial{};
    std::string subject_common_name;
    std::vector<std::string> subject_alternative_names;
    Hash256 issuer_id;
    UnixSeconds not_before = 0;
    UnixSeconds not_after = 0;
    crypto::PublicKey public_key;
    bool is_ca = false;
    std::uint8_t key_usage = 0;
    crypto::Signature signature;

    bool has_usage(KeyUsage u) const { return (key_usage & static_cast<std::uint8_t>(u)) != 0; }
    bool covers(std::string_view dns_name) const;

    bool operator==(const Certificate&) const = default;
};

Bytes encode_certificate(const Certificate& cert);
Certificate decode_certificate(ByteView bytes);
void encode_certificate_into(ByteWriter& w, const Certificate& cert);
Certificate decode_certificate_from(ByteReader& r);

/// Bytes covered by the issuer signature (encoding minus the signature).
Bytes to_be_signed(const Certificate& cert);
CertId cert_id(const Certificate& cert);

void sign_certificate(Certificate& cert, const crypto::KeyPair& issuer);
bool verify_signature(const Certificate& cert, const crypto::PublicKey& issuer_key);

enum class Verdict {
    Valid,
    Expired,
    NotYetValid,
    ProfileViolation,
    UnknownIssuer,
    BadSignature,
};

const char* to_string(Verdict v);

struct ValidationOutcome {
    Verdict verdict = Verdict::Valid;
    std::string detail;

    bool ok() const { return verdict == Verdict::Valid; }
    static ValidationOutcome valid() { return {}; }
};

// Checks run in a fixed order (validity period, then profile, then
// lifetime) and the first failure is reported.
ValidationOutcome validate_tls_profile(const Certificate& cert, UnixSeconds now);
ValidationOutcome validate_ca_profile(const Certificate& cert, UnixSeconds now);

/// Single-level path: leaf -> trusted root. Returns the issuing trusted CA.
Expected<Certificate, ValidationOutcome> build_trusted_path(const Certificate& cert,
                                                            std::span<const Certificate> trusted);

// Issuance helpers used by the simulator, the CLI and tests.
using Serial = std::array<std::uint8_t, 16>;
Serial serial_from_number(std::uint64_t n);

/// Self-signed root: issuer_id all-zero, usage {cert_sign, digital_signature}.
Certificate issue_ca_certificate(const crypto::KeyPair& key, std::string common_name, Serial serial,
                                 UnixSeconds not_before, UnixSeconds not_after);

Certificate issue_tls_certificate(const Certificate& ca, const crypto::KeyPair& ca_key,
                                  const crypto::PublicKey& subject_key, std::vector<std::string> sans,
                                  Serial serial, UnixSeconds not_before, UnixSeconds not_after);

/*
 * Text fixture format, one `key=value` per line, `#` starts a comment:
 *
 *   serial=<32 hex>
 *   cn=<common name>
 *   san=<dns name>            (repeatable, order preserved)
 *   issuer_id=<64 hex>
 *   not_before=<unix seconds>
 *   not_after=<unix seconds>
 *   public_key=<64 hex>
 *   is_ca=true|false
 *   key_usage=digital_signature,cert_sign
 *   signature=<128 hex>
 */
std::string write_certificate_fixture(const Certificate& cert);
Certificate parse_certificate_fixture(std::string_view text);

}  // namespace certledger
