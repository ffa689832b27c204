#include "certledger/bytes.hpp"

#include <sodium.h>

#include <algorithm>

namespace certledger {

Hash256 Hash256::from_span(ByteView bytes)
{
    if (bytes.size() != 32)
        throw DecodeError("expected 32 bytes, got " + std::to_string(bytes.size()));
    Hash256 h;
    std::copy(bytes.begin(), bytes.end(), h.data.begin());
    return h;
}

bool Hash256::is_zero() const
{
    return std::all_of(data.begin(), data.end(), [](auto b) { return b == 0; });
}

std::string Hash256::hex() const { return to_hex(view()); }

std::string to_hex(ByteView bytes)
{
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (auto b : bytes) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0xf]);
    }
    return out;
}

namespace {

int hex_value(char c)
{
    if (c >= '0' && c <= '9')
        return c - '0';
    if (c >= 'a' && c <= 'f')
        return c - 'a' + 10;
    if (c >= 'A' && c <= 'F')
        return c - 'A' + 10;
    return -1;
}

}  // namespace

Bytes from_hex(std::string_view hex)
{
    if (hex.size() % 2 != 0)
        throw DecodeError("odd-length hex string");
    Bytes out;
    out.reserve(hex.size() / 2);
    for (std::size_t i = 0; i < hex.size(); i += 2) {
        int hi = hex_value(hex[i]);
        int lo = hex_value(hex[i + 1]);
        if (hi < 0 || lo < 0)
            throw DecodeError("invalid hex digit");
        out.push_back(static_cast<std::uint8_t>((hi << 4) | lo));
    }
    return out;
}

Hash256 hash_from_hex(std::string_view hex)
{
    return Hash256::from_span(from_hex(hex));
}

Bytes to_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }

Hash256 sha256(ByteView bytes)
{
    Hash256 h;
    crypto_hash_sha256(h.data.data(), bytes.data(), bytes.size());
    return h;
}

Hash256 tagged_hash(std::uint8_t tag, ByteView payload)
{
    crypto_hash_sha256_state st;
    crypto_hash_sha256_init(&st);
    crypto_hash_sha256_update(&st, &tag, 1);
    crypto_hash_sha256_update(&st, payload.data(), payload.size());
    Hash256 h;
    crypto_hash_sha256_final(&st, h.data.data());
    return h;
}

ByteWriter& ByteWriter::u8(std::uint8_t v)
{
    out_.push_back(v);
    return *this;
}

ByteWriter& ByteWriter::u16(std::uint16_t v)
{
    out_.push_back(static_cast<std::uint8_t>(v >> 8));
    out_.push_back(static_cast<std::uint8_t>(v));
    return *this;
}

ByteWriter& ByteWriter::u32(std::uint32_t v)
{
    for (int shift = 24; shift >= 0; shift -= 8)
        out_.push_back(static_cast<std::uint8_t>(v >> shift));
    return *this;
}

ByteWriter& ByteWriter::u64(std::uint64_t v)
{
    for (int shift = 56; shift >= 0; shift -= 8)
        out_.push_back(static_cast<std::uint8_t>(v >> shift));
    return *this;
}

ByteWriter& ByteWriter::raw(ByteView v)
{
    out_.insert(out_.end(), v.begin(), v.end());
    return *this;
}

ByteWriter& ByteWriter::var(ByteView v)
{
    u32(static_cast<std::uint32_t>(v.size()));
    return raw(v);
}

ByteWriter& ByteWriter::str(std::string_view s)
{
    return var(ByteView{reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
}

std::uint8_t ByteReader::u8() { return raw(1)[0]; }

std::uint16_t ByteReader::u16()
{
    auto b = raw(2);
    return static_cast<std::uint16_t>((b[0] << 8) | b[1]);
}

std::uint32_t ByteReader::u32()
{
    auto b = raw(4);
    std::uint32_t v = 0;
    for (auto x : b)
        v = (v << 8) | x;
    return v;
}

std::uint64_t ByteReader::u64()
{
    auto b = raw(8);
    std::uint64_t v = 0;
    for (auto x : b)
        v = (v << 8) | x;
    return v;
}

ByteView ByteReader::raw(std::size_t n)
{
    if (n > remaining())
        throw DecodeError("truncated input");
    auto out = in_.subspan(pos_, n);
    pos_ += n;
    return out;
}

Hash256 ByteReader::hash() { return Hash256::from_span(raw(32)); }

Bytes ByteReader::var()
{
    auto n = u32();
    auto b = raw(n);
    return Bytes(b.begin(), b.end());
}

std::string ByteReader::str()
{
    auto n = u32();
    auto b = raw(n);
    return std::string(b.begin(), b.end());
}

bool ByteReader::boolean()
{
    auto v = u8();
    if (v > 1)
        throw DecodeError("non-canonical boolean");
    return v == 1;
}

void ByteReader::expect_done() const
{
    if (!done())
        throw DecodeError("trailing bytes");
}

}  // namespace certledger
