#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace certledger {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

/// Fixed-size 32-byte value: digests, addresses, public keys.
struct Hash256 {
    std::array<std::uint8_t, 32> data{};

    static Hash256 zero() { return {}; }
    static Hash256 from_span(ByteView bytes);

    bool is_zero() const;
    std::string hex() const;
    ByteView view() const { return {data.data(), data.size()}; }

    auto operator<=>(const Hash256&) const = default;
    bool operator==(const Hash256&) const = default;
};

/// Thrown by ByteReader when the input is truncated or non-canonical.
class DecodeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string to_hex(ByteView bytes);
Bytes from_hex(std::string_view hex);
Hash256 hash_from_hex(std::string_view hex);

Bytes to_bytes(std::string_view s);

Hash256 sha256(ByteView bytes);
inline Hash256 sha256(std::string_view s)
{
    return sha256(ByteView{reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
}

/// Hash of a one-byte domain tag followed by the payload.
Hash256 tagged_hash(std::uint8_t tag, ByteView payload);

// Big-endian, length-prefixed writer. Every variable-length field is a u32
// length followed by the raw bytes.
class ByteWriter {
public:
    ByteWriter& u8(std::uint8_t v);
    ByteWriter& u16(std::uint16_t v);
    ByteWriter& u32(std::uint32_t v);
    ByteWriter& u64(std::uint64_t v);
    ByteWriter& raw(ByteView v);
    ByteWriter& hash(const Hash256& h) { return raw(h.view()); }
    ByteWriter& var(ByteView v);
    ByteWriter& str(std::string_view s);

    const Bytes& bytes() const& { return out_; }
    Bytes bytes() && { return std::move(out_); }

private:
    Bytes out_;
};

class ByteReader {
public:
    explicit ByteReader(ByteView in) : in_(in) {}

    std::uint8_t u8();
    std::uint16_t u16();
    std::uint32_t u32();
    std::uint64_t u64();
    ByteView raw(std::size_t n);
    Hash256 hash();
    Bytes var();
    std::string str();
    bool boolean();

    std::size_t remaining() const { return in_.size() - pos_; }
    bool done() const { return remaining() == 0; }
    /// Throws unless every input byte was consumed.
    void expect_done() const;

private:
    ByteView in_;
    std::size_t pos_ = 0;
};

}  // namespace certledger

template <>
struct std::hash<certledger::Hash256> {
    std::size_t operator()(const certledger::Hash256& h) const noexcept
    {
        std::size_t v = 0;
        for (int i = 0; i < 8; ++i)
            v = (v << 8) | h.data[i];
        return v;
    }
};
