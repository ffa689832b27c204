#pragma once

#include "certledger/bytes.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace certledger {

/*
 * Hexary Merkle Patricia trie over 32-byte keys.
 *
 * Keys are walked as 64 nibbles, high nibble first. Node hash is SHA-256
 * of the canonical node encoding; children are always referenced by hash
 * (no inlining). The empty trie's root is SHA-256 of the empty string.
 *
 * Node encodings ("path" = u8 nibble count, then the nibbles packed two per
 * byte high-first, odd counts padded with a zero low nibble):
 *
 *   leaf       0x00 | path | u32 value length | value
 *   extension  0x01 | path (>= 1 nibble) | 32-byte child hash
 *   branch     0x02 | u16 child bitmap (bit i set = child at nibble i)
 *                   | 32-byte hash per set bit, ascending nibble order
 *
 * Keys have fixed length, so no key is a prefix of another and branches
 * never carry a value. A canonical branch has at least two children.
 */
class StateTrie {
public:
    struct Node;
    using NodePtr = std::shared_ptr<const Node>;

    StateTrie() = default;

    static Hash256 empty_root();

    Hash256 root_hash() const;
    std::size_t size() const { return size_; }
    bool empty() const { return size_ == 0; }

    /// Returns a new version; this one is untouched and shares structure.
    /// Throws std::invalid_argument on an empty value.
    StateTrie insert(const Hash256& key, Bytes value) const;
    std::optional<Bytes> get(const Hash256& key) const;

    struct Proof;
    Proof prove(const Hash256& key) const;

    /// Visits every key/value in ascending key order.
    void for_each(const std::function<void(const Hash256&, const Bytes&)>& fn) const;

    /// Content-addressed snapshot of every reachable node: digest -> encoding.
    std::map<Hash256, Bytes> export_nodes() const;

private:
    NodePtr root_;
    std::size_t size_ = 0;
};

// Node path from the root to the terminal node for `key`. For an absent key
// the terminal node is the one where the key's nibble path diverges (a leaf
// with another path, an extension with another prefix, or a branch with an
// empty slot), so absence is provable.
struct StateTrie::Proof {
    Hash256 key;
    std::optional<Bytes> value;
    std::vector<Bytes> path_nodes;

    /*
     * Self-contained blob:
     *   u8 version (0x01) | 32 key | u8 has_value | [u32 len | value]
     *   | u32 node count | per node: u32 len | encoding
     */
    Bytes serialize() const;
    static Proof deserialize(ByteView blob);

    bool operator==(const Proof&) const = default;
};

using MerkleProof = StateTrie::Proof;

struct ProofCheck {
    enum class Status { Verified, Rejected };

    Status status = Status::Rejected;
    std::optional<Bytes> value;  // set on Verified inclusion, empty on Verified absence
    std::string reason;          // why it was rejected

    bool verified() const { return status == Status::Verified; }
};

/// Stateless: needs only the expected root.
ProofCheck verify_proof(const Hash256& root, const Hash256& key, const MerkleProof& proof);

}  // namespace certledger
