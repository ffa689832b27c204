#pragma once

#include "certledger/contracts.hpp"

#include <map>
#include <string>
#include <vector>

namespace certledger {

/*
 * Canonical header encoding, 144 bytes, big-endian:
 *
 *   offset  size  field
 *   0       8     number
 *   8       32    parent_hash (all-zero for genesis)
 *   40      32    tx_root
 *   72      32    state_root
 *   104     8     timestamp (unix seconds, i64 as u64)
 *   112     32    proposer_id (authority public key; zero for genesis)
 *
 * Header hash is SHA-256 of these bytes.
 */
struct BlockHeader {
    std::uint64_t number = 0;
    Hash256 parent_hash;
    Hash256 tx_root;
    Hash256 state_root;
    UnixSeconds timestamp = 0;
    Hash256 proposer_id;

    Hash256 hash() const;
    bool operator==(const BlockHeader&) const = default;
};

constexpr std::size_t header_size = 144;

Bytes encode_header(const BlockHeader& h);
BlockHeader decode_header(ByteView b);

// Block encoding: header | u32 tx count | (u32 len | tx)* | 64 proposer signature.
// The proposer signs the header hash; the signature sits outside the header so
// light clients never need it.
struct Block {
    BlockHeader header;
    std::vector<Transaction> transactions;
    crypto::Signature proposer_signature;

    bool operator==(const Block&) const = default;
};

Bytes encode_block(const Block& b);
Block decode_block(ByteView bytes);

/// Binary Merkle root over canonical tx encodings. Leaves are
/// SHA-256(0x00 | tx), inner nodes SHA-256(0x01 | left | right), split at the
/// largest power of two below n. Empty list: SHA-256 of the empty string.
Hash256 tx_root(const std::vector<Transaction>& txs);

enum class LedgerError {
    BadSignature,
    StaleNonce,
    DuplicateInPool,
    NotYourTurn,
    BadLinkage,
    RootMismatch,
    BadProposer,
    NonMonotoneTimestamp,
    InvalidTransaction,
};

const char* to_string(LedgerError e);

/// Round-robin schedule: height h (h >= 1) belongs to authorities[(h - 1) % n].
const crypto::PublicKey& scheduled_proposer(const std::vector<crypto::PublicKey>& authorities,
                                            std::uint64_t height);

class TxPool {
public:
    /// Admits tx iff its sender signature verifies, its nonce is not below the
    /// sender's account nonce and it is not already pooled.
    Expected<Hash256, LedgerError> submit(const WorldState& state, const Transaction& tx);

    std::size_t size() const { return txs_.size(); }
    bool contains(const Hash256& id) const { return txs_.contains(id); }
    void remove(const Hash256& id) { txs_.erase(id); }

    /// Pooled transactions sorted by (sender address, nonce, tx id).
    std::vector<Transaction> ordered() const;

private:
    std::map<Hash256, Transaction> txs_;
};

struct SkippedTx {
    Hash256 tx_id;
    TxError reason;
};

struct BlockOutcome {
    Block block;
    WorldState state;
    std::vector<Event> events;  // block-numbered and indexed in order
    std::vector<SkippedTx> skipped;
};

/// Applies the pool in deterministic order, skipping invalid transactions.
Expected<BlockOutcome, LedgerError> produce_block(const WorldState& state, const TxPool& pool,
                                                  const BlockHeader& parent, const crypto::KeyPair& proposer,
                                                  const std::vector<crypto::PublicKey>& authorities,
                                                  UnixSeconds now);

/// Full replay. Checks run in order: linkage, proposer, timestamp, tx_root,
/// each transaction, state_root.
Expected<BlockOutcome, LedgerError> validate_and_apply_block(const WorldState& state, const Block& block,
                                                             const BlockHeader& parent,
                                                             const std::vector<crypto::PublicKey>& authorities);

struct ChainConfig {
    GenesisParams genesis;
    std::vector<crypto::PublicKey> authorities;
    UnixSeconds genesis_time = 0;
    UnixSeconds block_time = 600;
};

/*
 * JSON form:
 *   {
 *     "board": {"threshold": 2, "keys": ["<hex>", ...]},
 *     "foundation_key": "<hex>", "board_account_key": "<hex>",
 *     "total_supply": 1000000,
 *     "fees": {"AddTrustedCA": 1, ...},          (missing kinds keep defaults)
 *     "initial_cas": ["<hex certificate encoding>", ...],
 *     "authorities": ["<hex>", ...],
 *     "genesis_time": 1700000000, "block_time": 600
 *   }
 */
std::string chain_config_to_json(const ChainConfig& c);
ChainConfig chain_config_from_json(std::string_view text);

BlockHeader genesis_header(const ChainConfig& c, const WorldState& genesis_state);

// A full node: every block, the state after each height, the event log and
// the transaction pool.
class FullNode {
public:
    explicit FullNode(ChainConfig config);

    const ChainConfig& config() const { return config_; }
    std::uint64_t height() const { return blocks_.size() - 1; }
    const BlockHeader& tip() const { return blocks_.back().header; }
    const WorldState& state() const { return states_.back(); }
    const WorldState& state_at(std::uint64_t height) const { return states_.at(height); }
    const Block& block(std::uint64_t height) const { return blocks_.at(height); }
    const std::vector<Block>& blocks() const { return blocks_; }
    const std::vector<Event>& events() const { return events_; }
    TxPool& pool() { return pool_; }
    const TxPool& pool() const { return pool_; }

    Expected<Hash256, LedgerError> submit(const Transaction& tx) { return pool_.submit(state(), tx); }

    /// Produces the next block from the pool, appends it and prunes the pool.
    /// Defaults the timestamp to tip + block_time.
    Expected<BlockOutcome, LedgerError> produce(const crypto::KeyPair& proposer,
                                                std::optional<UnixSeconds> now = std::nullopt);

    /// Validates a block received from elsewhere and appends it.
    Expected<BlockOutcome, LedgerError> append(const Block& block);

    std::vector<BlockHeader> header_chain() const;

    /// u32 length-prefixed encoded blocks, genesis first.
    Bytes export_chain() const;
    /// Rebuilds a node by replaying every exported block. Throws
    /// std::runtime_error (or DecodeError) when any block fails.
    static FullNode import_chain(ChainConfig config, ByteView bytes);

private:
    void commit(const BlockOutcome& out);

    ChainConfig config_;
    std::vector<Block> blocks_;
    std::vector<WorldState> states_;
    std::vector<Event> events_;
    TxPool pool_;
};

}  // namespace certledger
