#include "certledger/ledger.hpp"

#include <json.hpp>

#include <algorithm>
#include <stdexcept>
#include <tuple>

namespace certledger {

namespace {

Hash256 key_id(const crypto::PublicKey& k) { return Hash256::from_span(k.view()); }

Hash256 merkle_root(std::span<const Hash256> leaves)
{
    if (leaves.size() == 1)
        return leaves[0];
    std::size_t split = 1;
    while (split * 2 < leaves.size())
        split *= 2;
    ByteWriter w;
    w.u8(0x01);
    w.hash(merkle_root(leaves.first(split)));
    w.hash(merkle_root(leaves.subspan(split)));
    return sha256(w.bytes());
}

}  // namespace

Hash256 BlockHeader::hash() const { return sha256(encode_header(*this)); }

Bytes encode_header(const BlockHeader& h)
{
    ByteWriter w;
    w.u64(h.number);
    w.hash(h.parent_hash);
    w.hash(h.tx_root);
    w.hash(h.state_root);
    w.u64(static_cast<std::uint64_t>(h.timestamp));
    w.hash(h.proposer_id);
    return std::move(w).bytes();
}

namespace {

BlockHeader read_header(ByteReader& r)
{
    BlockHeader h;
    h.number = r.u64();
    h.parent_hash = r.hash();
    h.tx_root = r.hash();
    h.state_root = r.hash();
    h.timestamp = static_cast<UnixSeconds>(r.u64());
    h.proposer_id = r.hash();
    return h;
}

}  // namespace

BlockHeader decode_header(ByteView b)
{
    ByteReader r(b);
    auto h = read_header(r);
    r.expect_done();
    return h;
}

Bytes encode_block(const Block& b)
{
    ByteWriter w;
    w.raw(encode_header(b.header));
    w.u32(static_cast<std::uint32_t>(b.transactions.size()));
    for (const auto& tx : b.transactions)
        w.var(encode_transaction(tx));
    w.raw(b.proposer_signature.view());
    return std::move(w).bytes();
}

Block decode_block(ByteView bytes)
{
    ByteReader r(bytes);
    Block b;
    b.header = read_header(r);
    auto n = r.u32();
    if (n > r.remaining() / 4)
        throw DecodeError("transaction count exceeds input");
    for (std::uint32_t i = 0; i < n; ++i)
        b.transactions.push_back(decode_transaction(r.var()));
    b.proposer_signature = crypto::Signature::from_span(r.raw(64));
    r.expect_done();
    return b;
}

Hash256 tx_root(const std::vector<Transaction>& txs)
{
    if (txs.empty())
        return sha256(ByteView{});
    std::vector<Hash256> leaves;
    leaves.reserve(txs.size());
    for (const auto& tx : txs) {
        ByteWriter w;
        w.u8(0x00);
        w.raw(encode_transaction(tx));
        leaves.push_back(sha256(w.bytes()));
    }
    return merkle_root(leaves);
}

const char* to_string(LedgerError e)
{
    switch (e) {
    case LedgerError::BadSignature: return "BadSignature";
    case LedgerError::StaleNonce: return "StaleNonce";
    case LedgerError::DuplicateInPool: return "DuplicateInPool";
    case LedgerError::NotYourTurn: return "NotYourTurn";
    case LedgerError::BadLinkage: return "BadLinkage";
    case LedgerError::RootMismatch: return "RootMismatch";
    case LedgerError::BadProposer: return "BadProposer";
    case LedgerError::NonMonotoneTimestamp: return "NonMonotoneTimestamp";
    case LedgerError::InvalidTransaction: return "InvalidTransaction";
    }
    return "?";
}

const crypto::PublicKey& scheduled_proposer(const std::vector<crypto::PublicKey>& authorities, std::uint64_t height)
{
    if (authorities.empty() || height == 0)
        throw std::invalid_argument("no proposer for this height");
    return authorities[(height - 1) % authorities.size()];
}

Expected<Hash256, LedgerError> TxPool::submit(const WorldState& state, const Transaction& tx)
{
    if (!crypto::verify(tx.sender_key, tx.digest(), tx.sender_signature))
        return fail(LedgerError::BadSignature);
    if (tx.nonce < state.account(tx.sender()).nonce)
        return fail(LedgerError::StaleNonce);
    auto id = tx.id();
    if (!txs_.emplace(id, tx).second)
        return fail(LedgerError::DuplicateInPool);
    return id;
}

std::vector<Transaction> TxPool::ordered() const
{
    std::vector<std::pair<Hash256, const Transaction*>> v;
    v.reserve(txs_.size());
    for (const auto& [id, tx] : txs_)
        v.emplace_back(id, &tx);
    std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
        return std::tuple(a.second->sender(), a.second->nonce, a.first) <
               std::tuple(b.second->sender(), b.second->nonce, b.first);
    });
    std::vector<Transaction> out;
    out.reserve(v.size());
    for (const auto& [id, tx] : v)
        out.push_back(*tx);
    return out;
}

namespace {

void number_events(std::vector<Event>& events, std::uint64_t height)
{
    for (std::size_t i = 0; i < events.size(); ++i) {
        events[i].block_number = height;
        events[i].index = static_cast<std::uint32_t>(i);
    }
}

}  // namespace

Expected<BlockOutcome, LedgerError> produce_block(const WorldState& state, const TxPool& pool,
                                                  const BlockHeader& parent, const crypto::KeyPair& proposer,
                                                  const std::vector<crypto::PublicKey>& authorities,
                                                  UnixSeconds now)
{
    const auto height = parent.number + 1;
    if (scheduled_proposer(authorities, height) != proposer.public_key())
        return fail(LedgerError::NotYourTurn);
    if (now <= parent.timestamp)
        return fail(LedgerError::NonMonotoneTimestamp);

    BlockOutcome out{{}, state, {}, {}};
    ExecContext ctx{height, now};
    for (auto& tx : pool.ordered()) {
        auto r = apply_transaction(out.state, tx, ctx);
        if (!r) {
            out.skipped.push_back({tx.id(), r.error()});
            continue;
        }
        out.state = std::move(r->state);
        out.events.insert(out.events.end(), r->events.begin(), r->events.end());
        out.block.transactions.push_back(std::move(tx));
    }
    number_events(out.events, height);

    auto& h = out.block.header;
    h.number = height;
    h.parent_hash = parent.hash();
    h.tx_root = tx_root(out.block.transactions);
    h.state_root = out.state.root();
    h.timestamp = now;
    h.proposer_id = key_id(proposer.public_key());
    out.block.proposer_signature = proposer.sign(h.hash());
    return out;
}

Expected<BlockOutcome, LedgerError> validate_and_apply_block(const WorldState& state, const Block& block,
                                                             const BlockHeader& parent,
                                                             const std::vector<crypto::PublicKey>& authorities)
{
    const auto& h = block.header;
    if (h.number != parent.number + 1 || h.parent_hash != parent.hash())
        return fail(LedgerError::BadLinkage);
    const auto& expected = scheduled_proposer(authorities, h.number);
    if (h.proposer_id != key_id(expected) || !crypto::verify(expected, h.hash(), block.proposer_signature))
        return fail(LedgerError::BadProposer);
    if (h.timestamp <= parent.timestamp)
        return fail(LedgerError::NonMonotoneTimestamp);
    if (h.tx_root != tx_root(block.transactions))
        return fail(LedgerError::RootMismatch);

    BlockOutcome out{block, state, {}, {}};
    ExecContext ctx{h.number, h.timestamp};
    for (const auto& tx : block.transactions) {
        auto r = apply_transaction(out.state, tx, ctx);
        if (!r)
            return fail(LedgerError::InvalidTransaction);
        out.state = std::move(r->state);
        out.events.insert(out.events.end(), r->events.begin(), r->events.end());
    }
    if (out.state.root() != h.state_root)
        return fail(LedgerError::RootMismatch);
    number_events(out.events, h.number);
    return out;
}

namespace {

using nlohmann::json;

crypto::PublicKey key_from_hex(const json& j)
{
    return crypto::PublicKey::from_span(from_hex(j.get<std::string>()));
}

}  // namespace

std::string chain_config_to_json(const ChainConfig& c)
{
    json j;
    json keys = json::array();
    for (const auto& k : c.genesis.board_keys)
        keys.push_back(k.hex());
    j["board"] = {{"threshold", c.genesis.threshold}, {"keys", keys}};
    j["foundation_key"] = c.genesis.foundation_key.hex();
    j["board_account_key"] = c.genesis.board_account_key.hex();
    j["total_supply"] = c.genesis.total_supply;
    json fees = json::object();
    for (const auto& [kind, amount] : c.genesis.fee_schedule)
        fees[to_string(kind)] = amount;
    j["fees"] = fees;
    json cas = json::array();
    for (const auto& ca : c.genesis.initial_cas)
        cas.push_back(to_hex(encode_certificate(ca)));
    j["initial_cas"] = cas;
    json auth = json::array();
    for (const auto& k : c.authorities)
        auth.push_back(k.hex());
    j["authorities"] = auth;
    j["genesis_time"] = c.genesis_time;
    j["block_time"] = c.block_time;
    return j.dump(2) + "\n";
}

ChainConfig chain_config_from_json(std::string_view text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("genesis config: ") + e.what());
    }
    try {
        ChainConfig c;
        const auto& board = j.at("board");
        c.genesis.threshold = board.at("threshold").get<std::uint32_t>();
        for (const auto& k : board.at("keys"))
            c.genesis.board_keys.push_back(key_from_hex(k));
        c.genesis.foundation_key = key_from_hex(j.at("foundation_key"));
        c.genesis.board_account_key = key_from_hex(j.at("board_account_key"));
        c.genesis.total_supply = j.at("total_supply").get<std::uint64_t>();
        if (j.contains("fees")) {
            for (const auto& [name, amount] : j["fees"].items()) {
                auto kind = tx_kind_from_string(name);
                if (!kind)
                    throw std::invalid_argument("genesis config: unknown transaction kind " + name);
                c.genesis.fee_schedule[*kind] = amount.get<std::uint64_t>();
            }
        }
        if (j.contains("initial_cas"))
            for (const auto& ca : j["initial_cas"])
                c.genesis.initial_cas.push_back(decode_certificate(from_hex(ca.get<std::string>())));
        for (const auto& k : j.at("authorities"))
            c.authorities.push_back(key_from_hex(k));
        c.genesis_time = j.at("genesis_time").get<UnixSeconds>();
        c.block_time = j.value("block_time", UnixSeconds{600});
        if (c.authorities.empty())
            throw std::invalid_argument("genesis config: no authorities");
        if (c.block_time <= 0)
            throw std::invalid_argument("genesis config: block_time must be positive");
        return c;
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("genesis config: ") + e.what());
    } catch (const DecodeError& e) {
        throw std::invalid_argument(std::string("genesis config: ") + e.what());
    }
}

BlockHeader genesis_header(const ChainConfig& c, const WorldState& genesis_state)
{
    BlockHeader h;
    h.tx_root = tx_root({});
    h.state_root = genesis_state.root();
    h.timestamp = c.genesis_time;
    return h;
}

FullNode::FullNode(ChainConfig config) : config_(std::move(config))
{
    if (config_.authorities.empty())
        throw std::invalid_argument("chain needs at least one authority");
    auto g = WorldState::genesis(config_.genesis);
    Block b;
    b.header = genesis_header(config_, g);
    blocks_.push_back(std::move(b));
    states_.push_back(std::move(g));
}

void FullNode::commit(const BlockOutcome& out)
{
    blocks_.push_back(out.block);
    states_.push_back(out.state);
    events_.insert(events_.end(), out.events.begin(), out.events.end());
    for (const auto& tx : out.block.transactions)
        pool_.remove(tx.id());
}

Expected<BlockOutcome, LedgerError> FullNode::produce(const crypto::KeyPair& proposer, std::optional<UnixSeconds> now)
{
    auto r = produce_block(state(), pool_, tip(), proposer, config_.authorities,
                           now.value_or(tip().timestamp + config_.block_time));
    if (!r)
        return r;
    commit(*r);
    // Transactions that can never succeed are dropped; a future nonce may
    // still become valid once the gap is filled.
    for (const auto& s : r->skipped)
        if (s.reason != TxError::FutureNonce)
            pool_.remove(s.tx_id);
    return r;
}

Expected<BlockOutcome, LedgerError> FullNode::append(const Block& block)
{
    auto r = validate_and_apply_block(state(), block, tip(), config_.authorities);
    if (r)
        commit(*r);
    return r;
}

std::vector<BlockHeader> FullNode::header_chain() const
{
    std::vector<BlockHeader> out;
    out.reserve(blocks_.size());
    for (const auto& b : blocks_)
        out.push_back(b.header);
    return out;
}

Bytes FullNode::export_chain() const
{
    ByteWriter w;
    for (const auto& b : blocks_)
        w.var(encode_block(b));
    return std::move(w).bytes();
}

FullNode FullNode::import_chain(ChainConfig config, ByteView bytes)
{
    FullNode node(std::move(config));
    ByteReader r(bytes);
    if (r.done())
        throw std::runtime_error("chain file is empty");
    auto genesis = decode_block(r.var());
    if (genesis != node.block(0))
        throw std::runtime_error("chain file does not start with this config's genesis block");
    while (!r.done()) {
        auto b = decode_block(r.var());
        auto n = b.header.number;
        auto applied = node.append(b);
        if (!applied)
            throw std::runtime_error("block " + std::to_string(n) + " rejected: " + to_string(applied.error()));
    }
    return node;
}

}  // namespace certledger
