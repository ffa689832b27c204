#pragma once

#include "certledger/ledger.hpp"

#include "world_fixture.hpp"

namespace certledger::testing {

// A FullNode on top of the same PKI as World, with three round-robin
// authorities and 600 s blocks.
struct Chain {
    World w{2, 3, false};  // supplies keys and certificates only
    std::vector<crypto::KeyPair> authorities;
    FullNode node;

    // Block 1 funds both CAs and the owner.
    Chain() : authorities(make_authorities()), node(config(w, authorities))
    {
        for (std::uint64_t i = 0; i < 3; ++i) {
            const auto& to = i == 0 ? w.ca_key : i == 1 ? w.ca2_key : w.owner;
            submit(tx(w.foundation, TxKind::TransferToken, TransferPayload{account_address(to.public_key()), 1000}, i));
        }
        produce();
    }

    static std::vector<crypto::KeyPair> make_authorities()
    {
        std::vector<crypto::KeyPair> out;
        for (int i = 0; i < 3; ++i)
            out.push_back(crypto::KeyPair::from_label("authority-" + std::to_string(i)));
        return out;
    }

    static ChainConfig config(const World& w, const std::vector<crypto::KeyPair>& auth)
    {
        ChainConfig c;
        c.genesis = w.params(2);
        c.genesis.initial_cas = {w.ca, w.ca2};
        for (const auto& a : auth)
            c.authorities.push_back(a.public_key());
        c.genesis_time = t0 - 600;
        return c;
    }

    const crypto::KeyPair& next_proposer() const
    {
        return authorities[node.height() % authorities.size()];
    }

    template <class P>
    Transaction tx(const crypto::KeyPair& sender, TxKind kind, const P& payload, std::uint64_t nonce_offset = 0) const
    {
        auto n = node.state().account(account_address(sender.public_key())).nonce + nonce_offset;
        return make_transaction(sender, n, kind, payload);
    }

    BlockOutcome produce()
    {
        auto r = node.produce(next_proposer());
        if (!r)
            throw std::runtime_error(std::string("produce failed: ") + to_string(r.error()));
        return *r;
    }

    void submit(const Transaction& t)
    {
        auto r = node.submit(t);
        if (!r)
            throw std::runtime_error(std::string("submit failed: ") + to_string(r.error()));
    }

    /// Funds an account from the foundation in its own block.
    void fund(const crypto::PublicKey& to, std::uint64_t amount)
    {
        submit(tx(w.foundation, TxKind::TransferToken, TransferPayload{account_address(to), amount}));
        produce();
    }
};

}  // namespace certledger::testing
