#pragma once

#include "world_fixture.hpp"

#include <map>
#include <random>

namespace certledger::testing {

// Random mixture of valid and invalid transactions over a small population.
struct Fuzzer {
    World w;
    std::mt19937_64 rng;
    std::vector<crypto::KeyPair> people;
    std::vector<crypto::KeyPair> site_keys;
    std::vector<CertId> certs;
    std::map<CertId, std::size_t> cert_key;  // index into site_keys
    std::vector<std::string> domains{"a.com", "b.com", "c.com", "d.com"};

    explicit Fuzzer(std::uint64_t seed) : rng(seed)
    {
        for (int i = 0; i < 4; ++i) {
            people.push_back(crypto::KeyPair::from_label("person-" + std::to_string(i)));
            w.fund(people.back().public_key(), 20);
        }
        for (int i = 0; i < 3; ++i)
            site_keys.push_back(crypto::KeyPair::from_label("site-" + std::to_string(i)));
    }

    std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }

    const crypto::KeyPair& someone()
    {
        return people[pick(people.size())];
    }

    Transaction next()
    {
        auto& sender = someone();
        switch (pick(7)) {
        case 0: {
            auto to = account_address(someone().public_key());
            return w.tx(sender, TxKind::TransferToken, TransferPayload{to, pick(30)});
        }
        case 1: {
            auto k = pick(site_keys.size());
            auto c = w.leaf(domains[pick(domains.size())], site_keys[k], pick(2) == 1);
            cert_key[cert_id(c)] = k;
            return w.tx(sender, TxKind::AddTLSCert, AddTLSCertPayload{c});
        }
        case 2: {
            if (certs.empty())
                return w.tx(sender, TxKind::TransferToken, TransferPayload{Address{}, 0});
            auto id = certs[pick(certs.size())];
            const auto& signer = pick(3) == 0 ? w.stranger : site_keys[cert_key[id]];
            return w.tx(sender, TxKind::RevokeCert, RevokeCertPayload{id, signer.sign(revocation_message(id))});
        }
        case 3: {
            // stale or future nonce
            auto n = w.nonce_of(sender);
            return make_transaction(sender, pick(2) ? n + 1 + pick(3) : (n == 0 ? 7 : n - 1), TxKind::TransferToken,
                                    TransferPayload{Address{}, 1});
        }
        case 4: {
            auto t = w.tx(sender, TxKind::TransferToken, TransferPayload{Address{}, 1});
            t.sender_signature = w.stranger.sign(t.digest());
            return t;
        }
        case 5: {
            const auto& ca = pick(2) ? w.ca : w.ca2;
            auto t = w.governed(TxKind::UntrustCA, UntrustCAPayload{cert_id(ca)}, pick(3));
            return t;
        }
        default: {
            auto t = w.tx(sender, TxKind::AddTLSCert, AddTLSCertPayload{w.leaf("x.com", site_keys[0])});
            t.payload.resize(t.payload.size() / 2);
            t.sign(sender);
            return t;
        }
        }
    }
};


}  // namespace certledger::testing
