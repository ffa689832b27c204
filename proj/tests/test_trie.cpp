#include "doctest.h"

#include "certledger/trie.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>

using namespace certledger;

namespace {

Hash256 key_of(int i) { return sha256("key-" + std::to_string(i)); }
Bytes value_of(int i) { return to_bytes("value-" + std::to_string(i)); }

StateTrie fixture(int n)
{
    StateTrie t;
    for (int i = 0; i < n; ++i)
        t = t.insert(key_of(i), value_of(i));
    return t;
}

// Any proof that fails to parse counts as rejected.
bool accepts_blob(const Hash256& root, const Hash256& key, ByteView blob)
{
    try {
        return verify_proof(root, key, MerkleProof::deserialize(blob)).verified();
    } catch (const DecodeError&) {
        return false;
    }
}

}  // namespace

TEST_CASE("roots match the independent bulk-build oracle")
{
    // tests/oracles/trie_oracle.py
    const std::map<int, std::string> frozen{
        {0, "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"},
        {1, "a327e6bfd72b7a1526276fc3c5450e6e570c957c7fc9f283c4ef25ad579050cc"},
        {2, "10f5439c75084532ab80d82a885b0bce6ef5afc96f3f0f645202bf717dda9595"},
        {3, "9c1d2a171c6ff6ac0b8097c740dc87617ed2dd2c4e968e70b8bdf63f8e14837e"},
        {17, "c49f66582dca2651e6f3da1d4882fd0401cd98000219a89f17a509f311a415d5"},
        {256, "ca28ac83619786faffd50461a30dad520ff57c0c9fe2a65b5be400d5d751a1b6"},
        {1000, "a73f7dfbf469379c77c68eb59bea4650e8f62fe1e49bb045b9a1080d6353ce11"},
    };
    for (const auto& [n, hex] : frozen) {
        CAPTURE(n);
        CHECK(fixture(n).root_hash().hex() == hex);
    }
}

TEST_CASE("insert and get")
{
    StateTrie empty;
    CHECK(empty.root_hash() == StateTrie::empty_root());
    CHECK_FALSE(empty.get(key_of(1)).has_value());

    auto t = empty.insert(key_of(1), value_of(1));
    CHECK(t.get(key_of(1)) == value_of(1));
    CHECK_FALSE(t.get(key_of(2)).has_value());
    CHECK(t.size() == 1);

    SUBCASE("last write wins")
    {
        auto t2 = t.insert(key_of(1), to_bytes("v2"));
        CHECK(t2.get(key_of(1)) == to_bytes("v2"));
        CHECK(t2.size() == 1);
        CHECK(t.get(key_of(1)) == value_of(1));
    }

    SUBCASE("empty value is rejected")
    {
        CHECK_THROWS_AS(t.insert(key_of(2), Bytes{}), std::invalid_argument);
    }

    SUBCASE("old versions are unaffected by later inserts")
    {
        auto before = t.root_hash();
        auto t2 = t.insert(key_of(2), value_of(2));
        CHECK(t.root_hash() == before);
        CHECK_FALSE(t.get(key_of(2)).has_value());
        CHECK(t2.get(key_of(2)) == value_of(2));
    }
}

TEST_CASE("keys sharing long prefixes")
{
    Hash256 a, b, c;
    b.data[31] = 0x01;
    c.data[31] = 0x10;
    StateTrie t;
    t = t.insert(a, to_bytes("a")).insert(b, to_bytes("b")).insert(c, to_bytes("c"));
    CHECK(t.get(a) == to_bytes("a"));
    CHECK(t.get(b) == to_bytes("b"));
    CHECK(t.get(c) == to_bytes("c"));
    Hash256 d;
    d.data[31] = 0x11;
    CHECK_FALSE(t.get(d).has_value());
    for (const auto& k : {a, b, c, d}) {
        auto p = t.prove(k);
        auto check = verify_proof(t.root_hash(), k, p);
        REQUIRE(check.verified());
        CHECK(check.value == t.get(k));
    }
}

TEST_CASE("agrees with a flat sorted-map oracle over random operations")
{
    std::mt19937_64 rng(2024);
    std::map<Hash256, Bytes> oracle;
    StateTrie t;
    for (int op = 0; op < 10'000; ++op) {
        auto k = key_of(static_cast<int>(rng() % 2000));
        if (rng() % 2 == 0) {
            Bytes v = to_bytes("v" + std::to_string(rng() % 1'000'000));
            t = t.insert(k, v);
            oracle[k] = v;
        } else {
            auto it = oracle.find(k);
            auto got = t.get(k);
            if (it == oracle.end())
                REQUIRE_FALSE(got.has_value());
            else
                REQUIRE(got == it->second);
        }
    }
    CHECK(t.size() == oracle.size());

    std::vector<std::pair<Hash256, Bytes>> walked;
    t.for_each([&](const Hash256& k, const Bytes& v) { walked.emplace_back(k, v); });
    CHECK(walked == std::vector<std::pair<Hash256, Bytes>>(oracle.begin(), oracle.end()));
}

TEST_CASE("root is independent of insertion order")
{
    std::vector<int> ids(300);
    std::iota(ids.begin(), ids.end(), 0);
    auto reference = fixture(300).root_hash();
    std::mt19937_64 rng(99);
    for (int round = 0; round < 100; ++round) {
        std::shuffle(ids.begin(), ids.end(), rng);
        StateTrie t;
        for (int i : ids)
            t = t.insert(key_of(i), value_of(i));
        REQUIRE(t.root_hash() == reference);
    }
}

TEST_CASE("proofs")
{
    auto t = fixture(200);
    auto root = t.root_hash();

    SUBCASE("inclusion")
    {
        for (int i = 0; i < 200; ++i) {
            auto check = verify_proof(root, key_of(i), t.prove(key_of(i)));
            REQUIRE(check.verified());
            REQUIRE(check.value == value_of(i));
        }
    }

    SUBCASE("absence")
    {
        for (int i = 200; i < 400; ++i) {
            auto p = t.prove(key_of(i));
            CHECK_FALSE(p.value.has_value());
            auto check = verify_proof(root, key_of(i), p);
            REQUIRE(check.verified());
            REQUIRE_FALSE(check.value.has_value());
        }
    }

    SUBCASE("empty trie")
    {
        StateTrie empty;
        auto p = empty.prove(key_of(1));
        CHECK(p.path_nodes.empty());
        CHECK(verify_proof(empty.root_hash(), key_of(1), p).verified());
        CHECK_FALSE(verify_proof(root, key_of(1), p).verified());
    }

    SUBCASE("a different root rejects")
    {
        auto other = t.insert(key_of(999), value_of(999)).root_hash();
        CHECK_FALSE(verify_proof(other, key_of(3), t.prove(key_of(3))).verified());
    }

    SUBCASE("key substitution rejects")
    {
        auto p = t.prove(key_of(3));
        CHECK_FALSE(verify_proof(root, key_of(4), p).verified());
        p.key = key_of(4);
        CHECK_FALSE(verify_proof(root, key_of(4), p).verified());
    }

    SUBCASE("a lying value claim rejects")
    {
        auto p = t.prove(key_of(3));
        p.value = to_bytes("forged");
        CHECK_FALSE(verify_proof(root, key_of(3), p).verified());
        auto absent = t.prove(key_of(500));
        absent.value = to_bytes("forged");
        CHECK_FALSE(verify_proof(root, key_of(500), absent).verified());
        auto dropped = t.prove(key_of(3));
        dropped.value.reset();
        CHECK_FALSE(verify_proof(root, key_of(3), dropped).verified());
    }

    SUBCASE("truncated and padded paths reject")
    {
        auto p = t.prove(key_of(3));
        auto shorter = p;
        shorter.path_nodes.pop_back();
        CHECK_FALSE(verify_proof(root, key_of(3), shorter).verified());
        auto longer = p;
        longer.path_nodes.push_back(p.path_nodes.back());
        CHECK_FALSE(verify_proof(root, key_of(3), longer).verified());
    }

    SUBCASE("serialisation round-trips")
    {
        auto p = t.prove(key_of(3));
        CHECK(MerkleProof::deserialize(p.serialize()) == p);
        auto a = t.prove(key_of(300));
        CHECK(MerkleProof::deserialize(a.serialize()) == a);
    }
}

TEST_CASE("every single-byte mutation of a small proof is rejected")
{
    auto t = fixture(20);
    auto root = t.root_hash();
    for (int k : {3, 77}) {  // 3 present, 77 absent
        auto blob = t.prove(key_of(k)).serialize();
        REQUIRE(accepts_blob(root, key_of(k), blob));
        for (std::size_t pos = 0; pos < blob.size(); ++pos) {
            for (int delta = 1; delta < 256; ++delta) {
                auto m = blob;
                m[pos] ^= static_cast<std::uint8_t>(delta);
                REQUIRE_FALSE(accepts_blob(root, key_of(k), m));
            }
        }
    }
}

TEST_CASE("proof length grows logarithmically")
{
    auto mean_len = [](int n) {
        auto t = fixture(n);
        double total = 0;
        int count = 0;
        for (int i = 0; i < n; i += std::max(1, n / 500), ++count)
            total += static_cast<double>(t.prove(key_of(i)).path_nodes.size());
        return total / count;
    };
    auto small = mean_len(1000);
    auto large = mean_len(10'000);
    CHECK(large > small);
    CHECK(large <= 2.0 * small);
}

TEST_CASE("node export is content addressed and covers every proof node")
{
    auto t = fixture(50);
    auto nodes = t.export_nodes();
    for (const auto& [digest, enc] : nodes)
        REQUIRE(sha256(enc) == digest);
    REQUIRE(nodes.count(t.root_hash()) == 1);
    for (int i = 0; i < 50; ++i)
        for (const auto& enc : t.prove(key_of(i)).path_nodes)
            REQUIRE(nodes.count(sha256(enc)) == 1);
}
