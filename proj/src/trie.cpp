#include "certledger/trie.hpp"

#include <array>
#include <stdexcept>

namespace certledger {

namespace {

constexpr std::uint8_t tag_leaf = 0x00;
constexpr std::uint8_t tag_extension = 0x01;
constexpr std::uint8_t tag_branch = 0x02;
constexpr std::size_t key_nibbles = 64;

using Nibbles = std::vector<std::uint8_t>;

Nibbles to_nibbles(const Hash256& key)
{
    Nibbles out;
    out.reserve(key_nibbles);
    for (auto b : key.data) {
        out.push_back(b >> 4);
        out.push_back(b & 0x0f);
    }
    return out;
}

Nibbles slice(const Nibbles& n, std::size_t from, std::size_t to)
{
    return Nibbles(n.begin() + static_cast<std::ptrdiff_t>(from), n.begin() + static_cast<std::ptrdiff_t>(to));
}

Nibbles slice(const Nibbles& n, std::size_t from) { return slice(n, from, n.size()); }

void write_path(ByteWriter& w, const Nibbles& path)
{
    w.u8(static_cast<std::uint8_t>(path.size()));
    for (std::size_t i = 0; i < path.size(); i += 2) {
        std::uint8_t hi = path[i];
        std::uint8_t lo = i + 1 < path.size() ? path[i + 1] : 0;
        w.u8(static_cast<std::uint8_t>((hi << 4) | lo));
    }
}

Nibbles read_path(ByteReader& r)
{
    auto count = r.u8();
    if (count > key_nibbles)
        throw DecodeError("path longer than a key");
    auto packed = r.raw((count + 1u) / 2);
    Nibbles out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        auto b = packed[i / 2];
        out.push_back(i % 2 == 0 ? b >> 4 : b & 0x0f);
    }
    if (count % 2 == 1 && (packed.back() & 0x0f) != 0)
        throw DecodeError("non-zero path padding");
    return out;
}

std::size_t common_prefix(const Nibbles& a, const Nibbles& key, std::size_t pos)
{
    std::size_t i = 0;
    while (i < a.size() && pos + i < key.size() && a[i] == key[pos + i])
        ++i;
    return i;
}

}  // namespace

struct StateTrie::Node {
    enum class Kind { Leaf, Extension, Branch };

    Kind kind = Kind::Leaf;
    Nibbles path;                     // leaf and extension
    Bytes value;                      // leaf
    NodePtr child;                    // extension
    std::array<NodePtr, 16> children; // branch
    Bytes encoding;
    Hash256 hash;

    void seal()
    {
        ByteWriter w;
        switch (kind) {
        case Kind::Leaf:
            w.u8(tag_leaf);
            write_path(w, path);
            w.var(value);
            break;
        case Kind::Extension:
            w.u8(tag_extension);
            write_path(w, path);
            w.hash(child->hash);
            break;
        case Kind::Branch: {
            std::uint16_t bitmap = 0;
            for (int i = 0; i < 16; ++i)
                if (children[i])
                    bitmap |= static_cast<std::uint16_t>(1u << i);
            w.u8(tag_branch);
            w.u16(bitmap);
            for (const auto& c : children)
                if (c)
                    w.hash(c->hash);
            break;
        }
        }
        encoding = std::move(w).bytes();
        hash = sha256(encoding);
    }
};

namespace {

using Node = StateTrie::Node;
using NodePtr = StateTrie::NodePtr;

NodePtr make_leaf(Nibbles path, Bytes value)
{
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Leaf;
    n->path = std::move(path);
    n->value = std::move(value);
    n->seal();
    return n;
}

NodePtr make_extension(Nibbles path, NodePtr child)
{
    if (path.empty())
        return child;
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Extension;
    n->path = std::move(path);
    n->child = std::move(child);
    n->seal();
    return n;
}

NodePtr make_branch(std::array<NodePtr, 16> children)
{
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Branch;
    n->children = std::move(children);
    n->seal();
    return n;
}

// Branch holding `a` at nibble ia and `b` at nibble ib (ia != ib), wrapped in
// an extension for the shared prefix.
NodePtr fork(Nibbles shared, std::uint8_t ia, NodePtr a, std::uint8_t ib, NodePtr b)
{
    std::array<NodePtr, 16> children;
    children[ia] = std::move(a);
    children[ib] = std::move(b);
    return make_extension(std::move(shared), make_branch(std::move(children)));
}

NodePtr insert_at(const NodePtr& node, const Nibbles& key, std::size_t pos, Bytes value, bool& added)
{
    if (!node) {
        added = true;
        return make_leaf(slice(key, pos), std::move(value));
    }
    switch (node->kind) {
    case Node::Kind::Leaf: {
        auto cp = common_prefix(node->path, key, pos);
        if (cp == node->path.size())
            return make_leaf(node->path, std::move(value));
        added = true;
        return fork(slice(node->path, 0, cp),
                    node->path[cp], make_leaf(slice(node->path, cp + 1), node->value),
                    key[pos + cp], make_leaf(slice(key, pos + cp + 1), std::move(value)));
    }
    case Node::Kind::Extension: {
        auto cp = common_prefix(node->path, key, pos);
        if (cp == node->path.size())
            return make_extension(node->path, insert_at(node->child, key, pos + cp, std::move(value), added));
        added = true;
        return fork(slice(node->path, 0, cp),
                    node->path[cp], make_extension(slice(node->path, cp + 1), node->child),
                    key[pos + cp], make_leaf(slice(key, pos + cp + 1), std::move(value)));
    }
    case Node::Kind::Branch: {
        auto children = node->children;
        auto nib = key[pos];
        children[nib] = insert_at(children[nib], key, pos + 1, std::move(value), added);
        return make_branch(std::move(children));
    }
    }
    throw std::logic_error("unreachable trie node kind");
}

void collect(const NodePtr& node, Nibbles& prefix,
             const std::function<void(const Hash256&, const Bytes&)>& fn)
{
    if (!node)
        return;
    switch (node->kind) {
    case Node::Kind::Leaf: {
        auto full = prefix;
        full.insert(full.end(), node->path.begin(), node->path.end());
        Hash256 key;
        for (std::size_t i = 0; i < 32; ++i)
            key.data[i] = static_cast<std::uint8_t>((full[2 * i] << 4) | full[2 * i + 1]);
        fn(key, node->value);
        return;
    }
    case Node::Kind::Extension: {
        auto n = prefix.size();
        prefix.insert(prefix.end(), node->path.begin(), node->path.end());
        collect(node->child, prefix, fn);
        prefix.resize(n);
        return;
    }
    case Node::Kind::Branch:
        for (std::uint8_t i = 0; i < 16; ++i) {
            prefix.push_back(i);
            collect(node->children[i], prefix, fn);
            prefix.pop_back();
        }
        return;
    }
}

void export_into(const NodePtr& node, std::map<Hash256, Bytes>& out)
{
    if (!node || out.count(node->hash))
        return;
    out.emplace(node->hash, node->encoding);
    if (node->kind == Node::Kind::Extension)
        export_into(node->child, out);
    else if (node->kind == Node::Kind::Branch)
        for (const auto& c : node->children)
            export_into(c, out);
}

}  // namespace

Hash256 StateTrie::empty_root()
{
    static const Hash256 root = sha256(ByteView{});
    return root;
}

Hash256 StateTrie::root_hash() const { return root_ ? root_->hash : empty_root(); }

StateTrie StateTrie::insert(const Hash256& key, Bytes value) const
{
    if (value.empty())
        throw std::invalid_argument("trie values must be non-empty");
    bool added = false;
    StateTrie next;
    next.root_ = insert_at(root_, to_nibbles(key), 0, std::move(value), added);
    next.size_ = size_ + (added ? 1 : 0);
    return next;
}

std::optional<Bytes> StateTrie::get(const Hash256& key) const
{
    auto nibbles = to_nibbles(key);
    std::size_t pos = 0;
    const Node* node = root_.get();
    while (node) {
        switch (node->kind) {
        case Node::Kind::Leaf:
            if (common_prefix(node->path, nibbles, pos) == node->path.size() &&
                pos + node->path.size() == nibbles.size())
                return node->value;
            return std::nullopt;
        case Node::Kind::Extension:
            if (common_prefix(node->path, nibbles, pos) != node->path.size())
                return std::nullopt;
            pos += node->path.size();
            node = node->child.get();
            break;
        case Node::Kind::Branch:
            node = node->children[nibbles[pos++]].get();
            break;
        }
    }
    return std::nullopt;
}

StateTrie::Proof StateTrie::prove(const Hash256& key) const
{
    Proof proof;
    proof.key = key;
    auto nibbles = to_nibbles(key);
    std::size_t pos = 0;
    const Node* node = root_.get();
    while (node) {
        proof.path_nodes.push_back(node->encoding);
        switch (node->kind) {
        case Node::Kind::Leaf:
            if (common_prefix(node->path, nibbles, pos) == node->path.size() &&
                pos + node->path.size() == nibbles.size())
                proof.value = node->value;
            return proof;
        case Node::Kind::Extension:
            if (common_prefix(node->path, nibbles, pos) != node->path.size())
                return proof;
            pos += node->path.size();
            node = node->child.get();
            break;
        case Node::Kind::Branch:
            node = node->children[nibbles[pos++]].get();
            break;
        }
    }
    return proof;
}

void StateTrie::for_each(const std::function<void(const Hash256&, const Bytes&)>& fn) const
{
    Nibbles prefix;
    collect(root_, prefix, fn);
}

std::map<Hash256, Bytes> StateTrie::export_nodes() const
{
    std::map<Hash256, Bytes> out;
    export_into(root_, out);
    return out;
}

Bytes StateTrie::Proof::serialize() const
{
    ByteWriter w;
    w.u8(0x01);
    w.hash(key);
    w.u8(value ? 1 : 0);
    if (value)
        w.var(*value);
    w.u32(static_cast<std::uint32_t>(path_nodes.size()));
    for (const auto& n : path_nodes)
        w.var(n);
    return std::move(w).bytes();
}

StateTrie::Proof StateTrie::Proof::deserialize(ByteView blob)
{
    ByteReader r(blob);
    if (r.u8() != 0x01)
        throw DecodeError("unknown proof version");
    Proof p;
    p.key = r.hash();
    if (r.boolean())
        p.value = r.var();
    auto count = r.u32();
    if (count > key_nibbles + 1)
        throw DecodeError("proof longer than any trie path");
    for (std::uint32_t i = 0; i < count; ++i)
        p.path_nodes.push_back(r.var());
    r.expect_done();
    return p;
}

namespace {

ProofCheck rejected(std::string reason)
{
    ProofCheck c;
    c.reason = std::move(reason);
    return c;
}

ProofCheck verified(std::optional<Bytes> value)
{
    ProofCheck c;
    c.status = ProofCheck::Status::Verified;
    c.value = std::move(value);
    return c;
}

}  // namespace

ProofCheck verify_proof(const Hash256& root, const Hash256& key, const MerkleProof& proof)
{
    if (proof.key != key)
        return rejected("proof is for a different key");
    if (proof.path_nodes.empty()) {
        if (root != StateTrie::empty_root())
            return rejected("empty proof against a non-empty root");
        if (proof.value)
            return rejected("empty trie cannot include a value");
        return verified(std::nullopt);
    }
    if (proof.path_nodes.size() > key_nibbles + 1)
        return rejected("proof longer than any trie path");

    auto nibbles = to_nibbles(key);
    std::size_t pos = 0;
    Hash256 expected = root;
    std::optional<Bytes> answer;
    bool terminal = false;

    try {
        for (std::size_t i = 0; i < proof.path_nodes.size(); ++i) {
            if (terminal)
                return rejected("nodes after the terminal node");
            const auto& enc = proof.path_nodes[i];
            if (sha256(enc) != expected)
                return rejected("node " + std::to_string(i) + " does not hash to its reference");
            ByteReader r(enc);
            auto tag = r.u8();
            if (tag == tag_leaf) {
                auto path = read_path(r);
                auto value = r.var();
                r.expect_done();
                if (value.empty())
                    return rejected("leaf with empty value");
                if (pos + path.size() != key_nibbles)
                    return rejected("leaf path length disagrees with key depth");
                if (common_prefix(path, nibbles, pos) == path.size())
                    answer = std::move(value);
                terminal = true;
            } else if (tag == tag_extension) {
                auto path = read_path(r);
                auto child = r.hash();
                r.expect_done();
                if (path.empty())
                    return rejected("empty extension path");
                if (pos + path.size() >= key_nibbles)
                    return rejected("extension reaches past key length");
                if (common_prefix(path, nibbles, pos) != path.size()) {
                    terminal = true;
                } else {
                    pos += path.size();
                    expected = child;
                }
            } else if (tag == tag_branch) {
                auto bitmap = r.u16();
                std::array<std::optional<Hash256>, 16> children;
                int count = 0;
                for (int b = 0; b < 16; ++b) {
                    if (bitmap & (1u << b)) {
                        children[b] = r.hash();
                        ++count;
                    }
                }
                r.expect_done();
                if (count < 2)
                    return rejected("branch with fewer than two children");
                if (pos >= key_nibbles)
                    return rejected("branch below key depth");
                auto& slot = children[nibbles[pos++]];
                if (!slot) {
                    terminal = true;
                } else {
                    expected = *slot;
                }
            } else {
                return rejected("unknown node tag");
            }
        }
    } catch (const DecodeError& e) {
        return rejected(std::string("malformed node: ") + e.what());
    }

    if (!terminal)
        return rejected("proof ends before a terminal node");
    if (answer != proof.value)
        return rejected("claimed value disagrees with the proven value");
    return verified(std::move(answer));
}

}  // namespace certledger
