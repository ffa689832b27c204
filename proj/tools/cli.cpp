#include "certledger/cli.hpp"

#include "certledger/estimator.hpp"
#include "certledger/light_client.hpp"
#include "certledger/sim.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace certledger {

namespace {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

struct CliError : std::runtime_error {
    CliError(std::string category, int code, const std::string& msg)
        : std::runtime_error(msg), category(std::move(category)), code(code)
    {
    }
    std::string category;
    int code;
};

[[noreturn]] void input_error(const std::string& msg) { throw CliError("input", 3, msg); }
[[noreturn]] void ledger_error(const std::string& msg) { throw CliError("ledger", 4, msg); }

Bytes read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        input_error("cannot read " + path);
    return Bytes(std::istreambuf_iterator<char>(in), {});
}

std::string read_text(const std::string& path)
{
    auto b = read_file(path);
    return std::string(b.begin(), b.end());
}

void write_file(const std::string& path, ByteView data)
{
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f)
        throw CliError("io", 3, "cannot write " + path);
    f.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (!f)
        throw CliError("io", 3, "cannot write " + path);
}

void write_text(const std::string& path, std::string_view text)
{
    write_file(path, ByteView(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

// ---- key files: {"seed": <64 hex>, "public_key": <64 hex>, "address": <64 hex>} ----

std::string key_file_json(const crypto::KeyPair& k)
{
    ordered_json j;
    j["seed"] = k.seed().hex();
    j["public_key"] = k.public_key().hex();
    j["address"] = account_address(k.public_key()).hex();
    return j.dump(2) + "\n";
}

crypto::KeyPair load_key(const std::string& path)
{
    try {
        auto j = nlohmann::json::parse(read_text(path));
        auto k = crypto::KeyPair::from_seed(hash_from_hex(j.at("seed").get<std::string>()));
        if (j.contains("public_key") && j["public_key"].get<std::string>() != k.public_key().hex())
            input_error(path + ": public_key does not match seed");
        return k;
    } catch (const nlohmann::json::exception& e) {
        input_error(path + ": not a key file: " + e.what());
    } catch (const std::invalid_argument& e) {
        input_error(path + ": " + e.what());
    }
}

Certificate load_cert(const std::string& path)
{
    try {
        return parse_certificate_fixture(read_text(path));
    } catch (const std::exception& e) {
        input_error(path + ": not a certificate: " + e.what());
    }
}

Address parse_account(const std::string& s)
{
    if (fs::exists(s))
        return account_address(load_key(s).public_key());
    try {
        return hash_from_hex(s);
    } catch (const std::exception&) {
        input_error("'" + s + "' is neither a key file nor a 64-hex address");
    }
}

// ---- node state: genesis JSON + exported chain ----

ChainConfig load_config(const std::string& path)
{
    try {
        return chain_config_from_json(read_text(path));
    } catch (const CliError&) {
        throw;
    } catch (const std::exception& e) {
        input_error(path + ": " + e.what());
    }
}

FullNode load_node(const std::string& genesis, const std::string& chain)
{
    auto config = load_config(genesis);
    if (chain.empty() || !fs::exists(chain)) {
        try {
            return FullNode(config);
        } catch (const std::invalid_argument& e) {
            input_error(genesis + ": " + e.what());
        }
    }
    try {
        return FullNode::import_chain(config, read_file(chain));
    } catch (const DecodeError& e) {
        input_error(chain + ": " + e.what());
    } catch (const std::runtime_error& e) {
        ledger_error(chain + ": " + e.what());
    }
}

std::vector<BlockHeader> decode_headers(ByteView bytes)
{
    if (bytes.size() % header_size != 0)
        throw DecodeError("header file length is not a multiple of " + std::to_string(header_size));
    std::vector<BlockHeader> hs;
    for (std::size_t off = 0; off < bytes.size(); off += header_size)
        hs.push_back(decode_header(bytes.subspan(off, header_size)));
    return hs;
}

ordered_json cert_json(const Certificate& c)
{
    return {{"id", cert_id(c).hex()},
            {"common_name", c.subject_common_name},
            {"sans", c.subject_alternative_names},
            {"issuer_id", c.issuer_id.hex()},
            {"not_before", c.not_before},
            {"not_after", c.not_after},
            {"is_ca", c.is_ca}};
}

ordered_json record_json(const CertRecord& r)
{
    auto j = cert_json(r.certificate);
    j["status"] = to_string(r.status);
    j["added_at_block"] = r.added_at_block;
    if (r.revoked_at_block)
        j["revoked_at_block"] = *r.revoked_at_block;
    return j;
}

void print_record_text(std::ostream& out, const CertRecord& r)
{
    out << cert_id(r.certificate).hex() << " " << to_string(r.status) << " added@" << r.added_at_block;
    if (r.revoked_at_block)
        out << " revoked@" << *r.revoked_at_block;
    out << " cn=" << r.certificate.subject_common_name << " sans=";
    for (std::size_t i = 0; i < r.certificate.subject_alternative_names.size(); ++i)
        out << (i ? "," : "") << r.certificate.subject_alternative_names[i];
    out << " not_after=" << r.certificate.not_after << "\n";
}

// ---- subcommands ----

struct Common {
    std::string genesis;
    std::string chain;
    bool json = false;
};

void add_node_options(CLI::App* c, Common& o)
{
    c->add_option("--genesis", o.genesis, "genesis JSON file")->required()->check(CLI::ExistingFile);
    c->add_option("--chain", o.chain, "exported chain file (created by submit if missing)");
}

struct KeygenOpts {
    std::string seed;
    std::string out;
};

void cmd_keygen(const KeygenOpts& o, bool json, std::ostream& out)
{
    auto k = crypto::KeyPair::from_label(o.seed);
    auto text = key_file_json(k);
    if (!o.out.empty())
        write_text(o.out, text);
    if (json || o.out.empty())
        out << text;
    else
        out << "public_key " << k.public_key().hex() << "\naddress " << account_address(k.public_key()).hex()
            << "\n";
}

struct CaIssueOpts {
    bool ca = false;
    std::string key;
    std::string name;
    std::string issuer_cert;
    std::string subject_key;
    std::vector<std::string> domains;
    std::uint64_t serial = 1;
    UnixSeconds not_before = 0;
    std::optional<UnixSeconds> not_after;
    std::int64_t days = 90;
    std::string out;
};

void cmd_ca_issue(const CaIssueOpts& o, bool json, std::ostream& out)
{
    auto key = load_key(o.key);
    auto na = o.not_after.value_or(o.not_before + o.days * seconds_per_day);
    if (na <= o.not_before)
        throw CliError("usage", 2, "not_after must be later than not_before");
    Certificate cert;
    if (o.ca) {
        if (o.name.empty())
            throw CliError("usage", 2, "--ca needs --name");
        cert = issue_ca_certificate(key, o.name, serial_from_number(o.serial), o.not_before, na);
    } else {
        if (o.issuer_cert.empty() || o.subject_key.empty() || o.domains.empty())
            throw CliError("usage", 2, "a TLS certificate needs --issuer-cert, --subject-key and --domain");
        cert = issue_tls_certificate(load_cert(o.issuer_cert), key, load_key(o.subject_key).public_key(),
                                     o.domains, serial_from_number(o.serial), o.not_before, na);
    }
    auto text = write_certificate_fixture(cert);
    if (!o.out.empty())
        write_text(o.out, text);
    if (json)
        out << cert_json(cert).dump(2) << "\n";
    else if (o.out.empty())
        out << text;
    else
        out << "certificate " << cert_id(cert).hex() << "\n";
}

struct GenesisOpts {
    std::vector<std::string> board;
    std::uint32_t threshold = 1;
    std::string foundation;
    std::string board_account;
    std::uint64_t supply = 1'000'000;
    std::vector<std::string> cas;
    std::vector<std::string> authorities;
    UnixSeconds genesis_time = 0;
    UnixSeconds block_time = 600;
    std::vector<std::string> fees;
    std::string out;
};

void cmd_genesis(const GenesisOpts& o, std::ostream& out)
{
    ChainConfig c;
    for (const auto& b : o.board)
        c.genesis.board_keys.push_back(load_key(b).public_key());
    c.genesis.threshold = o.threshold;
    c.genesis.foundation_key = load_key(o.foundation).public_key();
    c.genesis.board_account_key = load_key(o.board_account).public_key();
    c.genesis.total_supply = o.supply;
    for (const auto& f : o.fees) {
        auto eq = f.find('=');
        auto kind = tx_kind_from_string(f.substr(0, eq));
        if (eq == std::string::npos || !kind)
            throw CliError("usage", 2, "--fee expects Kind=amount, got '" + f + "'");
        c.genesis.fee_schedule[*kind] = std::stoull(f.substr(eq + 1));
    }
    for (const auto& p : o.cas)
        c.genesis.initial_cas.push_back(load_cert(p));
    for (const auto& a : o.authorities)
        c.authorities.push_back(load_key(a).public_key());
    c.genesis_time = o.genesis_time;
    c.block_time = o.block_time;
    try {
        FullNode probe(c);  // rejects a genesis the ledger could not start from
        auto text = chain_config_to_json(c);
        if (o.out.empty())
            out << text;
        else {
            write_text(o.out, text);
            out << "genesis " << probe.tip().hash().hex() << "\n";
        }
    } catch (const std::invalid_argument& e) {
        throw CliError("config", 3, e.what());
    }
}

struct SubmitOpts {
    Common node;
    std::vector<std::string> authorities;
    std::optional<UnixSeconds> now;
    std::string events;
    std::string kind;
    std::string key;
    std::optional<std::uint64_t> nonce;
    std::vector<std::string> board_keys;
    std::string cert;
    std::string ca_cert;
    std::string revoker_key;
    std::string fake;
    std::string genuine;
    std::string evidence_key;
    std::uint32_t report = 0;
    std::string document;
    std::string verdict;
    std::string to;
    std::uint64_t amount = 0;
};

Transaction build_submit_tx(const SubmitOpts& o, const WorldState& state)
{
    auto kind = tx_kind_from_string(o.kind);
    if (!kind)
        throw CliError("usage", 2, "unknown transaction kind '" + o.kind + "'");
    auto sender = load_key(o.key);
    auto nonce = o.nonce.value_or(state.account(account_address(sender.public_key())).nonce);
    auto require = [&](const std::string& v, const char* flag) {
        if (v.empty())
            throw CliError("usage", 2, o.kind + " needs " + flag);
        return v;
    };

    Transaction tx;
    switch (*kind) {
    case TxKind::AddTrustedCA:
        tx = make_transaction(sender, nonce, *kind, AddTrustedCAPayload{load_cert(require(o.cert, "--cert"))});
        break;
    case TxKind::UntrustCA:
        tx = make_transaction(sender, nonce, *kind, UntrustCAPayload{cert_id(load_cert(require(o.ca_cert, "--ca-cert")))});
        break;
    case TxKind::AddTLSCert:
        tx = make_transaction(sender, nonce, *kind, AddTLSCertPayload{load_cert(require(o.cert, "--cert"))});
        break;
    case TxKind::RevokeCert: {
        auto id = cert_id(load_cert(require(o.cert, "--cert")));
        auto revoker = o.revoker_key.empty() ? sender : load_key(o.revoker_key);
        tx = make_transaction(sender, nonce, *kind, RevokeCertPayload{id, revoker.sign(revocation_message(id))});
        break;
    }
    case TxKind::ReportFraud: {
        auto fake = cert_id(load_cert(require(o.fake, "--fake")));
        auto genuine = cert_id(load_cert(require(o.genuine, "--genuine")));
        auto signer = load_key(require(o.evidence_key, "--evidence-key"));
        auto sig = signer.sign(fraud_evidence_message(fake, genuine, account_address(sender.public_key())));
        tx = make_transaction(sender, nonce, *kind, ReportFraudPayload{fake, genuine, sig});
        break;
    }
    case TxKind::PleadFraud: {
        auto doc = sha256(require(o.document, "--document"));
        auto ca = cert_id(load_cert(require(o.ca_cert, "--ca-cert")));
        tx = make_transaction(sender, nonce, *kind,
                              PleadFraudPayload{o.report, ca, doc, sender.sign(plea_message(o.report, doc))});
        break;
    }
    case TxKind::ResolveFraud: {
        Resolution v;
        if (o.verdict == "Upheld")
            v = Resolution::Upheld;
        else if (o.verdict == "Dismissed")
            v = Resolution::Dismissed;
        else
            throw CliError("usage", 2, "--verdict must be Upheld or Dismissed");
        tx = make_transaction(sender, nonce, *kind, ResolveFraudPayload{o.report, v});
        break;
    }
    case TxKind::TransferToken:
        tx = make_transaction(sender, nonce, *kind, TransferPayload{parse_account(require(o.to, "--to")), o.amount});
        break;
    }
    for (const auto& b : o.board_keys)
        tx.add_board_signature(load_key(b));
    return tx;
}

void cmd_submit(const SubmitOpts& o, std::ostream& out)
{
    auto node = load_node(o.node.genesis, o.node.chain);
    if (o.node.chain.empty())
        throw CliError("usage", 2, "submit needs --chain to persist the new block");
    auto tx = build_submit_tx(o, node.state());

    const auto& scheduled = scheduled_proposer(node.config().authorities, node.height() + 1);
    std::optional<crypto::KeyPair> proposer;
    for (const auto& a : o.authorities) {
        auto k = load_key(a);
        if (k.public_key() == scheduled)
            proposer = k;
    }
    if (!proposer)
        throw CliError("usage", 2, "none of the --authority keys is scheduled for block " +
                                       std::to_string(node.height() + 1) + " (" + scheduled.hex() + ")");

    auto id = node.submit(tx);
    if (!id)
        ledger_error(std::string("transaction rejected: ") + to_string(id.error()));
    auto produced = node.produce(*proposer, o.now);
    if (!produced)
        ledger_error(std::string("block rejected: ") + to_string(produced.error()));
    const auto& b = produced->block;
    bool included = std::any_of(b.transactions.begin(), b.transactions.end(),
                                [&](const Transaction& t) { return t.id() == *id; });
    if (!included) {
        std::string why = "still pending";
        for (const auto& s : produced->skipped)
            if (s.tx_id == *id)
                why = to_string(s.reason);
        ledger_error("transaction skipped: " + why);
    }

    write_file(o.node.chain, node.export_chain());
    if (!o.events.empty()) {
        std::ofstream f(o.events, std::ios::app);
        for (const auto& e : produced->events)
            f << event_to_json_line(e) << "\n";
        if (!f)
            throw CliError("io", 3, "cannot append to " + o.events);
    }
    if (o.node.json) {
        ordered_json j{{"tx_id", id->hex()},
                       {"block", b.header.number},
                       {"block_hash", b.header.hash().hex()},
                       {"state_root", b.header.state_root.hex()}};
        ordered_json evs = ordered_json::array();
        for (const auto& e : produced->events)
            evs.push_back(ordered_json::parse(event_to_json_line(e)));
        j["events"] = evs;
        out << j.dump(2) << "\n";
    } else {
        out << "included " << id->hex() << " in block " << b.header.number << "\n";
        for (const auto& e : produced->events)
            out << "event " << to_string(e.kind) << " " << e.subject.hex() << "\n";
    }
}

struct QueryOpts {
    Common node;
    std::string what;
    std::string cert;
    std::string id;
    std::string account;
    std::string domain;
    std::string status;
};

void cmd_query(const QueryOpts& o, std::ostream& out)
{
    auto node = load_node(o.node.genesis, o.node.chain);
    const auto& st = node.state();
    const bool json = o.node.json;

    if (o.what == "height") {
        if (json)
            out << ordered_json{{"height", node.height()}, {"tip_hash", node.tip().hash().hex()},
                                {"state_root", st.root().hex()}}
                       .dump(2)
                << "\n";
        else
            out << "height " << node.height() << "\ntip " << node.tip().hash().hex() << "\nstate_root "
                << st.root().hex() << "\n";
    } else if (o.what == "cert") {
        CertId id;
        if (!o.cert.empty())
            id = cert_id(load_cert(o.cert));
        else if (!o.id.empty())
            id = hash_from_hex(o.id);
        else
            throw CliError("usage", 2, "query cert needs --cert or --id");
        auto rec = st.certificate(id);
        if (!rec) {
            if (json)
                out << ordered_json{{"id", id.hex()}, {"status", "Absent"}}.dump(2) << "\n";
            else
                out << id.hex() << " Absent\n";
            return;
        }
        if (json)
            out << record_json(*rec).dump(2) << "\n";
        else
            print_record_text(out, *rec);
    } else if (o.what == "cas") {
        auto cas = st.trusted_cas();
        ordered_json arr = ordered_json::array();
        for (const auto& [id, e] : cas.entries) {
            if (json) {
                auto j = cert_json(e.certificate);
                j["status"] = to_string(e.status);
                arr.push_back(j);
            } else {
                out << id.hex() << " " << to_string(e.status) << " " << e.certificate.subject_common_name << "\n";
            }
        }
        if (json)
            out << ordered_json{{"threshold", cas.threshold}, {"board_size", cas.board_keys.size()}, {"cas", arr}}
                       .dump(2)
                << "\n";
    } else if (o.what == "account") {
        if (o.account.empty())
            throw CliError("usage", 2, "query account needs --account");
        auto addr = parse_account(o.account);
        auto a = st.account(addr);
        if (json)
            out << ordered_json{{"address", addr.hex()}, {"balance", a.balance}, {"nonce", a.nonce}}.dump(2) << "\n";
        else
            out << addr.hex() << " balance " << a.balance << " nonce " << a.nonce << "\n";
    } else if (o.what == "search") {
        if (o.domain.empty())
            throw CliError("usage", 2, "query search needs --domain");
        std::optional<CertStatus> filter;
        if (o.status == "NotRevoked")
            filter = CertStatus::NotRevoked;
        else if (o.status == "Revoked")
            filter = CertStatus::Revoked;
        else if (!o.status.empty())
            throw CliError("usage", 2, "--status must be NotRevoked or Revoked");
        auto recs = search_certificates(st, o.domain, filter);
        if (json) {
            ordered_json arr = ordered_json::array();
            for (const auto& r : recs)
                arr.push_back(record_json(r));
            out << arr.dump(2) << "\n";
        } else {
            for (const auto& r : recs)
                print_record_text(out, r);
        }
    } else if (o.what == "reports") {
        auto reports = st.fraud_reports().reports;
        ordered_json arr = ordered_json::array();
        for (std::size_t i = 0; i < reports.size(); ++i) {
            const auto& r = reports[i];
            if (json)
                arr.push_back({{"index", i},
                               {"fake_cert_id", cert_id(r.fake_cert).hex()},
                               {"genuine_cert_id", r.genuine_cert_id.hex()},
                               {"reporter", r.reporter_account.hex()},
                               {"pleaded", r.plea.has_value()},
                               {"resolution", to_string(r.resolution)}});
            else
                out << i << " fake " << cert_id(r.fake_cert).hex() << " " << to_string(r.resolution)
                    << (r.plea ? " pleaded" : "") << "\n";
        }
        if (json)
            out << arr.dump(2) << "\n";
    } else if (o.what == "events") {
        for (const auto& e : node.events()) {
            if (!o.domain.empty() &&
                std::find(e.domains.begin(), e.domains.end(), o.domain) == e.domains.end())
                continue;
            out << event_to_json_line(e) << "\n";
        }
    } else {
        throw CliError("usage", 2, "unknown query '" + o.what + "'");
    }
}

struct ProveOpts {
    Common node;
    std::string cert;
    std::optional<std::uint64_t> block;
    std::string out;
};

void cmd_prove(const ProveOpts& o, std::ostream& out)
{
    auto node = load_node(o.node.genesis, o.node.chain);
    auto cert = load_cert(o.cert);
    auto b = retrieve_state_proof(node, cert, o.block.value_or(node.height()));
    if (!b)
        ledger_error("no block " + std::to_string(*o.block) + " (height " + std::to_string(node.height()) + ")");
    write_file(o.out, encode_bundle(*b));
    if (o.node.json)
        out << ordered_json{{"block", b->block_number},
                            {"cert_id", cert_id(cert).hex()},
                            {"present", b->record.has_value()},
                            {"proof_nodes", b->proof.path_nodes.size()}}
                   .dump(2)
            << "\n";
    else
        out << "bundle for " << cert_id(cert).hex() << " at block " << b->block_number << " ("
            << (b->record ? "present" : "absent") << ", " << b->proof.path_nodes.size() << " proof nodes)\n";
}

struct VerifyOpts {
    std::string genesis;
    std::string headers;
    std::string bundle;
    std::string domain;
    std::optional<UnixSeconds> now;
    std::uint64_t freshness = 1;
    bool json = false;
};

int cmd_verify(const VerifyOpts& o, std::ostream& out, std::ostream& err)
{
    auto config = load_config(o.genesis);
    std::vector<BlockHeader> hs;
    HandshakeBundle bundle;
    try {
        hs = decode_headers(read_file(o.headers));
        bundle = decode_bundle(read_file(o.bundle));
    } catch (const DecodeError& e) {
        input_error(e.what());
    }
    if (hs.empty())
        input_error(o.headers + ": no headers");
    BlockHeader anchor;
    try {
        anchor = genesis_header(config, WorldState::genesis(config.genesis));
    } catch (const std::invalid_argument& e) {
        input_error(o.genesis + ": " + e.what());
    }
    if (hs[0] != anchor)
        ledger_error("header file does not start at this genesis");
    if (o.freshness == 0)
        throw CliError("usage", 2, "--freshness must be at least 1");
    LightClient client(anchor, o.freshness);
    if (auto r = client.sync_headers(std::span(hs).subspan(1)); !r)
        ledger_error(std::string("header chain rejected: ") + to_string(r.error()));

    auto now = o.now.value_or(client.header(client.tip())->timestamp);
    auto d = verify_handshake(client, o.domain, bundle, now);
    if (o.json)
        out << ordered_json{{"verdict", to_string(d.verdict)}, {"reason", to_string(d.reason)}, {"detail", d.detail}}
                   .dump(2)
            << "\n";
    else
        out << (d.accepted() ? "Accept" : std::string("Reject ") + to_string(d.reason)) << "\n";
    if (d.accepted())
        return 0;
    err << "error: verify: " << to_string(d.reason) << ": " << d.detail << "\n";
    return 1;
}

struct ScenarioOpts {
    std::string file;
    std::string report;
    std::string chain_out;
    bool json = false;
};

int cmd_run_scenario(const ScenarioOpts& o, std::ostream& out, std::ostream& err)
{
    sim::ScenarioReport r;
    try {
        r = sim::run_scenario(sim::config_from_json(read_text(o.file)));
    } catch (const sim::ConfigInvalid& e) {
        throw CliError("config", 3, o.file + ": " + e.what());
    }
    auto json = r.to_json();
    if (!o.report.empty())
        write_text(o.report, json);
    if (!o.chain_out.empty())
        write_file(o.chain_out, r.chain);
    std::size_t failed = 0;
    for (const auto& a : r.assertions)
        failed += a.passed ? 0 : 1;
    if (o.json) {
        out << json;
    } else {
        out << "scenario " << r.name << " seed " << r.seed << ": " << r.height << " blocks, " << r.events.size()
            << " events, " << r.handshakes.size() << " handshakes\n";
        for (const auto& a : r.assertions)
            out << (a.passed ? "PASS " : "FAIL ") << a.name << " (" << a.detail << ")\n";
        out << "final_state_root " << r.final_state_root.hex() << "\n";
    }
    if (failed == 0)
        return 0;
    err << "error: scenario: " << failed << " of " << r.assertions.size() << " assertions failed\n";
    return 1;
}

struct ExportOpts {
    Common node;
    std::string out;
    bool headers = false;
};

void cmd_export(const ExportOpts& o, std::ostream& out)
{
    auto node = load_node(o.node.genesis, o.node.chain);
    if (o.headers) {
        ByteWriter w;
        for (const auto& h : node.header_chain())
            w.raw(encode_header(h));
        write_file(o.out, std::move(w).bytes());
    } else {
        write_file(o.out, node.export_chain());
    }
    if (o.node.json)
        out << ordered_json{{"height", node.height()}, {"tip_hash", node.tip().hash().hex()}}.dump(2) << "\n";
    else
        out << "exported " << node.height() + 1 << (o.headers ? " headers" : " blocks") << " to " << o.out << "\n";
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"CertLedger: a ledger of TLS certificates with state proofs for light clients", "certledger"};
    app.require_subcommand(1);
    bool json = false;
    app.add_flag("--json", json, "machine-readable output");

    KeygenOpts keygen;
    auto* c_keygen = app.add_subcommand("keygen", "derive an Ed25519 key from a seed string");
    c_keygen->add_option("--seed", keygen.seed, "seed string; the same seed gives the same key")->required();
    c_keygen->add_option("--out", keygen.out, "key file to write");

    CaIssueOpts issue;
    std::optional<std::int64_t> issue_not_after;
    auto* c_issue = app.add_subcommand("ca-issue", "issue a self-signed CA certificate or a TLS certificate");
    c_issue->add_flag("--ca", issue.ca, "self-signed CA certificate for --key");
    c_issue->add_option("--key", issue.key, "signing key file (the CA's)")->required()->check(CLI::ExistingFile);
    c_issue->add_option("--name", issue.name, "CA common name");
    c_issue->add_option("--issuer-cert", issue.issuer_cert, "issuing CA certificate")->check(CLI::ExistingFile);
    c_issue->add_option("--subject-key", issue.subject_key, "key file of the certificate holder")
        ->check(CLI::ExistingFile);
    c_issue->add_option("--domain", issue.domains, "DNS name (repeatable)");
    c_issue->add_option("--serial", issue.serial, "serial number");
    c_issue->add_option("--not-before", issue.not_before, "unix seconds")->required();
    c_issue->add_option("--not-after", issue_not_after, "unix seconds");
    c_issue->add_option("--days", issue.days, "lifetime when --not-after is absent");
    c_issue->add_option("--out", issue.out, "certificate file to write");

    GenesisOpts gen;
    auto* c_genesis = app.add_subcommand("genesis", "write a genesis file");
    c_genesis->add_option("--board", gen.board, "board member key file (repeatable)")->required();
    c_genesis->add_option("--threshold", gen.threshold, "board signatures needed for governance")->required();
    c_genesis->add_option("--foundation", gen.foundation, "owner of the initial token supply")->required();
    c_genesis->add_option("--board-account", gen.board_account, "account that collects board fees")->required();
    c_genesis->add_option("--supply", gen.supply, "total token supply");
    c_genesis->add_option("--ca", gen.cas, "initially trusted CA certificate (repeatable)");
    c_genesis->add_option("--authority", gen.authorities, "block authority key file (repeatable, in order)")
        ->required();
    c_genesis->add_option("--genesis-time", gen.genesis_time, "unix seconds")->required();
    c_genesis->add_option("--block-time", gen.block_time, "seconds between blocks");
    c_genesis->add_option("--fee", gen.fees, "Kind=amount (repeatable)");
    c_genesis->add_option("--out", gen.out, "genesis file to write");

    SubmitOpts sub;
    auto* c_submit = app.add_subcommand("submit", "submit one transaction and produce the block holding it");
    add_node_options(c_submit, sub.node);
    c_submit->add_option("--authority", sub.authorities, "authority key files; the scheduled one signs")
        ->required();
    c_submit->add_option("--now", sub.now, "block timestamp (default: tip + block time)");
    c_submit->add_option("--events", sub.events, "event log to append to (JSON lines)");
    c_submit->add_option("--kind", sub.kind,
                         "AddTrustedCA, UntrustCA, AddTLSCert, RevokeCert, ReportFraud, PleadFraud, ResolveFraud "
                         "or TransferToken")
        ->required();
    c_submit->add_option("--key", sub.key, "sender key file")->required();
    c_submit->add_option("--nonce", sub.nonce, "override the sender's next nonce");
    c_submit->add_option("--board-key", sub.board_keys, "board member signing a governance tx (repeatable)");
    c_submit->add_option("--cert", sub.cert, "certificate to add or revoke");
    c_submit->add_option("--ca-cert", sub.ca_cert, "CA certificate to untrust or plead for");
    c_submit->add_option("--revoker-key", sub.revoker_key, "key signing the revocation (default: sender)");
    c_submit->add_option("--fake", sub.fake, "reported certificate");
    c_submit->add_option("--genuine", sub.genuine, "the reporter's own certificate for the same domain");
    c_submit->add_option("--evidence-key", sub.evidence_key, "key of the genuine certificate");
    c_submit->add_option("--report", sub.report, "fraud report index");
    c_submit->add_option("--document", sub.document, "plea evidence; its SHA-256 goes on the ledger");
    c_submit->add_option("--verdict", sub.verdict, "Upheld or Dismissed");
    c_submit->add_option("--to", sub.to, "recipient key file or address");
    c_submit->add_option("--amount", sub.amount, "tokens to transfer");

    QueryOpts query;
    auto* c_query = app.add_subcommand("query", "read state: height, cert, cas, account, search, reports, events");
    add_node_options(c_query, query.node);
    c_query->add_option("what", query.what, "what to show")
        ->required()
        ->check(CLI::IsMember({"height", "cert", "cas", "account", "search", "reports", "events"}));
    c_query->add_option("--cert", query.cert, "certificate file");
    c_query->add_option("--id", query.id, "certificate id (hex)");
    c_query->add_option("--account", query.account, "key file or address");
    c_query->add_option("--domain", query.domain, "domain to search or filter events by");
    c_query->add_option("--status", query.status, "NotRevoked or Revoked");

    ProveOpts prove;
    auto* c_prove = app.add_subcommand("prove", "write a handshake bundle for a certificate");
    add_node_options(c_prove, prove.node);
    c_prove->add_option("--cert", prove.cert, "certificate file")->required()->check(CLI::ExistingFile);
    c_prove->add_option("--block", prove.block, "block height (default: tip)");
    c_prove->add_option("--out", prove.out, "bundle file to write")->required();

    VerifyOpts verify;
    auto* c_verify = app.add_subcommand("verify", "check a handshake bundle as a light client would");
    c_verify->add_option("--genesis", verify.genesis, "genesis JSON file")->required()->check(CLI::ExistingFile);
    c_verify->add_option("--headers", verify.headers, "header file from export-chain --headers")
        ->required()
        ->check(CLI::ExistingFile);
    c_verify->add_option("--bundle", verify.bundle, "bundle file from prove")->required()->check(CLI::ExistingFile);
    c_verify->add_option("--domain", verify.domain, "domain being connected to")->required();
    c_verify->add_option("--now", verify.now, "unix seconds (default: tip timestamp)");
    c_verify->add_option("--freshness", verify.freshness, "freshness window in blocks");

    ScenarioOpts scen;
    auto* c_scen = app.add_subcommand("run-scenario", "run a simulation scenario file");
    c_scen->add_option("file", scen.file, "scenario JSON")->required()->check(CLI::ExistingFile);
    c_scen->add_option("--report", scen.report, "write the JSON report here");
    c_scen->add_option("--chain-out", scen.chain_out, "write the exported chain here");

    CapacityParams est;
    bool no_price = false;
    auto* c_est = app.add_subcommand("estimate", "storage and cost estimate");
    c_est->add_option("--domains", est.num_tls_domains, "number of TLS domains")->capture_default_str();
    c_est->add_option("--cert-size", est.cert_size_bytes, "bytes per certificate")->capture_default_str();
    c_est->add_option("--lifetime-days", est.avg_cert_lifetime_days, "average certificate lifetime")
        ->capture_default_str();
    c_est->add_option("--block-time", est.block_time_seconds, "seconds per block")->capture_default_str();
    c_est->add_option("--header-size", est.header_size_bytes, "bytes per block header")->capture_default_str();
    c_est->add_option("--horizon-days", est.horizon_days, "accumulation period")->capture_default_str();
    c_est->add_option("--price-per-gb", est.price_per_gb, "disk price in USD per GB");
    c_est->add_flag("--no-price", no_price, "omit the cost estimate");

    ExportOpts exp;
    auto* c_export = app.add_subcommand("export-chain", "validate the chain and write it, or just its headers");
    add_node_options(c_export, exp.node);
    c_export->add_option("--out", exp.out, "file to write")->required();
    c_export->add_flag("--headers", exp.headers, "write the 144-byte headers only, genesis first");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error: usage: " << e.what() << "\n";
        return 2;
    }

    try {
        if (c_keygen->parsed()) {
            cmd_keygen(keygen, json, out);
        } else if (c_issue->parsed()) {
            issue.not_after = issue_not_after;
            cmd_ca_issue(issue, json, out);
        } else if (c_genesis->parsed()) {
            cmd_genesis(gen, out);
        } else if (c_submit->parsed()) {
            sub.node.json = json;
            cmd_submit(sub, out);
        } else if (c_query->parsed()) {
            query.node.json = json;
            cmd_query(query, out);
        } else if (c_prove->parsed()) {
            prove.node.json = json;
            cmd_prove(prove, out);
        } else if (c_verify->parsed()) {
            verify.json = json;
            return cmd_verify(verify, out, err);
        } else if (c_scen->parsed()) {
            scen.json = json;
            return cmd_run_scenario(scen, out, err);
        } else if (c_est->parsed()) {
            if (no_price)
                est.price_per_gb.reset();
            CapacityReport r;
            try {
                r = estimate_capacity(est);
            } catch (const std::invalid_argument& e) {
                throw CliError("usage", 2, e.what());
            }
            out << (json ? capacity_report_json(r) : capacity_report_text(r));
        } else if (c_export->parsed()) {
            exp.node.json = json;
            cmd_export(exp, out);
        }
    } catch (const CliError& e) {
        err << "error: " << e.category << ": " << e.what() << "\n";
        return e.code;
    } catch (const DecodeError& e) {
        err << "error: input: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        err << "error: internal: " << e.what() << "\n";
        return 3;
    }
    return 0;
}

}  // namespace certledger
