#include "certledger/sim.hpp"

#include <json.hpp>

#include <algorithm>
#include <random>
#include <set>

namespace certledger::sim {

using nlohmann::ordered_json;
using json = nlohmann::json;

namespace {

constexpr std::uint64_t genesis_supply = 1'000'000'000;
constexpr std::uint64_t starting_balance = 1'000'000;

const std::set<std::string> action_kinds{
    "issue", "add",   "revoke",   "handshake",  "untrust",  "report_fraud",       "plead",
    "resolve", "transfer", "watch", "check_cert", "check_ca", "check_notification", "idle",
};

bool is_tx_action(const std::string& k)
{
    return k == "add" || k == "revoke" || k == "untrust" || k == "report_fraud" || k == "plead" ||
           k == "resolve" || k == "transfer";
}

std::optional<EventKind> event_kind_from_string(std::string_view s)
{
    for (int k = 1; k <= 7; ++k)
        if (s == to_string(static_cast<EventKind>(k)))
            return static_cast<EventKind>(k);
    return std::nullopt;
}

bool contains(const std::vector<std::string>& v, const std::string& s)
{
    return std::find(v.begin(), v.end(), s) != v.end();
}

bool contains(const std::vector<std::size_t>& v, std::size_t x)
{
    return std::find(v.begin(), v.end(), x) != v.end();
}

struct InvariantTally {
    std::size_t checks = 0;
    std::size_t failures = 0;
    std::string first_failure;

    void record(bool ok, const std::string& what)
    {
        ++checks;
        if (!ok && failures++ == 0)
            first_failure = what;
    }
};

const char* const invariant_names[] = {
    "forkless", "replay", "conservation", "cascade", "watcher_lag", "watcher_complete", "split_world",
    "handshake_consistency",
};

class Engine {
public:
    explicit Engine(const ScenarioConfig& cfg) : cfg_(cfg), rng_(cfg.seed)
    {
        validate_actors();
        for (std::uint32_t i = 0; i < cfg.board_members; ++i)
            board_.push_back(key("board-" + std::to_string(i)));
        for (std::size_t i = 0; i < cfg.authorities; ++i)
            authorities_.push_back(key("authority-" + std::to_string(i)));
        foundation_ = key("foundation");
        board_account_ = key("board-account");
        adversary_ = key("adversary");
        stranger_ = key("stranger");
        for (std::size_t i = 0; i < cfg.cas; ++i) {
            ca_keys_.push_back(key("ca-" + std::to_string(i)));
            ca_certs_.push_back(issue_ca_certificate(ca_keys_.back(), "Sim CA " + std::to_string(i),
                                                     serial_from_number(i + 1),
                                                     cfg.genesis_time - 1000 * seconds_per_day,
                                                     cfg.genesis_time + 4000 * seconds_per_day));
        }
        for (const auto& d : cfg.domains)
            owners_.emplace(d, key("owner:" + d));

        schedule_ = cfg.schedule;
        std::stable_sort(schedule_.begin(), schedule_.end(),
                         [](const Action& a, const Action& b) { return a.tick < b.tick; });
        if (cfg.random.blocks > 0)
            generate_random();
        validate_schedule();
    }

    ScenarioReport run()
    {
        ChainConfig cc;
        for (const auto& b : board_)
            cc.genesis.board_keys.push_back(b.public_key());
        cc.genesis.threshold = cfg_.board_threshold;
        cc.genesis.foundation_key = foundation_.public_key();
        cc.genesis.board_account_key = board_account_.public_key();
        cc.genesis.total_supply = genesis_supply;
        cc.genesis.fee_schedule = cfg_.fees;
        cc.genesis.initial_cas = ca_certs_;
        for (const auto& a : authorities_)
            cc.authorities.push_back(a.public_key());
        cc.genesis_time = cfg_.genesis_time;
        cc.block_time = cfg_.block_time;
        try {
            node_.emplace(cc);
            follower_.emplace(cc);
        } catch (const std::invalid_argument& e) {
            throw ConfigInvalid(std::string("genesis: ") + e.what());
        }
        for (std::size_t i = 0; i < cfg_.clients; ++i)
            clients_.emplace_back(node_->block(0).header, cfg_.freshness_window);
        for (const auto& d : watch_from_start_)
            watchers_.emplace_back(std::vector<std::string>{d});

        // Tick 0: the foundation funds every actor.
        std::vector<std::string> accounts{"adversary", "stranger"};
        for (std::size_t i = 0; i < cfg_.cas; ++i)
            accounts.push_back("ca:" + std::to_string(i));
        for (const auto& d : cfg_.domains)
            accounts.push_back("owner:" + d);
        std::uint64_t n = 0;
        for (const auto& a : accounts)
            (void)node_->submit(make_transaction(foundation_, n++, TxKind::TransferToken,
                                                 TransferPayload{account_address(account(a).public_key()),
                                                                 starting_balance}));
        advance();

        std::size_t i = 0;
        const std::uint64_t last_tick = schedule_.empty() ? 0 : schedule_.back().tick;
        for (std::uint64_t tick = 1; tick <= last_tick; ++tick) {
            std::size_t end = i;
            while (end < schedule_.size() && schedule_[end].tick == tick)
                ++end;
            run_tick(tick, i, end);
            i = end;
        }
        return finish();
    }

private:
    struct CertInfo {
        Certificate cert;
        crypto::KeyPair key;
        std::string holder;  // account name
        std::string domain;
        std::size_t ca = 0;
    };

    struct PendingTx {
        std::size_t outcome;
        Hash256 id;
    };

    crypto::KeyPair key(const std::string& label) const
    {
        return crypto::KeyPair::from_seed(sha256("certledger-sim/" + std::to_string(cfg_.seed) + "/" + label));
    }

    const crypto::KeyPair& account(const std::string& name) const
    {
        if (name == "adversary")
            return adversary_;
        if (name == "stranger")
            return stranger_;
        if (name == "foundation")
            return foundation_;
        if (name.starts_with("ca:")) {
            auto i = std::stoul(name.substr(3));
            return ca_keys_.at(i);
        }
        if (name.starts_with("owner:")) {
            auto it = owners_.find(name.substr(6));
            if (it != owners_.end())
                return it->second;
        }
        throw ConfigInvalid("unknown account " + name);
    }

    bool valid_account(const std::string& name) const
    {
        try {
            (void)account(name);
            return true;
        } catch (const std::exception&) {
            return false;
        }
    }

    void validate_actors()
    {
        if (cfg_.board_threshold == 0 || cfg_.board_threshold > cfg_.board_members)
            throw ConfigInvalid("board threshold must be in [1, members]");
        if (cfg_.authorities == 0)
            throw ConfigInvalid("need at least one authority");
        if (cfg_.cas == 0)
            throw ConfigInvalid("need at least one CA");
        if (cfg_.domains.empty())
            throw ConfigInvalid("need at least one domain");
        if (std::set(cfg_.domains.begin(), cfg_.domains.end()).size() != cfg_.domains.size())
            throw ConfigInvalid("duplicate domain");
        if (cfg_.clients == 0)
            throw ConfigInvalid("need at least one light client");
        if (cfg_.freshness_window == 0)
            throw ConfigInvalid("freshness_window must be at least 1");
        if (cfg_.block_time <= 0)
            throw ConfigInvalid("block_time must be positive");
        for (auto c : cfg_.adversary.controls_ca)
            if (c >= cfg_.cas)
                throw ConfigInvalid("adversary controls unknown CA " + std::to_string(c));
        for (const auto& d : cfg_.watch)
            if (!contains(cfg_.domains, d))
                throw ConfigInvalid("watched domain not in domains: " + d);
        watch_from_start_ = cfg_.watch;
    }

    // Static checks, so a bad schedule fails before anything runs.
    void validate_schedule()
    {
        std::map<std::string, std::string> holder;  // label -> holder account
        std::uint32_t reports = 0;
        for (std::size_t i = 0; i < schedule_.size(); ++i) {
            const auto& a = schedule_[i];
            auto bad = [&](const std::string& why) {
                throw ConfigInvalid("action " + std::to_string(i) + " (" + a.kind + " at tick " +
                                    std::to_string(a.tick) + "): " + why);
            };
            if (!action_kinds.contains(a.kind))
                bad("unknown action");
            if (a.tick == 0)
                bad("ticks start at 1");
            auto need_label = [&](const std::string& l) {
                if (!holder.contains(l))
                    bad("unknown certificate label '" + l + "'");
            };
            auto need_ca = [&] {
                if (!a.ca || *a.ca >= cfg_.cas)
                    bad("missing or unknown ca");
            };
            auto need_signers = [&] {
                if (a.signers && *a.signers > cfg_.board_members)
                    bad("more signers than board members");
            };
            if (!a.domain.empty() && !contains(cfg_.domains, a.domain))
                bad("unknown domain " + a.domain);
            if (a.client && *a.client >= cfg_.clients)
                bad("unknown client");

            if (a.kind == "issue") {
                if (a.label.empty() || holder.contains(a.label))
                    bad("issue needs a fresh label");
                if (a.domain.empty())
                    bad("issue needs a domain");
                need_ca();
                if (a.lifetime_days == 0)
                    bad("lifetime_days must be positive");
                if (a.to == "adversary") {
                    if (!cfg_.adversary.holds_fake_cert && !contains(cfg_.adversary.controls_ca, *a.ca))
                        bad("adversary cannot obtain certificates (holds_fake_cert or controls_ca needed)");
                    holder[a.label] = "adversary";
                } else if (a.to.empty() || a.to == "owner") {
                    holder[a.label] = "owner:" + a.domain;
                } else {
                    bad("issue to must be owner or adversary");
                }
            } else if (a.kind == "add") {
                need_label(a.label);
                if (!a.by.empty() && a.by != "holder" && a.by != "issuer")
                    bad("add by must be holder or issuer");
            } else if (a.kind == "revoke") {
                need_label(a.label);
                if (a.by == "adversary") {
                    if (holder[a.label] != "adversary" && !contains(cfg_.adversary.compromised_certs, a.label))
                        bad("adversary does not hold the key of " + a.label);
                } else if (!a.by.empty() && a.by != "holder" && a.by != "issuer" && a.by != "stranger") {
                    bad("unknown revoker " + a.by);
                }
            } else if (a.kind == "handshake") {
                need_label(a.label);
                if (a.serve == "alternate") {
                    if (!cfg_.adversary.controls_victim_path)
                        bad("serving alternate proofs needs controls_victim_path");
                } else if (a.serve != "honest") {
                    bad("serve must be honest or alternate");
                }
            } else if (a.kind == "untrust") {
                need_ca();
                need_signers();
            } else if (a.kind == "report_fraud") {
                need_label(a.label);
                need_label(a.other);
                ++reports;
            } else if (a.kind == "plead") {
                need_ca();
                if (!a.report)
                    bad("plead needs a report index");
            } else if (a.kind == "resolve") {
                if (!a.report)
                    bad("resolve needs a report index");
                if (a.verdict != "Upheld" && a.verdict != "Dismissed")
                    bad("verdict must be Upheld or Dismissed");
                need_signers();
            } else if (a.kind == "transfer") {
                if (!valid_account(a.by) || !valid_account(a.to))
                    bad("transfer needs valid by and to accounts");
            } else if (a.kind == "watch") {
                if (a.domain.empty())
                    bad("watch needs a domain");
            } else if (a.kind == "check_cert") {
                need_label(a.label);
                if (a.status != "NotRevoked" && a.status != "Revoked" && a.status != "Absent")
                    bad("status must be NotRevoked, Revoked or Absent");
            } else if (a.kind == "check_ca") {
                need_ca();
                if (a.status != "Trusted" && a.status != "Untrusted")
                    bad("status must be Trusted or Untrusted");
            } else if (a.kind == "check_notification") {
                need_label(a.label);
                if (a.domain.empty() || !event_kind_from_string(a.event))
                    bad("check_notification needs a domain and an event kind");
            }
        }
        (void)reports;
    }

    void generate_random()
    {
        std::uint64_t start = schedule_.empty() ? 1 : schedule_.back().tick + 1;
        std::vector<std::string> labels;
        std::size_t untrusts = 0;
        auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); };
        for (const auto& d : cfg_.domains)
            if (!contains(watch_from_start_, d))
                watch_from_start_.push_back(d);
        for (std::uint64_t b = 0; b < cfg_.random.blocks; ++b) {
            for (std::uint64_t j = 0; j < cfg_.random.actions_per_block; ++j) {
                Action a;
                a.tick = start + b;
                auto r = pick(100);
                if (r < 35 || labels.empty()) {
                    a.kind = "issue";
                    a.label = "r" + std::to_string(labels.size());
                    a.domain = cfg_.domains[pick(cfg_.domains.size())];
                    a.ca = pick(cfg_.cas);
                    a.lifetime_days = 1 + pick(30);
                    labels.push_back(a.label);
                } else if (r < 50) {
                    a.kind = "revoke";
                    a.label = labels[pick(labels.size())];
                    a.by = pick(5) == 0 ? "stranger" : "holder";
                } else if (r < 85) {
                    a.kind = "handshake";
                    a.label = labels[pick(labels.size())];
                    a.client = pick(cfg_.clients);
                    if (pick(10) == 0)
                        a.domain = cfg_.domains[pick(cfg_.domains.size())];
                    if (cfg_.adversary.controls_victim_path && pick(10) == 0)
                        a.serve = "alternate";
                    if (pick(10) == 0)
                        a.lag = 1;
                } else if (r < 97) {
                    a.kind = "transfer";
                    a.by = "owner:" + cfg_.domains[pick(cfg_.domains.size())];
                    a.to = "owner:" + cfg_.domains[pick(cfg_.domains.size())];
                    a.amount = pick(50);
                } else if (r < 98 && b > cfg_.random.blocks / 2 && untrusts + 1 < cfg_.cas) {
                    a.kind = "untrust";
                    a.ca = pick(cfg_.cas);
                    ++untrusts;
                } else {
                    a.kind = "idle";
                }
                schedule_.push_back(std::move(a));
            }
        }
    }

    std::uint64_t next_nonce(const crypto::KeyPair& k)
    {
        auto addr = account_address(k.public_key());
        return node_->state().account(addr).nonce + pending_nonce_[addr]++;
    }

    template <class P>
    Transaction tx(const crypto::KeyPair& sender, TxKind kind, const P& payload)
    {
        return make_transaction(sender, next_nonce(sender), kind, payload);
    }

    template <class P>
    Transaction governed(TxKind kind, const P& payload, std::optional<std::size_t> signers)
    {
        auto t = tx(board_[0], kind, payload);
        auto n = signers.value_or(cfg_.board_threshold);
        for (std::size_t i = 0; i < n; ++i)
            t.add_board_signature(board_[i]);
        return t;
    }

    std::size_t add_outcome(std::uint64_t tick, std::size_t index, const Action& a, std::string status,
                            std::string detail = {})
    {
        report_.outcomes.push_back({tick, index, a.kind, std::move(status), std::move(detail)});
        return report_.outcomes.size() - 1;
    }

    void expect(std::size_t outcome, const Action& a)
    {
        if (a.expect.empty())
            return;
        const auto& o = report_.outcomes[outcome];
        report_.assertions.push_back({"tick " + std::to_string(o.tick) + " #" + std::to_string(o.index) + " " +
                                          o.kind + " expects " + a.expect,
                                      o.status == a.expect, "got " + o.status});
    }

    void check(std::uint64_t tick, std::size_t index, const Action& a, bool ok, const std::string& detail)
    {
        auto o = add_outcome(tick, index, a, ok ? "pass" : "fail", detail);
        report_.assertions.push_back({"tick " + std::to_string(tick) + " #" + std::to_string(index) + " " + a.kind +
                                          (a.label.empty() ? "" : " " + a.label),
                                      ok, report_.outcomes[o].detail});
    }

    Certificate issue(const Action& a, std::uint64_t serial)
    {
        auto subject = key("cert:" + a.label);
        auto nb = node_->tip().timestamp - seconds_per_day;
        auto cert = issue_tls_certificate(ca_certs_[*a.ca], ca_keys_[*a.ca], subject.public_key(), {a.domain},
                                          serial_from_number(1000 + serial), nb,
                                          nb + static_cast<UnixSeconds>(a.lifetime_days) * seconds_per_day);
        certs_[a.label] = CertInfo{cert, subject, a.to == "adversary" ? "adversary" : "owner:" + a.domain,
                                   a.domain, *a.ca};
        return cert;
    }

    std::optional<Transaction> build_tx(const Action& a)
    {
        if (a.kind == "issue" || a.kind == "add") {
            const auto& info = certs_.at(a.label);
            const auto& sender = a.by == "issuer" ? ca_keys_[info.ca] : account(info.holder);
            return tx(sender, TxKind::AddTLSCert, AddTLSCertPayload{info.cert});
        }
        if (a.kind == "revoke") {
            const auto& info = certs_.at(a.label);
            auto id = cert_id(info.cert);
            auto msg = revocation_message(id);
            if (a.by == "issuer")
                return tx(ca_keys_[info.ca], TxKind::RevokeCert, RevokeCertPayload{id, ca_keys_[info.ca].sign(msg)});
            if (a.by == "adversary")
                return tx(adversary_, TxKind::RevokeCert, RevokeCertPayload{id, info.key.sign(msg)});
            if (a.by == "stranger")
                return tx(stranger_, TxKind::RevokeCert, RevokeCertPayload{id, stranger_.sign(msg)});
            return tx(account(info.holder), TxKind::RevokeCert, RevokeCertPayload{id, info.key.sign(msg)});
        }
        if (a.kind == "untrust")
            return governed(TxKind::UntrustCA, UntrustCAPayload{cert_id(ca_certs_[*a.ca])}, a.signers);
        if (a.kind == "report_fraud") {
            const auto& fake = certs_.at(a.label);
            const auto& genuine = certs_.at(a.other);
            const auto& reporter = account(genuine.holder);
            auto fid = cert_id(fake.cert);
            auto gid = cert_id(genuine.cert);
            auto sig = genuine.key.sign(fraud_evidence_message(fid, gid, account_address(reporter.public_key())));
            return tx(reporter, TxKind::ReportFraud, ReportFraudPayload{fid, gid, sig});
        }
        if (a.kind == "plead") {
            const auto& k = ca_keys_[*a.ca];
            auto doc = sha256("issuance record for report " + std::to_string(*a.report));
            return tx(k, TxKind::PleadFraud,
                      PleadFraudPayload{*a.report, cert_id(ca_certs_[*a.ca]), doc, k.sign(plea_message(*a.report, doc))});
        }
        if (a.kind == "resolve") {
            auto v = a.verdict == "Upheld" ? Resolution::Upheld : Resolution::Dismissed;
            return governed(TxKind::ResolveFraud, ResolveFraudPayload{*a.report, v}, a.signers);
        }
        if (a.kind == "transfer")
            return tx(account(a.by), TxKind::TransferToken,
                      TransferPayload{account_address(account(a.to).public_key()), a.amount});
        return std::nullopt;
    }

    void run_tick(std::uint64_t tick, std::size_t begin, std::size_t end)
    {
        pending_nonce_.clear();
        std::vector<PendingTx> pending;
        for (std::size_t i = begin; i < end; ++i) {
            const auto& a = schedule_[i];
            if (a.kind == "issue") {
                issue(a, i);
                if (!a.submit) {
                    expect(add_outcome(tick, i, a, "done", "held privately"), a);
                    continue;
                }
            } else if (a.kind == "watch") {
                watchers_.emplace_back(std::vector<std::string>{a.domain}, node_->events().size());
                expect(add_outcome(tick, i, a, "done"), a);
                continue;
            }
            if (a.kind != "issue" && !is_tx_action(a.kind))
                continue;
            auto t = build_tx(a);
            auto submitted = node_->submit(*t);
            if (!submitted) {
                expect(add_outcome(tick, i, a, std::string("rejected:") + to_string(submitted.error())), a);
                continue;
            }
            pending.push_back({add_outcome(tick, i, a, "pending"), *submitted});
        }

        auto out = advance();

        for (const auto& p : pending) {
            auto& o = report_.outcomes[p.outcome];
            bool included = std::any_of(out.block.transactions.begin(), out.block.transactions.end(),
                                        [&](const Transaction& t) { return t.id() == p.id; });
            if (included) {
                o.status = "included";
            } else {
                auto s = std::find_if(out.skipped.begin(), out.skipped.end(),
                                      [&](const SkippedTx& s) { return s.tx_id == p.id; });
                o.status = s == out.skipped.end() ? "skipped:?" : std::string("skipped:") + to_string(s->reason);
            }
            o.detail = "block " + std::to_string(out.block.header.number);
            expect(p.outcome, schedule_[o.index]);
        }

        for (std::size_t i = begin; i < end; ++i) {
            const auto& a = schedule_[i];
            if (a.kind == "handshake")
                handshake(tick, i, a);
            else if (a.kind == "check_cert")
                check_cert(tick, i, a);
            else if (a.kind == "check_ca")
                check_ca(tick, i, a);
            else if (a.kind == "check_notification")
                check_notification(tick, i, a);
            else if (a.kind == "idle")
                add_outcome(tick, i, a, "done");
        }
    }

    // Produces one block and runs every per-block invariant.
    BlockOutcome advance()
    {
        const auto& proposer = authorities_[node_->height() % authorities_.size()];
        auto prev_tip = node_->tip();
        auto produced = node_->produce(proposer);
        if (!produced)
            throw std::logic_error(std::string("scheduled proposer failed: ") + to_string(produced.error()));
        auto out = *produced;
        // Submissions live for one block; whatever is left is dropped.
        for (const auto& t : node_->pool().ordered())
            node_->pool().remove(t.id());

        const auto& h = node_->tip();
        tally("forkless").record(h.number == prev_tip.number + 1 && h.parent_hash == prev_tip.hash() &&
                                     node_->height() == h.number,
                                 "block " + std::to_string(h.number) + " does not extend the previous tip");

        auto replay = follower_->append(out.block);
        tally("replay").record(replay.has_value() && follower_->state().root() == h.state_root,
                               "independent replay of block " + std::to_string(h.number) + " failed");

        const auto& st = node_->state();
        tally("conservation").record(st.total_balance() == st.token().total_supply,
                                     "balances diverge from supply at block " + std::to_string(h.number));

        auto cas = st.trusted_cas();
        for (const auto& [ca_id, entry] : cas.entries) {
            if (entry.status != TrustStatus::Untrusted)
                continue;
            for (const auto& id : st.issued_by(ca_id)) {
                auto rec = st.certificate(id);
                tally("cascade").record(rec && rec->status == CertStatus::Revoked,
                                        "live certificate " + id.hex() + " from untrusted CA");
            }
        }

        for (auto& c : clients_) {
            std::vector<BlockHeader> hs{h};
            auto r = c.sync_headers(hs);
            if (!r)
                throw std::logic_error("light client rejected a consensus header");
        }
        for (auto& w : watchers_) {
            auto before = w.delivered().size();
            w.poll(*node_);
            for (auto i = before; i < w.delivered().size(); ++i) {
                const auto& n = w.delivered()[i];
                tally("watcher_lag").record(n.delivered_at - n.event.block_number <= 1,
                                            "notification for block " + std::to_string(n.event.block_number) +
                                                " delivered at " + std::to_string(n.delivered_at));
            }
        }
        return out;
    }

    HandshakeBundle alternate_bundle(const CertInfo& info, std::uint64_t block, bool& identical)
    {
        const auto& consensus = node_->state_at(block);
        auto addr = address::certificate(cert_id(info.cert));
        auto record = encode_record(CertRecord{info.cert, CertStatus::NotRevoked, block, std::nullopt});
        StateTrie alt;
        switch (std::uniform_int_distribution<int>(0, 2)(rng_)) {
        case 0:
            alt = consensus.trie().insert(addr, record);
            break;
        case 1:
            alt = StateTrie{}.insert(addr, record);
            break;
        default: {
            alt = consensus.trie().insert(addr, record);
            auto pads = 1 + rng_() % 4;
            for (std::uint64_t i = 0; i < pads; ++i)
                alt = alt.insert(sha256("pad-" + std::to_string(rng_())), Bytes{0x04, 0x00});
            break;
        }
        }
        identical = alt.root_hash() == consensus.root();
        HandshakeBundle b;
        b.certificate = info.cert;
        b.block_number = block;
        b.proof = alt.prove(addr);
        b.record = b.proof.value;
        return b;
    }

    // What an honest handshake at the tip must conclude, computed from the
    // full node's state instead of from a proof.
    HandshakeReason expected_reason(const CertInfo& info, const std::string& domain, UnixSeconds now) const
    {
        if (!info.cert.covers(domain))
            return HandshakeReason::DomainMismatch;
        if (now < info.cert.not_before || now > info.cert.not_after)
            return HandshakeReason::OutsideValidity;
        auto rec = node_->state().certificate(cert_id(info.cert));
        if (!rec)
            return HandshakeReason::AbsentFromLedger;
        if (rec->status == CertStatus::Revoked)
            return HandshakeReason::Revoked;
        return HandshakeReason::Ok;
    }

    void handshake(std::uint64_t tick, std::size_t index, const Action& a)
    {
        const auto& info = certs_.at(a.label);
        const auto domain = a.domain.empty() ? info.domain : a.domain;
        const auto tip = node_->height();
        const auto block = a.lag > tip ? 0 : tip - a.lag;
        const auto now = node_->tip().timestamp;

        std::vector<std::size_t> targets;
        if (a.client)
            targets.push_back(*a.client);
        else
            for (std::size_t c = 0; c < clients_.size(); ++c)
                targets.push_back(c);

        std::map<std::string, std::size_t> statuses;
        for (auto c : targets) {
            bool identical = false;
            auto bundle = a.serve == "alternate" ? alternate_bundle(info, block, identical)
                                                 : *retrieve_state_proof(*node_, info.cert, block);
            // The bundle crosses the wire in its canonical encoding.
            auto received = decode_bundle(encode_bundle(bundle));
            auto d = verify_handshake(clients_[c], domain, received, now);
            std::string serve = a.serve == "alternate" && identical ? "alternate-identical" : a.serve;
            report_.handshakes.push_back(
                {tick, c, a.label, domain, block, serve, to_string(d.verdict), to_string(d.reason)});
            std::string status = d.accepted() ? "Accept" : std::string("Reject:") + to_string(d.reason);
            ++statuses[status];

            if (serve == "alternate")
                tally("split_world").record(!d.accepted(), "alternate-state proof accepted at tick " +
                                                               std::to_string(tick));
            if (a.serve == "honest" && a.lag == 0) {
                auto want = expected_reason(info, domain, now);
                tally("handshake_consistency")
                    .record(d.reason == want, "tick " + std::to_string(tick) + " " + a.label + ": got " +
                                                  to_string(d.reason) + ", state says " + to_string(want));
            }
        }
        std::string status = statuses.size() == 1 ? statuses.begin()->first : "mixed";
        std::string detail = std::to_string(targets.size()) + " client(s) at block " + std::to_string(block);
        auto o = add_outcome(tick, index, a, status, detail);
        expect(o, a);
    }

    void check_cert(std::uint64_t tick, std::size_t index, const Action& a)
    {
        auto rec = node_->state().certificate(cert_id(certs_.at(a.label).cert));
        std::string actual = rec ? to_string(rec->status) : "Absent";
        check(tick, index, a, actual == a.status, "status " + actual);
    }

    void check_ca(std::uint64_t tick, std::size_t index, const Action& a)
    {
        auto cas = node_->state().trusted_cas();
        const auto* e = cas.find(cert_id(ca_certs_[*a.ca]));
        std::string actual = e ? to_string(e->status) : "Absent";
        check(tick, index, a, actual == a.status, "status " + actual);
    }

    void check_notification(std::uint64_t tick, std::size_t index, const Action& a)
    {
        auto kind = *event_kind_from_string(a.event);
        auto id = cert_id(certs_.at(a.label).cert);
        std::optional<std::uint64_t> lag;
        for (const auto& w : watchers_) {
            if (!contains(w.domains(), a.domain))
                continue;
            for (const auto& n : w.delivered())
                if (n.event.kind == kind && n.event.subject == id)
                    lag = n.delivered_at - n.event.block_number;
        }
        check(tick, index, a, lag && *lag <= 1,
              lag ? a.event + " delivered " + std::to_string(*lag) + " block(s) after inclusion"
                  : "no " + a.event + " notification on " + a.domain);
    }

    InvariantTally& tally(const std::string& name) { return invariants_[name]; }

    ScenarioReport finish()
    {
        for (const auto& w : watchers_) {
            std::vector<Event> slice(node_->events().begin() + static_cast<std::ptrdiff_t>(w.start()),
                                     node_->events().end());
            std::vector<Event> want;
            for (const auto& d : w.domains())
                for (auto& e : watch_events(slice, d))
                    want.push_back(e);
            std::vector<Event> got;
            for (const auto& n : w.delivered())
                got.push_back(n.event);
            tally("watcher_complete").record(got == want, "watcher for " + w.domains()[0] + " missed events");
            for (const auto& n : w.delivered())
                report_.notifications.push_back(n);
        }
        for (const char* name : invariant_names) {
            const auto& t = invariants_[name];
            report_.assertions.push_back({std::string("invariant ") + name, t.failures == 0,
                                          t.failures == 0 ? std::to_string(t.checks) + " checks"
                                                          : std::to_string(t.failures) + "/" +
                                                                std::to_string(t.checks) + " failed; first: " +
                                                                t.first_failure});
        }
        report_.name = cfg_.name;
        report_.seed = cfg_.seed;
        report_.events = node_->events();
        report_.final_state_root = node_->state().root();
        report_.tip_hash = node_->tip().hash();
        report_.height = node_->height();
        report_.chain = node_->export_chain();
        return std::move(report_);
    }

    const ScenarioConfig& cfg_;
    std::mt19937_64 rng_;
    std::vector<crypto::KeyPair> board_, authorities_;
    crypto::KeyPair foundation_, board_account_, adversary_, stranger_;
    std::vector<crypto::KeyPair> ca_keys_;
    std::vector<Certificate> ca_certs_;
    std::map<std::string, crypto::KeyPair> owners_;
    std::map<std::string, CertInfo> certs_;
    std::vector<Action> schedule_;
    std::vector<std::string> watch_from_start_;
    std::optional<FullNode> node_, follower_;
    std::vector<LightClient> clients_;
    std::vector<EventWatcher> watchers_;
    std::map<Address, std::uint64_t> pending_nonce_;
    std::map<std::string, InvariantTally> invariants_;
    ScenarioReport report_;
};

// ---- JSON ----

template <class T>
void take(const json& j, const char* key, T& out)
{
    if (j.contains(key))
        out = j.at(key).get<T>();
}

template <class T>
void take(const json& j, const char* key, std::optional<T>& out)
{
    if (j.contains(key))
        out = j.at(key).get<T>();
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& where)
{
    for (const auto& [k, v] : j.items())
        if (std::none_of(known.begin(), known.end(), [&](const char* n) { return k == n; }))
            throw ConfigInvalid("unknown key '" + k + "' in " + where);
}

Action action_from_json(const json& j, std::size_t i)
{
    if (!j.is_object())
        throw ConfigInvalid("schedule entry " + std::to_string(i) + " is not an object");
    reject_unknown(j,
                   {"tick", "do", "label", "other", "domain", "ca", "to", "by", "submit", "lifetime_days", "client",
                    "serve", "lag", "report", "verdict", "signers", "amount", "status", "event", "expect"},
                   "schedule entry " + std::to_string(i));
    Action a;
    take(j, "tick", a.tick);
    take(j, "do", a.kind);
    take(j, "label", a.label);
    take(j, "other", a.other);
    take(j, "domain", a.domain);
    take(j, "ca", a.ca);
    take(j, "to", a.to);
    take(j, "by", a.by);
    take(j, "submit", a.submit);
    take(j, "lifetime_days", a.lifetime_days);
    take(j, "client", a.client);
    take(j, "serve", a.serve);
    take(j, "lag", a.lag);
    take(j, "report", a.report);
    take(j, "verdict", a.verdict);
    take(j, "signers", a.signers);
    take(j, "amount", a.amount);
    take(j, "status", a.status);
    take(j, "event", a.event);
    take(j, "expect", a.expect);
    return a;
}

ordered_json action_to_json(const Action& a)
{
    ordered_json j;
    const Action d;
    j["tick"] = a.tick;
    j["do"] = a.kind;
    auto str = [&](const char* k, const std::string& v) {
        if (!v.empty())
            j[k] = v;
    };
    str("label", a.label);
    str("other", a.other);
    str("domain", a.domain);
    if (a.ca)
        j["ca"] = *a.ca;
    str("to", a.to);
    str("by", a.by);
    if (a.submit != d.submit)
        j["submit"] = a.submit;
    if (a.lifetime_days != d.lifetime_days)
        j["lifetime_days"] = a.lifetime_days;
    if (a.client)
        j["client"] = *a.client;
    if (a.serve != d.serve)
        j["serve"] = a.serve;
    if (a.lag)
        j["lag"] = a.lag;
    if (a.report)
        j["report"] = *a.report;
    str("verdict", a.verdict);
    if (a.signers)
        j["signers"] = *a.signers;
    if (a.amount)
        j["amount"] = a.amount;
    str("status", a.status);
    str("event", a.event);
    str("expect", a.expect);
    return j;
}

ordered_json event_json(const Event& e) { return ordered_json::parse(event_to_json_line(e)); }

}  // namespace

ScenarioConfig config_from_json(std::string_view text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigInvalid(std::string("scenario is not valid JSON: ") + e.what());
    }
    if (!j.is_object())
        throw ConfigInvalid("scenario must be a JSON object");
    try {
        reject_unknown(j,
                       {"name", "seed", "genesis_time", "block_time", "board", "authorities", "cas", "domains",
                        "clients", "freshness_window", "fees", "adversary", "watch", "schedule", "random"},
                       "scenario");
        ScenarioConfig c;
        take(j, "name", c.name);
        take(j, "seed", c.seed);
        take(j, "genesis_time", c.genesis_time);
        take(j, "block_time", c.block_time);
        if (j.contains("board")) {
            const auto& b = j["board"];
            reject_unknown(b, {"threshold", "members"}, "board");
            take(b, "threshold", c.board_threshold);
            take(b, "members", c.board_members);
        }
        take(j, "authorities", c.authorities);
        take(j, "cas", c.cas);
        take(j, "domains", c.domains);
        take(j, "clients", c.clients);
        take(j, "freshness_window", c.freshness_window);
        if (j.contains("fees")) {
            for (const auto& [name, amount] : j["fees"].items()) {
                auto k = tx_kind_from_string(name);
                if (!k)
                    throw ConfigInvalid("unknown transaction kind in fees: " + name);
                c.fees[*k] = amount.get<std::uint64_t>();
            }
        }
        if (j.contains("adversary")) {
            const auto& a = j["adversary"];
            reject_unknown(a, {"holds_fake_cert", "controls_ca", "controls_victim_path", "compromised_certs"},
                           "adversary");
            take(a, "holds_fake_cert", c.adversary.holds_fake_cert);
            take(a, "controls_ca", c.adversary.controls_ca);
            take(a, "controls_victim_path", c.adversary.controls_victim_path);
            take(a, "compromised_certs", c.adversary.compromised_certs);
        }
        take(j, "watch", c.watch);
        if (j.contains("random")) {
            const auto& r = j["random"];
            reject_unknown(r, {"blocks", "actions_per_block"}, "random");
            take(r, "blocks", c.random.blocks);
            take(r, "actions_per_block", c.random.actions_per_block);
        }
        if (j.contains("schedule")) {
            std::size_t i = 0;
            for (const auto& a : j["schedule"])
                c.schedule.push_back(action_from_json(a, i++));
        }
        return c;
    } catch (const json::exception& e) {
        throw ConfigInvalid(std::string("scenario: ") + e.what());
    }
}

std::string config_to_json(const ScenarioConfig& c)
{
    ordered_json j;
    j["name"] = c.name;
    j["seed"] = c.seed;
    j["genesis_time"] = c.genesis_time;
    j["block_time"] = c.block_time;
    j["board"] = {{"threshold", c.board_threshold}, {"members", c.board_members}};
    j["authorities"] = c.authorities;
    j["cas"] = c.cas;
    j["domains"] = c.domains;
    j["clients"] = c.clients;
    j["freshness_window"] = c.freshness_window;
    ordered_json fees = ordered_json::object();
    for (const auto& [k, v] : c.fees)
        fees[to_string(k)] = v;
    j["fees"] = fees;
    j["adversary"] = {{"holds_fake_cert", c.adversary.holds_fake_cert},
                      {"controls_ca", c.adversary.controls_ca},
                      {"controls_victim_path", c.adversary.controls_victim_path},
                      {"compromised_certs", c.adversary.compromised_certs}};
    j["watch"] = c.watch;
    j["random"] = {{"blocks", c.random.blocks}, {"actions_per_block", c.random.actions_per_block}};
    ordered_json sched = ordered_json::array();
    for (const auto& a : c.schedule)
        sched.push_back(action_to_json(a));
    j["schedule"] = sched;
    return j.dump(2) + "\n";
}

bool ScenarioReport::passed() const
{
    return std::all_of(assertions.begin(), assertions.end(), [](const AssertionResult& a) { return a.passed; });
}

std::string ScenarioReport::to_json() const
{
    ordered_json j;
    j["scenario"] = name;
    j["seed"] = seed;
    j["passed"] = passed();
    j["height"] = height;
    j["tip_hash"] = tip_hash.hex();
    j["final_state_root"] = final_state_root.hex();
    j["chain_sha256"] = sha256(chain).hex();
    ordered_json asserts = ordered_json::array();
    for (const auto& a : assertions)
        asserts.push_back({{"name", a.name}, {"passed", a.passed}, {"detail", a.detail}});
    j["assertions"] = asserts;
    ordered_json outs = ordered_json::array();
    for (const auto& o : outcomes)
        outs.push_back(
            {{"tick", o.tick}, {"index", o.index}, {"do", o.kind}, {"status", o.status}, {"detail", o.detail}});
    j["outcomes"] = outs;
    ordered_json hs = ordered_json::array();
    for (const auto& h : handshakes)
        hs.push_back({{"tick", h.tick},
                      {"client", h.client},
                      {"label", h.label},
                      {"domain", h.domain},
                      {"block", h.block},
                      {"serve", h.serve},
                      {"verdict", h.verdict},
                      {"reason", h.reason}});
    j["handshakes"] = hs;
    ordered_json ns = ordered_json::array();
    for (const auto& n : notifications)
        ns.push_back({{"domain", n.domain}, {"delivered_at", n.delivered_at}, {"event", event_json(n.event)}});
    j["notifications"] = ns;
    ordered_json evs = ordered_json::array();
    for (const auto& e : events)
        evs.push_back(event_json(e));
    j["events"] = evs;
    return j.dump(2) + "\n";
}

ScenarioReport run_scenario(const ScenarioConfig& config)
{
    Engine e(config);
    return e.run();
}

std::vector<Action> split_world_schedule(const ScenarioConfig& c)
{
    if (c.adversary.controls_ca.empty() || !c.adversary.controls_victim_path)
        throw ConfigInvalid("split-world needs an adversary that controls a CA and the victim's network path");
    const auto corrupt = c.adversary.controls_ca.front();
    std::optional<std::size_t> honest;
    for (std::size_t i = 0; i < c.cas && !honest; ++i)
        if (!contains(c.adversary.controls_ca, i))
            honest = i;
    if (!honest)
        throw ConfigInvalid("split-world needs an honest CA besides the corrupted one");
    const auto& victim = c.domains.at(0);

    auto act = [](std::uint64_t tick, std::string kind) {
        Action a;
        a.tick = tick;
        a.kind = std::move(kind);
        return a;
    };
    std::vector<Action> s;

    auto a = act(1, "watch");
    a.domain = victim;
    s.push_back(a);
    a = act(1, "issue");
    a.label = "genuine";
    a.domain = victim;
    a.ca = honest;
    a.expect = "included";
    s.push_back(a);

    // The corrupted CA issues a certificate for the victim's domain to the
    // adversary, who keeps it off the ledger and serves proofs from a
    // private state.
    a = act(2, "issue");
    a.label = "fake";
    a.domain = victim;
    a.ca = corrupt;
    a.to = "adversary";
    a.submit = false;
    a.expect = "done";
    s.push_back(a);
    a = act(2, "handshake");
    a.label = "fake";
    a.serve = "alternate";
    a.expect = "Reject:ProofInvalid";
    s.push_back(a);
    a = act(2, "handshake");
    a.label = "fake";
    a.expect = "Reject:AbsentFromLedger";
    s.push_back(a);
    a = act(2, "handshake");
    a.label = "genuine";
    a.expect = "Accept";
    s.push_back(a);

    // Forced onto the ledger, the fake works, but the victim sees it.
    a = act(3, "add");
    a.label = "fake";
    a.expect = "included";
    s.push_back(a);
    a = act(3, "handshake");
    a.label = "fake";
    a.expect = "Accept";
    s.push_back(a);
    a = act(3, "check_notification");
    a.domain = victim;
    a.event = "CertAdded";
    a.label = "fake";
    s.push_back(a);

    a = act(4, "report_fraud");
    a.label = "fake";
    a.other = "genuine";
    a.expect = "included";
    s.push_back(a);
    a = act(5, "plead");
    a.report = 0;
    a.ca = corrupt;
    a.expect = "included";
    s.push_back(a);
    a = act(6, "resolve");
    a.report = 0;
    a.verdict = "Upheld";
    a.expect = "included";
    s.push_back(a);

    a = act(6, "check_ca");
    a.ca = corrupt;
    a.status = "Untrusted";
    s.push_back(a);
    a = act(6, "check_cert");
    a.label = "fake";
    a.status = "Revoked";
    s.push_back(a);
    a = act(6, "check_notification");
    a.domain = victim;
    a.event = "CertRevoked";
    a.label = "fake";
    s.push_back(a);
    a = act(6, "handshake");
    a.label = "fake";
    a.expect = "Reject:Revoked";
    s.push_back(a);
    a = act(6, "handshake");
    a.label = "fake";
    a.serve = "alternate";
    a.expect = "Reject:ProofInvalid";
    s.push_back(a);
    a = act(6, "handshake");
    a.label = "genuine";
    a.expect = "Accept";
    s.push_back(a);
    return s;
}

std::vector<Action> rogue_revocation_schedule(const ScenarioConfig& c)
{
    if (!contains(c.adversary.compromised_certs, "primary"))
        throw ConfigInvalid("rogue revocation needs compromised_certs to contain \"primary\"");
    const auto& domain = c.domains.at(0);
    std::vector<Action> s;
    auto act = [](std::uint64_t tick, std::string kind) {
        Action a;
        a.tick = tick;
        a.kind = std::move(kind);
        return a;
    };
    auto a = act(1, "watch");
    a.domain = domain;
    s.push_back(a);
    for (const char* label : {"primary", "backup"}) {
        a = act(1, "issue");
        a.label = label;
        a.domain = domain;
        a.ca = 0;
        a.expect = "included";
        s.push_back(a);
    }
    a = act(2, "revoke");
    a.label = "primary";
    a.by = "adversary";
    a.expect = "included";
    s.push_back(a);
    a = act(2, "revoke");
    a.label = "backup";
    a.by = "stranger";
    a.expect = "skipped:UnauthorizedRevoker";
    s.push_back(a);
    a = act(2, "check_notification");
    a.domain = domain;
    a.event = "CertRevoked";
    a.label = "primary";
    s.push_back(a);
    a = act(2, "check_cert");
    a.label = "primary";
    a.status = "Revoked";
    s.push_back(a);
    a = act(2, "handshake");
    a.label = "primary";
    a.expect = "Reject:Revoked";
    s.push_back(a);
    a = act(2, "handshake");
    a.label = "backup";
    a.expect = "Accept";
    s.push_back(a);
    return s;
}

ScenarioReport attack_split_world(const ScenarioConfig& config)
{
    auto c = config;
    c.schedule = split_world_schedule(c);
    c.random = {};
    return run_scenario(c);
}

ScenarioReport attack_rogue_revocation(const ScenarioConfig& config)
{
    auto c = config;
    c.schedule = rogue_revocation_schedule(c);
    c.random = {};
    return run_scenario(c);
}

std::vector<Event> watch_events(const std::vector<Event>& log, std::string_view domain)
{
    std::vector<Event> out;
    for (const auto& e : log)
        if (std::find(e.domains.begin(), e.domains.end(), domain) != e.domains.end())
            out.push_back(e);
    return out;
}

std::size_t EventWatcher::poll(const FullNode& node)
{
    const auto& log = node.events();
    std::size_t n = 0;
    for (; cursor_ < log.size(); ++cursor_) {
        const auto& e = log[cursor_];
        for (const auto& d : domains_) {
            if (std::find(e.domains.begin(), e.domains.end(), d) != e.domains.end()) {
                delivered_.push_back({d, e, node.height()});
                ++n;
                break;
            }
        }
    }
    return n;
}

}  // namespace certledger::sim
