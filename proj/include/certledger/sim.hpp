#pragma once

#include "certledger/light_client.hpp"

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace certledger::sim {

struct ConfigInvalid : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// What the adversary can do. Actions that need a capability the config does
// not grant are a ConfigInvalid error, never silently allowed.
struct AdversaryCaps {
    bool holds_fake_cert = false;               // may be issued certificates for other people's domains
    std::vector<std::size_t> controls_ca;       // CA indices whose keys the adversary holds
    bool controls_victim_path = false;          // may serve handshake bundles to victims
    std::vector<std::string> compromised_certs; // certificate labels whose private keys leaked

    bool operator==(const AdversaryCaps&) const = default;
};

/*
 * One scheduled step. Which fields matter depends on `kind`:
 *
 *   issue        label domain ca [to=owner|adversary] [submit=true] [lifetime_days=90]
 *   add          label [by=holder|issuer]           submit an issued certificate
 *   revoke       label [by=holder|issuer|adversary|stranger]
 *   handshake    label [domain] [client] [serve=honest|alternate] [lag=0]
 *   untrust      ca [signers]
 *   report_fraud label (fake) other (genuine)
 *   plead        report ca
 *   resolve      report verdict=Upheld|Dismissed [signers]
 *   transfer     by (account name) to (account name) amount
 *   watch        domain
 *   check_cert   label status=NotRevoked|Revoked|Absent
 *   check_ca     ca status=Trusted|Untrusted
 *   check_notification  domain event=<EventKind> label
 *   idle
 *
 * Account names: "owner:<domain>", "ca:<i>", "adversary", "stranger".
 * `client` absent means every light client. `expect` turns the outcome into
 * an assertion: "included", "skipped:<TxError>", "rejected:<LedgerError>",
 * "Accept" or "Reject:<reason>".
 */
struct Action {
    std::uint64_t tick = 1;
    std::string kind;
    std::string label;
    std::string other;
    std::string domain;
    std::optional<std::size_t> ca;
    std::string to;
    std::string by;
    bool submit = true;
    std::uint64_t lifetime_days = 90;
    std::optional<std::size_t> client;
    std::string serve = "honest";
    std::uint64_t lag = 0;
    std::optional<std::uint32_t> report;
    std::string verdict;
    std::optional<std::size_t> signers;
    std::uint64_t amount = 0;
    std::string status;
    std::string event;
    std::string expect;

    bool operator==(const Action&) const = default;
};

// Generates random issue/revoke/handshake/transfer traffic for `blocks` ticks.
struct RandomTraffic {
    std::uint64_t blocks = 0;
    std::uint64_t actions_per_block = 2;
    bool operator==(const RandomTraffic&) const = default;
};

struct ScenarioConfig {
    std::string name = "scenario";
    std::uint64_t seed = 1;
    UnixSeconds genesis_time = 1'700'000'000;
    UnixSeconds block_time = 600;
    std::uint32_t board_threshold = 2;
    std::uint32_t board_members = 3;
    std::size_t authorities = 3;
    std::size_t cas = 2;
    std::vector<std::string> domains{"example.com"};
    std::size_t clients = 1;
    std::uint64_t freshness_window = 1;
    FeeSchedule fees = default_fee_schedule();
    AdversaryCaps adversary;
    std::vector<std::string> watch;  // domains watched from the start
    std::vector<Action> schedule;
    RandomTraffic random;

    bool operator==(const ScenarioConfig&) const = default;
};

/*
 * Scenario files are JSON objects with the ScenarioConfig field names:
 *
 *   {"name": "...", "seed": 7, "block_time": 600,
 *    "board": {"threshold": 2, "members": 3}, "authorities": 3, "cas": 2,
 *    "domains": ["example.com"], "clients": 4, "freshness_window": 1,
 *    "fees": {"AddTLSCert": 1}, "watch": ["example.com"],
 *    "adversary": {"holds_fake_cert": true, "controls_ca": [1],
 *                  "controls_victim_path": true, "compromised_certs": []},
 *    "random": {"blocks": 0, "actions_per_block": 2},
 *    "schedule": [{"tick": 1, "do": "issue", "label": "c1", ...}, ...]}
 *
 * Every key is optional. Unknown keys are rejected.
 */
ScenarioConfig config_from_json(std::string_view text);
std::string config_to_json(const ScenarioConfig& c);

struct ActionOutcome {
    std::uint64_t tick = 0;
    std::size_t index = 0;  // position in the (expanded) schedule
    std::string kind;
    std::string status;     // included, skipped:<e>, rejected:<e>, done, Accept, Reject:<r>, pass, fail
    std::string detail;
};

struct HandshakeRecord {
    std::uint64_t tick = 0;
    std::size_t client = 0;
    std::string label;
    std::string domain;
    std::uint64_t block = 0;
    std::string serve;  // honest, alternate, or alternate-identical (adversary state equals consensus)
    std::string verdict;
    std::string reason;
};

struct Notification {
    std::string domain;
    Event event;
    std::uint64_t delivered_at = 0;
};

struct AssertionResult {
    std::string name;
    bool passed = true;
    std::string detail;
};

struct ScenarioReport {
    std::string name;
    std::uint64_t seed = 0;
    std::vector<ActionOutcome> outcomes;
    std::vector<Event> events;
    std::vector<HandshakeRecord> handshakes;
    std::vector<Notification> notifications;
    std::vector<AssertionResult> assertions;
    Hash256 final_state_root;
    Hash256 tip_hash;
    std::uint64_t height = 0;
    Bytes chain;  // exported chain; in JSON only its SHA-256 appears

    bool passed() const;
    std::string to_json() const;
};

// Throws ConfigInvalid.
ScenarioReport run_scenario(const ScenarioConfig& config);

/// Replaces the schedule with the split-world script: an alternate-state
/// attack against every client, then an on-ledger fake that the victim's
/// watcher catches, then report, plea and an Upheld resolution.
/// Needs at least two CAs, an adversary holding a fake cert from a CA it
/// controls, and the victim's network path.
ScenarioReport attack_split_world(const ScenarioConfig& config);

/// Replaces the schedule with the compromised-key script: the adversary
/// revokes the owner's primary certificate, a stranger fails to revoke the
/// backup, and the backup keeps working.
ScenarioReport attack_rogue_revocation(const ScenarioConfig& config);

std::vector<Action> split_world_schedule(const ScenarioConfig& config);
std::vector<Action> rogue_revocation_schedule(const ScenarioConfig& config);

/// Events from `log` concerning `domain`, in log order.
std::vector<Event> watch_events(const std::vector<Event>& log, std::string_view domain);

// Follows a node's event log and records when each event for its domains
// was first seen.
class EventWatcher {
public:
    /// Events already in the log before position `from` are never delivered.
    explicit EventWatcher(std::vector<std::string> domains, std::size_t from = 0)
        : domains_(std::move(domains)), start_(from), cursor_(from)
    {
    }

    /// Delivers every new event for the watched domains; returns how many.
    std::size_t poll(const FullNode& node);

    const std::vector<Notification>& delivered() const { return delivered_; }
    const std::vector<std::string>& domains() const { return domains_; }
    std::size_t start() const { return start_; }

private:
    std::vector<std::string> domains_;
    std::size_t start_ = 0;
    std::size_t cursor_ = 0;
    std::vector<Notification> delivered_;
};

}  // namespace certledger::sim
