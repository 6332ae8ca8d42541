// Copyright (c) 2026 The Tracenet developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef TRACENET_SEMANTICS_HPP
#define TRACENET_SEMANTICS_HPP

#include <tracenet/knowledge.hpp>
#include <tracenet/net.hpp>

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace tracenet {

// A contract instance ready for execution: net, deduction universe, timing
// parameters, and the message payload kinds actors may exchange.
struct System {
    const ContractUniverse* universe = nullptr;
    const TraceNet* net = nullptr;
    Height b0 = 0;
    Height conf_delay[2] = {0, 0};  // blocks from broadcast to confirmation
    int reorg_depth = 0;
    std::set<KnowledgeObject::Kind> message_kinds;

    const Transition& transition(int t) const { return net->transitions[t]; }
    const Place& place(int p) const { return net->places[p]; }
};

struct PoolEntry {
    Height broadcast_height = 0;
    Actor broadcaster = Actor::Int;

    auto operator<=>(const PoolEntry&) const = default;
};

// Full execution state. Token clocks are implicit: a marked place carries the
// height its coin confirmed at, so its age is h_after minus that arrival and
// rollback recomputation is replay of the surviving history.
struct TraceNetState {
    Bits k[2];
    std::map<int, Height> arrival;                 // marked place -> confirmation height
    Height h_after = 0;
    std::vector<std::pair<int, Height>> history;   // (transition, height), confirmation order
    std::map<int, PoolEntry> pool;                 // broadcast, unconfirmed transitions

    bool marked(int place) const { return arrival.count(place) > 0; }
    auto operator<=>(const TraceNetState&) const = default;
};

// One edge of the reachability graph.
struct FiredTransition {
    enum class Kind : uint8_t { Message, Broadcast, OnChain, Delay, Reorg };

    Kind kind;
    Actor actor = Actor::Int;
    int transition = -1;             // Broadcast / OnChain
    int payload = -1;                // Message object id
    int64_t delay = 0;               // Delay
    int depth = 0;                   // Reorg
    std::vector<std::string> replay; // Reorg branch steps, rendered

    std::string render(const System& sys) const;
    auto operator<=>(const FiredTransition&) const = default;
};

TraceNetState initial_state(const System& sys);

bool marking_enabled(const System& sys, const TraceNetState& s, int t);
bool clock_valid(const System& sys, const TraceNetState& s, int t);
// Transitions the actor could sign and assemble in this state.
bool deducible(const System& sys, const TraceNetState& s, Actor a, int t);

std::vector<FiredTransition> fireable_messages(const System& sys, const TraceNetState& s,
                                               Actor sender);
std::vector<FiredTransition> fireable_broadcasts(const System& sys, const TraceNetState& s,
                                                 Actor a);
std::vector<FiredTransition> fireable_onchain(const System& sys, const TraceNetState& s, Actor a);

// Smallest wait that makes some marked transition clock-valid or matures a
// pooled transaction; absent when no wait changes anything.
std::optional<int64_t> minimal_release_delay(const System& sys, const TraceNetState& s);

TraceNetState fire_message(const System& sys, const TraceNetState& s, Actor sender, int payload);
TraceNetState fire_broadcast(const System& sys, const TraceNetState& s, Actor a, int t);
TraceNetState fire_onchain(const System& sys, const TraceNetState& s, Actor a, int t);
TraceNetState fire_delay(const System& sys, const TraceNetState& s, int64_t d);

// Applies a non-reorg edge.
TraceNetState fire(const System& sys, const TraceNetState& s, const FiredTransition& f);

// Chain rollbacks of every depth up to the configured bound, each extended by
// every adversarial branch of one block more than the abandoned chain. The
// branch confirms externally-deducible transactions without separate
// broadcasts; revealed witness data still reaches the counterparty, and
// knowledge is never rolled back.
std::vector<std::pair<FiredTransition, TraceNetState>> fireable_reorgs(const System& sys,
                                                                       const TraceNetState& s);

// Marking admits no transition at all; messages and reorgs do not count.
bool contract_settled(const System& sys, const TraceNetState& s);

// Wait that saturates every token age, confirmation wait, and absolute lock.
int64_t stability_horizon(const System& sys);

// Stable digest of the state quotient: knowledge, marking, token ages up to
// each place's largest relevant relative lock, height class up to the largest
// absolute lock, recent history, and pending pool entries. States sharing a
// key behave identically under every fireable edge.
std::string canonical_key(const System& sys, const TraceNetState& s);

} // namespace tracenet

#endif // TRACENET_SEMANTICS_HPP
