// Copyright (c) 2026 The Tracenet developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef TRACENET_PROPERTIES_HPP
#define TRACENET_PROPERTIES_HPP

#include <tracenet/explorer.hpp>

#include <string>
#include <vector>

namespace tracenet {

// Settlement goal of the verifying actor: a minimum unilaterally-owned
// balance. Text form is balance:<actor>:<amount>.
struct SafetyPolicy {
    Actor actor = Actor::Int;
    Amount min_balance = 0;
};

SafetyPolicy parse_policy(const std::string& text);
std::string policy_to_string(const SafetyPolicy& p);

// Total value of marked places whose every satisfaction path the actor owns
// outright. Contested scripts count for nobody.
Amount owned_balance(const System& sys, const TraceNetState& s, Actor a);
bool eval_policy(const System& sys, const TraceNetState& s, const SafetyPolicy& p);

// Greatest fixpoint of the safety game on explicit policy flags: a node is
// safe when every adversarial edge (counterparty sends, broadcasts, confirms,
// or reorgs) stays safe, and the verifier either holds a satisfied terminal
// or can still steer, via its own moves and waiting, to a satisfied safe
// node.
std::vector<bool> safe_states_core(const ReachabilityGraph& g,
                                   const std::vector<bool>& policy_ok);
std::vector<bool> safe_states(const System& sys, const ReachabilityGraph& g,
                              const SafetyPolicy& p);

struct Verdict {
    bool holds = false;
    std::vector<bool> safe;  // per node id
    std::vector<int> trace;  // edge ids: settlement witness, else counterexample
    std::string reason;
};

// Holds when some policy-satisfying settlement is reachable entirely inside
// the safe region. Otherwise the trace walks to the unsafe frontier and lets
// the adversary and the clock finish the contract against the policy.
Verdict trustless_execution(const System& sys, const ReachabilityGraph& g,
                            const SafetyPolicy& p);

struct UpdateVerdict {
    bool holds = false;
    Verdict replacement;                   // trustless verdict on the new contract
    std::vector<std::string> lost;         // old settlement markings the new contract drops
};

// A replacement contract is a safe update when it executes trustlessly and
// every safely reachable satisfied settlement of the old contract, projected
// onto the outputs both contracts share, survives in the new one. The shared
// initial markings must agree.
UpdateVerdict update_safety(const System& old_sys, const ReachabilityGraph& old_g,
                            const System& new_sys, const ReachabilityGraph& new_g,
                            const SafetyPolicy& p);

struct StabilityVerdict {
    bool stable = false;
    size_t nodes = 0;
    size_t aged_nodes = 0;
    std::string first_difference;  // empty when stable
};

// A state is stable when waiting indefinitely leaves its reachability graph
// unchanged, so the contract can be deferred off-chain.
StabilityVerdict state_stability(const System& sys, const TraceNetState& z,
                                 const ExplorationParams& params = {});

// Human-readable rendering of a graph path.
std::vector<std::string> render_path(const System& sys, const ReachabilityGraph& g,
                                     const std::vector<int>& edge_ids);

} // namespace tracenet

#endif // TRACENET_PROPERTIES_HPP
