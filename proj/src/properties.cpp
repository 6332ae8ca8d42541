// Copyright (c) 2026 The Tracenet developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <tracenet/properties.hpp>
#include <tracenet/util.hpp>

#include <algorithm>
#include <cstdlib>
#include <deque>
#include <set>

namespace tracenet {

namespace {

// Moves only the counterparty or the chain can make against the verifier.
bool adversarial(const FiredTransition& f) {
    if (f.kind == FiredTransition::Kind::Reorg) return true;
    if (f.kind == FiredTransition::Kind::Delay) return false;
    return f.actor == Actor::Ext;
}

// Moves the verifier can make or wait for: acting is always possible before
// the clock advances, so delays count as its own.
bool steerable(const FiredTransition& f) {
    if (f.kind == FiredTransition::Kind::Delay) return true;
    if (f.kind == FiredTransition::Kind::Reorg) return false;
    return f.actor == Actor::Int;
}

std::vector<bool> policy_flags(const System& sys, const ReachabilityGraph& g,
                               const SafetyPolicy& p) {
    std::vector<bool> ok(g.nodes.size());
    for (size_t i = 0; i < g.nodes.size(); ++i) ok[i] = eval_policy(sys, g.nodes[i].state, p);
    return ok;
}

// Shortest edge path from one source following edges admitted by the filter;
// empty optional when no accepted target is reachable.
template <typename EdgeOk, typename Accept>
std::optional<std::vector<int>> bfs_path(const ReachabilityGraph& g, int from, EdgeOk edge_ok,
                                         Accept accept) {
    std::vector<int> via(g.nodes.size(), -2);  // incoming edge id, -1 at the source
    std::deque<int> q{from};
    via[from] = -1;
    while (!q.empty()) {
        const int n = q.front();
        q.pop_front();
        if (accept(n)) {
            std::vector<int> path;
            for (int e = via[n]; e != -1; e = via[g.edges[e].from]) path.push_back(e);
            std::reverse(path.begin(), path.end());
            return path;
        }
        for (int e : g.nodes[n].edges) {
            if (!edge_ok(e)) continue;
            const int to = g.edges[e].to;
            if (via[to] != -2) continue;
            via[to] = e;
            q.push_back(to);
        }
    }
    return std::nullopt;
}

} // namespace

SafetyPolicy parse_policy(const std::string& text) {
    const auto first = text.find(':');
    const auto second = text.find(':', first == std::string::npos ? first : first + 1);
    if (first == std::string::npos || second == std::string::npos) {
        throw InputError("policy must be balance:<actor>:<amount>, got '" + text + "'");
    }
    const std::string kind = text.substr(0, first);
    const std::string who = text.substr(first + 1, second - first - 1);
    const std::string amount = text.substr(second + 1);
    if (kind != "balance") throw InputError("unknown policy kind '" + kind + "'");
    SafetyPolicy p;
    if (who == "int") {
        p.actor = Actor::Int;
    } else if (who == "ext") {
        p.actor = Actor::Ext;
    } else {
        throw InputError("unknown policy actor '" + who + "'");
    }
    char* end = nullptr;
    p.min_balance = std::strtoll(amount.c_str(), &end, 10);
    if (amount.empty() || *end != '\0' || p.min_balance < 0) {
        throw InputError("bad policy amount '" + amount + "'");
    }
    return p;
}

std::string policy_to_string(const SafetyPolicy& p) {
    return std::string("balance:") + actor_name(p.actor) + ":" + to_dec(p.min_balance);
}

Amount owned_balance(const System& sys, const TraceNetState& s, Actor a) {
    const SecretSet mine = sys.universe->secrets_of(s.k[static_cast<int>(a)]);
    Amount total = 0;
    for (const auto& [p, h] : s.arrival) {
        const Place& place = sys.net->places[p];
        bool owned = true;
        for (const SymbolicWitness& w : sat(place.script)) {
            if (!path_owned(w, mine)) {
                owned = false;
                break;
            }
        }
        if (owned) total += place.value;
    }
    return total;
}

bool eval_policy(const System& sys, const TraceNetState& s, const SafetyPolicy& p) {
    return owned_balance(sys, s, p.actor) >= p.min_balance;
}

std::vector<bool> safe_states_core(const ReachabilityGraph& g,
                                   const std::vector<bool>& policy_ok) {
    const size_t n = g.nodes.size();
    // Reverse adjacency restricted to the verifier's own moves.
    std::vector<std::vector<int>> steer_rev(n);
    for (size_t e = 0; e < g.edges.size(); ++e) {
        if (steerable(g.edges[e].fired)) {
            steer_rev[g.edges[e].to].push_back(g.edges[e].from);
        }
    }

    std::vector<bool> safe(n, true);
    while (true) {
        // Nodes whose adversarial edges all stay safe.
        std::vector<bool> good(n, true);
        for (size_t i = 0; i < n; ++i) {
            for (int e : g.nodes[i].edges) {
                if (adversarial(g.edges[e].fired) && !safe[g.edges[e].to]) {
                    good[i] = false;
                    break;
                }
            }
        }
        // Nodes from which the verifier reaches a satisfied safe node on its
        // own, never leaving the guarded region.
        std::vector<bool> reach(n, false);
        std::deque<int> q;
        for (size_t i = 0; i < n; ++i) {
            if (safe[i] && good[i] && policy_ok[i]) {
                reach[i] = true;
                q.push_back(static_cast<int>(i));
            }
        }
        while (!q.empty()) {
            const int i = q.front();
            q.pop_front();
            for (int src : steer_rev[i]) {
                if (!reach[src] && safe[src] && good[src]) {
                    reach[src] = true;
                    q.push_back(src);
                }
            }
        }
        std::vector<bool> next(n);
        for (size_t i = 0; i < n; ++i) {
            next[i] = good[i] && (g.nodes[i].terminal ? policy_ok[i] : reach[i]);
        }
        if (next == safe) return safe;
        safe = std::move(next);
    }
}

std::vector<bool> safe_states(const System& sys, const ReachabilityGraph& g,
                              const SafetyPolicy& p) {
    return safe_states_core(g, policy_flags(sys, g, p));
}

Verdict trustless_execution(const System& sys, const ReachabilityGraph& g,
                            const SafetyPolicy& p) {
    Verdict v;
    const std::vector<bool> ok = policy_flags(sys, g, p);
    v.safe = safe_states_core(g, ok);

    if (v.safe[g.root]) {
        auto witness = bfs_path(
            g, g.root, [&](int e) { return v.safe[g.edges[e].to]; },
            [&](int n) { return g.nodes[n].terminal && ok[n]; });
        if (witness) {
            v.holds = true;
            v.trace = std::move(*witness);
            v.reason = "a satisfied settlement is reachable inside the safe region";
            return v;
        }
        v.reason = "no satisfied settlement is reachable inside the safe region";
    } else {
        v.reason = "the initial state is outside the safe region";
    }

    // Counterexample: walk to the unsafe frontier, then let the counterparty
    // and the clock finish the contract against the policy.
    auto prefix = bfs_path(
        g, g.root, [](int) { return true; }, [&](int n) { return !v.safe[n]; });
    if (!prefix) return v;  // everything reachable is safe, yet unsettled
    v.trace = std::move(*prefix);
    const int frontier = v.trace.empty() ? g.root : g.edges[v.trace.back()].to;
    auto suffix = bfs_path(
        g, frontier,
        [&](int e) {
            return adversarial(g.edges[e].fired) ||
                   g.edges[e].fired.kind == FiredTransition::Kind::Delay;
        },
        [&](int n) { return g.nodes[n].terminal && !ok[n]; });
    if (suffix) v.trace.insert(v.trace.end(), suffix->begin(), suffix->end());
    return v;
}

UpdateVerdict update_safety(const System& old_sys, const ReachabilityGraph& old_g,
                            const System& new_sys, const ReachabilityGraph& new_g,
                            const SafetyPolicy& p) {
    std::set<OutputRef> shared;
    for (const Place& place : old_sys.net->places) {
        if (new_sys.net->place_id(place.ref) >= 0) shared.insert(place.ref);
    }
    auto projection = [&](const System& sys, const TraceNetState& s) {
        std::set<std::string> marks;
        for (const auto& [pid, h] : s.arrival) {
            const OutputRef& ref = sys.net->places[pid].ref;
            if (shared.count(ref)) marks.insert(ref.to_string());
        }
        std::string joined;
        for (const auto& m : marks) {
            if (!joined.empty()) joined += " ";
            joined += m;
        }
        return joined;
    };
    if (projection(old_sys, old_g.nodes[old_g.root].state) !=
        projection(new_sys, new_g.nodes[new_g.root].state)) {
        throw InputError("contracts disagree on the shared initial outputs");
    }

    // Satisfied settlements the verifier can safely reach under a contract.
    auto settlements = [&](const System& sys, const ReachabilityGraph& g) {
        const std::vector<bool> ok = policy_flags(sys, g, p);
        const std::vector<bool> safe = safe_states_core(g, ok);
        std::set<std::string> out;
        if (!safe[g.root]) return out;
        std::vector<bool> seen(g.nodes.size(), false);
        std::deque<int> q{g.root};
        seen[g.root] = true;
        while (!q.empty()) {
            const int n = q.front();
            q.pop_front();
            if (g.nodes[n].terminal && ok[n]) out.insert(projection(sys, g.nodes[n].state));
            for (int e : g.nodes[n].edges) {
                const int to = g.edges[e].to;
                if (!seen[to] && safe[to]) {
                    seen[to] = true;
                    q.push_back(to);
                }
            }
        }
        return out;
    };

    UpdateVerdict v;
    v.replacement = trustless_execution(new_sys, new_g, p);
    const std::set<std::string> olds = settlements(old_sys, old_g);
    const std::set<std::string> news = settlements(new_sys, new_g);
    for (const auto& m : olds) {
        if (!news.count(m)) v.lost.push_back(m);
    }
    v.holds = v.replacement.holds && v.lost.empty();
    return v;
}

StabilityVerdict state_stability(const System& sys, const TraceNetState& z,
                                 const ExplorationParams& params) {
    const ReachabilityGraph now = explore(sys, z, params);
    const ReachabilityGraph aged =
        explore(sys, fire_delay(sys, z, stability_horizon(sys)), params);

    StabilityVerdict v;
    v.nodes = now.nodes.size();
    v.aged_nodes = aged.nodes.size();

    std::set<std::string> now_keys, aged_keys;
    for (const auto& n : now.nodes) now_keys.insert(n.key);
    for (const auto& n : aged.nodes) aged_keys.insert(n.key);
    auto triples = [](const System& s, const ReachabilityGraph& g) {
        std::set<std::string> out;
        for (const auto& e : g.edges) {
            out.insert(g.nodes[e.from].key + " --" + e.fired.render(s) + "--> " +
                       g.nodes[e.to].key);
        }
        return out;
    };
    const std::set<std::string> now_edges = triples(sys, now);
    const std::set<std::string> aged_edges = triples(sys, aged);

    if (now_keys == aged_keys && now_edges == aged_edges) {
        v.stable = true;
        return v;
    }
    if (now_keys != aged_keys) {
        v.first_difference = "state sets differ (" + to_dec(static_cast<int64_t>(v.nodes)) +
                             " now, " + to_dec(static_cast<int64_t>(v.aged_nodes)) + " aged)";
    } else {
        for (const auto& e : now_edges) {
            if (!aged_edges.count(e)) {
                v.first_difference = "aged graph lacks " + e;
                break;
            }
        }
        for (const auto& e : aged_edges) {
            if (!v.first_difference.empty()) break;
            if (!now_edges.count(e)) v.first_difference = "aged graph adds " + e;
        }
    }
    return v;
}

std::vector<std::string> render_path(const System& sys, const ReachabilityGraph& g,
                                     const std::vector<int>& edge_ids) {
    std::vector<std::string> out;
    for (int e : edge_ids) out.push_back(g.edges[e].fired.render(sys));
    return out;
}

} // namespace tracenet
