// Copyright (c) 2026 The Tracenet developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <tracenet/explorer.hpp>
#include <tracenet/util.hpp>

#include <deque>
#include <random>

namespace tracenet {

std::vector<std::pair<FiredTransition, TraceNetState>> successors(const System& sys,
                                                                  const TraceNetState& s) {
    std::vector<std::pair<FiredTransition, TraceNetState>> out;
    auto apply = [&](const std::vector<FiredTransition>& fs) {
        for (const FiredTransition& f : fs) out.emplace_back(f, fire(sys, s, f));
    };
    for (Actor a : {Actor::Int, Actor::Ext}) apply(fireable_broadcasts(sys, s, a));
    for (Actor a : {Actor::Int, Actor::Ext}) apply(fireable_onchain(sys, s, a));
    if (!contract_settled(sys, s)) {
        for (Actor a : {Actor::Int, Actor::Ext}) apply(fireable_messages(sys, s, a));
    }
    if (auto d = minimal_release_delay(sys, s)) {
        FiredTransition f{FiredTransition::Kind::Delay, Actor::Int};
        f.delay = *d;
        out.emplace_back(f, fire_delay(sys, s, *d));
    }
    for (auto& [f, target] : fireable_reorgs(sys, s)) out.emplace_back(f, target);
    return out;
}

ReachabilityGraph explore(const System& sys, const TraceNetState& root,
                          const ExplorationParams& params) {
    ReachabilityGraph g;
    std::deque<int> work;
    std::mt19937_64 rng(params.shuffle_seed);

    auto add_node = [&](const TraceNetState& s, std::string key) {
        if (g.nodes.size() >= params.budget) {
            throw ResourceError("state budget exceeded (" +
                                to_dec(static_cast<int64_t>(params.budget)) + " states)");
        }
        const int id = static_cast<int>(g.nodes.size());
        g.by_key[key] = id;
        g.nodes.push_back({s, std::move(key), {}, contract_settled(sys, s)});
        work.push_back(id);
        return id;
    };

    g.root = add_node(root, canonical_key(sys, root));
    while (!work.empty()) {
        int id;
        if (params.shuffle_seed == 0) {
            id = work.front();
            work.pop_front();
        } else {
            const size_t i = rng() % work.size();
            std::swap(work[i], work.back());
            id = work.back();
            work.pop_back();
        }
        // Successors mutate g.nodes; copy the source state first.
        const TraceNetState state = g.nodes[id].state;
        for (auto& [fired, target] : successors(sys, state)) {
            std::string key = canonical_key(sys, target);
            auto it = g.by_key.find(key);
            const int to =
                it == g.by_key.end() ? add_node(target, std::move(key)) : it->second;
            g.nodes[id].edges.push_back(static_cast<int>(g.edges.size()));
            g.edges.push_back({std::move(fired), id, to});
        }
    }
    return g;
}

std::string export_graph_dot(const System& sys, const ReachabilityGraph& g) {
    std::string dot = "digraph reachability {\n";
    for (size_t i = 0; i < g.nodes.size(); ++i) {
        const RgNode& n = g.nodes[i];
        std::string marks;
        for (const auto& [p, h] : n.state.arrival) {
            if (!marks.empty()) marks += " ";
            marks += sys.net->places[p].ref.to_string();
        }
        dot += "  s" + to_dec(static_cast<int64_t>(i)) + " [label=\"s" +
               to_dec(static_cast<int64_t>(i)) + "\\n" + marks + "\"" +
               (n.terminal ? ",peripheries=2" : "") +
               (static_cast<int>(i) == g.root ? ",style=filled,fillcolor=gray90" : "") + "];\n";
    }
    for (const RgEdge& e : g.edges) {
        dot += "  s" + to_dec(e.from) + " -> s" + to_dec(e.to) + " [label=\"" +
               e.fired.render(sys) + "\"];\n";
    }
    dot += "}\n";
    return dot;
}

} // namespace tracenet
