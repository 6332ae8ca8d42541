// Copyright (c) 2026 The Tracenet developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef TRACENET_EXPLORER_HPP
#define TRACENET_EXPLORER_HPP

#include <tracenet/semantics.hpp>

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace tracenet {

struct RgEdge {
    FiredTransition fired;
    int from = -1;
    int to = -1;
};

struct RgNode {
    TraceNetState state;  // first representative of the key's class
    std::string key;
    std::vector<int> edges;  // outgoing, in enumeration order
    bool terminal = false;
};

struct ReachabilityGraph {
    std::vector<RgNode> nodes;
    std::vector<RgEdge> edges;
    std::map<std::string, int> by_key;
    int root = 0;
};

struct ExplorationParams {
    size_t budget = 1000000;    // distinct states before ResourceError
    uint64_t shuffle_seed = 0;  // 0 explores FIFO, else random worklist pops
};

// Every edge leaving the state, in fixed order: broadcasts, confirmations,
// messages, the minimal releasing delay, reorgs. Messages are omitted once
// the contract is settled.
std::vector<std::pair<FiredTransition, TraceNetState>> successors(const System& sys,
                                                                  const TraceNetState& s);

// Exhaustive exploration quotiented by canonical_key. The worklist discipline
// never changes the reached key set or the edge set.
ReachabilityGraph explore(const System& sys, const TraceNetState& root,
                          const ExplorationParams& params = {});

std::string export_graph_dot(const System& sys, const ReachabilityGraph& g);

} // namespace tracenet

#endif // TRACENET_EXPLORER_HPP
