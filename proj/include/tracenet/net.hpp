// Copyright (c) 2026 The Tracenet developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef TRACENET_NET_HPP
#define TRACENET_NET_HPP

#include <tracenet/knowledge.hpp>
#include <tracenet/txmodel.hpp>

#include <map>
#include <string>
#include <vector>

namespace tracenet {

// A coin slot: one place per distinct output reference.
struct Place {
    OutputRef ref;
    Amount value = 0;
    MiniscriptNode script;
    bool funding = false;
    bool initially_marked = false;
    Height conf_height = 0;
};

// Input arc with the relative lock the chosen witness and the input demand.
struct InArc {
    int place = -1;
    int64_t i_older = 0;
};

// One producible witness permutation of one template.
struct Transition {
    std::string tx_id;
    int perm_index = 0;
    std::string label;
    std::vector<InArc> ins;
    std::vector<int> outs;
    Height i_after = 0;
};

struct TraceNet {
    std::vector<Place> places;
    std::vector<Transition> transitions;
    std::map<OutputRef, int> place_ids;

    int place_id(const OutputRef& r) const;
    int transition_id(const std::string& label) const;
    // Transitions drawing from the given place.
    std::vector<int> consumers(int place) const;
};

// Unrolls every template of the universe into places and transitions. Only
// producible permutations become transitions; the rest can never fire.
TraceNet build_net(const ContractUniverse& u);

std::string export_net_dot(const TraceNet& net);

} // namespace tracenet

#endif // TRACENET_NET_HPP
