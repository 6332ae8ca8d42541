// Copyright (c) 2026 The Tracenet developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <tracenet/net.hpp>

#include <algorithm>

namespace tracenet {

int TraceNet::place_id(const OutputRef& r) const {
    auto it = place_ids.find(r);
    return it == place_ids.end() ? -1 : it->second;
}

int TraceNet::transition_id(const std::string& label) const {
    for (size_t t = 0; t < transitions.size(); ++t) {
        if (transitions[t].label == label) return static_cast<int>(t);
    }
    return -1;
}

std::vector<int> TraceNet::consumers(int place) const {
    std::vector<int> out;
    for (size_t t = 0; t < transitions.size(); ++t) {
        for (const InArc& a : transitions[t].ins) {
            if (a.place == place) {
                out.push_back(static_cast<int>(t));
                break;
            }
        }
    }
    return out;
}

TraceNet build_net(const ContractUniverse& u) {
    TraceNet net;
    auto add_place = [&](const OutputRef& ref, const TxOutput& out, bool funding, bool marked,
                         Height conf) {
        if (net.place_ids.count(ref)) return;
        net.place_ids[ref] = static_cast<int>(net.places.size());
        net.places.push_back({ref, out.value, out.script, funding, marked, conf});
    };

    // Funding places first, then template outputs in template order; this
    // fixes place ids independently of spend structure.
    for (const FundingOutput& f : u.funding()) {
        add_place(f.ref, f.out, true, f.confirmed, f.conf_height);
    }
    for (const TxTemplate& t : u.templates()) {
        for (uint32_t i = 0; i < t.outs.size(); ++i) {
            add_place({t.name, i}, t.outs[i], false, false, 0);
        }
    }

    for (const TxTemplate& t : u.templates()) {
        const auto& perms = u.perms(t.id);
        for (size_t pi = 0; pi < perms.size(); ++pi) {
            const WitnessPermutation& p = perms[pi];
            if (!p.producible()) continue;
            Transition tr;
            tr.tx_id = t.id;
            tr.perm_index = static_cast<int>(pi);
            tr.label = p.label();
            tr.i_after = t.after;
            for (size_t i = 0; i < t.ins.size(); ++i) {
                const int place = net.place_id(t.ins[i].prevout);
                if (place < 0) {
                    throw InputError("template '" + t.name + "' spends unknown output " +
                                     t.ins[i].prevout.to_string());
                }
                tr.ins.push_back(
                    {place, std::max(t.ins[i].older, witness_older_bound(p.witnesses[i]))});
                tr.i_after = std::max(tr.i_after, witness_after_bound(p.witnesses[i]));
            }
            for (uint32_t i = 0; i < t.outs.size(); ++i) {
                tr.outs.push_back(net.place_id({t.name, i}));
            }
            net.transitions.push_back(std::move(tr));
        }
    }
    return net;
}

std::string export_net_dot(const TraceNet& net) {
    std::string dot = "digraph tracenet {\n  rankdir=LR;\n";
    for (size_t i = 0; i < net.places.size(); ++i) {
        const Place& p = net.places[i];
        dot += "  p" + to_dec(static_cast<int64_t>(i)) + " [shape=circle,label=\"" +
               p.ref.to_string() + "\\n" + to_dec(p.value) + "\"" +
               (p.initially_marked ? ",style=filled,fillcolor=gray80" : "") + "];\n";
    }
    for (size_t t = 0; t < net.transitions.size(); ++t) {
        const Transition& tr = net.transitions[t];
        std::string label = tr.label;
        if (tr.i_after > 0) label += "\\nafter " + to_dec(tr.i_after);
        dot += "  t" + to_dec(static_cast<int64_t>(t)) + " [shape=box,label=\"" + label + "\"];\n";
        for (const InArc& a : tr.ins) {
            dot += "  p" + to_dec(a.place) + " -> t" + to_dec(static_cast<int64_t>(t));
            if (a.i_older > 0) dot += " [label=\"older " + to_dec(a.i_older) + "\"]";
            dot += ";\n";
        }
        for (int o : tr.outs) {
            dot += "  t" + to_dec(static_cast<int64_t>(t)) + " -> p" + to_dec(o) + ";\n";
        }
    }
    dot += "}\n";
    return dot;
}

} // namespace tracenet
