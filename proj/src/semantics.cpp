// Copyright (c) 2026 The Tracenet developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <tracenet/semantics.hpp>
#include <tracenet/util.hpp>

#include <algorithm>
#include <deque>

namespace tracenet {

namespace {

const TxTemplate& tmpl_of(const System& sys, int t) {
    return *sys.universe->by_id(sys.net->transitions[t].tx_id);
}

const WitnessPermutation& perm_of(const System& sys, int t) {
    const Transition& tr = sys.net->transitions[t];
    return sys.universe->perms(tr.tx_id)[tr.perm_index];
}

Bits reveal_of(const System& sys, int t, const Bits& broadcaster) {
    return sys.universe->reveal_set(tmpl_of(sys, t), perm_of(sys, t), broadcaster);
}

int actor_index(Actor a) { return static_cast<int>(a); }

// Drops pool entries whose inputs are no longer available.
void prune_pool(const System& sys, TraceNetState& s) {
    for (auto it = s.pool.begin(); it != s.pool.end();) {
        if (marking_enabled(sys, s, it->first)) {
            ++it;
        } else {
            it = s.pool.erase(it);
        }
    }
}

void confirm_tokens(const System& sys, TraceNetState& s, int t) {
    const Transition& tr = sys.net->transitions[t];
    for (const InArc& a : tr.ins) s.arrival.erase(a.place);
    for (int o : tr.outs) s.arrival[o] = s.h_after;
    s.history.emplace_back(t, s.h_after);
    s.pool.erase(t);
    prune_pool(sys, s);
}

// Per-place largest relative lock across all in-arcs, for clock saturation.
int64_t place_max_older(const System& sys, int place) {
    int64_t m = 0;
    for (const Transition& tr : sys.net->transitions) {
        for (const InArc& a : tr.ins) {
            if (a.place == place) m = std::max(m, a.i_older);
        }
    }
    return m;
}

Height net_max_after(const System& sys) {
    Height m = 0;
    for (const Transition& tr : sys.net->transitions) m = std::max(m, tr.i_after);
    return m;
}

std::string bits_hex(const Bits& b) {
    std::string s;
    for (uint64_t w : b.w) {
        char buf[17];
        std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(w));
        s += buf;
    }
    return s;
}

} // namespace

std::string FiredTransition::render(const System& sys) const {
    switch (kind) {
    case Kind::Message:
        return std::string("msg(") + actor_name(actor) + "->" + actor_name(other(actor)) + "," +
               sys.universe->object_label(payload) + ")";
    case Kind::Broadcast:
        return "tb(" + sys.net->transitions[transition].label + ")";
    case Kind::OnChain:
        return sys.net->transitions[transition].label;
    case Kind::Delay:
        return "d(" + to_dec(delay) + ")";
    case Kind::Reorg: {
        std::string s = "r(" + to_dec(depth) + ")[";
        for (size_t i = 0; i < replay.size(); ++i) {
            if (i) s += ",";
            s += replay[i];
        }
        return s + "]";
    }
    }
    return "?";
}

TraceNetState initial_state(const System& sys) {
    TraceNetState s;
    s.k[0] = sys.universe->initial_knowledge(Actor::Int);
    s.k[1] = sys.universe->initial_knowledge(Actor::Ext);
    s.h_after = sys.b0;
    for (size_t p = 0; p < sys.net->places.size(); ++p) {
        if (sys.net->places[p].initially_marked) {
            s.arrival[static_cast<int>(p)] = sys.net->places[p].conf_height;
        }
    }
    return s;
}

bool marking_enabled(const System& sys, const TraceNetState& s, int t) {
    for (const InArc& a : sys.net->transitions[t].ins) {
        if (!s.marked(a.place)) return false;
    }
    return true;
}

bool clock_valid(const System& sys, const TraceNetState& s, int t) {
    const Transition& tr = sys.net->transitions[t];
    if (s.h_after < tr.i_after) return false;
    for (const InArc& a : tr.ins) {
        if (s.h_after - s.arrival.at(a.place) < a.i_older) return false;
    }
    return true;
}

bool deducible(const System& sys, const TraceNetState& s, Actor a, int t) {
    const Transition& tr = sys.net->transitions[t];
    const auto perms = sys.universe->deducible_perms(s.k[actor_index(a)], tmpl_of(sys, t));
    return std::find(perms.begin(), perms.end(), tr.perm_index) != perms.end();
}

std::vector<FiredTransition> fireable_messages(const System& sys, const TraceNetState& s,
                                               Actor sender) {
    std::vector<FiredTransition> out;
    const Bits& mine = s.k[actor_index(sender)];
    const Bits& theirs = s.k[actor_index(other(sender))];
    const auto& objects = sys.universe->objects();
    for (size_t o = 0; o < objects.size(); ++o) {
        if (!sys.message_kinds.count(objects[o].kind)) continue;
        if (mine.get(o) && !theirs.get(o)) {
            out.push_back({FiredTransition::Kind::Message, sender, -1, static_cast<int>(o)});
        }
    }
    return out;
}

std::vector<FiredTransition> fireable_broadcasts(const System& sys, const TraceNetState& s,
                                                 Actor a) {
    std::vector<FiredTransition> out;
    for (int t = 0; t < static_cast<int>(sys.net->transitions.size()); ++t) {
        if (s.pool.count(t)) continue;
        if (!marking_enabled(sys, s, t) || !clock_valid(sys, s, t)) continue;
        if (!deducible(sys, s, a, t)) continue;
        if (reveal_of(sys, t, s.k[actor_index(a)]).is_subset_of(s.k[actor_index(other(a))])) {
            continue;
        }
        out.push_back({FiredTransition::Kind::Broadcast, a, t});
    }
    return out;
}

std::vector<FiredTransition> fireable_onchain(const System& sys, const TraceNetState& s, Actor a) {
    std::vector<FiredTransition> out;
    for (int t = 0; t < static_cast<int>(sys.net->transitions.size()); ++t) {
        if (!marking_enabled(sys, s, t) || !clock_valid(sys, s, t)) continue;
        if (auto it = s.pool.find(t); it != s.pool.end()) {
            // A pending transaction confirms for its broadcaster once the
            // confirmation delay has elapsed.
            if (it->second.broadcaster != a) continue;
            if (s.h_after - it->second.broadcast_height < sys.conf_delay[actor_index(a)]) continue;
            out.push_back({FiredTransition::Kind::OnChain, a, t});
        } else {
            // Quiet confirmation: nothing in the witness is news to the
            // counterparty, so no broadcast round is modeled.
            if (!deducible(sys, s, a, t)) continue;
            if (!reveal_of(sys, t, s.k[actor_index(a)])
                     .is_subset_of(s.k[actor_index(other(a))])) {
                continue;
            }
            out.push_back({FiredTransition::Kind::OnChain, a, t});
        }
    }
    return out;
}

std::optional<int64_t> minimal_release_delay(const System& sys, const TraceNetState& s) {
    std::optional<int64_t> best;
    auto offer = [&](int64_t d) {
        if (d >= 1 && (!best || d < *best)) best = d;
    };
    for (int t = 0; t < static_cast<int>(sys.net->transitions.size()); ++t) {
        if (!marking_enabled(sys, s, t) || clock_valid(sys, s, t)) continue;
        const Transition& tr = sys.net->transitions[t];
        int64_t need = tr.i_after - s.h_after;
        for (const InArc& a : tr.ins) {
            need = std::max(need, a.i_older - (s.h_after - s.arrival.at(a.place)));
        }
        offer(need);
    }
    for (const auto& [t, entry] : s.pool) {
        offer(sys.conf_delay[actor_index(entry.broadcaster)] -
              (s.h_after - entry.broadcast_height));
    }
    return best;
}

TraceNetState fire_message(const System& sys, const TraceNetState& s, Actor sender, int payload) {
    TraceNetState n = s;
    n.k[actor_index(other(sender))].set(payload);
    sys.universe->close(n.k[actor_index(other(sender))]);
    return n;
}

TraceNetState fire_broadcast(const System& sys, const TraceNetState& s, Actor a, int t) {
    TraceNetState n = s;
    n.k[actor_index(other(a))].or_with(reveal_of(sys, t, s.k[actor_index(a)]));
    sys.universe->close(n.k[actor_index(other(a))]);
    n.pool[t] = {n.h_after, a};
    return n;
}

TraceNetState fire_onchain(const System& sys, const TraceNetState& s, Actor a, int t) {
    // The witness went public at broadcast time; a quiet confirmation
    // requires that it held nothing new. Either way knowledge is current.
    (void)a;
    TraceNetState n = s;
    confirm_tokens(sys, n, t);
    return n;
}

TraceNetState fire_delay(const System& sys, const TraceNetState& s, int64_t d) {
    (void)sys;
    TraceNetState n = s;
    n.h_after += d;
    return n;
}

TraceNetState fire(const System& sys, const TraceNetState& s, const FiredTransition& f) {
    switch (f.kind) {
    case FiredTransition::Kind::Message: return fire_message(sys, s, f.actor, f.payload);
    case FiredTransition::Kind::Broadcast: return fire_broadcast(sys, s, f.actor, f.transition);
    case FiredTransition::Kind::OnChain: return fire_onchain(sys, s, f.actor, f.transition);
    case FiredTransition::Kind::Delay: return fire_delay(sys, s, f.delay);
    case FiredTransition::Kind::Reorg: break;
    }
    throw InputError("reorg edges carry their target state");
}

std::vector<std::pair<FiredTransition, TraceNetState>> fireable_reorgs(const System& sys,
                                                                       const TraceNetState& s) {
    std::vector<std::pair<FiredTransition, TraceNetState>> out;
    for (int depth = 1; depth <= sys.reorg_depth; ++depth) {
        const Height cut = s.h_after - depth;

        // Roll back: keep the history prefix at or below the cut and rebuild
        // token arrivals by replaying it; knowledge survives untouched.
        TraceNetState base;
        base.k[0] = s.k[0];
        base.k[1] = s.k[1];
        base.h_after = std::max(sys.b0, cut);
        for (size_t p = 0; p < sys.net->places.size(); ++p) {
            if (sys.net->places[p].initially_marked) {
                base.arrival[static_cast<int>(p)] = sys.net->places[p].conf_height;
            }
        }
        for (const auto& [t, h] : s.history) {
            if (h > cut) continue;
            const Transition& tr = sys.net->transitions[t];
            for (const InArc& a : tr.ins) base.arrival.erase(a.place);
            for (int o : tr.outs) base.arrival[o] = h;
            base.history.emplace_back(t, h);
        }
        for (const auto& [t, entry] : s.pool) {
            if (entry.broadcast_height <= cut) base.pool[t] = entry;
        }
        prune_pool(sys, base);

        // The adversary extends the rolled-back chain block by block, freely
        // inserting transactions it can assemble, until the branch overtakes
        // the abandoned tip. Every state reached at the overtaking height is
        // one possible post-reorg world.
        const Height tip = s.h_after + 1;
        std::deque<std::pair<TraceNetState, std::vector<std::string>>> queue;
        std::set<TraceNetState> seen{base};
        std::set<TraceNetState> reported;
        queue.emplace_back(base, std::vector<std::string>{});
        while (!queue.empty()) {
            auto [st, steps] = std::move(queue.front());
            queue.pop_front();
            if (st.h_after == tip && reported.insert(st).second) {
                out.push_back({{FiredTransition::Kind::Reorg, Actor::Ext, -1, -1, 0, depth, steps},
                               st});
            }
            if (st.h_after < tip) {
                TraceNetState next = st;
                next.h_after += 1;
                if (seen.insert(next).second) {
                    auto nsteps = steps;
                    nsteps.push_back("d(1)");
                    queue.emplace_back(std::move(next), std::move(nsteps));
                }
            }
            for (int t = 0; t < static_cast<int>(sys.net->transitions.size()); ++t) {
                if (!marking_enabled(sys, st, t) || !clock_valid(sys, st, t)) continue;
                if (!deducible(sys, st, Actor::Ext, t)) continue;
                // Reveal and confirmation are fused inside the branch.
                TraceNetState next = st;
                if (next.k[0].or_with(reveal_of(sys, t, st.k[1]))) {
                    sys.universe->close(next.k[0]);
                }
                confirm_tokens(sys, next, t);
                if (seen.insert(next).second) {
                    auto nsteps = steps;
                    nsteps.push_back(sys.net->transitions[t].label);
                    queue.emplace_back(std::move(next), std::move(nsteps));
                }
            }
        }
    }
    return out;
}

bool contract_settled(const System& sys, const TraceNetState& s) {
    for (int t = 0; t < static_cast<int>(sys.net->transitions.size()); ++t) {
        if (marking_enabled(sys, s, t)) return false;
    }
    return true;
}

int64_t stability_horizon(const System& sys) {
    int64_t max_older = 0;
    for (const Transition& tr : sys.net->transitions) {
        for (const InArc& a : tr.ins) max_older = std::max(max_older, a.i_older);
    }
    return std::max<Height>(net_max_after(sys) - sys.b0, 0) + max_older +
           std::max(sys.conf_delay[0], sys.conf_delay[1]) + 2 * sys.reorg_depth + 3;
}

std::string canonical_key(const System& sys, const TraceNetState& s) {
    std::string enc = "ki:" + bits_hex(s.k[0]) + "\nke:" + bits_hex(s.k[1]) + "\nm:";
    for (const auto& [p, h] : s.arrival) enc += to_dec(p) + ",";
    enc += "\nage:";
    for (const auto& [p, h] : s.arrival) {
        const int64_t lock = place_max_older(sys, p);
        if (lock == 0) continue;  // no timed arc ever reads this clock
        const int64_t cap = lock + sys.reorg_depth + 1;
        enc += to_dec(p) + "=" + to_dec(std::min(s.h_after - h, cap)) + ",";
    }
    const Height max_after = net_max_after(sys);
    if (max_after > 0 || sys.reorg_depth > 0) {
        const Height cap = std::max<Height>(max_after - sys.b0, 0) + sys.reorg_depth + 1;
        enc += "\nh:" + to_dec(std::min(s.h_after - sys.b0, cap));
    }
    enc += "\nq:";
    for (const auto& [t, h] : s.history) {
        if (s.h_after - h < sys.reorg_depth) {
            enc += to_dec(t) + "@" + to_dec(s.h_after - h) + ",";
        }
    }
    enc += "\npool:";
    const Height maxc = std::max(sys.conf_delay[0], sys.conf_delay[1]);
    for (const auto& [t, entry] : s.pool) {
        enc += to_dec(t) + "/" + actor_name(entry.broadcaster) + "@" +
               to_dec(std::min(s.h_after - entry.broadcast_height, maxc + sys.reorg_depth + 1)) +
               ",";
    }
    return sha256_hex(enc);
}

} // namespace tracenet
