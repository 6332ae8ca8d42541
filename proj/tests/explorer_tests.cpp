// Copyright (c) 2026 The Tracenet developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <doctest.h>

#include <tracenet/explorer.hpp>

#include <deque>
#include <memory>
#include <set>
#include <string>
#include <tuple>
#include <vector>

using namespace tracenet;

namespace {

TxOutput out(Amount value, const std::string& script) {
    return {value, parse_miniscript(script)};
}

struct Fixture {
    std::unique_ptr<ContractUniverse> u;
    TraceNet net;
    System sys;

    explicit Fixture(Height conf_int = 0, Height conf_ext = 0, int reorg = 0) {
        std::vector<FundingOutput> funding{
            {{"wallet_int", 0}, out(100, "pk(pk_int)"), true, 100},
            {{"wallet_ext", 0}, out(100, "pk(pk_ext)"), true, 100},
        };
        TxTemplate fi;
        fi.name = "fund_int";
        fi.ins = {{{"wallet_int", 0}, 0, {}}};
        fi.outs = {out(100, "andor(pk(pk_ext),sha256(b32),and_v(v(pk(pk_int)),older(15)))")};
        TxTemplate fe;
        fe.name = "fund_ext";
        fe.ins = {{{"wallet_ext", 0}, 0, {}}};
        fe.outs = {out(100, "andor(pk(pk_int),sha256(b32),and_v(v(pk(pk_ext)),older(10)))")};
        std::array<ActorSetup, 2> actors;
        actors[0] = {{{"pk_int"}, {"b32"}}, {}, ""};
        actors[1] = {{{"pk_ext"}, {}}, {}, ""};
        u = std::make_unique<ContractUniverse>(
            std::vector<TxTemplate>{fi, fe}, funding, actors, std::vector<PreSignatureDecl>{});
        net = build_net(*u);
        sys.universe = u.get();
        sys.net = &net;
        sys.b0 = 100;
        sys.conf_delay[0] = conf_int;
        sys.conf_delay[1] = conf_ext;
        sys.reorg_depth = reorg;
        sys.message_kinds = {KnowledgeObject::Kind::Preimage};
    }
};

using EdgeTriple = std::tuple<std::string, std::string, std::string>;

// Raw enumeration without the key quotient, as an independent oracle for the
// explorer. Finite because delays only fire while some lock is pending.
void raw_bfs(const System& sys, const TraceNetState& root, std::set<std::string>& keys,
             std::set<EdgeTriple>& triples) {
    std::set<TraceNetState> seen{root};
    std::deque<TraceNetState> work{root};
    while (!work.empty()) {
        TraceNetState s = std::move(work.front());
        work.pop_front();
        const std::string from = canonical_key(sys, s);
        keys.insert(from);
        for (auto& [fired, target] : successors(sys, s)) {
            triples.insert({from, fired.render(sys), canonical_key(sys, target)});
            if (seen.insert(target).second) work.push_back(target);
        }
    }
}

std::set<std::string> graph_keys(const ReachabilityGraph& g) {
    std::set<std::string> keys;
    for (const auto& n : g.nodes) keys.insert(n.key);
    return keys;
}

std::set<EdgeTriple> graph_triples(const System& sys, const ReachabilityGraph& g) {
    std::set<EdgeTriple> triples;
    for (const auto& e : g.edges) {
        triples.insert({g.nodes[e.from].key, e.fired.render(sys), g.nodes[e.to].key});
    }
    return triples;
}

} // namespace

TEST_CASE("exploration agrees with the unquotiented enumeration") {
    for (auto [ci, ce] : {std::pair<Height, Height>{0, 0}, {2, 3}}) {
        CAPTURE(ci);
        CAPTURE(ce);
        Fixture f(ci, ce);
        TraceNetState root = initial_state(f.sys);

        std::set<std::string> raw_keys;
        std::set<EdgeTriple> raw_triples;
        raw_bfs(f.sys, root, raw_keys, raw_triples);

        ReachabilityGraph g = explore(f.sys, root);
        CHECK(graph_keys(g) == raw_keys);
        CHECK(graph_triples(f.sys, g) == raw_triples);
        CHECK(g.nodes.size() == raw_keys.size());
    }
}

TEST_CASE("worklist discipline does not change the graph") {
    Fixture f(1, 2);
    TraceNetState root = initial_state(f.sys);
    ReachabilityGraph fifo = explore(f.sys, root);
    for (uint64_t seed = 1; seed <= 10; ++seed) {
        CAPTURE(seed);
        ExplorationParams params;
        params.shuffle_seed = seed;
        ReachabilityGraph g = explore(f.sys, root, params);
        CHECK(graph_keys(g) == graph_keys(fifo));
        CHECK(graph_triples(f.sys, g) == graph_triples(f.sys, fifo));
        CHECK(g.nodes[g.root].key == fifo.nodes[fifo.root].key);
    }
}

TEST_CASE("root edges follow the fixed enumeration order") {
    Fixture f;
    ReachabilityGraph g = explore(f.sys, initial_state(f.sys));
    std::vector<std::string> renders;
    for (int e : g.nodes[g.root].edges) renders.push_back(g.edges[e].fired.render(f.sys));
    CHECK(renders == std::vector<std::string>{
                         "tb(fund_int)",
                         "tb(sweep_int_wallet_int_0_p0)",
                         "tb(fund_ext)",
                         "tb(sweep_ext_wallet_ext_0_p0)",
                         "msg(int->ext,preimage(b32))",
                     });
}

TEST_CASE("terminal nodes are settled and edge-free without reorgs") {
    Fixture f;
    ReachabilityGraph g = explore(f.sys, initial_state(f.sys));
    size_t terminals = 0;
    for (const auto& n : g.nodes) {
        if (!n.terminal) continue;
        ++terminals;
        CHECK(n.edges.empty());
        CHECK(contract_settled(f.sys, n.state));
        CHECK(n.state.pool.empty());
    }
    CHECK(terminals > 0);
}

TEST_CASE("exhausting the budget raises a resource error") {
    Fixture f;
    ExplorationParams params;
    params.budget = 3;
    CHECK_THROWS_WITH_AS(explore(f.sys, initial_state(f.sys), params),
                         doctest::Contains("state budget exceeded"), ResourceError);
}

TEST_CASE("graph dot export is deterministic") {
    Fixture f;
    ReachabilityGraph g = explore(f.sys, initial_state(f.sys));
    const std::string dot = export_graph_dot(f.sys, g);
    CHECK(dot == export_graph_dot(f.sys, g));
    CHECK(dot.find("digraph reachability {") == 0);
    CHECK(dot.find("tb(fund_int)") != std::string::npos);
    CHECK(dot.find("peripheries=2") != std::string::npos);
}
