// Copyright (c) 2026 The Tracenet developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <doctest.h>

#include <tracenet/properties.hpp>

#include <memory>
#include <random>
#include <set>
#include <string>
#include <vector>

using namespace tracenet;

namespace {

TxOutput out(Amount value, const std::string& script) {
    return {value, parse_miniscript(script)};
}

// Two-coin hash swap. The preimage holder initiates, the other side responds;
// delta_int / delta_ext are the refund locks guarding each funded output.
struct Swap {
    std::unique_ptr<ContractUniverse> u;
    TraceNet net;
    System sys;

    Swap(Height delta_int, Height delta_ext, Actor holder, Height conf_int = 0,
         Height conf_ext = 0, int reorg = 0) {
        std::vector<FundingOutput> funding{
            {{"wallet_int", 0}, out(100, "pk(pk_int)"), true, 100},
            {{"wallet_ext", 0}, out(100, "pk(pk_ext)"), true, 100},
        };
        TxTemplate fi;
        fi.name = "fund_int";
        fi.ins = {{{"wallet_int", 0}, 0, {}}};
        fi.outs = {out(100, "andor(pk(pk_ext),sha256(b32),and_v(v(pk(pk_int)),older(" +
                               to_dec(delta_int) + ")))")};
        TxTemplate fe;
        fe.name = "fund_ext";
        fe.ins = {{{"wallet_ext", 0}, 0, {}}};
        fe.outs = {out(100, "andor(pk(pk_int),sha256(b32),and_v(v(pk(pk_ext)),older(" +
                               to_dec(delta_ext) + ")))")};
        std::array<ActorSetup, 2> actors;
        actors[0].secrets.keys = {"pk_int"};
        actors[1].secrets.keys = {"pk_ext"};
        actors[static_cast<int>(holder)].secrets.preimages = {"b32"};
        u = std::make_unique<ContractUniverse>(std::vector<TxTemplate>{fi, fe}, funding,
                                               actors, std::vector<PreSignatureDecl>{});
        net = build_net(*u);
        sys.universe = u.get();
        sys.net = &net;
        sys.b0 = 100;
        sys.conf_delay[0] = conf_int;
        sys.conf_delay[1] = conf_ext;
        sys.reorg_depth = reorg;
        sys.message_kinds = {KnowledgeObject::Kind::Preimage};
    }

    int tid(const std::string& label) const {
        for (int t = 0; t < static_cast<int>(net.transitions.size()); ++t) {
            if (net.transitions[t].label == label) return t;
        }
        FAIL("no transition ", label);
        return -1;
    }

    TraceNetState settle(const TraceNetState& s, Actor a, const std::string& label) const {
        const int t = tid(label);
        return fire_onchain(sys, fire_broadcast(sys, s, a, t), a, t);
    }

    TraceNetState funded() const {
        TraceNetState s = initial_state(sys);
        s = settle(s, Actor::Int, "fund_int");
        return settle(s, Actor::Ext, "fund_ext");
    }
};

// One coin only the counterparty can sweep; the verifier can never satisfy a
// positive balance policy.
struct LostCoin {
    std::unique_ptr<ContractUniverse> u;
    TraceNet net;
    System sys;

    explicit LostCoin(int reorg) {
        std::vector<FundingOutput> funding{{{"coin", 0}, out(100, "pk(pk_ext)"), true, 100}};
        std::array<ActorSetup, 2> actors;
        actors[0].secrets.keys = {"pk_int"};
        actors[1].secrets.keys = {"pk_ext"};
        u = std::make_unique<ContractUniverse>(std::vector<TxTemplate>{}, funding, actors,
                                               std::vector<PreSignatureDecl>{});
        net = build_net(*u);
        sys.universe = u.get();
        sys.net = &net;
        sys.b0 = 100;
        sys.reorg_depth = reorg;
    }
};

// Two coins, no declared templates. A coin locked behind both signatures has
// no unilateral sweep and stays marked in every settlement; replacement
// scripts can unstick it or hand coin_a to the counterparty.
struct TwoCoins {
    std::unique_ptr<ContractUniverse> u;
    TraceNet net;
    System sys;

    TwoCoins(const std::string& a_script = "pk(pk_int)",
             const std::string& b_script = "and_v(v(pk(pk_int)),pk(pk_ext))") {
        std::vector<FundingOutput> funding{
            {{"coin_a", 0}, out(100, a_script), true, 100},
            {{"coin_b", 0}, out(40, b_script), true, 100},
        };
        std::array<ActorSetup, 2> actors;
        actors[0].secrets.keys = {"pk_int"};
        actors[1].secrets.keys = {"pk_ext"};
        u = std::make_unique<ContractUniverse>(std::vector<TxTemplate>{}, funding, actors,
                                               std::vector<PreSignatureDecl>{});
        net = build_net(*u);
        sys.universe = u.get();
        sys.net = &net;
        sys.b0 = 100;
    }
};

// Synthetic graphs over explicit policy flags, for checking the safety game
// in isolation.
struct GraphBuilder {
    ReachabilityGraph g;
    std::vector<bool> ok;

    int node(bool terminal, bool policy, TraceNetState st = {}) {
        const int id = static_cast<int>(g.nodes.size());
        g.nodes.push_back({std::move(st), "n" + to_dec(id), {}, terminal});
        ok.push_back(policy);
        return id;
    }

    void edge(int from, int to, FiredTransition::Kind kind, Actor actor = Actor::Int) {
        FiredTransition f;
        f.kind = kind;
        f.actor = actor;
        g.nodes[from].edges.push_back(static_cast<int>(g.edges.size()));
        g.edges.push_back({f, from, to});
    }
};

using K = FiredTransition::Kind;

// One application of the safety-game operator, written with plain forward
// loops. Used both to certify fixpoints and, unioned over every
// self-certifying subset, as an independent oracle for the greatest fixpoint.
std::vector<bool> game_step(const ReachabilityGraph& g, const std::vector<bool>& ok,
                            const std::vector<bool>& s) {
    const int n = static_cast<int>(g.nodes.size());
    std::vector<bool> good(n, true);
    for (int i = 0; i < n; ++i) {
        for (int e : g.nodes[i].edges) {
            const FiredTransition& f = g.edges[e].fired;
            const bool adversarial =
                f.kind == K::Reorg || (f.kind != K::Delay && f.actor == Actor::Ext);
            if (adversarial && !s[g.edges[e].to]) good[i] = false;
        }
    }
    std::vector<bool> reach(n, false);
    for (bool changed = true; changed;) {
        changed = false;
        for (int i = 0; i < n; ++i) {
            if (reach[i] || !s[i] || !good[i]) continue;
            bool r = ok[i];
            for (int e : g.nodes[i].edges) {
                const FiredTransition& f = g.edges[e].fired;
                const bool steerable =
                    f.kind == K::Delay || (f.kind != K::Reorg && f.actor == Actor::Int);
                if (steerable && reach[g.edges[e].to]) r = true;
            }
            if (r) {
                reach[i] = true;
                changed = true;
            }
        }
    }
    std::vector<bool> next(n);
    for (int i = 0; i < n; ++i) {
        next[i] = good[i] && (g.nodes[i].terminal ? ok[i] : reach[i]);
    }
    return next;
}

// The greatest fixpoint of a monotone operator is the union of all subsets
// it expands.
std::vector<bool> oracle_safe(const ReachabilityGraph& g, const std::vector<bool>& ok) {
    const int n = static_cast<int>(g.nodes.size());
    REQUIRE(n <= 16);
    std::vector<bool> best(n, false);
    for (uint32_t mask = 0; mask < (1u << n); ++mask) {
        std::vector<bool> s(n);
        for (int i = 0; i < n; ++i) s[i] = (mask >> i) & 1;
        const std::vector<bool> t = game_step(g, ok, s);
        bool post = true;
        for (int i = 0; i < n && post; ++i) {
            if (s[i] && !t[i]) post = false;
        }
        if (!post) continue;
        for (int i = 0; i < n; ++i) {
            if (s[i]) best[i] = true;
        }
    }
    return best;
}

} // namespace

TEST_CASE("policy parsing round trips and rejects malformed text") {
    const SafetyPolicy p = parse_policy("balance:int:100");
    CHECK(p.actor == Actor::Int);
    CHECK(p.min_balance == 100);
    CHECK(policy_to_string(p) == "balance:int:100");
    CHECK(parse_policy("balance:ext:0").actor == Actor::Ext);

    CHECK_THROWS_AS(parse_policy("balance:int"), InputError);
    CHECK_THROWS_AS(parse_policy("ratio:int:1"), InputError);
    CHECK_THROWS_AS(parse_policy("balance:bob:5"), InputError);
    CHECK_THROWS_AS(parse_policy("balance:int:-3"), InputError);
    CHECK_THROWS_AS(parse_policy("balance:int:12x"), InputError);
    CHECK_THROWS_AS(parse_policy("balance:int:"), InputError);
    CHECK_THROWS_AS(parse_policy(""), InputError);
}

TEST_CASE("owned balance counts only outputs every witness path secures") {
    Swap f(15, 10, Actor::Int);
    const TraceNetState z0 = initial_state(f.sys);
    CHECK(owned_balance(f.sys, z0, Actor::Int) == 100);
    CHECK(owned_balance(f.sys, z0, Actor::Ext) == 100);
    CHECK(eval_policy(f.sys, z0, parse_policy("balance:int:100")));
    CHECK_FALSE(eval_policy(f.sys, z0, parse_policy("balance:int:101")));

    // Funded outputs have a claim path and a refund path with different
    // owners, so neither side may count them.
    const TraceNetState zf = f.funded();
    CHECK(owned_balance(f.sys, zf, Actor::Int) == 0);
    CHECK(owned_balance(f.sys, zf, Actor::Ext) == 0);

    // Completed swap: each side holds a single-key sweep output.
    TraceNetState done = f.settle(zf, Actor::Int, "sweep_int_fund_ext_0_p0");
    done = f.settle(done, Actor::Ext, "sweep_ext_fund_int_0_p0");
    CHECK(owned_balance(f.sys, done, Actor::Int) == 100);
    CHECK(owned_balance(f.sys, done, Actor::Ext) == 100);
}

TEST_CASE("owned balance accepts an output whose every path one actor holds") {
    std::vector<FundingOutput> funding{
        {{"coin", 0}, out(70, "andor(pk(pk_int),sha256(b32),and_v(v(pk(pk_int)),older(5)))"),
         true, 100}};
    std::array<ActorSetup, 2> actors;
    actors[0].secrets.keys = {"pk_int"};
    actors[0].secrets.preimages = {"b32"};
    actors[1].secrets.keys = {"pk_ext"};
    ContractUniverse u(std::vector<TxTemplate>{}, funding, actors,
                       std::vector<PreSignatureDecl>{});
    TraceNet net = build_net(u);
    System sys;
    sys.universe = &u;
    sys.net = &net;
    sys.b0 = 100;
    const TraceNetState z0 = initial_state(sys);
    CHECK(owned_balance(sys, z0, Actor::Int) == 70);
    CHECK(owned_balance(sys, z0, Actor::Ext) == 0);
}

TEST_CASE("safety game on hand built graphs") {
    SUBCASE("own move to a satisfied settlement is safe") {
        GraphBuilder b;
        const int root = b.node(false, false);
        const int t1 = b.node(true, true);
        b.edge(root, t1, K::Broadcast, Actor::Int);
        CHECK(safe_states_core(b.g, b.ok) == std::vector<bool>{true, true});
    }
    SUBCASE("adversarial move to a failed settlement poisons the source") {
        GraphBuilder b;
        const int root = b.node(false, false);
        const int t1 = b.node(true, true);
        const int t2 = b.node(true, false);
        b.edge(root, t1, K::Broadcast, Actor::Int);
        b.edge(root, t2, K::Broadcast, Actor::Ext);
        CHECK(safe_states_core(b.g, b.ok) == std::vector<bool>{false, true, false});
    }
    SUBCASE("waiting is a move of the verifier") {
        GraphBuilder b;
        const int root = b.node(false, false);
        const int mid = b.node(false, false);
        const int t1 = b.node(true, true);
        b.edge(root, mid, K::Delay);
        b.edge(mid, t1, K::OnChain, Actor::Int);
        CHECK(safe_states_core(b.g, b.ok) == std::vector<bool>{true, true, true});
    }
    SUBCASE("a reorg is adversarial even when replay favors the verifier") {
        GraphBuilder b;
        const int root = b.node(false, false);
        const int t1 = b.node(true, true);
        const int t2 = b.node(true, false);
        b.edge(root, t1, K::Broadcast, Actor::Int);
        b.edge(root, t2, K::Reorg, Actor::Int);
        CHECK(safe_states_core(b.g, b.ok) == std::vector<bool>{false, true, false});
    }
    SUBCASE("recovery after an adversarial move keeps the source safe") {
        GraphBuilder b;
        const int root = b.node(false, false);
        const int mid = b.node(false, false);
        const int t1 = b.node(true, true);
        b.edge(root, mid, K::Broadcast, Actor::Ext);
        b.edge(root, t1, K::OnChain, Actor::Int);
        b.edge(mid, t1, K::OnChain, Actor::Int);
        CHECK(safe_states_core(b.g, b.ok) == std::vector<bool>{true, true, true});
    }
    SUBCASE("a satisfied non-terminal with no moves left is a valid hold") {
        GraphBuilder b;
        const int root = b.node(false, true);
        b.edge(root, root, K::Delay);
        CHECK(safe_states_core(b.g, b.ok) == std::vector<bool>{true});
    }
    SUBCASE("an unsatisfied loop with no settlement is unsafe") {
        GraphBuilder b;
        const int root = b.node(false, false);
        b.edge(root, root, K::Delay);
        CHECK(safe_states_core(b.g, b.ok) == std::vector<bool>{false});
    }
}

TEST_CASE("safety game matches the subset enumeration oracle on random graphs") {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 300; ++trial) {
        GraphBuilder b;
        const int n = 1 + static_cast<int>(rng() % 6);
        for (int i = 0; i < n; ++i) {
            b.node(rng() % 10 < 3, rng() % 2 == 0);
        }
        for (int i = 0; i < n; ++i) {
            if (b.g.nodes[i].terminal) continue;
            const int degree = 1 + static_cast<int>(rng() % 3);
            for (int e = 0; e < degree; ++e) {
                const K kind = static_cast<K>(rng() % 5);
                const Actor actor = rng() % 2 == 0 ? Actor::Int : Actor::Ext;
                b.edge(i, static_cast<int>(rng() % n), kind, actor);
            }
        }
        const std::vector<bool> got = safe_states_core(b.g, b.ok);
        const std::vector<bool> want = oracle_safe(b.g, b.ok);
        REQUIRE_MESSAGE(got == want, "trial ", trial);
    }
}

TEST_CASE("safe region of the swap graph is a fixpoint and recomputes identically") {
    Swap f(15, 10, Actor::Int);
    const ReachabilityGraph g = explore(f.sys, initial_state(f.sys), {});
    const SafetyPolicy p = parse_policy("balance:int:100");
    std::vector<bool> ok(g.nodes.size());
    for (size_t i = 0; i < g.nodes.size(); ++i) ok[i] = eval_policy(f.sys, g.nodes[i].state, p);

    const std::vector<bool> safe = safe_states(f.sys, g, p);
    CHECK(game_step(g, ok, safe) == safe);
    CHECK(safe_states(f.sys, g, p) == safe);
    CHECK(safe[g.root]);
}

TEST_CASE("unequal refund locks let the preimage holder execute trustlessly") {
    Swap f(15, 10, Actor::Int);
    const ReachabilityGraph g = explore(f.sys, initial_state(f.sys), {});
    CHECK(g.nodes.size() == 2120);
    const Verdict v = trustless_execution(f.sys, g, parse_policy("balance:int:100"));
    CHECK(v.holds);
    CHECK(v.reason == "a satisfied settlement is reachable inside the safe region");
    CHECK(v.safe[g.root]);

    // The witness walks safe states only and ends in a satisfied settlement.
    int at = g.root;
    for (int e : v.trace) {
        CHECK(g.edges[e].from == at);
        at = g.edges[e].to;
        CHECK(v.safe[at]);
    }
    CHECK(g.nodes[at].terminal);
    CHECK(eval_policy(f.sys, g.nodes[at].state, parse_policy("balance:int:100")));
    CHECK(render_path(f.sys, g, v.trace) ==
          std::vector<std::string>{"tb(sweep_int_wallet_int_0_p0)",
                                   "tb(sweep_ext_wallet_ext_0_p0)",
                                   "sweep_int_wallet_int_0_p0",
                                   "sweep_ext_wallet_ext_0_p0"});
}

TEST_CASE("equal refund locks break trustless execution once both sides fund") {
    Swap f(10, 10, Actor::Ext);
    const ReachabilityGraph g = explore(f.sys, f.funded(), {});
    CHECK(g.nodes.size() == 118);
    const Verdict v = trustless_execution(f.sys, g, parse_policy("balance:int:100"));
    CHECK_FALSE(v.holds);
    CHECK(v.reason == "the initial state is outside the safe region");
    CHECK_FALSE(v.safe[g.root]);

    // The counterparty claims with its preimage, waits out the shared lock,
    // and refunds its own coin.
    const std::vector<std::string> steps = render_path(f.sys, g, v.trace);
    CHECK(steps == std::vector<std::string>{"tb(sweep_ext_fund_int_0_p0)",
                                            "sweep_ext_fund_int_0_p0", "d(10)",
                                            "tb(sweep_ext_fund_ext_0_p1)",
                                            "sweep_ext_fund_ext_0_p1"});
    int at = g.root;
    for (int e : v.trace) at = g.edges[e].to;
    CHECK(g.nodes[at].terminal);
    CHECK_FALSE(eval_policy(f.sys, g.nodes[at].state, parse_policy("balance:int:100")));
}

TEST_CASE("equal refund locks are still safe before the responder funds") {
    Swap f(10, 10, Actor::Ext);
    const ReachabilityGraph g = explore(f.sys, initial_state(f.sys), {});
    const Verdict v = trustless_execution(f.sys, g, parse_policy("balance:int:100"));
    CHECK(v.holds);
}

TEST_CASE("a safe region without settlements reports the missing witness") {
    Swap f(15, 10, Actor::Int);
    GraphBuilder b;
    const int root = b.node(false, true, initial_state(f.sys));
    b.edge(root, root, K::Delay);
    const Verdict v = trustless_execution(f.sys, b.g, parse_policy("balance:int:100"));
    CHECK_FALSE(v.holds);
    CHECK(v.safe[0]);
    CHECK(v.trace.empty());
    CHECK(v.reason == "no satisfied settlement is reachable inside the safe region");
}

TEST_CASE("a contract failing without reorgs keeps failing with them") {
    for (int reorg : {0, 1}) {
        LostCoin f(reorg);
        const ReachabilityGraph g = explore(f.sys, initial_state(f.sys), {});
        const Verdict v = trustless_execution(f.sys, g, parse_policy("balance:int:100"));
        CHECK_FALSE(v.holds);
        CHECK(v.reason == "the initial state is outside the safe region");
    }
}

TEST_CASE("update safety compares settlements over the shared outputs") {
    const SafetyPolicy p = parse_policy("balance:int:100");

    SUBCASE("replacing a contract with itself holds") {
        TwoCoins oldc, newc;
        const ReachabilityGraph og = explore(oldc.sys, initial_state(oldc.sys), {});
        const ReachabilityGraph ng = explore(newc.sys, initial_state(newc.sys), {});
        const UpdateVerdict v = update_safety(oldc.sys, og, newc.sys, ng, p);
        CHECK(v.holds);
        CHECK(v.replacement.holds);
        CHECK(v.lost.empty());
    }
    SUBCASE("a replacement that spends a previously stuck output drops a settlement") {
        TwoCoins oldc, newc("pk(pk_int)", "pk(pk_int)");
        const ReachabilityGraph og = explore(oldc.sys, initial_state(oldc.sys), {});
        const ReachabilityGraph ng = explore(newc.sys, initial_state(newc.sys), {});
        const UpdateVerdict v = update_safety(oldc.sys, og, newc.sys, ng, p);
        CHECK_FALSE(v.holds);
        CHECK(v.replacement.holds);
        CHECK(v.lost == std::vector<std::string>{"coin_b:0 sweep_int_coin_a_0_p0:0"});
    }
    SUBCASE("a replacement the verifier cannot execute fails") {
        TwoCoins oldc, newc("pk(pk_ext)", "pk(pk_int)");
        const ReachabilityGraph og = explore(oldc.sys, initial_state(oldc.sys), {});
        const ReachabilityGraph ng = explore(newc.sys, initial_state(newc.sys), {});
        const UpdateVerdict v = update_safety(oldc.sys, og, newc.sys, ng, p);
        CHECK_FALSE(v.holds);
        CHECK_FALSE(v.replacement.holds);
        CHECK(v.lost == std::vector<std::string>{"coin_b:0"});
    }
    SUBCASE("contracts starting from different shared markings are rejected") {
        TwoCoins oldc, newc;
        TraceNetState swept = initial_state(oldc.sys);
        const int t = 0;
        REQUIRE(oldc.net.transitions[t].label == "sweep_int_coin_a_0_p0");
        swept = fire_onchain(oldc.sys, fire_broadcast(oldc.sys, swept, Actor::Int, t),
                             Actor::Int, t);
        const ReachabilityGraph og = explore(oldc.sys, swept, {});
        const ReachabilityGraph ng = explore(newc.sys, initial_state(newc.sys), {});
        CHECK_THROWS_AS(update_safety(oldc.sys, og, newc.sys, ng, p), InputError);
    }
}

TEST_CASE("stability horizon saturates every timing bound of the net") {
    CHECK(stability_horizon(Swap(10, 10, Actor::Ext).sys) == 13);
    CHECK(stability_horizon(Swap(15, 10, Actor::Int).sys) == 18);
    CHECK(stability_horizon(Swap(15, 10, Actor::Int, 2, 3, 1).sys) == 23);
}

TEST_CASE("settled and unarmed states are stable, funded swaps are not") {
    Swap f(10, 10, Actor::Ext);

    SUBCASE("a settled contract never changes again") {
        TraceNetState s = f.funded();
        s = f.settle(s, Actor::Ext, "sweep_ext_fund_int_0_p0");
        s = f.settle(s, Actor::Int, "sweep_int_fund_ext_0_p0");
        const StabilityVerdict v = state_stability(f.sys, s, {});
        CHECK(v.stable);
        CHECK(v.nodes == 1);
        CHECK(v.aged_nodes == 1);
        CHECK(v.first_difference.empty());
    }
    SUBCASE("before funding no clock is armed") {
        const StabilityVerdict v = state_stability(f.sys, initial_state(f.sys), {});
        CHECK(v.stable);
        CHECK(v.nodes == v.aged_nodes);
    }
    SUBCASE("funding arms the refund locks") {
        const StabilityVerdict v = state_stability(f.sys, f.funded(), {});
        CHECK_FALSE(v.stable);
        CHECK(v.nodes == 118);
        CHECK_FALSE(v.first_difference.empty());
    }
}
