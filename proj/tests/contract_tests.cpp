// Copyright (c) 2026 The Tracenet developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <doctest.h>
#include <json.hpp>

#include <tracenet/contract.hpp>
#include <tracenet/explorer.hpp>

#include <functional>
#include <string>
#include <vector>

using namespace tracenet;

namespace {

std::string contract_path(const std::string& name) {
    return std::string(TRACENET_CONTRACTS_DIR) + "/" + name;
}

const std::vector<std::string> kBundled{
    "atomic_swap_htlc.json",
    "atomic_swap_htlc_equal.json",
    "atomic_swap_htlc_equal_funded.json",
    "atomic_swap_adaptor.json",
    "atomic_swap_adaptor_equal.json",
};

// Base contract with one field edited, for validation tests.
std::string mutated(const std::function<void(nlohmann::json&)>& edit) {
    nlohmann::json j =
        nlohmann::json::parse(serialize_contract(load_contract(contract_path("atomic_swap_htlc.json"))));
    edit(j);
    return j.dump();
}

std::string error_of(const std::string& text) {
    try {
        parse_contract(text);
    } catch (const InputError& e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST_CASE("bundled contracts round-trip through the serializer") {
    for (const auto& name : kBundled) {
        CAPTURE(name);
        const ContractDescription d = load_contract(contract_path(name));
        const std::string text = serialize_contract(d);
        CHECK(parse_contract(text) == d);
        CHECK(serialize_contract(parse_contract(text)) == text);
    }
}

TEST_CASE("hash swap contract instantiates with the expected shape") {
    LoadedContract lc = instantiate(load_contract(contract_path("atomic_swap_htlc.json")));
    CHECK(lc.desc.templates.size() == 2);
    CHECK(lc.universe->declared_count() == 2);
    // Two claim or refund sweeps per funded script, one per wallet.
    CHECK(lc.universe->templates().size() == 8);
    CHECK(lc.net->transitions.size() == 8);
    CHECK(lc.net->places.size() == 10);
    CHECK(lc.sys.b0 == 100);
    CHECK(lc.policy.actor == Actor::Int);
    CHECK(lc.policy.min_balance == 100);

    CHECK(lc.root.h_after == 100);
    CHECK(lc.root.marked(lc.net->place_id({"wallet_int", 0})));
    CHECK(lc.root.marked(lc.net->place_id({"wallet_ext", 0})));
    CHECK(!lc.root.marked(lc.net->place_id({"fund_int", 0})));

    const int b32 = lc.universe->find_object({KnowledgeObject::Kind::Preimage, "b32", "", ""});
    REQUIRE(b32 >= 0);
    CHECK(lc.root.k[0].get(b32));
    CHECK(!lc.root.k[1].get(b32));
}

TEST_CASE("funded variant replays its initial trace into the root state") {
    LoadedContract lc =
        instantiate(load_contract(contract_path("atomic_swap_htlc_equal_funded.json")));
    CHECK(lc.root.h_after == 100);
    CHECK(lc.root.marked(lc.net->place_id({"fund_int", 0})));
    CHECK(lc.root.marked(lc.net->place_id({"fund_ext", 0})));
    CHECK(!lc.root.marked(lc.net->place_id({"wallet_int", 0})));
    CHECK(lc.root.history.size() == 2);
    CHECK(lc.root.pool.empty());
}

TEST_CASE("adaptor contract declares pre-signatures to both holders") {
    LoadedContract lc = instantiate(load_contract(contract_path("atomic_swap_adaptor.json")));
    const std::string swap_int = lc.universe->by_name("swap_int")->id;
    const std::string swap_ext = lc.universe->by_name("swap_ext")->id;
    const int p_int = lc.universe->find_object(
        {KnowledgeObject::Kind::PreSignature, "pk_ext", swap_int, "pk_y"});
    const int p_ext = lc.universe->find_object(
        {KnowledgeObject::Kind::PreSignature, "pk_int", swap_ext, "pk_y"});
    REQUIRE(p_int >= 0);
    REQUIRE(p_ext >= 0);
    for (int a = 0; a < 2; ++a) {
        CHECK(lc.root.k[a].get(p_int));
        CHECK(lc.root.k[a].get(p_ext));
    }
    const int y = lc.universe->find_object({KnowledgeObject::Kind::AdaptorPriv, "pk_y", "", ""});
    REQUIRE(y >= 0);
    CHECK(lc.root.k[0].get(y));
    CHECK(!lc.root.k[1].get(y));
}

TEST_CASE("contract validation names the violated rule") {
    CHECK(error_of(mutated([](nlohmann::json& j) { j["version"] = 2; })) ==
          "unsupported contract version 2");
    CHECK(error_of(mutated([](nlohmann::json& j) {
              j["actors"]["ext"]["keys"].push_back("pk_int");
          })) == "key 'pk_int' is declared twice");
    CHECK(error_of(mutated([](nlohmann::json& j) {
              j["actors"]["int"]["preimages"].push_back("zz");
          })) == "int holds preimage of undeclared digest 'zz'");
    CHECK(error_of(mutated([](nlohmann::json& j) {
              j["actors"]["ext"]["sweep_key"] = "pk_int";
          })) == "ext.sweep_key 'pk_int' is not one of its keys");
    CHECK(error_of(mutated([](nlohmann::json& j) {
              j["templates"][0]["outs"][0]["value"] = 90;
          })) == "value conservation violated in template 'fund_int' (in 100, out 90)");
    CHECK(error_of(mutated([](nlohmann::json& j) {
              j["templates"][0]["ins"][0]["prevout"] = "wallet_int";
          })) == "template 'fund_int' input must be '<tx>:<index>', got 'wallet_int'");
    CHECK(error_of(mutated([](nlohmann::json& j) {
              j["templates"][0]["ins"][0]["prevout"] = "nosuch:0";
          })) == "template 'fund_int' spends undeclared output 'nosuch:0'");
    CHECK(error_of(mutated([](nlohmann::json& j) {
              j["templates"][0]["outs"][0]["script"] = "pk(pk_zz)";
          })) == "template 'fund_int' output 0 references undeclared key 'pk_zz'");
    CHECK(error_of(mutated([](nlohmann::json& j) {
              j["params"]["message_payloads"].push_back("siggy");
          })) == "unknown message payload kind 'siggy'");
    CHECK(error_of(mutated([](nlohmann::json& j) { j["params"]["reorg_depth"] = -1; })) ==
          "reorg_depth must be non-negative");
    CHECK(error_of(mutated([](nlohmann::json& j) { j["policy"] = "balance:bob:1"; })) ==
          "unknown policy actor 'bob'");
    CHECK(error_of(mutated([](nlohmann::json& j) {
              j["funding_outputs"][1] = j["funding_outputs"][0];
          })) == "funding output 'wallet_int:0' is declared twice");
    CHECK(error_of(mutated([](nlohmann::json& j) {
              j["funding_outputs"][0]["confirmed_height"] = 101;
          })) == "funding output 'wallet_int' confirms above the initial blockheight");
    CHECK(error_of("]") .substr(0, 20) == "contract parse error");
    CHECK(error_of("[]") == "contract must be a JSON object");
}

TEST_CASE("replay trace follows waits, broadcasts, and confirmation delays") {
    ContractDescription d = load_contract(contract_path("atomic_swap_htlc.json"));

    SUBCASE("pure wait advances the height") {
        d.initial_trace = {"d(5)"};
        LoadedContract lc = instantiate(d);
        CHECK(lc.root.h_after == 105);
        CHECK(lc.root.history.empty());
    }
    SUBCASE("one funding step consumes the wallet") {
        d.initial_trace = {"fund_int"};
        LoadedContract lc = instantiate(d);
        CHECK(lc.root.marked(lc.net->place_id({"fund_int", 0})));
        CHECK(!lc.root.marked(lc.net->place_id({"wallet_int", 0})));
        CHECK(lc.root.h_after == 100);
    }
    SUBCASE("confirmation delay postpones the arrival") {
        d.conf_delay[0] = 2;
        d.initial_trace = {"fund_int"};
        LoadedContract lc = instantiate(d);
        const int p = lc.net->place_id({"fund_int", 0});
        REQUIRE(lc.root.marked(p));
        CHECK(lc.root.h_after == 102);
        CHECK(lc.root.arrival.at(p) == 102);
    }
    SUBCASE("relative locks are waited out") {
        d.initial_trace = {"fund_ext", "sweep_ext_fund_ext_0_p1"};
        LoadedContract lc = instantiate(d);
        CHECK(lc.root.h_after == 110);
        CHECK(lc.root.marked(lc.net->place_id({"sweep_ext_fund_ext_0_p1", 0})));
    }
    SUBCASE("unknown labels are rejected") {
        d.initial_trace = {"nope"};
        CHECK_THROWS_WITH_AS(instantiate(std::move(d)), "unknown trace step 'nope'", InputError);
    }
    SUBCASE("steps with unmet dependencies are rejected") {
        d.initial_trace = {"sweep_int_fund_ext_0_p0"};
        CHECK_THROWS_WITH_AS(instantiate(std::move(d)),
                             "trace step 'sweep_int_fund_ext_0_p0' can never fire", InputError);
    }
}

TEST_CASE("unconfirmed funding leaves its spenders dead until funded") {
    ContractDescription d = load_contract(contract_path("atomic_swap_htlc.json"));
    d.funding_outputs[1].confirmed_height.reset();  // wallet_ext not on-chain
    LoadedContract lc = instantiate(std::move(d));
    CHECK(!lc.root.marked(lc.net->place_id({"wallet_ext", 0})));

    const ReachabilityGraph g = explore(lc.sys, lc.root);
    const int dead = lc.net->transition_id("fund_ext");
    REQUIRE(dead >= 0);
    for (const auto& e : g.edges) {
        CHECK(e.fired.transition != dead);
    }
}
