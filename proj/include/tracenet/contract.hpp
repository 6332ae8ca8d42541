// Copyright (c) 2026 The Tracenet developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef TRACENET_CONTRACT_HPP
#define TRACENET_CONTRACT_HPP

#include <tracenet/properties.hpp>

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace tracenet {

// Versioned on-disk contract description: the materialized result of an
// off-chain setup phase plus the analysis parameters. Scripts stay text so a
// reloaded serialization compares equal field by field.
struct ContractDescription {
    struct ActorDecl {
        std::vector<std::string> keys;
        std::vector<std::string> preimages;
        std::vector<std::string> adaptor_keys;
        std::string sweep_key;  // empty means the first declared key

        bool operator==(const ActorDecl&) const = default;
    };
    struct PublicDecl {
        std::vector<std::string> keys;  // script keys neither actor holds
        std::vector<std::string> digests;
        std::vector<std::string> adaptor_pubs;

        bool operator==(const PublicDecl&) const = default;
    };
    struct PreSigDecl {
        std::string signer;
        std::string tx;
        std::string adaptor;
        std::vector<std::string> holders;

        bool operator==(const PreSigDecl&) const = default;
    };
    struct FundingDecl {
        std::string txid;
        uint32_t index = 0;
        Amount value = 0;
        std::string script;
        std::optional<Height> confirmed_height;

        bool operator==(const FundingDecl&) const = default;
    };
    struct InputDecl {
        std::string prevout;  // "<tx>:<index>"
        int64_t older = 0;
        std::optional<int> committed;

        bool operator==(const InputDecl&) const = default;
    };
    struct OutputDecl {
        Amount value = 0;
        std::string script;

        bool operator==(const OutputDecl&) const = default;
    };
    struct TemplateDecl {
        std::string name;
        Height after = 0;
        std::vector<InputDecl> ins;
        std::vector<OutputDecl> outs;

        bool operator==(const TemplateDecl&) const = default;
    };

    int version = 1;
    std::array<ActorDecl, 2> actors;
    PublicDecl publics;
    std::vector<PreSigDecl> pre_signatures;
    std::vector<FundingDecl> funding_outputs;
    std::vector<TemplateDecl> templates;
    Height initial_blockheight = 0;
    Height conf_delay[2] = {0, 0};
    int reorg_depth = 0;
    std::vector<std::string> message_payloads;
    std::string policy;
    std::vector<std::string> initial_trace;

    bool operator==(const ContractDescription&) const = default;
};

// Parses and validates. Violated invariants raise InputError naming the
// offending declaration; malformed JSON reports the byte offset.
ContractDescription parse_contract(const std::string& text);
ContractDescription load_contract(const std::string& path);

// Canonical JSON; parse_contract(serialize_contract(d)) == d.
std::string serialize_contract(const ContractDescription& d);

// A description instantiated against the engine. The pointers inside sys
// stay valid across moves because the universe and net are heap-owned.
struct LoadedContract {
    ContractDescription desc;
    std::unique_ptr<ContractUniverse> universe;
    std::unique_ptr<TraceNet> net;
    System sys;
    SafetyPolicy policy;
    TraceNetState root;  // after the initial trace replay
};

LoadedContract instantiate(ContractDescription desc);

// Replays labeled transitions and d(N) waits from a state. Each label fires
// for the first actor able to complete it, broadcasting and waiting out
// confirmation or lock maturity as needed; steps that can never fire raise
// InputError.
TraceNetState replay_trace(const System& sys, TraceNetState s,
                           const std::vector<std::string>& steps);

} // namespace tracenet

#endif // TRACENET_CONTRACT_HPP
