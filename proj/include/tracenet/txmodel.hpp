// Copyright (c) 2026 The Tracenet developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef TRACENET_TXMODEL_HPP
#define TRACENET_TXMODEL_HPP

#include <tracenet/miniscript.hpp>
#include <tracenet/types.hpp>
#include <tracenet/util.hpp>

#include <compare>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace tracenet {

// Points at an output either of a named template or of an external funding
// transaction; the name space is shared and names must be unique.
struct OutputRef {
    std::string tx;
    uint32_t index = 0;

    auto operator<=>(const OutputRef&) const = default;
    std::string to_string() const { return tx + ":" + to_dec(index); }
};

struct TxOutput {
    Amount value = 0;
    MiniscriptNode script;

    bool operator==(const TxOutput&) const = default;
};

struct TxInput {
    OutputRef prevout;
    int64_t older = 0;             // relative lock demanded by this input
    std::optional<int> committed;  // pinned satisfaction path of the prevout

    bool operator==(const TxInput&) const = default;
};

// An unsigned transaction shape. The digest id is a pure function of the
// structure (name excluded) and is assigned once all referenced templates
// have ids of their own.
struct TxTemplate {
    std::string name;
    std::vector<TxInput> ins;
    std::vector<TxOutput> outs;
    Height after = 0;
    std::string id;

    bool operator==(const TxTemplate&) const = default;
};

// Confirmed or assumed outputs that exist outside any template.
struct FundingOutput {
    OutputRef ref;
    TxOutput out;
    bool confirmed = true;
    Height conf_height = 0;
};

class OutputResolver {
public:
    void add_funding(const FundingOutput& f);
    void add_template(const TxTemplate& t);

    const TxOutput* find(const OutputRef& r) const;
    const FundingOutput* funding(const OutputRef& r) const;

private:
    std::map<OutputRef, TxOutput> outs_;
    std::map<OutputRef, FundingOutput> funding_;
};

// One satisfaction-path choice per input. Producibility means every chosen
// path is free of negated terms.
struct WitnessPermutation {
    std::string tx_name;
    std::string tx_id;
    std::vector<int> choice;
    std::vector<SymbolicWitness> witnesses;
    bool multi = false;  // the template admits more than one permutation

    bool producible() const;
    // Transition label: the bare template name when the permutation is
    // unique, otherwise name/p<i0>.<i1>...
    std::string label() const;
};

// All satisfaction-path combinations respecting committed inputs, ordered
// with the first input varying slowest. Unresolvable prevouts are errors.
std::vector<WitnessPermutation> permitted_permutations(const TxTemplate& tx,
                                                       const OutputResolver& res);

// Largest non-negated relative / absolute lock demanded by a witness.
int64_t witness_older_bound(const SymbolicWitness& w);
int64_t witness_after_bound(const SymbolicWitness& w);

// Secrets one actor can wield when producing concrete witness data.
struct SecretSet {
    std::set<std::string> keys;
    std::set<std::string> preimages;
};

// The holder can produce every term: all signature keys and all required
// preimages are in the set, and no term is negated. Timelocks are a matter
// of waiting, not of secrets, and are ignored here.
bool path_owned(const SymbolicWitness& w, const SecretSet& s);

// The actor holds every signature key on the path and the counterparty holds
// none of them. A path without signatures is controlled by anyone.
bool path_controlled(const SymbolicWitness& w, const SecretSet& mine, const SecretSet& theirs);

// First height at which the template may be broadcast: its absolute lock, and
// every input's confirmation height plus that input's relative lock.
Height earliest_broadcast(const TxTemplate& tx, const std::map<OutputRef, Height>& confirmations);

// Digest id and value of a spendable output, as seen by a spender.
struct PrevInfo {
    std::string id;
    Amount value = 0;
};
using PrevLookup = std::function<PrevInfo(const OutputRef&)>;

// Canonical structural digest. Prevouts are encoded by the referenced
// template's digest (or the funding txid verbatim); the name never enters,
// so renaming a template cannot change its identity. Enforces zero-fee value
// conservation for templates with inputs.
std::string template_digest(const TxTemplate& t, const PrevLookup& prev);

// Assigns digest ids in dependency order; reports reference cycles, dangling
// prevouts, and structurally identical declared templates.
void assign_template_ids(std::vector<TxTemplate>& txs, const std::vector<FundingOutput>& funding);

} // namespace tracenet

#endif // TRACENET_TXMODEL_HPP
